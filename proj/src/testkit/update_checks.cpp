#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "rvx/common.h"
#include "rvx/testkit.h"

namespace rvx {

namespace {

constexpr std::string_view kNote = "NOTE: Assertions have been autogenerated by update_checks";

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> prefixes_of(const Stage& st) {
  std::vector<std::string> out;
  auto add_list = [&](std::string_view csv) {
    size_t start = 0;
    while (start <= csv.size()) {
      size_t comma = csv.find(',', start);
      if (comma == std::string_view::npos) comma = csv.size();
      if (comma > start) out.emplace_back(csv.substr(start, comma - start));
      start = comma + 1;
    }
  };
  for (size_t i = 1; i < st.argv.size(); ++i) {
    std::string_view a = st.argv[i];
    while (a.rfind("--", 0) == 0 && a.size() > 2 && a[2] == '-') a.remove_prefix(1);
    if (a.rfind("--", 0) == 0) a.remove_prefix(1);
    for (std::string_view flag : {"-check-prefixes", "-check-prefix"}) {
      if (a == flag && i + 1 < st.argv.size()) {
        add_list(st.argv[++i]);
        break;
      }
      if (a.rfind(std::string(flag) + "=", 0) == 0) {
        add_list(a.substr(flag.size() + 1));
        break;
      }
    }
  }
  if (out.empty()) out.push_back("CHECK");
  return out;
}

// Function label -> body lines, from assembly printed by llc.
std::map<std::string, std::vector<std::string>> split_functions(std::string_view asm_text) {
  std::map<std::string, std::vector<std::string>> out;
  std::vector<std::string>* cur = nullptr;
  for (const auto& line : lines_of(asm_text)) {
    if (line.empty() || (line[0] == '\t' && line.size() > 1 && line[1] == '.')) {
      cur = nullptr;
      continue;
    }
    if (line[0] != '\t' && line[0] != ' ' && line[0] != '#' && line.back() == ':') {
      cur = &out[line.substr(0, line.size() - 1)];
      continue;
    }
    if (cur) cur->push_back(line);
  }
  return out;
}

std::string check_text(std::string_view line) {
  std::string s;
  if (!line.empty() && line[0] == '\t') s = "  ";
  std::string body(line);
  for (char& c : body)
    if (c == '\t') c = ' ';
  size_t b = body.find_first_not_of(' ');
  s += b == std::string::npos ? "" : body.substr(b);
  // Keep internal spacing single so the check reads like the listing.
  std::string out;
  for (char c : s) {
    if (c == ' ' && !out.empty() && out.back() == ' ' && out.find_first_not_of(' ') != std::string::npos) continue;
    out += c;
  }
  return out;
}

bool is_directive_for(const std::string& line, const std::vector<std::string>& prefixes, char comment) {
  size_t i = line.find_first_not_of(" \t");
  if (i == std::string::npos || line[i] != comment) return false;
  while (i < line.size() && (line[i] == comment || line[i] == ' ' || line[i] == '\t')) ++i;
  for (const auto& p : prefixes) {
    if (line.compare(i, p.size(), p) != 0) continue;
    std::string_view rest = std::string_view(line).substr(i + p.size());
    if (rest.rfind(":", 0) == 0 || rest.rfind("-NEXT:", 0) == 0 || rest.rfind("-LABEL:", 0) == 0) return true;
  }
  return false;
}

}  // namespace

UpdateResult update_checks(std::string_view path, const CommandRunner& run) {
  UpdateResult res;
  std::string original;
  {
    std::ifstream in{std::string(path), std::ios::binary};
    if (!in) {
      res.error = fmt::format("cannot open '{}'", path);
      return res;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    original = ss.str();
  }
  const bool is_ir = path.size() > 3 && path.substr(path.size() - 3) == ".ll";
  const char comment = is_ir ? ';' : '#';
  std::vector<std::string> lines = lines_of(original);

  static const std::regex define_re(R"(^\s*define\b.*@([A-Za-z_.$][\w.$]*)\s*\()");
  bool has_functions = false;
  for (const auto& l : lines) has_functions = has_functions || std::regex_search(l, define_re);
  if (!has_functions) {
    res.ok = true;
    res.content = original;
    return res;
  }

  std::vector<std::pair<std::string, std::map<std::string, std::vector<std::string>>>> outputs;
  std::vector<std::string> all_prefixes;
  try {
    for (const auto& run_line : parse_run_lines(original, path)) {
      auto stages = parse_pipeline(run_line, path, "/tmp");
      size_t fc = stages.size();
      for (size_t i = 0; i < stages.size(); ++i)
        if (stages[i].argv[0] == "filecheck") fc = i;
      if (fc == stages.size()) continue;
      auto prefixes = prefixes_of(stages[fc]);
      all_prefixes.insert(all_prefixes.end(), prefixes.begin(), prefixes.end());
      std::vector<Stage> producer(stages.begin(), stages.begin() + static_cast<std::ptrdiff_t>(fc));
      if (producer.empty()) continue;
      auto first = run_stages(producer, run);
      auto second = run_stages(producer, run);
      if (first.status != 0) {
        res.error = fmt::format("{}: RUN pipeline failed: {}\n{}", path, first.failed_stage, first.err);
        return res;
      }
      if (first.out != second.out) {
        auto a = lines_of(first.out), b = lines_of(second.out);
        size_t k = 0;
        while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
        res.error = fmt::format(
            "{}: output is not deterministic; refusing to update\n--- first run, line {}\n-{}\n+++ second run\n+{}\n",
            path, k + 1, k < a.size() ? a[k] : "<end>", k < b.size() ? b[k] : "<end>");
        return res;
      }
      outputs.emplace_back(prefixes.front(), split_functions(first.out));
    }
  } catch (const std::exception& e) {
    res.error = e.what();
    return res;
  }

  std::vector<std::string> out;
  out.push_back(fmt::format("{} {}", comment, kNote));
  for (const auto& l : lines) {
    if (l.find(kNote) != std::string::npos) continue;
    if (is_directive_for(l, all_prefixes, comment)) continue;
    out.push_back(l);
    std::smatch m;
    if (!std::regex_search(l, m, define_re)) continue;
    std::string fn = m[1].str();
    for (const auto& [prefix, fns] : outputs) {
      auto it = fns.find(fn);
      if (it == fns.end()) continue;
      out.push_back(fmt::format("{} {}-LABEL: {}:", comment, prefix, fn));
      bool first = true;
      for (const auto& body : it->second) {
        if (first) out.push_back(fmt::format("{} {}:{}{}", comment, prefix, std::string(7, ' '), check_text(body)));
        else out.push_back(fmt::format("{} {}-NEXT:  {}", comment, prefix, check_text(body)));
        first = false;
      }
    }
  }
  std::string content;
  for (const auto& l : out) content += l + "\n";
  res.ok = true;
  res.changed = content != original;
  res.content = std::move(content);
  return res;
}

}  // namespace rvx
