#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <fmt/format.h>

#include "rvx/common.h"
#include "rvx/testkit.h"

namespace fs = std::filesystem;

namespace rvx {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (size_t at = s.find(from); at != std::string::npos; at = s.find(from, at + to.size()))
    s.replace(at, from.size(), to);
}

std::vector<std::string> tokenize(std::string_view s, std::string_view where) {
  std::vector<std::string> out;
  std::string cur;
  bool have = false;
  char quote = 0;
  for (char c : s) {
    if (quote) {
      if (c == quote) quote = 0;
      else cur += c;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      have = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (have) out.push_back(std::move(cur));
      cur.clear();
      have = false;
      continue;
    }
    cur += c;
    have = true;
  }
  if (quote) throw Error(fmt::format("{}: unterminated quote in RUN line", where));
  if (have) out.push_back(std::move(cur));
  return out;
}

std::string display_name(const std::string& test, const std::vector<std::string>& roots) {
  fs::path p = fs::weakly_canonical(test);
  for (const auto& r : roots) {
    fs::path root = fs::weakly_canonical(r);
    if (!fs::is_directory(root)) continue;
    auto rel = p.lexically_relative(root);
    if (!rel.empty() && *rel.begin() != "..") return (root.filename() / rel).generic_string();
  }
  return (p.parent_path().filename() / p.filename()).generic_string();
}

}  // namespace

std::vector<std::string> parse_run_lines(std::string_view text, std::string_view path) {
  std::vector<std::string> out;
  std::string pending;
  bool continuing = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    size_t at = line.find("RUN:");
    if (at == std::string::npos) {
      if (continuing) throw Error(fmt::format("{}: RUN line continuation is not followed by a RUN line", path));
      continue;
    }
    std::string body = trim(std::string_view(line).substr(at + 4));
    continuing = !body.empty() && body.back() == '\\';
    if (continuing) body = trim(std::string_view(body).substr(0, body.size() - 1));
    pending += (pending.empty() ? "" : " ") + body;
    if (!continuing) {
      out.push_back(std::move(pending));
      pending.clear();
    }
  }
  if (continuing) throw Error(fmt::format("{}: last RUN line ends with a continuation", path));
  if (out.empty()) throw Error(fmt::format("{}: no RUN lines", path));
  return out;
}

std::vector<Stage> parse_pipeline(std::string_view run_line, std::string_view test_path, std::string_view tmp_dir) {
  std::string line(run_line);
  replace_all(line, "%s", test_path);
  replace_all(line, "%S", fs::path(test_path).parent_path().string());
  replace_all(line, "%t", fmt::format("{}/out", tmp_dir));
  std::vector<Stage> stages;
  std::vector<std::string> parts;
  size_t start = 0;
  for (size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '|') {
      parts.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  for (const auto& part : parts) {
    Stage st;
    auto toks = tokenize(part, test_path);
    for (size_t i = 0; i < toks.size(); ++i) {
      const std::string& t = toks[i];
      if (t == "2>&1") {
        st.merge_stderr = true;
      } else if (t == "<") {
        if (i + 1 >= toks.size()) throw Error(fmt::format("{}: '<' without a file", test_path));
        st.stdin_file = toks[++i];
      } else if (t.size() > 1 && t[0] == '<') {
        st.stdin_file = t.substr(1);
      } else if (t[0] == '>' || t.rfind("2>", 0) == 0 || t == "&&" || t == ";") {
        throw Error(fmt::format("{}: unsupported shell syntax '{}' in RUN line", test_path, t));
      } else {
        st.argv.push_back(t);
      }
    }
    if (!st.argv.empty() && st.argv.front() == "rvx") st.argv.erase(st.argv.begin());
    if (st.argv.empty()) throw Error(fmt::format("{}: empty pipeline stage in RUN line", test_path));
    stages.push_back(std::move(st));
  }
  return stages;
}

PipelineResult run_stages(const std::vector<Stage>& stages, const CommandRunner& run) {
  PipelineResult res;
  std::string input;
  for (const auto& st : stages) {
    if (!st.stdin_file.empty()) input = read_file(st.stdin_file);
    std::string out, err;
    int status = run(st.argv, input, out, err);
    if (st.merge_stderr) out = err + out;
    else res.err += err;
    if (status != 0) {
      res.status = status;
      res.out = std::move(out);
      std::string cmd;
      for (const auto& a : st.argv) cmd += (cmd.empty() ? "" : " ") + a;
      res.failed_stage = cmd;
      return res;
    }
    input = std::move(out);
  }
  res.out = std::move(input);
  return res;
}

std::vector<std::string> collect_tests(const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (!e.is_regular_file()) continue;
        auto ext = e.path().extension();
        if (ext == ".ll" || ext == ".s") out.push_back(e.path().generic_string());
      }
    } else if (fs::exists(p)) {
      out.push_back(p);
    } else {
      throw Error(fmt::format("'{}' does not exist", p));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

LitReport run_lit(const std::vector<std::string>& paths, const CommandRunner& run, const LitOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> tests = collect_tests(paths);
  int workers = std::max(1, opts.workers);
  struct Outcome {
    bool pass = false;
    std::string log;
  };
  std::vector<Outcome> results(tests.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < tests.size(); i = next++) {
      Outcome& o = results[i];
      fs::path tmp = fs::temp_directory_path() / fmt::format("rvx-lit-{}-{}", ::getpid(), i);
      try {
        fs::create_directories(tmp);
        auto lines = parse_run_lines(read_file(tests[i]), tests[i]);
        o.pass = true;
        for (const auto& l : lines) {
          auto pr = run_stages(parse_pipeline(l, tests[i], tmp.string()), run);
          o.log += fmt::format("$ {}\n", l);
          if (pr.status != 0) {
            o.pass = false;
            o.log += fmt::format("# command failed with status {}: {}\n{}{}", pr.status, pr.failed_stage, pr.out,
                                 pr.err);
            break;
          }
        }
      } catch (const std::exception& e) {
        o.pass = false;
        o.log += fmt::format("error: {}\n", e.what());
      }
      std::error_code ec;
      fs::remove_all(tmp, ec);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < std::min<int>(workers, static_cast<int>(tests.size())); ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  LitReport rep;
  rep.text = fmt::format("-- Testing: {} tests, {} workers --\n", tests.size(), workers);
  for (size_t i = 0; i < tests.size(); ++i) {
    const Outcome& o = results[i];
    std::string name = display_name(tests[i], paths);
    rep.text += fmt::format("{}: {} :: {} ({} of {})\n", o.pass ? "PASS" : "FAIL", opts.suite, name, i + 1,
                            tests.size());
    if (o.pass) ++rep.passed;
    else ++rep.failed;
    if (!o.pass) {
      rep.text += fmt::format("******************** TEST '{} :: {}' FAILED ********************\n", opts.suite, name);
      if (opts.verbose) rep.text += o.log;
      rep.text += "********************\n";
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.text += fmt::format("\nTesting Time: {:.2f}s\n", secs);
  if (rep.passed) rep.text += fmt::format("Passed: {}\n", rep.passed);
  if (rep.failed) rep.text += fmt::format("Failed: {}\n", rep.failed);
  return rep;
}

}  // namespace rvx
