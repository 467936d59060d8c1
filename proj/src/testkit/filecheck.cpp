#include <cctype>
#include <optional>

#include <fmt/format.h>

#include "rvx/common.h"
#include "rvx/testkit.h"

namespace rvx {

std::string collapse_ws(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

namespace {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = nl + 1;
  }
  return lines;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'; }

std::string_view kind_suffix(CheckKind k) {
  switch (k) {
    case CheckKind::Plain: return ":";
    case CheckKind::Next: return "-NEXT:";
    case CheckKind::Label: return "-LABEL:";
  }
  return ":";
}

std::string spelling(const CheckDirective& d) { return d.prefix + std::string(kind_suffix(d.kind)); }

}  // namespace

std::vector<CheckDirective> parse_checks(std::string_view check_text, const std::vector<std::string>& prefixes) {
  std::vector<CheckDirective> out;
  auto lines = split_lines(check_text);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    std::optional<CheckDirective> best;
    size_t best_at = std::string::npos;
    for (const auto& p : prefixes) {
      for (size_t at = line.find(p); at != std::string::npos; at = line.find(p, at + 1)) {
        if (at > 0 && is_word_char(line[at - 1])) continue;
        for (CheckKind k : {CheckKind::Plain, CheckKind::Next, CheckKind::Label}) {
          std::string_view suffix = kind_suffix(k);
          if (line.compare(at + p.size(), suffix.size(), suffix) != 0) continue;
          if (at < best_at) {
            best_at = at;
            best = CheckDirective{p, k, collapse_ws(line.substr(at + p.size() + suffix.size())),
                                  static_cast<int>(i + 1)};
          }
        }
      }
    }
    if (best) out.push_back(std::move(*best));
  }
  return out;
}

CheckResult filecheck(std::string_view input, std::string_view check_text, const std::vector<std::string>& prefixes,
                      std::string_view check_name) {
  auto directives = parse_checks(check_text, prefixes);
  if (directives.empty()) {
    std::string joined;
    for (const auto& p : prefixes) joined += (joined.empty() ? "" : ",") + p;
    throw Error(fmt::format("{}: no check strings found with prefixes '{}'", check_name, joined));
  }
  std::vector<std::string> raw = split_lines(input);
  std::vector<std::string> lines;
  for (const auto& l : raw) lines.push_back(collapse_ws(l));
  const int n = static_cast<int>(lines.size());

  CheckResult res;
  auto fail = [&](const CheckDirective& d, std::string note) {
    res.ok = false;
    res.detail = fmt::format("{}:{}: error: {} expected string not found in input\n  {} {}\n{}", check_name, d.line,
                             spelling(d), spelling(d), d.pattern, note);
    return res;
  };

  // Labels are matched first; they split the input into independent regions.
  std::vector<int> label_line(directives.size(), -1);
  int from = 0;
  for (size_t i = 0; i < directives.size(); ++i) {
    if (directives[i].kind != CheckKind::Label) continue;
    int found = -1;
    for (int l = from; l < n && found < 0; ++l)
      if (lines[static_cast<size_t>(l)].find(directives[i].pattern) != std::string::npos) found = l;
    if (found < 0) return fail(directives[i], "  note: scanning from the previous label found no match\n");
    label_line[i] = found;
    from = found + 1;
  }

  int line = 0;
  size_t col = 0;
  int region_end = n;
  auto next_label_from = [&](size_t first) {
    for (size_t j = first; j < directives.size(); ++j)
      if (label_line[j] >= 0) return label_line[j];
    return n;
  };
  region_end = next_label_from(0);
  int prev_line = -1;
  for (size_t i = 0; i < directives.size(); ++i) {
    const CheckDirective& d = directives[i];
    if (d.kind == CheckKind::Label) {
      line = label_line[i];
      const std::string& l = lines[static_cast<size_t>(line)];
      col = l.find(d.pattern) + d.pattern.size();
      region_end = next_label_from(i + 1);
      prev_line = line;
      res.positions.push_back({line + 1, static_cast<int>(col)});
      continue;
    }
    if (d.kind == CheckKind::Next) {
      int target = prev_line + 1;
      size_t at = target < n ? lines[static_cast<size_t>(target)].find(d.pattern) : std::string::npos;
      if (at == std::string::npos) {
        std::string prev_text = prev_line >= 0 ? raw[static_cast<size_t>(prev_line)] : "<start of input>";
        std::string next_text = target < n ? raw[static_cast<size_t>(target)] : "<end of input>";
        return fail(d, fmt::format("  note: previous match on input line {}: {}\n  note: next line is {}: {}\n",
                                   prev_line + 1, prev_text, target + 1, next_text));
      }
      line = target;
      col = at + d.pattern.size();
      prev_line = line;
      res.positions.push_back({line + 1, static_cast<int>(col)});
      continue;
    }
    bool matched = false;
    for (int l = line; l < region_end && !matched; ++l) {
      size_t start = l == line ? col : 0;
      const std::string& text = lines[static_cast<size_t>(l)];
      size_t at = start <= text.size() ? text.find(d.pattern, start) : std::string::npos;
      if (at == std::string::npos) continue;
      line = l;
      col = at + d.pattern.size();
      matched = true;
    }
    if (!matched) {
      std::string where = line < n ? fmt::format("  note: scanning from input line {}: {}\n", line + 1,
                                                 raw[static_cast<size_t>(line)])
                                   : std::string("  note: scanning reached the end of input\n");
      return fail(d, where);
    }
    prev_line = line;
    res.positions.push_back({line + 1, static_cast<int>(col)});
  }
  res.ok = true;
  return res;
}

}  // namespace rvx
