#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace rvx {

// ---- FileCheck ------------------------------------------------------------

enum class CheckKind { Plain, Next, Label };

struct CheckDirective {
  std::string prefix;
  CheckKind kind = CheckKind::Plain;
  std::string pattern;  // whitespace already collapsed
  int line = 0;         // 1-based line in the check file
};

// Directives for the enabled prefixes, in file order.
std::vector<CheckDirective> parse_checks(std::string_view check_text, const std::vector<std::string>& prefixes);

struct MatchPos {
  int line = 0;  // 1-based input line
  int col = 0;   // byte offset of the match end within the collapsed line
};

struct CheckResult {
  bool ok = false;
  std::string detail;
  std::vector<MatchPos> positions;  // one per directive, in order, when ok
};

// Literal, whitespace-insensitive matching. Throws Error if no directive is
// enabled.
CheckResult filecheck(std::string_view input, std::string_view check_text, const std::vector<std::string>& prefixes,
                      std::string_view check_name = "<check>");

// Collapses whitespace runs to one space and trims both ends.
std::string collapse_ws(std::string_view s);

// ---- lit ------------------------------------------------------------------

// Runs one tool invocation in-process. argv[0] is the subcommand.
using CommandRunner =
    std::function<int(const std::vector<std::string>& argv, const std::string& in, std::string& out, std::string& err)>;

// RUN lines with backslash continuations joined. Throws Error if none.
std::vector<std::string> parse_run_lines(std::string_view text, std::string_view path);

struct Stage {
  std::vector<std::string> argv;
  std::string stdin_file;  // from "< file"
  bool merge_stderr = false;  // "2>&1"
};

// Splits a RUN line on '|' and substitutes %s and %t. Throws Error on a
// malformed line.
std::vector<Stage> parse_pipeline(std::string_view run_line, std::string_view test_path, std::string_view tmp_dir);

struct PipelineResult {
  int status = 0;
  std::string out;
  std::string err;
  std::string failed_stage;
};

// Stages read the previous stage's stdout; any nonzero status fails the line.
PipelineResult run_stages(const std::vector<Stage>& stages, const CommandRunner& run);

struct LitOptions {
  int workers = 1;
  bool verbose = false;
  std::string suite = "rvx";
};

struct LitReport {
  int passed = 0;
  int failed = 0;
  std::string text;
};

// Expands directories to their *.ll and *.s files, sorted by path.
std::vector<std::string> collect_tests(const std::vector<std::string>& paths);

LitReport run_lit(const std::vector<std::string>& paths, const CommandRunner& run, const LitOptions& opts = {});

// ---- update_checks ----------------------------------------------------------

struct UpdateResult {
  bool ok = false;
  bool changed = false;
  std::string content;  // regenerated file text when ok
  std::string error;
};

// Regenerates the CHECK block of every function in an LLC-style test from
// the output of its RUN pipelines. Runs each pipeline twice and refuses if
// the output differs. Tests without functions are returned unchanged.
UpdateResult update_checks(std::string_view path, const CommandRunner& run);

}  // namespace rvx
