#include <algorithm>

#include <fmt/format.h>

#include "rvx/midend.h"

namespace rvx {

void pass_reassociate(IrFunction& f, PassStats& stats) {
  auto ranks = compute_ranks(f);
  auto position = [&](const IrValue& v) { return v.is_inst() ? f.index_of(v.payload) : -1; };
  for (auto& inst : f.body().insts) {
    if (!is_commutative(inst.op)) continue;
    IrValue& a = inst.operands[0];
    IrValue& b = inst.operands[1];
    uint32_t ra = rank_of(ranks, a);
    uint32_t rb = rank_of(ranks, b);
    // Constants stay on the right, as instcombine expects.
    bool swap = a.is_const() ? !b.is_const() : !b.is_const() && (rb < ra || (rb == ra && position(b) < position(a)));
    if (!swap) continue;
    std::swap(a, b);
    stats.add("reassociate.insts-reassociated");
  }
}

const std::vector<std::string>& known_passes() {
  static const std::vector<std::string> names = {
      "inferattrs", "sroa", "early-cse", "globalopt", "instcombine", "reassociate", "dse", "function-attrs"};
  return names;
}

const std::vector<std::string>& default_pipeline() {
  static const std::vector<std::string> names = {
      "inferattrs", "sroa",        "early-cse",   "globalopt", "instcombine",   "early-cse",
      "instcombine", "reassociate", "instcombine", "dse",       "function-attrs"};
  return names;
}

std::vector<std::string> parse_pass_list(std::string_view csv) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= csv.size()) {
    size_t comma = csv.find(',', start);
    if (comma == std::string_view::npos) comma = csv.size();
    std::string_view item = csv.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) throw Error(fmt::format("empty pass name in '{}'", csv));
    out.emplace_back(item);
    start = comma + 1;
  }
  return out;
}

IrModule run_pipeline(IrModule m, const std::vector<std::string>& passes, PassStats* stats) {
  PassStats local;
  PassStats& st = stats ? *stats : local;
  for (const auto& name : passes)
    if (std::find(known_passes().begin(), known_passes().end(), name) == known_passes().end())
      throw Error(fmt::format("unknown pass '{}'", name));
  for (const auto& name : passes) {
    for (auto& f : m.functions) {
      if (name == "inferattrs") pass_attr(f, AttrPass::Infer);
      else if (name == "sroa") pass_sroa(f, st);
      else if (name == "early-cse") pass_early_cse(f, st);
      else if (name == "globalopt") pass_attr(f, AttrPass::GlobalOpt);
      else if (name == "instcombine") pass_inst_combine(f, st);
      else if (name == "reassociate") pass_reassociate(f, st);
      else if (name == "dse") pass_dse(f, st);
      else if (name == "function-attrs") pass_attr(f, AttrPass::PostOrder);
    }
  }
  auto violations = verify(m);
  if (!violations.empty()) {
    std::string msg = "optimized module fails verification:";
    for (const auto& v : violations) msg += "\n  " + format_violation(v);
    throw Error(msg);
  }
  return m;
}

}  // namespace rvx
