#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rvx/ir.h"

namespace rvx {

// Counters keyed "pass.counter-name". Values only grow over a run.
class PassStats {
public:
  void add(std::string_view key, uint64_t n = 1);
  uint64_t get(std::string_view key) const;
  const std::map<std::string, uint64_t>& counters() const { return counters_; }
  // One "N pass - description" line per nonzero counter, sorted by key.
  std::string format() const;

private:
  std::map<std::string, uint64_t> counters_;
};

std::string_view counter_description(std::string_view key);

// Pass identifiers accepted by run_pipeline and `opt --passes`.
const std::vector<std::string>& known_passes();
// InferFunctionAttrs, SROA, EarlyCSE, GlobalOpt, InstCombine, EarlyCSE,
// InstCombine, Reassociate, InstCombine, DSE, PostOrderFunctionAttrs.
const std::vector<std::string>& default_pipeline();
std::vector<std::string> parse_pass_list(std::string_view csv);

// Throws Error on an unknown pass name. The result verifies.
IrModule run_pipeline(IrModule m, const std::vector<std::string>& passes, PassStats* stats = nullptr);

void pass_sroa(IrFunction& f, PassStats& stats);
void pass_early_cse(IrFunction& f, PassStats& stats);
void pass_inst_combine(IrFunction& f, PassStats& stats);
void pass_reassociate(IrFunction& f, PassStats& stats);
void pass_dse(IrFunction& f, PassStats& stats);

enum class AttrPass { Infer, PostOrder, GlobalOpt };
void pass_attr(IrFunction& f, AttrPass which);

// Address lattice shared by EarlyCSE, InstCombine and DSE.
enum class AliasResult { Same, Different, May };
struct AddressRoot {
  IrValue base;
  int64_t offset = 0;
};
AddressRoot resolve_address(const IrFunction& f, const IrValue& addr);
AliasResult alias(const IrFunction& f, const IrValue& a, const IrValue& b);

// Reassociation ranks: constants 0, argument i is i + 3, an instruction is
// one more than its highest-ranked operand.
std::unordered_map<int32_t, uint32_t> compute_ranks(const IrFunction& f);
uint32_t rank_of(const std::unordered_map<int32_t, uint32_t>& ranks, const IrValue& v);

// Drops unused pure instructions until none remain; returns how many.
size_t remove_dead_code(IrFunction& f);

}  // namespace rvx
