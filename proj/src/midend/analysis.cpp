#include <algorithm>
#include <unordered_set>

#include <fmt/format.h>

#include "rvx/midend.h"

namespace rvx {

namespace {

struct CounterInfo {
  std::string_view key;
  std::string_view description;
};

constexpr CounterInfo kCounters[] = {
    {"dse.stores-deleted", "Number of stores deleted"},
    {"dse.stores-remaining", "Number of stores remaining after DSE"},
    {"early-cse.insts-cse", "Number of instructions Common Subexpression Eliminated"},
    {"early-cse.insts-simplified", "Number of instructions simplified or Dead Code Eliminated"},
    {"early-cse.loads-cse", "Number of load instructions Common Subexpression Eliminated"},
    {"instcombine.insts-combined", "Number of insts combined"},
    {"instcombine.iterations", "Number of instruction combining iterations performed"},
    {"instcombine.loads-forwarded", "Number of loads replaced by an available value"},
    {"mem2reg.single-block", "Number of alloca's promoted within one block"},
    {"mem2reg.single-store", "Number of alloca's promoted with a single store"},
    {"reassociate.insts-reassociated", "Number of insts reassociated"},
    {"sroa.allocas-promoted", "Number of allocas promoted to SSA values"},
    {"sroa.insts-deleted", "Number of instructions deleted"},
};

}  // namespace

std::string_view counter_description(std::string_view key) {
  for (const auto& c : kCounters)
    if (c.key == key) return c.description;
  return "";
}

void PassStats::add(std::string_view key, uint64_t n) { counters_[std::string(key)] += n; }

uint64_t PassStats::get(std::string_view key) const {
  auto it = counters_.find(std::string(key));
  return it == counters_.end() ? 0 : it->second;
}

std::string PassStats::format() const {
  std::string out;
  for (const auto& [k, v] : counters_) {
    if (v == 0) continue;
    std::string_view desc = counter_description(k);
    out += fmt::format("{} {} - {}\n", v, k.substr(0, k.find('.')), desc.empty() ? std::string_view(k) : desc);
  }
  return out;
}

AddressRoot resolve_address(const IrFunction& f, const IrValue& addr) {
  AddressRoot r{addr, 0};
  for (int guard = 0; guard < 1000; ++guard) {
    const IrInst* d = f.def_of(r.base);
    if (!d || d->op != Opcode::Gep || !d->operands[1].is_const()) break;
    r.offset += d->operands[1].payload;
    r.base = d->operands[0];
  }
  return r;
}

AliasResult alias(const IrFunction& f, const IrValue& a, const IrValue& b) {
  if (a == b) return AliasResult::Same;
  AddressRoot ra = resolve_address(f, a);
  AddressRoot rb = resolve_address(f, b);
  if (ra.base == rb.base) {
    if (ra.offset == rb.offset) return AliasResult::Same;
    int64_t d = ra.offset - rb.offset;
    if (d >= 4 || d <= -4) return AliasResult::Different;
    return AliasResult::May;
  }
  if (ra.base.kind == IrValue::Kind::Global && rb.base.kind == IrValue::Kind::Global)
    return AliasResult::Different;
  return AliasResult::May;
}

uint32_t rank_of(const std::unordered_map<int32_t, uint32_t>& ranks, const IrValue& v) {
  switch (v.kind) {
    case IrValue::Kind::Arg: return static_cast<uint32_t>(v.payload) + 3;
    case IrValue::Kind::Inst: {
      auto it = ranks.find(v.payload);
      return it == ranks.end() ? 0 : it->second;
    }
    default: return 0;
  }
}

std::unordered_map<int32_t, uint32_t> compute_ranks(const IrFunction& f) {
  std::unordered_map<int32_t, uint32_t> ranks;
  for (const auto& inst : f.body().insts) {
    if (!inst.has_result()) continue;
    uint32_t r = 0;
    for (const auto& op : inst.operands) r = std::max(r, rank_of(ranks, op));
    ranks[inst.id] = r + 1;
  }
  return ranks;
}

size_t remove_dead_code(IrFunction& f) {
  size_t removed = 0;
  for (;;) {
    std::unordered_set<int32_t> used;
    for (const auto& inst : f.body().insts)
      for (const auto& op : inst.operands)
        if (op.is_inst()) used.insert(op.payload);
    auto& insts = f.body().insts;
    size_t before = insts.size();
    std::erase_if(insts, [&](const IrInst& i) {
      return i.has_result() && is_pure(i.op) && !used.count(i.id);
    });
    if (insts.size() == before) break;
    removed += before - insts.size();
  }
  return removed;
}

}  // namespace rvx
