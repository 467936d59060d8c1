#include <algorithm>
#include <map>
#include <random>
#include <set>

#include <fmt/format.h>

#include "rvx/codegen.h"

namespace rvx {

namespace {

constexpr int kT4 = 29, kT5 = 30, kT6 = 31;

std::vector<int> allocation_order(bool reserve_scratch) {
  std::vector<int> pool = {10, 11, 12, 13, 14, 15, 16, 17, 5, 6, 7, 28};
  if (!reserve_scratch) pool.insert(pool.end(), {kT4, kT5, kT6});
  pool.insert(pool.end(), {9, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27});
  return pool;
}

bool is_callee_saved(int r) { return r == 9 || (r >= 18 && r <= 27); }

bool is_def(const TargetDesc& td, const MachineInstr& mi, size_t k) {
  if (mi.is_copy) return k == 0;
  return td.def(mi.def).operands[k] == Role::Rd;
}

struct Interval {
  int start = 0;
  int end = 0;
  bool overlaps(const Interval& o) const { return start < o.end && o.start < end; }
};

struct Assignment {
  std::map<int, int> reg;       // vreg -> physical register
  std::set<int> spilled;
};

class LinearScan {
public:
  LinearScan(const MachineFunction& mf, const TargetDesc& td) : mf_(mf), td_(td) { analyze(); }

  std::optional<Assignment> run(const std::vector<int>& pool, bool allow_spill) {
    Assignment out;
    std::map<int, std::vector<Interval>> busy = fixed_;
    std::vector<int> order;
    for (const auto& [v, iv] : intervals_) order.push_back(v);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const auto& ia = intervals_.at(a);
      const auto& ib = intervals_.at(b);
      return ia.start != ib.start ? ia.start < ib.start : a < b;
    });
    auto is_free = [&](int r, const Interval& iv) {
      auto it = busy.find(r);
      if (it == busy.end()) return true;
      return std::none_of(it->second.begin(), it->second.end(), [&](const Interval& o) { return o.overlaps(iv); });
    };
    for (int v : order) {
      const Interval& iv = intervals_.at(v);
      int chosen = -1;
      auto h = hints_.find(v);
      if (h != hints_.end() && std::count(pool.begin(), pool.end(), h->second) && is_free(h->second, iv))
        chosen = h->second;
      for (size_t i = 0; chosen < 0 && i < pool.size(); ++i)
        if (is_free(pool[i], iv)) chosen = pool[i];
      if (chosen < 0 && allow_spill) {
        // Evict the allocated interval reaching furthest, if it outlives this one.
        int victim = -1;
        for (const auto& [w, r] : out.reg) {
          const Interval& wi = intervals_.at(w);
          if (!wi.overlaps(iv) || wi.end <= iv.end) continue;
          if (victim >= 0 && intervals_.at(victim).end >= wi.end) continue;
          auto& list = busy[r];
          auto self = std::find_if(list.begin(), list.end(),
                                   [&](const Interval& o) { return o.start == wi.start && o.end == wi.end; });
          Interval saved = *self;
          list.erase(self);
          if (is_free(r, iv)) victim = w;
          list.push_back(saved);
        }
        if (victim >= 0) {
          int r = out.reg.at(victim);
          const Interval& wi = intervals_.at(victim);
          auto& list = busy[r];
          list.erase(std::find_if(list.begin(), list.end(),
                                  [&](const Interval& o) { return o.start == wi.start && o.end == wi.end; }));
          out.reg.erase(victim);
          out.spilled.insert(victim);
          chosen = r;
        }
      }
      if (chosen < 0) {
        if (!allow_spill) return std::nullopt;
        out.spilled.insert(v);
        continue;
      }
      out.reg[v] = chosen;
      busy[chosen].push_back(iv);
    }
    return out;
  }

private:
  void analyze() {
    int n = static_cast<int>(mf_.instrs.size());
    for (int i = 0; i < n; ++i) {
      const MachineInstr& mi = mf_.instrs[static_cast<size_t>(i)];
      for (size_t k = 0; k < mi.ops.size(); ++k) {
        const MachineOperand& op = mi.ops[k];
        bool def = is_def(td_, mi, k);
        if (op.kind == MachineOperand::Kind::VReg) {
          auto [it, inserted] = intervals_.try_emplace(op.value, Interval{i, i});
          if (!def) it->second.end = std::max(it->second.end, i);
        } else if (op.kind == MachineOperand::Kind::PReg && mi.is_copy) {
          // Incoming arguments live until copied; the return value until the end.
          if (def) fixed_[op.value].push_back({i, n + 1});
          else fixed_[op.value].push_back({-1, i});
        }
      }
      if (mi.is_copy && mi.ops[0].is_reg() && mi.ops[1].is_reg()) {
        const auto& d = mi.ops[0];
        const auto& s = mi.ops[1];
        if (d.kind == MachineOperand::Kind::VReg && s.kind == MachineOperand::Kind::PReg) hints_[d.value] = s.value;
        if (s.kind == MachineOperand::Kind::VReg && d.kind == MachineOperand::Kind::PReg) hints_[s.value] = d.value;
      }
    }
  }

  const MachineFunction& mf_;
  const TargetDesc& td_;
  std::map<int, Interval> intervals_;
  std::map<int, std::vector<Interval>> fixed_;
  std::map<int, int> hints_;
};

MachineInstr frame_access(const TargetDesc& td, std::string_view record, int reg, int slot) {
  MachineInstr mi;
  mi.def = td.find(record);
  const InstrDef& d = td.def(mi.def);
  for (Role r : d.operands) {
    if (r == Role::Rd || r == Role::Rs2) mi.ops.push_back(MachineOperand::preg(reg));
    else if (r == Role::Rs1) mi.ops.push_back(MachineOperand::preg(kSp));
    else mi.ops.push_back(MachineOperand::frame(slot));
  }
  return mi;
}

}  // namespace

RegAllocStats allocate_registers(MachineFunction& mf, const TargetDesc& td, const RegAllocOptions& opts) {
  LinearScan scan(mf, td);
  auto shuffled = [&](bool reserve) {
    auto pool = allocation_order(reserve);
    if (opts.shuffle_seed) {
      std::mt19937_64 rng(*opts.shuffle_seed);
      std::shuffle(pool.begin(), pool.end(), rng);
    }
    return pool;
  };
  std::optional<Assignment> a = scan.run(shuffled(false), false);
  if (!a) a = scan.run(shuffled(true), true);

  RegAllocStats stats;
  stats.spilled = static_cast<int>(a->spilled.size());
  std::map<int, int> slot;
  for (int v : a->spilled) {
    slot[v] = static_cast<int>(mf.frame_objects.size());
    mf.frame_objects.push_back(4);
  }

  std::vector<MachineInstr> out;
  for (MachineInstr mi : mf.instrs) {
    std::vector<MachineInstr> after;
    std::map<int, int> loaded;  // spilled vreg -> scratch this instruction
    const int scratch[] = {kT4, kT5, kT6};
    int next_scratch = 0;
    for (size_t k = 0; k < mi.ops.size(); ++k) {
      MachineOperand& op = mi.ops[k];
      if (op.kind != MachineOperand::Kind::VReg) continue;
      int v = op.value;
      if (!a->spilled.count(v)) {
        op = MachineOperand::preg(a->reg.at(v));
        continue;
      }
      if (is_def(td, mi, k)) {
        op = MachineOperand::preg(kT4);
        after.push_back(frame_access(td, "SW", kT4, slot.at(v)));
        continue;
      }
      auto it = loaded.find(v);
      if (it == loaded.end()) {
        if (next_scratch == 3) throw Error(fmt::format("@{}: out of spill scratch registers", mf.name));
        int r = scratch[next_scratch++];
        out.push_back(frame_access(td, "LW", r, slot.at(v)));
        it = loaded.emplace(v, r).first;
      }
      op = MachineOperand::preg(it->second);
    }
    if (mi.is_copy && mi.ops[0] == mi.ops[1]) continue;
    out.push_back(std::move(mi));
    for (auto& s : after) out.push_back(std::move(s));
  }
  mf.instrs = std::move(out);

  std::set<int> saved;
  for (const auto& mi : mf.instrs)
    for (size_t k = 0; k < mi.ops.size(); ++k)
      if (mi.ops[k].kind == MachineOperand::Kind::PReg && is_callee_saved(mi.ops[k].value) && is_def(td, mi, k))
        saved.insert(mi.ops[k].value);
  stats.callee_saved.assign(saved.begin(), saved.end());
  return stats;
}

}  // namespace rvx
