#include <algorithm>
#include <map>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "rvx/midend.h"

namespace rvx {

namespace {

bool promotable(const IrFunction& f, const IrInst& alloca) {
  IrValue a = alloca.result();
  for (const auto& inst : f.body().insts) {
    for (size_t k = 0; k < inst.operands.size(); ++k) {
      if (inst.operands[k] != a) continue;
      bool ok = (inst.op == Opcode::Load && k == 0) || (inst.op == Opcode::Store && k == 1);
      if (!ok) return false;
    }
  }
  return true;
}

void erase_marked(IrFunction& f, const std::unordered_set<const IrInst*>& dead) {
  auto& insts = f.body().insts;
  std::vector<IrInst> kept;
  kept.reserve(insts.size());
  for (auto& i : insts)
    if (!dead.count(&i)) kept.push_back(std::move(i));
  insts = std::move(kept);
}

using OperandKey = std::tuple<int, int32_t, int>;

OperandKey key_of(const IrValue& v) {
  return {static_cast<int>(v.kind), v.payload, static_cast<int>(v.type)};
}

}  // namespace

void pass_sroa(IrFunction& f, PassStats& stats) {
  std::vector<int32_t> candidates;
  for (const auto& inst : f.body().insts)
    if (inst.op == Opcode::Alloca && promotable(f, inst)) candidates.push_back(inst.id);

  for (int32_t id : candidates) {
    IrValue slot = IrValue::inst(id, IrType::Ptr);
    std::optional<IrValue> current;
    size_t stores = 0, deleted = 0;
    std::unordered_set<const IrInst*> dead;
    auto& insts = f.body().insts;
    for (auto& inst : insts) {
      if (inst.op == Opcode::Store && inst.operands[1] == slot) {
        current = inst.operands[0];
        ++stores;
        dead.insert(&inst);
      } else if (inst.op == Opcode::Load && inst.operands[0] == slot) {
        IrValue v = current ? *current : IrValue::undef(inst.type);
        f.replace_all_uses(inst.result(), v);
        dead.insert(&inst);
      } else if (inst.id == id) {
        dead.insert(&inst);
      }
    }
    deleted = dead.size();
    erase_marked(f, dead);
    stats.add("sroa.allocas-promoted");
    stats.add("sroa.insts-deleted", deleted);
    stats.add(stores == 1 ? "mem2reg.single-store" : "mem2reg.single-block");
  }
}

void pass_early_cse(IrFunction& f, PassStats& stats) {
  std::unordered_map<int32_t, IrValue> repl;
  auto lookup = [&](IrValue v) {
    while (v.is_inst()) {
      auto it = repl.find(v.payload);
      if (it == repl.end()) break;
      v = it->second;
    }
    return v;
  };
  std::map<std::pair<Opcode, std::vector<OperandKey>>, IrValue> exprs;
  std::map<OperandKey, IrValue> loads;
  std::unordered_set<const IrInst*> dead;

  for (auto& inst : f.body().insts) {
    for (auto& op : inst.operands) op = lookup(op);
    if (inst.op == Opcode::Gep && inst.operands[1].is_const(0)) {
      repl[inst.id] = inst.operands[0];
      dead.insert(&inst);
      stats.add("early-cse.insts-simplified");
      continue;
    }
    if (is_pure(inst.op)) {
      std::vector<OperandKey> keys;
      for (const auto& op : inst.operands) keys.push_back(key_of(op));
      if (is_commutative(inst.op)) std::sort(keys.begin(), keys.end());
      auto [it, inserted] = exprs.try_emplace({inst.op, keys}, inst.result());
      if (!inserted) {
        repl[inst.id] = it->second;
        dead.insert(&inst);
        stats.add("early-cse.insts-cse");
      }
      continue;
    }
    if (inst.op == Opcode::Load) {
      auto [it, inserted] = loads.try_emplace(key_of(inst.operands[0]), inst.result());
      if (!inserted) {
        repl[inst.id] = it->second;
        dead.insert(&inst);
        stats.add("early-cse.loads-cse");
      }
      continue;
    }
    if (inst.op == Opcode::Store) {
      // Without alias information any store may clobber any other address.
      loads.clear();
      loads[key_of(inst.operands[1])] = inst.operands[0];
    }
  }
  erase_marked(f, dead);
  stats.add("early-cse.insts-simplified", remove_dead_code(f));
}

void pass_dse(IrFunction& f, PassStats& stats) {
  auto& insts = f.body().insts;
  std::vector<IrValue> killers;
  std::unordered_set<const IrInst*> dead;
  for (size_t i = insts.size(); i-- > 0;) {
    const IrInst& inst = insts[i];
    if (inst.op == Opcode::Store) {
      const IrValue& addr = inst.operands[1];
      bool killed = std::any_of(killers.begin(), killers.end(), [&](const IrValue& k) {
        return alias(f, addr, k) == AliasResult::Same;
      });
      if (killed) {
        dead.insert(&inst);
        stats.add("dse.stores-deleted");
      } else {
        killers.push_back(addr);
      }
    } else if (inst.op == Opcode::Load) {
      const IrValue& addr = inst.operands[0];
      std::erase_if(killers, [&](const IrValue& k) { return alias(f, addr, k) != AliasResult::Different; });
    }
  }
  erase_marked(f, dead);
  size_t remaining = 0;
  for (const auto& inst : insts) remaining += inst.op == Opcode::Store;
  stats.add("dse.stores-remaining", remaining);
}

void pass_attr(IrFunction& f, AttrPass which) {
  switch (which) {
    case AttrPass::Infer:
      f.add_attribute("mustprogress");
      break;
    case AttrPass::GlobalOpt:
      f.add_attribute("local_unnamed_addr");
      break;
    case AttrPass::PostOrder:
      // No calls survive parsing, so nothing can be freed, recurse or
      // synchronize.
      for (const char* tag : {"nofree", "norecurse", "nosync", "nounwind", "willreturn"}) f.add_attribute(tag);
      break;
  }
}

}  // namespace rvx
