#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "rvx/isel.h"

namespace rvx {

int IselContext::machine(std::string_view record, std::vector<MachineInput> inputs) {
  int def = td.find(record);
  if (def < 0) throw Error(fmt::format("target description has no instruction '{}'", record));
  const InstrDef& d = td.def(def);
  DagNode n;
  n.kind = DagKind::Machine;
  n.def = def;
  n.inputs = std::move(inputs);
  n.has_value = d.has_output;
  n.has_chain_out = d.may_load || d.may_store;
  return dag.add(std::move(n));
}

std::string IselContext::describe(int node) const {
  const DagNode& n = dag.at(node);
  std::string s = fmt::format("t{}: {}", n.stable_id, dag_kind_name(n.kind));
  if (n.kind == DagKind::Machine) s = fmt::format("t{}: {}", n.stable_id, td.def(n.def).record);
  if (n.kind == DagKind::Constant) s += fmt::format("<{}>", n.imm);
  if (!n.ops.empty()) {
    s += " ";
    for (size_t i = 0; i < n.ops.size(); ++i)
      s += fmt::format("{}t{}", i ? ", " : "", dag.at(n.ops[i].node).stable_id);
  }
  return s;
}

namespace {

std::optional<DagKind> kind_of_op(std::string_view op) {
  static const std::map<std::string_view, DagKind> table = {
      {"add", DagKind::Add}, {"sub", DagKind::Sub}, {"mul", DagKind::Mul},  {"and", DagKind::And},
      {"or", DagKind::Or},   {"xor", DagKind::Xor}, {"shl", DagKind::Shl},  {"srl", DagKind::Srl},
      {"sra", DagKind::Sra}, {"rotr", DagKind::Rotr}, {"load", DagKind::Load}};
  auto it = table.find(op);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

bool imm_in_range(std::string_view leaf_type, int64_t v) {
  if (leaf_type == "simm12") return fits_signed(v, 12);
  if (leaf_type == "uimmlog2xlen" || leaf_type == "uimm5") return v >= 0 && v < 32;
  return false;
}

// Orders the given loads along the chain. Returns an empty vector if they do
// not form one contiguous run.
std::vector<int> chain_run(const SelDag& dag, const std::vector<int>& loads) {
  std::set<int> in(loads.begin(), loads.end());
  int first = -1;
  for (int l : loads) {
    const auto& c = dag.at(l).chain;
    if (!c || !in.count(c->node)) {
      if (first >= 0) return {};
      first = l;
    }
  }
  if (first < 0) return {};
  std::vector<int> run{first};
  while (run.size() < loads.size()) {
    int next = -1;
    for (int l : loads)
      if (dag.at(l).chain == DagValue{run.back(), 1}) next = l;
    if (next < 0) return {};
    // Nothing but the next load may hang off an interior chain.
    if (dag.use_count({run.back(), 1}) != 1) return {};
    run.push_back(next);
  }
  return run;
}

class PatternMatcher {
public:
  PatternMatcher(IselContext& cx, const SelPattern& p) : cx_(cx), pat_(p) {}

  std::optional<DagValue> try_match(int root) {
    if (!match(pat_.source, {root, 0}, true)) return std::nullopt;
    std::vector<int> run;
    if (!loads_.empty()) {
      run = chain_run(cx_.dag, loads_);
      if (run.empty()) return std::nullopt;
    }
    int out = build(pat_.target);
    if (!run.empty()) {
      DagNode& m = cx_.dag.at(out);
      m.chain = cx_.dag.at(run.front()).chain;
      m.has_chain_out = true;
      cx_.dag.replace_uses({run.back(), 1}, {out, 1});
    }
    cx_.log(fmt::format("  pattern matched: {} -> {}", pat_.text, cx_.td.def(cx_.dag.at(out).def).record));
    return DagValue{out, 0};
  }

private:
  bool match(const PatNode& p, DagValue v, bool is_root) {
    const DagNode& n = cx_.dag.at(v.node);
    switch (p.kind) {
      case PatNode::Kind::Reg: {
        if (p.leaf_type == "non_imm12" && n.kind == DagKind::Constant && fits_signed(n.imm, 12)) return false;
        auto [it, inserted] = regs_.try_emplace(p.capture, v);
        return inserted || it->second == v;
      }
      case PatNode::Kind::Imm: {
        if (n.kind != DagKind::Constant || !imm_in_range(p.leaf_type, n.imm)) return false;
        auto [it, inserted] = imms_.try_emplace(p.capture, n.imm);
        return inserted || it->second == n.imm;
      }
      case PatNode::Kind::Const:
        return n.kind == DagKind::Constant && n.imm == p.value;
      case PatNode::Kind::Op:
        break;
    }
    auto kind = kind_of_op(p.op);
    if (!kind || n.kind != *kind || v.result != 0) return false;
    if (!is_root) {
      if ((p.one_use || n.kind == DagKind::Load) && cx_.dag.use_count(v) != 1) return false;
    }
    if (p.kids.size() != n.ops.size()) return false;
    if (n.kind == DagKind::Load) loads_.push_back(v.node);
    for (size_t i = 0; i < p.kids.size(); ++i)
      if (!match(p.kids[i], n.ops[i], false)) return false;
    return true;
  }

  MachineInput leaf(const OutNode& o) {
    if (o.def >= 0) return {DagValue{build(o), 0}, {}};
    if (o.as_imm) {
      auto it = imms_.find(o.capture);
      if (it == imms_.end()) throw Error(fmt::format("pattern output uses unbound immediate ${}", o.capture));
      return {std::nullopt, MachineOperand::imm(static_cast<int32_t>(it->second))};
    }
    auto it = regs_.find(o.capture);
    if (it != regs_.end()) return {it->second, {}};
    auto imm = imms_.find(o.capture);
    if (imm != imms_.end()) return {std::nullopt, MachineOperand::imm(static_cast<int32_t>(imm->second))};
    throw Error(fmt::format("pattern output uses unbound capture ${}", o.capture));
  }

  int build(const OutNode& o) {
    std::vector<MachineInput> inputs;
    for (const auto& k : o.kids) inputs.push_back(leaf(k));
    return cx_.machine(cx_.td.def(o.def).record, std::move(inputs));
  }

  IselContext& cx_;
  const SelPattern& pat_;
  std::map<std::string, DagValue> regs_;
  std::map<std::string, int64_t> imms_;
  std::vector<int> loads_;
};

int register_node(SelDag& dag, int reg) {
  for (size_t i = 0; i < dag.nodes.size(); ++i) {
    const auto& n = dag.nodes[i];
    if (!n.dead && n.kind == DagKind::Register && n.imm == reg && n.ops.empty()) return static_cast<int>(i);
  }
  DagNode n;
  n.kind = DagKind::Register;
  n.imm = reg;
  n.has_value = true;
  return dag.add(std::move(n));
}

// Builds a machine node from inputs keyed by role, laid out in (ins ...) order.
int machine_by_role(IselContext& cx, std::string_view record, const std::map<Role, MachineInput>& by_role) {
  const InstrDef& d = cx.td.def(record);
  std::vector<MachineInput> inputs;
  for (Role r : d.inputs) {
    auto it = by_role.find(r);
    if (it == by_role.end())
      throw Error(fmt::format("{}: no input for operand {}", record, role_name(r)));
    inputs.push_back(it->second);
  }
  return cx.machine(record, std::move(inputs));
}

struct Address {
  MachineInput base;
  MachineOperand offset;
};

Address fold_address(IselContext& cx, DagValue a) {
  const DagNode n = cx.dag.at(a.node);
  if (n.kind == DagKind::AddLo) {
    return {{n.ops[0], {}}, MachineOperand::sym_lo(cx.dag.at(n.ops[1].node).symbol)};
  }
  if (n.kind == DagKind::FrameIndex) {
    return {{DagValue{register_node(cx.dag, kSp), 0}, {}}, MachineOperand::frame(static_cast<int32_t>(n.imm))};
  }
  if (n.kind == DagKind::Add) {
    for (int side = 0; side < 2; ++side) {
      const DagNode& c = cx.dag.at(n.ops[static_cast<size_t>(1 - side)].node);
      if (c.kind == DagKind::Constant && fits_signed(c.imm, 12))
        return {{n.ops[static_cast<size_t>(side)], {}}, MachineOperand::imm(static_cast<int32_t>(c.imm))};
    }
  }
  return {{a, {}}, MachineOperand::imm(0)};
}

// Replaces every result of `from` with the matching result of `to`.
void replace_node(SelDag& dag, int from, int to) {
  const DagNode& f = dag.at(from);
  if (f.has_value) dag.replace_uses({from, 0}, {to, 0});
  if (f.has_chain_out) dag.replace_uses({from, 1}, {to, 1});
  dag.at(from).dead = true;
}

std::optional<int> select_fallback(IselContext& cx, int id) {
  DagNode n = cx.dag.at(id);
  switch (n.kind) {
    case DagKind::Constant: {
      if (n.imm == 0) {
        int x0 = register_node(cx.dag, kZero);
        cx.log(fmt::format("  fallback: constant zero -> x0"));
        return x0;
      }
      auto seq = materialize_imm(cx.td, static_cast<int32_t>(n.imm), cx.opts.exts, MachineOperand::vreg(0),
                                 cx.opts.zba_threshold);
      std::optional<DagValue> prev;
      int last = -1;
      for (const auto& mi : seq) {
        const InstrDef& d = cx.td.def(mi.def);
        std::vector<MachineInput> inputs;
        for (Role r : d.inputs) {
          auto pos = std::find(d.operands.begin(), d.operands.end(), r) - d.operands.begin();
          const MachineOperand& op = mi.ops.at(static_cast<size_t>(pos));
          if (is_register_role(r)) {
            if (op.kind == MachineOperand::Kind::PReg)
              inputs.push_back({DagValue{register_node(cx.dag, op.value), 0}, {}});
            else
              inputs.push_back({prev, {}});
          } else {
            inputs.push_back({std::nullopt, op});
          }
        }
        last = cx.machine(d.record, std::move(inputs));
        prev = DagValue{last, 0};
      }
      cx.log(fmt::format("  fallback: materialize {} in {} instruction(s)", n.imm, seq.size()));
      return last;
    }
    case DagKind::Load: {
      Address a = fold_address(cx, n.ops[0]);
      int m = machine_by_role(cx, "LW", {{Role::Rs1, a.base}, {Role::Imm12, {std::nullopt, a.offset}}});
      cx.dag.at(m).chain = n.chain;
      cx.log("  fallback: LW");
      return m;
    }
    case DagKind::Store: {
      Address a = fold_address(cx, n.ops[1]);
      int m = machine_by_role(
          cx, "SW", {{Role::Rs1, a.base}, {Role::Rs2, {n.ops[0], {}}}, {Role::Imm12, {std::nullopt, a.offset}}});
      cx.dag.at(m).chain = n.chain;
      cx.log("  fallback: SW");
      return m;
    }
    case DagKind::Hi: {
      const std::string& sym = cx.dag.at(n.ops[0].node).symbol;
      cx.log("  fallback: LUI %hi");
      return machine_by_role(cx, "LUI", {{Role::Imm20, {std::nullopt, MachineOperand::sym_hi(sym)}}});
    }
    case DagKind::AddLo: {
      const std::string& sym = cx.dag.at(n.ops[1].node).symbol;
      cx.log("  fallback: ADDI %lo");
      return machine_by_role(
          cx, "ADDI", {{Role::Rs1, {n.ops[0], {}}}, {Role::Imm12, {std::nullopt, MachineOperand::sym_lo(sym)}}});
    }
    case DagKind::FrameIndex: {
      cx.log("  fallback: ADDI sp, frame index");
      return machine_by_role(cx, "ADDI",
                             {{Role::Rs1, {DagValue{register_node(cx.dag, kSp), 0}, {}}},
                              {Role::Imm12, {std::nullopt, MachineOperand::frame(static_cast<int32_t>(n.imm))}}});
    }
    case DagKind::Ret: {
      int m = machine_by_role(cx, "JALR",
                              {{Role::Rs1, {DagValue{register_node(cx.dag, kRa), 0}, {}}},
                               {Role::Imm12, {std::nullopt, MachineOperand::imm(0)}}});
      DagNode& r = cx.dag.at(m);
      r.ops = n.ops;  // returned value, copied to a0 when scheduled
      r.chain = n.chain;
      r.has_value = false;
      r.has_chain_out = false;
      cx.dag.root = m;
      cx.log("  fallback: ret");
      return m;
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

std::vector<HookEntry> default_hooks() {
  HookEntry lxr;
  lxr.root = DagKind::Xor;
  lxr.name = "xor_dependent_loads";
  lxr.fn = [](IselContext& cx, int id) -> std::optional<DagValue> {
    if (!cx.opts.exts.has(Ext::Xcrypt)) return std::nullopt;
    const DagNode& x = cx.dag.at(id);
    for (int order = 0; order < 2; ++order) {
      DagValue a = x.ops[static_cast<size_t>(order)];
      DagValue b = x.ops[static_cast<size_t>(1 - order)];
      const DagNode& la = cx.dag.at(a.node);
      const DagNode& lb = cx.dag.at(b.node);
      bool both_loads = la.kind == DagKind::Load && lb.kind == DagKind::Load;
      cx.log(fmt::format("  [1] both operands are loads: {}", both_loads ? "yes" : "no"));
      if (!both_loads) return std::nullopt;
      const DagNode& addr = cx.dag.at(lb.ops[0].node);
      bool is_add = addr.kind == DagKind::Add;
      cx.log(fmt::format("  [2] second address is an add: {}", is_add ? "yes" : "no"));
      if (!is_add) continue;
      bool same_base = addr.ops[0] == la.ops[0];
      cx.log(fmt::format("  [3] add base is the first address: {}", same_base ? "yes" : "no"));
      if (!same_base) continue;
      const DagNode& c = cx.dag.at(addr.ops[1].node);
      bool is_const = c.kind == DagKind::Constant;
      cx.log(fmt::format("  [4] add offset is a constant: {}", is_const ? "yes" : "no"));
      if (!is_const) continue;
      bool is16 = c.imm == 16;
      cx.log(fmt::format("  [5] offset is 16: {}", is16 ? "yes" : "no"));
      if (!is16) continue;
      if (cx.dag.use_count(a) != 1 || cx.dag.use_count(b) != 1) {
        cx.log("  rejected: a load has other users");
        return std::nullopt;
      }
      auto run = chain_run(cx.dag, {a.node, b.node});
      if (run.empty()) {
        cx.log("  rejected: loads are not adjacent on the chain");
        return std::nullopt;
      }
      DagValue base = la.ops[0];
      int tmp = machine_by_role(cx, "ADDI",
                                {{Role::Rs1, {base, {}}}, {Role::Imm12, {std::nullopt, MachineOperand::imm(16)}}});
      int m = machine_by_role(cx, "LXR", {{Role::Rs1, {base, {}}}, {Role::Rs2, {DagValue{tmp, 0}, {}}}});
      DagNode& mn = cx.dag.at(m);
      mn.chain = cx.dag.at(run.front()).chain;
      mn.has_chain_out = true;
      cx.dag.replace_uses({run.back(), 1}, {m, 1});
      cx.log("  emitted ADDI + LXR");
      return DagValue{m, 0};
    }
    return std::nullopt;
  };
  return {lxr};
}

void select(SelDag& dag, const TargetDesc& td, const IselOptions& opts, const std::vector<HookEntry>& hooks,
            std::vector<std::string>* trace) {
  std::vector<std::string> local;
  IselContext cx{dag, td, opts, trace ? *trace : local};
  std::vector<int> order = dag.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int id = *it;
    DagNode& n = dag.at(id);
    if (n.dead || !is_generic(n.kind)) continue;
    bool used = id == dag.root || (n.has_value && dag.use_count({id, 0}) > 0) ||
                (n.has_chain_out && dag.use_count({id, 1}) > 0);
    if (!used) {
      n.dead = true;
      continue;
    }
    cx.log(fmt::format("selecting {}", cx.describe(id)));
    DagKind kind = n.kind;
    std::optional<DagValue> result;
    for (const auto& h : hooks) {
      if (h.root != kind) continue;
      cx.log(fmt::format("  hook {}", h.name));
      result = h.fn(cx, id);
      if (result) break;
    }
    if (!result) {
      for (const auto& p : td.patterns) {
        if (!opts.exts.contains(p.required)) continue;
        result = PatternMatcher(cx, p).try_match(id);
        if (result) break;
      }
    }
    if (result) {
      dag.replace_uses({id, 0}, *result);
      dag.at(id).dead = true;
      continue;
    }
    auto fb = select_fallback(cx, id);
    if (!fb) throw Error(fmt::format("cannot select {}", cx.describe(id)));
    if (*fb != id) replace_node(dag, id, *fb);
  }
  dag.prune();
  for (const auto& n : dag.nodes) {
    if (!n.dead && is_generic(n.kind))
      throw Error(fmt::format("cannot select t{}: {}", n.stable_id, dag_kind_name(n.kind)));
  }
}

}  // namespace rvx
