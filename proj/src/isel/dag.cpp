#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

#include <fmt/format.h>

#include "rvx/isel.h"

namespace rvx {

std::string_view dag_kind_name(DagKind k) {
  switch (k) {
    case DagKind::EntryToken: return "EntryToken";
    case DagKind::Constant: return "Constant";
    case DagKind::GlobalAddress: return "GlobalAddress";
    case DagKind::TargetGlobalAddress: return "TargetGlobalAddress";
    case DagKind::Register: return "Register";
    case DagKind::FrameIndex: return "FrameIndex";
    case DagKind::Load: return "load";
    case DagKind::Store: return "store";
    case DagKind::Add: return "add";
    case DagKind::Sub: return "sub";
    case DagKind::Mul: return "mul";
    case DagKind::And: return "and";
    case DagKind::Or: return "or";
    case DagKind::Xor: return "xor";
    case DagKind::Shl: return "shl";
    case DagKind::Srl: return "srl";
    case DagKind::Sra: return "sra";
    case DagKind::Rotr: return "rotr";
    case DagKind::Fshl: return "fshl";
    case DagKind::Fshr: return "fshr";
    case DagKind::Ret: return "ret";
    case DagKind::Hi: return "RISCVISD::HI";
    case DagKind::AddLo: return "RISCVISD::ADD_LO";
    case DagKind::Machine: return "machine";
  }
  return "?";
}

bool is_generic(DagKind k) {
  switch (k) {
    case DagKind::EntryToken: case DagKind::Register: case DagKind::TargetGlobalAddress:
    case DagKind::Machine:
      return false;
    default:
      return true;
  }
}

int SelDag::add(DagNode n) {
  n.stable_id = static_cast<int>(nodes.size());
  nodes.push_back(std::move(n));
  return static_cast<int>(nodes.size()) - 1;
}

namespace {

template <typename Fn>
void for_each_operand(const DagNode& n, Fn&& fn) {
  for (const auto& v : n.ops) fn(v);
  if (n.chain) fn(*n.chain);
  for (const auto& in : n.inputs)
    if (in.value) fn(*in.value);
}

template <typename Fn>
void for_each_operand_mut(DagNode& n, Fn&& fn) {
  for (auto& v : n.ops) fn(v);
  if (n.chain) fn(*n.chain);
  for (auto& in : n.inputs)
    if (in.value) fn(*in.value);
}

}  // namespace

std::vector<int> SelDag::topo_order() const {
  std::vector<int> order;
  std::vector<uint8_t> state(nodes.size(), 0);
  // Iterative DFS; operands are visited in stable order so output is deterministic.
  std::function<void(int)> visit = [&](int start) {
    std::vector<std::pair<int, size_t>> stack{{start, 0}};
    state[static_cast<size_t>(start)] = 1;
    while (!stack.empty()) {
      auto& [n, next] = stack.back();
      std::vector<int> kids;
      for_each_operand(at(n), [&](const DagValue& v) { kids.push_back(v.node); });
      if (next < kids.size()) {
        int k = kids[next++];
        if (state[static_cast<size_t>(k)] == 0) {
          state[static_cast<size_t>(k)] = 1;
          stack.push_back({k, 0});
        } else if (state[static_cast<size_t>(k)] == 1) {
          throw Error("selection DAG contains a cycle");
        }
      } else {
        state[static_cast<size_t>(n)] = 2;
        order.push_back(n);
        stack.pop_back();
      }
    }
  };
  if (root >= 0) visit(root);
  return order;
}

size_t SelDag::use_count(DagValue v) const {
  size_t n = 0;
  for (const auto& node : nodes) {
    if (node.dead) continue;
    for_each_operand(node, [&](const DagValue& u) { n += u == v; });
  }
  return n;
}

void SelDag::replace_uses(DagValue from, DagValue to) {
  for (auto& node : nodes) {
    if (node.dead) continue;
    for_each_operand_mut(node, [&](DagValue& u) {
      if (u == from) u = to;
    });
  }
}

size_t SelDag::prune() {
  std::vector<uint8_t> live(nodes.size(), 0);
  for (int n : topo_order()) live[static_cast<size_t>(n)] = 1;
  if (entry >= 0) live[static_cast<size_t>(entry)] = 1;
  size_t removed = 0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (!live[i] && !nodes[i].dead) {
      nodes[i].dead = true;
      ++removed;
    }
  }
  return removed;
}

size_t SelDag::live_count() const {
  return static_cast<size_t>(std::count_if(nodes.begin(), nodes.end(), [](const DagNode& n) { return !n.dead; }));
}

namespace {

DagNode value_node(DagKind k, std::vector<DagValue> ops, bool ptr = false) {
  DagNode n;
  n.kind = k;
  n.ops = std::move(ops);
  n.has_value = true;
  n.ptr_value = ptr;
  return n;
}

class Builder {
public:
  Builder(const IrFunction& f, const IrModule& m) : f_(f), m_(m) {}

  SelDag run() {
    DagNode entry;
    entry.kind = DagKind::EntryToken;
    entry.has_chain_out = true;
    dag_.entry = dag_.add(std::move(entry));
    chain_ = {dag_.entry, 1};
    for (size_t i = 0; i < f_.params.size(); ++i) {
      if (i >= 8) throw Error(fmt::format("@{}: more than 8 arguments are not supported", f_.name));
      DagNode r = value_node(DagKind::Register, {}, f_.params[i].type == IrType::Ptr);
      r.imm = kA0 + static_cast<int>(i);
      args_.push_back(dag_.add(std::move(r)));
    }
    for (const auto& inst : f_.body().insts) lower(inst);
    return std::move(dag_);
  }

private:
  DagValue constant(int64_t v) {
    auto it = constants_.find(v);
    if (it != constants_.end()) return {it->second, 0};
    DagNode n = value_node(DagKind::Constant, {});
    n.imm = v;
    int id = dag_.add(std::move(n));
    constants_[v] = id;
    return {id, 0};
  }

  DagValue value(const IrValue& v) {
    switch (v.kind) {
      case IrValue::Kind::Inst: {
        auto it = values_.find(v.payload);
        if (it == values_.end()) throw Error(fmt::format("@{}: value used before definition", f_.name));
        return it->second;
      }
      case IrValue::Kind::Arg: return {args_.at(static_cast<size_t>(v.payload)), 0};
      case IrValue::Kind::Const: return constant(v.payload);
      case IrValue::Kind::Global: {
        auto it = globals_.find(v.payload);
        if (it != globals_.end()) return {it->second, 0};
        DagNode n = value_node(DagKind::GlobalAddress, {}, true);
        n.symbol = m_.globals.at(static_cast<size_t>(v.payload)).name;
        int id = dag_.add(std::move(n));
        globals_[v.payload] = id;
        return {id, 0};
      }
      case IrValue::Kind::Undef:
        throw Error(fmt::format("@{}: cannot lower a poison value", f_.name));
    }
    return {};
  }

  static DagKind kind_of(Opcode op) {
    switch (op) {
      case Opcode::Add: return DagKind::Add;
      case Opcode::Sub: return DagKind::Sub;
      case Opcode::Mul: return DagKind::Mul;
      case Opcode::And: return DagKind::And;
      case Opcode::Or: return DagKind::Or;
      case Opcode::Xor: return DagKind::Xor;
      case Opcode::Shl: return DagKind::Shl;
      case Opcode::LShr: return DagKind::Srl;
      case Opcode::AShr: return DagKind::Sra;
      case Opcode::Fshl: return DagKind::Fshl;
      case Opcode::Fshr: return DagKind::Fshr;
      default: return DagKind::EntryToken;
    }
  }

  void lower(const IrInst& inst) {
    switch (inst.op) {
      case Opcode::Alloca: {
        DagNode n = value_node(DagKind::FrameIndex, {}, true);
        n.imm = static_cast<int64_t>(dag_.frame_objects.size());
        dag_.frame_objects.push_back(inst.alloca_size);
        values_[inst.id] = {dag_.add(std::move(n)), 0};
        return;
      }
      case Opcode::Load: {
        DagNode n = value_node(DagKind::Load, {value(inst.operands[0])}, inst.type == IrType::Ptr);
        n.chain = chain_;
        n.has_chain_out = true;
        int id = dag_.add(std::move(n));
        chain_ = {id, 1};
        values_[inst.id] = {id, 0};
        return;
      }
      case Opcode::Store: {
        DagNode n;
        n.kind = DagKind::Store;
        n.ops = {value(inst.operands[0]), value(inst.operands[1])};
        n.chain = chain_;
        n.has_chain_out = true;
        chain_ = {dag_.add(std::move(n)), 1};
        return;
      }
      case Opcode::Gep: {
        DagValue base = value(inst.operands[0]);
        DagValue off = value(inst.operands[1]);
        // A zero offset folds to the base, leaving the constant orphaned.
        if (inst.operands[1].is_const(0)) {
          values_[inst.id] = base;
          return;
        }
        values_[inst.id] = {dag_.add(value_node(DagKind::Add, {base, off}, true)), 0};
        return;
      }
      case Opcode::Ret: {
        DagNode n;
        n.kind = DagKind::Ret;
        if (!inst.operands.empty()) n.ops = {value(inst.operands[0])};
        n.chain = chain_;
        dag_.root = dag_.add(std::move(n));
        return;
      }
      default: {
        std::vector<DagValue> ops;
        for (const auto& o : inst.operands) ops.push_back(value(o));
        values_[inst.id] = {dag_.add(value_node(kind_of(inst.op), std::move(ops))), 0};
        return;
      }
    }
  }

  const IrFunction& f_;
  const IrModule& m_;
  SelDag dag_;
  DagValue chain_;
  std::vector<int> args_;
  std::map<int64_t, int> constants_;
  std::unordered_map<int32_t, int> globals_;
  std::unordered_map<int32_t, DagValue> values_;
};

DagValue get_constant(SelDag& dag, int64_t v) {
  for (size_t i = 0; i < dag.nodes.size(); ++i) {
    const auto& n = dag.nodes[i];
    if (!n.dead && n.kind == DagKind::Constant && n.imm == v) return {static_cast<int>(i), 0};
  }
  DagNode n = value_node(DagKind::Constant, {});
  n.imm = v;
  return {dag.add(std::move(n)), 0};
}

}  // namespace

SelDag build_dag(const IrFunction& f, const IrModule& m) {
  if (f.blocks.size() != 1) throw Error(fmt::format("@{}: expected a single basic block", f.name));
  return Builder(f, m).run();
}

void combine(SelDag& dag, CombineStage) {
  // Merge duplicate constants onto the lowest-numbered node.
  std::map<int64_t, int> first;
  for (size_t i = 0; i < dag.nodes.size(); ++i) {
    auto& n = dag.nodes[i];
    if (n.dead || n.kind != DagKind::Constant) continue;
    auto [it, inserted] = first.try_emplace(n.imm, static_cast<int>(i));
    if (!inserted) {
      dag.replace_uses({static_cast<int>(i), 0}, {it->second, 0});
      n.dead = true;
    }
  }
  dag.prune();
}

namespace {

// 0 - v, folding a double negation.
DagValue negate(SelDag& dag, DagValue v) {
  const DagNode& n = dag.at(v.node);
  if (n.kind == DagKind::Sub && dag.at(n.ops[0].node).kind == DagKind::Constant && dag.at(n.ops[0].node).imm == 0)
    return n.ops[1];
  return {dag.add(value_node(DagKind::Sub, {get_constant(dag, 0), v})), 0};
}

}  // namespace

void legalize(SelDag& dag, ExtensionSet exts) {
  for (int id : dag.topo_order()) {
    DagNode n = dag.at(id);
    DagValue self{id, 0};
    switch (n.kind) {
      case DagKind::GlobalAddress: {
        DagNode t;
        t.kind = DagKind::TargetGlobalAddress;
        t.symbol = n.symbol;
        int tg = dag.add(std::move(t));
        int hi = dag.add(value_node(DagKind::Hi, {{tg, 0}}));
        int lo = dag.add(value_node(DagKind::AddLo, {{hi, 0}, {tg, 0}}, true));
        dag.replace_uses(self, {lo, 0});
        dag.at(id).dead = true;
        break;
      }
      case DagKind::Fshl:
      case DagKind::Fshr: {
        if (!(n.ops[0] == n.ops[1]))
          throw Error(fmt::format("funnel shift with distinct operands (t{}) is not supported", n.stable_id));
        const DagNode& amt = dag.at(n.ops[2].node);
        DagValue amount = n.ops[2];
        if (amt.kind == DagKind::Constant) {
          int64_t c = ((amt.imm % 32) + 32) % 32;
          if (n.kind == DagKind::Fshl) c = (32 - c) % 32;
          if (c == 0) {
            dag.replace_uses(self, n.ops[0]);
            dag.at(id).dead = true;
            break;
          }
          amount = get_constant(dag, c);
        } else if (n.kind == DagKind::Fshl) {
          amount = negate(dag, amount);
        }
        int rot = dag.add(value_node(DagKind::Rotr, {n.ops[0], amount}));
        dag.replace_uses(self, {rot, 0});
        dag.at(id).dead = true;
        break;
      }
      default:
        break;
    }
  }
  // Zbb has ror and rori; Xcrypt only the immediate roti.
  for (int id : dag.topo_order()) {
    DagNode n = dag.at(id);
    if (n.kind != DagKind::Rotr) continue;
    const DagNode& amt = dag.at(n.ops[1].node);
    if (exts.has(Ext::Zbb) || (exts.has(Ext::Xcrypt) && amt.kind == DagKind::Constant)) continue;
    DagValue left, right;
    if (amt.kind == DagKind::Constant) {
      int64_t c = ((amt.imm % 32) + 32) % 32;
      if (c == 0) {
        dag.replace_uses({id, 0}, n.ops[0]);
        dag.at(id).dead = true;
        continue;
      }
      left = {dag.add(value_node(DagKind::Shl, {n.ops[0], get_constant(dag, 32 - c)})), 0};
      right = {dag.add(value_node(DagKind::Srl, {n.ops[0], get_constant(dag, c)})), 0};
    } else {
      DagValue neg = negate(dag, n.ops[1]);
      left = {dag.add(value_node(DagKind::Shl, {n.ops[0], neg})), 0};
      right = {dag.add(value_node(DagKind::Srl, {n.ops[0], n.ops[1]})), 0};
    }
    int orr = dag.add(value_node(DagKind::Or, {left, right}));
    dag.replace_uses({id, 0}, {orr, 0});
    dag.at(id).dead = true;
  }
  dag.prune();
}

std::optional<DagStage> parse_dag_stage(std::string_view s) {
  if (s == "built") return DagStage::Built;
  if (s == "combined1") return DagStage::Combined1;
  if (s == "legalized") return DagStage::Legalized;
  if (s == "combined2") return DagStage::Combined2;
  if (s == "selected") return DagStage::Selected;
  return std::nullopt;
}

std::string emit_dot(const SelDag& dag, std::string_view stage_label, const TargetDesc* td) {
  std::string out = fmt::format("digraph \"{}\" {{\n  label=\"{}\";\n", stage_label, stage_label);
  auto type_of = [](const DagNode& n) {
    std::string t;
    if (n.has_value) t = n.ptr_value ? "ptr" : "i32";
    if (n.has_chain_out) t += t.empty() ? "ch" : ",ch";
    return t.empty() ? std::string("ch") : t;
  };
  for (size_t i = 0; i < dag.nodes.size(); ++i) {
    const DagNode& n = dag.nodes[i];
    if (n.dead) continue;
    std::string kind;
    switch (n.kind) {
      case DagKind::Constant: kind = fmt::format("Constant<{}>", n.imm); break;
      case DagKind::Register: kind = fmt::format("Register {}", abi_reg_name(static_cast<int>(n.imm))); break;
      case DagKind::FrameIndex: kind = fmt::format("FrameIndex<{}>", n.imm); break;
      case DagKind::GlobalAddress:
      case DagKind::TargetGlobalAddress:
        kind = fmt::format("{}<@{}>", dag_kind_name(n.kind), n.symbol);
        break;
      case DagKind::Machine:
        kind = td ? td->def(n.def).record : fmt::format("machine#{}", n.def);
        break;
      default: kind = std::string(dag_kind_name(n.kind)); break;
    }
    out += fmt::format("  n{} [label=\"t{}: {}:{}\"];\n", n.stable_id, n.stable_id, kind, type_of(n));
  }
  for (size_t i = 0; i < dag.nodes.size(); ++i) {
    const DagNode& n = dag.nodes[i];
    if (n.dead) continue;
    for (const auto& v : n.ops) out += fmt::format("  n{} -> n{};\n", n.stable_id, dag.at(v.node).stable_id);
    for (const auto& in : n.inputs)
      if (in.value) out += fmt::format("  n{} -> n{};\n", n.stable_id, dag.at(in.value->node).stable_id);
    if (n.chain) out += fmt::format("  n{} -> n{} [style=dashed];\n", n.stable_id, dag.at(n.chain->node).stable_id);
  }
  out += "}\n";
  return out;
}

}  // namespace rvx
