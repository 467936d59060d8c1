#include <map>
#include <queue>

#include <fmt/format.h>

#include "rvx/isel.h"

namespace rvx {

MachineFunction schedule(const SelDag& dag, const TargetDesc& td, std::string_view name) {
  MachineFunction mf;
  mf.name = std::string(name);
  mf.frame_objects = dag.frame_objects;

  std::vector<int> live = dag.topo_order();
  std::map<int, std::vector<int>> users;
  std::map<int, int> pending;
  for (int id : live) {
    const DagNode& n = dag.at(id);
    std::vector<int> deps;
    for (const auto& v : n.ops) deps.push_back(v.node);
    if (n.chain) deps.push_back(n.chain->node);
    for (const auto& in : n.inputs)
      if (in.value) deps.push_back(in.value->node);
    pending[id] = static_cast<int>(deps.size());
    for (int d : deps) users[d].push_back(id);
  }

  auto by_stable = [&](int a, int b) { return dag.at(a).stable_id > dag.at(b).stable_id; };
  std::priority_queue<int, std::vector<int>, decltype(by_stable)> ready(by_stable);
  for (int id : live)
    if (pending[id] == 0) ready.push(id);

  std::map<int, MachineOperand> reg_of;
  int next_vreg = 0;
  auto operand_of = [&](DagValue v) -> MachineOperand {
    auto it = reg_of.find(v.node);
    if (it == reg_of.end()) throw Error(fmt::format("t{} used before it was scheduled", dag.at(v.node).stable_id));
    return it->second;
  };

  while (!ready.empty()) {
    int id = ready.top();
    ready.pop();
    const DagNode& n = dag.at(id);
    switch (n.kind) {
      case DagKind::Register: {
        int reg = static_cast<int>(n.imm);
        if (reg >= kA0 && reg < kA0 + 8) {
          // Arguments get a virtual copy so the allocator may reuse a0-a7.
          MachineOperand v = MachineOperand::vreg(next_vreg++);
          mf.instrs.push_back({-1, {v, MachineOperand::preg(reg)}, true});
          reg_of[id] = v;
        } else {
          reg_of[id] = MachineOperand::preg(reg);
        }
        break;
      }
      case DagKind::Machine: {
        const InstrDef& d = td.def(n.def);
        if (!n.ops.empty()) {
          mf.instrs.push_back({-1, {MachineOperand::preg(kA0), operand_of(n.ops[0])}, true});
        }
        MachineInstr mi;
        mi.def = n.def;
        MachineOperand out;
        if (d.has_output) {
          out = MachineOperand::vreg(next_vreg++);
          reg_of[id] = out;
        }
        for (Role r : d.operands) {
          if (r == Role::Rd) {
            mi.ops.push_back(d.has_output ? out : MachineOperand::preg(kZero));
            continue;
          }
          size_t k = 0;
          while (k < d.inputs.size() && d.inputs[k] != r) ++k;
          if (k == d.inputs.size() || k >= n.inputs.size())
            throw Error(fmt::format("{}: missing operand {}", d.record, role_name(r)));
          const MachineInput& in = n.inputs[k];
          mi.ops.push_back(in.value ? operand_of(*in.value) : in.imm);
        }
        if (d.record == "JALR") mi.ops[0] = MachineOperand::preg(kZero);
        mf.instrs.push_back(std::move(mi));
        break;
      }
      case DagKind::EntryToken:
      case DagKind::TargetGlobalAddress:
        break;
      default:
        throw Error(fmt::format("cannot schedule unselected node t{}: {}", n.stable_id, dag_kind_name(n.kind)));
    }
    for (int u : users[id])
      if (--pending[u] == 0) ready.push(u);
  }
  mf.num_vregs = next_vreg;
  return mf;
}

IselResult run_isel(const IrFunction& f, const IrModule& m, const TargetDesc& td, const IselOptions& opts,
                    std::optional<DagStage> dot_stage) {
  IselResult res;
  auto snapshot = [&](const SelDag& dag, DagStage stage, std::string_view label) {
    if (dot_stage && *dot_stage == stage) res.dot = emit_dot(dag, fmt::format("{}: {}", f.name, label), &td);
  };
  SelDag dag = build_dag(f, m);
  snapshot(dag, DagStage::Built, "initial selection DAG");
  combine(dag, CombineStage::PreLegalize);
  snapshot(dag, DagStage::Combined1, "optimized lowered selection DAG");
  legalize(dag, opts.exts);
  snapshot(dag, DagStage::Legalized, "legalized selection DAG");
  combine(dag, CombineStage::PostLegalize);
  snapshot(dag, DagStage::Combined2, "optimized legalized selection DAG");
  select(dag, td, opts, default_hooks(), &res.trace);
  snapshot(dag, DagStage::Selected, "selected selection DAG");
  res.mf = schedule(dag, td, f.name);
  return res;
}

}  // namespace rvx
