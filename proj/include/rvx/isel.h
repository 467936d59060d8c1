#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rvx/ir.h"
#include "rvx/target.h"

namespace rvx {

enum class DagKind : uint8_t {
  EntryToken, Constant, GlobalAddress, TargetGlobalAddress, Register, FrameIndex,
  Load, Store,
  Add, Sub, Mul, And, Or, Xor, Shl, Srl, Sra, Rotr, Fshl, Fshr,
  Ret,
  Hi, AddLo,  // target pseudo nodes introduced by legalization
  Machine,
};

std::string_view dag_kind_name(DagKind k);
bool is_generic(DagKind k);

struct DagValue {
  int node = -1;
  int result = 0;  // 0 = value, 1 = chain
  bool valid() const { return node >= 0; }
  bool operator==(const DagValue&) const = default;
};

// Register or immediate input of a selected machine node, in (ins ...) order.
struct MachineInput {
  std::optional<DagValue> value;
  MachineOperand imm;
};

struct DagNode {
  DagKind kind = DagKind::EntryToken;
  int stable_id = 0;
  std::vector<DagValue> ops;   // value operands
  std::optional<DagValue> chain;
  bool has_value = false;
  bool has_chain_out = false;
  bool ptr_value = false;      // value type ptr rather than i32
  int64_t imm = 0;             // Constant value, Register number, FrameIndex
  std::string symbol;          // GlobalAddress / TargetGlobalAddress
  int def = -1;                // Machine: instruction index
  std::vector<MachineInput> inputs;
  bool dead = false;
};

struct SelDag {
  std::vector<DagNode> nodes;
  int entry = -1;
  int root = -1;
  std::vector<int32_t> frame_objects;

  int add(DagNode n);
  DagNode& at(int i) { return nodes.at(static_cast<size_t>(i)); }
  const DagNode& at(int i) const { return nodes.at(static_cast<size_t>(i)); }
  // Live nodes in an order where every operand precedes its users.
  std::vector<int> topo_order() const;
  // Number of live users of a particular result.
  size_t use_count(DagValue v) const;
  void replace_uses(DagValue from, DagValue to);
  // Marks nodes unreachable from the root dead; returns how many.
  size_t prune();
  size_t live_count() const;
};

SelDag build_dag(const IrFunction& f, const IrModule& m);

enum class CombineStage { PreLegalize, PostLegalize };
void combine(SelDag& dag, CombineStage stage);

void legalize(SelDag& dag, ExtensionSet exts);

// An imperative matcher consulted before declarative patterns. Returns the
// replacement value on success.
struct IselContext;
using IselHook = std::function<std::optional<DagValue>(IselContext&, int node)>;
struct HookEntry {
  DagKind root;
  std::string name;
  IselHook fn;
};
std::vector<HookEntry> default_hooks();

struct IselOptions {
  ExtensionSet exts = ExtensionSet::base_im();
  int zba_threshold = 2;
  bool trace = false;
};

struct IselContext {
  SelDag& dag;
  const TargetDesc& td;
  const IselOptions& opts;
  std::vector<std::string>& trace;

  int machine(std::string_view record, std::vector<MachineInput> inputs);
  void log(std::string line) {
    if (opts.trace) trace.push_back(std::move(line));
  }
  std::string describe(int node) const;
};

// Throws Error naming the first node no rule covers.
void select(SelDag& dag, const TargetDesc& td, const IselOptions& opts,
            const std::vector<HookEntry>& hooks, std::vector<std::string>* trace = nullptr);

// Kahn's algorithm, ready nodes taken in stable_id order.
MachineFunction schedule(const SelDag& dag, const TargetDesc& td, std::string_view name);

std::string emit_dot(const SelDag& dag, std::string_view stage_label, const TargetDesc* td = nullptr);

enum class DagStage { Built, Combined1, Legalized, Combined2, Selected };
std::optional<DagStage> parse_dag_stage(std::string_view s);

struct IselResult {
  MachineFunction mf;
  std::vector<std::string> trace;
  std::string dot;  // only for the requested stage
};

// build, combine, legalize, combine, select, schedule.
IselResult run_isel(const IrFunction& f, const IrModule& m, const TargetDesc& td,
                    const IselOptions& opts, std::optional<DagStage> dot_stage = std::nullopt);

}  // namespace rvx
