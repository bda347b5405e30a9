#pragma once

#include <map>
#include <optional>

#include "carddl/ast.hpp"
#include "carddl/config.hpp"
#include "carddl/interpretation.hpp"
#include "carddl/linear.hpp"
#include "carddl/qfbapa.hpp"
#include "carddl/satpp.hpp"

// ABox consistency w.r.t. ERCBoxes by type elimination: types over the
// knowledge base's closure and individual markers, per-type successor
// formulas phi_t', realizability-restricted support witnesses, and the
// linear elimination step over per-type count variables.

namespace carddl::consist {

// Type for R and A: sign assignment over closure pairs plus one marker bit
// per individual.
struct RAType {
  std::vector<bool> bits;     // closure pairs
  std::vector<bool> indBits;  // individual markers

  bool operator==(const RAType& o) const { return bits == o.bits && indBits == o.indBits; }
};

struct AugWitness {
  int type = -1;
  std::vector<qfbapa::Region> support;  // V: exactly the non-empty regions
  qfbapa::Solution solution;            // validates via solve_with_support

  long long universe_size() const { return solution.universe_size(); }
};

// Explicit augmented type for the enumeration surface.
struct AugType {
  RAType type;
  std::vector<qfbapa::Region> venn;
  qfbapa::Solution witness;
};

struct TraceEntry {
  int step = 0;  // 1: individual choice, 2: unrealized support, 3: linear elimination
  int type = -1;
  std::string note;
};

struct EliminationState {
  std::vector<int> alive;              // surviving type indices, ascending
  std::map<int, int> chosenForInd;     // individual index -> type index
  std::map<int, AugWitness> witnesses; // per surviving type, at fixpoint
  LinearSystem phiT;                   // variables follow `alive`
  std::vector<Int> positiveSolution;   // all entries >= 1
  std::vector<TraceEntry> trace;
};

struct ConsistencyResult {
  qfbapa::Verdict verdict = qfbapa::Verdict::Unsat;
  std::optional<EliminationState> state;
  std::optional<Interpretation> model;
  std::vector<TraceEntry> trace;  // includes failed candidate sets
};

// Boolean valuations of the positive structure that make it true; each entry
// lists the constraint indices taken as a conjunction.
std::vector<std::vector<int>> dnf_split(const ErcNode& erc, int constraintCount);

class Engine {
 public:
  // kb must be normalized (atomic ABox/ERCBox concepts, depth-<=1 TBox) and
  // succ-dialect; the ABox must mention at least one individual.
  explicit Engine(KnowledgeBase kb, RunConfig cfg = {});

  const KnowledgeBase& kb() const { return kb_; }
  const satpp::Closure& closure() const { return cl_; }
  const std::vector<RAType>& types() const { return types_; }
  const std::vector<std::string>& roles() const { return roles_; }
  const std::vector<std::string>& individuals() const { return inds_; }

  // phi_t' exactly as constructed from the type: successor constraints, the
  // role cover equation, |X_b| <= 1, and the (possibly negated) role
  // assertion conjuncts when t carries an individual.
  qfbapa::Formula phi_t_prime(int typeIdx) const;

  // Region classification: does the region's concept/individual part embed
  // into one of the given types?
  bool realized(const qfbapa::Region& region, const std::vector<int>& aliveTypes) const;

  // Explicit augmented-type enumeration (support subsets of candidate
  // regions, size-ascending up to the sparse bound); honest cap errors.
  std::vector<AugType> augmented_types(const std::vector<int>& conj, long long cap) const;

  // The three-step elimination for a conjunctive ERCBox (constraint index
  // set); nullopt when every candidate set fails.
  std::optional<EliminationState> algorithm1(const std::vector<int>& conj,
                                             std::vector<TraceEntry>* traceOut = nullptr) const;

  Interpretation extract_model(const EliminationState& state, const std::vector<int>& conj) const;

  LinearSystem build_phi_T(const std::vector<int>& conj, const std::vector<int>& alive) const;

 private:
  KnowledgeBase kb_;
  RunConfig cfg_;
  satpp::Closure cl_;
  std::vector<std::string> roles_, inds_, conceptNames_;
  std::vector<RAType> types_;

  int member_var(const ConceptPtr& c) const;
  int ind_var(int indIdx) const { return int(cl_.members.size()) + indIdx; }
  int role_var(int roleIdx) const { return int(cl_.members.size() + inds_.size()) + roleIdx; }
  std::vector<std::string> var_table() const;
  qfbapa::STerm type_term(const RAType& t) const;
  qfbapa::FNode embed_atom(const std::vector<int>& aliveTypes) const;
  std::optional<AugWitness> support_witness(int typeIdx, const std::vector<int>& alive) const;
  bool type_has_concept(const RAType& t, const ConceptPtr& name) const;
  qfbapa::SolverConfig solver_config() const;

  friend struct EngineTestPeer;
};

// Full pipeline: normalize, split the positive ERCBox, run the elimination
// per conjunct, extract and audit a model on success.
ConsistencyResult consistent(const KnowledgeBase& kb, const RunConfig& cfg = {});

}  // namespace carddl::consist
