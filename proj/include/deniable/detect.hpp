#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "deniable/constraints.hpp"
#include "deniable/model.hpp"

namespace deniable {

enum class Truth : std::uint8_t { False, True, Unknown };

// Unknown when an operand cell is hidden.
Truth eval_predicate(const GroundPredicate& pred, const QuerierView& view);

// True iff every predicate not involving `cell` evaluates True. Throws
// Error(EmptyComplement) when every predicate involves `cell`.
bool ttc(const InstantiatedDependency& inst, const QuerierView& view, CellRef cell);

// Instantiations of one constraint that mention `target`. Binary constraints
// pair the target tuple with every other tuple; asymmetric ones in both slot
// orders, symmetric ones once with the lower tuple in t1.
std::vector<InstantiatedDependency> instantiate(const DenialConstraint& dc, std::uint32_t index,
                                                CellRef target, const RelationInstance& instance);
std::vector<InstantiatedDependency> instantiate(const FunctionConstraint& fc, std::uint32_t index,
                                                CellRef target, const RelationInstance& instance);
std::vector<InstantiatedDependency> instantiate(const DependencySet& deps, CellRef target,
                                                const RelationInstance& instance);

struct Cueset {
  CellRef owner;
  std::vector<CellRef> members;  // ascending, distinct
  InstantiationKey origin;

  friend bool operator==(const Cueset&, const Cueset&) = default;
};

struct ResidualLeakage {
  CellRef cell;
  std::string origin;
  std::string reason;
};

struct Detection {
  std::vector<Cueset> cuesets;
  std::vector<ResidualLeakage> residuals;

  void append(Detection&& other);
};

// What one instantiation contributes for one target cell. A null view skips
// every truth-value check, which is the oblivious behaviour.
struct CuesetRule {
  enum class Kind : std::uint8_t { None, Cueset, Residual };
  Kind kind = Kind::None;
  std::vector<CellRef> members;
  std::string reason;
};

CuesetRule cueset_for(const InstantiatedDependency& inst, CellRef target, const QuerierView* view);

// Reusable detector. Binary constraints with a cross-tuple equality only
// visit partners agreeing on the joined values; the lookup tables are built on
// first use, so one Detector must not be shared between threads.
class Detector {
 public:
  Detector(const DependencySet& deps, const RelationInstance& instance);

  Detection detect(std::span<const CellRef> targets, const QuerierView& view) const;
  Detection detect_oblivious(std::span<const CellRef> targets) const;

  // Every TTC-true instantiation for `target`, paired with its rule outcome.
  std::vector<std::pair<InstantiatedDependency, CuesetRule>> leaking(CellRef target,
                                                                     const QuerierView& view) const;

 private:
  using Sorted = std::vector<std::pair<Value, std::uint32_t>>;
  using Groups = std::unordered_map<std::string, std::vector<std::uint32_t>>;

  void for_each_instantiation(CellRef target, const QuerierView* view,
                              const std::function<void(const InstantiatedDependency&)>& fn) const;
  std::vector<std::uint32_t> candidates(std::size_t dc, CellRef target, bool target_first,
                                        const QuerierView* view) const;

  const DependencySet* deps_;
  const RelationInstance* instance_;
  std::vector<std::uint8_t> symmetric_;
  mutable std::map<std::vector<std::size_t>, Groups> groups_;
  mutable std::map<std::size_t, Sorted> sorted_;
};

Detection detect(std::span<const CellRef> targets, const DependencySet& deps, const QuerierView& view);

// Set-at-a-time formulation: for each constraint, the tuples holding targets
// are joined against every tuple, each predicate is evaluated once per pair,
// and pairs survive when every predicate is True or touches a target cell.
Detection detect_query_based(std::span<const CellRef> targets, const DependencySet& deps,
                             const RelationInstance& instance, const QuerierView& view);

// Ignores truth values: every instantiation of every relevant constraint
// yields a cueset.
Detection detect_oblivious(std::span<const CellRef> targets, const DependencySet& deps,
                           const RelationInstance& instance);

// Drops querier-owned members. A cueset left empty is replaced by a residual
// warning. Throws Error(MissingOwnership) without an owner column.
Detection filter_owner(Detection detection, const std::string& querier,
                       const RelationInstance& instance);

}  // namespace deniable
