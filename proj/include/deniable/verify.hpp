#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "deniable/constraints.hpp"
#include "deniable/model.hpp"

namespace deniable {

// Budget of evaluated assignments per oracle call; TT_ORACLE_BUDGET overrides.
std::uint64_t default_oracle_budget();

// A ground negated conjunction as the oracle sees it. Built separately from the
// engine's instantiation code.
struct OracleConstraint {
  std::string label;
  std::vector<GroundPredicate> predicates;
};

// Every ground constraint over `cell`: both slot orders of every tuple pair for
// binary constraints, the forward form of each function constraint, and for
// invertible ones the inverse form solving for each input.
std::vector<OracleConstraint> oracle_constraints(const DependencySet& deps, CellRef cell,
                                                 const RelationInstance& instance);

// Values a hidden cell may take: the discrete domain, or bins+1 evenly spaced
// points of a continuous range. The cell's own true value is always included.
std::vector<Value> oracle_candidates(const RelationInstance& instance, CellRef cell);

// Keeps x when, for every constraint, some assignment of the constraint's
// other hidden cells makes it hold with cell = x. Throws Error(DomainTooLarge)
// past the budget.
std::vector<Value> oracle_inferred_set(CellRef cell, const QuerierView& view,
                                       std::span<const OracleConstraint> constraints,
                                       std::uint64_t budget = default_oracle_budget());

struct OracleEntry {
  CellRef cell;
  std::vector<Value> under_view;
  std::vector<Value> under_base;
  bool equal = true;
};

struct OracleResult {
  std::vector<OracleEntry> entries;

  bool passed() const;
  std::vector<CellRef> failures() const;
};

OracleResult check_full_deniability(const RelationInstance& instance, const DependencySet& deps,
                                    const std::set<CellRef>& sensitive, const QuerierView& view,
                                    std::uint64_t budget = default_oracle_budget());

struct AttackOutcome {
  std::map<CellRef, Value> guesses;
  std::size_t correct = 0;
  std::size_t total = 0;

  double precision() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

// Guesses each hidden cell by sampling its column's visible values, or the
// domain uniformly when the column is fully hidden.
AttackOutcome attack_weighted_sampling(const QuerierView& view, std::uint64_t seed);

// Repeatedly applies the oracle to hidden cells and fills in any cell whose
// inferred set is a single value.
AttackOutcome attack_constraint_propagation(const QuerierView& view, const DependencySet& deps,
                                            std::uint64_t budget = default_oracle_budget());

enum class Tier : std::uint8_t { Low, Medium, High };

std::string_view to_string(Tier t) noexcept;

struct ConnectivityRow {
  std::string attribute;
  std::size_t degree = 0;
  std::size_t score = 0;
  Tier tier = Tier::Low;
};

// Rows sorted by score, then degree (both descending), then name. The top
// third is High, the next Medium, the rest Low.
std::vector<ConnectivityRow> dependency_connectivity(const Schema& schema, const DependencySet& deps);

}  // namespace deniable
