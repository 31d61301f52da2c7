#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "deniable/constraints.hpp"
#include "deniable/detect.hpp"
#include "deniable/model.hpp"

namespace deniable {

enum class Mode : std::uint8_t { Full, KDen };
enum class DetectionMethod : std::uint8_t { Ttc, Query, Oblivious };
enum class ProtectionMethod : std::uint8_t { Mvc, Random };

struct EngineOptions {
  Mode mode = Mode::Full;
  double k = 1.0;  // clamped per cell to [1/|Dom|, 1]
  DetectionMethod detection = DetectionMethod::Ttc;
  ProtectionMethod protection = ProtectionMethod::Mvc;
  std::vector<std::string> cloak_attributes;
  bool owner_filter = false;
  std::string querier;
  std::uint64_t seed = 42;
  std::size_t max_iterations = 0;  // 0: number of cells
  bool validate_input = true;
};

struct RunReport {
  std::size_t iterations = 0;  // detection invocations
  std::vector<std::size_t> cuesets_per_invocation;
  // Entry 0 is the sensitive set; entry i the cells added by round i.
  std::vector<std::size_t> hidden_per_invocation;
  std::size_t total_hidden = 0;
  std::size_t sensitive = 0;
  std::vector<ResidualLeakage> residuals;
  double wall_ms = 0.0;
  std::size_t pruned_cuesets = 0;
  std::size_t bin_runs = 0;
  std::size_t merge_runs = 0;
};

struct RunResult {
  QuerierView view;
  RunReport report;
};

// Core loop for a given sensitive set. Honours every option, including k-den.
RunResult protect_sensitive(const std::set<CellRef>& sensitive, const DependencySet& deps,
                            std::shared_ptr<const RelationInstance> instance,
                            const EngineOptions& options);

// Sensitivity determination followed by protect_sensitive.
RunResult run_full(const std::string& querier, std::span<const Policy> policies,
                   const DependencySet& deps, std::shared_ptr<const RelationInstance> instance,
                   const EngineOptions& options);

// Splits the tuples into contiguous bins of `b`, protects each, then merges
// `m` neighbouring results at a time until one run covers the whole instance.
RunResult run_binning(const std::string& querier, std::span<const Policy> policies,
                      const DependencySet& deps, std::shared_ptr<const RelationInstance> instance,
                      std::size_t b, std::size_t m, const EngineOptions& options);
RunResult run_binning(const std::set<CellRef>& sensitive, const DependencySet& deps,
                      std::shared_ptr<const RelationInstance> instance, std::size_t b,
                      std::size_t m, const EngineOptions& options);

// Values an observer can rule out for one cell.
struct LeakageSet {
  bool discrete = true;
  double low = 0.0;   // possible range, closed
  double high = 0.0;
  std::vector<Value> minus_set;  // sorted; for continuous cells, excluded points

  // Fraction of the domain ruled out: |minus|/|Dom| or 1 - (high-low)/|Dom|.
  double fraction(const AttributeDef& attr) const;
  bool excludes(const Value& v) const;
};

// Leakage through the given instantiations, each assumed to satisfy the
// tattle-tale condition for `cell`.
LeakageSet compute_leakage(CellRef cell, const QuerierView& view,
                           std::span<const InstantiatedDependency> instantiations);

double clamp_k(double k, const AttributeDef& attr);

bool is_deniable(const AttributeDef& attr, const LeakageSet& leakage, double k);

// Indices of the cuesets that must still be protected. Level 1 lets each
// owner keep its smallest-leakage cuesets unprotected while it stays
// k-deniable; deeper levels keep everything.
std::vector<std::size_t> kprune(std::span<const Cueset> cuesets, int level, double k,
                                const QuerierView& view, const DependencySet& deps);

// Cuesets of hidden cells that still have no hidden member (empty when the
// view is fully protected).
std::vector<Cueset> uncovered_cuesets(const QuerierView& view, const DependencySet& deps);

}  // namespace deniable
