#include "deniable/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "deniable/error.hpp"
#include "deniable/protect.hpp"

namespace deniable {

// ---- leakage ----------------------------------------------------------------

double LeakageSet::fraction(const AttributeDef& attr) const {
  const double dom = domain_size(attr);
  if (dom <= 0) return 0.0;
  if (discrete) return static_cast<double>(minus_set.size()) / dom;
  return 1.0 - (high - low) / dom;
}

bool LeakageSet::excludes(const Value& v) const {
  for (const Value& m : minus_set) {
    if (values_equal(m, v)) return true;
  }
  if (discrete) return false;
  const auto* x = std::get_if<double>(&v);
  return x && (*x < low - kNumericTolerance || *x > high + kNumericTolerance);
}

namespace {

struct Bounds {
  double low;
  double high;
  std::vector<Value> minus;
  std::optional<Value> exact;  // collapsed to a single value
};

void collapse(Bounds& b, const Value& v) {
  b.exact = v;
  if (const auto* x = std::get_if<double>(&v)) {
    b.low = *x;
    b.high = *x;
  }
}

void apply(Bounds& b, CompareOp op, const Value& v) {
  switch (op) {
    case CompareOp::Lt:
    case CompareOp::Le:
      if (const auto* x = std::get_if<double>(&v); x && b.low < *x) b.low = std::min(*x, b.high);
      break;
    case CompareOp::Gt:
    case CompareOp::Ge:
      if (const auto* x = std::get_if<double>(&v); x && b.high > *x) b.high = std::max(*x, b.low);
      break;
    case CompareOp::Eq:
      b.minus.push_back(v);
      break;
    case CompareOp::Ne:
      collapse(b, v);
      break;
  }
}

}  // namespace

LeakageSet compute_leakage(CellRef cell, const QuerierView& view,
                           std::span<const InstantiatedDependency> instantiations) {
  const RelationInstance& inst = view.instance();
  const AttributeDef& attr = inst.schema().attribute(cell.attribute);
  Bounds b;
  if (attr.is_discrete()) {
    b.low = -INFINITY;
    b.high = INFINITY;
    for (const Value& v : attr.values) {
      if (const auto* x = std::get_if<double>(&v)) {
        b.low = std::isinf(b.low) ? *x : std::min(b.low, *x);
        b.high = std::isinf(b.high) ? *x : std::max(b.high, *x);
      }
    }
  } else {
    b.low = attr.min;
    b.high = attr.max;
  }

  for (const auto& dep : instantiations) {
    if (dep.fc) {
      collapse(b, inst.at(cell));
      continue;
    }
    for (const auto& p : dep.predicates) {
      if (!p.mentions(cell)) continue;
      const bool left = p.lhs.is_cell && p.lhs.cell == cell;
      const GroundOperand& other = left ? p.rhs : p.lhs;
      const CompareOp op = left ? p.op : flipped(p.op);
      const Value* v = other.is_cell ? view.observe(other.cell) : &other.literal;
      if (!v) continue;  // a hidden partner reveals nothing here
      apply(b, op, *v);
    }
  }

  LeakageSet out;
  out.discrete = attr.is_discrete();
  if (out.discrete) {
    for (const Value& v : attr.values) {
      bool gone = std::any_of(b.minus.begin(), b.minus.end(),
                              [&](const Value& m) { return values_equal(m, v); });
      if (b.exact && !values_equal(*b.exact, v)) gone = true;
      if (const auto* x = std::get_if<double>(&v)) {
        if (*x < b.low - kNumericTolerance || *x > b.high + kNumericTolerance) gone = true;
      }
      if (gone) out.minus_set.push_back(v);
    }
    out.low = b.low;
    out.high = b.high;
  } else {
    out.low = std::clamp(b.low, attr.min, attr.max);
    out.high = std::clamp(b.high, out.low, attr.max);
    for (const Value& m : b.minus) {
      if (is_numeric(m)) out.minus_set.push_back(m);
    }
    std::sort(out.minus_set.begin(), out.minus_set.end(), value_less);
  }
  return out;
}

double clamp_k(double k, const AttributeDef& attr) {
  const double dom = domain_size(attr);
  const double lo = dom > 0 ? std::min(1.0, 1.0 / dom) : 1.0;
  return std::clamp(k, lo, 1.0);
}

bool is_deniable(const AttributeDef& attr, const LeakageSet& leakage, double k) {
  const double dom = domain_size(attr);
  k = clamp_k(k, attr);
  if (leakage.discrete) {
    const double kept = dom - static_cast<double>(leakage.minus_set.size());
    return kept + kNumericTolerance >= k * dom;
  }
  return leakage.high - leakage.low + kNumericTolerance >= k * dom;
}

std::vector<std::size_t> kprune(std::span<const Cueset> cuesets, int level, double k,
                                const QuerierView& view, const DependencySet& deps) {
  std::vector<std::size_t> all(cuesets.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (level > 1 || k >= 1.0) return all;

  const RelationInstance& inst = view.instance();
  std::map<CellRef, std::vector<std::size_t>> by_owner;
  for (std::size_t i = 0; i < cuesets.size(); ++i) by_owner[cuesets[i].owner].push_back(i);

  std::vector<std::size_t> retained;
  for (auto& [cell, idx] : by_owner) {
    const AttributeDef& attr = inst.schema().attribute(cell.attribute);
    std::vector<InstantiatedDependency> grounded;
    std::vector<double> score;
    for (std::size_t i : idx) {
      grounded.push_back(ground(deps, cuesets[i].origin, inst));
      score.push_back(compute_leakage(cell, view, std::span(&grounded.back(), 1)).fraction(attr));
    }
    std::vector<std::size_t> order(idx.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });

    // Move the largest contributors into the protected set until what is left
    // unprotected keeps the cell k-deniable.
    std::size_t keep = 0;
    for (; keep <= order.size(); ++keep) {
      std::vector<InstantiatedDependency> rest;
      for (std::size_t j = keep; j < order.size(); ++j) rest.push_back(grounded[order[j]]);
      if (is_deniable(attr, compute_leakage(cell, view, rest), k)) break;
    }
    for (std::size_t j = 0; j < keep && j < order.size(); ++j) retained.push_back(idx[order[j]]);
  }
  std::sort(retained.begin(), retained.end());
  return retained;
}

// ---- main loop ----------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void require_valid(const RelationInstance& inst, const DependencySet& deps) {
  const auto violations = validate_instance(inst, deps);
  if (violations.empty()) return;
  std::string tuples;
  for (std::size_t t : violations.front().tuples) tuples += (tuples.empty() ? "" : ",") + std::to_string(t);
  throw Error(Errc::InvalidInstance, "instance violates " + std::to_string(violations.size()) +
                                         " constraint instantiation(s), first " +
                                         violations.front().constraint_id + " on tuples " + tuples);
}

void check_options(const EngineOptions& o, const RelationInstance& inst) {
  if (o.mode == Mode::KDen && !(o.k >= 0.0 && o.k <= 1.0)) {
    throw Error(Errc::InvalidArgument, "k must lie in [0, 1]");
  }
  if (o.owner_filter && !inst.has_owners()) {
    throw Error(Errc::MissingOwnership, "ownership filtering needs an owner column");
  }
  for (const auto& a : o.cloak_attributes) inst.schema().require(a);
}

std::uint64_t round_seed(std::uint64_t seed, std::size_t round) {
  // splitmix64 step so consecutive rounds draw unrelated streams
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (round + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RunResult core_loop(const std::set<CellRef>& sensitive, const DependencySet& deps,
                    std::shared_ptr<const RelationInstance> instance, const EngineOptions& opts) {
  const auto start = Clock::now();
  const RelationInstance& inst = *instance;
  for (CellRef c : sensitive) {
    if (!inst.contains(c)) throw Error(Errc::InvalidPolicy, "sensitive cell " + to_string(c) + " out of range");
  }
  const Detector detector(deps, inst);
  const bool kden = opts.mode == Mode::KDen;

  RunResult result{make_view(instance, sensitive), {}};
  RunReport& rep = result.report;
  QuerierView& view = result.view;
  rep.sensitive = sensitive.size();
  rep.hidden_per_invocation.push_back(sensitive.size());

  const std::size_t cap = opts.max_iterations ? opts.max_iterations : std::max<std::size_t>(inst.cell_count(), 1) + 1;
  std::vector<CellRef> fresh(sensitive.begin(), sensitive.end());
  while (!fresh.empty()) {
    if (rep.iterations >= cap) {
      throw Error(Errc::IterationCapExceeded,
                  "no fixpoint after " + std::to_string(rep.iterations) + " iterations");
    }
    Detection det;
    switch (opts.detection) {
      case DetectionMethod::Ttc: det = detector.detect(fresh, view); break;
      case DetectionMethod::Query: det = detect_query_based(fresh, deps, inst, view); break;
      case DetectionMethod::Oblivious: det = detector.detect_oblivious(fresh); break;
    }
    ++rep.iterations;
    if (opts.owner_filter) det = filter_owner(std::move(det), opts.querier, inst);
    std::move(det.residuals.begin(), det.residuals.end(), std::back_inserter(rep.residuals));
    rep.cuesets_per_invocation.push_back(det.cuesets.size());

    std::vector<Cueset> open;
    for (auto& cs : det.cuesets) {
      const bool covered = std::any_of(cs.members.begin(), cs.members.end(),
                                       [&](CellRef c) { return view.is_hidden(c); });
      if (!covered) open.push_back(std::move(cs));
    }
    if (kden) {
      const auto keep = kprune(open, static_cast<int>(rep.iterations), opts.k, view, deps);
      rep.pruned_cuesets += open.size() - keep.size();
      std::vector<Cueset> kept;
      for (std::size_t i : keep) kept.push_back(std::move(open[i]));
      open = std::move(kept);
    }
    if (open.empty()) break;

    HideSelection sel = opts.protection == ProtectionMethod::Mvc
                            ? protect_mvc(open)
                            : protect_random(open, round_seed(opts.seed, rep.iterations));
    if (!opts.cloak_attributes.empty()) sel = protect_cloak(std::move(sel), opts.cloak_attributes, inst.schema());

    fresh.clear();
    for (CellRef c : sel.cells) {
      if (!view.is_hidden(c)) fresh.push_back(c);
    }
    view = view.with_hidden(fresh);
    rep.hidden_per_invocation.push_back(fresh.size());
  }
  rep.total_hidden = view.hidden_count();
  rep.wall_ms = elapsed_ms(start);
  return result;
}

}  // namespace

RunResult protect_sensitive(const std::set<CellRef>& sensitive, const DependencySet& deps,
                            std::shared_ptr<const RelationInstance> instance,
                            const EngineOptions& options) {
  check_options(options, *instance);
  if (options.validate_input) require_valid(*instance, deps);
  if (options.mode == Mode::Full || options.k >= 1.0) {
    EngineOptions full = options;
    full.mode = Mode::Full;
    return core_loop(sensitive, deps, std::move(instance), full);
  }
  const auto start = Clock::now();
  RunResult pruned = core_loop(sensitive, deps, instance, options);
  EngineOptions full = options;
  full.mode = Mode::Full;
  RunResult reference = core_loop(sensitive, deps, instance, full);
  RunResult& chosen = pruned.report.total_hidden <= reference.report.total_hidden ? pruned : reference;
  chosen.report.wall_ms = elapsed_ms(start);
  return std::move(chosen);
}

RunResult run_full(const std::string& querier, std::span<const Policy> policies,
                   const DependencySet& deps, std::shared_ptr<const RelationInstance> instance,
                   const EngineOptions& options) {
  const SensitiveSet s = sensitivity_determination(policies, querier, *instance);
  EngineOptions opts = options;
  if (opts.querier.empty()) opts.querier = querier;
  return protect_sensitive(s.cells, deps, std::move(instance), opts);
}

// ---- binning ------------------------------------------------------------------

RunResult run_binning(const std::set<CellRef>& sensitive, const DependencySet& deps,
                      std::shared_ptr<const RelationInstance> instance, std::size_t b,
                      std::size_t m, const EngineOptions& options) {
  if (b < 1) throw Error(Errc::InvalidArgument, "bin size must be at least 1");
  if (m < 2) throw Error(Errc::InvalidArgument, "merge size must be at least 2");
  const auto start = Clock::now();
  const std::size_t n = instance->tuples();
  if (n <= b) {
    RunResult r = protect_sensitive(sensitive, deps, std::move(instance), options);
    r.report.bin_runs = 1;
    return r;
  }
  check_options(options, *instance);
  if (options.validate_input) require_valid(*instance, deps);
  EngineOptions inner = options;
  inner.validate_input = false;

  struct Group {
    std::size_t first;
    std::size_t last;
    std::set<CellRef> hidden;  // global coordinates
  };
  const auto run_range = [&](std::size_t first, std::size_t last, const std::set<CellRef>& carried) {
    auto part = std::make_shared<const RelationInstance>(instance->slice(first, last));
    std::set<CellRef> local;
    for (CellRef c : carried) {
      if (c.tuple >= first && c.tuple < last) local.insert({static_cast<std::uint32_t>(c.tuple - first), c.attribute});
    }
    RunResult r = protect_sensitive(local, deps, part, inner);
    std::set<CellRef> global;
    for (CellRef c : r.view.hidden_cells()) global.insert({static_cast<std::uint32_t>(c.tuple + first), c.attribute});
    return std::make_pair(std::move(global), std::move(r.report));
  };

  std::vector<Group> groups;
  std::size_t bin_runs = 0;
  for (std::size_t f = 0; f < n; f += b) {
    const std::size_t l = std::min(n, f + b);
    auto [hidden, rep] = run_range(f, l, sensitive);
    ++bin_runs;
    groups.push_back({f, l, std::move(hidden)});
  }

  std::size_t merge_runs = 0;
  RunReport last_report;
  while (groups.size() > 1) {
    std::vector<Group> next;
    for (std::size_t i = 0; i < groups.size(); i += m) {
      const std::size_t j = std::min(groups.size(), i + m);
      if (j - i == 1) {
        next.push_back(std::move(groups[i]));
        continue;
      }
      std::set<CellRef> carried;
      for (std::size_t g = i; g < j; ++g) carried.insert(groups[g].hidden.begin(), groups[g].hidden.end());
      auto [hidden, rep] = run_range(groups[i].first, groups[j - 1].last, carried);
      ++merge_runs;
      last_report = std::move(rep);
      next.push_back({groups[i].first, groups[j - 1].last, std::move(hidden)});
    }
    groups = std::move(next);
  }

  RunResult result{make_view(instance, groups.front().hidden), std::move(last_report)};
  RunReport& rep = result.report;
  // Residuals and cell coordinates in the final report refer to the full instance,
  // which the last merged run always spans.
  rep.sensitive = sensitive.size();
  rep.total_hidden = result.view.hidden_count();
  rep.bin_runs = bin_runs;
  rep.merge_runs = merge_runs;
  rep.wall_ms = elapsed_ms(start);
  return result;
}

RunResult run_binning(const std::string& querier, std::span<const Policy> policies,
                      const DependencySet& deps, std::shared_ptr<const RelationInstance> instance,
                      std::size_t b, std::size_t m, const EngineOptions& options) {
  const SensitiveSet s = sensitivity_determination(policies, querier, *instance);
  EngineOptions opts = options;
  if (opts.querier.empty()) opts.querier = querier;
  return run_binning(s.cells, deps, std::move(instance), b, m, opts);
}

// ---- coverage -----------------------------------------------------------------

std::vector<Cueset> uncovered_cuesets(const QuerierView& view, const DependencySet& deps) {
  const auto hidden = view.hidden_cells();
  Detection det = Detector(deps, view.instance()).detect(hidden, view);
  std::vector<Cueset> out;
  for (auto& cs : det.cuesets) {
    const bool covered = std::any_of(cs.members.begin(), cs.members.end(),
                                     [&](CellRef c) { return view.is_hidden(c); });
    if (!covered) out.push_back(std::move(cs));
  }
  return out;
}

}  // namespace deniable
