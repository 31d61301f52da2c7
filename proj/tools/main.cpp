// deniable: protect, verify and attack per-querier secure views.
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deniable/constraints.hpp"
#include "deniable/engine.hpp"
#include "deniable/error.hpp"
#include "deniable/io.hpp"
#include "deniable/report.hpp"
#include "deniable/synth.hpp"
#include "deniable/verify.hpp"

namespace {

using namespace deniable;

enum Exit : int { kOk = 0, kUsage = 1, kResidual = 2, kBudget = 3, kViolation = 4 };

struct Inputs {
  std::string data;
  std::string schema;
  std::string constraints;
  std::string policies;
  std::string querier;
  std::string view;
  std::string report;
};

struct ProtectFlags {
  std::string out;
  std::string mode = "full";
  std::optional<double> k;
  std::string protection = "mvc";
  std::string detection = "ttc";
  std::vector<std::string> cloak;
  bool owner_filter = false;
  std::uint64_t seed = 42;
  std::size_t bin_size = 0;
  std::size_t merge_size = 2;
  std::size_t max_iterations = 0;
};

struct AttackFlags {
  std::string attacker = "all";
  std::uint64_t seed = 42;
};

struct GenFlags {
  std::size_t rows = 100;
  std::uint64_t seed = 42;
  std::size_t owners = 10;
  std::string out;
  std::string schema_out;
  std::string constraints_out;
};

struct Loaded {
  Schema schema;
  DependencySet deps;
  std::shared_ptr<const RelationInstance> instance;
};

Loaded load(const Inputs& in) {
  Loaded l;
  l.schema = parse_schema(read_file(in.schema));
  l.deps = parse_constraints(read_file(in.constraints), l.schema);
  l.instance = std::make_shared<const RelationInstance>(load_relation(read_file(in.data), l.schema));
  return l;
}

// c<n> numbering: 1-based, row-major over the relation.
std::string cell_name(CellRef c, const RelationInstance& inst) {
  return "c" + std::to_string(inst.index(c) + 1) + " (t" + std::to_string(c.tuple + 1) + "." +
         inst.schema().attribute(c.attribute).name + ")";
}

std::string join_values(const std::vector<Value>& values) {
  std::string s = "{";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ", ";
    s += to_text(values[i]);
  }
  return s + "}";
}

std::set<CellRef> sensitive_cells(const Inputs& in, const RelationInstance& inst) {
  const auto policies = parse_policies(read_file(in.policies));
  return sensitivity_determination(policies, in.querier, inst).cells;
}

int cmd_protect(const Inputs& in, const ProtectFlags& f) {
  if (f.mode == "kden" && !f.k) throw CLI::ValidationError("--k", "--mode kden requires --k");
  if (f.mode == "full" && f.k) throw CLI::ValidationError("--k", "--k requires --mode kden");

  const Loaded l = load(in);
  EngineOptions opts;
  opts.mode = f.mode == "kden" ? Mode::KDen : Mode::Full;
  if (f.k) opts.k = *f.k;
  opts.protection = f.protection == "random" ? ProtectionMethod::Random : ProtectionMethod::Mvc;
  opts.detection = f.detection == "query"       ? DetectionMethod::Query
                   : f.detection == "oblivious" ? DetectionMethod::Oblivious
                                                : DetectionMethod::Ttc;
  opts.cloak_attributes = f.cloak;
  opts.owner_filter = f.owner_filter;
  opts.querier = in.querier;
  opts.seed = f.seed;
  opts.max_iterations = f.max_iterations;

  const auto policies = parse_policies(read_file(in.policies));
  const RunResult result =
      f.bin_size > 0 ? run_binning(in.querier, policies, l.deps, l.instance, f.bin_size, f.merge_size, opts)
                     : run_full(in.querier, policies, l.deps, l.instance, opts);

  const std::string csv = format_view(result.view);
  if (f.out.empty()) {
    std::cout << csv;
  } else {
    write_file(f.out, csv);
  }
  if (!in.report.empty()) write_file(in.report, protect_report_json(result.report, opts, result.view));

  const RunReport& r = result.report;
  std::cerr << "sensitive " << r.sensitive << ", hidden " << r.total_hidden << ", iterations " << r.iterations
            << "\n";
  for (const auto& res : r.residuals) {
    std::cerr << "warning: residual leakage at " << cell_name(res.cell, *l.instance) << " via " << res.origin
              << ": " << res.reason << "\n";
  }
  return r.residuals.empty() ? kOk : kResidual;
}

int cmd_verify(const Inputs& in) {
  const Loaded l = load(in);
  const QuerierView view = load_view(read_file(in.view), l.instance);
  const auto sensitive = sensitive_cells(in, *l.instance);
  OracleResult result;
  try {
    result = check_full_deniability(*l.instance, l.deps, sensitive, view);
  } catch (const Error& e) {
    if (e.code() != Errc::DomainTooLarge) throw;
    std::cerr << "error: " << e.what()
              << "\nhint: reduce the bins of continuous attributes, protect a smaller slice, "
                 "or raise TT_ORACLE_BUDGET\n";
    return kBudget;
  }
  if (!in.report.empty()) write_file(in.report, verify_report_json(result, l.schema));
  for (const auto& e : result.entries) {
    if (e.equal) continue;
    std::cout << "FAIL " << cell_name(e.cell, *l.instance) << ": inferred " << join_values(e.under_view)
              << ", base " << join_values(e.under_base) << "\n";
  }
  std::cout << (result.passed() ? "PASS" : "FAIL") << ": " << result.entries.size() << " sensitive cells checked, "
            << result.failures().size() << " leaking\n";
  return result.passed() ? kOk : kViolation;
}

int cmd_attack(const Inputs& in, const AttackFlags& f) {
  const Loaded l = load(in);
  const QuerierView view = load_view(read_file(in.view), l.instance);
  std::vector<std::pair<std::string, AttackOutcome>> outcomes;
  if (f.attacker == "weighted" || f.attacker == "all") {
    outcomes.emplace_back("weighted", attack_weighted_sampling(view, f.seed));
  }
  if (f.attacker == "propagation" || f.attacker == "all") {
    try {
      outcomes.emplace_back("propagation", attack_constraint_propagation(view, l.deps));
    } catch (const Error& e) {
      if (e.code() != Errc::DomainTooLarge) throw;
      std::cerr << "error: " << e.what() << "\nhint: raise TT_ORACLE_BUDGET or reduce continuous bins\n";
      return kBudget;
    }
  }
  for (const auto& [name, o] : outcomes) {
    std::cout << name << ": guessed " << o.total << " cells, " << o.correct << " correct, precision "
              << o.precision() << "\n";
  }
  if (!in.report.empty()) write_file(in.report, attack_report_json(outcomes, *l.instance));
  return kOk;
}

int cmd_gen(const Inputs& in, const GenFlags& f) {
  const Schema schema = in.schema.empty() ? tax_like_schema() : parse_schema(read_file(in.schema));
  const std::string text = in.constraints.empty() ? tax_like_constraints() : read_file(in.constraints);
  const DependencySet deps = parse_constraints(text, schema);
  GenerateOptions opts;
  opts.rows = f.rows;
  opts.seed = f.seed;
  opts.owners = f.owners;
  const RelationInstance inst = generate(schema, deps, opts);
  const std::string csv = format_relation(inst);
  if (f.out.empty()) {
    std::cout << csv;
  } else {
    write_file(f.out, csv);
  }
  if (!f.schema_out.empty()) write_file(f.schema_out, format_schema(schema));
  if (!f.constraints_out.empty()) write_file(f.constraints_out, format_constraints(deps));
  return kOk;
}

int cmd_connectivity(const Inputs& in) {
  const Schema schema = parse_schema(read_file(in.schema));
  const DependencySet deps = parse_constraints(read_file(in.constraints), schema);
  const auto rows = dependency_connectivity(schema, deps);
  std::cout << format_connectivity(rows);
  if (!in.report.empty()) write_file(in.report, connectivity_report_json(rows));
  return kOk;
}

void add_inputs(CLI::App* cmd, Inputs& in, bool data, bool policies, bool view) {
  cmd->add_option("--schema", in.schema, "schema JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--constraints", in.constraints, "constraint file")->required()->check(CLI::ExistingFile);
  if (data) cmd->add_option("--data", in.data, "relation CSV")->required()->check(CLI::ExistingFile);
  if (policies) {
    cmd->add_option("--policies", in.policies, "policy JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--querier", in.querier, "querier id")->required();
  }
  if (view) cmd->add_option("--view", in.view, "view CSV with \\N for hidden cells")->required()->check(CLI::ExistingFile);
  cmd->add_option("--report", in.report, "write a JSON report here");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-querier secure views that stay deniable under data dependencies"};
  app.require_subcommand(1);

  Inputs in;
  ProtectFlags pf;
  AttackFlags af;
  GenFlags gf;

  auto* protect = app.add_subcommand("protect", "hide sensitive cells and everything that gives them away");
  add_inputs(protect, in, true, true, false);
  protect->add_option("--out", pf.out, "view CSV (stdout when omitted)");
  protect->add_option("--mode", pf.mode, "full or kden")->check(CLI::IsMember({"full", "kden"}));
  protect->add_option("--k", pf.k, "k-percentile deniability level")->check(CLI::Range(0.0, 1.0));
  protect->add_option("--protection", pf.protection)->check(CLI::IsMember({"mvc", "random"}));
  protect->add_option("--detection", pf.detection)->check(CLI::IsMember({"ttc", "query", "oblivious"}));
  protect->add_option("--cloak", pf.cloak, "attributes hidden alongside any hidden cell of a tuple");
  protect->add_flag("--owner-filter", pf.owner_filter, "never hide the querier's own cells");
  protect->add_option("--seed", pf.seed);
  protect->add_option("--bin-size", pf.bin_size, "tuples per bin; enables binning");
  protect->add_option("--merge-size", pf.merge_size, "bins merged per pass")->check(CLI::Range(2, 1 << 20));
  protect->add_option("--max-iterations", pf.max_iterations);

  auto* verify = app.add_subcommand("verify", "check a view with the brute-force deniability oracle");
  add_inputs(verify, in, true, true, true);

  auto* attack = app.add_subcommand("attack", "run simulated attackers against a view");
  add_inputs(attack, in, true, false, true);
  attack->add_option("--attacker", af.attacker)->check(CLI::IsMember({"weighted", "propagation", "all"}));
  attack->add_option("--seed", af.seed);

  auto* gen = app.add_subcommand("gen", "generate a relation satisfying the constraints");
  gen->add_option("--schema", in.schema, "schema JSON (tax-like default)")->check(CLI::ExistingFile);
  gen->add_option("--constraints", in.constraints, "constraints (tax-like default)")->check(CLI::ExistingFile);
  gen->add_option("--rows", gf.rows)->check(CLI::PositiveNumber);
  gen->add_option("--seed", gf.seed);
  gen->add_option("--owners", gf.owners, "distinct owners when the schema has an owner column");
  gen->add_option("--out", gf.out, "CSV (stdout when omitted)");
  gen->add_option("--schema-out", gf.schema_out, "also write the schema used");
  gen->add_option("--constraints-out", gf.constraints_out, "also write the constraints used");

  auto* conn = app.add_subcommand("connectivity", "rank attributes by dependency connectivity");
  conn->add_option("--schema", in.schema)->required()->check(CLI::ExistingFile);
  conn->add_option("--constraints", in.constraints)->required()->check(CLI::ExistingFile);
  conn->add_option("--report", in.report);

  try {
    app.parse(argc, argv);
    if (protect->parsed()) return cmd_protect(in, pf);
    if (verify->parsed()) return cmd_verify(in);
    if (attack->parsed()) return cmd_attack(in, af);
    if (gen->parsed()) return cmd_gen(in, gf);
    return cmd_connectivity(in);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return e.code() == Errc::DomainTooLarge ? kBudget : kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
