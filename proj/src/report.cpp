#include "deniable/report.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace deniable {

namespace {

using nlohmann::json;

json value_json(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

json cell_json(CellRef c, const Schema& schema) {
  return {{"tuple", c.tuple}, {"attribute", schema.attribute(c.attribute).name}};
}

json header(std::string_view command) {
  return {{"format", kReportFormat}, {"command", command}};
}

std::string_view mode_name(Mode m) { return m == Mode::Full ? "full" : "kden"; }

std::string_view detection_name(DetectionMethod d) {
  switch (d) {
    case DetectionMethod::Ttc: return "ttc";
    case DetectionMethod::Query: return "query";
    case DetectionMethod::Oblivious: return "oblivious";
  }
  return "ttc";
}

}  // namespace

std::string protect_report_json(const RunReport& report, const EngineOptions& options,
                                const QuerierView& view) {
  const Schema& schema = view.instance().schema();
  json doc = header("protect");
  doc["querier"] = options.querier;
  doc["mode"] = mode_name(options.mode);
  if (options.mode == Mode::KDen) doc["k"] = options.k;
  doc["detection"] = detection_name(options.detection);
  doc["protection"] = options.protection == ProtectionMethod::Mvc ? "mvc" : "random";
  doc["seed"] = options.seed;
  doc["iterations"] = report.iterations;
  doc["cuesets_per_invocation"] = report.cuesets_per_invocation;
  doc["hidden_per_invocation"] = report.hidden_per_invocation;
  doc["sensitive"] = report.sensitive;
  doc["total_hidden"] = report.total_hidden;
  doc["pruned_cuesets"] = report.pruned_cuesets;
  doc["bin_runs"] = report.bin_runs;
  doc["merge_runs"] = report.merge_runs;
  doc["wall_ms"] = report.wall_ms;
  json residuals = json::array();
  for (const auto& r : report.residuals) {
    json entry = cell_json(r.cell, schema);
    entry["origin"] = r.origin;
    entry["reason"] = r.reason;
    residuals.push_back(std::move(entry));
  }
  doc["residuals"] = std::move(residuals);
  return doc.dump(2) + "\n";
}

std::string verify_report_json(const OracleResult& result, const Schema& schema) {
  json doc = header("verify");
  doc["passed"] = result.passed();
  doc["checked"] = result.entries.size();
  json failures = json::array();
  for (const auto& e : result.entries) {
    if (e.equal) continue;
    json entry = cell_json(e.cell, schema);
    json view_set = json::array();
    json base_set = json::array();
    for (const auto& v : e.under_view) view_set.push_back(value_json(v));
    for (const auto& v : e.under_base) base_set.push_back(value_json(v));
    entry["under_view"] = std::move(view_set);
    entry["under_base"] = std::move(base_set);
    failures.push_back(std::move(entry));
  }
  doc["failures"] = std::move(failures);
  return doc.dump(2) + "\n";
}

std::string attack_report_json(const std::vector<std::pair<std::string, AttackOutcome>>& outcomes,
                               const RelationInstance& instance) {
  const Schema& schema = instance.schema();
  json doc = header("attack");
  json attackers = json::array();
  for (const auto& [name, outcome] : outcomes) {
    json guesses = json::array();
    for (const auto& [cell, value] : outcome.guesses) {
      json g = cell_json(cell, schema);
      g["guess"] = value_json(value);
      g["correct"] = values_equal(value, instance.at(cell));
      guesses.push_back(std::move(g));
    }
    attackers.push_back({{"attacker", name},
                         {"guesses", outcome.guesses.size()},
                         {"correct", outcome.correct},
                         {"total", outcome.total},
                         {"precision", outcome.precision()},
                         {"cells", std::move(guesses)}});
  }
  doc["attackers"] = std::move(attackers);
  return doc.dump(2) + "\n";
}

std::string connectivity_report_json(const std::vector<ConnectivityRow>& rows) {
  json doc = header("connectivity");
  json table = json::array();
  for (const auto& r : rows) {
    table.push_back({{"attribute", r.attribute},
                     {"degree", r.degree},
                     {"score", r.score},
                     {"tier", to_string(r.tier)}});
  }
  doc["attributes"] = std::move(table);
  return doc.dump(2) + "\n";
}

std::string format_connectivity(const std::vector<ConnectivityRow>& rows) {
  std::size_t width = 9;
  for (const auto& r : rows) width = std::max(width, r.attribute.size());
  std::ostringstream out;
  const auto pad = [&](std::string_view s, std::size_t w) {
    out << s;
    for (std::size_t i = s.size(); i < w; ++i) out << ' ';
  };
  pad("attribute", width + 2);
  pad("degree", 8);
  pad("score", 8);
  out << "tier\n";
  for (const auto& r : rows) {
    pad(r.attribute, width + 2);
    pad(std::to_string(r.degree), 8);
    pad(std::to_string(r.score), 8);
    out << to_string(r.tier) << '\n';
  }
  return out.str();
}

}  // namespace deniable
