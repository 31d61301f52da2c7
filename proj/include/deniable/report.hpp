#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "deniable/engine.hpp"
#include "deniable/verify.hpp"

namespace deniable {

// JSON documents written by the command-line tool. Each carries "format": 1
// and the name of the command that produced it.
inline constexpr int kReportFormat = 1;

std::string protect_report_json(const RunReport& report, const EngineOptions& options,
                                const QuerierView& view);
std::string verify_report_json(const OracleResult& result, const Schema& schema);
std::string attack_report_json(const std::vector<std::pair<std::string, AttackOutcome>>& outcomes,
                               const RelationInstance& instance);
std::string connectivity_report_json(const std::vector<ConnectivityRow>& rows);

// Fixed-width table for terminals.
std::string format_connectivity(const std::vector<ConnectivityRow>& rows);

}  // namespace deniable
