#ifndef BSDE_REPORT_HPP
#define BSDE_REPORT_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "bsde/experiments.hpp"

namespace bsde {

inline constexpr int kReportSchemaVersion = 1;

/// JSON payload: schema version, config echo, verdicts, tables. No
/// timestamps, so identical inputs give byte-identical output.
nlohmann::json report_to_json(const ExperimentReport& report,
                              const nlohmann::json& config_echo);

/// CSV with the frozen header n_or_level,y0,stderr,gap,verdict.
std::string table_to_csv(const std::vector<TableRow>& rows);

/// Exact inverse of table_to_csv; throws std::invalid_argument on a
/// malformed header or row.
std::vector<TableRow> parse_table_csv(const std::string& csv);

/// Shortest decimal that round-trips the double exactly.
std::string format_double(double x);

void write_file(const std::string& path, const std::string& payload);

}  // namespace bsde

#endif
