#include "bsde/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace bsde {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

nlohmann::json report_to_json(const ExperimentReport& report,
                              const nlohmann::json& config_echo) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = config_echo;
  j["theorem"] = report.theorem;
  j["pass"] = report.pass;
  j["seed"] = report.seed;
  j["tail_ratio"] = report.tail_ratio;
  j["scalars"] = report.scalars;
  j["messages"] = report.messages;
  j["table"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    j["table"].push_back({{"n_or_level", row.n_or_level},
                          {"y0", row.y0},
                          {"stderr", row.stderr_},
                          {"gap", row.gap},
                          {"verdict", row.verdict}});
  }
  return j;
}

std::string table_to_csv(const std::vector<TableRow>& rows) {
  std::ostringstream os;
  os << "n_or_level,y0,stderr,gap,verdict\n";
  for (const auto& row : rows) {
    os << format_double(row.n_or_level) << ',' << format_double(row.y0) << ','
       << format_double(row.stderr_) << ',' << format_double(row.gap) << ','
       << row.verdict << '\n';
  }
  return os.str();
}

namespace {

double parse_field(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad numeric CSV field: " + s);
  return v;
}

}  // namespace

std::vector<TableRow> parse_table_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line) || line != "n_or_level,y0,stderr,gap,verdict")
    throw std::invalid_argument("bad CSV header: " + line);
  std::vector<TableRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 5)
      throw std::invalid_argument("bad CSV row: " + line);
    TableRow row;
    row.n_or_level = parse_field(fields[0]);
    row.y0 = parse_field(fields[1]);
    row.stderr_ = parse_field(fields[2]);
    row.gap = parse_field(fields[3]);
    row.verdict = fields[4];
    rows.push_back(row);
  }
  return rows;
}

void write_file(const std::string& path, const std::string& payload) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << payload;
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace bsde
