#include "isac/output.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace isac {

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), end);
}

std::string curve_table_csv(const CurveTable& table) {
  for (const auto& [label, values] : table.series) {
    if (values.size() != table.axis_values.size()) {
      throw std::logic_error("series '" + label + "' length differs from the axis");
    }
  }
  std::string out = table.axis_name;
  for (const auto& s : table.series) out += "," + s.first;
  out += '\n';
  for (std::size_t i = 0; i < table.axis_values.size(); ++i) {
    out += format_number(table.axis_values[i]);
    for (const auto& s : table.series) out += "," + format_number(s.second[i]);
    out += '\n';
  }
  return out;
}

nlohmann::json waveform_json(const SolveResult& result) {
  const CMatrix& x = result.waveform.entries;
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index l = 0; l < x.cols(); ++l) row.push_back({x(n, l).real(), x(n, l).imag()});
    rows.push_back(std::move(row));
  }
  nlohmann::json sphere = nlohmann::json::array();
  nlohmann::json similarity = nlohmann::json::array();
  nlohmann::json papr = nlohmann::json::array();
  for (const auto& r : result.residual_history) {
    sphere.push_back(r.sphere);
    similarity.push_back(r.similarity);
    papr.push_back(r.papr);
  }
  return {{"n_antennas", x.rows()},
          {"n_samples", x.cols()},
          {"entries", std::move(rows)},
          {"objective", result.objective},
          {"iterations_run", result.iterations_run},
          {"stopped_early", result.stopped_early},
          {"constraint_violations",
           {{"norm_gap", result.violations.norm_gap},
            {"similarity_excess", result.violations.similarity_excess},
            {"papr_excess", result.violations.papr_excess}}},
          {"residual_history",
           {{"sphere", std::move(sphere)},
            {"similarity", std::move(similarity)},
            {"papr", std::move(papr)}}}};
}

nlohmann::json kpi_json(const KpiReport& report) {
  return {{"mui_energy", report.mui_energy},
          {"per_user_sinr", report.per_user_sinr},
          {"per_user_rate", report.per_user_rate},
          {"sum_rate", report.sum_rate},
          {"rate_per_user", report.rate_per_user()},
          {"papr_linear", report.papr_linear},
          {"papr_db", report.papr_db},
          {"similarity_distance", report.similarity_distance}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace isac
