#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "isac/admm.hpp"
#include "isac/kpi.hpp"
#include "isac/montecarlo.hpp"

namespace isac {

/// Shortest decimal that round-trips to the same double.
std::string format_number(double value);

/// Header row "<axis>,<label>,..." then one row per axis value.
std::string curve_table_csv(const CurveTable& table);

nlohmann::json waveform_json(const SolveResult& result);
nlohmann::json kpi_json(const KpiReport& report);

/// Writes via a temporary sibling and a rename so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace isac
