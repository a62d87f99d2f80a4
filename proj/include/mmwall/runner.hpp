#pragma once

// Scenario pipelines behind the command-line tool: run a config end to end,
// compare two result CSVs, report the calibrated atom.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mmwall/config.hpp"

namespace mmwall {

inline constexpr const char* kToolVersion = "0.1.0";

/// First line of every output file: tool version, kind, config hash and seed.
std::string manifest_header(const ScenarioConfig& cfg);

/// output_dir from the config unless MMWALL_OUTPUT_DIR is set.
std::filesystem::path resolve_output_dir(const ScenarioConfig& cfg);

/// Atom pair used by every scenario: calibrated to the carrier unless disabled.
ElementModel scenario_model(const ScenarioConfig& cfg);

struct RunSummary {
    std::filesystem::path output_dir;
    std::vector<std::string> files;
    std::vector<std::pair<std::string, double>> metrics;  // headline numbers, in order
};

RunSummary run_scenario(const ScenarioConfig& cfg, Execution exec = Execution::parallel);

// ---------------------------------------------------------------------------

struct CompareReport {
    int exit_code = 0;  // 0 identical within tolerance, 1 exceeded, 2 incompatible
    std::size_t rows = 0;
    std::size_t cells_compared = 0;
    double max_relative_diff = 0.0;
    std::vector<std::string> messages;
};

// Lines starting with '#' are skipped. Headers and row counts must match.
// Numeric cells compare by |a - b| / max(|a|, |b|); other cells exactly.
CompareReport compare_csv(std::istream& a, std::istream& b, double tolerance);
CompareReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b,
                           double tolerance);

// ---------------------------------------------------------------------------

struct CalibrationReport {
    MetaAtomGeometry geometry;
    CircuitValues circuit;
    double f0_at_min_hz = 0.0;
    double f0_at_mid_hz = 0.0;
    double f0_at_max_hz = 0.0;
};

CalibrationReport calibrate(const ScenarioConfig& cfg);
void print_calibration(std::ostream& os, const CalibrationReport& report);

}  // namespace mmwall
