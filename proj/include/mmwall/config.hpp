#pragma once

// Scenario configuration: a flat, sectioned key = value text file with units
// spelled out in key names (carrier_hz, pitch_m, ...).
//
//   [scenario]
//   kind = single-beam
//   seed = 7
//
// '#' starts a comment anywhere, ';' only at the start of a line. Unknown sections or keys are errors, reported
// with the line they appear on.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "mmwall/link_scenario.hpp"
#include "mmwall/waveform_optimizer.hpp"

namespace mmwall {

class ConfigError : public ConfigurationError {
public:
    ConfigError(const std::string& source, int line, const std::string& message);
    int line;
};

enum class ScenarioKind {
    pattern_table,
    steer_sweep,
    single_beam,
    double_beam_lens,
    double_beam_mirror,
    link_sim,
};

const char* to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario_kind(const std::string& text);

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::single_beam;
    std::filesystem::path output_dir = "out";

    AtomCircuit atom;
    bool calibrate = true;
    double coupling = 1.0;
    double resolution_v = 0.1;
    double phase_tolerance_deg = 5.0;

    int elements = 20;
    std::optional<double> pitch_m;  // defaults to half a carrier wavelength
    double angle_step_deg = 0.1;

    double carrier_hz = 24e9;
    double modulation_hz = 30e6;
    ModulationSettings modulation;

    GAConfig ga;
    std::optional<std::filesystem::path> genome_file;  // replay instead of optimizing

    double steer_deg = 20.0;
    double weight_minus = 2.0;
    double weight_plus = 1.0;
    int sweep_points = 33;
    double sweep_span_deg = 120.0;  // steer-sweep covers +-span/2

    SceneGeometry scene = SceneGeometry::default_two_room();
    LinkParameters link;
    double sweep_step_deg = 2.0;
    double sweep_range_deg = 120.0;

    std::string source_name;
    std::string source_text;

    ArrayLayout layout() const;
    /// FNV-1a 64 of the raw config text.
    std::uint64_t hash() const;
};

ScenarioConfig parse_config(const std::string& text, const std::string& source_name = "config");
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace mmwall
