#include "mmwall/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace mmwall {

ConfigError::ConfigError(const std::string& source, int line_no, const std::string& message)
    : ConfigurationError(line_no > 0 ? fmt::format("{}:{}: {}", source, line_no, message)
                                     : fmt::format("{}: {}", source, message)),
      line(line_no) {}

namespace {

constexpr std::pair<ScenarioKind, const char*> kKindNames[] = {
    {ScenarioKind::pattern_table, "pattern-table"},
    {ScenarioKind::steer_sweep, "steer-sweep"},
    {ScenarioKind::single_beam, "single-beam"},
    {ScenarioKind::double_beam_lens, "double-beam-lens"},
    {ScenarioKind::double_beam_mirror, "double-beam-mirror"},
    {ScenarioKind::link_sim, "link-sim"},
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

struct Entry {
    std::string value;
    int line;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

struct Parsed {
    Sections sections;
    std::map<std::string, int> section_lines;
};

Parsed tokenize(const std::string& text, const std::string& source) {
    Parsed p;
    std::istringstream in(text);
    std::string raw;
    std::string current;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto cut = raw.find('#');
        std::string line = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
        if (line.empty() || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(source, line_no, "unterminated section header");
            current = trim(std::string_view(line).substr(1, line.size() - 2));
            if (current.empty()) throw ConfigError(source, line_no, "empty section name");
            if (p.section_lines.count(current))
                throw ConfigError(source, line_no, fmt::format("duplicate section [{}]", current));
            p.section_lines[current] = line_no;
            p.sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source, line_no, "expected 'key = value'");
        if (current.empty()) throw ConfigError(source, line_no, "key outside of any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) throw ConfigError(source, line_no, "empty key");
        auto& sec = p.sections[current];
        if (sec.count(key))
            throw ConfigError(source, line_no, fmt::format("duplicate key '{}'", key));
        sec[key] = {trim(std::string_view(line).substr(eq + 1)), line_no};
    }
    return p;
}

double to_double(const Entry& e, const std::string& source, const std::string& key) {
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw ConfigError(source, e.line, fmt::format("'{}' expects a number, got '{}'", key, e.value));
    return v;
}

long long to_int(const Entry& e, const std::string& source, const std::string& key) {
    long long v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ConfigError(source, e.line, fmt::format("'{}' expects an integer, got '{}'", key, e.value));
    return v;
}

bool to_bool(const Entry& e, const std::string& source, const std::string& key) {
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    throw ConfigError(source, e.line, fmt::format("'{}' expects true/false, got '{}'", key, e.value));
}

std::vector<std::vector<double>> to_tuples(const Entry& e, const std::string& source,
                                           const std::string& key, std::size_t arity) {
    std::vector<std::vector<double>> out;
    std::istringstream groups(e.value);
    std::string group;
    while (std::getline(groups, group, ';')) {
        group = trim(group);
        if (group.empty()) continue;
        std::vector<double> tuple;
        std::istringstream fields(group);
        std::string field;
        while (std::getline(fields, field, ',')) {
            Entry f{trim(field), e.line};
            tuple.push_back(to_double(f, source, key));
        }
        if (tuple.size() != arity)
            throw ConfigError(source, e.line,
                              fmt::format("'{}' expects groups of {} numbers separated by ';'", key, arity));
        out.push_back(std::move(tuple));
    }
    return out;
}

// Binds typed setters to keys of one section and rejects everything else.
class SectionReader {
public:
    SectionReader(const Parsed& parsed, std::string name, std::string source)
        : name_(std::move(name)), source_(std::move(source)) {
        if (auto it = parsed.sections.find(name_); it != parsed.sections.end()) entries_ = &it->second;
    }

    template <typename Fn>
    SectionReader& on(const std::string& key, Fn&& fn) {
        known_.insert(key);
        if (entries_) {
            if (auto it = entries_->find(key); it != entries_->end()) {
                try {
                    fn(it->second);
                } catch (const ConfigError&) {
                    throw;
                } catch (const Error& err) {
                    throw ConfigError(source_, it->second.line, err.what());
                }
            }
        }
        return *this;
    }

    SectionReader& number(const std::string& key, double& out) {
        return on(key, [&](const Entry& e) { out = to_double(e, source_, key); });
    }
    SectionReader& positive(const std::string& key, double& out) {
        return on(key, [&](const Entry& e) {
            out = to_double(e, source_, key);
            if (!(out > 0.0)) throw ConfigError(source_, e.line, fmt::format("'{}' must be positive", key));
        });
    }
    SectionReader& integer(const std::string& key, int& out) {
        return on(key, [&](const Entry& e) { out = static_cast<int>(to_int(e, source_, key)); });
    }

    void finish() const {
        if (!entries_) return;
        for (const auto& [key, e] : *entries_)
            if (!known_.count(key))
                throw ConfigError(source_, e.line, fmt::format("unknown key '{}' in [{}]", key, name_));
    }

private:
    std::string name_;
    std::string source_;
    const std::map<std::string, Entry>* entries_ = nullptr;
    std::set<std::string> known_;
};

Vec2 single_point(const Entry& e, const std::string& source, const std::string& key) {
    auto t = to_tuples(e, source, key, 2);
    if (t.size() != 1) throw ConfigError(source, e.line, fmt::format("'{}' expects one x,y point", key));
    return {t[0][0], t[0][1]};
}

}  // namespace

const char* to_string(ScenarioKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "?";
}

std::optional<ScenarioKind> parse_scenario_kind(const std::string& text) {
    for (const auto& [k, name] : kKindNames)
        if (text == name) return k;
    return std::nullopt;
}

ArrayLayout ScenarioConfig::layout() const {
    ArrayLayout l = ArrayLayout::half_wave(elements, carrier_hz);
    if (pitch_m) l.pitch_m = *pitch_m;
    return l;
}

std::uint64_t ScenarioConfig::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : source_text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
    const Parsed parsed = tokenize(text, source);
    const std::set<std::string> known_sections = {"scenario", "atom",       "varactor", "sheet",
                                                  "array",    "modulation", "optimizer", "beam",
                                                  "link"};
    for (const auto& [name, line] : parsed.section_lines)
        if (!known_sections.count(name))
            throw ConfigError(source, line, fmt::format("unknown section [{}]", name));
    if (!parsed.sections.count("scenario")) throw ConfigError(source, 0, "missing section [scenario]");

    ScenarioConfig cfg;
    cfg.source_name = source;
    cfg.source_text = text;
    bool has_kind = false;

    SectionReader(parsed, "scenario", source)
        .on("kind", [&](const Entry& e) {
            auto k = parse_scenario_kind(e.value);
            if (!k) throw ConfigError(source, e.line, fmt::format("unknown scenario kind '{}'", e.value));
            cfg.kind = *k;
            has_kind = true;
        })
        .on("seed", [&](const Entry& e) {
            const auto v = to_int(e, source, "seed");
            if (v < 0) throw ConfigError(source, e.line, "seed must be non-negative");
            cfg.ga.seed = static_cast<std::uint64_t>(v);
        })
        .on("output_dir", [&](const Entry& e) { cfg.output_dir = e.value; })
        .finish();
    if (!has_kind) throw ConfigError(source, parsed.section_lines.at("scenario"), "[scenario] needs 'kind'");

    auto& geom = cfg.atom.geometry;
    bool radius_given = false;
    SectionReader(parsed, "atom", source)
        .on("shape", [&](const Entry& e) {
            if (e.value == "circular") geom.shape = AtomShape::circular;
            else if (e.value == "rectangular") geom.shape = AtomShape::rectangular;
            else throw ConfigError(source, e.line, "shape must be circular or rectangular");
        })
        .positive("l1_m", geom.l1_m)
        .positive("l2_m", geom.l2_m)
        .on("radius_m", [&](const Entry& e) {
            geom.radius_m = to_double(e, source, "radius_m");
            radius_given = true;
        })
        .positive("width_m", geom.width_m)
        .positive("gap_m", geom.gap_m)
        .positive("thickness_m", geom.thickness_m)
        .number("r_loss_ohm", cfg.atom.r_loss_ohm)
        .on("calibrate", [&](const Entry& e) { cfg.calibrate = to_bool(e, source, "calibrate"); })
        .finish();
    if (geom.shape == AtomShape::circular && !radius_given) geom.radius_m = 0.5 * geom.l1_m;
    if (geom.shape == AtomShape::rectangular && !radius_given) geom.radius_m = 0.0;

    auto& var = cfg.atom.varactor;
    SectionReader(parsed, "varactor", source)
        .positive("c_j0_f", var.c_j0_f)
        .positive("junction_v", var.junction_v)
        .positive("grading", var.grading)
        .number("v_min_v", var.v_min)
        .number("v_max_v", var.v_max)
        .finish();

    SectionReader(parsed, "sheet", source)
        .positive("coupling", cfg.coupling)
        .positive("resolution_v", cfg.resolution_v)
        .positive("phase_tolerance_deg", cfg.phase_tolerance_deg)
        .finish();

    SectionReader(parsed, "array", source)
        .integer("elements", cfg.elements)
        .on("pitch_m", [&](const Entry& e) { cfg.pitch_m = to_double(e, source, "pitch_m"); })
        .positive("angle_step_deg", cfg.angle_step_deg)
        .finish();

    SectionReader(parsed, "modulation", source)
        .positive("carrier_hz", cfg.carrier_hz)
        .positive("modulation_hz", cfg.modulation_hz)
        .integer("harmonics", cfg.modulation.max_harmonic)
        .integer("samples_per_period", cfg.modulation.samples_per_period)
        .positive("guard_ratio", cfg.modulation.guard_ratio)
        .finish();

    auto& ga = cfg.ga;
    SectionReader(parsed, "optimizer", source)
        .integer("population", ga.population)
        .integer("generations", ga.generations)
        .number("crossover_rate", ga.crossover_rate)
        .number("mutation_rate", ga.mutation_rate)
        .number("mutation_scale", ga.mutation_scale)
        .integer("elites", ga.elites)
        .integer("tournament_size", ga.tournament_size)
        .number("blend_alpha", ga.blend_alpha)
        .integer("fourier_order", ga.fourier_order)
        .on("genome_file", [&](const Entry& e) { cfg.genome_file = e.value; })
        .finish();

    SectionReader(parsed, "beam", source)
        .number("steer_deg", cfg.steer_deg)
        .number("weight_minus", cfg.weight_minus)
        .number("weight_plus", cfg.weight_plus)
        .integer("sweep_points", cfg.sweep_points)
        .positive("sweep_span_deg", cfg.sweep_span_deg)
        .finish();

    auto& scene = cfg.scene;
    auto& link = cfg.link;
    SectionReader(parsed, "link", source)
        .on("ap_m", [&](const Entry& e) { scene.ap = single_point(e, source, "ap_m"); })
        .on("surface_center_m",
            [&](const Entry& e) { scene.surface_center = single_point(e, source, "surface_center_m"); })
        .on("surface_normal",
            [&](const Entry& e) { scene.surface_normal = single_point(e, source, "surface_normal"); })
        .on("users_m", [&](const Entry& e) {
            scene.users.clear();
            for (const auto& t : to_tuples(e, source, "users_m", 2)) scene.users.push_back({t[0], t[1]});
        })
        .on("blockers_m", [&](const Entry& e) {
            scene.blockers.clear();
            for (const auto& t : to_tuples(e, source, "blockers_m", 4))
                scene.blockers.push_back({{t[0], t[1]}, {t[2], t[3]}});
        })
        .number("wall_db", scene.wall_attenuation_db)
        .number("blockage_db", link.blockage_db)
        .number("tx_power_dbm", link.tx_power_dbm)
        .number("ap_gain_dbi", link.ap_gain_dbi)
        .number("user_gain_dbi", link.user_gain_dbi)
        .number("sensitivity_dbm", link.sensitivity_dbm)
        .positive("min_distance_m", link.min_distance_m)
        .positive("sweep_step_deg", cfg.sweep_step_deg)
        .positive("sweep_range_deg", cfg.sweep_range_deg)
        .finish();
    link.carrier_hz = cfg.carrier_hz;
    link.modulation_hz = cfg.modulation_hz;

    // Cross-field invariants, anchored at the owning section header.
    auto anchor = [&](const char* section) {
        auto it = parsed.section_lines.find(section);
        return it == parsed.section_lines.end() ? 0 : it->second;
    };
    auto check = [&](const char* section, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(source, anchor(section), e.what());
        }
    };
    check("atom", [&] { cfg.atom.geometry.validate(); });
    check("varactor", [&] { cfg.atom.varactor.validate(); });
    check("modulation", [&] { cfg.modulation.validate(cfg.carrier_hz, cfg.modulation_hz); });
    check("array", [&] {
        if (cfg.elements < 1) throw ConfigurationError("elements must be >= 1");
        cfg.layout().validate();
    });

    const bool needs_optimizer = cfg.kind == ScenarioKind::steer_sweep ||
                                 cfg.kind == ScenarioKind::single_beam ||
                                 cfg.kind == ScenarioKind::double_beam_lens ||
                                 cfg.kind == ScenarioKind::double_beam_mirror ||
                                 cfg.kind == ScenarioKind::link_sim;
    if (needs_optimizer) {
        if (!parsed.sections.count("optimizer"))
            throw ConfigError(source, 0,
                              fmt::format("kind {} requires an [optimizer] section", to_string(cfg.kind)));
        check("optimizer", [&] { cfg.ga.validate(); });
    }
    if (cfg.kind == ScenarioKind::link_sim) {
        if (!parsed.sections.count("link"))
            throw ConfigError(source, 0, "kind link-sim requires a [link] section");
        check("link", [&] { cfg.scene.validate(); });
    }
    if (cfg.kind == ScenarioKind::steer_sweep && cfg.sweep_points < 2)
        throw ConfigError(source, anchor("beam"), "sweep_points must be >= 2");
    if (cfg.sweep_span_deg > 180.0)
        throw ConfigError(source, anchor("beam"), "sweep_span_deg must not exceed 180");
    if (std::abs(cfg.steer_deg) > 90.0)
        throw ConfigError(source, anchor("beam"), "steer_deg must lie within [-90, 90]");
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

}  // namespace mmwall
