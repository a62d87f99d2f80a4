#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mmwall/runner.hpp"

using namespace mmwall;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mmwall_test_" + name);
    fs::remove_all(dir);
    return dir;
}

CompareReport compare_text(const std::string& a, const std::string& b, double tol) {
    std::istringstream x(a), y(b);
    return compare_csv(x, y, tol);
}

}  // namespace

TEST_CASE("config parsing") {
    const std::string text =
        "# comment\n"
        "[scenario]\n"
        "kind = link-sim   # trailing\n"
        "seed = 17\n"
        "[modulation]\n"
        "carrier_hz = 28e9\n"
        "[array]\n"
        "elements = 16\n"
        "pitch_m = 5e-3\n"
        "[optimizer]\n"
        "generations = 5\n"
        "[link]\n"
        "users_m = 3, 0; 2, 1\n"
        "blockers_m = -1, -1, -1, 1\n";
    const auto cfg = parse_config(text, "t.cfg");
    CHECK(cfg.kind == ScenarioKind::link_sim);
    CHECK(cfg.ga.seed == 17);
    CHECK(cfg.ga.generations == 5);
    CHECK(cfg.carrier_hz == 28e9);
    CHECK(cfg.link.carrier_hz == 28e9);
    CHECK(cfg.layout().count == 16);
    CHECK(cfg.layout().pitch_m == 5e-3);
    CHECK(cfg.scene.users.size() == 2);
    CHECK(cfg.scene.blockers.size() == 1);
    CHECK(cfg.hash() == parse_config(text, "other").hash());
    CHECK(cfg.hash() != parse_config(text + "\n", "t.cfg").hash());
}

TEST_CASE("config errors carry line numbers") {
    auto line_of = [](const std::string& text) {
        try {
            parse_config(text, "c");
        } catch (const ConfigError& e) {
            return e.line;
        }
        return -1;
    };
    CHECK(line_of("[scenario]\nkind = single-beam\n[optimizer]\nfoo = 1\n") == 4);
    CHECK(line_of("[scenario]\nkind = nope\n") == 2);
    CHECK(line_of("[scenario]\nkind = pattern-table\n[array]\nelements = x\n") == 4);
    CHECK(line_of("[scenario]\nkind = pattern-table\n[bogus]\n") == 3);
    CHECK(line_of("[scenario]\nkind = pattern-table\njunk\n") == 3);
    CHECK(line_of("[scenario]\nkind = pattern-table\n[modulation]\nmodulation_hz = 1e9\n") == 3);
    CHECK(line_of("[scenario]\nkind = single-beam\n") == 0);  // missing [optimizer]
    CHECK(line_of("[scenario]\nkind = link-sim\n[optimizer]\n") == 0);  // missing [link]
    CHECK(line_of("[atom]\nl1_m = 1e-3\n") == 0);
    CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("pattern-table run writes headed, deterministic outputs") {
    const auto dir = scratch("table");
    auto cfg = parse_config("[scenario]\nkind = pattern-table\n[sheet]\nresolution_v = 0.5\n", "table.cfg");
    cfg.output_dir = dir / "a";
    const auto summary = run_scenario(cfg);
    cfg.output_dir = dir / "b";
    run_scenario(cfg, Execution::serial);

    const std::string header = manifest_header(cfg);
    CHECK(header.find(fmt::format("{:016x}", cfg.hash())) != std::string::npos);
    CHECK(header.find("seed=") != std::string::npos);
    for (const auto& f : summary.files) {
        const auto a = slurp(dir / "a" / f);
        CHECK(a == slurp(dir / "b" / f));
        CHECK(a.find(header.substr(2)) < 8);
    }
    const auto csv = slurp(dir / "a" / "results.csv");
    CHECK(csv.find("U_E,U_M,re_T,im_T,re_R,im_R") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("output directory override") {
    const auto dir = scratch("env");
    const auto cfg = parse_config("[scenario]\nkind = pattern-table\noutput_dir = /nonexistent/never\n[sheet]\nresolution_v = 2\n", "env.cfg");
    ::setenv("MMWALL_OUTPUT_DIR", dir.c_str(), 1);
    CHECK(resolve_output_dir(cfg) == dir);
    run_scenario(cfg);
    ::unsetenv("MMWALL_OUTPUT_DIR");
    CHECK(fs::exists(dir / "results.csv"));
    CHECK(resolve_output_dir(cfg) == fs::path("/nonexistent/never"));
    fs::remove_all(dir);
}

TEST_CASE("single-beam run and genome replay") {
    const auto dir = scratch("beam");
    const std::string text =
        "[scenario]\nkind = single-beam\nseed = 3\n[optimizer]\npopulation = 32\ngenerations = 40\n";
    auto cfg = parse_config(text, "beam.cfg");
    cfg.output_dir = dir / "run";
    const auto summary = run_scenario(cfg);
    const auto rows = slurp(dir / "run" / "results.csv");

    // The dominant row is harmonic -1 on the forward side.
    std::istringstream in(rows);
    std::string line, best;
    double best_eff = -1.0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'h') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        const double eff = std::stod(cells[3]);
        if (eff > best_eff) {
            best_eff = eff;
            best = cells[0] + "," + cells[1];
        }
    }
    CHECK(best == "-1,forward");

    auto replay = parse_config(text + "genome_file = " + (dir / "run" / "genome.json").string() + "\n", "beam.cfg");
    replay.output_dir = dir / "replay";
    const auto again = run_scenario(replay);
    CHECK(again.metrics.front().second == doctest::Approx(summary.metrics.front().second).epsilon(1e-12));
    CHECK(compare_runs(dir / "run" / "results.csv", dir / "replay" / "results.csv", 0.0).exit_code == 0);
    fs::remove_all(dir);
}

TEST_CASE("compare") {
    const std::string a = "# x\nname,eff\nfoo,0.800\nbar,0.100\n";
    CHECK(compare_text(a, a, 0.0).exit_code == 0);
    CHECK(compare_text(a, a, 0.0).messages.empty());
    CHECK(compare_text(a, "# other header\nname,eff\nfoo,0.801\nbar,0.100\n", 0.01).exit_code == 0);
    CHECK(compare_text(a, "name,eff\nfoo,0.900\nbar,0.100\n", 0.01).exit_code == 1);
    CHECK(compare_text(a, "name,eff\nbaz,0.800\nbar,0.100\n", 0.01).exit_code == 1);
    CHECK(compare_text(a, "name\nfoo\nbar\n", 0.01).exit_code == 2);
    CHECK(compare_text(a, "name,eff\nfoo,0.800\n", 0.01).exit_code == 2);
    CHECK(compare_text("h\nnan\n", "h\nnan\n", 0.0).exit_code == 0);
}

TEST_CASE("calibrate report") {
    const auto cfg = parse_config("[scenario]\nkind = pattern-table\n", "c");
    const auto r = calibrate(cfg);
    CHECK(r.f0_at_mid_hz == doctest::Approx(24e9).epsilon(1e-9));
    CHECK(r.f0_at_min_hz < r.f0_at_mid_hz);
    CHECK(r.f0_at_max_hz > r.f0_at_mid_hz);
}
