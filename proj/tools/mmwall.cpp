#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mmwall/runner.hpp"

namespace {

enum ExitCode { kOk = 0, kDiff = 1, kConfig = 2, kNumeric = 3 };

int run_command(const std::string& path, bool serial) {
    const auto cfg = mmwall::load_config(path);
    const auto summary = mmwall::run_scenario(
        cfg, serial ? mmwall::Execution::serial : mmwall::Execution::parallel);
    std::cout << mmwall::manifest_header(cfg) << '\n';
    std::cout << "output_dir = " << summary.output_dir.string() << '\n';
    for (const auto& [key, value] : summary.metrics) std::cout << fmt::format("{} = {:.6g}\n", key, value);
    return kOk;
}

int compare_command(const std::string& a, const std::string& b, double tol) {
    const auto rep = mmwall::compare_runs(a, b, tol);
    for (const auto& m : rep.messages) std::cout << m << '\n';
    if (rep.exit_code != 2)
        std::cout << fmt::format("rows = {}, cells = {}, max relative diff = {:.3g}\n", rep.rows,
                                 rep.cells_compared, rep.max_relative_diff);
    return rep.exit_code;
}

int calibrate_command(const std::string& path) {
    const auto cfg = mmwall::load_config(path);
    mmwall::print_calibration(std::cout, mmwall::calibrate(cfg));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mmwall: time-modulated Huygens metasurface simulator"};
    app.require_subcommand(1);

    std::string config_path;
    bool serial = false;
    auto* run = app.add_subcommand("run", "Run the scenario described by a config file");
    run->add_option("config", config_path, "Scenario config")->required();
    run->add_flag("--serial", serial, "Use the serial reference kernels");

    std::string lhs, rhs;
    double tol = 1e-6;
    auto* cmp = app.add_subcommand("compare", "Compare two result CSVs");
    cmp->add_option("a", lhs, "Reference CSV")->required();
    cmp->add_option("b", rhs, "Candidate CSV")->required();
    cmp->add_option("--tol", tol, "Relative tolerance per numeric cell")->capture_default_str();

    std::string cal_path;
    auto* cal = app.add_subcommand("calibrate", "Report the calibrated meta-atom");
    cal->add_option("config", cal_path, "Scenario config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*run) return run_command(config_path, serial);
        if (*cmp) return compare_command(lhs, rhs, tol);
        if (*cal) return calibrate_command(cal_path);
    } catch (const mmwall::ConfigurationError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const mmwall::Error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumeric;
    }
    return kOk;
}
