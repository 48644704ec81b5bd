// isac: trajectory runs, sweeps, Monte Carlo validation and sensing-gate checks.
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isac/errors.hpp"
#include "isac/harness.hpp"

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
    std::string scheme;
    std::optional<int> quantize_bits;
    bool verbose = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON config (default: table1 preset)");
    app->add_option("--seed", c.seed, "RNG seed");
    app->add_option("--out", c.out, "output file (default: stdout)");
    app->add_option("--format", c.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--scheme", c.scheme,
                    "proposed|prediction|refraction_random|beam_training|perfect");
    app->add_option("--quantize-bits", c.quantize_bits, "IOS phase resolution in bits");
    app->add_flag("--verbose,-v", c.verbose, "progress on stderr");
}

isac::ScenarioConfig load(const Common& c, int default_k) {
    isac::ScenarioConfig cfg =
        c.config.empty() ? isac::ScenarioConfig::table1(default_k) : isac::load_config(c.config);
    if (c.seed) {
        cfg.seed = *c.seed;
        cfg.mc.seed = *c.seed;
    }
    if (!c.scheme.empty()) cfg.scheme = isac::parse_scheme(c.scheme);
    if (c.quantize_bits) cfg.quantization_bits = *c.quantize_bits;
    cfg.validate();
    return cfg;
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty())
        std::cout << text;
    else
        isac::write_file(c.out, text);
}

void log_run(const Common& c, const isac::RunReport& r) {
    if (!c.verbose) return;
    std::cerr << to_string(r.scheme) << ": " << r.slots.size() << " slots, mean rate "
              << r.mean_rate() << ", mean min-rate " << r.mean_min_rate();
    if (r.truncated) std::cerr << " (truncated: " << r.truncation_reason << ")";
    std::cerr << '\n';
    if (r.slots.empty()) return;
    int gated = 0;
    for (const auto& s : r.slots)
        if (!s.vehicles.front().gate) ++gated;
    std::cerr << "slots with the sensing condition failing (eta = 0): " << gated << '\n';
}

std::string render(const Common& c, const std::vector<isac::RunReport>& reports) {
    return isac::parse_format(c.format) == isac::Format::csv ? isac::to_csv(reports)
                                                            : isac::to_json(reports);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IOS-assisted ISAC link-level simulator"};
    app.require_subcommand(1);

    Common c;
    auto* validate = app.add_subcommand("validate", "Monte Carlo checks of the closed forms");
    add_common(validate, c);
    std::uint64_t samples = 0;
    validate->add_option("--samples", samples, "Monte Carlo samples per point");

    auto* single = app.add_subcommand("single", "single-vehicle trajectory");
    add_common(single, c);

    auto* multi = app.add_subcommand("multi", "multi-vehicle trajectory");
    add_common(multi, c);

    auto* sweep = app.add_subcommand("sweep", "one trajectory per value of an axis");
    add_common(sweep, c);
    std::string axis;
    std::vector<double> values;
    sweep->add_option("--axis", axis, "p_max|m_tx|l_elements|speed|k_vehicles")->required();
    sweep->add_option("--values", values, "axis values")->required();

    auto* gate = app.add_subcommand("gate", "sensing-condition check at the first slot");
    add_common(gate, c);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) {
            isac::ScenarioConfig cfg = load(c, 1);
            if (samples) cfg.mc.n_samples = samples;
            const auto reports = isac::validation_suite(cfg);
            emit(c, isac::parse_format(c.format) == isac::Format::csv ? isac::to_csv(reports)
                                                                     : isac::to_json(reports));
            if (c.verbose)
                for (const auto& r : reports)
                    std::cerr << r.label << ": rel_error " << r.rel_error
                              << (r.pass ? " ok\n" : " FAIL\n");
        } else if (*single) {
            isac::ScenarioConfig cfg = load(c, 1);
            cfg.vehicles.resize(1);
            const isac::RunReport r = isac::run_trajectory(cfg);
            log_run(c, r);
            emit(c, render(c, {r}));
        } else if (*multi) {
            const isac::ScenarioConfig cfg = load(c, 5);
            const isac::RunReport r = isac::run_trajectory(cfg);
            log_run(c, r);
            emit(c, render(c, {r}));
        } else if (*sweep) {
            const isac::ScenarioConfig cfg = load(c, 1);
            const auto reports = isac::sweep(cfg, isac::parse_axis(axis), values);
            for (const auto& r : reports) log_run(c, r);
            emit(c, render(c, reports));
        } else if (*gate) {
            const isac::ScenarioConfig cfg = load(c, 1);
            std::string text = "vehicle,lhs,pass,eta,beta_r\n";
            for (const auto& g : isac::gate_check(cfg))
                text += std::to_string(g.vehicle) + ',' + isac::format_double(g.lhs) + ',' +
                        (g.pass ? "1," : "0,") + isac::format_double(g.eta) + ',' +
                        isac::format_double(g.beta_r) + '\n';
            emit(c, text);
        }
    } catch (const isac::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
