#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "isac/errors.hpp"
#include "isac/harness.hpp"

using namespace isac;

namespace {

ScenarioConfig short_run(Scheme s, int slots = 30, std::uint64_t seed = 1) {
    ScenarioConfig c = ScenarioConfig::table1(1);
    c.scheme = s;
    c.n_slots = slots;
    c.seed = seed;
    return c;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char ch : s) n += ch == '\n';
    return n;
}

double planned_mean(const RunReport& r) {
    double s = 0;
    int n = 0;
    for (const auto& slot : r.slots)
        for (const auto& v : slot.vehicles) {
            s += v.planned_rate;
            ++n;
        }
    return s / n;
}

}  // namespace

TEST_CASE("table1 preset") {
    const ScenarioConfig c = ScenarioConfig::table1();
    CHECK(c.vehicles.size() == 5);
    CHECK(c.n_slots == 200);
    CHECK(c.arrays.m_tx == 8);
    CHECK(c.arrays.l_x == 80);
    CHECK(c.arrays.l_y == 80);
    CHECK(c.p_max == 0.1);
    CHECK(c.beta0 == doctest::Approx(1e-3));
    CHECK(c.noise.noise_s == doctest::Approx(1e-10));
    CHECK(c.noise.slot_time == 0.02);
    CHECK(c.noise.symbol_time == doctest::Approx(1e-7));
    CHECK(c.rsu.z() == 20.0);
    CHECK(c.vehicles[1].position.x() - c.vehicles[0].position.x() == doctest::Approx(10.0));
    CHECK(ScenarioConfig::table1(1).vehicles[0].position.x() == 40.0);
    CHECK(c.beams() == 8);
    CHECK(c.beams() * c.tau_b() / c.noise.slot_time == doctest::Approx(0.2));
}

TEST_CASE("config parsing: preset, dB fields and errors") {
    const ScenarioConfig c = parse_config(R"({
        "preset": "table1", "k_vehicles": 3, "beta0_db": -20,
        "noise": {"noise_c_dbm": -60, "sigma_r2": 0.2},
        "arrays": {"l_x": 40, "l_y": 1}, "scheme": "beam_training",
        "quantization_bits": 2, "seed": 9})");
    CHECK(c.vehicles.size() == 3);
    CHECK(c.beta0 == doctest::Approx(1e-2));
    CHECK(c.noise.noise_c == doctest::Approx(1e-9));
    CHECK(c.noise.noise_s == doctest::Approx(1e-10));
    CHECK(c.arrays.l_y == 1);
    CHECK(c.scheme == Scheme::beam_training);
    CHECK(*c.quantization_bits == 2);
    CHECK(c.seed == 9);

    const ScenarioConfig v = parse_config(
        R"({"vehicles": [{"position": [10, 20, 0], "speed": 15}], "p_max_dbm": 20})");
    CHECK(v.vehicles.size() == 1);
    CHECK(v.vehicles[0].speed == 15);
    CHECK(v.p_max == doctest::Approx(0.1));

    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"beta0": 1e-3, "beta0_db": -30})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"preset": "other"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"n_slots": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"scheme": "magic"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"beam_training": {"beams": 8, "tau_b": 0.01}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"arrays": {"m_tx": 0}})"), ConfigError);
}

TEST_CASE("trajectory rows: identity, gate and counts") {
    for (Scheme s : {Scheme::proposed, Scheme::prediction, Scheme::refraction_random,
                     Scheme::beam_training, Scheme::perfect}) {
        const RunReport r = run_trajectory(short_run(s));
        REQUIRE(r.slots.size() == 30);
        for (const SlotResult& slot : r.slots)
            for (const VehicleSlot& v : slot.vehicles) {
                CHECK(v.r_avg == doctest::Approx(v.eta * v.r_sc + (1 - v.eta) * v.r_c));
                if (!v.gate && s == Scheme::proposed) CHECK(v.eta == 0.0);
            }
        CHECK(count_lines(to_csv({r})) == 1 + 30);
    }
}

TEST_CASE("perfect scheme has the highest per-slot rate") {
    const RunReport perfect = run_trajectory(short_run(Scheme::perfect, 60));
    for (Scheme s : {Scheme::proposed, Scheme::prediction, Scheme::refraction_random,
                     Scheme::beam_training}) {
        const RunReport r = run_trajectory(short_run(s, 60));
        for (std::size_t n = 0; n < r.slots.size(); ++n)
            CHECK(r.slots[n].vehicles[0].r_avg <= perfect.slots[n].vehicles[0].r_avg + 1e-12);
    }
}

TEST_CASE("noiseless motion: prediction equals perfect") {
    ScenarioConfig c = short_run(Scheme::prediction, 50);
    c.noise.q_omega.setZero();
    c.noise.var_z_dist = c.noise.var_z_speed = 0;
    const RunReport pred = run_trajectory(c);
    c.scheme = Scheme::perfect;
    const RunReport perf = run_trajectory(c);
    for (std::size_t n = 0; n < pred.slots.size(); ++n)
        CHECK(pred.slots[n].vehicles[0].r_avg ==
              doctest::Approx(perf.slots[n].vehicles[0].r_avg).epsilon(1e-12));
}

TEST_CASE("single-element IOS: random reflection coincides with the proposed scheme") {
    ScenarioConfig c = short_run(Scheme::proposed, 20);
    c.arrays.l_x = c.arrays.l_y = 1;
    const RunReport a = run_trajectory(c);
    c.scheme = Scheme::refraction_random;
    const RunReport b = run_trajectory(c);
    for (std::size_t n = 0; n < a.slots.size(); ++n) {
        CHECK(a.slots[n].vehicles[0].eta == b.slots[n].vehicles[0].eta);
        CHECK(a.slots[n].vehicles[0].r_avg == doctest::Approx(b.slots[n].vehicles[0].r_avg));
        CHECK(a.slots[n].vehicles[0].echo_snr == doctest::Approx(b.slots[n].vehicles[0].echo_snr));
    }
}

TEST_CASE("random reflection fluctuates more than the proposed scheme") {
    auto spread = [](const RunReport& r) {
        double m = 0, s = 0;
        for (const auto& x : r.slots) m += x.vehicles[0].echo_snr;
        m /= r.slots.size();
        for (const auto& x : r.slots) s += std::pow(x.vehicles[0].echo_snr - m, 2);
        return std::sqrt(s / r.slots.size()) / m;
    };
    const RunReport p = run_trajectory(short_run(Scheme::proposed, 100));
    const RunReport r = run_trajectory(short_run(Scheme::refraction_random, 100));
    CHECK(r.mean_rate() <= p.mean_rate());
    // Echo power relative spread: exponential-like under random phases.
    CHECK(spread(r) > 0.5);
}

TEST_CASE("beam training pays the overhead on every slot") {
    const RunReport bt = run_trajectory(short_run(Scheme::beam_training, 40));
    const RunReport perfect = run_trajectory(short_run(Scheme::perfect, 40));
    for (std::size_t n = 0; n < bt.slots.size(); ++n) {
        const VehicleSlot& v = bt.slots[n].vehicles[0];
        CHECK(v.eta == 0.0);
        CHECK(v.beta_r == 0.0);
        CHECK(v.r_c <= 0.8 * perfect.slots[n].vehicles[0].r_c + 1e-12);
        // Nearest of 8 beams: gain loss at most F_8(1/8) / 8 in linear terms.
        const double loss_cap = std::log2(1.0 / (fejer_kernel(8, 0.125) / 8.0));
        CHECK(v.r_c / 0.8 >= perfect.slots[n].vehicles[0].r_c - loss_cap - 1e-9);
    }
}

TEST_CASE("determinism and serialization") {
    const ScenarioConfig c = short_run(Scheme::proposed, 15, 77);
    const RunReport a = run_trajectory(c), b = run_trajectory(c);
    CHECK(to_csv({a}) == to_csv({b}));
    const std::string js = to_json(std::vector<RunReport>{a});
    CHECK(js == to_json(std::vector<RunReport>{b}));
    CHECK(nlohmann::json::parse(js).dump(1) + "\n" == js);
    CHECK(to_csv(std::vector<RunReport>{}) ==
          "slot,vehicle,scheme,eta,beta_r,p_sc,p_c,r_sc,r_c,r_avg,echo_snr_db,var_phi_track,"
          "var_phiy_track\n");
    RunReport empty;
    CHECK(count_lines(to_csv({empty})) == 1);
    const RunReport other = run_trajectory(short_run(Scheme::proposed, 15, 78));
    CHECK(to_csv({a}) != to_csv({other}));
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("aggregates are means of the slot values") {
    const RunReport r = run_trajectory(short_run(Scheme::proposed, 25));
    double s = 0;
    for (const auto& x : r.slots) s += x.vehicles[0].r_avg;
    CHECK(r.mean_rate() == doctest::Approx(s / 25));
    CHECK(r.mean_min_rate() == doctest::Approx(r.mean_rate()));
}

TEST_CASE("multi-vehicle run") {
    ScenarioConfig c = ScenarioConfig::table1(3);
    c.n_slots = 6;
    const RunReport r = run_trajectory(c);
    REQUIRE(r.slots.size() == 6);
    CHECK(count_lines(to_csv({r})) == 1 + 6 * 3);
    for (const auto& slot : r.slots) {
        double psc = 0, pc = 0;
        for (const auto& v : slot.vehicles) {
            psc += v.p_sc;
            pc += v.p_c;
            CHECK(v.r_avg == doctest::Approx(v.eta * v.r_sc + (1 - v.eta) * v.r_c));
        }
        CHECK(psc == doctest::Approx(c.p_max));
        CHECK(pc == doctest::Approx(c.p_max));
    }
    double m = 0;
    for (const auto& slot : r.slots) {
        double lo = 1e300;
        for (const auto& v : slot.vehicles) lo = std::min(lo, v.r_avg);
        m += lo;
    }
    CHECK(r.mean_min_rate() == doctest::Approx(m / 6));
}

TEST_CASE("sweeps") {
    const ScenarioConfig c = short_run(Scheme::proposed, 20);
    const auto one = sweep(c, SweepAxis::p_max, {c.p_max});
    const RunReport direct = run_trajectory(c);
    REQUIRE(one.size() == 1);
    CHECK(one[0].sweep_axis == "p_max");
    for (std::size_t n = 0; n < direct.slots.size(); ++n)
        CHECK(one[0].slots[n].vehicles[0].r_avg == direct.slots[n].vehicles[0].r_avg);

    CHECK(apply_sweep(c, SweepAxis::speed, 40).noise.slot_time == doctest::Approx(0.01));
    CHECK(apply_sweep(c, SweepAxis::k_vehicles, 4).vehicles.size() == 4);
    CHECK(apply_sweep(c, SweepAxis::m_tx, 32).arrays.m_rx == 32);
    CHECK_THROWS_AS(apply_sweep(c, SweepAxis::m_tx, 2.5), ConfigError);
    CHECK_THROWS_AS(sweep(c, SweepAxis::p_max, {}), ConfigError);
    CHECK_THROWS_AS(parse_axis("colour"), ConfigError);

    // Shorter slots at higher speed lower the planned (closed-form) rate.
    const auto sp = sweep(short_run(Scheme::proposed, 60), SweepAxis::speed, {10, 20, 40});
    CHECK(planned_mean(sp[0]) > planned_mean(sp[1]));
    CHECK(planned_mean(sp[1]) > planned_mean(sp[2]));
}

TEST_CASE("gate report") {
    const auto g = gate_check(ScenarioConfig::table1(2));
    REQUIRE(g.size() == 2);
    for (const GateReport& r : g) {
        CHECK(r.pass == (r.lhs > 2));
        CHECK((r.eta > 0) == r.pass);
    }
}

TEST_CASE("quantized IOS phases cost rate") {
    ScenarioConfig c = short_run(Scheme::perfect, 5);
    c.arrays.l_x = c.arrays.l_y = 20;
    const RunReport cont = run_trajectory(c);
    c.quantization_bits = 1;
    const RunReport q = run_trajectory(c);
    CHECK(q.mean_rate() < cont.mean_rate());
}

#ifdef ISAC_CLI_PATH
TEST_CASE("CLI exit codes") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "isac_cli_test";
    fs::create_directories(dir);
    const std::string cli = ISAC_CLI_PATH;
    const std::string bad = (dir / "bad.json").string();
    write_file(bad, R"({"n_slots": -1})");
    auto run = [](const std::string& cmd) {
        const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    CHECK(run(cli + " single --config " + bad) == 2);
    CHECK(run(cli + " single --config " + (dir / "missing.json").string()) == 2);
    CHECK(run(cli + " gate") == 0);
    const std::string cfg = (dir / "ok.json").string();
    write_file(cfg, R"({"n_slots": 5})");
    CHECK(run(cli + " single --config " + cfg + " --out " + (dir / "o.csv").string()) == 0);
    CHECK(fs::exists(dir / "o.csv"));
    CHECK(run(cli + " single --config " + cfg + " --out /nonexistent/dir/o.csv") == 3);
}
#endif
