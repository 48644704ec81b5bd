#include "isac/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <thread>

#include "isac/errors.hpp"

namespace isac {

namespace {

constexpr double kMinVar = 1e-12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// RNG purposes; truth and measurement streams do not depend on the scheme.
enum Purpose : std::uint64_t { kTruth = 1, kMeasure = 2, kRandomPhase = 3 };

struct Vehicle {
    KinematicState truth;
    KinematicState tracked;
    Eigen::Matrix4d mse = Eigen::Matrix4d::Zero();
    double beta_h = 0;
    double psi_ux = 0;
    double psi_uz = 0;
};

struct SlotContext {
    KinematicState predicted;
    Eigen::Matrix4d mse_pred;
    AngleStats stats;
    LinkBudget budget;
    SensingCoeffs a;  // full-power coefficients for the scheme's reflect gain model
};

// Per-slot realized beam/profile directions.
struct Design {
    double tx = 0;     // RSU beam angle (cos-space argument)
    double ios_x = 0;  // IOS profile design angles
    double ios_y = 0;
};

class Simulator {
public:
    explicit Simulator(const ScenarioConfig& c) : c_(c) {
        for (const VehicleSpec& vs : c_.vehicles) {
            const LinkGeometry g = make_link(c_.rsu, vs.position, vs.device_offset);
            Vehicle v;
            v.truth = {g.phi_x, g.phi_y, g.dist, vs.speed};
            v.tracked = v.truth;
            v.beta_h = c_.beta0 / vs.device_offset.squaredNorm();
            v.psi_ux = g.psi_ux;
            v.psi_uz = g.psi_uz;
            veh_.push_back(v);
        }
    }

    RunReport run() {
        RunReport rep;
        rep.scheme = c_.scheme;
        rep.seed = c_.seed;
        for (int n = 0; n < c_.n_slots; ++n) {
            try {
                for (std::size_t k = 0; k < veh_.size(); ++k) {
                    StreamRng rng = StreamRng::keyed(c_.seed, k, n, kTruth);
                    veh_[k].truth = evolve_truth(veh_[k].truth, c_.noise, rng);
                }
                rep.slots.push_back(veh_.size() == 1 ? single_slot(n) : multi_slot(n));
            } catch (const TrajectoryError& e) {
                rep.truncated = true;
                rep.truncation_reason = "slot " + std::to_string(n) + ": " + e.what();
                break;
            } catch (const DomainError& e) {
                rep.truncated = true;
                rep.truncation_reason = "slot " + std::to_string(n) + ": " + e.what();
                break;
            }
        }
        return rep;
    }

private:
    SlotContext context(const Vehicle& v, double p) const {
        SlotContext s;
        std::tie(s.predicted, s.mse_pred) = predict(v.tracked, v.mse, c_.noise);
        s.stats = {s.predicted.phi_x, s.predicted.phi_y, std::max(s.mse_pred(0, 0), kMinVar),
                   std::max(s.mse_pred(1, 1), kMinVar)};
        s.budget = {p, pathloss(c_.beta0, s.predicted.dist), v.beta_h, c_.arrays, c_.noise};
        s.a = sensing_coeffs(s.budget, s.stats);
        if (c_.scheme == Scheme::refraction_random) {
            // Random reflect phases: the expected IOS gain is beta^R L, so h drops out on
            // every axis that has an array gain to lose.
            const double hh =
                (c_.arrays.l_x > 1 ? h_series(s.stats.phi_x, s.stats.var_phi) : 1.0) *
                (c_.arrays.l_y > 1 ? h_series(s.stats.phi_y, s.stats.var_phiy) : 1.0);
            s.a.a_phi *= hh;
            s.a.a_phiy *= hh;
        }
        return s;
    }

    // Refraction gain of the IOS into the device when its profile was designed for `d`.
    double refract_ios(const Vehicle& v, const Design& d, double splitting) const {
        if (!(splitting > 0)) return 0.0;
        if (!c_.quantization_bits) {
            return refract_gain_fejer(splitting, c_.arrays.l_x, c_.arrays.l_y,
                                      std::cos(d.ios_x) - std::cos(v.truth.phi_x),
                                      std::cos(d.ios_y) - std::cos(v.truth.phi_y));
        }
        PhaseProfile p = optimal_phase_profiles(d.ios_x, d.ios_y, v.psi_ux, v.psi_uz, 0.0,
                                                c_.arrays, 1.0 - splitting)
                             .second;
        p = quantize_phases(p, *c_.quantization_bits);
        return refract_gain(p, v.truth.phi_x, v.truth.phi_y, v.psi_ux, v.psi_uz);
    }

    double reflect_ios(const Vehicle& v, const Design& d, double beta_r, int k, int n) const {
        if (!(beta_r > 0)) return 0.0;
        if (c_.scheme == Scheme::refraction_random) {
            StreamRng rng = StreamRng::keyed(c_.seed, k, n, kRandomPhase);
            std::complex<double> acc = 0;
            for (int i = 0; i < c_.arrays.elements(); ++i)
                acc += std::polar(1.0, 2.0 * kPi * rng.uniform());
            return beta_r * std::norm(acc);
        }
        if (!c_.quantization_bits) {
            return reflect_gain_fejer(beta_r, c_.arrays.l_x, c_.arrays.l_y,
                                      std::cos(d.ios_x) - std::cos(v.truth.phi_x),
                                      std::cos(d.ios_y) - std::cos(v.truth.phi_y));
        }
        PhaseProfile p = optimal_phase_profiles(d.ios_x, d.ios_y, v.psi_ux, v.psi_uz, 0.0,
                                                c_.arrays, beta_r)
                             .first;
        p = quantize_phases(p, *c_.quantization_bits);
        return reflect_gain(p, v.truth.phi_x, v.truth.phi_y);
    }

    double beam_gain(double beam, double truth) const {
        return fejer_kernel(c_.arrays.m_tx, std::cos(beam) - std::cos(truth));
    }

    // Communication channel power gain (without the transmit beam) of vehicle v.
    double channel(const Vehicle& v, const Design& d, double splitting) const {
        return pathloss(c_.beta0, v.truth.dist) * v.beta_h * refract_ios(v, d, splitting);
    }

    double echo(const Vehicle& v, const Design& d, double p, double eta, double beta_r, int k,
                int n) const {
        if (!(eta > 0) || !(beta_r > 0)) return 0.0;
        const double bg = pathloss(c_.beta0, v.truth.dist);
        const double dc = std::cos(d.tx) - std::cos(v.truth.phi_x);
        return eta * c_.noise.slot_time * bg * bg * p * fejer_kernel(c_.arrays.m_tx, dc) *
               fejer_kernel(c_.arrays.m_rx, dc) * reflect_ios(v, d, beta_r, k, n) /
               (c_.noise.symbol_time * c_.noise.noise_s);
    }

    // Nearest of B beams spaced uniformly in cos space, chosen by received power.
    double training_beam(double truth) const {
        const int b = c_.beams();
        double best = 0, best_gain = -1;
        for (int i = 0; i < b; ++i) {
            const double c = -1.0 + (2.0 * i + 1.0) / b;
            const double g = fejer_kernel(c_.arrays.m_tx, c - std::cos(truth));
            if (g > best_gain) {
                best_gain = g;
                best = std::acos(c);
            }
        }
        return best;
    }

    double overhead_factor() const { return 1.0 - c_.beams() * c_.tau_b() / c_.noise.slot_time; }

    bool senses() const {
        return c_.scheme == Scheme::proposed || c_.scheme == Scheme::refraction_random;
    }

    // Measurement and Kalman update; returns the new tracked state and posterior.
    void track(Vehicle& v, const SlotContext& s, const SensingCoeffs& a, double eta,
               double beta_r, double share, int k, int n) {
        if (c_.scheme == Scheme::perfect || c_.scheme == Scheme::beam_training) {
            v.tracked = v.truth;
            v.mse.setZero();
            return;
        }
        const auto [vp, vpy] = measurement_variance(a.a_phi, a.a_phiy, eta, beta_r, share);
        if (!std::isfinite(vp) || !std::isfinite(vpy)) {
            v.tracked = s.predicted;
            v.mse = s.mse_pred;
            return;
        }
        const Eigen::Vector4d var{vp, vpy, c_.noise.var_z_dist, c_.noise.var_z_speed};
        StreamRng rng = StreamRng::keyed(c_.seed, k, n, kMeasure);
        const KinematicState y = draw_measurement(v.truth, var, rng);
        const TrackState t = track_update(s.predicted, s.mse_pred, y, var);
        v.tracked = t.tracked;
        v.mse = t.mse;
    }

    Design sc_design(const Vehicle& v, const SlotContext& s) const {
        switch (c_.scheme) {
            case Scheme::perfect: return {v.truth.phi_x, v.truth.phi_x, v.truth.phi_y};
            case Scheme::beam_training:
                return {training_beam(v.truth.phi_x), v.truth.phi_x, v.truth.phi_y};
            default: return {s.predicted.phi_x, s.predicted.phi_x, s.predicted.phi_y};
        }
    }

    Design c_design(const Vehicle& v, const Design& sc) const {
        if (c_.scheme == Scheme::beam_training) return sc;
        return {v.tracked.phi_x, v.tracked.phi_x, v.tracked.phi_y};
    }

    SlotResult single_slot(int n) {
        Vehicle& v = veh_[0];
        const SlotContext s = context(v, c_.p_max);
        VehicleSlot out;
        out.truth = v.truth;
        out.predicted = s.predicted;
        out.gate = sensing_condition(s.stats.var_phi, s.a.a_phi, s.stats.var_phiy, s.a.a_phiy);
        if (senses()) {
            const SingleResult r = optimize_single(s.budget, s.stats, s.a, c_.solver);
            out.eta = r.eta;
            out.beta_r = r.beta_r;
            out.planned_rate = r.rate;
        } else if (c_.scheme == Scheme::prediction) {
            out.planned_rate = rate_single(s.budget, 0.0, 0.0, s.stats, s.a).r_avg;
        } else {
            out.planned_rate = kNaN;
        }
        out.p_sc = out.p_c = c_.p_max;

        const Design dsc = sc_design(v, s);
        const double nc = c_.noise.noise_c;
        out.echo_snr = echo(v, dsc, c_.p_max, out.eta, out.beta_r, 0, n);
        out.r_sc = std::log2(1.0 + c_.p_max * beam_gain(dsc.tx, v.truth.phi_x) *
                                       channel(v, dsc, 1.0 - out.beta_r) / nc);
        track(v, s, s.a, out.eta, out.beta_r, 1.0, 0, n);
        const Design dc = c_design(v, dsc);
        out.r_c = std::log2(1.0 + c_.p_max * beam_gain(dc.tx, v.truth.phi_x) *
                                      channel(v, dc, 1.0) / nc);
        if (c_.scheme == Scheme::beam_training) {
            out.r_c *= overhead_factor();
            out.r_sc = 0.0;
        }
        out.r_avg = out.eta * out.r_sc + (1.0 - out.eta) * out.r_c;
        out.tracked = v.tracked;
        out.var_phi_track = v.mse(0, 0);
        out.var_phiy_track = v.mse(1, 1);
        return {n, c_.scheme, {out}};
    }

    SlotAllocation grid_eta_beta(const MultiBudget& mb, SlotAllocation al) const {
        const int kv = mb.size();
        auto value = [&](const SlotAllocation& s) { return min_avg_rate(rate_multi(mb, s)); };
        double cur = value(al);
        const int steps = static_cast<int>(std::llround(1.0 / c_.solver.grid_step));
        for (int it = 0; it < c_.solver.ao_max_iter; ++it) {
            const double start = cur;
            SlotAllocation t = al;
            for (int i = 0; i <= steps; ++i) {
                t.eta = std::min(1.0, i * c_.solver.grid_step);
                const double v = value(t);
                if (v > cur) {
                    cur = v;
                    al.eta = t.eta;
                }
            }
            t = al;
            for (int i = 0; i <= steps; ++i) {
                t.beta_r.assign(kv, std::min(1.0, i * c_.solver.grid_step));
                const double v = value(t);
                if (v > cur) {
                    cur = v;
                    al.beta_r = t.beta_r;
                }
            }
            if (cur - start < c_.solver.rate_tol) break;
        }
        return al;
    }

    SlotResult multi_slot(int n) {
        const int kv = static_cast<int>(veh_.size());
        std::vector<SlotContext> ctx;
        MultiBudget mb;
        mb.p_max = c_.p_max;
        mb.arrays = c_.arrays;
        mb.noise = c_.noise;
        mb.model = c_.model;
        for (const Vehicle& v : veh_) {
            ctx.push_back(context(v, 1.0));  // p = 1 W gives per-watt coefficients
            const SlotContext& s = ctx.back();
            mb.vehicles.push_back({s.budget.beta_g, v.beta_h, s.stats, s.a});
        }

        SlotAllocation al;
        al.eta = 0;
        al.beta_r.assign(kv, 0.0);
        al.p_sc.assign(kv, c_.p_max / kv);
        al.p_c = al.p_sc;
        double planned = kNaN;
        if (c_.scheme == Scheme::proposed) {
            AoOptions opt;
            if (prev_) opt.warm_start = &*prev_;
            const AoResult r = optimize_multi_ao(mb, c_.solver, opt);
            al = r.alloc;
            planned = r.trace.back();
            prev_ = al;
        } else if (c_.scheme == Scheme::refraction_random) {
            al.eta = 0.2;
            al.beta_r.assign(kv, 0.5);
            al = grid_eta_beta(mb, al);
            planned = min_avg_rate(rate_multi(mb, al));
        } else if (c_.scheme == Scheme::prediction) {
            planned = min_avg_rate(rate_multi(mb, al));
        }

        SlotResult res{n, c_.scheme, {}};
        std::vector<Design> dsc(kv), dc(kv);
        std::vector<double> g_sc(kv), g_c(kv);
        for (int k = 0; k < kv; ++k) {
            Vehicle& v = veh_[k];
            VehicleSlot out;
            out.truth = v.truth;
            out.predicted = ctx[k].predicted;
            out.eta = al.eta;
            out.beta_r = al.beta_r[k];
            out.p_sc = al.p_sc[k];
            out.p_c = al.p_c[k];
            out.planned_rate = planned;
            out.gate = sensing_condition(ctx[k].stats.var_phi, ctx[k].a.a_phi / out.p_sc,
                                         ctx[k].stats.var_phiy, ctx[k].a.a_phiy / out.p_sc);
            dsc[k] = sc_design(v, ctx[k]);
            out.echo_snr = echo(v, dsc[k], out.p_sc, out.eta, out.beta_r, k, n);
            g_sc[k] = channel(v, dsc[k], 1.0 - out.beta_r);
            track(v, ctx[k], ctx[k].a, al.eta, out.beta_r, out.p_sc, k, n);
            dc[k] = c_design(v, dsc[k]);
            g_c[k] = channel(v, dc[k], 1.0);
            out.tracked = v.tracked;
            out.var_phi_track = v.mse(0, 0);
            out.var_phiy_track = v.mse(1, 1);
            res.vehicles.push_back(out);
        }
        const double nc = c_.noise.noise_c;
        auto sinr = [&](int k, const std::vector<Design>& d, const std::vector<double>& g,
                        const std::vector<double>& p) {
            const double t = veh_[k].truth.phi_x;
            double interf = 0;
            for (int j = 0; j < kv; ++j)
                if (j != k) interf += p[j] * beam_gain(d[j].tx, t);
            return p[k] * beam_gain(d[k].tx, t) * g[k] / (interf * g[k] + nc);
        };
        for (int k = 0; k < kv; ++k) {
            VehicleSlot& out = res.vehicles[k];
            out.r_sc = std::log2(1.0 + sinr(k, dsc, g_sc, al.p_sc));
            out.r_c = std::log2(1.0 + sinr(k, dc, g_c, al.p_c));
            if (c_.scheme == Scheme::beam_training) {
                out.r_c *= overhead_factor();
                out.r_sc = 0.0;
            }
            out.r_avg = out.eta * out.r_sc + (1.0 - out.eta) * out.r_c;
        }
        return res;
    }

    const ScenarioConfig& c_;
    std::vector<Vehicle> veh_;
    std::optional<SlotAllocation> prev_;
};

}  // namespace

double RunReport::mean_rate() const {
    double sum = 0;
    std::size_t count = 0;
    for (const SlotResult& s : slots)
        for (const VehicleSlot& v : s.vehicles) {
            sum += v.r_avg;
            ++count;
        }
    return count ? sum / count : kNaN;
}

double RunReport::mean_min_rate() const {
    if (slots.empty()) return kNaN;
    double sum = 0;
    for (const SlotResult& s : slots) {
        double m = std::numeric_limits<double>::infinity();
        for (const VehicleSlot& v : s.vehicles) m = std::min(m, v.r_avg);
        sum += m;
    }
    return sum / slots.size();
}

int RunReport::vehicle_count() const {
    return slots.empty() ? 0 : static_cast<int>(slots.front().vehicles.size());
}

RunReport run_trajectory(const ScenarioConfig& config) {
    config.validate();
    Simulator sim(config);
    return sim.run();
}

std::string_view to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::p_max: return "p_max";
        case SweepAxis::m_tx: return "m_tx";
        case SweepAxis::l_elements: return "l_elements";
        case SweepAxis::speed: return "speed";
        case SweepAxis::k_vehicles: return "k_vehicles";
    }
    return "?";
}

SweepAxis parse_axis(std::string_view name) {
    for (SweepAxis a : {SweepAxis::p_max, SweepAxis::m_tx, SweepAxis::l_elements,
                        SweepAxis::speed, SweepAxis::k_vehicles})
        if (to_string(a) == name) return a;
    throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepAxis axis, double value) {
    ScenarioConfig c = base;
    auto as_int = [&](const char* what) {
        const double r = std::round(value);
        if (std::abs(r - value) > 1e-9 || r < 1)
            throw ConfigError(std::string(what) + " sweep values must be positive integers");
        return static_cast<int>(r);
    };
    switch (axis) {
        case SweepAxis::p_max: c.p_max = value; break;
        case SweepAxis::m_tx:
            c.arrays.m_tx = as_int("m_tx");
            c.arrays.m_rx = c.arrays.m_tx;
            break;
        case SweepAxis::l_elements:
            c.arrays.l_x = as_int("l_elements");
            c.arrays.l_y = c.arrays.l_x;
            break;
        case SweepAxis::speed:
            if (!(value > 0)) throw ConfigError("speed sweep values must be positive");
            for (VehicleSpec& v : c.vehicles) v.speed = value;
            c.noise.slot_time = base.noise.slot_time * 20.0 / value;
            break;
        case SweepAxis::k_vehicles: {
            const int k = as_int("k_vehicles");
            const VehicleSpec proto = base.vehicles.front();
            c.vehicles.clear();
            for (int i = 0; i < k; ++i) {
                VehicleSpec v = proto;
                v.position.x() = k == 1 ? 40.0 : 20.0 + 10.0 * i;
                c.vehicles.push_back(v);
            }
            break;
        }
    }
    c.validate();
    return c;
}

std::vector<RunReport> sweep(const ScenarioConfig& base, SweepAxis axis,
                             const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    std::vector<ScenarioConfig> configs;
    for (double v : values) configs.push_back(apply_sweep(base, axis, v));
    std::vector<RunReport> out(values.size());
    const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < values.size(); start += width) {
        std::vector<std::future<RunReport>> jobs;
        const std::size_t end = std::min(values.size(), start + width);
        for (std::size_t i = start; i < end; ++i)
            jobs.push_back(std::async(std::launch::async, [&configs, i] {
                return run_trajectory(configs[i]);
            }));
        for (std::size_t i = start; i < end; ++i) {
            out[i] = jobs[i - start].get();
            out[i].sweep_axis = std::string(to_string(axis));
            out[i].sweep_value = values[i];
        }
    }
    return out;
}

std::vector<GateReport> gate_check(const ScenarioConfig& config) {
    config.validate();
    std::vector<GateReport> out;
    for (std::size_t k = 0; k < config.vehicles.size(); ++k) {
        const VehicleSpec& vs = config.vehicles[k];
        const LinkGeometry g = make_link(config.rsu, vs.position, vs.device_offset);
        const KinematicState s0{g.phi_x, g.phi_y, g.dist, vs.speed};
        const auto [pred, mse] = predict(s0, Eigen::Matrix4d::Zero(), config.noise);
        const AngleStats st{pred.phi_x, pred.phi_y, std::max(mse(0, 0), kMinVar),
                            std::max(mse(1, 1), kMinVar)};
        const LinkBudget b{config.p_max, pathloss(config.beta0, pred.dist),
                           config.beta0 / vs.device_offset.squaredNorm(), config.arrays,
                           config.noise};
        const SensingCoeffs a = sensing_coeffs(b, st);
        const SingleResult r = optimize_single(b, st, a, config.solver);
        GateReport gr;
        gr.vehicle = static_cast<int>(k);
        gr.lhs = st.var_phiy / a.a_phiy + st.var_phi / a.a_phi;
        gr.pass = sensing_condition(st.var_phi, a.a_phi, st.var_phiy, a.a_phiy);
        gr.eta = r.eta;
        gr.beta_r = r.beta_r;
        out.push_back(gr);
    }
    return out;
}

}  // namespace isac

namespace isac {

std::vector<ValidationReport> validation_suite(const ScenarioConfig& config) {
    config.validate();
    const VehicleSpec& vs = config.vehicles.front();
    const LinkGeometry g = make_link(config.rsu, vs.position, vs.device_offset);
    LinkBudget b{config.p_max, pathloss(config.beta0, g.dist),
                 config.beta0 / vs.device_offset.squaredNorm(),
                 {config.arrays.m_tx, config.arrays.m_rx, 40, 1}, config.noise};
    std::vector<ValidationReport> out;
    for (double var : {1e-3, 1e-2, 0.05, 0.1, 0.2}) {
        ValidationReport r = mc_echo_snr(b, g.phi_x, g.phi_y, var, var, 0.5, 0.5, config.mc);
        r.label = "echo_snr var=" + format_double(var);
        out.push_back(r);
    }
    for (double offset : {0.0, 0.1, 0.25}) {
        ValidationReport r =
            mc_interference(g.phi_x, g.phi_x + offset, 0.02, config.arrays.m_tx, config.mc);
        r.label = "interference offset=" + format_double(offset);
        out.push_back(r);
    }
    for (int i = 0; i < 10; ++i) {
        LinkBudget bp = b;
        bp.p_max = 0.01 * std::pow(10.0, i / 9.0 * 2.0);
        RateValidation rv = mc_rate(bp, g.phi_x, g.phi_y, 0.1, 0.1, 0.5, config.mc);
        rv.jensen.label = "rate p=" + format_double(bp.p_max);
        out.push_back(rv.jensen);
    }
    return out;
}

}  // namespace isac
