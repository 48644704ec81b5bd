#include "isac/montecarlo.hpp"

#include <algorithm>
#include <cmath>

namespace isac {

double default_tolerance(int l_x) { return l_x >= 40 ? 0.05 : 0.10; }

ValidationReport make_report(std::string label, double closed_form, double mc_mean,
                             double mc_stderr, double tolerance) {
    ValidationReport r;
    r.label = std::move(label);
    r.closed_form = closed_form;
    r.mc_mean = mc_mean;
    r.mc_stderr = mc_stderr;
    r.tolerance = tolerance;
    r.rel_error = std::abs(closed_form - mc_mean) / std::max(std::abs(closed_form), 1e-300);
    r.pass = r.rel_error < tolerance;
    return r;
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double echo_snr_closed(const LinkBudget& b, double phi_x, double phi_y, double var_phi,
                       double var_phiy, double eta, double beta_r) {
    const double hy = b.arrays.l_y > 1 ? h_series(phi_y, var_phiy) : 1.0;
    return echo_snr(b, eta, beta_r, h_series(phi_x, var_phi), hy);
}

ValidationReport mc_echo_snr(const LinkBudget& b, double phi_x, double phi_y, double var_phi,
                             double var_phiy, double eta, double beta_r, const McConfig& mc) {
    const ArrayConfig& ar = b.arrays;
    const double scale = eta * b.noise.slot_time * b.beta_g * b.beta_g /
                         (b.noise.symbol_time * b.noise.noise_s);
    const double cx = std::cos(phi_x);
    const double cy = std::cos(phi_y);
    const double sx = std::sqrt(var_phi);
    const double sy = std::sqrt(var_phiy);
    const SampleStats s = sample_mean(mc, [&](StreamRng& rng) {
        const double dx = std::cos(phi_x + sx * rng.normal()) - cx;
        const double dy = std::cos(phi_y + sy * rng.normal()) - cy;
        const double tx = b.p_max * fejer_kernel(ar.m_tx, dx);
        const double rx = fejer_kernel(ar.m_rx, dx);
        return scale * tx * rx * reflect_gain_fejer(beta_r, ar.l_x, ar.l_y, dx, dy);
    });
    const double cf = echo_snr_closed(b, phi_x, phi_y, var_phi, var_phiy, eta, beta_r);
    ValidationReport r = make_report("echo_snr", cf, s.mean, s.stderr_mean, default_tolerance(ar.l_x));
    if (ar.l_y == 1)
        r.closed_form_strict =
            echo_snr(b, eta, beta_r, h_series(phi_x, var_phi), h_series(phi_y, var_phiy));
    return r;
}

ValidationReport mc_interference(double x, double y, double z, int m_tx, const McConfig& mc) {
    const double cx = std::cos(x);
    const double sz = std::sqrt(z);
    const SampleStats s = sample_mean(mc, [&](StreamRng& rng) {
        return fejer_kernel(m_tx, cx - std::cos(y + sz * rng.normal()));
    });
    const double cf = z > 0 ? interference_term(x, y, z) : fejer_kernel(m_tx, cx - std::cos(y));
    return make_report("interference", cf, s.mean, s.stderr_mean, 0.05);
}

RateValidation mc_rate(const LinkBudget& b, double phi_x, double phi_y, double var_phi,
                       double var_phiy, double beta_r, const McConfig& mc) {
    const ArrayConfig& ar = b.arrays;
    const double scale = b.beta_g * b.beta_h / b.noise.noise_c;
    const double cx = std::cos(phi_x);
    const double cy = std::cos(phi_y);
    const double sx = std::sqrt(var_phi);
    const double sy = std::sqrt(var_phiy);
    auto snr = [&](StreamRng& rng) {
        const double dx = std::cos(phi_x + sx * rng.normal()) - cx;
        const double dy = std::cos(phi_y + sy * rng.normal()) - cy;
        return scale * b.p_max * fejer_kernel(ar.m_tx, dx) *
               refract_gain_fejer(1.0 - beta_r, ar.l_x, ar.l_y, dx, dy);
    };
    const SampleStats mean_snr = sample_mean(mc, snr);
    const SampleStats ergodic =
        sample_mean(mc, [&](StreamRng& rng) { return std::log2(1.0 + snr(rng)); });

    const double hy = ar.l_y > 1 ? h_series(phi_y, var_phiy) : 0.5;
    const double cf = std::log2(1.0 + c0(b) * (1.0 - beta_r) * h_series(phi_x, var_phi) * hy);
    const double bound = std::log2(1.0 + mean_snr.mean);
    const double bound_err = mean_snr.stderr_mean / ((1.0 + mean_snr.mean) * std::log(2.0));

    RateValidation out;
    out.jensen = make_report("rate", cf, bound, bound_err, default_tolerance(ar.l_x));
    if (ar.l_y == 1)
        out.jensen.closed_form_strict =
            std::log2(1.0 + c0(b) * (1.0 - beta_r) * h_series(phi_x, var_phi) *
                                h_series(phi_y, var_phiy));
    out.ergodic = ergodic.mean;
    return out;
}

SampleStats mc_fejer_expectation(int l, int m_tx, int m_rx, double phi, double var,
                                 const McConfig& mc) {
    const double c = std::cos(phi);
    const double sd = std::sqrt(var);
    return sample_mean(mc, [&](StreamRng& rng) {
        const double d = std::cos(phi + sd * rng.normal()) - c;
        return fejer_kernel(l, 2.0 * d) * fejer_kernel(m_tx, d) * fejer_kernel(m_rx, d);
    });
}

SampleStats mc_echo_power(const ArrayConfig& arrays, double phi_x, double phi_y, double var,
                          int bits, const McConfig& mc) {
    const double c = std::cos(phi_x);
    const double sd = std::sqrt(var);
    return sample_mean(mc, [&](StreamRng& rng) {
        const double pred = phi_x + sd * rng.normal();
        const double d = std::cos(pred) - c;
        PhaseProfile p = optimal_phase_profiles(pred, phi_y, 0.0, 0.0, 0.0, arrays, 1.0).first;
        if (bits > 0) p = quantize_phases(p, bits);
        return fejer_kernel(arrays.m_tx, d) * fejer_kernel(arrays.m_rx, d) *
               reflect_gain(p, phi_x, phi_y);
    });
}

}  // namespace isac
