#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "isac/closedform.hpp"
#include "isac/rng.hpp"

namespace isac {

struct McConfig {
    std::uint64_t n_samples = 100000;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct ValidationReport {
    std::string label;
    double closed_form = 0;
    double mc_mean = 0;
    double mc_stderr = 0;
    double rel_error = 0;
    double tolerance = 0.05;
    bool pass = false;
    // Strict closed-form value without the single-element-axis correction (NaN when identical).
    double closed_form_strict = std::numeric_limits<double>::quiet_NaN();
};

// 5% for l_x >= 40, 10% below.
double default_tolerance(int l_x);

ValidationReport make_report(std::string label, double closed_form, double mc_mean,
                             double mc_stderr, double tolerance);

// Fixed-shape pairwise reduction; the result depends only on the values and their order.
double pairwise_sum(std::span<const double> v);

struct SampleStats {
    double mean = 0;
    double stderr_mean = 0;
};

// Evaluates f(i, rng_i) for every sample index with an independent stream per sample,
// in parallel, and reduces in a fixed order.
template <class F>
SampleStats sample_mean(const McConfig& mc, F&& f) {
    const std::uint64_t n = mc.n_samples;
    std::vector<double> values(n);
    unsigned threads = mc.threads ? mc.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, n / 1024)));
    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) {
            StreamRng rng(mc.seed, i);
            values[i] = f(rng);
        }
    };
    if (threads <= 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (n + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t b = t * chunk;
            const std::uint64_t e = std::min(n, b + chunk);
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }
    SampleStats s;
    s.mean = pairwise_sum(values) / static_cast<double>(n);
    for (double& v : values) v = (v - s.mean) * (v - s.mean);
    const double var = n > 1 ? pairwise_sum(values) / static_cast<double>(n - 1) : 0.0;
    s.stderr_mean = std::sqrt(var / static_cast<double>(n));
    return s;
}

// Closed-form echo SNR where a single-element y axis contributes its exact gain of 1.
double echo_snr_closed(const LinkBudget& b, double phi_x, double phi_y, double var_phi,
                       double var_phiy, double eta, double beta_r);

// Prediction errors ~ N(0, var) on both angles; exact Fejér-product echo SNR per sample.
ValidationReport mc_echo_snr(const LinkBudget& b, double phi_x, double phi_y, double var_phi,
                             double var_phiy, double eta, double beta_r, const McConfig& mc);

// E[F_Mt(cos x - cos y_hat)] with y_hat ~ N(y, z) against the full series I(x, y, z).
ValidationReport mc_interference(double x, double y, double z, int m_tx, const McConfig& mc);

struct RateValidation {
    ValidationReport jensen;  // log2(1 + E[SNR]) against the closed-form stage rate
    double ergodic = 0;       // E[log2(1 + SNR)]
};

// Joint S&C stage rate at prediction variances (var_phi, var_phiy).
RateValidation mc_rate(const LinkBudget& b, double phi_x, double phi_y, double var_phi,
                       double var_phiy, double beta_r, const McConfig& mc);

// E[F_L(2 dcos) F_Mt(dcos) F_Mr(dcos)] for a Gaussian angle error.
SampleStats mc_fejer_expectation(int l, int m_tx, int m_rx, double phi, double var,
                                 const McConfig& mc);

// Mean echo power (unit transmit power and beta^R) with the reflect profile designed at the
// predicted angle; bits = 0 keeps continuous phases.
SampleStats mc_echo_power(const ArrayConfig& arrays, double phi_x, double phi_y, double var,
                          int bits, const McConfig& mc);

}  // namespace isac
