#include "isac/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace isac {

namespace {

double sin2(double x) {
    const double s = std::sin(clamp_angle(x));
    return s * s;
}

double log2p1(double x) { return std::log2(1.0 + x); }

}  // namespace

double h_series(double x, double y, const SeriesParams& params) {
    if (!(y > 0)) throw DomainError("h_series needs a positive variance");
    const double xc = clamp_angle(x);
    auto terms = [&](int i) {
        const double a = i * kPi;
        const double b = (i + 1) * kPi - xc;
        return std::exp(-2.0 * a * a / y) + std::exp(-2.0 * b * b / y);
    };
    double sum = terms(0);
    for (int n = 1; n <= params.max_index; ++n) {
        const double up = terms(n);
        const double down = terms(-n);
        sum += up + down;
        if (up < params.term_tol && down < params.term_tol) break;
    }
    return sum / std::sqrt(2.0 * kPi * y * sin2(xc));
}

double h_tilde(double x, double y) {
    if (!(y > 0)) throw DomainError("h_tilde needs a positive variance");
    const double xc = clamp_angle(x);
    const double b = kPi - xc;
    return (1.0 + std::exp(-2.0 * b * b / y)) / std::sqrt(2.0 * kPi * y * sin2(xc));
}

double c0(const LinkBudget& b) {
    return 4.0 * b.p_max * b.beta_g * b.beta_h * b.arrays.elements() * b.arrays.m_tx /
           b.noise.noise_c;
}

double c1(const LinkBudget& b, const AngleStats& s) {
    return 2.0 * b.p_max * b.beta_g * b.beta_h * b.arrays.elements() * b.arrays.m_tx /
           (kPi * std::sin(clamp_angle(s.phi_x)) * std::sin(clamp_angle(s.phi_y)) *
            std::sqrt(s.var_phi) * std::sqrt(s.var_phiy) * b.noise.noise_c);
}

double c2(const LinkBudget& b) {
    return 4.0 * b.beta_g * b.beta_h * b.arrays.elements() * b.arrays.m_tx / b.noise.noise_c;
}

SensingCoeffs sensing_coeffs_per_watt(const LinkBudget& b, const AngleStats& s,
                                      const SeriesParams& params) {
    const double hh = h_series(s.phi_x, s.var_phi, params) * h_series(s.phi_y, s.var_phiy, params);
    const double num = b.noise.symbol_time * b.noise.noise_s * b.noise.sigma_r2;
    const double den = b.noise.slot_time * b.beta_g * b.beta_g * b.arrays.elements() *
                       b.arrays.m_tx * b.arrays.m_rx * hh;
    return {num / (den * sin2(s.phi_x)), num / (den * sin2(s.phi_y))};
}

SensingCoeffs sensing_coeffs(const LinkBudget& b, const AngleStats& s,
                             const SeriesParams& params) {
    SensingCoeffs a = sensing_coeffs_per_watt(b, s, params);
    a.a_phi /= b.p_max;
    a.a_phiy /= b.p_max;
    return a;
}

double echo_snr(const LinkBudget& b, double eta, double beta_r, double h_phi, double h_phiy) {
    return beta_r * eta * b.noise.slot_time * b.p_max * b.beta_g * b.beta_g *
           b.arrays.elements() * b.arrays.m_tx * b.arrays.m_rx * h_phi * h_phiy /
           (b.noise.symbol_time * b.noise.noise_s);
}

StageRates rate_single(const LinkBudget& b, double eta, double beta_r, const AngleStats& s,
                       const SensingCoeffs& a, const SeriesParams& params) {
    const double k0 = c0(b);
    const double x = eta * beta_r;
    const double tv_phi = tracking_variance(s.var_phi, a.a_phi, x);
    const double tv_phiy = tracking_variance(s.var_phiy, a.a_phiy, x);
    StageRates r;
    r.r_sc = log2p1(k0 * (1.0 - beta_r) * h_series(s.phi_x, s.var_phi, params) *
                    h_series(s.phi_y, s.var_phiy, params));
    r.r_c = log2p1(k0 * h_series(s.phi_x, tv_phi, params) * h_series(s.phi_y, tv_phiy, params));
    r.r_avg = eta * r.r_sc + (1.0 - eta) * r.r_c;
    return r;
}

double rate_hat(const LinkBudget& b, const AngleStats& s, const SensingCoeffs& a, double eta,
                double beta_r) {
    const double k1 = c1(b, s);
    const double x = eta * beta_r;
    const double gain = std::sqrt((s.var_phi * x + a.a_phi) * (s.var_phiy * x + a.a_phiy) /
                                  (a.a_phi * a.a_phiy));
    return eta * log2p1(k1 * (1.0 - beta_r)) + (1.0 - eta) * log2p1(k1 * gain);
}

bool sensing_condition(double sigma_omega_phi2, double a_phi, double sigma_omega_phiy2,
                       double a_phiy) {
    return sigma_omega_phiy2 / a_phiy + sigma_omega_phi2 / a_phi > 2.0;
}

double interference_term(double x, double y, double z, const SeriesParams& params) {
    if (!(z > 0)) throw DomainError("interference_term needs a positive variance");
    const double xc = clamp_angle(x);
    auto terms = [&](int i) {
        const double a = 2.0 * i * kPi + xc - y;
        const double b = 2.0 * (i + 1) * kPi - xc - y;
        return std::exp(-a * a / (2.0 * z)) + std::exp(-b * b / (2.0 * z));
    };
    double sum = terms(0);
    for (int n = 1; n <= params.max_index; ++n) {
        const double up = terms(n);
        const double down = terms(-n);
        sum += up + down;
        if (up < params.term_tol && down < params.term_tol) break;
    }
    return 2.0 * sum / std::sqrt(2.0 * kPi * z * sin2(xc));
}

double interference_tilde(double x, double y, double z) {
    if (!(z > 0)) throw DomainError("interference_tilde needs a positive variance");
    const double xc = clamp_angle(x);
    const double a = xc - y;
    const double b = 2.0 * kPi - xc - y;
    return (std::exp(-a * a / (2.0 * z)) + std::exp(-b * b / (2.0 * z))) /
           std::sqrt(2.0 * kPi * z * sin2(xc));
}

// ---------------------------------------------------------------------------------------

std::vector<std::pair<double, double>> multi_tracking_variances(const MultiBudget& mb,
                                                                const SlotAllocation& a) {
    std::vector<std::pair<double, double>> out;
    out.reserve(mb.vehicles.size());
    for (int k = 0; k < mb.size(); ++k) {
        const VehicleLink& v = mb.vehicles[k];
        const double x = a.p_sc[k] * a.eta * a.beta_r[k];
        out.emplace_back(tracking_variance(v.angles.var_phi, v.a.a_phi, x),
                         tracking_variance(v.angles.var_phiy, v.a.a_phiy, x));
    }
    return out;
}

std::vector<double> noise_terms_sc(const MultiBudget& mb) {
    std::vector<double> out;
    for (const VehicleLink& v : mb.vehicles)
        out.push_back(mb.noise.noise_c /
                      (v.beta_g * v.beta_h * mb.arrays.elements() *
                       h_tilde(v.angles.phi_x, v.angles.var_phi) *
                       h_tilde(v.angles.phi_y, v.angles.var_phiy)));
    return out;
}

std::vector<double> noise_terms_c(const MultiBudget& mb, const SlotAllocation& a) {
    const auto tv = multi_tracking_variances(mb, a);
    std::vector<double> out;
    for (int k = 0; k < mb.size(); ++k) {
        const VehicleLink& v = mb.vehicles[k];
        out.push_back(mb.noise.noise_c /
                      (v.beta_g * v.beta_h * mb.arrays.elements() *
                       h_tilde(v.angles.phi_x, tv[k].first) *
                       h_tilde(v.angles.phi_y, tv[k].second)));
    }
    return out;
}

Eigen::MatrixXd cross_gains_sc(const MultiBudget& mb) {
    const int n = mb.size();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    if (mb.model == InterferenceModel::noise_limited) return x;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            if (j == k) continue;
            const AngleStats& sk = mb.vehicles[k].angles;
            const AngleStats& sj = mb.vehicles[j].angles;
            x(k, j) = mb.model == InterferenceModel::full
                          ? interference_tilde(sk.phi_x, sj.phi_x, sj.var_phi)
                          : interference_tilde(sj.phi_x, sk.phi_x, sj.var_phi);
        }
    return x;
}

Eigen::MatrixXd cross_gains_c(const MultiBudget& mb, const SlotAllocation& a) {
    const int n = mb.size();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    if (mb.model == InterferenceModel::noise_limited) return x;
    if (mb.model == InterferenceModel::interference_limited) {
        std::vector<double> angles;
        for (const VehicleLink& v : mb.vehicles) angles.push_back(v.angles.phi_x);
        return fejer_cross_matrix(angles, mb.arrays.m_tx);
    }
    const auto tv = multi_tracking_variances(mb, a);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            if (j != k)
                x(k, j) = interference_tilde(mb.vehicles[k].angles.phi_x,
                                             mb.vehicles[j].angles.phi_x, tv[j].first);
    return x;
}

std::vector<StageRates> rate_multi(const MultiBudget& mb, const SlotAllocation& a) {
    const int n = mb.size();
    const double mt = mb.arrays.m_tx;
    const Eigen::MatrixXd xs = cross_gains_sc(mb);
    const Eigen::MatrixXd xc = cross_gains_c(mb, a);
    const std::vector<double> ns = noise_terms_sc(mb);
    const std::vector<double> nc = noise_terms_c(mb, a);
    std::vector<StageRates> out(n);
    for (int k = 0; k < n; ++k) {
        double is = 0, ic = 0;
        for (int j = 0; j < n; ++j) {
            if (j == k) continue;
            is += a.p_sc[j] * xs(k, j);
            ic += a.p_c[j] * xc(k, j);
        }
        const double keep = 1.0 - a.beta_r[k];
        StageRates& r = out[k];
        r.r_sc = log2p1(4.0 * keep * a.p_sc[k] * mt / (4.0 * keep * is + ns[k]));
        r.r_c = log2p1(4.0 * a.p_c[k] * mt / (4.0 * ic + nc[k]));
        r.r_avg = a.eta * r.r_sc + (1.0 - a.eta) * r.r_c;
    }
    return out;
}

std::vector<StageRates> nl_rates(const MultiBudget& mb, const SlotAllocation& a) {
    MultiBudget nl = mb;
    nl.model = InterferenceModel::noise_limited;
    return rate_multi(nl, a);
}

double min_avg_rate(const std::vector<StageRates>& r) {
    double m = std::numeric_limits<double>::infinity();
    for (const StageRates& s : r) m = std::min(m, s.r_avg);
    return m;
}

Eigen::MatrixXd fejer_cross_matrix(const std::vector<double>& angles, int m_tx) {
    const int n = static_cast<int>(angles.size());
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            if (j != k) f(k, j) = fejer_kernel(m_tx, std::cos(angles[k]) - std::cos(angles[j]));
    return f;
}

std::vector<StageRates> il_rates(const std::vector<double>& predicted,
                                 const std::vector<double>& measured, double var_omega,
                                 const SlotAllocation& a, int m_tx) {
    const int n = static_cast<int>(predicted.size());
    const Eigen::MatrixXd f = fejer_cross_matrix(measured, m_tx);
    std::vector<StageRates> out(n);
    for (int k = 0; k < n; ++k) {
        double is = 0, ic = 0;
        for (int j = 0; j < n; ++j) {
            if (j == k) continue;
            is += a.p_sc[j] * interference_tilde(predicted[j], predicted[k], var_omega);
            ic += a.p_c[j] * f(k, j);
        }
        StageRates& r = out[k];
        r.r_sc = log2p1(a.p_sc[k] * m_tx / is);
        r.r_c = log2p1(a.p_c[k] * m_tx / ic);
        r.r_avg = a.eta * r.r_sc + (1.0 - a.eta) * r.r_c;
    }
    return out;
}

double il_upper_bound(const std::vector<double>& measured, int m_tx) {
    if (measured.size() < 2) return std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd f = fejer_cross_matrix(measured, m_tx);
    const double min_row = f.rowwise().sum().minCoeff();
    return log2p1(m_tx / min_row);
}

}  // namespace isac
