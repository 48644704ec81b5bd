#include "isac/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "isac/errors.hpp"

namespace isac {

void SolverSettings::validate() const {
    if (!(grid_step > 0) || grid_step > 1 || sca_max_iter < 1 || ao_max_iter < 1 ||
        !(rate_tol > 0) || !(bisection_tol > 0))
        throw ConfigError("solver settings must be positive (grid_step <= 1)");
}

namespace {

std::vector<double> grid(double step) {
    const int n = static_cast<int>(std::llround(1.0 / step));
    std::vector<double> g(n + 1);
    for (int i = 0; i <= n; ++i) g[i] = std::min(1.0, i * step);
    return g;
}

}  // namespace

SingleResult grid_search_single(const LinkBudget& b, const AngleStats& s,
                                const SensingCoeffs& a, const SolverSettings& settings) {
    const std::vector<double> g = grid(settings.grid_step);
    SingleResult best;
    best.rate = rate_single(b, 0.0, 0.0, s, a).r_avg;
    best.gate = sensing_condition(s.var_phi, a.a_phi, s.var_phiy, a.a_phiy);
    for (double eta : g)
        for (double beta : g) {
            const double r = rate_single(b, eta, beta, s, a).r_avg;
            // eta r + (1 - eta) r can round a few ulps above r; that is a tie, not a gain.
            if (r > best.rate + 1e-12 * std::abs(best.rate)) {
                best.rate = r;
                best.eta = eta;
                best.beta_r = beta;
            }
        }
    return best;
}

SingleResult optimize_single(const LinkBudget& b, const AngleStats& s, const SensingCoeffs& a,
                             const SolverSettings& settings) {
    if (!sensing_condition(s.var_phi, a.a_phi, s.var_phiy, a.a_phiy)) {
        SingleResult r;
        r.rate = rate_single(b, 0.0, 0.0, s, a).r_avg;
        return r;
    }
    return grid_search_single(b, s, a, settings);
}

std::vector<double> equal_sensing_powers(const std::vector<double>& a, double p_max) {
    const double total = std::accumulate(a.begin(), a.end(), 0.0);
    std::vector<double> p(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) p[k] = p_max * a[k] / total;
    return p;
}

std::vector<double> sca_power_step(const MultiBudget& mb, const SlotAllocation& current,
                                   const SolverSettings& settings) {
    const int n = mb.size();
    const double eta = current.eta;
    if (eta >= 1.0) return current.p_c;
    const double mt = mb.arrays.m_tx;
    const double budget = mb.p_max;
    const Eigen::MatrixXd x = cross_gains_c(mb, current);
    const std::vector<double> sig = noise_terms_c(mb, current);
    const std::vector<StageRates> rates = rate_multi(mb, current);

    // Lower bound: log2(4 sum_j p_j X_kj + sig_k + 4 p_k M) - cst_k - sum_j D_kj p_j.
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> cst(n);
    for (int k = 0; k < n; ++k) {
        double ir = 0;
        for (int j = 0; j < n; ++j)
            if (j != k) ir += 4.0 * current.p_c[j] * x(k, j);
        double lin = 0;
        for (int j = 0; j < n; ++j) {
            if (j == k) continue;
            d(k, j) = 4.0 * x(k, j) / ((ir + sig[k]) * std::log(2.0));
            lin += d(k, j) * current.p_c[j];
        }
        cst[k] = std::log2(ir + sig[k]) - lin;
    }

    auto minimal_power = [&](double target, std::vector<double>& out) {
        std::vector<double> t(n);
        for (int k = 0; k < n; ++k) t[k] = (target - eta * rates[k].r_sc) / (1.0 - eta);
        std::vector<double> p(n, 0.0), q(n);
        for (int it = 0; it < 5000; ++it) {
            double change = 0, total = 0;
            for (int k = 0; k < n; ++k) {
                double interf = 0, lin = 0;
                for (int j = 0; j < n; ++j) {
                    if (j == k) continue;
                    interf += 4.0 * p[j] * x(k, j);
                    lin += d(k, j) * p[j];
                }
                const double need = std::exp2(t[k] + cst[k] + lin) - interf - sig[k];
                q[k] = std::max(0.0, need / (4.0 * mt));
                change = std::max(change, std::abs(q[k] - p[k]));
                total += q[k];
            }
            if (total > budget * (1.0 + 1e-12)) return false;
            p.swap(q);
            if (change <= 1e-13 * budget) {
                out = p;
                return true;
            }
        }
        return false;
    };

    double lo = min_avg_rate(rates);
    double hi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k)
        hi = std::min(hi, eta * rates[k].r_sc +
                              (1.0 - eta) * std::log2(1.0 + 4.0 * budget * mt / sig[k]));
    std::vector<double> best;
    if (!minimal_power(lo, best)) return current.p_c;
    for (int it = 0; it < 200 && hi - lo > settings.bisection_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        std::vector<double> p;
        if (minimal_power(mid, p)) {
            lo = mid;
            best = p;
        } else {
            hi = mid;
        }
    }
    const double used = std::accumulate(best.begin(), best.end(), 0.0);
    if (!(used > 0)) return std::vector<double>(n, budget / n);
    for (double& v : best) v *= budget / used;
    return best;
}

AoResult optimize_multi_ao(const MultiBudget& mb, const SolverSettings& settings,
                           const AoOptions& options) {
    const int n = mb.size();
    if (n < 1) throw ConfigError("at least one vehicle is required");
    std::vector<double> a_phi;
    for (const VehicleLink& v : mb.vehicles) a_phi.push_back(v.a.a_phi);

    AoResult res;
    SlotAllocation& al = res.alloc;
    if (options.warm_start) {
        al = *options.warm_start;
    } else {
        al.eta = 0.2;
        al.beta_r.assign(n, 0.5);
        al.p_c.assign(n, mb.p_max / n);
    }
    al.p_sc = equal_sensing_powers(a_phi, mb.p_max);
    if (options.fixed_eta) al.eta = *options.fixed_eta;
    if (options.fixed_beta) al.beta_r.assign(n, *options.fixed_beta);

    auto value = [&](const SlotAllocation& s) { return min_avg_rate(rate_multi(mb, s)); };
    double cur = value(al);
    res.trace.push_back(cur);
    const std::vector<double> g = grid(settings.grid_step);

    for (int outer = 0; outer < settings.ao_max_iter; ++outer) {
        const double start = cur;

        for (int it = 0; it < settings.sca_max_iter; ++it) {
            SlotAllocation trial = al;
            trial.p_c = sca_power_step(mb, al, settings);
            const double v = value(trial);
            if (!(v >= cur)) break;
            const double gain = v - cur;
            al = trial;
            cur = v;
            if (gain < settings.rate_tol) break;
        }

        if (!options.fixed_eta) {
            SlotAllocation trial = al;
            for (double eta : g) {
                trial.eta = eta;
                const double v = value(trial);
                if (v > cur) {
                    cur = v;
                    al.eta = eta;
                }
            }
        }

        if (!options.fixed_beta) {
            SlotAllocation trial = al;
            for (double beta : g) {
                trial.beta_r.assign(n, beta);
                const double v = value(trial);
                if (v > cur) {
                    cur = v;
                    al.beta_r.assign(n, beta);
                }
            }
        }

        res.trace.push_back(cur);
        res.iterations = outer + 1;
        if (cur - start < settings.rate_tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

std::vector<double> waterfill(const std::vector<double>& gains, double p_max) {
    const int n = static_cast<int>(gains.size());
    if (n == 0) return {};
    for (double g : gains)
        if (!(g > 0)) throw DomainError("water-filling gains must be positive");
    std::vector<double> inv(n);
    for (int k = 0; k < n; ++k) inv[k] = 1.0 / gains[k];
    std::vector<double> sorted = inv;
    std::sort(sorted.begin(), sorted.end());
    double mu = 0, prefix = 0;
    for (int m = 1; m <= n; ++m) {
        prefix += sorted[m - 1];
        const double cand = (p_max + prefix) / m;
        if (m == n || cand <= sorted[m]) {
            mu = cand;
            break;
        }
    }
    std::vector<double> p(n);
    for (int k = 0; k < n; ++k) p[k] = std::max(0.0, mu - inv[k]);
    return p;
}

AoResult optimize_nl(const MultiBudget& mb, const SolverSettings& settings) {
    MultiBudget nl = mb;
    nl.model = InterferenceModel::noise_limited;
    const int n = nl.size();
    const std::vector<double> sig = noise_terms_sc(nl);
    std::vector<double> gains(n);
    for (int k = 0; k < n; ++k) gains[k] = 4.0 * nl.arrays.m_tx / sig[k];
    const std::vector<double> p = waterfill(gains, nl.p_max);

    bool any = false;
    for (int k = 0; k < n; ++k) {
        if (!(p[k] > 0)) continue;
        const VehicleLink& v = nl.vehicles[k];
        any = any || sensing_condition(v.angles.var_phi, v.a.a_phi / p[k], v.angles.var_phiy,
                                       v.a.a_phiy / p[k]);
    }
    if (!any) {
        AoResult r;
        r.alloc.eta = 0;
        r.alloc.beta_r.assign(n, 0.0);
        r.alloc.p_sc = p;
        r.alloc.p_c = p;
        r.trace.push_back(min_avg_rate(rate_multi(nl, r.alloc)));
        r.converged = true;
        r.waterfill_only = true;
        return r;
    }
    return optimize_multi_ao(nl, settings);
}

SirResult equal_sir_powers(const Eigen::MatrixXd& f, double p_max, int m_tx) {
    const int n = static_cast<int>(f.rows());
    if (n < 2 || f.cols() != n) throw DomainError("equal-SIR needs a square matrix with K >= 2");
    SirResult out;
    std::vector<int> keep;
    for (int k = 0; k < n; ++k) {
        if (f.row(k).sum() > 0)
            keep.push_back(k);
        else
            out.excluded.push_back(k);
    }
    out.p.assign(n, 0.0);
    if (keep.empty()) return out;
    const int m = static_cast<int>(keep.size());
    Eigen::MatrixXd g(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) g(a, b) = f(keep[a], keep[b]);
    // Shift by I so that periodic (e.g. 2x2 off-diagonal) matrices still converge.
    const Eigen::MatrixXd shifted = g + Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd v = Eigen::VectorXd::Constant(m, 1.0 / m);
    for (int it = 0; it < 100000; ++it) {
        Eigen::VectorXd w = shifted * v;
        w /= w.sum();
        const double change = (w - v).cwiseAbs().maxCoeff();
        v = w;
        if (change < 1e-15) break;
    }
    const double rho = (g * v).sum() / v.sum();
    for (int a = 0; a < m; ++a) out.p[keep[a]] = p_max * v[a];
    out.sir = m_tx / rho;
    return out;
}

}  // namespace isac
