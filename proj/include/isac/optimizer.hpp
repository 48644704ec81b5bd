#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "isac/closedform.hpp"

namespace isac {

struct SolverSettings {
    double grid_step = 0.01;
    int sca_max_iter = 30;
    int ao_max_iter = 20;
    double rate_tol = 1e-4;
    double bisection_tol = 1e-7;

    void validate() const;
};

struct SingleResult {
    double eta = 0;
    double beta_r = 0;
    double rate = 0;
    bool gate = false;  // sensing condition held; false means the search was skipped
};

// 2-D grid search of the average rate; skipped (eta = beta^R = 0) when the sensing
// condition fails.
SingleResult optimize_single(const LinkBudget& b, const AngleStats& s, const SensingCoeffs& a,
                             const SolverSettings& settings);

// Exhaustive grid without the shortcut; used to cross-check the sensing condition.
SingleResult grid_search_single(const LinkBudget& b, const AngleStats& s,
                                const SensingCoeffs& a, const SolverSettings& settings);

// p_k = P A_k / sum_j A_j.
std::vector<double> equal_sensing_powers(const std::vector<double>& a, double p_max);

// One SCA step on the communication-stage powers: bisection on the common rate target with
// a minimal-power feasibility iteration, then scaled to the full budget.
std::vector<double> sca_power_step(const MultiBudget& mb, const SlotAllocation& current,
                                   const SolverSettings& settings);

struct AoOptions {
    std::optional<double> fixed_eta;
    std::optional<double> fixed_beta;
    const SlotAllocation* warm_start = nullptr;
};

struct AoResult {
    SlotAllocation alloc;
    std::vector<double> trace;  // min-rate after initialization and after each outer iteration
    int iterations = 0;
    bool converged = false;
    bool waterfill_only = false;
};

AoResult optimize_multi_ao(const MultiBudget& mb, const SolverSettings& settings,
                           const AoOptions& options = {});

// p_k = max(0, mu - 1/g_k) with sum p_k = P.
std::vector<double> waterfill(const std::vector<double>& gains, double p_max);

AoResult optimize_nl(const MultiBudget& mb, const SolverSettings& settings);

struct SirResult {
    std::vector<double> p;
    double sir = 0;
    std::vector<int> excluded;  // vehicles receiving no interference
};

// Perron vector of the zero-diagonal cross-gain matrix, normalized to the budget.
SirResult equal_sir_powers(const Eigen::MatrixXd& f, double p_max, int m_tx);

}  // namespace isac
