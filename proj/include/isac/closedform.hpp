#pragma once

#include <vector>

#include <Eigen/Dense>

#include "isac/geometry.hpp"
#include "isac/kinematics.hpp"

namespace isac {

struct SeriesParams {
    int max_index = 3;
    double term_tol = 1e-15;
};

struct LinkBudget {
    double p_max = 0.1;
    double beta_g = 0;
    double beta_h = 0;
    ArrayConfig arrays;
    NoiseModel noise;
};

// Predicted angles and the prediction variances around them.
struct AngleStats {
    double phi_x = kPi / 2;
    double phi_y = kPi / 2;
    double var_phi = 0.1;
    double var_phiy = 0.1;
};

// A_phi, A_phiy: angle-measurement variances at eta = beta^R = 1.
struct SensingCoeffs {
    double a_phi = 0;
    double a_phiy = 0;
};

struct StageRates {
    double r_sc = 0;
    double r_c = 0;
    double r_avg = 0;
};

double h_series(double x, double y, const SeriesParams& params = {});
double h_tilde(double x, double y);

double c0(const LinkBudget& b);
double c1(const LinkBudget& b, const AngleStats& s);
double c2(const LinkBudget& b);

// Single-vehicle coefficients (transmit power included).
SensingCoeffs sensing_coeffs(const LinkBudget& b, const AngleStats& s,
                             const SeriesParams& params = {});

// Multi-vehicle coefficients, which leave the transmit power out.
SensingCoeffs sensing_coeffs_per_watt(const LinkBudget& b, const AngleStats& s,
                                      const SeriesParams& params = {});

double echo_snr(const LinkBudget& b, double eta, double beta_r, double h_phi, double h_phiy);

StageRates rate_single(const LinkBudget& b, double eta, double beta_r, const AngleStats& s,
                       const SensingCoeffs& a, const SeriesParams& params = {});

double rate_hat(const LinkBudget& b, const AngleStats& s, const SensingCoeffs& a, double eta,
                double beta_r);

bool sensing_condition(double sigma_omega_phi2, double a_phi, double sigma_omega_phiy2,
                       double a_phiy);

double interference_term(double x, double y, double z, const SeriesParams& params = {});
double interference_tilde(double x, double y, double z);

// ---------------------------------------------------------------------------------------
// Multi-vehicle forms

enum class InterferenceModel {
    full,                  // I~ cross terms in both stages
    interference_limited,  // I~ in the S&C stage, F_Mt at the predicted angles afterwards
    noise_limited,         // no cross terms
};

struct VehicleLink {
    double beta_g = 0;
    double beta_h = 0;
    AngleStats angles;
    SensingCoeffs a;  // per-watt coefficients
};

struct MultiBudget {
    double p_max = 0.1;
    ArrayConfig arrays;
    NoiseModel noise;
    std::vector<VehicleLink> vehicles;
    InterferenceModel model = InterferenceModel::full;

    int size() const { return static_cast<int>(vehicles.size()); }
};

struct SlotAllocation {
    double eta = 0;
    std::vector<double> beta_r;
    std::vector<double> p_sc;
    std::vector<double> p_c;
};

// Per-vehicle tracking variances (phi_x, phi_y) for an allocation.
std::vector<std::pair<double, double>> multi_tracking_variances(const MultiBudget& mb,
                                                                const SlotAllocation& a);

// Effective noise terms sigma^{S&C}_k and sigma^C_k.
std::vector<double> noise_terms_sc(const MultiBudget& mb);
std::vector<double> noise_terms_c(const MultiBudget& mb, const SlotAllocation& a);

// Cross-gain matrices X (zero diagonal) entering 4 sum_j p_j X_kj.
Eigen::MatrixXd cross_gains_sc(const MultiBudget& mb);
Eigen::MatrixXd cross_gains_c(const MultiBudget& mb, const SlotAllocation& a);

std::vector<StageRates> rate_multi(const MultiBudget& mb, const SlotAllocation& a);
std::vector<StageRates> nl_rates(const MultiBudget& mb, const SlotAllocation& a);

double min_avg_rate(const std::vector<StageRates>& r);

// Zero-diagonal matrix F_kj = F_Mt(cos a_k - cos a_j).
Eigen::MatrixXd fejer_cross_matrix(const std::vector<double>& angles, int m_tx);

// SIR-form stage rates; cross gains I~(phi_j, phi_k, var) in the S&C stage and F_Mt at the
// measured angles in the communication stage.
std::vector<StageRates> il_rates(const std::vector<double>& predicted,
                                 const std::vector<double>& measured, double var_omega,
                                 const SlotAllocation& a, int m_tx);

// log2(1 + M_t / min_k sum_{j != k} F_Mt(cos a_k - cos a_j)); +inf for a single vehicle.
double il_upper_bound(const std::vector<double>& measured, int m_tx);

}  // namespace isac
