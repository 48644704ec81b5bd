#pragma once

#include <limits>
#include <utility>

#include <Eigen/Dense>

#include "isac/rng.hpp"

namespace isac {

inline constexpr double kNoMeasurement = std::numeric_limits<double>::infinity();
inline constexpr double kTanClamp = 1e3;

struct KinematicState {
    double phi_x = 0;
    double phi_y = 0;
    double dist = 0;
    double speed = 0;

    Eigen::Vector4d vec() const { return {phi_x, phi_y, dist, speed}; }
    static KinematicState from(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
};

struct NoiseModel {
    Eigen::Vector4d q_omega{0.1, 0.1, 0.1, 0.1};  // process variances of (phi_x, phi_y, d, v)
    double sigma_r2 = 0.1;                        // angle-estimator variance parameter
    double symbol_time = 1e-7;
    double slot_time = 0.02;
    double noise_s = 1e-10;  // RSU receive noise, W
    double noise_c = 1e-10;  // device noise, W
    double var_z_dist = 0.1;
    double var_z_speed = 0.1;

    void validate() const;
};

struct TrackState {
    KinematicState predicted;
    Eigen::Matrix4d mse = Eigen::Matrix4d::Zero();  // posterior MSE
    KinematicState tracked;
    double var_phi = 0;
    double var_phiy = 0;
};

// Noiseless state update g(x); angles are clamped, |tan phi_y| is capped at 1e3.
KinematicState propagate(const KinematicState& s, double slot_time);

// Jacobian of g at s.
Eigen::Matrix4d state_jacobian(const KinematicState& s, double slot_time);

// g(x) plus one process-noise draw; angles folded back into (0, pi).
// Throws TrajectoryError when the new distance is not positive.
KinematicState evolve_truth(const KinematicState& s, const NoiseModel& noise, StreamRng& rng);

std::pair<KinematicState, Eigen::Matrix4d> predict(const KinematicState& tracked,
                                                   const Eigen::Matrix4d& mse,
                                                   const NoiseModel& noise);

// (A_phi, A_phiy) / (p eta beta^R); +inf when nothing is reflected.
std::pair<double, double> measurement_variance(double a_phi, double a_phiy, double eta,
                                               double beta_r, double power_share = 1.0);

double tracking_variance(double sigma_omega2, double a, double eta_beta_p);

// Kalman update with K = M (Q_z + M)^-1; infinite angle variances skip the update.
TrackState track_update(const KinematicState& predicted, const Eigen::Matrix4d& mse_pred,
                        const KinematicState& measurement,
                        const Eigen::Vector4d& measurement_variances);

// y = x + z with independent Gaussian z of the given variances (angles folded).
KinematicState draw_measurement(const KinematicState& truth, const Eigen::Vector4d& variances,
                                StreamRng& rng);

}  // namespace isac
