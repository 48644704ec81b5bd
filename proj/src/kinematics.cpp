#include "isac/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include "isac/errors.hpp"
#include "isac/geometry.hpp"

namespace isac {

void NoiseModel::validate() const {
    if (!(q_omega.array() >= 0).all()) throw ConfigError("process variances must be >= 0");
    if (!(var_z_dist >= 0) || !(var_z_speed >= 0))
        throw ConfigError("range/speed measurement variances must be >= 0");
    if (!(sigma_r2 > 0) || !(symbol_time > 0) || !(slot_time > 0) || !(noise_s > 0) ||
        !(noise_c > 0))
        throw ConfigError("noise powers, sigma_r2 and time constants must be positive");
}

namespace {

double capped_tan(double a) { return std::clamp(std::tan(a), -kTanClamp, kTanClamp); }

}  // namespace

KinematicState propagate(const KinematicState& s, double slot_time) {
    const double step = s.speed * slot_time;
    KinematicState n;
    n.phi_x = fold_angle(s.phi_x + step * std::sin(s.phi_x) / s.dist);
    n.phi_y = fold_angle(s.phi_y + step * capped_tan(s.phi_y) / s.dist);
    n.dist = s.dist - step * std::cos(s.phi_x);
    n.speed = s.speed;
    return n;
}

Eigen::Matrix4d state_jacobian(const KinematicState& s, double slot_time) {
    const double t = slot_time;
    const double v = s.speed;
    const double d = s.dist;
    const double tan_raw = std::tan(s.phi_y);
    const bool capped = std::abs(tan_raw) > kTanClamp;
    const double tn = capped ? std::copysign(kTanClamp, tan_raw) : tan_raw;
    const double sec2 = capped ? 0.0 : 1.0 + tan_raw * tan_raw;

    Eigen::Matrix4d g = Eigen::Matrix4d::Identity();
    g(0, 0) = 1.0 + v * t * std::cos(s.phi_x) / d;
    g(0, 2) = -v * t * std::sin(s.phi_x) / (d * d);
    g(0, 3) = t * std::sin(s.phi_x) / d;
    g(1, 1) = 1.0 + v * t * sec2 / d;
    g(1, 2) = -v * t * tn / (d * d);
    g(1, 3) = t * tn / d;
    g(2, 0) = v * t * std::sin(s.phi_x);
    g(2, 3) = -t * std::cos(s.phi_x);
    return g;
}

KinematicState evolve_truth(const KinematicState& s, const NoiseModel& noise, StreamRng& rng) {
    const double step = s.speed * noise.slot_time;
    KinematicState n;
    n.phi_x = fold_angle(s.phi_x + step * std::sin(s.phi_x) / s.dist +
                         std::sqrt(noise.q_omega[0]) * rng.normal());
    n.phi_y = fold_angle(s.phi_y + step * capped_tan(s.phi_y) / s.dist +
                         std::sqrt(noise.q_omega[1]) * rng.normal());
    n.dist = s.dist - step * std::cos(s.phi_x) + std::sqrt(noise.q_omega[2]) * rng.normal();
    n.speed = s.speed + std::sqrt(noise.q_omega[3]) * rng.normal();
    if (!(n.dist > 0)) throw TrajectoryError("vehicle distance became non-positive");
    return n;
}

std::pair<KinematicState, Eigen::Matrix4d> predict(const KinematicState& tracked,
                                                   const Eigen::Matrix4d& mse,
                                                   const NoiseModel& noise) {
    const Eigen::Matrix4d g = state_jacobian(tracked, noise.slot_time);
    Eigen::Matrix4d m = g * mse * g.transpose();
    m.diagonal() += noise.q_omega;
    return {propagate(tracked, noise.slot_time), 0.5 * (m + m.transpose())};
}

std::pair<double, double> measurement_variance(double a_phi, double a_phiy, double eta,
                                               double beta_r, double power_share) {
    const double x = eta * beta_r * power_share;
    if (!(x > 0)) return {kNoMeasurement, kNoMeasurement};
    return {a_phi / x, a_phiy / x};
}

double tracking_variance(double sigma_omega2, double a, double eta_beta_p) {
    return sigma_omega2 * a / (sigma_omega2 * eta_beta_p + a);
}

TrackState track_update(const KinematicState& predicted, const Eigen::Matrix4d& mse_pred,
                        const KinematicState& measurement,
                        const Eigen::Vector4d& measurement_variances) {
    TrackState out;
    out.predicted = predicted;
    if (!std::isfinite(measurement_variances[0]) || !std::isfinite(measurement_variances[1])) {
        out.tracked = predicted;
        out.mse = mse_pred;
    } else {
        Eigen::Matrix4d s = mse_pred;
        s.diagonal() += measurement_variances;
        Eigen::FullPivLU<Eigen::Matrix4d> lu(s);
        if (lu.rcond() < 1e-14) {
            s.diagonal().array() += 1e-12;
            lu.compute(s);
        }
        const Eigen::Matrix4d k = lu.solve(mse_pred.transpose()).transpose();  // M S^-1
        const Eigen::Vector4d x = predicted.vec();
        const Eigen::Vector4d xt = x + k * (measurement.vec() - x);
        out.tracked = KinematicState::from(xt);
        out.tracked.phi_x = clamp_angle(out.tracked.phi_x);
        out.tracked.phi_y = clamp_angle(out.tracked.phi_y);
        const Eigen::Matrix4d post = (Eigen::Matrix4d::Identity() - k) * mse_pred;
        out.mse = 0.5 * (post + post.transpose());
    }
    out.var_phi = out.mse(0, 0);
    out.var_phiy = out.mse(1, 1);
    return out;
}

KinematicState draw_measurement(const KinematicState& truth, const Eigen::Vector4d& variances,
                                StreamRng& rng) {
    KinematicState y;
    y.phi_x = fold_angle(truth.phi_x + std::sqrt(variances[0]) * rng.normal());
    y.phi_y = fold_angle(truth.phi_y + std::sqrt(variances[1]) * rng.normal());
    y.dist = truth.dist + std::sqrt(variances[2]) * rng.normal();
    y.speed = truth.speed + std::sqrt(variances[3]) * rng.normal();
    return y;
}

}  // namespace isac
