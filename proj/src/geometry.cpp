#include "isac/geometry.hpp"

#include <algorithm>
#include <string>

namespace isac {

void ArrayConfig::validate() const {
    if (m_tx < 1 || m_rx < 1 || l_x < 1 || l_y < 1)
        throw ConfigError("array dimensions must be >= 1 (m_tx=" + std::to_string(m_tx) +
                          ", m_rx=" + std::to_string(m_rx) + ", l_x=" + std::to_string(l_x) +
                          ", l_y=" + std::to_string(l_y) + ")");
}

double clamp_angle(double a) { return std::clamp(a, kAngleClamp, kPi - kAngleClamp); }

double fold_angle(double a) {
    double r = std::fmod(a, 2.0 * kPi);
    if (r < 0) r += 2.0 * kPi;
    if (r > kPi) r = 2.0 * kPi - r;
    return clamp_angle(r);
}

CVec<double> steering_vector(SteeringKind kind, std::span<const double> angles,
                             const ArrayConfig& arrays) {
    arrays.validate();
    switch (kind) {
        case SteeringKind::rsu_tx:
        case SteeringKind::rsu_rx:
            if (angles.size() != 1)
                throw ConfigError("RSU steering vector takes exactly one angle");
            return rsu_steering(kind == SteeringKind::rsu_tx ? arrays.m_tx : arrays.m_rx,
                                angles[0]);
        case SteeringKind::ios:
            if (angles.size() != 2)
                throw ConfigError("IOS steering vector takes two angles (phi_x, phi_y)");
            return ios_steering(arrays.l_x, arrays.l_y, angles[0], angles[1]);
    }
    throw ConfigError("unknown steering kind");
}

double pathloss(double beta0, double d) {
    if (!(d > 0)) throw DomainError("pathloss distance must be positive");
    if (!(beta0 > 0)) throw DomainError("reference gain beta0 must be positive");
    return beta0 / (d * d);
}

LinkGeometry make_link(const Eigen::Vector3d& rsu, const Eigen::Vector3d& vehicle,
                       const Eigen::Vector3d& device_offset) {
    LinkGeometry g;
    g.rsu = rsu;
    g.vehicle = vehicle;
    g.device_offset = device_offset;
    const Eigen::Vector3d r = vehicle - rsu;
    g.dist = r.norm();
    if (!(g.dist > 0)) throw DomainError("vehicle coincides with the RSU");
    const Eigen::Vector3d u = r / g.dist;
    g.psi_z = std::acos(std::clamp(u.z(), -1.0, 1.0));
    g.psi_x = std::atan2(u.y(), u.x());
    g.phi_x = clamp_angle(std::acos(std::clamp(u.x(), -1.0, 1.0)));
    g.phi_y = clamp_angle(std::acos(std::clamp(u.y(), -1.0, 1.0)));
    const double od = device_offset.norm();
    if (od > 0) {
        const Eigen::Vector3d w = device_offset / od;
        g.psi_uz = std::acos(std::clamp(w.z(), -1.0, 1.0));
        g.psi_ux = std::atan2(w.y(), w.x());
    }
    return g;
}

namespace {

double wrap_2pi(double a) {
    double r = std::fmod(a, 2.0 * kPi);
    if (r < 0) r += 2.0 * kPi;
    if (r >= 2.0 * kPi) r = 0.0;
    return r;
}

PhaseProfile gradient_profile(ProfileMode mode, double q_x, double q_y, double theta0,
                              double splitting, const ArrayConfig& arrays) {
    PhaseProfile p;
    p.mode = mode;
    p.q_x = q_x;
    p.q_y = q_y;
    p.theta0 = theta0;
    p.splitting = splitting;
    p.l_x = arrays.l_x;
    p.l_y = arrays.l_y;
    p.phases.resize(arrays.elements());
    for (int ix = 0; ix < arrays.l_x; ++ix)
        for (int iy = 0; iy < arrays.l_y; ++iy)
            p.phases[ix * arrays.l_y + iy] =
                wrap_2pi(kPi * ix * q_x + kPi * iy * q_y + theta0);
    return p;
}

}  // namespace

std::pair<PhaseProfile, PhaseProfile> optimal_phase_profiles(double phi_x, double phi_y,
                                                             double psi_ux, double psi_uz,
                                                             double theta0,
                                                             const ArrayConfig& arrays,
                                                             double beta_r) {
    arrays.validate();
    const double cx = std::cos(phi_x);
    const double cy = std::cos(phi_y);
    const double sx = std::sin(psi_uz) * std::cos(psi_ux);
    const double sy = std::sin(psi_uz) * std::sin(psi_ux);
    return {gradient_profile(ProfileMode::reflect, -2.0 * cx, 2.0 * cy, theta0, beta_r, arrays),
            gradient_profile(ProfileMode::refract, -cx + sx, cy + sy, theta0, 1.0 - beta_r,
                             arrays)};
}

double quantize_phase(double theta, int bits) {
    if (bits < 1) throw DomainError("quantization needs at least one bit");
    const double t = wrap_2pi(theta);
    const int levels = 1 << bits;
    const double step = 2.0 * kPi / levels;
    double best = 0.0;
    double best_dist = t;
    for (int k = 1; k < levels; ++k) {
        const double nu = k * step;
        const double dist = std::abs(nu - t);
        if (dist < best_dist) {
            best_dist = dist;
            best = nu;
        }
    }
    return best;
}

PhaseProfile quantize_phases(const PhaseProfile& profile, int bits) {
    PhaseProfile q = profile;
    q.analytic = false;
    for (Eigen::Index i = 0; i < q.phases.size(); ++i) q.phases[i] = quantize_phase(q.phases[i], bits);
    return q;
}

double reflect_gain(const PhaseProfile& profile, double phi_x, double phi_y) {
    const double cx = std::cos(phi_x);
    const double cy = std::cos(phi_y);
    std::complex<double> acc = 0;
    for (int ix = 0; ix < profile.l_x; ++ix)
        for (int iy = 0; iy < profile.l_y; ++iy)
            acc += std::polar(1.0, profile.phases[ix * profile.l_y + iy] +
                                       2.0 * kPi * (ix * cx - iy * cy));
    return profile.splitting * std::norm(acc);
}

double refract_gain(const PhaseProfile& profile, double phi_x, double phi_y, double psi_ux,
                    double psi_uz) {
    const double cx = std::cos(phi_x);
    const double cy = std::cos(phi_y);
    const double sx = std::sin(psi_uz) * std::cos(psi_ux);
    const double sy = std::sin(psi_uz) * std::sin(psi_ux);
    std::complex<double> acc = 0;
    for (int ix = 0; ix < profile.l_x; ++ix)
        for (int iy = 0; iy < profile.l_y; ++iy)
            acc += std::polar(1.0, profile.phases[ix * profile.l_y + iy] +
                                       kPi * (ix * (cx - sx) - iy * (cy + sy)));
    return profile.splitting * std::norm(acc);
}

double reflect_gain_fejer(double beta, int l_x, int l_y, double dcos_x, double dcos_y) {
    return beta * l_x * l_y * fejer_kernel(l_x, 2.0 * dcos_x) * fejer_kernel(l_y, 2.0 * dcos_y);
}

double refract_gain_fejer(double beta, int l_x, int l_y, double dcos_x, double dcos_y) {
    return beta * l_x * l_y * fejer_kernel(l_x, dcos_x) * fejer_kernel(l_y, dcos_y);
}

BeamGains exact_gains(double phi_x, double phi_y, double beam_phi_x, [[maybe_unused]] double beam_phi_y,
                      const PhaseProfile& reflect, const ArrayConfig& arrays, double p_max) {
    const double dx = std::cos(beam_phi_x) - std::cos(phi_x);
    BeamGains g;
    g.tx = p_max * fejer_kernel(arrays.m_tx, dx);
    g.rx = fejer_kernel(arrays.m_rx, dx);
    if (reflect.analytic) {
        // The gradient law encodes the design angles: cos = -q_x / 2 and q_y / 2.
        const double rdx = -reflect.q_x / 2.0 - std::cos(phi_x);
        const double rdy = reflect.q_y / 2.0 - std::cos(phi_y);
        g.ios = reflect_gain_fejer(reflect.splitting, reflect.l_x, reflect.l_y, rdx, rdy);
    } else {
        g.ios = reflect_gain(reflect, phi_x, phi_y);
    }
    return g;
}

}  // namespace isac
