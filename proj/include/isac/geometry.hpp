#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <utility>

#include <Eigen/Dense>

#include "isac/errors.hpp"

namespace isac {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kAngleClamp = 1e-3;

template <class T>
using CVec = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, 1>;

struct ArrayConfig {
    int m_tx = 8;
    int m_rx = 8;
    int l_x = 80;
    int l_y = 80;

    int elements() const { return l_x * l_y; }
    void validate() const;
};

// Clamp to [1e-3, pi - 1e-3] so that sin^2 denominators stay finite.
double clamp_angle(double a);

// Fold an arbitrary real angle into [0, pi] by reflection, then clamp.
double fold_angle(double a);

// F_M(x) = (1/M) (sin(M pi x / 2) / sin(pi x / 2))^2, with the limit value M at x = 2k.
template <class T>
T fejer_kernel(int m, T x) {
    using std::abs;
    using std::sin;
    const T half = T(std::numbers::pi) * x / T(2);
    const T s = sin(half);
    if (abs(s) < T(1e-9)) return T(m);
    const T r = sin(T(m) * half) / s;
    return r * r / T(m);
}

// a_RSU / b_RSU: entry m is exp(-j pi m cos(angle)), m = 0..size-1.
template <class T>
CVec<T> rsu_steering(int size, T angle) {
    CVec<T> v(size);
    const T c = std::cos(angle);
    for (int m = 0; m < size; ++m)
        v[m] = std::polar(T(1), -T(std::numbers::pi) * T(m) * c);
    return v;
}

// a_IOS = x-factor (exp(+j pi lx cos phi_x)) kron y-factor (exp(-j pi ly cos phi_y)).
template <class T>
CVec<T> ios_steering(int l_x, int l_y, T phi_x, T phi_y) {
    const T cx = std::cos(phi_x);
    const T cy = std::cos(phi_y);
    CVec<T> v(static_cast<Eigen::Index>(l_x) * l_y);
    for (int ix = 0; ix < l_x; ++ix)
        for (int iy = 0; iy < l_y; ++iy)
            v[ix * l_y + iy] =
                std::polar(T(1), T(std::numbers::pi) * (T(ix) * cx - T(iy) * cy));
    return v;
}

enum class SteeringKind { rsu_tx, rsu_rx, ios };

// Dispatching form; angles holds one value for the RSU arrays and (phi_x, phi_y) for the IOS.
CVec<double> steering_vector(SteeringKind kind, std::span<const double> angles,
                             const ArrayConfig& arrays);

// beta_G = beta0 / d^2.
double pathloss(double beta0, double d);

struct LinkGeometry {
    Eigen::Vector3d rsu;
    Eigen::Vector3d vehicle;
    Eigen::Vector3d device_offset;
    double phi_x = 0;   // angle to the x-axis ULA
    double phi_y = 0;   // angle to the y-axis ULA
    double dist = 0;    // RSU to IOS
    double psi_x = 0;   // azimuth of the IOS seen from the RSU
    double psi_z = 0;   // polar angle of the IOS seen from the RSU
    double psi_ux = 0;  // device azimuth from the IOS
    double psi_uz = 0;  // device polar angle from the IOS
};

LinkGeometry make_link(const Eigen::Vector3d& rsu, const Eigen::Vector3d& vehicle,
                       const Eigen::Vector3d& device_offset);

enum class ProfileMode { reflect, refract };

struct PhaseProfile {
    ProfileMode mode = ProfileMode::reflect;
    double q_x = 0;
    double q_y = 0;
    double theta0 = 0;
    double splitting = 1;  // beta^R or beta^T, uniform over elements
    int l_x = 1;
    int l_y = 1;
    bool analytic = true;    // phases follow the linear gradient law exactly
    Eigen::VectorXd phases;  // element phases in [0, 2 pi), index ix * l_y + iy
};

// Gradient-law profiles aligned with the predicted angles (reflect toward the RSU,
// refract toward the in-vehicle device).
std::pair<PhaseProfile, PhaseProfile> optimal_phase_profiles(double phi_x, double phi_y,
                                                             double psi_ux, double psi_uz,
                                                             double theta0,
                                                             const ArrayConfig& arrays,
                                                             double beta_r);

// Nearest codeword of {2 pi k / 2^b} by |nu - theta| with theta in [0, 2 pi);
// ties go to the smaller codeword.
double quantize_phase(double theta, int bits);
PhaseProfile quantize_phases(const PhaseProfile& profile, int bits);

// |a^T Theta a|^2 by direct summation at the true angles.
double reflect_gain(const PhaseProfile& profile, double phi_x, double phi_y);

// Refraction gain from the RSU direction into the device direction by direct summation.
double refract_gain(const PhaseProfile& profile, double phi_x, double phi_y, double psi_ux,
                    double psi_uz);

// Closed Fejér forms for gradient-law profiles.
double reflect_gain_fejer(double beta, int l_x, int l_y, double dcos_x, double dcos_y);
double refract_gain_fejer(double beta, int l_x, int l_y, double dcos_x, double dcos_y);

struct BeamGains {
    double tx = 0;
    double ios = 0;
    double rx = 0;
};

// Transmit, reflect-IOS and receive gains at the true angles when the RSU beams and the
// reflect profile were built for (beam_phi_x, beam_phi_y).
BeamGains exact_gains(double phi_x, double phi_y, double beam_phi_x, double beam_phi_y,
                      const PhaseProfile& reflect, const ArrayConfig& arrays, double p_max);

}  // namespace isac
