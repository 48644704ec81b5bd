#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "isac/geometry.hpp"
#include "isac/rng.hpp"

using namespace isac;

TEST_CASE("fejer kernel peak, symmetry and period mean") {
    for (int m : {1, 2, 8, 33}) {
        CHECK(fejer_kernel(m, 0.0) == doctest::Approx(m));
        CHECK(fejer_kernel(m, 2.0) == doctest::Approx(m));
        CHECK(fejer_kernel(m, 0.3) == doctest::Approx(fejer_kernel(m, -0.3)));
        // Mean over one period is 1 (Parseval on the normalized array factor).
        const int n = 20000;
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += fejer_kernel(m, -1.0 + 2.0 * (i + 0.5) / n);
        CHECK(acc / n == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(fejer_kernel(8, 0.25) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fejer kernel equals the squared steering inner product") {
    // |b(a1)^H b(a2)|^2 / M with cos-space offset cos a2 - cos a1.
    StreamRng rng(7, 0);
    for (int t = 0; t < 50; ++t) {
        const int m = 2 + static_cast<int>(rng.uniform() * 30);
        const double a1 = kPi * rng.uniform(), a2 = kPi * rng.uniform();
        const CVec<double> u = rsu_steering(m, a1), v = rsu_steering(m, a2);
        const double direct = std::norm(u.dot(v)) / m;
        CHECK(direct == doctest::Approx(fejer_kernel(m, std::cos(a2) - std::cos(a1))).epsilon(1e-9));
    }
}

TEST_CASE("steering vectors: unit modulus, sizes and argument checks") {
    ArrayConfig ar{4, 6, 5, 3};
    const std::vector<double> one{1.0}, two{1.0, 2.0};
    const CVec<double> tx = steering_vector(SteeringKind::rsu_tx, one, ar);
    const CVec<double> ios = steering_vector(SteeringKind::ios, two, ar);
    CHECK(tx.size() == 4);
    CHECK(steering_vector(SteeringKind::rsu_rx, one, ar).size() == 6);
    CHECK(ios.size() == 15);
    for (Eigen::Index i = 0; i < ios.size(); ++i) CHECK(std::abs(ios[i]) == doctest::Approx(1.0));
    // Element (ix, iy) = (1, 0) and (0, 1).
    CHECK(std::arg(ios[3]) == doctest::Approx(kPi * std::cos(1.0)));
    CHECK(std::arg(ios[1]) == doctest::Approx(-kPi * std::cos(2.0)));
    CHECK_THROWS_AS(steering_vector(SteeringKind::ios, one, ar), ConfigError);
    CHECK_THROWS_AS(steering_vector(SteeringKind::rsu_tx, two, ar), ConfigError);
    ArrayConfig bad{0, 1, 1, 1};
    CHECK_THROWS_AS(steering_vector(SteeringKind::rsu_tx, one, bad), ConfigError);
}

TEST_CASE("pathloss") {
    CHECK(pathloss(1e-3, 10.0) == doctest::Approx(1e-5));
    CHECK_THROWS_AS(pathloss(1e-3, 0.0), DomainError);
    CHECK_THROWS_AS(pathloss(1e-3, -1.0), DomainError);
}

TEST_CASE("link geometry from positions") {
    const LinkGeometry g = make_link({0, 0, 20}, {40, 20, 0}, {0, 0, -1.5});
    const double d = std::sqrt(40.0 * 40 + 20 * 20 + 20 * 20);
    CHECK(g.dist == doctest::Approx(d));
    CHECK(g.phi_x == doctest::Approx(std::acos(40.0 / d)));
    CHECK(g.phi_y == doctest::Approx(std::acos(20.0 / d)));
    CHECK(g.psi_uz == doctest::Approx(kPi));
    CHECK_THROWS_AS(make_link({0, 0, 0}, {0, 0, 0}, {0, 0, -1}), DomainError);
}

TEST_CASE("angle folding stays inside the clamp range") {
    StreamRng rng(3, 1);
    for (int i = 0; i < 1000; ++i) {
        const double a = 40.0 * (rng.uniform() - 0.5);
        const double f = fold_angle(a);
        CHECK(f >= kAngleClamp);
        CHECK(f <= kPi - kAngleClamp);
        CHECK(std::cos(f) == doctest::Approx(std::cos(clamp_angle(std::acos(std::cos(a))))).epsilon(1e-9));
    }
}

TEST_CASE("gradient profiles: direct sums match the Fejér forms") {
    ArrayConfig ar{8, 8, 12, 7};
    StreamRng rng(11, 0);
    for (int t = 0; t < 30; ++t) {
        const double px = 0.2 + 2.7 * rng.uniform(), py = 0.2 + 2.7 * rng.uniform();
        const double tx = 0.2 + 2.7 * rng.uniform(), ty = 0.2 + 2.7 * rng.uniform();
        const double beta = rng.uniform();
        const auto [refl, refr] = optimal_phase_profiles(px, py, 0.4, 2.0, 0.3, ar, beta);
        const double dx = std::cos(px) - std::cos(tx), dy = std::cos(py) - std::cos(ty);
        CHECK(reflect_gain(refl, tx, ty) ==
              doctest::Approx(reflect_gain_fejer(beta, 12, 7, dx, dy)).epsilon(1e-8));
        CHECK(refract_gain(refr, tx, ty, 0.4, 2.0) ==
              doctest::Approx(refract_gain_fejer(1 - beta, 12, 7, dx, dy)).epsilon(1e-8));
    }
}

TEST_CASE("aligned profiles reach the full array gain") {
    ArrayConfig ar{8, 8, 10, 6};
    const auto [refl, refr] = optimal_phase_profiles(1.1, 1.9, 0.0, kPi, 0.0, ar, 0.7);
    CHECK(reflect_gain(refl, 1.1, 1.9) == doctest::Approx(0.7 * 60 * 60));
    CHECK(refract_gain(refr, 1.1, 1.9, 0.0, kPi) == doctest::Approx(0.3 * 60 * 60));
}

TEST_CASE("phase quantization: literal nearest codeword on [0, 2pi)") {
    CHECK(quantize_phase(0.1, 1) == 0.0);
    CHECK(quantize_phase(kPi / 2, 1) == 0.0);  // tie goes to the smaller codeword
    CHECK(quantize_phase(kPi / 2 + 1e-9, 1) == doctest::Approx(kPi));
    // Just below 2 pi: no circular wrap, so the top codeword wins.
    CHECK(quantize_phase(2 * kPi - 0.01, 1) == doctest::Approx(kPi));
    CHECK(quantize_phase(2 * kPi - 0.01, 3) == doctest::Approx(7 * kPi / 4));
    CHECK(quantize_phase(-0.1, 2) == doctest::Approx(3 * kPi / 2));
    StreamRng rng(5, 0);
    for (int b = 1; b <= 4; ++b) {
        const double step = 2 * kPi / (1 << b);
        for (int i = 0; i < 200; ++i) {
            const double th = (2 * kPi - step) * rng.uniform();
            CHECK(std::abs(quantize_phase(th, b) - th) <= step / 2 + 1e-12);
        }
    }
    CHECK_THROWS_AS(quantize_phase(1.0, 0), DomainError);
}

TEST_CASE("exact gains use the profile's design angles") {
    ArrayConfig ar{8, 8, 16, 4};
    const auto prof = optimal_phase_profiles(1.3, 1.2, 0, kPi, 0, ar, 0.8).first;
    const BeamGains g = exact_gains(1.35, 1.25, 1.3, 1.2, prof, ar, 0.1);
    const double dx = std::cos(1.3) - std::cos(1.35);
    CHECK(g.tx == doctest::Approx(0.1 * fejer_kernel(8, dx)));
    CHECK(g.rx == doctest::Approx(fejer_kernel(8, dx)));
    CHECK(g.ios == doctest::Approx(reflect_gain(prof, 1.35, 1.25)).epsilon(1e-8));
    const auto q = quantize_phases(prof, 3);
    CHECK_FALSE(q.analytic);
    CHECK(exact_gains(1.35, 1.25, 1.3, 1.2, q, ar, 0.1).ios ==
          doctest::Approx(reflect_gain(q, 1.35, 1.25)));
}
