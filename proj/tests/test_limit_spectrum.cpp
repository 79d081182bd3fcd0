#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bloch/limit_spectrum.hpp"

using namespace bloch;

namespace {
constexpr double kPi = std::numbers::pi;

// Plain bisection on std::cyl_bessel_j over a caller-supplied bracket.
double bisect_bessel(int n, double lo, double hi) {
    const double flo = std::cyl_bessel_j(double(n), lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((std::cyl_bessel_j(double(n), mid) > 0) == (flo > 0)) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

const double kEta01 = 2.404825557695773;
const double kEta11 = 3.831705970207512;
}  // namespace

TEST_CASE("Bessel zero oracle") {
    CHECK(bisect_bessel(0, 2.0, 3.0) == doctest::Approx(kEta01).epsilon(1e-14));
    CHECK(bisect_bessel(1, 3.0, 4.5) == doctest::Approx(kEta11).epsilon(1e-14));
    CHECK(bessel_zero(0, 1) == doctest::Approx(kEta01).epsilon(1e-13));
    CHECK(bessel_zero(1, 1) == doctest::Approx(kEta11).epsilon(1e-13));
    CHECK(std::abs(bessel_zero(0, 1) - 2.404826) < 1e-6);
    CHECK(std::abs(bessel_zero(1, 1) - 3.831706) < 1e-6);
    const auto z = bessel_zeros(3, 6);
    for (int k = 0; k < 6; ++k) CHECK(std::abs(std::cyl_bessel_j(3.0, z[k])) < 1e-13);
    for (int k = 1; k < 6; ++k) CHECK(z[k] - z[k - 1] > 3.0);
}

TEST_CASE("disk Dirichlet spectrum") {
    const DirichletSpectrum s = disk_dirichlet(0.3, 4, 4);
    REQUIRE(!s.modes.empty());
    CHECK(s.modes[0].delta == doctest::Approx(std::pow(kEta01 / 0.3, 2)).epsilon(1e-12));
    CHECK(std::abs(s.modes[0].delta - 64.2576) < 1e-3);
    CHECK(s.modes[0].n == 0);
    CHECK_FALSE(s.modes[0].mean_zero);
    CHECK(s.modes[1].n == 1);
    CHECK(s.modes[1].mean_zero);
    CHECK(s.modes[1].multiplicity == 2);
    for (std::size_t i = 1; i < s.modes.size(); ++i) CHECK(s.modes[i].delta >= s.modes[i - 1].delta);
    CHECK(s.modes[0].delta > 0.0);
}

TEST_CASE("closed-form disk modes are normalized with matching averages and traces") {
    const DirichletSpectrum s = disk_dirichlet(0.3, 2, 3);
    for (std::size_t idx = 0; idx < s.modes.size(); ++idx) {
        for (auto ang : {DiskMode::Angular::ExpPlus, DiskMode::Angular::Cos, DiskMode::Angular::Sin}) {
            if (s.modes[idx].n == 0 && ang != DiskMode::Angular::ExpPlus) continue;
            const DiskMode m = s.disk_mode(idx, ang);
            // Polar Gauss-free midpoint quadrature of |psi|^2 and psi.
            const int nr = 400, nt = 256;
            double l2 = 0.0;
            cplx mean = 0.0;
            for (int i = 0; i < nr; ++i) {
                const double r = (i + 0.5) * 0.3 / nr;
                for (int j = 0; j < nt; ++j) {
                    const double t = 2 * kPi * j / nt;
                    const cplx v = m.value(Vec2(0.5, 0.5) + r * Vec2(std::cos(t), std::sin(t)));
                    l2 += std::norm(v) * r * (0.3 / nr) * (2 * kPi / nt);
                    mean += v * r * (0.3 / nr) * (2 * kPi / nt);
                }
            }
            CHECK(l2 == doctest::Approx(1.0).epsilon(1e-5));
            CHECK(std::abs(mean - m.mean_integral()) < 1e-5);
            if (s.modes[idx].n == 0) CHECK(std::abs(m.mean_integral()) == doctest::Approx(s.modes[idx].average).epsilon(1e-12));
        }
    }
}

TEST_CASE("boundary flux of the lowest mode is nonzero and negative, zero for n = 1") {
    const DirichletSpectrum s = disk_dirichlet(0.3, 1, 1);
    const DiskMode m0 = s.disk_mode(0);
    const DiskMode m1 = s.disk_mode(1);
    double flux0 = 0.0;
    cplx flux1 = 0.0;
    const int nt = 64;
    for (int j = 0; j < nt; ++j) {
        const double t = 2 * kPi * j / nt;
        flux0 += m0.normal_derivative(t).real() * 0.3 * 2 * kPi / nt;
        flux1 += m1.normal_derivative(t) * (0.3 * 2 * kPi / nt);
    }
    CHECK(flux0 < 0.0);
    CHECK(std::abs(flux1) < 1e-10);
    // Divergence theorem: flux = -delta * int psi.
    CHECK(flux0 == doctest::Approx(-m0.eigenvalue() * m0.mean_integral().real()).epsilon(1e-12));
}

TEST_CASE("closed-form Fourier coefficients of disk modes") {
    const DirichletSpectrum s = disk_dirichlet(0.3, 2, 2);
    const DiskMode m = s.disk_mode(3, DiskMode::Angular::ExpPlus);
    const Vec2 q(7.0, -3.0);
    cplx ref = 0.0;
    const int nr = 600, nt = 256;
    for (int i = 0; i < nr; ++i) {
        const double r = (i + 0.5) * 0.3 / nr;
        for (int j = 0; j < nt; ++j) {
            const double t = 2 * kPi * j / nt;
            const Vec2 x = Vec2(0.5, 0.5) + r * Vec2(std::cos(t), std::sin(t));
            ref += m.value(x) * std::polar(1.0, -q.dot(x)) * r * (0.3 / nr) * (2 * kPi / nt);
        }
    }
    CHECK(std::abs(m.fourier(q) - ref) < 1e-5);
    CHECK(std::abs(s.disk_mode(0).fourier(Vec2::Zero()) - s.disk_mode(0).mean_integral()) < 1e-12);
}

TEST_CASE("Bessel-Parseval: partial mass never exceeds the area") {
    const DirichletSpectrum s = disk_dirichlet(0.3, 0, 500);
    double partial = 0.0;
    for (const auto& m : s.modes) {
        partial += m.average * m.average;
        CHECK(partial <= kPi * 0.09 * (1 + 1e-14));
    }
    CHECK(partial > kPi * 0.09 * (1 - 1e-3));
}

TEST_CASE("mass accounting picks the axisymmetric cutoff") {
    const int K = axisymmetric_kmax_for_mass(1e-3);
    CHECK(K == 406);
    const DirichletSpectrum s = disk_dirichlet(0.3, 0, K);
    CHECK(kPi * 0.09 - s.resolved_mass() < 1e-3 * kPi * 0.09);
}

TEST_CASE("spectral function behaviour") {
    const DirichletSpectrum s = disk_dirichlet(0.3, 3, 3, 406);
    CHECK(spectral_function(1e-9, s).value == doctest::Approx(-1.0).epsilon(1e-9));
    const double d1 = s.modes[0].delta;
    double d2 = 0.0;
    for (const auto& m : s.modes)
        if (!m.mean_zero && m.delta > d1) { d2 = m.delta; break; }
    CHECK(spectral_function(d1 - 1e-3, s).value < 0.0);
    CHECK(spectral_function(d1 + 1e-3, s).value > 0.0);
    CHECK(spectral_function(d2 - 1e-3, s).value < 0.0);
    CHECK(spectral_function(d2 + 1e-3, s).value > 0.0);
    CHECK_THROWS_AS(spectral_function(d1, s), DomainError);
    CHECK(spectral_function(50.0, s).tail_bound > 0.0);
}

TEST_CASE("limit spectrum away from alpha = 0 is the inverse Dirichlet spectrum") {
    const DirichletSpectrum s = disk_dirichlet(0.3, 4, 4);
    const LimitSpectrum l = limit_spectrum(QuasiMomentum(kPi, 0.0), s, 3);
    CHECK(l.values[0].beta == doctest::Approx(std::pow(0.3 / kEta01, 2)).epsilon(1e-12));
    CHECK(std::abs(l.values[0].beta - 0.0155624) < 1e-7);
    CHECK(l.values[1].beta == doctest::Approx(std::pow(0.3 / kEta11, 2)).epsilon(1e-12));
    CHECK(l.values[1].multiplicity == 2);
    CHECK(l.values[0].provenance == LimitValue::Provenance::Dirichlet);
}

TEST_CASE("periodic limit spectrum replaces the axisymmetric values by spectral roots") {
    const DirichletSpectrum s = disk_dirichlet(0.3, 4, 4, axisymmetric_kmax_for_mass(1e-3));
    const LimitSpectrum l = limit_spectrum(QuasiMomentum(0.0, 0.0), s, 4);
    const double d1 = std::pow(kEta01 / 0.3, 2);
    const double d2 = std::pow(bessel_zero(0, 2) / 0.3, 2);
    REQUIRE(l.values[0].provenance == LimitValue::Provenance::SpectralRoot);
    const double nu1 = l.values[0].lambda;
    CHECK(nu1 > d1);
    CHECK(nu1 < d2);
    CHECK(std::abs(spectral_function(nu1, s).value) < 1e-8);
    // Reference root from an independent scipy brentq with 20000 axisymmetric modes.
    CHECK(nu1 == doctest::Approx(79.61527040042209).epsilon(1e-9));
    bool has_mean_zero = false;
    for (const auto& v : l.values) {
        CHECK_FALSE(std::abs(v.beta - std::pow(0.3 / kEta01, 2)) < 1e-9);
        if (std::abs(v.beta - std::pow(0.3 / kEta11, 2)) < 1e-12) {
            has_mean_zero = true;
            CHECK(v.multiplicity == 2);
        }
    }
    CHECK(has_mean_zero);
    CHECK(l.sign_change_beyond_last_pole);
}

TEST_CASE("interlacing: one root between consecutive axisymmetric poles") {
    const DirichletSpectrum s = disk_dirichlet(0.3, 12, 12, 30);
    const LimitSpectrum l = limit_spectrum(QuasiMomentum(0.0, 0.0), s, 12);
    const auto z = bessel_zeros(0, 31);
    int roots = 0;
    for (const auto& v : l.values) {
        if (v.provenance != LimitValue::Provenance::SpectralRoot) continue;
        ++roots;
        int below = 0;
        for (double e : z)
            if (std::pow(e / 0.3, 2) < v.lambda) ++below;
        CHECK(below >= 1);
        CHECK(v.lambda < std::pow(z[below] / 0.3, 2));
        int same_gap = 0;
        for (const auto& w : l.values)
            if (w.provenance == LimitValue::Provenance::SpectralRoot && w.lambda > std::pow(z[below - 1] / 0.3, 2) &&
                w.lambda < std::pow(z[below] / 0.3, 2))
                ++same_gap;
        CHECK(same_gap == 1);
    }
    CHECK(roots >= 2);
}

TEST_CASE("insufficient modes raise a resolution error") {
    const DirichletSpectrum s = disk_dirichlet(0.3, 1, 1);
    CHECK_THROWS_AS(limit_spectrum(QuasiMomentum(kPi, 0.0), s, 5), ResolutionError);
}

TEST_CASE("finite-difference Dirichlet spectrum of the disk converges at second order") {
    const Inclusion disk = Inclusion::disk({0.5, 0.5}, 0.3);
    const double exact = std::pow(kEta01 / 0.3, 2);
    const DirichletSpectrum s256 = fd_dirichlet(disk, 1.0 / 256, 3);
    const double e256 = std::abs(s256.modes[0].delta - exact) / exact;
    CHECK(e256 < 1e-2);
    CHECK_FALSE(s256.modes[0].mean_zero);
    CHECK(s256.modes[1].mean_zero);
    CHECK(s256.modes[2].mean_zero);
    CHECK(s256.modes[0].error_estimate > 0.0);
    for (const auto& m : s256.modes) CHECK(m.delta > 0.0);
    const DirichletSpectrum s512 = fd_dirichlet(disk, 1.0 / 512, 1);
    const double e512 = std::abs(s512.modes[0].delta - exact) / exact;
    CHECK(e512 < 3e-3);
    CHECK(std::abs(s512.modes[0].extrapolated - exact) <= std::abs(s512.modes[0].delta - exact));
}

TEST_CASE("finite-difference Dirichlet spectrum of a square") {
    const DirichletSpectrum s = fd_dirichlet(Inclusion::square({0.5, 0.5}, 0.4), 1.0 / 128, 2);
    CHECK(s.modes[0].delta == doctest::Approx(2 * kPi * kPi / 0.16).epsilon(1e-2));
    CHECK(std::abs(s.modes[0].delta - 123.370) < 0.01 * 123.370);
}

TEST_CASE("too coarse FD grid is rejected") {
    CHECK_THROWS_AS(fd_dirichlet(Inclusion::disk({0.5, 0.5}, 0.05), 1.0 / 32, 1), ResolutionError);
}

TEST_CASE("limit spectrum CSV") {
    const LimitSpectrum l = limit_spectrum(QuasiMomentum(kPi, 0.0), disk_dirichlet(0.3, 2, 2), 3);
    std::ostringstream os;
    write_limit_csv(os, l);
    const std::string out = os.str();
    CHECK(out.rfind("alpha_x,alpha_y,value,provenance,multiplicity\n", 0) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 4);
    CHECK(out.find("dirichlet") != std::string::npos);
}
