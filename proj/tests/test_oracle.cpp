#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "bloch/oracle.hpp"

using namespace bloch;

namespace {
constexpr double kPi = std::numbers::pi;

const InclusionSet& disk03() {
    static const InclusionSet s({Inclusion::disk({0.5, 0.5}, 0.3)});
    return s;
}

// Brute-force midpoint integration of exp(-i 2 pi n.x) over the inclusion.
std::complex<double> chi_grid(const Inclusion& inc, const Eigen::Vector2i& n, int g) {
    std::complex<double> s = 0.0;
    const double h = 1.0 / g;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const Vec2 x((i + 0.5) * h, (j + 0.5) * h);
            if (inc.contains(x)) s += std::polar(h * h, -2 * kPi * (n.x() * x.x() + n.y() * x.y()));
        }
    return s;
}

Inclusion ellipse(Vec2 c, double a, double b) {
    return Inclusion::curve([=](double s) {
        const double t = 2 * kPi * s;
        return CurveSample{c + Vec2(a * std::cos(t), b * std::sin(t)), 2 * kPi * Vec2(-a * std::sin(t), b * std::cos(t)),
                           -4 * kPi * kPi * Vec2(a * std::cos(t), b * std::sin(t))};
    }, "ellipse");
}
}  // namespace

TEST_CASE("plane-wave basis") {
    const PlaneWaveBasis b(Vec2(kPi, 0.0), 8);
    CHECK(b.size() == 289);
    const PlaneWaveBasis b0(Vec2(0.0, 0.0), 8);
    CHECK(b0.size() == 288);
    CHECK_THROWS_AS(PlaneWaveBasis(Vec2(0.1, 0.1), 7), DomainError);
}

TEST_CASE("indicator Fourier coefficients of a disk") {
    const Inclusion d = Inclusion::disk({0.5, 0.5}, 0.3);
    CHECK(chi_fourier(d, {0, 0}).real() == doctest::Approx(0.282743).epsilon(1e-6));
    for (const auto& n : {Eigen::Vector2i(1, 0), Eigen::Vector2i(2, -3), Eigen::Vector2i(5, 1)})
        CHECK(std::abs(chi_fourier(d, n) - chi_grid(d, n, 1200)) < 2e-4);
    // translation by t multiplies by exp(-i 2 pi n.t)
    const Vec2 t(0.07, -0.11);
    const Inclusion moved = Inclusion::disk(Vec2(0.5, 0.5) + t, 0.3);
    const Eigen::Vector2i n(3, 2);
    CHECK(std::abs(chi_fourier(moved, n) - chi_fourier(d, n) * std::polar(1.0, -2 * kPi * n.cast<double>().dot(t))) < 1e-14);
}

TEST_CASE("disk coefficients decay like |n|^{-3/2}") {
    const Inclusion d = Inclusion::disk({0.0, 0.0}, 0.3);
    // least-squares slope of log of the envelope over n in [20, 400]
    std::vector<double> lx, ly;
    for (int n = 20; n <= 400; n += 20) {
        double env = 0.0;
        for (int m = n; m < n + 10; ++m) env = std::max(env, std::abs(chi_fourier(d, Eigen::Vector2i(m, 0))));
        lx.push_back(std::log(double(n)));
        ly.push_back(std::log(env));
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    CHECK(std::abs(sxy / sxx + 1.5) < 0.2);
}

TEST_CASE("curve and polygon coefficients agree with closed forms") {
    const Inclusion circle = Inclusion::curve([](double s) {
        const double t = 2 * kPi * s;
        return CurveSample{Vec2(0.5, 0.5) + 0.3 * Vec2(std::cos(t), std::sin(t)), 0.6 * kPi * Vec2(-std::sin(t), std::cos(t)),
                           -1.2 * kPi * kPi * Vec2(std::cos(t), std::sin(t))};
    });
    const Inclusion disk = Inclusion::disk({0.5, 0.5}, 0.3);
    for (const auto& n : {Eigen::Vector2i(0, 0), Eigen::Vector2i(1, 2), Eigen::Vector2i(-4, 7)})
        CHECK(std::abs(chi_fourier(circle, n) - chi_fourier(disk, n)) < 1e-10);
    const Inclusion sq = Inclusion::square({0.5, 0.5}, 0.4);
    CHECK(chi_fourier(sq, {0, 0}).real() == doctest::Approx(0.16).epsilon(1e-14));
    // separable closed form: prod_c e^{-i 2 pi n_c 0.5} sin(pi n_c 0.4)/(pi n_c)
    auto f = [](int m) { return m == 0 ? std::complex<double>(0.4) : std::polar(std::sin(kPi * m * 0.4) / (kPi * m), -kPi * m); };
    for (const auto& n : {Eigen::Vector2i(1, 0), Eigen::Vector2i(2, 3), Eigen::Vector2i(-5, 1)})
        CHECK(std::abs(chi_fourier(sq, n) - f(n.x()) * f(n.y())) < 1e-13);
    const Inclusion el = ellipse({0.45, 0.55}, 0.3, 0.2);
    CHECK(chi_fourier(el, {0, 0}).real() == doctest::Approx(kPi * 0.06).epsilon(1e-10));
    CHECK(std::abs(chi_fourier(el, {2, 1}) - chi_grid(el, {2, 1}, 1200)) < 2e-4);
}

TEST_CASE("Galerkin matrices are Hermitian") {
    const PlaneWaveBasis b(Vec2(0.7, -1.2), 8);
    const InclusionSet two({Inclusion::disk({0.3, 0.3}, 0.15), Inclusion::disk({0.7, 0.65}, 0.2)});
    for (auto f : {Formulation::InverseRule, Formulation::Primal}) {
        const Eigen::MatrixXcd G = galerkin_matrix(b, two, 100.0, f);
        CHECK((G - G.adjoint()).norm() <= 1e-12 * G.norm());
    }
}

TEST_CASE("empty inclusion set gives k |2 pi n + alpha|^2") {
    const Vec2 a(0.4, -2.0);
    const OracleResult r = bloch_solve(InclusionSet{}, a, 7.0, 5, {8, Formulation::Primal, false});
    std::vector<double> ref;
    const PlaneWaveBasis b(a, 8);
    for (std::size_t i = 0; i < b.size(); ++i) ref.push_back(7.0 * b.wavevector(i).squaredNorm());
    std::sort(ref.begin(), ref.end());
    for (int i = 0; i < 5; ++i) CHECK(r.omega2[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    const OracleResult r2 = bloch_solve(InclusionSet{}, a, 7.0, 5, {8, Formulation::InverseRule, false});
    for (int i = 0; i < 5; ++i) CHECK(r2.omega2[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("frozen oracle values match an independent numpy implementation") {
    // dense numpy eigh of the inverse-rule operator, alpha = (pi, 0), z = 1e-6
    const BetaOracle b8 = beta_of_z_oracle(disk03(), Vec2(kPi, 0.0), 1e-6, 0, {8, Formulation::InverseRule, false});
    CHECK(b8.beta == doctest::Approx(1.555878553493e-02).epsilon(1e-10));
    const BetaOracle b12 = beta_of_z_oracle(disk03(), Vec2(kPi, 0.0), 1e-3, 0, {12, Formulation::InverseRule, false});
    CHECK(b12.beta == doctest::Approx(1.559255198808e-02).epsilon(1e-10));
}

TEST_CASE("oracle uses real arithmetic for centred disks and complex otherwise") {
    CHECK(bloch_solve(disk03(), Vec2(kPi, 0.0), 10.0, 1, {8, Formulation::InverseRule, false}).real_arithmetic);
    const InclusionSet off({Inclusion::disk({0.43, 0.5}, 0.3)});
    const OracleResult r = bloch_solve(off, Vec2(kPi, 0.0), 10.0, 1, {8, Formulation::InverseRule, false});
    CHECK_FALSE(r.real_arithmetic);
    // translation does not change the spectrum
    CHECK(r.omega2[0] == doctest::Approx(bloch_solve(disk03(), Vec2(kPi, 0.0), 10.0, 1, {8, Formulation::InverseRule, false}).omega2[0]).epsilon(1e-10));
}

TEST_CASE("primal and inverse-rule forms agree at moderate contrast") {
    const OracleResult p = bloch_solve(disk03(), Vec2(kPi, 0.5), 3.0, 3, {16, Formulation::Primal, false});
    const OracleResult q = bloch_solve(disk03(), Vec2(kPi, 0.5), 3.0, 3, {16, Formulation::InverseRule, false});
    for (int i = 0; i < 3; ++i) CHECK(std::abs(p.omega2[i] - q.omega2[i]) < 1e-2 * q.omega2[i]);
}

TEST_CASE("lowest eigenvalue is nondecreasing in k and approaches the Dirichlet limit") {
    double prev = 0.0;
    for (double k : {10.0, 100.0, 1000.0}) {
        const double w = bloch_solve(disk03(), Vec2(kPi, 0.0), k, 1, {12, Formulation::InverseRule, false}).omega2[0];
        CHECK(w >= prev);
        prev = w;
    }
    const OracleResult r = bloch_solve(disk03(), Vec2(kPi, 0.0), 1e4, 2, {16, Formulation::InverseRule, true});
    const double dirichlet = std::pow(2.404825557695773 / 0.3, 2);
    CHECK(std::abs(r.omega2[0] - dirichlet) < 0.02 * dirichlet);
    CHECK(r.estimate[0] > 0.0);
    CHECK(r.residual[0] < 1e-8);
    CHECK(r.omega2[1] >= r.omega2[0]);
}

TEST_CASE("square inclusion at high contrast matches the Dirichlet value") {
    const InclusionSet sq({Inclusion::square({0.5, 0.5}, 0.4)});
    const OracleResult r = bloch_solve(sq, Vec2(kPi, kPi), 1e4, 1, {16, Formulation::InverseRule, false});
    CHECK(std::abs(r.omega2[0] - 2 * kPi * kPi / 0.16) < 0.03 * 2 * kPi * kPi / 0.16);
}

TEST_CASE("periodic case drops the constant mode") {
    const OracleResult r = bloch_solve(disk03(), Vec2(0.0, 0.0), 1e3, 2, {12, Formulation::InverseRule, false});
    CHECK(r.omega2[0] > 1.0);
    CHECK(r.omega2[0] < 90.0);
}

TEST_CASE("guards") {
    CHECK_THROWS_AS(beta_of_z_oracle(disk03(), Vec2(kPi, 0.0), 0.0, 0), DomainError);
    CHECK_THROWS_AS(bloch_solve(disk03(), Vec2(kPi, 0.0), 10.0, 21), DomainError);
    CHECK_THROWS_AS(bloch_solve(disk03(), Vec2(kPi, 0.0), 10.0, 1, {200, Formulation::InverseRule, false}), ResolutionError);
}

TEST_CASE("oracle CSV") {
    const OracleResult r = bloch_solve(disk03(), Vec2(kPi, 0.0), 10.0, 2, {8, Formulation::InverseRule, false});
    std::ostringstream os;
    write_oracle_csv(os, r);
    const std::string s = os.str();
    CHECK(s.rfind("alpha_x,alpha_y,k,index,omega2,residual\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 3);
}
