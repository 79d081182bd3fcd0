#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "bloch/lattice_green.hpp"

using namespace bloch;

namespace {
constexpr double kPi = std::numbers::pi;

cplx direct_biharmonic(const QuasiMomentum& a, const Vec2& r, int M) {
    cplx s = 0.0;
    for (int i = -M; i <= M; ++i)
        for (int j = -M; j <= M; ++j) {
            if (a.is_zero() && i == 0 && j == 0) continue;
            const double qx = 2 * kPi * i + a.x(), qy = 2 * kPi * j + a.y();
            const double q2 = qx * qx + qy * qy;
            s += std::polar(1.0, qx * r.x() + qy * r.y()) / (q2 * q2);
        }
    return s;
}
}  // namespace

TEST_CASE("quasimomentum validation") {
    CHECK_NOTHROW(QuasiMomentum(kPi, kPi));
    CHECK_THROWS_AS(QuasiMomentum(-kPi, 0.0), DomainError);
    CHECK_THROWS_AS(QuasiMomentum(4.0, 0.0), DomainError);
    CHECK(QuasiMomentum(0.0, 0.0).is_zero());
    CHECK_FALSE(QuasiMomentum(1e-300, 0.0).is_zero());
}

TEST_CASE("direct sum self-convergence at alpha = (pi, pi)") {
    const QuasiMomentum a(kPi, kPi);
    const Vec2 r(0.5, 0.5);
    const cplx g200 = GreenEvaluator(a, GreenEvaluator::Mode::DirectSum, 200).green(r);
    const cplx g400 = GreenEvaluator(a, GreenEvaluator::Mode::DirectSum, 400).green(r);
    CHECK(std::abs(g200 - g400) < 1e-6);
}

TEST_CASE("ewald agrees with the direct sum within its tail estimate") {
    for (const auto& [ax, ay, rx, ry] : std::vector<std::array<double, 4>>{
             {kPi, kPi, 0.5, 0.5}, {1.0, 0.3, 0.3, 0.2}, {0.0, 0.0, 0.3, 0.2}, {kPi, 0.0, -0.41, 0.07}}) {
        const QuasiMomentum a(ax, ay);
        const Vec2 r(rx, ry);
        const GreenEvaluator direct(a, GreenEvaluator::Mode::DirectSum, 256);
        const cplx ge = GreenEvaluator(a).green(r);
        const double tail = direct.direct_tail_estimate(r);
        CHECK(std::abs(ge - direct.green(r)) <= 2.0 * tail + 1e-12);
    }
}

TEST_CASE("alpha = 0 Green's function is real") {
    const GreenEvaluator ev(QuasiMomentum(0.0, 0.0));
    CHECK(std::abs(ev.green({0.5, 0.5}).imag()) < 1e-12);
    CHECK(std::abs(ev.green({0.13, -0.37}).imag()) < 1e-12);
}

TEST_CASE("conjugate symmetry G(r) = conj G(-r)") {
    const GreenEvaluator ev(QuasiMomentum(1.0, 0.3));
    const Vec2 r(0.2, 0.1);
    CHECK(std::abs(ev.green(r) - std::conj(ev.green(-r))) < 1e-12);
}

TEST_CASE("quasi-periodicity of the Ewald sum") {
    const QuasiMomentum a(1.0, -2.0);
    const GreenEvaluator ev(a);
    const Vec2 r(0.21, 0.33);
    const cplx shifted = ev.green(r + Vec2(1.0, -1.0));
    CHECK(std::abs(shifted - std::polar(1.0, a.x() - a.y()) * ev.green(r)) < 1e-12);
}

TEST_CASE("gradient matches central differences") {
    const GreenEvaluator ev(QuasiMomentum(0.7, -1.2));
    const Vec2 r(0.23, -0.14);
    const Vec2c g = ev.gradient(r);
    const double h = 1e-5;
    const cplx dx = (ev.green(r + Vec2(h, 0)) - ev.green(r - Vec2(h, 0))) / (2 * h);
    const cplx dy = (ev.green(r + Vec2(0, h)) - ev.green(r - Vec2(0, h))) / (2 * h);
    CHECK(std::abs(g[0] - dx) < 1e-8);
    CHECK(std::abs(g[1] - dy) < 1e-8);
}

TEST_CASE("laplacian vanishes off the lattice, equals -1 at alpha = 0") {
    CHECK(std::abs(GreenEvaluator(QuasiMomentum(kPi, 0.0)).laplacian({0.3, 0.1})) < 1e-10);
    CHECK(std::abs(GreenEvaluator(QuasiMomentum(0.0, 0.0)).laplacian({0.3, 0.1}) + 1.0) < 1e-10);
}

TEST_CASE("singular points raise domain errors") {
    const GreenEvaluator ev(QuasiMomentum(kPi, 0.0));
    CHECK_THROWS_AS(ev.green({0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(ev.green({1.0, -2.0}), DomainError);
    CHECK_THROWS_AS(ev.adjoint_dl_kernel({0.2, 0.2}, {1.0, 0.0}, {0.2, 0.2}), DomainError);
}

TEST_CASE("smooth remainder is continuous at the origin") {
    for (const auto& a : {QuasiMomentum(kPi, 0.0), QuasiMomentum(0.0, 0.0), QuasiMomentum(0.5, 0.5)}) {
        const GreenEvaluator ev(a);
        const cplx r0 = ev.smooth_remainder(Vec2::Zero());
        const Vec2 r(1e-4, 2e-4);
        const cplx expected = ev.green(r) - std::log(r.norm()) / (2 * kPi);
        CHECK(std::abs(ev.smooth_remainder(r) - expected) < 1e-12);
        const Vec2c g0 = ev.smooth_remainder_gradient_at_zero();
        CHECK(std::abs(ev.smooth_remainder(r) - r0 - (g0[0] * r.x() + g0[1] * r.y())) < 1e-6);
    }
}

TEST_CASE("adjoint double-layer kernel tends to the curvature limit on a circle") {
    const QuasiMomentum a(kPi, 0.0);
    const GreenEvaluator ev(a);
    const double rad = 0.3;
    const Vec2 c(0.5, 0.5);
    const Vec2 nu(1.0, 0.0);
    const Vec2 x = c + rad * nu;
    const Vec2c g0 = ev.smooth_remainder_gradient_at_zero();
    const cplx limit = 1.0 / (4 * kPi * rad) + g0[0];
    for (double t : {1e-2, 1e-3, 1e-4}) {
        const Vec2 y = c + rad * Vec2(std::cos(t), std::sin(t));
        CHECK(std::abs(ev.adjoint_dl_kernel(x, nu, y) - limit) < 5.0 * t);
    }
}

TEST_CASE("alpha = 0 kernel is invariant under 180 degree rotation of a centred disk") {
    const GreenEvaluator ev(QuasiMomentum(0.0, 0.0));
    const Vec2 c(0.5, 0.5);
    const double t = 0.7, s = 2.1, rad = 0.3;
    auto pt = [&](double u) { return Vec2(c + rad * Vec2(std::cos(u), std::sin(u))); };
    auto nrm = [](double u) { return Vec2(std::cos(u), std::sin(u)); };
    const cplx k1 = ev.adjoint_dl_kernel(pt(t), nrm(t), pt(s));
    const cplx k2 = ev.adjoint_dl_kernel(pt(t + kPi), nrm(t + kPi), pt(s + kPi));
    CHECK(std::abs(k1 - k2) < 1e-12);
}

TEST_CASE("sampled Green matrix is Hermitian") {
    const GreenEvaluator ev(QuasiMomentum(1.0, 0.3));
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.2, 0.8);
    std::vector<Vec2> pts(12);
    for (auto& p : pts) p = Vec2(u(rng), u(rng));
    Eigen::MatrixXcd G(12, 12);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) G(i, j) = i == j ? ev.smooth_remainder(Vec2::Zero()) : ev.green(pts[i] - pts[j]);
    CHECK((G - G.adjoint()).norm() < 1e-10 * G.norm());
}

TEST_CASE("biharmonic lattice sum matches its direct sum") {
    for (const auto& a : {QuasiMomentum(kPi, 0.0), QuasiMomentum(0.0, 0.0), QuasiMomentum(1.0, 0.3)}) {
        const GreenEvaluator ev(a);
        for (const Vec2& r : {Vec2(0.3, 0.2), Vec2(-0.45, 0.1), Vec2(0.02, 0.0)}) {
            const cplx d = direct_biharmonic(a, r, 200);
            CHECK(std::abs(ev.biharmonic(r) - d) < 1e-9);
            const cplx rem = d - r.squaredNorm() * std::log(r.norm()) / (8 * kPi);
            CHECK(std::abs(ev.biharmonic_smooth_remainder(r) - rem) < 1e-9);
        }
        // At the origin the direct sum converges only like 1/M^2.
        const cplx e0 = ev.biharmonic_smooth_remainder(Vec2::Zero());
        const double err200 = std::abs(e0 - direct_biharmonic(a, Vec2::Zero(), 200));
        const double err400 = std::abs(e0 - direct_biharmonic(a, Vec2::Zero(), 400));
        CHECK(err200 < 1e-7);
        CHECK(err400 < 0.3 * err200);
    }
}

TEST_CASE("inverse Laplacian acts diagonally on a single mode") {
    const QuasiMomentum a(kPi, 0.0);
    const int n = 16;
    GridFunction f(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f(i, j) = std::polar(1.0, (2 * kPi + kPi) * i / double(n));
    const GridFunction u = apply_inverse_laplacian(a, f, 6);
    CHECK((u - f / (9 * kPi * kPi)).norm() < 1e-13);
}

TEST_CASE("inverse Laplacian rejects constants at alpha = 0") {
    GridFunction f = GridFunction::Constant(8, 8, 1.0);
    CHECK_THROWS_AS(apply_inverse_laplacian(QuasiMomentum(0.0, 0.0), f, 3), ContractError);
}

TEST_CASE("inverse Laplacian: Poincare bound, positivity, self-adjointness") {
    std::mt19937 rng(11);
    std::normal_distribution<double> nd;
    const int n = 32, M = 6;
    auto random_band_limited = [&](const QuasiMomentum& a) {
        Eigen::MatrixXcd c(2 * M + 1, 2 * M + 1);
        for (int i = 0; i < c.rows(); ++i)
            for (int j = 0; j < c.cols(); ++j) c(i, j) = cplx(nd(rng), nd(rng));
        if (a.is_zero()) c(M, M) = 0.0;
        GridFunction f = GridFunction::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int p = -M; p <= M; ++p)
                    for (int q = -M; q <= M; ++q)
                        f(i, j) += c(p + M, q + M) *
                                   std::polar(1.0, (2 * kPi * p + a.x()) * i / double(n) + (2 * kPi * q + a.y()) * j / double(n));
        return f;
    };
    for (const auto& a : {QuasiMomentum(kPi, 0.0), QuasiMomentum(0.4, -1.1), QuasiMomentum(0.0, 0.0)}) {
        const GridFunction f = random_band_limited(a);
        const GridFunction g = random_band_limited(a);
        const GridFunction u = apply_inverse_laplacian(a, f, M);
        const GridFunction v = apply_inverse_laplacian(a, g, M);
        const cplx uf = (f.conjugate().array() * u.array()).sum();
        CHECK(uf.real() >= -1e-12);
        CHECK(std::abs(uf.imag()) < 1e-10 * std::abs(uf));
        const cplx ug = (g.conjugate().array() * u.array()).sum();
        const cplx fv = (v.conjugate().array() * f.array()).sum();
        CHECK(std::abs(ug - fv) < 1e-10 * std::abs(ug));
        if (!a.is_zero()) CHECK(u.norm() <= f.norm() / a.norm2() * (1 + 1e-12));
        else CHECK(u.norm() <= f.norm() / (4 * kPi * kPi) * (1 + 1e-12));
    }
}
