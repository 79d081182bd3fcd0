#include "bloch/lattice_green.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;
constexpr double kRealCut = 40.0;  // e^{-40} is below double resolution of the summands

double expint_e1(double x) { return -std::expint(-x); }

// Ein(x) = E1(x) + gamma + ln x, entire, computed by series for small x.
double ein(double x) {
    if (x > 1.0) return expint_e1(x) + kEulerGamma + std::log(x);
    double term = x, sum = x;
    for (int k = 2; k < 40; ++k) {
        term *= -x / k;
        sum += term / k;
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

cplx phase(double a) { return {std::cos(a), std::sin(a)}; }

}  // namespace

QuasiMomentum::QuasiMomentum(Vec2 alpha) : alpha_(alpha), is_zero_(alpha.x() == 0.0 && alpha.y() == 0.0) {
    if (!PeriodCell::in_brillouin_zone(alpha)) throw DomainError("quasimomentum outside (-pi, pi]^2");
}

QuasiMomentum QuasiMomentum::negated() const { return QuasiMomentum(PeriodCell::wrap(-alpha_)); }

GreenEvaluator::GreenEvaluator(QuasiMomentum alpha, Mode mode, int fourier_cutoff, double ewald_eta)
    : alpha_(alpha), mode_(mode), cutoff_(fourier_cutoff), eta_(ewald_eta) {
    if (fourier_cutoff < 8) throw DomainError("fourier cutoff must be at least 8");
    if (!(ewald_eta > 0.0)) throw DomainError("ewald split must be positive");
    split_s_ = 1.0 / (4.0 * eta_ * eta_);
    const int R = spectral_radius_;
    const int L = 2 * R + 1;
    spec_w_.assign(L * L, 0.0);
    spec_w2_.assign(L * L, 0.0);
    for (int i = -R; i <= R; ++i)
        for (int j = -R; j <= R; ++j) {
            if (alpha_.is_zero() && i == 0 && j == 0) continue;
            const double qx = 2.0 * kPi * i + alpha_.x();
            const double qy = 2.0 * kPi * j + alpha_.y();
            const double q2 = qx * qx + qy * qy;
            const double e = std::exp(-split_s_ * q2);
            spec_w_[(i + R) * L + (j + R)] = e / q2;
            spec_w2_[(i + R) * L + (j + R)] = e * (1.0 / (q2 * q2) + split_s_ / q2);
        }
}

void GreenEvaluator::check_regular(const Vec2& r) const {
    const double dx = r.x() - std::round(r.x());
    const double dy = r.y() - std::round(r.y());
    if (dx * dx + dy * dy < 1e-28) throw DomainError("Green's function evaluated at a lattice point");
}

cplx GreenEvaluator::direct_sum(const Vec2& r, int M, Vec2c* grad) const {
    cplx sum = 0.0;
    Vec2c g = Vec2c::Zero();
    for (int i = -M; i <= M; ++i) {
        const double qx = 2.0 * kPi * i + alpha_.x();
        for (int j = -M; j <= M; ++j) {
            if (alpha_.is_zero() && i == 0 && j == 0) continue;
            const double qy = 2.0 * kPi * j + alpha_.y();
            const double q2 = qx * qx + qy * qy;
            const cplx e = phase(qx * r.x() + qy * r.y()) / q2;
            sum -= e;
            if (grad) {
                g[0] -= cplx(0, qx) * e;
                g[1] -= cplx(0, qy) * e;
            }
        }
    }
    if (grad) *grad = g;
    return sum;
}

void GreenEvaluator::ewald(const Vec2& r_in, bool skip_origin_image, cplx* value, Vec2c* grad, cplx* lap) const {
    // Reduce to the fundamental cell; quasi-periodicity restores the phase.
    const double mx = std::round(r_in.x()), my = std::round(r_in.y());
    const Vec2 r(r_in.x() - mx, r_in.y() - my);
    const cplx shift = phase(alpha_.x() * mx + alpha_.y() * my);
    const double eta2 = eta_ * eta_;
    cplx v = 0.0, lp = 0.0;
    Vec2c g = Vec2c::Zero();
    const int P = real_radius_;
    for (int px = -P; px <= P; ++px)
        for (int py = -P; py <= P; ++py) {
            if (skip_origin_image && px == 0 && py == 0) continue;
            const Vec2 d(r.x() - px, r.y() - py);
            const double rr = d.squaredNorm();
            const double x = eta2 * rr;
            if (x > kRealCut) continue;
            const cplx ph = phase(alpha_.x() * px + alpha_.y() * py);
            const double ex = std::exp(-x);
            if (value) v -= ph * expint_e1(x) / (4.0 * kPi);
            if (grad) {
                const cplx c = ph * ex / (2.0 * kPi * rr);
                g[0] += c * d.x();
                g[1] += c * d.y();
            }
            if (lap) lp -= ph * eta2 * ex / kPi;
        }
    const int R = spectral_radius_;
    const int L = 2 * R + 1;
    std::vector<cplx> ey(L);
    for (int j = -R; j <= R; ++j) ey[j + R] = phase((2.0 * kPi * j + alpha_.y()) * r.y());
    for (int i = -R; i <= R; ++i) {
        const double qx = 2.0 * kPi * i + alpha_.x();
        const cplx exi = phase(qx * r.x());
        for (int j = -R; j <= R; ++j) {
            const double w = spec_w_[(i + R) * L + (j + R)];
            if (w == 0.0) continue;
            const double qy = 2.0 * kPi * j + alpha_.y();
            const cplx e = exi * ey[j + R] * w;
            v -= e;
            if (grad) {
                g[0] -= cplx(0, qx) * e;
                g[1] -= cplx(0, qy) * e;
            }
            if (lap) lp += (qx * qx + qy * qy) * e;
        }
    }
    if (alpha_.is_zero()) v += split_s_;
    if (value) *value = shift * v;
    if (grad) *grad = shift * g;
    if (lap) *lap = shift * lp;
}

cplx GreenEvaluator::green(const Vec2& r) const {
    check_regular(r);
    if (mode_ == Mode::DirectSum) return direct_sum(r, cutoff_, nullptr);
    cplx v;
    ewald(r, false, &v, nullptr, nullptr);
    return v;
}

Vec2c GreenEvaluator::gradient(const Vec2& r) const {
    check_regular(r);
    Vec2c g;
    if (mode_ == Mode::DirectSum) {
        direct_sum(r, cutoff_, &g);
        return g;
    }
    ewald(r, false, nullptr, &g, nullptr);
    return g;
}

GreenValue GreenEvaluator::evaluate(const Vec2& r) const {
    check_regular(r);
    GreenValue out;
    if (mode_ == Mode::DirectSum) {
        out.value = direct_sum(r, cutoff_, &out.gradient);
        return out;
    }
    ewald(r, false, &out.value, &out.gradient, nullptr);
    return out;
}

cplx GreenEvaluator::laplacian(const Vec2& r) const {
    check_regular(r);
    cplx lp;
    ewald(r, false, nullptr, nullptr, &lp);
    return lp;
}

cplx GreenEvaluator::adjoint_dl_kernel(const Vec2& x, const Vec2& nu_x, const Vec2& y) const {
    if ((x - y).squaredNorm() == 0.0) throw DomainError("adjoint double-layer kernel at coincident points");
    const Vec2c g = gradient(x - y);
    return nu_x.x() * g[0] + nu_x.y() * g[1];
}

cplx GreenEvaluator::smooth_remainder(const Vec2& r) const {
    if (r.norm() > 0.5) throw DomainError("smooth remainder is defined near the origin only");
    cplx rest;
    ewald(r, true, &rest, nullptr, nullptr);
    const double x = eta_ * eta_ * r.squaredNorm();
    return rest + (kEulerGamma + std::log(eta_ * eta_) - ein(x)) / (4.0 * kPi);
}

Vec2c GreenEvaluator::smooth_remainder_gradient_at_zero() const {
    Vec2c g;
    ewald(Vec2::Zero(), true, nullptr, &g, nullptr);
    return g;
}

double GreenEvaluator::direct_tail_estimate(const Vec2& r) const {
    check_regular(r);
    return std::abs(direct_sum(r, cutoff_, nullptr) - direct_sum(r, cutoff_ / 2, nullptr));
}

cplx GreenEvaluator::ewald_biharmonic(const Vec2& r_in, bool skip_origin_image) const {
    const double mx = std::round(r_in.x()), my = std::round(r_in.y());
    const Vec2 r(r_in.x() - mx, r_in.y() - my);
    const cplx shift = phase(alpha_.x() * mx + alpha_.y() * my);
    const double eta2 = eta_ * eta_;
    cplx v = 0.0;
    const int P = real_radius_;
    for (int px = -P; px <= P; ++px)
        for (int py = -P; py <= P; ++py) {
            if (skip_origin_image && px == 0 && py == 0) continue;
            const Vec2 d(r.x() - px, r.y() - py);
            const double rr = d.squaredNorm();
            const double x = eta2 * rr;
            if (x > kRealCut) continue;
            const cplx ph = phase(alpha_.x() * px + alpha_.y() * py);
            const double e1 = rr > 0.0 ? expint_e1(x) : 0.0;
            v += ph * (std::exp(-x) / (16.0 * kPi * eta2) - rr * e1 / (16.0 * kPi));
        }
    const int R = spectral_radius_;
    const int L = 2 * R + 1;
    for (int i = -R; i <= R; ++i) {
        const double qx = 2.0 * kPi * i + alpha_.x();
        for (int j = -R; j <= R; ++j) {
            const double w = spec_w2_[(i + R) * L + (j + R)];
            if (w == 0.0) continue;
            const double qy = 2.0 * kPi * j + alpha_.y();
            v += phase(qx * r.x() + qy * r.y()) * w;
        }
    }
    if (alpha_.is_zero()) v -= 0.5 * split_s_ * split_s_;
    return shift * v;
}

cplx GreenEvaluator::biharmonic(const Vec2& r) const { return ewald_biharmonic(r, false); }

cplx GreenEvaluator::biharmonic_smooth_remainder(const Vec2& r) const {
    if (r.norm() > 0.5) throw DomainError("smooth remainder is defined near the origin only");
    const double eta2 = eta_ * eta_;
    const double rr = r.squaredNorm();
    const double x = eta2 * rr;
    // Origin image: e^{-x}/(16 pi eta^2) - rr E1(x)/(16 pi) with E1 = Ein - gamma - ln x.
    const double origin = std::exp(-x) / (16.0 * kPi * eta2) -
                          rr * (ein(x) - kEulerGamma - std::log(eta2)) / (16.0 * kPi);
    return ewald_biharmonic(r, true) + origin;
}

GridFunction apply_inverse_laplacian_coefficients(const QuasiMomentum& alpha, const Eigen::MatrixXcd& coeffs,
                                                  int n_grid) {
    const int L = static_cast<int>(coeffs.rows());
    if (coeffs.cols() != L || L % 2 == 0) throw ContractError("coefficient block must be square with odd size");
    const int M = (L - 1) / 2;
    if (n_grid < L) throw ContractError("sample grid too coarse for the coefficient block");
    if (alpha.is_zero() && std::abs(coeffs(M, M)) > 1e-12 * std::max(1.0, coeffs.norm()))
        throw ContractError("zero-mean input required at alpha = 0");
    Eigen::MatrixXcd spec = Eigen::MatrixXcd::Zero(n_grid, n_grid);
    for (int i = -M; i <= M; ++i)
        for (int j = -M; j <= M; ++j) {
            if (alpha.is_zero() && i == 0 && j == 0) continue;
            const double qx = 2.0 * kPi * i + alpha.x();
            const double qy = 2.0 * kPi * j + alpha.y();
            spec((i + n_grid) % n_grid, (j + n_grid) % n_grid) = coeffs(i + M, j + M) / (qx * qx + qy * qy);
        }
    Eigen::FFT<double> fft;
    Eigen::MatrixXcd tmp(n_grid, n_grid), out(n_grid, n_grid);
    Eigen::VectorXcd in(n_grid), res(n_grid);
    for (int j = 0; j < n_grid; ++j) {
        in = spec.col(j);
        fft.inv(res, in);
        tmp.col(j) = res * double(n_grid);
    }
    for (int i = 0; i < n_grid; ++i) {
        in = tmp.row(i).transpose();
        fft.inv(res, in);
        out.row(i) = res.transpose() * double(n_grid);
    }
    for (int i = 0; i < n_grid; ++i)
        for (int j = 0; j < n_grid; ++j)
            out(i, j) *= phase(alpha.x() * i / n_grid + alpha.y() * j / n_grid);
    return out;
}

GridFunction apply_inverse_laplacian(const QuasiMomentum& alpha, const GridFunction& f, int M) {
    const int n = static_cast<int>(f.rows());
    if (f.cols() != n || n < 2) throw ContractError("grid function must be square");
    // Periodic part f e^{-i alpha.x}, forward transform.
    Eigen::MatrixXcd per(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) per(i, j) = f(i, j) * phase(-(alpha.x() * i + alpha.y() * j) / n);
    Eigen::FFT<double> fft;
    Eigen::MatrixXcd tmp(n, n), spec(n, n);
    Eigen::VectorXcd in(n), res(n);
    for (int j = 0; j < n; ++j) {
        in = per.col(j);
        fft.fwd(res, in);
        tmp.col(j) = res;
    }
    for (int i = 0; i < n; ++i) {
        in = tmp.row(i).transpose();
        fft.fwd(res, in);
        spec.row(i) = res.transpose() / double(n * n);
    }
    const int Mc = std::min(M, (n - 1) / 2);
    if (alpha.is_zero() && std::abs(spec(0, 0)) > 1e-12 * std::max(1.0, f.cwiseAbs().maxCoeff()))
        throw ContractError("zero-mean input required at alpha = 0");
    Eigen::MatrixXcd coeffs = Eigen::MatrixXcd::Zero(2 * Mc + 1, 2 * Mc + 1);
    for (int i = -Mc; i <= Mc; ++i)
        for (int j = -Mc; j <= Mc; ++j) coeffs(i + Mc, j + Mc) = spec((i + n) % n, (j + n) % n);
    if (alpha.is_zero()) coeffs(Mc, Mc) = 0.0;
    return apply_inverse_laplacian_coefficients(alpha, coeffs, n);
}

}  // namespace bloch
