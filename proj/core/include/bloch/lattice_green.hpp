#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <vector>

#include "bloch/errors.hpp"
#include "bloch/geometry.hpp"

namespace bloch {

using cplx = std::complex<double>;
using Vec2c = Eigen::Vector2cd;

class QuasiMomentum {
public:
    QuasiMomentum() = default;
    /// Throws DomainError unless both components lie in (-pi, pi].
    explicit QuasiMomentum(Vec2 alpha);
    QuasiMomentum(double ax, double ay) : QuasiMomentum(Vec2(ax, ay)) {}

    const Vec2& value() const { return alpha_; }
    double x() const { return alpha_.x(); }
    double y() const { return alpha_.y(); }
    bool is_zero() const { return is_zero_; }
    double norm2() const { return alpha_.squaredNorm(); }
    QuasiMomentum negated() const;

private:
    Vec2 alpha_ = Vec2::Zero();
    bool is_zero_ = true;
};

struct GreenValue {
    cplx value;
    Vec2c gradient;
};

class GreenEvaluator {
public:
    enum class Mode { Ewald, DirectSum };

    explicit GreenEvaluator(QuasiMomentum alpha, Mode mode = Mode::Ewald, int fourier_cutoff = 32,
                            double ewald_eta = std::sqrt(std::numbers::pi));

    const QuasiMomentum& alpha() const { return alpha_; }
    Mode mode() const { return mode_; }
    int cutoff() const { return cutoff_; }
    double eta() const { return eta_; }

    /// G^alpha(r), r = x - y. Throws DomainError at lattice points.
    cplx green(const Vec2& r) const;
    Vec2c gradient(const Vec2& r) const;
    GreenValue evaluate(const Vec2& r) const;
    /// Trace of the Hessian; vanishes off the lattice (up to the mean term -1 at alpha = 0).
    cplx laplacian(const Vec2& r) const;

    /// nu_x . grad_x G(x - y).
    cplx adjoint_dl_kernel(const Vec2& x, const Vec2& nu_x, const Vec2& y) const;

    /// G(r) - (1/2pi) log|r| for |r| small, including r = 0.
    cplx smooth_remainder(const Vec2& r) const;
    /// Gradient of the smooth remainder at r = 0.
    Vec2c smooth_remainder_gradient_at_zero() const;

    /// Direct-sum tail estimate |G_M(r) - G_{M/2}(r)|.
    double direct_tail_estimate(const Vec2& r) const;

    /// Lattice sum sum_n e^{i q.r}/|q|^4 (n = 0 omitted at alpha = 0).
    cplx biharmonic(const Vec2& r) const;
    /// biharmonic(r) - (1/8pi) |r|^2 log|r|, valid at r = 0.
    cplx biharmonic_smooth_remainder(const Vec2& r) const;

private:
    QuasiMomentum alpha_;
    Mode mode_;
    int cutoff_;
    double eta_;
    double split_s_;
    int real_radius_ = 4;
    int spectral_radius_ = 4;
    std::vector<double> spec_w_;   // e^{-s q^2}/q^2
    std::vector<double> spec_w2_;  // e^{-s q^2}(1/q^4 + s/q^2)

    cplx direct_sum(const Vec2& r, int M, Vec2c* grad) const;
    void ewald(const Vec2& r, bool skip_origin_image, cplx* value, Vec2c* grad, cplx* lap) const;
    cplx ewald_biharmonic(const Vec2& r, bool skip_origin_image) const;
    void check_regular(const Vec2& r) const;
};

/// Square grid function on Y sampled at x_ij = (i/n, j/n), row index i along x.
using GridFunction = Eigen::MatrixXcd;

/// Applies (-Delta_alpha)^{-1} to a grid function by FFT; modes with |n|_inf > M are dropped.
GridFunction apply_inverse_laplacian(const QuasiMomentum& alpha, const GridFunction& f, int M);

/// Same operator on Fourier coefficients c(n) of e^{i(2 pi n + alpha).x}, indexed n in [-M, M]^2,
/// synthesized on an n_grid x n_grid sample grid.
GridFunction apply_inverse_laplacian_coefficients(const QuasiMomentum& alpha, const Eigen::MatrixXcd& coeffs,
                                                  int n_grid);

}  // namespace bloch
