#pragma once

#include <Eigen/Dense>

#include <complex>
#include <ostream>
#include <vector>

#include "bloch/geometry.hpp"

namespace bloch {

/// Plane waves exp(i(2 pi n + alpha).x), |n|_inf <= M; at alpha = 0 the constant mode is dropped.
class PlaneWaveBasis {
public:
    PlaneWaveBasis(const Vec2& alpha, int cutoff);

    const Vec2& alpha() const { return alpha_; }
    int cutoff() const { return cutoff_; }
    std::size_t size() const { return index_.size(); }
    const Eigen::Vector2i& index(std::size_t i) const { return index_[i]; }
    /// 2 pi n + alpha
    Vec2 wavevector(std::size_t i) const;

private:
    Vec2 alpha_;
    int cutoff_;
    std::vector<Eigen::Vector2i> index_;
};

/// int_D e^{-i 2 pi n.x} dx summed over the inclusions.
std::complex<double> chi_fourier(const Inclusion& inclusion, const Eigen::Vector2i& n);
std::complex<double> chi_fourier(const InclusionSet& set, const Eigen::Vector2i& n);

enum class Formulation {
    /// Toeplitz of the inverse coefficient inverted (Laurent rule); stable at high contrast.
    InverseRule,
    /// Galerkin matrix of the form B_k with a = k - (k - 1) chi_D, scaled by 1/k.
    Primal
};

struct OracleOptions {
    int cutoff = 24;
    Formulation formulation = Formulation::InverseRule;
    /// Repeat at cutoff/2 and report |lambda_M - lambda_{M/2}| as the error estimate.
    bool refine = true;
};

struct OracleResult {
    Vec2 alpha = Vec2::Zero();
    double contrast = 0.0;
    int cutoff = 0;
    Eigen::VectorXd omega2;     ///< ascending
    Eigen::VectorXd residual;   ///< ||H v - lambda v|| / lambda
    Eigen::VectorXd estimate;   ///< refinement error estimate per eigenvalue, 0 without refinement
    bool real_arithmetic = false;
};

/// Hermitian operator whose eigenvalues are omega^2 (inverse rule) or omega^2 / k (primal).
Eigen::MatrixXcd galerkin_matrix(const PlaneWaveBasis& basis, const InclusionSet& set, double contrast,
                                 Formulation formulation = Formulation::InverseRule);

/// Lowest `count` Bloch eigenvalues of -div(a grad u) = omega^2 u with a = 1 in D, k outside.
OracleResult bloch_solve(const InclusionSet& set, const Vec2& alpha, double contrast, int count,
                         const OracleOptions& options = {});

struct BetaOracle {
    double beta = 0.0;
    double slack = 0.0;  ///< refinement estimate carried to 1/omega^2
};

/// 1 / omega_j^2 at contrast 1/z (j zero-based, ascending omega^2).
BetaOracle beta_of_z_oracle(const InclusionSet& set, const Vec2& alpha, double z, int j, const OracleOptions& options = {});

/// CSV rows: alpha_x, alpha_y, k, index, omega2, residual.
void write_oracle_csv(std::ostream& os, const OracleResult& r, bool header = true);

/// Largest basis size accepted by the dense solver.
inline constexpr std::size_t kMaxOracleBasis = 100000;

}  // namespace bloch
