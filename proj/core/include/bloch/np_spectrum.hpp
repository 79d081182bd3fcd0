#pragma once

#include <Eigen/Dense>

#include <ostream>

#include "bloch/geometry.hpp"
#include "bloch/lattice_green.hpp"

namespace bloch {

/// Nystrom discretizations of the single layer S and the adjoint double layer K* on a boundary mesh.
struct LayerOperators {
    QuasiMomentum alpha;
    BoundaryMesh mesh;
    Eigen::MatrixXcd S;
    Eigen::MatrixXcd Kstar;
    Eigen::VectorXd w;

    std::size_t size() const { return static_cast<std::size_t>(S.rows()); }
    /// Hermitian part of -W S, the Gram matrix of the (-S)-inner product on densities.
    Eigen::MatrixXcd gram() const;
    /// Orthonormal basis of the admissible density space (weighted-mean-zero at alpha = 0, everything otherwise).
    Eigen::MatrixXcd admissible_basis() const;
};

LayerOperators assemble(const BoundaryMesh& mesh, const GreenEvaluator& ev);

/// Kress log-quadrature weights R_j for n equispaced nodes.
Eigen::VectorXd kress_weights(std::size_t n);

/// ||S K* - K S|| / ||S|| with K = W^{-1} K*^H W.
double plemelj_residual(const LayerOperators& ops);

struct NPSpectrum {
    QuasiMomentum alpha;
    Eigen::VectorXd mu;           ///< ascending
    Eigen::MatrixXcd densities;   ///< columns orthonormal in the (-S)-inner product
    double mu_minus = 0.0;
    double mu_plus = 0.0;
    int half_count = 0;           ///< eigenvalues identified with 1/2
    double eps_d = 0.0;           ///< discretization slack
    double hermitian_residue = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(mu.size()); }
};

/// Tolerance used to identify eigenvalues with 1/2.
inline constexpr double kHalfTolerance = 1e-6;

NPSpectrum resonance_spectrum(const LayerOperators& ops);

/// Removes the components along the mu = 1/2 eigendensities in the (-S)-inner product.
Eigen::VectorXcd project_W3_density(const LayerOperators& ops, const Eigen::VectorXcd& rho);

/// CSV rows: alpha_x, alpha_y, index, mu.
void write_np_csv(std::ostream& os, const NPSpectrum& spec, bool header = true);

}  // namespace bloch
