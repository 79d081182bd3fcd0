#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "bloch/certificates.hpp"
#include "bloch/limit_spectrum.hpp"
#include "bloch/np_spectrum.hpp"

namespace bloch {

struct ChainSettings {
    int boundary_nodes = 128;  ///< per inclusion
    /// Pairs of order n >= 1 enter as cos/sin (Cos or Sin) or as e^{+in}/e^{-in} (ExpPlus or ExpMinus).
    DiskMode::Angular pair_basis = DiskMode::Angular::Cos;
};

/// Discrete operators on the mixed space span{Dirichlet modes} + span{single layers}.
///
/// Coordinates are (c, rho) with u = sum_j c_j psi_j + S_D[Z rho]; Z spans the admissible densities.
/// The L^2 Gram matrix is [[Mff, Mfw], [Mfw^H, Mww]] and the H^1 Gram matrix is diag(delta, Gw).
class OperatorChain {
public:
    static OperatorChain build(const InclusionSet& set, const QuasiMomentum& alpha, const DirichletSpectrum& spec,
                               const LimitSpectrum& limit, std::size_t group, const ChainSettings& settings = {});

    const QuasiMomentum& alpha() const { return alpha_; }
    const LayerOperators& layers() const { return ops_; }
    const NPSpectrum& np() const { return np_; }
    double beta0() const { return beta0_; }
    int multiplicity() const { return static_cast<int>(c0_.cols()); }
    bool dirichlet_group() const { return dirichlet_group_; }
    std::size_t mode_count() const { return modes_.size(); }
    std::size_t density_count() const { return static_cast<std::size_t>(Z_.cols()); }
    const std::vector<DiskMode>& modes() const { return modes_; }

    const Eigen::VectorXd& delta() const { return delta_; }
    /// Interior normal derivatives of the modes at the boundary nodes (mode x node).
    const Eigen::MatrixXcd& mode_traces() const { return dpsi_; }
    const Eigen::MatrixXcd& Mff() const { return Mff_; }
    const Eigen::MatrixXcd& Mfw() const { return Mfw_; }
    const Eigen::MatrixXcd& Mww() const { return Mww_; }
    const Eigen::MatrixXcd& Z() const { return Z_; }
    const Eigen::MatrixXcd& Gw() const { return Gw_; }
    /// Hermitized G_w^{-1} Herm(G_w K*) on the admissible densities.
    const Eigen::MatrixXcd& Kstar() const { return Kt_; }
    double kstar_condition() const { return kstar_cond_; }

    /// Eigenvectors of D^{-1} Mff, orthonormal in Mff, with eigenvalues (ascending).
    const Eigen::MatrixXcd& eigvecs() const { return E_; }
    const Eigen::VectorXd& eigvals() const { return lam_; }
    /// Columns of eigvecs() spanning the group.
    const std::vector<Eigen::Index>& group_columns() const { return group_; }
    /// Group basis in mode coordinates, c0^H Mff c0 = I.
    const Eigen::MatrixXcd& group_basis() const { return c0_; }
    /// Interior normal derivative of group member k at the nodes.
    Eigen::VectorXcd group_trace(int k) const;
    /// Distance from beta0 to the nearest other eigenvalue of the discrete A(0), halved.
    double gap() const { return gap_; }

    /// || psi ||_{L^2(D)} of group member k.
    double group_norm(int k) const;

private:
    QuasiMomentum alpha_;
    LayerOperators ops_;
    NPSpectrum np_;
    std::vector<DiskMode> modes_;
    Eigen::VectorXd delta_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXcd dpsi_;
    Eigen::MatrixXcd Mff_, Mfw_, Mww_;
    Eigen::MatrixXcd Z_, Gw_, Kt_;
    double kstar_cond_ = 0.0;
    Eigen::MatrixXcd E_;
    Eigen::VectorXd lam_;
    std::vector<Eigen::Index> group_;
    Eigen::MatrixXcd c0_;
    double beta0_ = 0.0;
    double gap_ = 0.0;
    bool dirichlet_group_ = false;
};

/// L^2 Gram matrix of nodal single layers, int_Y conj(S e_i) S e_k, with Kress correction of the r^2 log r kernel.
Eigen::MatrixXcd single_layer_mass(const LayerOperators& ops, const GreenEvaluator& ev);

struct InverseLaplacianDecomposition {
    Eigen::VectorXcd density;  ///< d_n phi on the boundary nodes
    double interior_sign = 1.0;
    double beta0 = 0.0;
    double residual = 0.0;     ///< max over sample points away from the boundary
    int sample_points = 0;
};

/// (-Delta)^{-1} phi = beta0 (phi + S_D[d_n phi]), checked against a plane-wave evaluation on a 64 x 64 grid.
InverseLaplacianDecomposition inverse_laplacian_of_eigenfunction(const OperatorChain& chain, int member = 0);

struct Corrector {
    Eigen::VectorXcd psi;      ///< (K* + 1/2) psi = d_n phi
    Eigen::VectorXcd trace;    ///< v = S psi on the nodes
    double energy = 0.0;       ///< int_{Y \ D} |grad v|^2
    double energy_imag = 0.0;
    double neumann_residual = 0.0;
    double condition = 0.0;
};

Corrector corrector(const OperatorChain& chain, int member = 0);
/// Corrector for an arbitrary boundary trace.
Corrector corrector_for_trace(const LayerOperators& ops, const Eigen::VectorXcd& dn_phi);

/// max |Delta v| over points of Y \ D at least `clearance` from the boundary.
double corrector_harmonicity(const OperatorChain& chain, const Corrector& c, int samples_per_side = 16,
                             double clearance = 0.05);

/// beta0^2 E, averaged over the group.
double coefficient_beta1(const OperatorChain& chain);

enum class SeriesMethod { LayerRS, ContourTrace };
std::string to_string(SeriesMethod m);

struct LayerSeries {
    std::vector<std::complex<double>> beta;  ///< beta_1..beta_N
    double imag_residue = 0.0;
};

/// Rayleigh-Schrodinger recursion with boundary-density transfer factors; m = 1 only.
LayerSeries coefficients_layer_rs(const OperatorChain& chain, int order);

struct ContourSeries {
    std::vector<std::complex<double>> beta;
    Eigen::MatrixXcd P0;
    Eigen::MatrixXcd P1;
    double rank = 0.0;          ///< tr P0
    double radius = 0.0;
    int points = 0;
    double imag_residue = 0.0;
};

/// Trace formula on a circle of the given radius about beta0 (radius <= 0 uses chain.gap()).
ContourSeries coefficients_contour(const OperatorChain& chain, int order, int points = 32, double radius = 0.0,
                                   bool projections = true);

struct SeriesExpansion {
    QuasiMomentum alpha;
    int m = 1;
    double beta0 = 0.0;
    std::vector<std::complex<double>> coeffs;  ///< beta_1..beta_N
    std::vector<SeriesMethod> methods;
    std::optional<Certificate> certificate;
    double imag_residue = 0.0;
};

inline constexpr int kDefaultOrder = 6;

/// Layer path for simple values, contour path otherwise.
SeriesExpansion expand(const OperatorChain& chain, int order = kDefaultOrder, int contour_points = 32);

struct SeriesEvaluation {
    std::complex<double> beta_hat;
    std::complex<double> lambda_hat;
    double error_bound = 0.0;
    double lambda_error = 0.0;
    bool certified = false;
};

SeriesEvaluation evaluate_series(const SeriesExpansion& exp, std::complex<double> z);

std::string series_json(const SeriesExpansion& exp);

}  // namespace bloch
