#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bloch/geometry.hpp"
#include "bloch/lattice_green.hpp"

namespace bloch {

/// k-th positive zero (k >= 1) of J_n.
double bessel_zero(int n, int k);
/// First k_max positive zeros of J_n.
std::vector<double> bessel_zeros(int n, int k_max);

/// Smallest K with 1 - 4 sum_{k<=K} eta_{0k}^{-2} < rel_tol, i.e. the axisymmetric
/// disk modes up to K carry all but rel_tol of the inclusion area in their averages.
int axisymmetric_kmax_for_mass(double rel_tol);

/// Closed-form Dirichlet eigenfunction J_n(eta r/a) e^{i s n theta} / norm on a disk (s = +1 or -1),
/// or the real cos / sin variants.
struct DiskMode {
    enum class Angular { ExpPlus, ExpMinus, Cos, Sin };
    int n = 0;
    int k = 1;
    double eta = 0.0;
    double radius = 0.0;
    Vec2 center = Vec2::Zero();
    Angular angular = Angular::ExpPlus;

    double eigenvalue() const { return (eta / radius) * (eta / radius); }
    double norm() const;
    /// Value at x (zero outside the disk).
    cplx value(const Vec2& x) const;
    /// Outward normal derivative from inside at boundary angle theta.
    cplx normal_derivative(double theta) const;
    /// Integral over the disk.
    cplx mean_integral() const;
    /// Fourier coefficient int_D mode(x) e^{-i q.x} dx.
    cplx fourier(const Vec2& q) const;
};

struct DirichletMode {
    double delta = 0.0;
    int n = -1;                  ///< angular order for disks, -1 for grid modes
    int k = 0;                   ///< radial index for disks, rank for grid modes
    int multiplicity = 1;
    bool mean_zero = false;
    double average = 0.0;        ///< |int_D psi| (per eigenfunction)
    std::size_t inclusion = 0;
    double error_estimate = 0.0; ///< FD Richardson estimate, 0 for closed form
    double extrapolated = 0.0;   ///< FD Richardson value, equals delta for closed form
};

struct GridEigenfunctions {
    double h = 0.0;
    std::vector<Eigen::Vector2i> nodes;
    Eigen::MatrixXd vectors;  ///< columns normalized with h^2 sum psi^2 = 1
};

struct DirichletSpectrum {
    enum class Source { ClosedFormDisk, FiniteDifference };
    Source source = Source::ClosedFormDisk;
    std::vector<DirichletMode> modes;   ///< ascending delta
    double area = 0.0;
    /// Every Dirichlet eigenvalue below this value is present in modes.
    double complete_below = 0.0;
    std::vector<double> radii;
    std::vector<Vec2> centers;
    std::optional<GridEigenfunctions> grid;

    double resolved_mass() const;
    /// Eigenfunction of a closed-form mode (expanded: sign selects e^{+in theta} or e^{-in theta}).
    DiskMode disk_mode(std::size_t index, DiskMode::Angular angular = DiskMode::Angular::ExpPlus) const;
};

/// Closed-form spectrum of one disk; axisymmetric modes go up to max(k_max, k_max_axisymmetric).
DirichletSpectrum disk_dirichlet(double a, int n_max, int k_max, int k_max_axisymmetric = 0);

/// Union of closed-form spectra for a set of disks.
DirichletSpectrum disks_dirichlet(const InclusionSet& set, int n_max, int k_max, int k_max_axisymmetric = 0);

/// Shortley-Weller five-point Dirichlet eigenvalues on a uniform grid of spacing h, lowest `count`,
/// with a Richardson estimate from the 2h grid.
DirichletSpectrum fd_dirichlet(const Inclusion& inclusion, double grid_h, int count);

struct SpectralValue {
    double value = 0.0;
    double tail_bound = 0.0;
};

/// Truncated S(nu) = nu sum a_i^2/(nu - delta*_i) - 1 with a tail bound from the unresolved mass.
SpectralValue spectral_function(double nu, const DirichletSpectrum& spec);
double spectral_function_derivative(double nu, const DirichletSpectrum& spec);

struct LimitValue {
    enum class Provenance { Dirichlet, SpectralRoot };
    double beta = 0.0;          ///< inverse eigenvalue
    Provenance provenance = Provenance::Dirichlet;
    int multiplicity = 1;
    double lambda = 0.0;        ///< delta or nu
    std::size_t mode_index = 0; ///< Dirichlet mode (or lower pole for roots)
};

struct LimitSpectrum {
    QuasiMomentum alpha;
    std::vector<LimitValue> values;  ///< descending beta
    bool sign_change_beyond_last_pole = false;
};

LimitSpectrum limit_spectrum(const QuasiMomentum& alpha, const DirichletSpectrum& spec, int count);

/// CSV rows: alpha_x, alpha_y, value, provenance, multiplicity.
void write_limit_csv(std::ostream& os, const LimitSpectrum& spec, bool header = true);

std::string to_string(LimitValue::Provenance p);

}  // namespace bloch
