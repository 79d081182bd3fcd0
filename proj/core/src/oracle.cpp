#include "bloch/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;

cplx segment_integral(const Vec2& a, const Vec2& b, const Vec2& kv) {
    const Vec2 e = b - a;
    const double phi = kv.dot(e);
    const cplx g = std::abs(phi) < 1e-8 ? cplx(1.0, -0.5 * phi) : (1.0 - std::polar(1.0, -phi)) / cplx(0.0, phi);
    const double kn = kv.x() * e.y() - kv.y() * e.x();
    return cplx(0.0, kn / kv.squaredNorm()) * std::polar(1.0, -kv.dot(a)) * g;
}

cplx curve_integral(const Inclusion& inc, const Vec2& kv) {
    const bool zero = kv.squaredNorm() == 0.0;
    auto trapezoid = [&](int n) {
        cplx s = 0.0;
        for (int i = 0; i < n; ++i) {
            const CurveSample c = inc.sample(double(i) / n);
            if (zero) s += 0.5 * (c.x.x() * c.dx.y() - c.x.y() * c.dx.x());
            else s += cplx(0.0, (kv.x() * c.dx.y() - kv.y() * c.dx.x()) / kv.squaredNorm()) * std::polar(1.0, -kv.dot(c.x));
        }
        return s / double(n);
    };
    int n = 64;
    cplx prev = trapezoid(n);
    for (; n < (1 << 20); n *= 2) {
        const cplx next = trapezoid(2 * n);
        if (std::abs(next - prev) < 1e-10) return next;
        prev = next;
    }
    throw NumericalError("indicator Fourier quadrature did not reach 1e-10");
}

// Fourier table over index differences in [-2M, 2M]^2.
class ChiTable {
public:
    ChiTable(const InclusionSet& set, int M) : span_(2 * M), width_(4 * M + 1), data_(std::size_t(width_) * width_) {
        double vmax = 0.0, imax = 0.0;
        for (int i = -span_; i <= span_; ++i)
            for (int j = -span_; j <= span_; ++j) {
                const cplx v = chi_fourier(set, Eigen::Vector2i(i, j));
                at(i, j) = v;
                vmax = std::max(vmax, std::abs(v));
                imax = std::max(imax, std::abs(v.imag()));
            }
        real_ = imax <= 1e-14 * std::max(vmax, 1e-300);
    }
    cplx operator()(int i, int j) const { return data_[std::size_t(i + span_) * width_ + std::size_t(j + span_)]; }
    bool real() const { return real_; }

private:
    cplx& at(int i, int j) { return data_[std::size_t(i + span_) * width_ + std::size_t(j + span_)]; }
    int span_;
    int width_;
    std::vector<cplx> data_;
    bool real_ = false;
};

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
Scalar cast_entry(cplx v) {
    if constexpr (std::is_same_v<Scalar, double>) return v.real();
    else return v;
}

template <class Scalar>
Mat<Scalar> operator_matrix(const PlaneWaveBasis& basis, const ChiTable& chi, double z, Formulation f) {
    const Eigen::Index N = Eigen::Index(basis.size());
    Mat<Scalar> T(N, N);
    for (Eigen::Index m = 0; m < N; ++m)
        for (Eigen::Index n = 0; n < N; ++n) {
            const Eigen::Vector2i d = basis.index(m) - basis.index(n);
            T(m, n) = cast_entry<Scalar>(chi(d.x(), d.y()));
        }
    Mat<Scalar> core;
    if (f == Formulation::InverseRule) {
        Mat<Scalar> B = (1.0 - z) * T;
        B.diagonal().array() += z;
        Eigen::LLT<Mat<Scalar>> llt(B);
        if (llt.info() != Eigen::Success) throw NumericalError("inverse-coefficient Toeplitz matrix is not positive definite");
        core = llt.solve(Mat<Scalar>::Identity(N, N));
    } else {
        core = -(1.0 - z) * T;
        core.diagonal().array() += 1.0;
    }
    for (Eigen::Index m = 0; m < N; ++m) {
        const Vec2 qm = basis.wavevector(std::size_t(m));
        for (Eigen::Index n = 0; n < N; ++n) core(m, n) *= qm.dot(basis.wavevector(std::size_t(n)));
    }
    return Mat<Scalar>(0.5 * (core + core.adjoint()));
}

struct Eigs {
    Eigen::VectorXd values;
    Eigen::VectorXd residual;
};

// Lowest eigenpairs of a Hermitian positive definite matrix by inverse subspace iteration with Rayleigh-Ritz.
template <class Scalar>
Eigs lowest_eigenpairs(const Mat<Scalar>& H, int count) {
    const Eigen::Index N = H.rows();
    const Eigen::Index p = std::min<Eigen::Index>(N, count + std::max(4, count / 2));
    Eigs out;
    Eigen::LLT<Mat<Scalar>> llt(H);
    if (llt.info() == Eigen::Success && p < N) {
        std::mt19937 rng(7);
        std::normal_distribution<double> g;
        Mat<Scalar> X(N, p);
        for (Eigen::Index i = 0; i < N; ++i)
            for (Eigen::Index j = 0; j < p; ++j) {
                if constexpr (std::is_same_v<Scalar, double>) X(i, j) = g(rng);
                else X(i, j) = Scalar(g(rng), g(rng));
            }
        for (int it = 0; it < 300; ++it) {
            Mat<Scalar> Y = llt.solve(X);
            Eigen::HouseholderQR<Mat<Scalar>> qr(Y);
            X = qr.householderQ() * Mat<Scalar>::Identity(N, p);
            const Mat<Scalar> HX = H * X;
            const Mat<Scalar> small = X.adjoint() * HX;
            Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(Mat<Scalar>(0.5 * (small + small.adjoint())));
            X = X * es.eigenvectors();
            const Mat<Scalar> R = HX * es.eigenvectors() - X * es.eigenvalues().asDiagonal();
            const Eigen::VectorXd& ritz = es.eigenvalues();
            bool done = true;
            out.values = ritz.head(count);
            out.residual.resize(count);
            for (int i = 0; i < count; ++i) {
                const double r = R.col(i).norm();
                out.residual[i] = r / std::abs(ritz[i]);
                double gap = std::numeric_limits<double>::infinity();
                for (Eigen::Index k = 0; k < p; ++k)
                    if (std::abs(ritz[k] - ritz[i]) > 1e-8 * std::abs(ritz[i])) gap = std::min(gap, std::abs(ritz[k] - ritz[i]));
                // Ritz value error is at most r^2 / gap; the residual itself stalls at round-off for large contrast.
                if (out.residual[i] > 1e-9 && r * r > 1e-12 * std::abs(ritz[i]) * gap) done = false;
            }
            if (done) return out;
        }
    }
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(H);
    if (es.info() != Eigen::Success) throw NumericalError("oracle eigensolver failed");
    out.values = es.eigenvalues().head(count);
    out.residual.resize(count);
    for (int i = 0; i < count; ++i)
        out.residual[i] = (H * es.eigenvectors().col(i) - out.values[i] * es.eigenvectors().col(i)).norm() / std::abs(out.values[i]);
    return out;
}

Eigs solve_once(const InclusionSet& set, const Vec2& alpha, double contrast, int count, int cutoff, Formulation f,
                bool& real_path) {
    const PlaneWaveBasis basis(alpha, cutoff);
    if (basis.size() > kMaxOracleBasis)
        throw ResolutionError("oracle basis size " + std::to_string(basis.size()) + " exceeds " + std::to_string(kMaxOracleBasis));
    if (std::size_t(count) > basis.size()) throw DomainError("more eigenvalues requested than basis functions");
    const ChiTable chi(set, cutoff);
    const double z = 1.0 / contrast;
    real_path = chi.real();
    Eigs e = real_path ? lowest_eigenpairs<double>(operator_matrix<double>(basis, chi, z, f), count)
                       : lowest_eigenpairs<cplx>(operator_matrix<cplx>(basis, chi, z, f), count);
    if (f == Formulation::Primal) e.values *= contrast;
    return e;
}

}  // namespace

PlaneWaveBasis::PlaneWaveBasis(const Vec2& alpha, int cutoff) : alpha_(alpha), cutoff_(cutoff) {
    if (cutoff < 8) throw DomainError("plane-wave cutoff must be at least 8");
    if (!PeriodCell::in_brillouin_zone(alpha)) throw DomainError("quasi-momentum outside (-pi, pi]^2");
    const bool periodic = alpha.squaredNorm() == 0.0;
    for (int i = -cutoff; i <= cutoff; ++i)
        for (int j = -cutoff; j <= cutoff; ++j)
            if (!(periodic && i == 0 && j == 0)) index_.emplace_back(i, j);
}

Vec2 PlaneWaveBasis::wavevector(std::size_t i) const { return 2.0 * kPi * index_[i].cast<double>() + alpha_; }

cplx chi_fourier(const Inclusion& inc, const Eigen::Vector2i& n) {
    const Vec2 kv = 2.0 * kPi * n.cast<double>();
    const double kk = kv.norm();
    if (inc.is_disk()) {
        const double a = inc.radius();
        if (kk == 0.0) return kPi * a * a;
        return std::polar(2.0 * kPi * a * std::cyl_bessel_j(1.0, kk * a) / kk, -kv.dot(inc.center()));
    }
    if (!inc.smooth()) {
        const auto& v = inc.outline();
        if (kk == 0.0) return inc.area();
        cplx s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += segment_integral(v[i], v[(i + 1) % v.size()], kv);
        return s;
    }
    return curve_integral(inc, kv);
}

cplx chi_fourier(const InclusionSet& set, const Eigen::Vector2i& n) {
    cplx s = 0.0;
    for (const auto& inc : set.inclusions()) s += chi_fourier(inc, n);
    return s;
}

Eigen::MatrixXcd galerkin_matrix(const PlaneWaveBasis& basis, const InclusionSet& set, double contrast, Formulation f) {
    if (!(contrast > 0.0)) throw DomainError("contrast must be positive");
    return operator_matrix<cplx>(basis, ChiTable(set, basis.cutoff()), 1.0 / contrast, f);
}

OracleResult bloch_solve(const InclusionSet& set, const Vec2& alpha, double contrast, int count, const OracleOptions& opt) {
    if (!(contrast > 0.0) || !std::isfinite(contrast)) throw DomainError("contrast must be positive and finite");
    if (count < 1 || count > 20) throw DomainError("oracle eigenvalue count must lie in [1, 20]");
    OracleResult r;
    r.alpha = alpha;
    r.contrast = contrast;
    r.cutoff = opt.cutoff;
    const Eigs fine = solve_once(set, alpha, contrast, count, opt.cutoff, opt.formulation, r.real_arithmetic);
    r.omega2 = fine.values;
    r.residual = fine.residual;
    r.estimate = Eigen::VectorXd::Zero(count);
    if (opt.refine && opt.cutoff / 2 >= 8) {
        bool unused = false;
        const Eigs coarse = solve_once(set, alpha, contrast, count, opt.cutoff / 2, opt.formulation, unused);
        r.estimate = (fine.values - coarse.values).cwiseAbs();
    }
    return r;
}

BetaOracle beta_of_z_oracle(const InclusionSet& set, const Vec2& alpha, double z, int j, const OracleOptions& opt) {
    if (!(z > 0.0)) throw DomainError("beta oracle needs z > 0 (finite contrast)");
    if (j < 0) throw DomainError("branch index must be non-negative");
    const OracleResult r = bloch_solve(set, alpha, 1.0 / z, j + 1, opt);
    const double w = r.omega2[j];
    return {1.0 / w, r.estimate[j] / (w * std::max(w - r.estimate[j], 0.5 * w))};
}

void write_oracle_csv(std::ostream& os, const OracleResult& r, bool header) {
    if (header) os << "alpha_x,alpha_y,k,index,omega2,residual\n";
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < r.omega2.size(); ++i)
        os << r.alpha.x() << ',' << r.alpha.y() << ',' << r.contrast << ',' << i << ',' << r.omega2[i] << ','
           << r.residual[i] << '\n';
}

}  // namespace bloch
