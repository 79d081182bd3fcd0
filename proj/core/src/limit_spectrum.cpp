#include "bloch/limit_spectrum.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;

double jn(int n, double x) { return std::cyl_bessel_j(double(n), x); }
double jn_prime(int n, double x) {
    if (n == 0) return -jn(1, x);
    return 0.5 * (jn(n - 1, x) - jn(n + 1, x));
}

double polish_zero(int n, double lo, double hi) {
    double flo = jn(n, lo);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = jn(n, mid);
        if ((fm > 0) == (flo > 0)) { lo = mid; flo = fm; }
        else hi = mid;
    }
    double x = 0.5 * (lo + hi);
    const double dx = jn(n, x) / jn_prime(n, x);
    if (std::abs(dx) < hi - lo + 1e-12) x -= dx;
    return x;
}

// Sequential zero finder: scans J_n with a step well below the zero spacing.
class ZeroScanner {
public:
    explicit ZeroScanner(int n) : n_(n), x_(n == 0 ? 0.5 : double(n)), f_(jn(n, x_)) {}
    double next() {
        constexpr double step = 0.25;
        for (int guard = 0; guard < 1000000; ++guard) {
            const double x1 = x_ + step;
            const double f1 = jn(n_, x1);
            if (f1 == 0.0) { x_ = x1 + 1e-9; f_ = jn(n_, x_); return x1; }
            if ((f1 > 0) != (f_ > 0)) {
                const double z = polish_zero(n_, x_, x1);
                x_ = x1;
                f_ = f1;
                return z;
            }
            x_ = x1;
            f_ = f1;
        }
        throw NumericalError("Bessel zero bracketing failed");
    }

private:
    int n_;
    double x_;
    double f_;
};

double lommel(int n, double alpha, double beta, double a) {
    // int_0^a J_n(alpha r) J_n(beta r) r dr with J_n(alpha a) = 0
    const double den = alpha * alpha - beta * beta;
    if (std::abs(den) < 1e-9 * alpha * alpha) {
        const double jp = jn_prime(n, alpha * a);
        return 0.5 * a * a * jp * jp;
    }
    return -a * alpha * jn_prime(n, alpha * a) * jn(n, beta * a) / den;
}

bool same_value(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

}  // namespace

double bessel_zero(int n, int k) {
    if (n < 0 || k < 1) throw DomainError("bessel_zero needs n >= 0 and k >= 1");
    ZeroScanner s(n);
    double z = 0.0;
    for (int i = 0; i < k; ++i) z = s.next();
    return z;
}

std::vector<double> bessel_zeros(int n, int k_max) {
    if (n < 0) throw DomainError("bessel_zeros needs n >= 0");
    std::vector<double> out;
    out.reserve(std::max(k_max, 0));
    ZeroScanner s(n);
    for (int i = 0; i < k_max; ++i) out.push_back(s.next());
    return out;
}

int axisymmetric_kmax_for_mass(double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw DomainError("mass tolerance must lie in (0,1)");
    ZeroScanner s(0);
    double sum = 0.0;
    for (int k = 1; k < 10000000; ++k) {
        const double z = s.next();
        sum += 4.0 / (z * z);
        if (1.0 - sum < rel_tol) return k;
    }
    throw NumericalError("mass accounting did not converge");
}

double DiskMode::norm() const {
    const double j = jn(n + 1, eta);
    const double base = kPi * radius * radius * j * j;
    if (n > 0 && (angular == Angular::Cos || angular == Angular::Sin)) return std::sqrt(0.5 * base);
    return std::sqrt(base);
}

namespace {
cplx angular_factor(DiskMode::Angular ang, int n, double theta) {
    switch (ang) {
        case DiskMode::Angular::ExpPlus: return std::polar(1.0, n * theta);
        case DiskMode::Angular::ExpMinus: return std::polar(1.0, -n * theta);
        case DiskMode::Angular::Cos: return std::cos(n * theta);
        case DiskMode::Angular::Sin: return std::sin(n * theta);
    }
    return 0.0;
}
}  // namespace

cplx DiskMode::value(const Vec2& x) const {
    const Vec2 d = x - center;
    const double r = d.norm();
    if (r >= radius) return 0.0;
    return jn(n, eta * r / radius) * angular_factor(angular, n, std::atan2(d.y(), d.x())) / norm();
}

cplx DiskMode::normal_derivative(double theta) const {
    return (eta / radius) * jn_prime(n, eta) * angular_factor(angular, n, theta) / norm();
}

cplx DiskMode::mean_integral() const {
    if (n != 0) return 0.0;
    return 2.0 * kPi * (radius * radius / eta) * jn(1, eta) / norm();
}

cplx DiskMode::fourier(const Vec2& q) const {
    const double qn = q.norm();
    const double radial = lommel(n, eta / radius, qn, radius);
    const double tq = qn > 0.0 ? std::atan2(q.y(), q.x()) : 0.0;
    const cplx in = std::pow(cplx(0.0, -1.0), n);
    const cplx shift = std::polar(1.0, -q.dot(center));
    return shift * 2.0 * kPi * in * angular_factor(angular, n, tq) * radial / norm();
}

double DirichletSpectrum::resolved_mass() const {
    double s = 0.0;
    for (const auto& m : modes)
        if (!m.mean_zero) s += m.multiplicity * m.average * m.average;
    return s;
}

DiskMode DirichletSpectrum::disk_mode(std::size_t index, DiskMode::Angular angular) const {
    if (source != Source::ClosedFormDisk) throw ContractError("closed-form modes exist for disks only");
    const DirichletMode& m = modes.at(index);
    DiskMode d;
    d.n = m.n;
    d.k = m.k;
    d.radius = radii.at(m.inclusion);
    d.center = centers.at(m.inclusion);
    d.eta = std::sqrt(m.delta) * d.radius;
    d.angular = m.n == 0 ? DiskMode::Angular::ExpPlus : angular;
    return d;
}

DirichletSpectrum disk_dirichlet(double a, int n_max, int k_max, int k_max_axisymmetric) {
    InclusionSet set({Inclusion::disk({0.5, 0.5}, a)});
    return disks_dirichlet(set, n_max, k_max, k_max_axisymmetric);
}

DirichletSpectrum disks_dirichlet(const InclusionSet& set, int n_max, int k_max, int k_max_axisymmetric) {
    if (!set.all_disks() || set.empty()) throw ContractError("closed-form Dirichlet spectra need disk inclusions");
    if (n_max < 0 || k_max < 1) throw DomainError("need n_max >= 0 and k_max >= 1");
    DirichletSpectrum out;
    out.source = DirichletSpectrum::Source::ClosedFormDisk;
    out.area = set.area();
    out.complete_below = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> zeros(n_max + 2);
    const int k0 = std::max(k_max, k_max_axisymmetric);
    for (int n = 0; n <= n_max + 1; ++n) zeros[n] = bessel_zeros(n, (n == 0 ? k0 : k_max) + 1);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const double a = set[i].radius();
        if (!(a > 0.0)) throw DomainError("disk radius must be positive");
        out.radii.push_back(a);
        out.centers.push_back(set[i].center());
        double edge = zeros[n_max + 1][0];
        for (int n = 0; n <= n_max; ++n) {
            const int kk = n == 0 ? k0 : k_max;
            edge = std::min(edge, zeros[n][kk]);
            for (int k = 1; k <= kk; ++k) {
                const double eta = zeros[n][k - 1];
                DirichletMode m;
                m.delta = (eta / a) * (eta / a);
                m.extrapolated = m.delta;
                m.n = n;
                m.k = k;
                m.multiplicity = n == 0 ? 1 : 2;
                m.mean_zero = n != 0;
                m.average = n == 0 ? 2.0 * std::sqrt(kPi) * a / eta : 0.0;
                m.inclusion = i;
                out.modes.push_back(m);
            }
        }
        out.complete_below = std::min(out.complete_below, (edge / a) * (edge / a));
    }
    std::stable_sort(out.modes.begin(), out.modes.end(),
                     [](const DirichletMode& x, const DirichletMode& y) { return x.delta < y.delta; });
    return out;
}

namespace {

struct FdSolve {
    std::vector<double> values;
    Eigen::MatrixXd vectors;
    std::vector<Eigen::Vector2i> nodes;
};

double boundary_fraction(const Inclusion& inc, const Vec2& p, const Vec2& q) {
    if (inc.is_disk()) {
        // |p + t (q - p) - c| = a, root in (0, 1]
        const Vec2 d = q - p;
        const Vec2 f = p - inc.center();
        const double A = d.squaredNorm(), B = 2.0 * f.dot(d), C = f.squaredNorm() - inc.radius() * inc.radius();
        const double disc = std::max(B * B - 4 * A * C, 0.0);
        return std::clamp((-B + std::sqrt(disc)) / (2 * A), 1e-6, 1.0);
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (inc.contains(p + mid * (q - p))) lo = mid;
        else hi = mid;
    }
    return std::clamp(0.5 * (lo + hi), 1e-6, 1.0);
}

FdSolve fd_solve(const Inclusion& inc, double h, int count) {
    const int nc = static_cast<int>(std::lround(1.0 / h));
    if (std::abs(nc * h - 1.0) > 1e-12) throw ResolutionError("grid spacing must divide the unit cell");
    std::vector<int> index((nc + 1) * (nc + 1), -1);
    FdSolve out;
    for (int i = 1; i < nc; ++i)
        for (int j = 1; j < nc; ++j)
            if (inc.contains(Vec2(i * h, j * h))) {
                index[i * (nc + 1) + j] = static_cast<int>(out.nodes.size());
                out.nodes.emplace_back(i, j);
            }
    const int N = static_cast<int>(out.nodes.size());
    if (N < 100) throw ResolutionError("grid too coarse: fewer than 100 interior points in the inclusion");
    const int p = std::min(N, count + 8);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * N);
    for (int r = 0; r < N; ++r) {
        const int i = out.nodes[r].x(), j = out.nodes[r].y();
        const Vec2 P(i * h, j * h);
        double diag = 0.0;
        for (int axis = 0; axis < 2; ++axis) {
            int nb[2];
            double arm[2];
            for (int s = 0; s < 2; ++s) {
                const int di = axis == 0 ? (s == 0 ? 1 : -1) : 0;
                const int dj = axis == 1 ? (s == 0 ? 1 : -1) : 0;
                nb[s] = index[(i + di) * (nc + 1) + (j + dj)];
                arm[s] = nb[s] >= 0 ? h : h * boundary_fraction(inc, P, Vec2((i + di) * h, (j + dj) * h));
            }
            const double sum = arm[0] + arm[1];
            diag += 2.0 / (arm[0] * arm[1]);
            for (int s = 0; s < 2; ++s)
                if (nb[s] >= 0) trip.emplace_back(r, nb[s], -2.0 / (arm[s] * sum));
        }
        trip.emplace_back(r, r, diag);
    }
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw NumericalError("FD Dirichlet factorization failed");
    std::mt19937 rng(1234);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(N, p);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < p; ++j) X(i, j) = nd(rng);
    Eigen::VectorXd prev = Eigen::VectorXd::Constant(count, -1.0);
    Eigen::VectorXd theta;
    Eigen::MatrixXd ritz;
    for (int it = 0; it < 2000; ++it) {
        Eigen::MatrixXd Y = lu.solve(X);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
        const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, p);
        const Eigen::MatrixXd B = Q.transpose() * (A * Q);
        Eigen::EigenSolver<Eigen::MatrixXd> es(B);
        std::vector<int> order(p);
        for (int k = 0; k < p; ++k) order[k] = k;
        std::sort(order.begin(), order.end(),
                  [&](int x, int y) { return es.eigenvalues()[x].real() < es.eigenvalues()[y].real(); });
        theta.resize(p);
        Eigen::MatrixXd V(p, p);
        for (int k = 0; k < p; ++k) {
            theta[k] = es.eigenvalues()[order[k]].real();
            V.col(k) = es.eigenvectors().col(order[k]).real();
            if (V.col(k).norm() < 1e-8) V.col(k) = es.eigenvectors().col(order[k]).imag();
            V.col(k).normalize();
        }
        ritz = Q * V;
        X = ritz;
        const double change = (theta.head(count) - prev).cwiseAbs().maxCoeff() / theta.head(count).cwiseAbs().maxCoeff();
        prev = theta.head(count);
        if (change < 1e-13 && it > 3) break;
    }
    out.values.assign(theta.data(), theta.data() + count);
    out.vectors = ritz.leftCols(count);
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd v = out.vectors.col(k);
        const double l2 = std::sqrt(h * h * v.squaredNorm());
        double s = v.sum() < 0 ? -1.0 : 1.0;
        out.vectors.col(k) = s * v / l2;
    }
    return out;
}

}  // namespace

DirichletSpectrum fd_dirichlet(const Inclusion& inclusion, double grid_h, int count) {
    if (count < 1) throw DomainError("count must be positive");
    InclusionSet({inclusion}).validate();
    const FdSolve fine = fd_solve(inclusion, grid_h, count);
    const FdSolve coarse = fd_solve(inclusion, 2.0 * grid_h, count);
    DirichletSpectrum out;
    out.source = DirichletSpectrum::Source::FiniteDifference;
    out.area = inclusion.area();
    const double tol = 1e-6 * std::sqrt(out.area);
    for (int k = 0; k < count; ++k) {
        DirichletMode m;
        m.delta = fine.values[k];
        m.n = -1;
        m.k = k + 1;
        const double mean = grid_h * grid_h * fine.vectors.col(k).sum();
        m.mean_zero = std::abs(mean) < tol;
        m.average = m.mean_zero ? 0.0 : std::abs(mean);
        m.extrapolated = fine.values[k] + (fine.values[k] - coarse.values[k]) / 3.0;
        m.error_estimate = std::abs(fine.values[k] - coarse.values[k]) / 3.0;
        out.modes.push_back(m);
    }
    for (const auto& m : out.modes)
        if (!(m.delta > 0.0)) throw NumericalError("non-positive FD Dirichlet eigenvalue");
    out.complete_below = out.modes.back().delta * (1.0 - 1e-8);
    out.centers.push_back(inclusion.center());
    out.grid = GridEigenfunctions{grid_h, fine.nodes, fine.vectors};
    return out;
}

namespace {

struct Pole {
    double delta;
    double weight;
    int count;
    std::size_t mode;
};

std::vector<Pole> poles_of(const DirichletSpectrum& spec) {
    std::vector<Pole> poles;
    for (std::size_t i = 0; i < spec.modes.size(); ++i) {
        const auto& m = spec.modes[i];
        if (m.mean_zero) continue;
        const double w = m.multiplicity * m.average * m.average;
        if (!poles.empty() && same_value(poles.back().delta, m.delta, 1e-10)) {
            poles.back().weight += w;
            poles.back().count += m.multiplicity;
        } else {
            poles.push_back({m.delta, w, m.multiplicity, i});
        }
    }
    return poles;
}

}  // namespace

SpectralValue spectral_function(double nu, const DirichletSpectrum& spec) {
    SpectralValue out;
    double s = 0.0;
    for (const auto& p : poles_of(spec)) {
        if (nu == p.delta) throw DomainError("spectral function evaluated at a pole");
        s += p.weight / (nu - p.delta);
    }
    out.value = nu * s - 1.0;
    const double unresolved = std::max(spec.area - spec.resolved_mass(), 0.0);
    out.tail_bound = nu < spec.complete_below ? nu * unresolved / (spec.complete_below - nu)
                                              : std::numeric_limits<double>::infinity();
    return out;
}

double spectral_function_derivative(double nu, const DirichletSpectrum& spec) {
    double s = 0.0;
    for (const auto& p : poles_of(spec)) s -= p.weight * p.delta / ((nu - p.delta) * (nu - p.delta));
    return s;
}

LimitSpectrum limit_spectrum(const QuasiMomentum& alpha, const DirichletSpectrum& spec, int count) {
    if (count < 1) throw DomainError("count must be positive");
    LimitSpectrum out;
    out.alpha = alpha;
    std::vector<LimitValue> vals;
    auto add = [&](double lambda, LimitValue::Provenance prov, int mult, std::size_t idx) {
        for (auto& v : vals)
            if (v.provenance == prov && same_value(v.lambda, lambda, 1e-8)) {
                v.multiplicity += mult;
                return;
            }
        vals.push_back({1.0 / lambda, prov, mult, lambda, idx});
    };
    if (!alpha.is_zero()) {
        for (std::size_t i = 0; i < spec.modes.size(); ++i)
            if (spec.modes[i].delta < spec.complete_below)
                add(spec.modes[i].delta, LimitValue::Provenance::Dirichlet, spec.modes[i].multiplicity, i);
    } else {
        for (std::size_t i = 0; i < spec.modes.size(); ++i)
            if (spec.modes[i].mean_zero && spec.modes[i].delta < spec.complete_below)
                add(spec.modes[i].delta, LimitValue::Provenance::Dirichlet, spec.modes[i].multiplicity, i);
        const std::vector<Pole> poles = poles_of(spec);
        for (const auto& p : poles)
            if (p.count > 1 && p.delta < spec.complete_below)
                add(p.delta, LimitValue::Provenance::Dirichlet, p.count - 1, p.mode);
        for (std::size_t i = 0; i + 1 < poles.size(); ++i) {
            if (!(poles[i + 1].delta <= spec.complete_below)) break;
            double lo = poles[i].delta * (1.0 + 1e-13), hi = poles[i + 1].delta * (1.0 - 1e-13);
            auto S = [&](double nu) { return spectral_function(nu, spec).value; };
            if (!(S(lo) > 0.0 && S(hi) < 0.0)) throw NumericalError("spectral function bracket has no sign change");
            while (hi - lo > 1e-10 * hi) {
                const double mid = 0.5 * (lo + hi);
                if (S(mid) > 0.0) lo = mid;
                else hi = mid;
            }
            double nu = 0.5 * (lo + hi);
            for (int it = 0; it < 3; ++it) {
                const double step = S(nu) / spectral_function_derivative(nu, spec);
                if (!(nu - step > lo && nu - step < hi)) break;
                nu -= step;
            }
            add(nu, LimitValue::Provenance::SpectralRoot, 1, poles[i].mode);
        }
        if (!poles.empty()) {
            // S -> +inf right of the last pole and -> resolved mass - 1 at infinity; that root is not
            // resolved, so values above the last pole are dropped.
            out.sign_change_beyond_last_pole = spec.resolved_mass() - 1.0 < 0.0;
            const double cut = std::min(poles.back().delta, spec.complete_below);
            std::erase_if(vals, [&](const LimitValue& v) { return v.lambda >= cut; });
        }
    }
    std::sort(vals.begin(), vals.end(), [](const LimitValue& a, const LimitValue& b) { return a.beta > b.beta; });
    if (static_cast<int>(vals.size()) < count)
        throw ResolutionError("limit spectrum resolves " + std::to_string(vals.size()) + " of " + std::to_string(count) +
                              " requested values; increase n_max/k_max (or the FD mode count)");
    vals.resize(count);
    out.values = std::move(vals);
    return out;
}

std::string to_string(LimitValue::Provenance p) {
    return p == LimitValue::Provenance::Dirichlet ? "dirichlet" : "spectral_root";
}

void write_limit_csv(std::ostream& os, const LimitSpectrum& spec, bool header) {
    if (header) os << "alpha_x,alpha_y,value,provenance,multiplicity\n";
    os << std::setprecision(17);
    for (const auto& v : spec.values)
        os << spec.alpha.x() << ',' << spec.alpha.y() << ',' << v.beta << ',' << to_string(v.provenance) << ','
           << v.multiplicity << '\n';
}

}  // namespace bloch
