#include "bloch/series_engine.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXcd herm(const Eigen::MatrixXcd& A) { return 0.5 * (A + A.adjoint()); }

double distance_to_boundary(const InclusionSet& set, const Vec2& x) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < set.size(); ++i)
        for (int sx = -1; sx <= 1; ++sx)
            for (int sy = -1; sy <= 1; ++sy) {
                const Vec2 c = set[i].center() + Vec2(sx, sy);
                best = std::min(best, std::abs((x - c).norm() - set[i].radius()));
            }
    return best;
}

bool inside_any(const InclusionSet& set, const Vec2& x) {
    for (std::size_t i = 0; i < set.size(); ++i)
        if ((x - set[i].center()).norm() < set[i].radius()) return true;
    return false;
}

InclusionSet disks_of(const OperatorChain& chain) {
    std::vector<Inclusion> v;
    for (const auto& m : chain.modes()) {
        bool seen = false;
        for (const auto& d : v) seen = seen || (d.center() - m.center).norm() < 1e-14;
        if (!seen) v.push_back(Inclusion::disk(m.center, m.radius));
    }
    return InclusionSet(v);
}

// Vectors of the mixed space: mode coefficients f and admissible density coordinates w.
struct Mixed {
    Eigen::VectorXcd f;
    Eigen::VectorXcd w;
};

Mixed operator+(const Mixed& a, const Mixed& b) { return {a.f + b.f, a.w + b.w}; }
Mixed operator-(const Mixed& a, const Mixed& b) { return {a.f - b.f, a.w - b.w}; }
Mixed operator*(cplx s, const Mixed& a) { return {s * a.f, s * a.w}; }

}  // namespace

Eigen::MatrixXcd single_layer_mass(const LayerOperators& ops, const GreenEvaluator& ev) {
    const BoundaryMesh& mesh = ops.mesh;
    const std::size_t N = mesh.size();
    const std::size_t n = mesh.nodes_per_inclusion;
    const double h = 2.0 * kPi / double(n);
    const Eigen::VectorXd R = kress_weights(n);
    const double c = 1.0 / (16.0 * kPi);
    const cplx rem0 = ev.biharmonic_smooth_remainder(Vec2::Zero());
    Eigen::MatrixXcd M(N, N);
    for (std::size_t i = 0; i < N; ++i) {
        M(i, i) = mesh.weight[i] * rem0 * h * mesh.speed[i];
        for (std::size_t k = i + 1; k < N; ++k) {
            const Vec2 r = mesh.x.row(i).transpose() - mesh.x.row(k).transpose();
            cplx v;
            if (mesh.owner[i] == mesh.owner[k]) {
                const double r2 = r.squaredNorm();
                const double sn = std::sin(0.5 * (mesh.param[i] - mesh.param[k]));
                const cplx rem = r2 <= 0.25 ? ev.biharmonic_smooth_remainder(r) : ev.biharmonic(r) - c * r2 * std::log(r2);
                const cplx smooth = rem + c * r2 * std::log(r2 / (4.0 * sn * sn));
                v = mesh.weight[i] * (c * r2 * R[(i % n + n - k % n) % n] + smooth * h) * mesh.speed[k];
            } else {
                v = mesh.weight[i] * ev.biharmonic(r) * mesh.weight[k];
            }
            M(i, k) = v;
            M(k, i) = std::conj(v);
        }
    }
    if (!M.allFinite()) throw NumericalError("single-layer mass matrix has non-finite entries");
    return M;
}

OperatorChain OperatorChain::build(const InclusionSet& set, const QuasiMomentum& alpha, const DirichletSpectrum& spec,
                                   const LimitSpectrum& limit, std::size_t group, const ChainSettings& settings) {
    if (spec.source != DirichletSpectrum::Source::ClosedFormDisk || !set.all_disks())
        throw ConfigError("the series engine needs closed-form disk modes");
    if ((limit.alpha.value() - alpha.value()).norm() > 1e-14) throw ContractError("limit spectrum computed at another alpha");
    if (group >= limit.values.size()) throw ResolutionError("requested group is not in the limit spectrum");
    if (spec.centers.size() != set.size()) throw ContractError("Dirichlet spectrum and inclusion set differ");
    for (std::size_t i = 0; i < set.size(); ++i)
        if ((spec.centers[i] - set[i].center()).norm() > 1e-12 || std::abs(spec.radii[i] - set[i].radius()) > 1e-12)
            throw ContractError("Dirichlet spectrum and inclusion set differ");

    OperatorChain ch;
    ch.alpha_ = alpha;
    const GreenEvaluator ev(alpha);
    ch.ops_ = assemble(build_mesh(set, settings.boundary_nodes), ev);
    ch.np_ = resonance_spectrum(ch.ops_);
    const LayerOperators& ops = ch.ops_;
    const BoundaryMesh& mesh = ops.mesh;
    const std::size_t N = mesh.size();

    DiskMode::Angular first = settings.pair_basis, second;
    switch (first) {
        case DiskMode::Angular::Cos:
        case DiskMode::Angular::Sin:
            first = DiskMode::Angular::Cos;
            second = DiskMode::Angular::Sin;
            break;
        default:
            first = DiskMode::Angular::ExpPlus;
            second = DiskMode::Angular::ExpMinus;
    }
    for (std::size_t i = 0; i < spec.modes.size(); ++i) {
        if (spec.modes[i].n == 0) {
            ch.modes_.push_back(spec.disk_mode(i));
        } else {
            ch.modes_.push_back(spec.disk_mode(i, first));
            ch.modes_.push_back(spec.disk_mode(i, second));
        }
    }
    const Eigen::Index J = static_cast<Eigen::Index>(ch.modes_.size());
    ch.delta_.resize(J);
    Eigen::VectorXcd a(J);
    ch.dpsi_ = Eigen::MatrixXcd::Zero(J, N);
    for (Eigen::Index j = 0; j < J; ++j) {
        const DiskMode& m = ch.modes_[j];
        ch.delta_[j] = m.eigenvalue();
        a[j] = m.mean_integral();
        for (std::size_t i = 0; i < N; ++i) {
            const Vec2 d = mesh.x.row(i).transpose() - m.center;
            if (std::abs(d.norm() - m.radius) > 1e-9 * m.radius) continue;
            ch.dpsi_(j, i) = m.normal_derivative(std::atan2(d.y(), d.x()));
        }
    }
    ch.mean_ = a.real();

    ch.Mff_ = Eigen::MatrixXcd::Identity(J, J);
    if (alpha.is_zero()) ch.Mff_ -= a.conjugate() * a.transpose();

    ch.Z_ = ops.admissible_basis();
    const Eigen::MatrixXcd Sw = ops.w.asDiagonal() * ops.S;
    const Eigen::MatrixXcd nodal_fw =
        -(ch.delta_.cwiseInverse().asDiagonal() * ch.dpsi_.conjugate()) * Sw;
    ch.Mfw_ = nodal_fw * ch.Z_;
    ch.Mww_ = herm(ch.Z_.adjoint() * single_layer_mass(ops, ev) * ch.Z_);

    ch.Gw_ = -herm(ch.Z_.adjoint() * Sw * ch.Z_);
    Eigen::LLT<Eigen::MatrixXcd> gw(ch.Gw_);
    if (gw.info() != Eigen::Success) throw NumericalError("single-layer Gram matrix is not positive definite");
    ch.Kt_ = gw.solve(herm(-(ch.Z_.adjoint() * Sw * ops.Kstar * ch.Z_)));
    const double lo = 0.5 + ch.np_.mu.minCoeff(), hi = 0.5 + ch.np_.mu.maxCoeff();
    if (!(lo > 1e-8)) throw NumericalError("K* + 1/2 is singular on the density space");
    ch.kstar_cond_ = hi / lo;

    // D^{-1} Mff is self-adjoint in Mff; diagonalize through D^{-1/2} Mff D^{-1/2}.
    const Eigen::VectorXd dis = ch.delta_.cwiseSqrt().cwiseInverse();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm(dis.asDiagonal() * ch.Mff_ * dis.asDiagonal()));
    if (es.info() != Eigen::Success) throw NumericalError("mode eigensolver failed");
    ch.lam_ = es.eigenvalues();
    if (!(ch.lam_.minCoeff() > 0.0)) throw NumericalError("mode mass matrix is not positive definite");
    ch.E_ = dis.asDiagonal() * es.eigenvectors() * ch.lam_.cwiseSqrt().cwiseInverse().asDiagonal();

    const LimitValue& lv = limit.values[group];
    ch.dirichlet_group_ = lv.provenance == LimitValue::Provenance::Dirichlet;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < ch.lam_.size(); ++i)
        if (std::abs(ch.lam_[i] - lv.beta) <= 1e-7 * lv.beta) {
            ch.group_.push_back(i);
            sum += ch.lam_[i];
        }
    if (static_cast<int>(ch.group_.size()) != lv.multiplicity)
        throw ResolutionError("mode basis resolves " + std::to_string(ch.group_.size()) + " of " +
                              std::to_string(lv.multiplicity) + " group members");
    ch.beta0_ = sum / double(ch.group_.size());
    ch.c0_.resize(J, static_cast<Eigen::Index>(ch.group_.size()));
    for (std::size_t k = 0; k < ch.group_.size(); ++k) ch.c0_.col(static_cast<Eigen::Index>(k)) = ch.E_.col(ch.group_[k]);

    double nearest = ch.beta0_;  // the single-layer block contributes the eigenvalue 0
    for (Eigen::Index i = 0; i < ch.lam_.size(); ++i)
        if (std::find(ch.group_.begin(), ch.group_.end(), i) == ch.group_.end())
            nearest = std::min(nearest, std::abs(ch.lam_[i] - ch.beta0_));
    ch.gap_ = 0.5 * nearest;
    return ch;
}

Eigen::VectorXcd OperatorChain::group_trace(int k) const { return dpsi_.transpose() * c0_.col(k); }

double OperatorChain::group_norm(int k) const {
    return std::sqrt(std::abs((c0_.col(k).adjoint() * Mff_ * c0_.col(k))(0, 0)));
}

InverseLaplacianDecomposition inverse_laplacian_of_eigenfunction(const OperatorChain& chain, int member) {
    if (!chain.dirichlet_group()) throw ContractError("identity needs a Dirichlet eigenfunction");
    if (member < 0 || member >= chain.multiplicity()) throw DomainError("group member out of range");
    if (std::abs(chain.group_norm(member) - 1.0) > 1e-8) throw ContractError("eigenfunction is not L2-normalized");
    const Eigen::VectorXcd c = chain.group_basis().col(member);
    const QuasiMomentum& alpha = chain.alpha();
    const LayerOperators& ops = chain.layers();

    InverseLaplacianDecomposition out;
    out.density = chain.group_trace(member);
    out.beta0 = chain.beta0();
    if (!(out.density.norm() > 0.0)) throw ResolutionError("boundary trace of the eigenfunction vanished");

    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < c.size(); ++j)
        if (std::abs(c[j]) > 1e-14 * c.cwiseAbs().maxCoeff()) active.push_back(j);

    constexpr int fine = 512, M = 255, coarse = 64;
    Eigen::MatrixXcd coeffs = Eigen::MatrixXcd::Zero(2 * M + 1, 2 * M + 1);
    for (int i = -M; i <= M; ++i)
        for (int j = -M; j <= M; ++j) {
            if (alpha.is_zero() && i == 0 && j == 0) continue;
            const Vec2 q(2.0 * kPi * i + alpha.x(), 2.0 * kPi * j + alpha.y());
            cplx s = 0.0;
            for (Eigen::Index k : active) s += c[k] * chain.modes()[k].fourier(q);
            coeffs(i + M, j + M) = s;
        }
    const GridFunction lhs = apply_inverse_laplacian_coefficients(alpha, coeffs, fine);

    const InclusionSet set = disks_of(chain);
    const GreenEvaluator ev(alpha);
    const Eigen::VectorXcd wd = ops.w.cast<cplx>().cwiseProduct(out.density);
    for (int i = 0; i < coarse; ++i)
        for (int j = 0; j < coarse; ++j) {
            const Vec2 x(double(i) / coarse, double(j) / coarse);
            if (distance_to_boundary(set, x) < 0.05) continue;
            cplx phi = 0.0;
            for (Eigen::Index k : active) phi += c[k] * chain.modes()[k].value(x);
            cplx layer = 0.0;
            for (std::size_t n = 0; n < ops.size(); ++n)
                layer += ev.green(x - Vec2(ops.mesh.x(n, 0), ops.mesh.x(n, 1))) * wd[n];
            const cplx rhs = out.beta0 * (phi + layer);
            out.residual = std::max(out.residual, std::abs(lhs(i * (fine / coarse), j * (fine / coarse)) - rhs));
            ++out.sample_points;
        }
    return out;
}

Corrector corrector_for_trace(const LayerOperators& ops, const Eigen::VectorXcd& dn_phi) {
    const Eigen::Index N = ops.S.rows();
    if (dn_phi.size() != N) throw ContractError("trace size mismatch");
    const Eigen::MatrixXcd A = ops.Kstar + 0.5 * Eigen::MatrixXcd::Identity(N, N);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
    const Eigen::VectorXd sv = svd.singularValues();
    Corrector c;
    c.condition = sv[0] / sv[sv.size() - 1];
    if (!(c.condition < 1e12)) throw NumericalError("K* + 1/2 is ill-conditioned: cond = " + std::to_string(c.condition));
    c.psi = A.partialPivLu().solve(dn_phi);
    c.trace = ops.S * c.psi;
    const Eigen::VectorXcd w = ops.w.cast<cplx>();
    const cplx e = -(w.cwiseProduct(dn_phi).cwiseProduct(c.trace.conjugate())).sum();
    c.energy = e.real();
    c.energy_imag = e.imag();
    const Eigen::VectorXcd r = A * c.psi - dn_phi;
    const Eigen::VectorXd sw = ops.w.cwiseSqrt();
    c.neumann_residual = (sw.cast<cplx>().cwiseProduct(r)).norm() /
                         std::max((sw.cast<cplx>().cwiseProduct(dn_phi)).norm(), 1e-300);
    return c;
}

Corrector corrector(const OperatorChain& chain, int member) {
    if (!chain.dirichlet_group()) throw ContractError("corrector needs a Dirichlet eigenfunction");
    if (member < 0 || member >= chain.multiplicity()) throw DomainError("group member out of range");
    if (std::abs(chain.group_norm(member) - 1.0) > 1e-8) throw ContractError("eigenfunction is not L2-normalized");
    return corrector_for_trace(chain.layers(), chain.group_trace(member));
}

double corrector_harmonicity(const OperatorChain& chain, const Corrector& c, int samples_per_side, double clearance) {
    const LayerOperators& ops = chain.layers();
    const InclusionSet set = disks_of(chain);
    const GreenEvaluator ev(chain.alpha());
    const Eigen::VectorXcd wpsi = ops.w.cast<cplx>().cwiseProduct(c.psi);
    double worst = 0.0;
    for (int i = 0; i < samples_per_side; ++i)
        for (int j = 0; j < samples_per_side; ++j) {
            const Vec2 x((i + 0.5) / samples_per_side, (j + 0.5) / samples_per_side);
            if (inside_any(set, x) || distance_to_boundary(set, x) < clearance) continue;
            cplx lap = 0.0;
            for (std::size_t n = 0; n < ops.size(); ++n)
                lap += ev.laplacian(x - Vec2(ops.mesh.x(n, 0), ops.mesh.x(n, 1))) * wpsi[n];
            worst = std::max(worst, std::abs(lap));
        }
    return worst;
}

double coefficient_beta1(const OperatorChain& chain) {
    const Eigen::MatrixXcd& c0 = chain.group_basis();
    const Eigen::MatrixXcd g = c0.adjoint() * chain.Mff() * c0;
    if ((g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).norm() > 1e-10)
        throw ContractError("group basis is not orthonormal");
    double s = 0.0;
    for (int k = 0; k < chain.multiplicity(); ++k) s += corrector(chain, k).energy;
    const double b0 = chain.beta0();
    return b0 * b0 * s / chain.multiplicity();
}

std::string to_string(SeriesMethod m) {
    return m == SeriesMethod::LayerRS ? "layer_rs" : "contour_trace";
}

LayerSeries coefficients_layer_rs(const OperatorChain& chain, int order) {
    if (chain.multiplicity() != 1) throw ContractError("layer recursion needs a simple eigenvalue");
    if (order < 1 || order > 6) throw DomainError("layer recursion supports orders 1..6");
    const Eigen::MatrixXcd& Mff = chain.Mff();
    const Eigen::MatrixXcd& Mfw = chain.Mfw();
    const Eigen::MatrixXcd& Mww = chain.Mww();
    const Eigen::MatrixXcd& E = chain.eigvecs();
    const Eigen::VectorXd& lam = chain.eigvals();
    const Eigen::Index J = Mff.rows(), W = Mww.rows();
    const double b0 = chain.beta0();
    const Eigen::VectorXd dinv = chain.delta().cwiseInverse();

    Eigen::LLT<Eigen::MatrixXcd> gram(chain.Gw());
    const Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(W, W);
    Eigen::PartialPivLU<Eigen::MatrixXcd> plus(chain.Kstar() + 0.5 * Id);
    const Eigen::MatrixXcd minus = chain.Kstar() - 0.5 * Id;

    auto inner = [&](const Mixed& x, const Mixed& y) {
        return (x.f.dot(Mff * y.f + Mfw * y.w) + x.w.dot(Mfw.adjoint() * y.f + Mww * y.w));
    };
    // A_n x: only the density block is nonzero.
    auto apply_A = [&](int n, const Mixed& x) {
        Eigen::VectorXcd g = gram.solve(Mfw.adjoint() * x.f + Mww * x.w);
        for (int i = 1; i < n; ++i) g = minus * plus.solve(g);
        return Mixed{Eigen::VectorXcd::Zero(J), plus.solve(g)};
    };
    const Eigen::VectorXcd c0 = chain.group_basis().col(0);
    const Eigen::Index g0 = chain.group_columns().front();
    // Reduced resolvent of A(0) at beta0 with c0^H M x = 0.
    auto reduced = [&](const Mixed& y) {
        Mixed x;
        x.w = -y.w / b0;
        const Eigen::VectorXcd rhs = y.f - dinv.asDiagonal() * (Mfw * x.w);
        Eigen::VectorXcd coef = E.adjoint() * (Mff * rhs);
        for (Eigen::Index i = 0; i < J; ++i) coef[i] = i == g0 ? cplx(0.0) : coef[i] / (lam[i] - b0);
        x.f = E * coef;
        x.f -= c0 * c0.dot(Mff * x.f + Mfw * x.w);
        return x;
    };

    std::vector<Mixed> phi{Mixed{c0, Eigen::VectorXcd::Zero(W)}};
    std::vector<std::vector<Mixed>> Aphi(order + 1);  // Aphi[j][k] = A_j phi_k
    LayerSeries out;
    for (int n = 1; n <= order; ++n) {
        for (int j = 1; j <= n; ++j) {
            const int k = n - j;
            while (static_cast<int>(Aphi[j].size()) <= k) Aphi[j].push_back(apply_A(j, phi[Aphi[j].size()]));
        }
        cplx bn = 0.0;
        for (int j = 1; j <= n; ++j) bn += inner(phi[0], Aphi[j][n - j]);
        out.beta.push_back(bn);
        if (n == order) break;
        Mixed rhs{Eigen::VectorXcd::Zero(J), Eigen::VectorXcd::Zero(W)};
        for (int j = 1; j <= n; ++j) rhs = rhs + (out.beta[j - 1] * phi[n - j] - Aphi[j][n - j]);
        phi.push_back(reduced(rhs));
    }
    for (const cplx& b : out.beta) out.imag_residue = std::max(out.imag_residue, std::abs(b.imag()) / std::max(std::abs(b), 1e-300));
    return out;
}

ContourSeries coefficients_contour(const OperatorChain& chain, int order, int points, double radius, bool projections) {
    if (order < 1 || order > 12) throw DomainError("contour order must lie in 1..12");
    if (points < 32) throw DomainError("contour quadrature needs at least 32 points");
    const double b0 = chain.beta0();
    const double rho = radius > 0.0 ? radius : chain.gap();
    const Eigen::VectorXd& lam = chain.eigvals();
    const auto& grp = chain.group_columns();
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        const bool inside = std::find(grp.begin(), grp.end(), i) != grp.end();
        const double dist = std::abs(lam[i] - b0);
        if (inside ? dist >= rho : dist <= rho) throw NumericalError("contour does not isolate the eigenvalue group");
    }
    if (b0 <= rho) throw NumericalError("contour encloses the single-layer eigenvalue 0");

    const int m = chain.multiplicity();
    const NPSpectrum& np = chain.np();
    const Eigen::MatrixXcd U = chain.Z().adjoint() * np.densities;
    const Eigen::MatrixXcd Mfw = chain.Mfw() * U;
    const Eigen::MatrixXcd Mww = herm(U.adjoint() * chain.Mww() * U);
    const Eigen::MatrixXcd& E = chain.eigvecs();
    const Eigen::MatrixXcd& Mff = chain.Mff();
    const Eigen::VectorXd dinv = chain.delta().cwiseInverse();
    const Eigen::Index J = E.rows(), W = Mww.rows();
    const Eigen::MatrixXcd L = Mfw.adjoint() * E;
    const Eigen::MatrixXcd Rm = E.adjoint() * Mff * dinv.asDiagonal() * Mfw;

    // t_k = t_1 r^{k-1}, so sum_p ((-1)^p/p) tr Y(z)^p = sum_n z^n (tr C^n - tr R^n)/n with C = R - T_1 B
    Eigen::VectorXcd t1(W), r(W);
    for (Eigen::Index i = 0; i < W; ++i) {
        const double mu = np.mu[i];
        t1[i] = 1.0 / (mu + 0.5);
        r[i] = (mu - 0.5) / (mu + 0.5);
    }
    std::vector<cplx> trR(order + 1, 0.0);
    for (int n = 1; n <= order; ++n) trR[n] = r.array().pow(static_cast<double>(n)).sum();

    ContourSeries out;
    out.radius = rho;
    out.points = points;
    std::vector<cplx> acc(order + 1, 0.0);
    const int half = (order + 1) / 2;

    Eigen::VectorXcd s1 = Eigen::VectorXcd::Zero(J), s2 = s1, s3 = s1;
    Eigen::MatrixXcd Q1, Q2;
    cplx c1 = 0.0, c2 = 0.0;
    if (projections) {
        Q1 = Eigen::MatrixXcd::Zero(J, J);
        Q2 = Eigen::MatrixXcd::Zero(J, J);
    }
    for (int q = 0; q < points; ++q) {
        const cplx step = std::polar(rho, 2.0 * kPi * (q + 0.5) / points);
        const cplx zeta = b0 + step;
        Eigen::VectorXcd inv(J);
        for (Eigen::Index i = 0; i < J; ++i) inv[i] = 1.0 / (lam[i] - zeta);
        Eigen::MatrixXcd C = -(t1.asDiagonal() * ((L * inv.asDiagonal() * Rm - Mww) / zeta));
        C.diagonal() += r;
        std::vector<Eigen::MatrixXcd> pw(half + 1);
        pw[1] = C;
        for (int k = 2; k <= half; ++k) pw[k].noalias() = C * pw[k - 1];
        for (int n = 1; n <= order; ++n) {
            const cplx tr = n <= half ? pw[n].trace() : (pw[half].transpose().cwiseProduct(pw[n - half])).sum();
            acc[n] += step * (tr - trR[n]) / double(n);
        }
        if (projections) {
            const Eigen::VectorXcd iz = inv / zeta;
            s1 += step * inv;
            s2 += step * iz;
            s3 += step * iz / zeta;
            c1 += step / zeta;
            c2 += step / (zeta * zeta);
            Q1.noalias() += step * iz * inv.transpose();
            Q2.noalias() += step * iz * iz.transpose();
        }
    }
    for (int n = 1; n <= order; ++n) out.beta.push_back(acc[n] / double(m * points));
    if (projections) {
        // R(zeta) = [[X, X D^{-1} Mfw / zeta], [0, -I / zeta]] with X = E diag(inv) E^H Mff; A_1 = [[0, 0], [A, Bm]]
        const Eigen::Index D = J + W;
        const Eigen::MatrixXcd EhM = E.adjoint() * Mff;
        const Eigen::MatrixXcd Hm = Rm;
        const Eigen::MatrixXcd A = t1.asDiagonal() * Mfw.adjoint();
        const Eigen::MatrixXcd Bm = t1.asDiagonal() * Mww;
        const Eigen::MatrixXcd AE = A * E;
        const Eigen::MatrixXcd K1 = Hm * AE;
        const double K = points;
        Eigen::MatrixXcd P0 = Eigen::MatrixXcd::Zero(D, D), P1 = Eigen::MatrixXcd::Zero(D, D);
        P0.topLeftCorner(J, J) = -(E * s1.asDiagonal() * EhM) / K;
        P0.topRightCorner(J, W) = -(E * s2.asDiagonal() * Hm) / K;
        P0.bottomRightCorner(W, W).diagonal().setConstant(c1 / K);
        P1.topLeftCorner(J, J) = E * K1.cwiseProduct(Q1) * EhM / K;
        P1.topRightCorner(J, W) = (E * K1.cwiseProduct(Q2) * Hm - E * s3.asDiagonal() * Hm * Bm) / K;
        P1.bottomLeftCorner(W, J) = -(AE * s2.asDiagonal() * EhM) / K;
        P1.bottomRightCorner(W, W) = (-(AE * s3.asDiagonal() * Hm) + c2 * Bm) / K;
        out.P0 = std::move(P0);
        out.P1 = std::move(P1);
        out.rank = out.P0.trace().real();
        if (std::abs(out.rank - m) > 1e-6) throw ResolutionError("projection rank differs from the group multiplicity");
    }
    for (const cplx& b : out.beta) out.imag_residue = std::max(out.imag_residue, std::abs(b.imag()) / std::max(std::abs(b), 1e-300));
    return out;
}

SeriesExpansion expand(const OperatorChain& chain, int order, int contour_points) {
    SeriesExpansion e;
    e.alpha = chain.alpha();
    e.m = chain.multiplicity();
    e.beta0 = chain.beta0();
    if (e.m == 1) {
        const LayerSeries s = coefficients_layer_rs(chain, order);
        e.coeffs = s.beta;
        e.imag_residue = s.imag_residue;
        e.methods.assign(order, SeriesMethod::LayerRS);
    } else {
        const ContourSeries s = coefficients_contour(chain, order, contour_points, 0.0, false);
        e.coeffs = s.beta;
        e.imag_residue = s.imag_residue;
        e.methods.assign(order, SeriesMethod::ContourTrace);
    }
    return e;
}

SeriesEvaluation evaluate_series(const SeriesExpansion& exp, std::complex<double> z) {
    SeriesEvaluation r;
    r.beta_hat = exp.beta0;
    cplx zn = 1.0;
    for (const cplx& b : exp.coeffs) {
        zn *= z;
        r.beta_hat += zn * b;
    }
    r.lambda_hat = 1.0 / r.beta_hat;
    const int N = static_cast<int>(exp.coeffs.size());
    r.certified = exp.certificate && separation_check(*exp.certificate, z) == SeparationStatus::Certified;
    r.error_bound = r.certified ? truncation_bound(*exp.certificate, N, z) : std::numeric_limits<double>::infinity();
    r.lambda_error = r.error_bound / std::norm(r.beta_hat);
    return r;
}

std::string series_json(const SeriesExpansion& exp) {
    nlohmann::json j;
    j["alpha"] = {exp.alpha.x(), exp.alpha.y()};
    j["m"] = exp.m;
    j["beta0"] = exp.beta0;
    std::vector<double> re, im;
    for (const cplx& b : exp.coeffs) {
        re.push_back(b.real());
        im.push_back(b.imag());
    }
    j["coeffs"] = re;
    j["coeffs_imag"] = im;
    if (exp.certificate) {
        j["r_star"] = exp.certificate->r_star;
        j["z_star"] = exp.certificate->z_star;
        j["d"] = exp.certificate->d;
    } else {
        j["r_star"] = nullptr;
        j["z_star"] = nullptr;
        j["d"] = nullptr;
    }
    std::vector<std::string> tags;
    for (SeriesMethod m : exp.methods) tags.push_back(to_string(m));
    j["method_tags"] = tags;
    return j.dump(2);
}

}  // namespace bloch
