#include "bloch/np_spectrum.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& A) { return 0.5 * (A + A.adjoint()); }

}  // namespace

Eigen::VectorXd kress_weights(std::size_t n_nodes) {
    const std::size_t n = n_nodes / 2;
    Eigen::VectorXd R(n_nodes);
    for (std::size_t j = 0; j < n_nodes; ++j) {
        const double t = 2.0 * kPi * double(j) / double(n_nodes);
        double s = 0.0;
        for (std::size_t m = 1; m < n; ++m) s += std::cos(double(m) * t) / double(m);
        R[j] = -(2.0 * kPi / double(n)) * s - (kPi / double(n * n)) * std::cos(double(n) * t);
    }
    return R;
}

LayerOperators assemble(const BoundaryMesh& mesh, const GreenEvaluator& ev) {
    const std::size_t N = mesh.size();
    const std::size_t n = mesh.nodes_per_inclusion;
    LayerOperators ops;
    ops.alpha = ev.alpha();
    ops.mesh = mesh;
    ops.w = mesh.weight;
    ops.S.resize(N, N);
    ops.Kstar.resize(N, N);
    const Eigen::VectorXd R = kress_weights(n);
    const cplx rem0 = ev.smooth_remainder(Vec2::Zero());
    const Vec2c grad0 = ev.smooth_remainder_gradient_at_zero();
    const double h = 2.0 * kPi / double(n);
    Eigen::MatrixXcd G(N, N);
    Eigen::MatrixXcd Gx(N, N), Gy(N, N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j) {
            const Vec2 r = mesh.x.row(i).transpose() - mesh.x.row(j).transpose();
            const GreenValue g = ev.evaluate(r);
            if (!std::isfinite(g.value.real()) || !std::isfinite(g.value.imag()))
                throw NumericalError("non-finite kernel value during assembly");
            G(i, j) = g.value;
            G(j, i) = std::conj(g.value);
            Gx(i, j) = g.gradient[0];
            Gy(i, j) = g.gradient[1];
            Gx(j, i) = -std::conj(g.gradient[0]);
            Gy(j, i) = -std::conj(g.gradient[1]);
        }
    for (std::size_t i = 0; i < N; ++i) {
        const Vec2 nu = mesh.normal.row(i).transpose();
        for (std::size_t j = 0; j < N; ++j) {
            if (mesh.owner[i] == mesh.owner[j]) {
                const std::size_t li = i % n, lj = j % n;
                cplx smooth;
                if (i == j) smooth = std::log(mesh.speed[i] * mesh.speed[i]) / (4.0 * kPi) + rem0;
                else {
                    const double sn = std::sin(0.5 * (mesh.param[i] - mesh.param[j]));
                    smooth = G(i, j) - std::log(4.0 * sn * sn) / (4.0 * kPi);
                }
                ops.S(i, j) = (smooth * h + R[(li + n - lj) % n] / (4.0 * kPi)) * mesh.speed[j];
            } else {
                ops.S(i, j) = G(i, j) * mesh.weight[j];
            }
            if (i == j)
                ops.Kstar(i, i) = (mesh.curvature[i] / (4.0 * kPi) + nu.x() * grad0[0] + nu.y() * grad0[1]) * mesh.weight[i];
            else
                ops.Kstar(i, j) = (nu.x() * Gx(i, j) + nu.y() * Gy(i, j)) * mesh.weight[j];
        }
    }
    if (!ops.S.allFinite() || !ops.Kstar.allFinite()) throw NumericalError("assembly produced non-finite entries");
    return ops;
}

Eigen::MatrixXcd LayerOperators::gram() const {
    const Eigen::MatrixXcd Sw = w.asDiagonal() * S;
    return -hermitian_part(Sw);
}

Eigen::MatrixXcd LayerOperators::admissible_basis() const {
    const Eigen::Index N = S.rows();
    if (!alpha.is_zero()) return Eigen::MatrixXcd::Identity(N, N);
    Eigen::MatrixXcd v = w.cast<cplx>() / w.norm();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(v);
    Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(N, N);
    return Q.rightCols(N - 1);
}

double plemelj_residual(const LayerOperators& ops) {
    const Eigen::VectorXd winv = ops.w.cwiseInverse();
    const Eigen::MatrixXcd K = winv.asDiagonal() * ops.Kstar.adjoint() * ops.w.asDiagonal();
    const Eigen::MatrixXcd Z = ops.admissible_basis();
    Eigen::MatrixXcd res = ops.S * ops.Kstar * Z - K * ops.S * Z;
    if (ops.alpha.is_zero()) {
        // The mean term of G^0 makes the identity hold modulo constants on mean-zero densities.
        const Eigen::RowVectorXcd mean = ops.w.cast<cplx>().transpose() * res / ops.w.sum();
        res.rowwise() -= mean;
    }
    return res.norm() / ops.S.norm();
}

NPSpectrum resonance_spectrum(const LayerOperators& ops) {
    const Eigen::MatrixXcd Z = ops.admissible_basis();
    const Eigen::MatrixXcd Sw = ops.w.asDiagonal() * ops.S;
    const Eigen::MatrixXcd C = -hermitian_part(Z.adjoint() * Sw * Z);
    const Eigen::MatrixXcd A = -(Z.adjoint() * Sw * ops.Kstar * Z);
    const double herm = (A - A.adjoint()).norm() / std::max(A.norm(), 1e-300);
    Eigen::LLT<Eigen::MatrixXcd> llt(C);
    if (llt.info() != Eigen::Success) throw NumericalError("-S is not positive definite on the density space");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(A), C);
    if (es.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ce(C);
        const double cond = ce.eigenvalues().maxCoeff() / ce.eigenvalues().minCoeff();
        throw NumericalError("NP eigensolver failed; cond(-S) = " + std::to_string(cond));
    }
    NPSpectrum out;
    out.alpha = ops.alpha;
    out.mu = es.eigenvalues();
    out.densities = Z * es.eigenvectors();
    out.hermitian_residue = herm;
    out.mu_minus = out.mu[0];
    out.mu_plus = out.mu_minus;
    out.half_count = 0;
    for (Eigen::Index i = 0; i < out.mu.size(); ++i) {
        if (std::abs(out.mu[i] - 0.5) < kHalfTolerance) ++out.half_count;
        else if (out.mu[i] < 0.5) out.mu_plus = std::max(out.mu_plus, out.mu[i]);
    }
    const double top = out.mu.maxCoeff();
    out.eps_d = std::max(out.alpha.is_zero() ? 0.0 : std::abs(top - 0.5), herm * out.mu.cwiseAbs().maxCoeff());
    return out;
}

Eigen::VectorXcd project_W3_density(const LayerOperators& ops, const Eigen::VectorXcd& rho) {
    if (rho.size() != static_cast<Eigen::Index>(ops.size())) throw ContractError("density size mismatch");
    const std::size_t n = ops.mesh.nodes_per_inclusion;
    const std::size_t m = ops.mesh.inclusion_count;
    Eigen::MatrixXcd V;
    if (!ops.alpha.is_zero()) {
        Eigen::MatrixXcd ind = Eigen::MatrixXcd::Zero(ops.size(), m);
        for (std::size_t i = 0; i < m; ++i) ind.block(i * n, i, n, 1).setOnes();
        V = ops.S.partialPivLu().solve(ind);
    } else {
        const double mean = std::abs((ops.w.cast<cplx>().array() * rho.array()).sum());
        if (mean > 1e-10 * std::max(1.0, (ops.w.cast<cplx>().array() * rho.array()).abs().sum()))
            throw ContractError("densities at alpha = 0 must have zero weighted mean");
        if (m == 1) return rho;
        const NPSpectrum spec = resonance_spectrum(ops);
        V = spec.densities.rightCols(spec.half_count);
    }
    const Eigen::MatrixXcd C = ops.gram();
    const Eigen::MatrixXcd VC = V.adjoint() * C;
    const Eigen::VectorXcd coef = (VC * V).ldlt().solve(VC * rho);
    return rho - V * coef;
}

void write_np_csv(std::ostream& os, const NPSpectrum& spec, bool header) {
    if (header) os << "alpha_x,alpha_y,index,mu\n";
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < spec.mu.size(); ++i)
        os << spec.alpha.x() << ',' << spec.alpha.y() << ',' << i << ',' << spec.mu[i] << '\n';
}

}  // namespace bloch
