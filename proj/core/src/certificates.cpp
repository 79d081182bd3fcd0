#include "bloch/certificates.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace bloch {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string to_string(CertSource s) {
    switch (s) {
        case CertSource::ClosedFormDisk: return "closed_form_disk";
        case CertSource::ComputedNP: return "computed_np";
        case CertSource::User: return "user";
    }
    return "unknown";
}

bool Certificate::valid() const {
    return mu_minus > -0.5 && mu_minus < 0.0 && z_star >= -1.0 && z_star < 0.0 && r_star > 0.0 &&
           r_star < std::abs(z_star) && d > 0.0;
}

double theta_disks(double a, double b) {
    if (!(a > 0.0) || !(a < b)) throw DomainError("theta_disks needs 0 < a < b");
    return (b * b - a * a) / (b * b + a * a);
}

double theta_general(const std::vector<double>& c_r, const std::vector<double>& dn_norm) {
    if (c_r.empty() || c_r.size() != dn_norm.size()) throw DomainError("theta_general needs one (C_R, ||DN||) pair per inclusion");
    double worst = 0.0;
    for (std::size_t i = 0; i < c_r.size(); ++i) {
        if (!(c_r[i] >= 0.0) || !(dn_norm[i] > 0.0)) throw DomainError("C_R must be >= 0 and ||DN|| > 0");
        worst = std::max(worst, (1.0 + c_r[i]) * dn_norm[i]);
    }
    return 1.0 / worst;
}

double mu_minus_from_theta(double theta) {
    if (!(theta > 0.0)) throw DomainError("theta must be positive");
    return std::min(0.5, 0.5 * theta) - 0.5;
}

double z_star(double mu_minus) {
    if (!(mu_minus > -0.5) || !(mu_minus < 0.5)) throw DomainError("z_star needs -1/2 < mu_minus < 1/2");
    return (mu_minus + 0.5) / (mu_minus - 0.5);
}

double gap_d(const LimitSpectrum& limit, std::size_t j) {
    const auto& v = limit.values;
    if (j + 1 >= v.size()) throw ResolutionError("gap_d needs the next smaller limit value resolved");
    const double b = v[j].beta;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double dist = std::abs(v[i].beta - b);
        if (dist > 1e-12 * b) best = std::min(best, dist);
    }
    if (!std::isfinite(best)) throw ResolutionError("no distinct neighbor for gap_d");
    return 0.5 * best;
}

double radius(const QuasiMomentum& alpha, double d, double mu_minus, double zs) {
    if (!(d > 0.0)) throw DomainError("radius needs d > 0");
    if (!(mu_minus < 0.5)) throw DomainError("radius needs mu_minus < 1/2");
    const double a2 = alpha.is_zero() ? 4.0 * kPi * kPi : alpha.norm2();
    return a2 * d * std::abs(zs) / (1.0 / (0.5 - mu_minus) + a2 * d);
}

SeparationStatus separation_check(const Certificate& cert, std::complex<double> z) {
    return std::abs(z) < cert.r_star ? SeparationStatus::Certified : SeparationStatus::Uncertified;
}

double truncation_bound(const Certificate& cert, int p, std::complex<double> z) {
    if (p < 0) throw DomainError("order must be non-negative");
    const double az = std::abs(z);
    if (!(az < cert.r_star)) throw DomainError("truncation bound requires |z| < r*");
    return cert.d * std::pow(az, p + 1) / (std::pow(cert.r_star, p) * (cert.r_star - az));
}

std::vector<double> np_poles(const NPSpectrum& spec) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < spec.mu.size(); ++i)
        if (std::abs(spec.mu[i] - 0.5) >= kHalfTolerance) out.push_back((spec.mu[i] + 0.5) / (spec.mu[i] - 0.5));
    return out;
}

Certificate make_certificate(const LimitSpectrum& limit, std::size_t j, const CertificateInputs& in) {
    Certificate c;
    c.alpha = limit.alpha;
    if (in.d) {
        c.d = *in.d;
        c.d_source = CertSource::User;
    } else {
        c.d = gap_d(limit, j);
        c.d_source = CertSource::ClosedFormDisk;
    }
    if (in.theta) {
        c.theta = *in.theta;
        c.theta_source = in.theta_source;
        c.mu_minus_closed_form = mu_minus_from_theta(*in.theta);
    }
    if (in.np) {
        c.mu_slack = in.np->eps_d;
        c.mu_minus_computed = in.np->mu_minus - in.np->eps_d;
    }
    if (!c.mu_minus_closed_form && !c.mu_minus_computed)
        throw ConfigError("certificate needs a buffer radius, a user theta or a computed NP spectrum");
    if (c.mu_minus_closed_form && c.mu_minus_computed) {
        const bool computed_better = *c.mu_minus_computed > *c.mu_minus_closed_form;
        c.mu_minus = computed_better ? *c.mu_minus_computed : *c.mu_minus_closed_form;
        c.mu_source = computed_better ? CertSource::ComputedNP : in.theta_source;
        std::ostringstream os;
        os << std::setprecision(6) << "closed-form mu- " << *c.mu_minus_closed_form << ", computed mu- "
           << *c.mu_minus_computed << "; using " << (computed_better ? "computed" : "closed form");
        if (*c.mu_minus_computed < *c.mu_minus_closed_form - 1e-4) os << "; computed value violates the closed-form bound";
        c.note = os.str();
    } else if (c.mu_minus_closed_form) {
        c.mu_minus = *c.mu_minus_closed_form;
        c.mu_source = in.theta_source;
    } else {
        c.mu_minus = *c.mu_minus_computed;
        c.mu_source = CertSource::ComputedNP;
    }
    if (!(c.mu_minus > -0.5 && c.mu_minus < 0.0))
        throw DomainError("certification requires -1/2 < mu_minus < 0");
    c.z_star = z_star(c.mu_minus);
    c.r_star = radius(c.alpha, c.d, c.mu_minus, c.z_star);
    return c;
}

std::string certificate_json(const Certificate& c) {
    nlohmann::json j;
    j["alpha"] = {c.alpha.x(), c.alpha.y()};
    j["d"] = c.d;
    j["mu_minus"] = c.mu_minus;
    j["z_star"] = c.z_star;
    j["r_star"] = c.r_star;
    j["theta"] = c.theta ? nlohmann::json(*c.theta) : nlohmann::json(nullptr);
    j["source"] = {{"d", to_string(c.d_source)}, {"mu_minus", to_string(c.mu_source)}, {"theta", to_string(c.theta_source)}};
    if (c.mu_minus_closed_form) j["mu_minus_closed_form"] = *c.mu_minus_closed_form;
    if (c.mu_minus_computed) j["mu_minus_computed"] = *c.mu_minus_computed;
    j["mu_slack"] = c.mu_slack;
    j["note"] = c.note;
    j["valid"] = c.valid();
    return j.dump(2);
}

std::string certificate_table(const Certificate& c) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "alpha      (" << c.alpha.x() << ", " << c.alpha.y() << ")\n";
    if (c.theta) os << "theta      " << *c.theta << "  [" << to_string(c.theta_source) << "]\n";
    os << "mu_minus   " << c.mu_minus << "  [" << to_string(c.mu_source) << "]\n";
    os << "z_star     " << c.z_star << '\n';
    os << "d          " << c.d << "  [" << to_string(c.d_source) << "]\n";
    os << "r_star     " << c.r_star << '\n';
    os << "k_min      " << 1.0 / c.r_star << '\n';
    if (!c.note.empty()) os << "note       " << c.note << '\n';
    return os.str();
}

}  // namespace bloch
