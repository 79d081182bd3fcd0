#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "bloch/lattice_green.hpp"
#include "bloch/limit_spectrum.hpp"
#include "bloch/np_spectrum.hpp"

namespace bloch {

enum class CertSource { ClosedFormDisk, ComputedNP, User };

std::string to_string(CertSource s);

struct Certificate {
    QuasiMomentum alpha;
    double d = 0.0;
    double mu_minus = 0.0;
    double z_star = 0.0;
    double r_star = 0.0;
    std::optional<double> theta;
    CertSource d_source = CertSource::ClosedFormDisk;
    CertSource mu_source = CertSource::ClosedFormDisk;
    CertSource theta_source = CertSource::ClosedFormDisk;
    /// Both candidates when available; mu_minus is the larger one.
    std::optional<double> mu_minus_closed_form;
    std::optional<double> mu_minus_computed;
    /// Discretization slack of the computed value.
    double mu_slack = 0.0;
    std::string note;

    /// Checks -1/2 < mu_minus < 0, z* in [-1, 0) and 0 < r* < |z*|.
    bool valid() const;
};

/// (b^2 - a^2)/(b^2 + a^2) for a disk of radius a buffered by a concentric disk of radius b.
double theta_disks(double a, double b);
/// 1 / max_i (1 + C_{R_i}) ||DN_i|| from user-supplied per-inclusion constants.
double theta_general(const std::vector<double>& c_r, const std::vector<double>& dn_norm);
double mu_minus_from_theta(double theta);
double z_star(double mu_minus);
/// Half the distance from values[j] to the nearest distinct limit value.
double gap_d(const LimitSpectrum& limit, std::size_t j);
double radius(const QuasiMomentum& alpha, double d, double mu_minus, double z_star);

enum class SeparationStatus { Certified, Uncertified };
SeparationStatus separation_check(const Certificate& cert, std::complex<double> z);

/// d |z|^{p+1} / (r*^p (r* - |z|)).
double truncation_bound(const Certificate& cert, int p, std::complex<double> z);

/// NP poles (mu + 1/2)/(mu - 1/2) over eigenvalues away from 1/2.
std::vector<double> np_poles(const NPSpectrum& spec);

struct CertificateInputs {
    std::optional<double> theta;            ///< closed-form or user theta
    CertSource theta_source = CertSource::ClosedFormDisk;
    const NPSpectrum* np = nullptr;          ///< computed route to mu_minus
    std::optional<double> d;                 ///< overrides gap_d
};

/// Certifies limit value j; with both routes the larger mu_minus is used and the discrepancy noted.
Certificate make_certificate(const LimitSpectrum& limit, std::size_t j, const CertificateInputs& in);

std::string certificate_json(const Certificate& cert);
std::string certificate_table(const Certificate& cert);

}  // namespace bloch
