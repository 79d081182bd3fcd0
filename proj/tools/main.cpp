#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "bloch/certificates.hpp"
#include "bloch/limit_spectrum.hpp"
#include "bloch/np_spectrum.hpp"
#include "bloch/oracle.hpp"
#include "bloch/pipeline.hpp"

using namespace bloch;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNonConforming = 2, kNumerical = 3 };

struct Common {
    std::string config;
    std::optional<int> order;
    std::optional<double> contrast;
    std::optional<std::string> out;
    std::optional<int> jobs;
    std::optional<std::string> resolution;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "crystal TOML file")->required()->check(CLI::ExistingFile);
    app->add_option("--order", c.order, "series order N (1..6)");
    app->add_option("--contrast", c.contrast, "host contrast k (replaces the z list)");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--jobs", c.jobs, "worker threads (default: BLOCH_SERIES_JOBS or 1)");
    app->add_option("--resolution", c.resolution, "coarse, default or fine");
}

CrystalConfig configure(const Common& c) {
    CrystalConfig cfg = load_config(c.config);
    if (c.order) cfg.order = *c.order;
    if (c.contrast) {
        cfg.contrast = *c.contrast;
        cfg.z_list.clear();
    }
    if (c.out) cfg.output_dir = *c.out;
    if (c.resolution) cfg.resolution = resolution_preset(*c.resolution);
    cfg.validate();
    return cfg;
}

std::ofstream open_out(const CrystalConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.output_dir);
    const auto p = cfg.output_dir / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IOError("cannot write " + p.string());
    std::cout << p.string() << '\n';
    return f;
}

DirichletSpectrum dirichlet_for(const CrystalConfig& cfg, const InclusionSet& set, bool periodic) {
    if (set.all_disks())
        return disks_dirichlet(set, cfg.resolution.n_max, cfg.resolution.k_max,
                               periodic ? axisymmetric_kmax_for_mass(1e-3) : 0);
    if (set.size() != 1) throw ConfigError("finite-difference Dirichlet spectra support a single inclusion");
    return fd_dirichlet(set[0], 1.0 / (2 * cfg.resolution.boundary_nodes), 4 * cfg.resolution.k_max);
}

int cmd_band(const Common& c) {
    const CrystalConfig cfg = configure(c);
    RunOptions opt{resolve_jobs(c.jobs), cfg.oracle};
    const RunFiles f = run_band(cfg, opt);
    std::cout << f.csv.string() << '\n' << f.json.string() << '\n' << f.plot.string() << '\n';
    return kOk;
}

int cmd_compare(const Common& c) {
    const CrystalConfig cfg = configure(c);
    RunFiles f;
    const CompareReport rep = run_compare(cfg, {resolve_jobs(c.jobs), true}, &f);
    std::printf("%-24s %10s %5s %3s %12s %12s %12s  %s\n", "alpha", "z", "j", "p", "observed", "bound", "slack",
                "status");
    for (const CompareRow& r : rep.rows) {
        char a[64];
        std::snprintf(a, sizeof a, "(%.6f,%.6f)", r.band.alpha.x(), r.band.alpha.y());
        std::printf("%-24s %10.4g %5d %3d %12.4e %12.4e %12.4e  %s\n", a, r.band.z, r.band.branch, r.order, r.observed,
                    r.bound, r.slack, to_string(r.status).c_str());
    }
    std::printf("%d passed, %d failed, %d uncertified\n", rep.passed, rep.failed, rep.uncertified);
    std::cout << f.csv.string() << '\n' << f.plot.string() << '\n';
    return rep.conforms() ? kOk : kNonConforming;
}

int cmd_certify(const Common& c) {
    const CrystalConfig cfg = configure(c);
    const InclusionSet set = cfg.inclusions();
    const std::optional<double> theta = cfg.theta();
    const int max_branch = *std::max_element(cfg.branches.begin(), cfg.branches.end());
    std::ofstream os = open_out(cfg, "certificates.json");
    os << "[\n";
    bool first = true;
    for (const PathSample& s : sample_path(cfg.path)) {
        const DirichletSpectrum spec = dirichlet_for(cfg, set, s.alpha.is_zero());
        const LimitSpectrum limit = limit_spectrum(s.alpha, spec, max_branch + 3);
        const GreenEvaluator ev(s.alpha);
        const NPSpectrum np = resonance_spectrum(assemble(build_mesh(set, cfg.resolution.boundary_nodes), ev));
        for (int j : cfg.branches) {
            CertificateInputs in;
            in.theta = theta;
            in.np = &np;
            const Certificate cert = make_certificate(limit, static_cast<std::size_t>(j), in);
            std::cout << "branch " << j << '\n' << certificate_table(cert) << '\n';
            os << (first ? "" : ",\n") << certificate_json(cert);
            first = false;
        }
    }
    os << "\n]\n";
    return kOk;
}

int cmd_np(const Common& c) {
    const CrystalConfig cfg = configure(c);
    const InclusionSet set = cfg.inclusions();
    std::ofstream os = open_out(cfg, "np_spectrum.csv");
    bool header = true;
    for (const PathSample& s : sample_path(cfg.path)) {
        const GreenEvaluator ev(s.alpha);
        write_np_csv(os, resonance_spectrum(assemble(build_mesh(set, cfg.resolution.boundary_nodes), ev)), header);
        header = false;
    }
    return kOk;
}

int cmd_limit(const Common& c, int count) {
    const CrystalConfig cfg = configure(c);
    const InclusionSet set = cfg.inclusions();
    std::ofstream os = open_out(cfg, "limit_spectrum.csv");
    bool header = true;
    for (const PathSample& s : sample_path(cfg.path)) {
        write_limit_csv(os, limit_spectrum(s.alpha, dirichlet_for(cfg, set, s.alpha.is_zero()), count), header);
        header = false;
    }
    return kOk;
}

int cmd_oracle(const Common& c, int count) {
    const CrystalConfig cfg = configure(c);
    const InclusionSet set = cfg.inclusions();
    OracleOptions opt;
    opt.cutoff = cfg.resolution.oracle_cutoff;
    std::ofstream os = open_out(cfg, "oracle.csv");
    bool header = true;
    for (const PathSample& s : sample_path(cfg.path))
        for (double z : cfg.z_values()) {
            write_oracle_csv(os, bloch_solve(set, s.alpha.value(), 1.0 / z, count, opt), header);
            header = false;
        }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bloch band series for high-contrast periodic crystals"};
    app.require_subcommand(1);
    Common common;
    int count = 6;

    CLI::App* band = app.add_subcommand("band", "series band diagram along the Brillouin path");
    CLI::App* compare = app.add_subcommand("compare", "series against the plane-wave oracle with error bounds");
    CLI::App* certify = app.add_subcommand("certify", "convergence certificates (r*, z*, mu-, theta, d)");
    CLI::App* np = app.add_subcommand("np-spectrum", "Neumann-Poincare resonances along the path");
    CLI::App* limit = app.add_subcommand("limit", "limit spectrum along the path");
    CLI::App* oracle = app.add_subcommand("oracle", "plane-wave Bloch eigenvalues along the path");
    for (CLI::App* s : {band, compare, certify, np, limit, oracle}) add_common(s, common);
    limit->add_option("--count", count, "number of limit values");
    oracle->add_option("--count", count, "number of eigenvalues");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*band) return cmd_band(common);
        if (*compare) return cmd_compare(common);
        if (*certify) return cmd_certify(common);
        if (*np) return cmd_np(common);
        if (*limit) return cmd_limit(common, count);
        if (*oracle) return cmd_oracle(common, count);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const IOError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}
