#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bloch/pipeline.hpp"

using namespace bloch;

namespace {
constexpr double kPi = std::numbers::pi;

const char* kDisk = R"(
[crystal]
disks = [{ center = [0.5, 0.5], a = 0.3, b = 0.45 }]

[contrast]
k = 200.0

[path]
vertices = ["G", "X", "M", "G"]
samples_per_leg = 16

[series]
order = 3
)";

std::filesystem::path scratch(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("bloch_pipeline_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "t.toml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}
}  // namespace

TEST_CASE("config parses with defaults and the standard path") {
    const CrystalConfig c = parse_config(kDisk);
    REQUIRE(c.disks.size() == 1);
    CHECK(c.disks[0].a == 0.3);
    CHECK(*c.disks[0].b == 0.45);
    CHECK(*c.contrast == 200.0);
    CHECK(c.order == 3);
    CHECK(c.branches == std::vector<int>{0});
    CHECK(c.resolution.boundary_nodes == 128);
    CHECK(c.output_dir == "out");
    CHECK(c.z_values() == std::vector<double>{1.0 / 200.0});
    CHECK(*c.theta() == doctest::Approx(0.38461538461538464).epsilon(1e-15));

    const auto s = sample_path(c.path);
    REQUIRE(s.size() == 48);
    CHECK(s[0].alpha.is_zero());
    CHECK(s[16].alpha.x() == kPi);
    CHECK(s[16].alpha.y() == 0.0);
    CHECK(s[32].alpha.x() == kPi);
    CHECK(s[32].alpha.y() == kPi);
    CHECK(s[47].s == doctest::Approx(2 * kPi + std::sqrt(2.0) * kPi * 15.0 / 16.0));
    for (std::size_t i = 1; i < s.size(); ++i) {
        CHECK(s[i].s > s[i - 1].s);
        CHECK_FALSE(s[i].alpha.is_zero());
    }
}

TEST_CASE("custom vertices, z lists and resolution overrides") {
    const CrystalConfig c = parse_config(R"(
[crystal]
disks = [{ a = 0.25 }]
[contrast]
z = [0.004, 0.002]
[path]
vertices = [[0.5, 0.0], "M"]
samples_per_leg = 2
[series]
branches = [0, 1]
oracle = true
[resolution]
preset = "coarse"
boundary_nodes = 96
[output]
dir = "runs/a"
)");
    CHECK_FALSE(c.contrast);
    CHECK(c.z_values() == std::vector<double>{0.004, 0.002});
    CHECK_FALSE(c.theta());
    CHECK(c.oracle);
    CHECK(c.resolution.preset == "coarse");
    CHECK(c.resolution.boundary_nodes == 96);
    CHECK(c.resolution.n_max == 4);
    CHECK(c.output_dir == "runs/a");
    const auto s = sample_path(c.path);
    REQUIRE(s.size() == 2);
    CHECK(s[0].alpha.x() == doctest::Approx(kPi / 2));
    CHECK(s[1].alpha.x() == doctest::Approx(3 * kPi / 4));
    CHECK(s[1].alpha.y() == doctest::Approx(kPi / 2));
}

TEST_CASE("unknown keys and malformed input name the key") {
    CHECK(error_of("[crystal]\ndisks = [{ center = [0.5, 0.5], radius = 0.3 }]\n[contrast]\nk = 10.0\n")
              .find("crystal.disks[0].radius: unknown key") != std::string::npos);
    CHECK(error_of("[crystal]\ndisks = [{ a = 0.3 }]\n[contrast]\nk = 10.0\nkk = 3\n").find("contrast.kk") !=
          std::string::npos);
    CHECK(error_of("[crystals]\n").find("crystals: unknown key") != std::string::npos);
    CHECK(error_of("[crystal]\ndisks = [{ a = 0.3 }]\n[contrast]\nk = 10.0\n[series]\norder = 2.5\n")
              .find("series.order: expected an integer") != std::string::npos);
    const std::string syntax = error_of("[crystal\n");
    CHECK(syntax.find("t.toml:1") != std::string::npos);
    CHECK(error_of("[crystal]\ndisks = [{ a = 0.3 }]\n[contrast]\nk = 10.0\n[path]\nvertices = [\"Q\"]\n")
              .find("unknown vertex 'Q'") != std::string::npos);
}

TEST_CASE("validation rejects inconsistent crystals before any computation") {
    auto with = [](const std::string& body) { return error_of(body); };
    CHECK(with("[crystal]\ndisks = [{ a = 0.3, b = 0.2 }]\n[contrast]\nk = 10.0\n").find("must exceed a") !=
          std::string::npos);
    CHECK(with("[crystal]\ndisks = [{ a = 0.3, b = 0.55 }]\n[contrast]\nk = 10.0\n").find("leaves the unit cell") !=
          std::string::npos);
    CHECK(with("[crystal]\ndisks = [{ a = 0.6 }]\n[contrast]\nk = 10.0\n").find("not strictly inside") !=
          std::string::npos);
    CHECK(with("[crystal]\ndisks = [{ a = 0.3 }]\n").find("give k or z") != std::string::npos);
    CHECK(with("[crystal]\ndisks = [{ a = 0.3 }]\n[contrast]\nk = 0.5\n").find("contrast.k") != std::string::npos);
    CHECK(with("[crystal]\ndisks = [{ a = 0.3 }]\n[contrast]\nk = 10.0\n[series]\norder = 7\n").find("series.order") !=
          std::string::npos);
    CHECK(with("[crystal]\ndisks = [{ a = 0.3 }]\n[contrast]\nk = 10.0\n[series]\nbranches = [0, 0]\n")
              .find("duplicate") != std::string::npos);
    CHECK(with("[crystal]\ndisks = [{ a = 0.3 }]\n[contrast]\nk = 10.0\n[path]\nvertices = [[-1.0, 0.0], \"X\"]\n")
              .find("outside") != std::string::npos);
    CHECK(with("[crystal]\ndisks = [{ a = 0.3 }]\n[contrast]\nk = 10.0\n[resolution]\npreset = \"huge\"\n")
              .find("huge") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/crystal.toml"), IOError);
}

TEST_CASE("job count resolution") {
    ::unsetenv("BLOCH_SERIES_JOBS");
    CHECK(resolve_jobs(std::nullopt) == 1);
    CHECK(resolve_jobs(3) == 3);
    CHECK_THROWS_AS(resolve_jobs(0), ConfigError);
    ::setenv("BLOCH_SERIES_JOBS", "4", 1);
    CHECK(resolve_jobs(std::nullopt) == 4);
    CHECK(resolve_jobs(2) == 2);
    ::setenv("BLOCH_SERIES_JOBS", "four", 1);
    CHECK_THROWS_AS(resolve_jobs(std::nullopt), ConfigError);
    ::unsetenv("BLOCH_SERIES_JOBS");
}

TEST_CASE("float format is round-trip safe") {
    for (double v : {0.1, 1.0 / 3.0, 64.25762181051985, 1e-300, -2.5e17, 0.008627003415879422}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("band point at X carries series, certificate and bound") {
    const CrystalConfig c = parse_config(kDisk);
    const BandPoint p = compute_point(c, {QuasiMomentum(kPi, 0.0), 0.0}, false);
    REQUIRE(p.rows.size() == 1);
    const BandRow& r = p.rows[0];
    CHECK(r.certified);
    CHECK(std::abs(r.z) < r.r_star);
    CHECK(r.d == doctest::Approx(0.004716194454191965).epsilon(1e-10));
    CHECK(r.mu_minus >= -0.30769230769230765);
    CHECK(std::isfinite(r.error_bound));
    CHECK_FALSE(r.lambda_oracle);
    // omega^2 = 1/beta_hat lies slightly below the limit value
    CHECK(r.lambda_series < 64.25762181051985);
    CHECK(r.lambda_series == doctest::Approx(64.2576 - 0.005 * 126.27).epsilon(2e-3));
    REQUIRE(p.expansions.size() == 1);
    CHECK(p.expansions[0].coeffs.size() == 3);
    CHECK(p.expansions[0].coeffs[0].real() == doctest::Approx(0.0305808490188655).epsilon(1e-9));
}

TEST_CASE("b omitted falls back to the computed NP bound") {
    CrystalConfig c = parse_config(kDisk);
    c.disks[0].b.reset();
    const BandPoint p = compute_point(c, {QuasiMomentum(kPi, 0.0), 0.0}, false);
    REQUIRE(p.expansions[0].certificate);
    const Certificate& cert = *p.expansions[0].certificate;
    CHECK(cert.mu_source == CertSource::ComputedNP);
    CHECK_FALSE(cert.mu_minus_closed_form);
    CHECK(p.rows[0].certified);
}

TEST_CASE("gamma is routed to the periodic branch") {
    CrystalConfig c = parse_config(kDisk);
    c.resolution = resolution_preset("coarse");
    const BandPoint p = compute_point(c, {QuasiMomentum(0.0, 0.0), 0.0}, false);
    REQUIRE(p.expansions[0].certificate);
    const Certificate& cert = *p.expansions[0].certificate;
    // the periodic radius uses |alpha|^2 -> 4 pi^2
    CHECK(cert.r_star == doctest::Approx(radius(QuasiMomentum(0.0, 0.0), cert.d, cert.mu_minus, cert.z_star)));
    CHECK(1.0 / p.expansions[0].beta0 == doctest::Approx(79.6152704).epsilon(1e-6));
}

TEST_CASE("non-disk inclusions fail with alpha context") {
    const CrystalConfig c = parse_config(R"(
[crystal]
curves = [{ label = "square", points = [[0.3, 0.3], [0.7, 0.3], [0.7, 0.7], [0.3, 0.7]] }]
[contrast]
k = 100.0
)");
    try {
        compute_point(c, {QuasiMomentum(kPi, 0.0), 0.0}, false);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("alpha=(3.1415926535897931,0)") != std::string::npos);
    }
}

TEST_CASE("band output is deterministic and independent of the worker count") {
    CrystalConfig c = parse_config(kDisk);
    c.path.samples_per_leg = 2;
    c.resolution = resolution_preset("coarse");
    c.branches = {0, 1};
    const auto d1 = scratch("serial"), d2 = scratch("parallel");
    c.output_dir = d1;
    const RunFiles f1 = run_band(c, {1, false});
    c.output_dir = d2;
    const RunFiles f2 = run_band(c, {3, false});
    const std::string a = slurp(f1.csv), b = slurp(f2.csv);
    CHECK(a == b);
    CHECK(slurp(f1.json) == slurp(f2.json));
    std::istringstream is(a);
    std::string line;
    int n = 0;
    std::getline(is, line);
    CHECK(line == "alpha_x,alpha_y,k,z,branch,lambda_series,lambda_oracle,error_bound,certified,r_star,d,mu_minus");
    while (std::getline(is, line)) {
        ++n;
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        REQUIRE(f.size() == 12);
        const double z = std::stod(f[3]), bound = std::stod(f[7]), r_star = std::stod(f[9]);
        CHECK(std::stod(f[2]) * z == doctest::Approx(1.0));
        CHECK(f[6].empty());
        if (f[8] == "1") {
            CHECK(z < r_star);
            CHECK(std::isfinite(bound));
            CHECK(bound > 0.0);
        } else {
            CHECK(f[8] == "0");
            CHECK(std::isinf(bound));
        }
    }
    CHECK(n == 6 * 2);
    CHECK(std::filesystem::exists(f1.plot));
}

TEST_CASE("plot scripts for band, compare and empty tables") {
    const auto d = scratch("plots");
    {
        std::ofstream(d / "band.csv")
            << "alpha_x,alpha_y,k,z,branch,lambda_series,lambda_oracle,error_bound,certified,r_star,d,mu_minus\n"
            << "3.1415926535897931,0,200,0.005,0,63.6,,0.01,1,0.0155,0.0047,-0.3\n";
        std::ofstream(d / "compare.csv")
            << "alpha_x,alpha_y,k,z,branch,order,beta_series,beta_oracle,observed,bound,slack,certified,status\n"
            << "3.1415926535897931,0,200,0.005,0,1,0.0157,0.0157,1e-6,2e-6,1e-9,1,PASS\n";
        std::ofstream(d / "empty.csv")
            << "alpha_x,alpha_y,k,z,branch,lambda_series,lambda_oracle,error_bound,certified,r_star,d,mu_minus\n";
    }
    emit_plots(d / "band.csv", d / "band.py");
    emit_plots(d / "compare.csv", d / "compare.py");
    emit_plots(d / "empty.csv", d / "empty.py");
    CHECK(slurp(d / "band.py").find("# Band diagram") != std::string::npos);
    CHECK(slurp(d / "compare.py").find("# Error against series order") != std::string::npos);
    CHECK(slurp(d / "empty.py").find("# WARNING: empty.csv has no data rows") != std::string::npos);
    CHECK(slurp(d / "band.py").find("WARNING") == std::string::npos);
    CHECK_THROWS_AS(emit_plots(d / "missing.csv", d / "missing.py"), IOError);

    if (std::system("python3 -c 'import matplotlib' >/dev/null 2>&1") == 0) {
        for (const char* s : {"band", "compare", "empty"}) {
            const std::string cmd = "python3 " + (d / (std::string(s) + ".py")).string() + " " +
                                    (d / (std::string(s) + ".png")).string() + " >/dev/null 2>&1";
            CHECK(std::system(cmd.c_str()) == 0);
            CHECK(std::filesystem::exists(d / (std::string(s) + ".png")));
        }
    }
}

TEST_CASE("compare passes inside the radius and excludes rows beyond it") {
    CrystalConfig c = parse_config(kDisk);
    c.path.vertices = {{"X", {1.0, 0.0}}, {"M", {1.0, 1.0}}};
    c.path.samples_per_leg = 1;
    c.contrast.reset();
    c.z_list = {0.005, 0.03};
    const BandResult r = compute_band(c, {1, true});
    const CompareReport rep = compare_band(c, r);
    REQUIRE(rep.rows.size() == 6);
    CHECK(rep.passed == 3);
    CHECK(rep.failed == 0);
    CHECK(rep.uncertified == 3);
    CHECK(rep.conforms());
    CHECK(rep.rows[0].band.lambda_oracle);
    // observed error shrinks with the order inside the radius
    CHECK(rep.rows[1].observed < rep.rows[0].observed);
    CHECK(rep.rows[2].observed < rep.rows[1].observed);
    for (int i = 3; i < 6; ++i) CHECK(rep.rows[i].status == CompareRow::Status::Uncertified);

    const CrystalConfig no_oracle = c;
    CHECK_THROWS_AS(compare_band(no_oracle, compute_band(no_oracle, {1, false})), ContractError);
}
