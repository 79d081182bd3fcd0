#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bloch/certificates.hpp"
#include "bloch/geometry.hpp"
#include "bloch/series_engine.hpp"

namespace bloch {

struct DiskEntry {
    Vec2 center = Vec2(0.5, 0.5);
    double a = 0.0;
    std::optional<double> b;
};

/// Closed polygon through the sampled boundary points (counter-clockwise).
struct CurveEntry {
    std::string label = "curve";
    std::vector<Vec2> points;
};

struct PathVertex {
    std::string name;
    Vec2 value;  ///< in units of pi
};

struct BrillouinPath {
    std::vector<PathVertex> vertices;
    int samples_per_leg = 16;
};

struct PathSample {
    QuasiMomentum alpha;
    double s = 0.0;  ///< arc length along the path
};

struct Resolution {
    std::string preset = "default";
    int boundary_nodes = 128;
    int n_max = 6;
    int k_max = 6;
    int contour_points = 64;
    int oracle_cutoff = 24;
};

/// Throws ConfigError for names other than coarse, default, fine.
Resolution resolution_preset(const std::string& name);

struct CrystalConfig {
    std::vector<DiskEntry> disks;
    std::vector<CurveEntry> curves;
    std::optional<double> contrast;
    std::vector<double> z_list;
    BrillouinPath path;
    int order = kDefaultOrder;
    std::vector<int> branches{0};
    bool oracle = false;
    Resolution resolution;
    std::filesystem::path output_dir = "out";

    InclusionSet inclusions() const;
    /// z values in evaluation order (1/k first when a contrast is given).
    std::vector<double> z_values() const;
    /// Smallest closed-form theta over buffered disks; empty unless every disk has b.
    std::optional<double> theta() const;
    /// Throws ConfigError on the first violated rule.
    void validate() const;
};

/// Parses TOML text; `source` names the file in error messages.
CrystalConfig parse_config(const std::string& text, const std::string& source = "<config>");
CrystalConfig load_config(const std::filesystem::path& path);

/// Leg i covers [v_i, v_{i+1}) with samples_per_leg points, so the closing vertex is not repeated.
std::vector<PathSample> sample_path(const BrillouinPath& path);

struct BandRow {
    QuasiMomentum alpha;
    double s = 0.0;
    double k = 0.0;
    double z = 0.0;
    int branch = 0;
    int multiplicity = 1;
    double lambda_series = 0.0;
    std::optional<double> lambda_oracle;
    double oracle_slack = 0.0;  ///< on lambda
    double error_bound = 0.0;   ///< on lambda; infinite when uncertified
    bool certified = false;
    double r_star = 0.0;
    double d = 0.0;
    double mu_minus = 0.0;
};

struct BandPoint {
    PathSample sample;
    std::vector<SeriesExpansion> expansions;  ///< one per branch
    /// Oracle 1/omega^2 averaged over each branch group, per z (z-major).
    std::vector<double> beta_oracle;
    std::vector<double> beta_slack;
    std::vector<BandRow> rows;
};

struct BandResult {
    std::vector<BandPoint> points;
    std::vector<BandRow> rows() const;
};

struct RunOptions {
    int jobs = 1;
    bool with_oracle = false;
};

/// Worker count from --jobs, then BLOCH_SERIES_JOBS, then 1.
int resolve_jobs(std::optional<int> flag);

/// Series (and oracle) band data for every path sample; output is independent of the worker count.
BandResult compute_band(const CrystalConfig& cfg, const RunOptions& opt);
/// A single path sample.
BandPoint compute_point(const CrystalConfig& cfg, const PathSample& sample, bool with_oracle);

void write_band_csv(std::ostream& os, const BandResult& r);
std::string band_json(const BandResult& r);

struct CompareRow {
    BandRow band;
    int order = 0;
    double beta_series = 0.0;
    double beta_oracle = 0.0;
    double observed = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    enum class Status { Pass, Fail, Uncertified } status = Status::Uncertified;
};

struct CompareReport {
    std::vector<CompareRow> rows;
    int passed = 0;
    int failed = 0;
    int uncertified = 0;
    bool conforms() const { return failed == 0 && passed > 0; }
};

/// |beta_series,p - beta_oracle| <= truncation bound + oracle slack for every certified row and order p <= N.
CompareReport compare_band(const CrystalConfig& cfg, const BandResult& r);
void write_compare_csv(std::ostream& os, const CompareReport& r);
std::string to_string(CompareRow::Status s);

struct RunFiles {
    std::filesystem::path csv;
    std::filesystem::path json;
    std::filesystem::path plot;
};

/// band.csv, band.json and plot_band.py under the output directory.
RunFiles run_band(const CrystalConfig& cfg, const RunOptions& opt);
/// compare.csv and plot_compare.py; the report decides the exit code.
CompareReport run_compare(const CrystalConfig& cfg, const RunOptions& opt, RunFiles* files = nullptr);

/// Writes a matplotlib script with the CSV rows embedded; throws IOError when the CSV is missing.
void emit_plots(const std::filesystem::path& csv, const std::filesystem::path& script);

/// Round-trip decimal form (17 significant digits).
std::string format_double(double v);

}  // namespace bloch
