#include "bloch/pipeline.hpp"

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "bloch/limit_spectrum.hpp"
#include "bloch/oracle.hpp"

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const toml::node& n, const std::string& key, const std::string& what) const {
        std::ostringstream os;
        os << source_;
        if (n.source().begin) os << ':' << n.source().begin.line;
        os << ": " << key << ": " << what;
        throw ConfigError(os.str());
    }

    void check_keys(const toml::table& t, const std::string& prefix, std::initializer_list<std::string_view> allowed) const {
        for (auto&& [k, v] : t) {
            if (std::find(allowed.begin(), allowed.end(), k.str()) == allowed.end())
                fail(v, prefix + std::string(k.str()), "unknown key");
        }
    }

    const toml::table* table(const toml::table& t, std::string_view key, const std::string& prefix) const {
        const toml::node* n = t.get(key);
        if (!n) return nullptr;
        if (!n->is_table()) fail(*n, prefix + std::string(key), "expected a table");
        return n->as_table();
    }

    double number(const toml::node& n, const std::string& key) const {
        if (auto v = n.value<double>(); v && (n.is_floating_point() || n.is_integer())) return *v;
        fail(n, key, "expected a number");
    }

    int integer(const toml::node& n, const std::string& key) const {
        if (!n.is_integer()) fail(n, key, "expected an integer");
        const auto v = *n.value<std::int64_t>();
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(n, key, "out of range");
        return static_cast<int>(v);
    }

    Vec2 pair(const toml::node& n, const std::string& key) const {
        const toml::array* a = n.as_array();
        if (!a || a->size() != 2) fail(n, key, "expected [x, y]");
        return {number(*a->get(0), key + "[0]"), number(*a->get(1), key + "[1]")};
    }

    const toml::array& array(const toml::node& n, const std::string& key) const {
        if (!n.is_array()) fail(n, key, "expected an array");
        return *n.as_array();
    }

private:
    std::string source_;
};

std::optional<Vec2> named_vertex(std::string_view name) {
    if (name == "G" || name == "Gamma" || name == "Γ") return Vec2(0.0, 0.0);
    if (name == "X") return Vec2(1.0, 0.0);
    if (name == "Y") return Vec2(0.0, 1.0);
    if (name == "M") return Vec2(1.0, 1.0);
    return std::nullopt;
}

std::string alpha_context(const QuasiMomentum& a, std::optional<int> branch) {
    std::string s = "alpha=(" + format_double(a.x()) + "," + format_double(a.y()) + ")";
    if (branch) s += " branch " + std::to_string(*branch);
    return s + ": ";
}

template <class F>
auto with_context(const std::string& ctx, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(ctx + e.what());
    } catch (const DomainError& e) {
        throw DomainError(ctx + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(ctx + e.what());
    } catch (const ResolutionError& e) {
        throw ResolutionError(ctx + e.what());
    } catch (const ContractError& e) {
        throw ContractError(ctx + e.what());
    }
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IOError("cannot write " + p.string());
    f << text;
    if (!f) throw IOError("write failed: " + p.string());
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Resolution resolution_preset(const std::string& name) {
    Resolution r;
    r.preset = name;
    if (name == "coarse") {
        r.boundary_nodes = 64;
        r.n_max = 4;
        r.k_max = 4;
        r.oracle_cutoff = 12;
    } else if (name == "fine") {
        r.boundary_nodes = 192;
        r.n_max = 9;
        r.k_max = 9;
        r.oracle_cutoff = 32;
    } else if (name != "default") {
        throw ConfigError("unknown resolution preset '" + name + "' (coarse, default, fine)");
    }
    return r;
}

InclusionSet CrystalConfig::inclusions() const {
    std::vector<Inclusion> v;
    for (const DiskEntry& d : disks) v.push_back(Inclusion::disk(d.center, d.a));
    for (const CurveEntry& c : curves) v.push_back(Inclusion::polygon(c.points, c.label));
    return InclusionSet(std::move(v));
}

std::vector<double> CrystalConfig::z_values() const {
    std::vector<double> z;
    if (contrast) z.push_back(1.0 / *contrast);
    z.insert(z.end(), z_list.begin(), z_list.end());
    return z;
}

std::optional<double> CrystalConfig::theta() const {
    if (disks.empty() || !curves.empty()) return std::nullopt;
    double t = std::numeric_limits<double>::infinity();
    for (const DiskEntry& d : disks) {
        if (!d.b) return std::nullopt;
        t = std::min(t, theta_disks(d.a, *d.b));
    }
    return t;
}

void CrystalConfig::validate() const {
    if (disks.empty() && curves.empty()) throw ConfigError("crystal: no inclusions");
    for (std::size_t i = 0; i < curves.size(); ++i)
        if (curves[i].points.size() < 3) throw ConfigError("crystal.curves[" + std::to_string(i) + "]: fewer than 3 points");
    for (std::size_t i = 0; i < disks.size(); ++i)
        if (!(disks[i].a > 0.0)) throw ConfigError("crystal.disks[" + std::to_string(i) + "].a: must be positive");
    inclusions().validate();
    for (std::size_t i = 0; i < disks.size(); ++i) {
        const DiskEntry& d = disks[i];
        if (!d.b) continue;
        const std::string key = "crystal.disks[" + std::to_string(i) + "].b";
        const double b = *d.b;
        if (!(b > d.a)) throw ConfigError(key + ": buffer radius must exceed a");
        if (!(d.center.x() - b > 0.0 && d.center.y() - b > 0.0 && d.center.x() + b < 1.0 && d.center.y() + b < 1.0))
            throw ConfigError(key + ": buffered disk leaves the unit cell");
        for (std::size_t j = 0; j < disks.size(); ++j) {
            if (j == i) continue;
            const double bj = disks[j].b.value_or(disks[j].a);
            if (!((d.center - disks[j].center).norm() > b + bj))
                throw ConfigError(key + ": buffer overlaps disk " + std::to_string(j));
        }
    }
    if (!contrast && z_list.empty()) throw ConfigError("contrast: give k or z");
    if (contrast && !(*contrast > 1.0 && std::isfinite(*contrast)))
        throw ConfigError("contrast.k: must be a finite number above 1");
    for (double z : z_list)
        if (!(z > 0.0 && z < 1.0)) throw ConfigError("contrast.z: values must lie in (0, 1)");
    if (path.vertices.size() < 2) throw ConfigError("path.vertices: need at least two vertices");
    if (path.samples_per_leg < 1) throw ConfigError("path.samples_per_leg: must be positive");
    for (const PathVertex& v : path.vertices)
        if (!(v.value.x() > -1.0 && v.value.x() <= 1.0 && v.value.y() > -1.0 && v.value.y() <= 1.0))
            throw ConfigError("path.vertices: " + v.name + " lies outside (-1, 1]^2");
    if (order < 1 || order > kDefaultOrder) throw ConfigError("series.order: must be between 1 and 6");
    if (branches.empty()) throw ConfigError("series.branches: empty");
    std::set<int> seen;
    for (int b : branches) {
        if (b < 0) throw ConfigError("series.branches: negative index");
        if (!seen.insert(b).second) throw ConfigError("series.branches: duplicate index " + std::to_string(b));
    }
    const Resolution& r = resolution;
    if (r.boundary_nodes < 16) throw ConfigError("resolution.boundary_nodes: must be at least 16");
    if (r.n_max < 0 || r.k_max < 1) throw ConfigError("resolution: need n_max >= 0 and k_max >= 1");
    if (r.contour_points < 32) throw ConfigError("resolution.contour_points: must be at least 32");
    if (r.oracle_cutoff < 2) throw ConfigError("resolution.oracle_cutoff: must be at least 2");
}

CrystalConfig parse_config(const std::string& text, const std::string& source) {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ':' << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }
    const Reader rd(source);
    rd.check_keys(root, "", {"crystal", "contrast", "path", "series", "resolution", "output"});
    CrystalConfig c;

    if (const toml::table* t = rd.table(root, "crystal", "")) {
        rd.check_keys(*t, "crystal.", {"disks", "curves"});
        if (const toml::node* n = t->get("disks")) {
            const toml::array& arr = rd.array(*n, "crystal.disks");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string key = "crystal.disks[" + std::to_string(i) + "]";
                const toml::table* d = arr.get(i)->as_table();
                if (!d) rd.fail(*arr.get(i), key, "expected a table");
                rd.check_keys(*d, key + ".", {"center", "a", "b"});
                DiskEntry e;
                if (const toml::node* x = d->get("center")) e.center = rd.pair(*x, key + ".center");
                const toml::node* a = d->get("a");
                if (!a) rd.fail(*d, key + ".a", "missing");
                e.a = rd.number(*a, key + ".a");
                if (const toml::node* b = d->get("b")) e.b = rd.number(*b, key + ".b");
                c.disks.push_back(e);
            }
        }
        if (const toml::node* n = t->get("curves")) {
            const toml::array& arr = rd.array(*n, "crystal.curves");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string key = "crystal.curves[" + std::to_string(i) + "]";
                const toml::table* d = arr.get(i)->as_table();
                if (!d) rd.fail(*arr.get(i), key, "expected a table");
                rd.check_keys(*d, key + ".", {"label", "points"});
                CurveEntry e;
                if (const toml::node* l = d->get("label")) {
                    if (!l->is_string()) rd.fail(*l, key + ".label", "expected a string");
                    e.label = *l->value<std::string>();
                }
                const toml::node* p = d->get("points");
                if (!p) rd.fail(*d, key + ".points", "missing");
                const toml::array& pts = rd.array(*p, key + ".points");
                for (std::size_t q = 0; q < pts.size(); ++q)
                    e.points.push_back(rd.pair(*pts.get(q), key + ".points[" + std::to_string(q) + "]"));
                c.curves.push_back(std::move(e));
            }
        }
    }

    if (const toml::table* t = rd.table(root, "contrast", "")) {
        rd.check_keys(*t, "contrast.", {"k", "z"});
        if (const toml::node* k = t->get("k")) c.contrast = rd.number(*k, "contrast.k");
        if (const toml::node* z = t->get("z")) {
            if (z->is_array()) {
                const toml::array& arr = *z->as_array();
                for (std::size_t i = 0; i < arr.size(); ++i)
                    c.z_list.push_back(rd.number(*arr.get(i), "contrast.z[" + std::to_string(i) + "]"));
            } else {
                c.z_list.push_back(rd.number(*z, "contrast.z"));
            }
        }
    }

    c.path.vertices = {{"G", {0.0, 0.0}}, {"X", {1.0, 0.0}}, {"M", {1.0, 1.0}}, {"G", {0.0, 0.0}}};
    if (const toml::table* t = rd.table(root, "path", "")) {
        rd.check_keys(*t, "path.", {"vertices", "samples_per_leg"});
        if (const toml::node* n = t->get("vertices")) {
            const toml::array& arr = rd.array(*n, "path.vertices");
            c.path.vertices.clear();
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string key = "path.vertices[" + std::to_string(i) + "]";
                const toml::node& v = *arr.get(i);
                if (v.is_string()) {
                    const std::string name = *v.value<std::string>();
                    const auto p = named_vertex(name);
                    if (!p) rd.fail(v, key, "unknown vertex '" + name + "' (G, X, Y, M or [x, y])");
                    c.path.vertices.push_back({name, *p});
                } else {
                    const Vec2 p = rd.pair(v, key);
                    c.path.vertices.push_back({"(" + format_double(p.x()) + "," + format_double(p.y()) + ")", p});
                }
            }
        }
        if (const toml::node* n = t->get("samples_per_leg")) c.path.samples_per_leg = rd.integer(*n, "path.samples_per_leg");
    }

    if (const toml::table* t = rd.table(root, "series", "")) {
        rd.check_keys(*t, "series.", {"order", "branches", "oracle"});
        if (const toml::node* n = t->get("order")) c.order = rd.integer(*n, "series.order");
        if (const toml::node* n = t->get("branches")) {
            const toml::array& arr = rd.array(*n, "series.branches");
            c.branches.clear();
            for (std::size_t i = 0; i < arr.size(); ++i)
                c.branches.push_back(rd.integer(*arr.get(i), "series.branches[" + std::to_string(i) + "]"));
        }
        if (const toml::node* n = t->get("oracle")) {
            if (!n->is_boolean()) rd.fail(*n, "series.oracle", "expected true or false");
            c.oracle = *n->value<bool>();
        }
    }

    if (const toml::table* t = rd.table(root, "resolution", "")) {
        rd.check_keys(*t, "resolution.",
                      {"preset", "boundary_nodes", "n_max", "k_max", "contour_points", "oracle_cutoff"});
        if (const toml::node* n = t->get("preset")) {
            if (!n->is_string()) rd.fail(*n, "resolution.preset", "expected a string");
            c.resolution = resolution_preset(*n->value<std::string>());
        }
        Resolution& r = c.resolution;
        if (const toml::node* n = t->get("boundary_nodes")) r.boundary_nodes = rd.integer(*n, "resolution.boundary_nodes");
        if (const toml::node* n = t->get("n_max")) r.n_max = rd.integer(*n, "resolution.n_max");
        if (const toml::node* n = t->get("k_max")) r.k_max = rd.integer(*n, "resolution.k_max");
        if (const toml::node* n = t->get("contour_points")) r.contour_points = rd.integer(*n, "resolution.contour_points");
        if (const toml::node* n = t->get("oracle_cutoff")) r.oracle_cutoff = rd.integer(*n, "resolution.oracle_cutoff");
    }

    if (const toml::table* t = rd.table(root, "output", "")) {
        rd.check_keys(*t, "output.", {"dir"});
        if (const toml::node* n = t->get("dir")) {
            if (!n->is_string()) rd.fail(*n, "output.dir", "expected a string");
            c.output_dir = *n->value<std::string>();
        }
    }

    c.validate();
    return c;
}

CrystalConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IOError("cannot read " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return parse_config(os.str(), path.string());
}

std::vector<PathSample> sample_path(const BrillouinPath& path) {
    std::vector<PathSample> out;
    double s0 = 0.0;
    const int n = path.samples_per_leg;
    for (std::size_t leg = 0; leg + 1 < path.vertices.size(); ++leg) {
        const Vec2 a = path.vertices[leg].value;
        const Vec2 b = path.vertices[leg + 1].value;
        const double len = kPi * (b - a).norm();
        for (int i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / n;
            const Vec2 v = i == 0 ? a : Vec2(a + t * (b - a));
            out.push_back({QuasiMomentum(kPi * v), s0 + t * len});
        }
        s0 += len;
    }
    return out;
}

std::vector<BandRow> BandResult::rows() const {
    std::vector<BandRow> out;
    for (const BandPoint& p : points) out.insert(out.end(), p.rows.begin(), p.rows.end());
    return out;
}

int resolve_jobs(std::optional<int> flag) {
    if (flag) {
        if (*flag < 1) throw ConfigError("--jobs: must be positive");
        return *flag;
    }
    if (const char* env = std::getenv("BLOCH_SERIES_JOBS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1 || v > 1024) throw ConfigError(std::string("BLOCH_SERIES_JOBS: invalid value '") + env + "'");
        return static_cast<int>(v);
    }
    return 1;
}

BandPoint compute_point(const CrystalConfig& cfg, const PathSample& sample, bool with_oracle) {
    const QuasiMomentum& alpha = sample.alpha;
    const std::string ctx = alpha_context(alpha, std::nullopt);
    const InclusionSet set = cfg.inclusions();
    if (!set.all_disks()) throw ConfigError(ctx + "series bands need disk inclusions");
    const Resolution& res = cfg.resolution;
    const int max_branch = *std::max_element(cfg.branches.begin(), cfg.branches.end());

    BandPoint pt;
    pt.sample = sample;
    const LimitSpectrum limit = with_context(ctx, [&] {
        const int kaxi = alpha.is_zero() ? axisymmetric_kmax_for_mass(1e-3) : 0;
        const DirichletSpectrum spec = disks_dirichlet(set, res.n_max, res.k_max, kaxi);
        LimitSpectrum l = limit_spectrum(alpha, spec, max_branch + 3);
        if (static_cast<int>(l.values.size()) < max_branch + 2)
            throw ResolutionError("limit spectrum does not resolve branch " + std::to_string(max_branch) +
                                  " and its neighbor; raise n_max or k_max");
        const ChainSettings cs{res.boundary_nodes, DiskMode::Angular::Cos};
        const std::optional<double> theta = cfg.theta();
        for (int j : cfg.branches) {
            with_context("branch " + std::to_string(j) + ": ", [&] {
                const OperatorChain chain =
                    OperatorChain::build(set, alpha, spec, l, static_cast<std::size_t>(j), cs);
                SeriesExpansion e = expand(chain, cfg.order, res.contour_points);
                CertificateInputs in;
                in.theta = theta;
                in.np = &chain.np();
                const Certificate cert = make_certificate(l, static_cast<std::size_t>(j), in);
                if (cert.valid()) e.certificate = cert;
                pt.expansions.push_back(std::move(e));
                return 0;
            });
        }
        return l;
    });

    const std::vector<double> zs = cfg.z_values();
    std::vector<int> offset;
    int count = 0;
    for (std::size_t g = 0; g < limit.values.size(); ++g) {
        offset.push_back(count);
        count += limit.values[g].multiplicity;
    }
    if (with_oracle) {
        int need = 0;
        for (int j : cfg.branches) need = std::max(need, offset[j] + limit.values[j].multiplicity);
        OracleOptions opt;
        opt.cutoff = res.oracle_cutoff;
        opt.refine = true;
        for (double z : zs) {
            const OracleResult r = with_context(ctx, [&] { return bloch_solve(set, alpha.value(), 1.0 / z, need, opt); });
            for (int j : cfg.branches) {
                const int m = limit.values[j].multiplicity;
                double beta = 0.0, slack = 0.0;
                for (int i = offset[j]; i < offset[j] + m; ++i) {
                    const double w = r.omega2[i];
                    beta += 1.0 / w;
                    slack += r.estimate[i] / (w * std::max(w - r.estimate[i], 0.5 * w));
                }
                pt.beta_oracle.push_back(beta / m);
                pt.beta_slack.push_back(slack / m);
            }
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t iz = 0; iz < zs.size(); ++iz) {
        for (std::size_t b = 0; b < cfg.branches.size(); ++b) {
            const SeriesExpansion& e = pt.expansions[b];
            const SeriesEvaluation ev = evaluate_series(e, zs[iz]);
            BandRow row;
            row.alpha = alpha;
            row.s = sample.s;
            row.z = zs[iz];
            row.k = 1.0 / zs[iz];
            row.branch = cfg.branches[b];
            row.multiplicity = e.m;
            row.lambda_series = ev.lambda_hat.real();
            row.error_bound = ev.certified ? ev.lambda_error : std::numeric_limits<double>::infinity();
            row.certified = ev.certified;
            row.r_star = e.certificate ? e.certificate->r_star : nan;
            row.d = e.certificate ? e.certificate->d : nan;
            row.mu_minus = e.certificate ? e.certificate->mu_minus : nan;
            if (with_oracle) {
                const std::size_t k = iz * cfg.branches.size() + b;
                const double bo = pt.beta_oracle[k];
                row.lambda_oracle = 1.0 / bo;
                row.oracle_slack = pt.beta_slack[k] / (bo * std::max(bo - pt.beta_slack[k], 0.5 * bo));
            }
            pt.rows.push_back(row);
        }
    }
    return pt;
}

BandResult compute_band(const CrystalConfig& cfg, const RunOptions& opt) {
    cfg.validate();
    const std::vector<PathSample> samples = sample_path(cfg.path);
    BandResult out;
    out.points.resize(samples.size());
    std::vector<std::exception_ptr> errors(samples.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < samples.size(); i = next++) {
            try {
                out.points[i] = compute_point(cfg, samples[i], opt.with_oracle);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(samples.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

void write_band_csv(std::ostream& os, const BandResult& r) {
    os << "alpha_x,alpha_y,k,z,branch,lambda_series,lambda_oracle,error_bound,certified,r_star,d,mu_minus\n";
    for (const BandPoint& p : r.points)
        for (const BandRow& w : p.rows) {
            os << format_double(w.alpha.x()) << ',' << format_double(w.alpha.y()) << ',' << format_double(w.k) << ','
               << format_double(w.z) << ',' << w.branch << ',' << format_double(w.lambda_series) << ','
               << (w.lambda_oracle ? format_double(*w.lambda_oracle) : std::string()) << ','
               << format_double(w.error_bound) << ',' << (w.certified ? 1 : 0) << ',' << format_double(w.r_star)
               << ',' << format_double(w.d) << ',' << format_double(w.mu_minus) << '\n';
        }
}

std::string band_json(const BandResult& r) {
    nlohmann::json pts = nlohmann::json::array();
    for (const BandPoint& p : r.points) {
        nlohmann::json j;
        j["alpha"] = {p.sample.alpha.x(), p.sample.alpha.y()};
        j["s"] = p.sample.s;
        nlohmann::json series = nlohmann::json::array();
        for (const SeriesExpansion& e : p.expansions) {
            nlohmann::json s = nlohmann::json::parse(series_json(e));
            if (e.certificate) s["certificate"] = nlohmann::json::parse(certificate_json(*e.certificate));
            series.push_back(std::move(s));
        }
        j["series"] = std::move(series);
        if (!p.beta_oracle.empty()) {
            j["beta_oracle"] = p.beta_oracle;
            j["beta_oracle_slack"] = p.beta_slack;
        }
        pts.push_back(std::move(j));
    }
    return nlohmann::json{{"points", std::move(pts)}}.dump(2) + "\n";
}

std::string to_string(CompareRow::Status s) {
    switch (s) {
        case CompareRow::Status::Pass: return "PASS";
        case CompareRow::Status::Fail: return "FAIL";
        default: return "UNCERTIFIED";
    }
}

CompareReport compare_band(const CrystalConfig& cfg, const BandResult& r) {
    CompareReport rep;
    const std::size_t nb = cfg.branches.size();
    for (const BandPoint& p : r.points) {
        if (p.beta_oracle.size() != p.rows.size()) throw ContractError("compare needs oracle values for every row");
        for (std::size_t k = 0; k < p.rows.size(); ++k) {
            const BandRow& row = p.rows[k];
            const SeriesExpansion& e = p.expansions[k % nb];
            cplx partial = e.beta0, zn = 1.0;
            for (int order = 1; order <= static_cast<int>(e.coeffs.size()); ++order) {
                zn *= row.z;
                partial += zn * e.coeffs[order - 1];
                CompareRow c;
                c.band = row;
                c.order = order;
                c.beta_series = partial.real();
                c.beta_oracle = p.beta_oracle[k];
                c.observed = std::abs(partial - c.beta_oracle);
                c.slack = p.beta_slack[k];
                if (row.certified) {
                    c.bound = truncation_bound(*e.certificate, order, row.z);
                    c.status = c.observed <= c.bound + c.slack ? CompareRow::Status::Pass : CompareRow::Status::Fail;
                } else {
                    c.bound = std::numeric_limits<double>::infinity();
                }
                switch (c.status) {
                    case CompareRow::Status::Pass: ++rep.passed; break;
                    case CompareRow::Status::Fail: ++rep.failed; break;
                    default: ++rep.uncertified;
                }
                rep.rows.push_back(c);
            }
        }
    }
    return rep;
}

void write_compare_csv(std::ostream& os, const CompareReport& r) {
    os << "alpha_x,alpha_y,k,z,branch,order,beta_series,beta_oracle,observed,bound,slack,certified,status\n";
    for (const CompareRow& c : r.rows) {
        const BandRow& w = c.band;
        os << format_double(w.alpha.x()) << ',' << format_double(w.alpha.y()) << ',' << format_double(w.k) << ','
           << format_double(w.z) << ',' << w.branch << ',' << c.order << ',' << format_double(c.beta_series) << ','
           << format_double(c.beta_oracle) << ',' << format_double(c.observed) << ',' << format_double(c.bound) << ','
           << format_double(c.slack) << ',' << (w.certified ? 1 : 0) << ',' << to_string(c.status) << '\n';
    }
}

RunFiles run_band(const CrystalConfig& cfg, const RunOptions& opt) {
    const BandResult r = compute_band(cfg, opt);
    std::filesystem::create_directories(cfg.output_dir);
    RunFiles f{cfg.output_dir / "band.csv", cfg.output_dir / "band.json", cfg.output_dir / "plot_band.py"};
    std::ostringstream csv;
    write_band_csv(csv, r);
    write_text(f.csv, csv.str());
    write_text(f.json, band_json(r));
    emit_plots(f.csv, f.plot);
    return f;
}

CompareReport run_compare(const CrystalConfig& cfg, const RunOptions& opt, RunFiles* files) {
    RunOptions o = opt;
    o.with_oracle = true;
    const BandResult r = compute_band(cfg, o);
    const CompareReport rep = compare_band(cfg, r);
    std::filesystem::create_directories(cfg.output_dir);
    RunFiles f{cfg.output_dir / "compare.csv", cfg.output_dir / "band.json", cfg.output_dir / "plot_compare.py"};
    std::ostringstream band, cmp;
    write_band_csv(band, r);
    write_compare_csv(cmp, rep);
    write_text(cfg.output_dir / "band.csv", band.str());
    write_text(f.csv, cmp.str());
    write_text(f.json, band_json(r));
    emit_plots(f.csv, f.plot);
    if (files) *files = f;
    return rep;
}

void emit_plots(const std::filesystem::path& csv, const std::filesystem::path& script) {
    std::ifstream in(csv, std::ios::binary);
    if (!in) throw IOError("cannot read " + csv.string());
    std::string header, line, body;
    std::getline(in, header);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        body += line + "\n";
        ++rows;
    }
    const bool compare = header.find("observed") != std::string::npos;
    const bool band = header.find("lambda_series") != std::string::npos;
    if (!header.empty() && !compare && !band) throw IOError(csv.string() + " is neither a band nor a compare table");

    std::ostringstream py;
    py << "#!/usr/bin/env python3\n";
    py << "# " << (compare ? "Error against series order" : "Band diagram") << " from " << csv.filename().string() << "\n";
    if (rows == 0) py << "# WARNING: " << csv.filename().string() << " has no data rows; the figure is empty.\n";
    py << "import csv\nimport io\nimport math\nimport sys\n\n"
          "import matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n";
    py << "DATA = \"\"\"" << header << "\n" << body << "\"\"\"\n\n";
    py << "rows = list(csv.DictReader(io.StringIO(DATA))) if DATA.strip() else []\n"
          "out = sys.argv[1] if len(sys.argv) > 1 else __file__.rsplit(\".\", 1)[0] + \".png\"\n"
          "fig, ax = plt.subplots(figsize=(7, 4.5))\n";
    if (compare) {
        py << "series = {}\n"
              "for r in rows:\n"
              "    if r[\"status\"] == \"UNCERTIFIED\":\n"
              "        continue\n"
              "    key = (r[\"alpha_x\"], r[\"alpha_y\"], r[\"z\"], r[\"branch\"])\n"
              "    series.setdefault(key, []).append((int(r[\"order\"]), float(r[\"observed\"]), float(r[\"bound\"])))\n"
              "for (ax_, ay_, z, b), pts in sorted(series.items()):\n"
              "    pts.sort()\n"
              "    p = [q[0] for q in pts]\n"
              "    line, = ax.semilogy(p, [max(q[1], 1e-300) for q in pts], \"o-\",\n"
              "                        label=f\"alpha=({float(ax_):.3g},{float(ay_):.3g}) z={float(z):.3g} j={b}\")\n"
              "    ax.semilogy(p, [q[2] for q in pts], \"--\", color=line.get_color())\n"
              "ax.set_xlabel(\"order p\")\n"
              "ax.set_ylabel(\"|beta_series - beta_oracle| (dashed: bound)\")\n";
    } else {
        py << "s, prev, coords = 0.0, None, []\n"
              "for r in rows:\n"
              "    a = (float(r[\"alpha_x\"]), float(r[\"alpha_y\"]))\n"
              "    if prev is not None and a != prev:\n"
              "        s += math.hypot(a[0] - prev[0], a[1] - prev[1])\n"
              "    prev = a\n"
              "    coords.append(s)\n"
              "curves = {}\n"
              "for r, x in zip(rows, coords):\n"
              "    curves.setdefault((r[\"z\"], r[\"branch\"]), []).append((x, r))\n"
              "for (z, b), pts in sorted(curves.items()):\n"
              "    xs = [p[0] for p in pts]\n"
              "    line, = ax.plot(xs, [float(p[1][\"lambda_series\"]) for p in pts], \"-\",\n"
              "                    label=f\"series z={float(z):.3g} j={b}\")\n"
              "    orc = [(p[0], float(p[1][\"lambda_oracle\"])) for p in pts if p[1][\"lambda_oracle\"]]\n"
              "    if orc:\n"
              "        ax.plot([o[0] for o in orc], [o[1] for o in orc], \"o\", mfc=\"none\", color=line.get_color())\n"
              "    bad = [p for p in pts if p[1][\"certified\"] != \"1\"]\n"
              "    if bad:\n"
              "        ax.plot([p[0] for p in bad], [float(p[1][\"lambda_series\"]) for p in bad], \"x\", color=\"red\")\n"
              "ax.set_xlabel(\"path coordinate |alpha|\")\n"
              "ax.set_ylabel(\"omega^2\")\n";
    }
    py << "if rows:\n"
          "    ax.legend(fontsize=\"small\")\n"
          "else:\n"
          "    ax.set_title(\"no data\")\n"
          "fig.tight_layout()\n"
          "fig.savefig(out, dpi=150)\n"
          "print(out)\n";
    write_text(script, py.str());
}

}  // namespace bloch
