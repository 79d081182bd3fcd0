#include "bloch/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kOutlineNodes = 1024;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    const double d1 = cross(p2 - p1, q1 - p1);
    const double d2 = cross(p2 - p1, q2 - p1);
    const double d3 = cross(q2 - q1, p1 - q1);
    const double d4 = cross(q2 - q1, p2 - q1);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

bool polygon_contains(const std::vector<Vec2>& poly, const Vec2& p) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double xc = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (p.x() < xc) inside = !inside;
        }
    }
    return inside;
}

double signed_area(const std::vector<Vec2>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) s += cross(poly[i], poly[(i + 1) % poly.size()]);
    return 0.5 * s;
}

std::string describe(std::size_t i, const Inclusion& inc) {
    std::ostringstream os;
    os << "inclusion " << i << " (" << (inc.is_disk() ? "disk" : inc.label()) << ")";
    return os.str();
}

// Distance between two closed curves: coarse pair search then alternating golden-section refinement.
double curve_distance(const Inclusion& a, const Inclusion& b) {
    constexpr int n = 512;
    double best = std::numeric_limits<double>::infinity();
    int bi = 0, bj = 0;
    std::vector<Vec2> pa(n), pb(n);
    for (int i = 0; i < n; ++i) {
        pa[i] = a.sample(double(i) / n).x;
        pb[i] = b.sample(double(i) / n).x;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double d = (pa[i] - pb[j]).norm();
            if (d < best) { best = d; bi = i; bj = j; }
        }
    double s = double(bi) / n, t = double(bj) / n;
    auto dist = [&](double u, double v) { return (a.sample(u - std::floor(u)).x - b.sample(v - std::floor(v)).x).norm(); };
    auto golden = [](auto f, double lo, double hi) {
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
        double fc = f(c), fd = f(d);
        while (hi - lo > 1e-12) {
            if (fc < fd) { hi = d; d = c; fd = fc; c = hi - g * (hi - lo); fc = f(c); }
            else { lo = c; c = d; fc = fd; d = lo + g * (hi - lo); fd = f(d); }
        }
        return 0.5 * (lo + hi);
    };
    double prev = best;
    for (int it = 0; it < 100; ++it) {
        s = golden([&](double u) { return dist(u, t); }, s - 2.0 / n, s + 2.0 / n);
        t = golden([&](double v) { return dist(s, v); }, t - 2.0 / n, t + 2.0 / n);
        const double cur = dist(s, t);
        if (std::abs(prev - cur) < 1e-10) { prev = cur; break; }
        prev = cur;
    }
    return std::min(prev, best);
}

}  // namespace

bool PeriodCell::in_brillouin_zone(const Vec2& alpha) {
    return alpha.x() > -kPi && alpha.x() <= kPi && alpha.y() > -kPi && alpha.y() <= kPi;
}

Vec2 PeriodCell::wrap(const Vec2& alpha) {
    Vec2 out;
    for (int i = 0; i < 2; ++i) {
        double v = std::remainder(alpha[i], 2.0 * kPi);
        if (v <= -kPi) v += 2.0 * kPi;
        out[i] = v;
    }
    return out;
}

Inclusion Inclusion::disk(Vec2 center, double radius) {
    if (!(radius > 0.0)) throw ConfigError("disk radius must be positive");
    Inclusion inc;
    inc.kind_ = Kind::Disk;
    inc.center_ = center;
    inc.radius_ = radius;
    inc.label_ = "disk";
    inc.build_outline(kOutlineNodes);
    return inc;
}

Inclusion Inclusion::curve(CurveFunction fn, std::string label) {
    Inclusion inc;
    inc.kind_ = Kind::ParametricCurve;
    inc.fn_ = std::move(fn);
    inc.label_ = std::move(label);
    inc.build_outline(kOutlineNodes);
    Vec2 c = Vec2::Zero();
    for (const auto& p : inc.outline_) c += p;
    inc.center_ = c / double(inc.outline_.size());
    return inc;
}

Inclusion Inclusion::polygon(std::vector<Vec2> vertices, std::string label) {
    if (vertices.size() < 3) throw ConfigError("polygon needs at least three vertices");
    std::vector<double> cum(vertices.size() + 1, 0.0);
    for (std::size_t i = 0; i < vertices.size(); ++i)
        cum[i + 1] = cum[i] + (vertices[(i + 1) % vertices.size()] - vertices[i]).norm();
    const double total = cum.back();
    auto fn = [vertices, cum, total](double s) {
        const double l = (s - std::floor(s)) * total;
        std::size_t i = std::upper_bound(cum.begin(), cum.end(), l) - cum.begin() - 1;
        i = std::min(i, vertices.size() - 1);
        const Vec2 a = vertices[i];
        const Vec2 b = vertices[(i + 1) % vertices.size()];
        const double len = cum[i + 1] - cum[i];
        const double u = (l - cum[i]) / len;
        return CurveSample{a + u * (b - a), (b - a) * (total / len), Vec2::Zero()};
    };
    Inclusion inc = curve(fn, std::move(label));
    inc.smooth_ = false;
    inc.outline_ = vertices;
    return inc;
}

Inclusion Inclusion::square(Vec2 center, double side) {
    if (!(side > 0.0)) throw ConfigError("square side must be positive");
    const double h = 0.5 * side;
    Inclusion inc = polygon({center + Vec2(-h, -h), center + Vec2(h, -h), center + Vec2(h, h), center + Vec2(-h, h)},
                            "square");
    inc.center_ = center;
    return inc;
}

void Inclusion::build_outline(int n) {
    outline_.resize(n);
    for (int i = 0; i < n; ++i) outline_[i] = sample(double(i) / n).x;
}

CurveSample Inclusion::sample(double s) const {
    if (kind_ == Kind::Disk) {
        const double t = 2.0 * kPi * s;
        const Vec2 u(std::cos(t), std::sin(t));
        const Vec2 v(-std::sin(t), std::cos(t));
        return {center_ + radius_ * u, 2.0 * kPi * radius_ * v, -4.0 * kPi * kPi * radius_ * u};
    }
    return fn_(s);
}

bool Inclusion::contains(const Vec2& p) const {
    if (kind_ == Kind::Disk) return (p - center_).norm() < radius_;
    return polygon_contains(outline_, p);
}

double Inclusion::area() const {
    if (kind_ == Kind::Disk) return kPi * radius_ * radius_;
    if (!smooth_) return signed_area(outline_);
    // Trapezoid rule on the periodic integrand x dy - y dx is spectrally accurate.
    constexpr int n = 4096;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const CurveSample c = fn_(double(i) / n);
        s += cross(c.x, c.dx);
    }
    return 0.5 * s / n;
}

Eigen::Vector4d Inclusion::bounding_box() const {
    if (kind_ == Kind::Disk)
        return {center_.x() - radius_, center_.y() - radius_, center_.x() + radius_, center_.y() + radius_};
    Eigen::Vector4d bb(1e300, 1e300, -1e300, -1e300);
    for (const auto& p : outline_) {
        bb[0] = std::min(bb[0], p.x());
        bb[1] = std::min(bb[1], p.y());
        bb[2] = std::max(bb[2], p.x());
        bb[3] = std::max(bb[3], p.y());
    }
    return bb;
}

InclusionSet::InclusionSet(std::vector<Inclusion> inclusions, std::optional<double> buffer_b)
    : inclusions_(std::move(inclusions)), buffer_b_(buffer_b) {}

bool InclusionSet::all_disks() const {
    return std::all_of(inclusions_.begin(), inclusions_.end(), [](const Inclusion& i) { return i.is_disk(); });
}

double InclusionSet::area() const {
    double s = 0.0;
    for (const auto& inc : inclusions_) s += inc.area();
    return s;
}

bool InclusionSet::contains(const Vec2& p) const {
    return std::any_of(inclusions_.begin(), inclusions_.end(), [&](const Inclusion& i) { return i.contains(p); });
}

void InclusionSet::validate() const {
    for (std::size_t i = 0; i < inclusions_.size(); ++i) {
        const Inclusion& inc = inclusions_[i];
        const Eigen::Vector4d bb = inc.bounding_box();
        if (!(bb[0] > 0.0 && bb[1] > 0.0 && bb[2] < 1.0 && bb[3] < 1.0))
            throw ConfigError(describe(i, inc) + " is not strictly inside the unit cell");
        if (!inc.is_disk()) {
            const auto& poly = inc.outline();
            if (signed_area(poly) <= 0.0) throw ConfigError(describe(i, inc) + " is not positively oriented");
            const std::size_t n = poly.size();
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t q = p + 2; q < n; ++q) {
                    if (p == 0 && q == n - 1) continue;
                    if (segments_cross(poly[p], poly[(p + 1) % n], poly[q], poly[(q + 1) % n]))
                        throw ConfigError(describe(i, inc) + " is self-intersecting");
                }
        }
    }
    for (std::size_t i = 0; i < inclusions_.size(); ++i)
        for (std::size_t j = i + 1; j < inclusions_.size(); ++j) {
            const Inclusion& a = inclusions_[i];
            const Inclusion& b = inclusions_[j];
            double d;
            if (a.is_disk() && b.is_disk()) d = (a.center() - b.center()).norm() - a.radius() - b.radius();
            else d = (a.contains(b.outline().front()) || b.contains(a.outline().front())) ? 0.0 : curve_distance(a, b);
            if (!(d > 0.0))
                throw ConfigError("overlapping inclusions: " + describe(i, a) + " and " + describe(j, b));
        }
    if (buffer_b_) {
        const double b = *buffer_b_;
        if (!all_disks()) throw ConfigError("buffer radius is supported for disk inclusions only");
        for (std::size_t i = 0; i < inclusions_.size(); ++i) {
            const Inclusion& inc = inclusions_[i];
            if (!(inc.radius() < b)) throw ConfigError("buffer radius must exceed the radius of " + describe(i, inc));
            const Vec2& c = inc.center();
            if (!(c.x() - b > 0.0 && c.y() - b > 0.0 && c.x() + b < 1.0 && c.y() + b < 1.0))
                throw ConfigError("buffered " + describe(i, inc) + " leaves the unit cell");
            for (std::size_t j = i + 1; j < inclusions_.size(); ++j)
                if (!((c - inclusions_[j].center()).norm() > 2.0 * b))
                    throw ConfigError("buffered disks overlap: " + describe(i, inc) + " and " +
                                      describe(j, inclusions_[j]));
        }
    }
}

BoundaryMesh build_mesh(const InclusionSet& set, int nodes_per_inclusion) {
    if (nodes_per_inclusion < 16 || nodes_per_inclusion % 2 != 0)
        throw ConfigError("nodes_per_inclusion must be even and at least 16");
    set.validate();
    for (std::size_t i = 0; i < set.size(); ++i)
        if (!set[i].smooth())
            throw ConfigError(describe(i, set[i]) + " has corners; boundary quadrature needs a C2 curve");
    const std::size_t n = static_cast<std::size_t>(nodes_per_inclusion);
    const std::size_t total = n * set.size();
    BoundaryMesh m;
    m.nodes_per_inclusion = n;
    m.inclusion_count = set.size();
    m.x.resize(total, 2);
    m.normal.resize(total, 2);
    m.weight.resize(total);
    m.speed.resize(total);
    m.curvature.resize(total);
    m.param.resize(total);
    m.owner.resize(total);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Inclusion& inc = set[i];
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t r = i * n + j;
            const double t = 2.0 * kPi * double(j) / double(n);
            m.param[r] = t;
            m.owner[r] = i;
            if (inc.is_disk()) {
                const double ct = std::cos(t), st = std::sin(t);
                m.x.row(r) << inc.center().x() + inc.radius() * ct, inc.center().y() + inc.radius() * st;
                m.normal.row(r) << ct, st;
                m.speed[r] = inc.radius();
                m.curvature[r] = 1.0 / inc.radius();
            } else {
                const CurveSample c = inc.sample(double(j) / double(n));
                const Vec2 d1 = c.dx / (2.0 * kPi);
                const Vec2 d2 = c.ddx / (4.0 * kPi * kPi);
                const double sp = d1.norm();
                m.x.row(r) = c.x.transpose();
                m.normal.row(r) << d1.y() / sp, -d1.x() / sp;
                m.speed[r] = sp;
                m.curvature[r] = cross(d1, d2) / (sp * sp * sp);
            }
            m.weight[r] = m.speed[r] * 2.0 * kPi / double(n);
        }
    }
    return m;
}

Separation min_separation(const InclusionSet& set) {
    if (set.empty()) throw ConfigError("min_separation needs at least one inclusion");
    Separation out;
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i + 1; j < set.size(); ++j) {
            const Inclusion& a = set[i];
            const Inclusion& b = set[j];
            const double d = (a.is_disk() && b.is_disk())
                                 ? (a.center() - b.center()).norm() - a.radius() - b.radius()
                                 : curve_distance(a, b);
            if (!out.has_pair || d < out.t_d) {
                out.t_d = d;
                out.has_pair = true;
                out.first = i;
                out.second = j;
            }
        }
    return out;
}

}  // namespace bloch
