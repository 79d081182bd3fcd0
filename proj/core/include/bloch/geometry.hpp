#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bloch/errors.hpp"

namespace bloch {

using Vec2 = Eigen::Vector2d;

/// Unit period cell Y = (0,1]^2 with Brillouin zone (-pi,pi]^2.
struct PeriodCell {
    static constexpr int dimension = 2;
    static constexpr double side = 1.0;

    static bool in_brillouin_zone(const Vec2& alpha);
    /// Maps each component into (-pi, pi].
    static Vec2 wrap(const Vec2& alpha);
};

/// Point, first and second derivative of a closed curve at parameter s in [0,1).
struct CurveSample {
    Vec2 x;
    Vec2 dx;
    Vec2 ddx;
};

using CurveFunction = std::function<CurveSample(double)>;

class Inclusion {
public:
    enum class Kind { Disk, ParametricCurve };

    static Inclusion disk(Vec2 center, double radius);
    /// Counter-clockwise closed C2 curve parametrized on [0,1).
    static Inclusion curve(CurveFunction fn, std::string label = "curve");
    /// Axis-aligned square as a closed polygonal curve (corners are not C2; used by FD and the oracle only).
    static Inclusion square(Vec2 center, double side);
    static Inclusion polygon(std::vector<Vec2> vertices, std::string label = "polygon");

    Kind kind() const { return kind_; }
    bool is_disk() const { return kind_ == Kind::Disk; }
    const Vec2& center() const { return center_; }
    double radius() const { return radius_; }
    const std::string& label() const { return label_; }
    bool smooth() const { return smooth_; }

    CurveSample sample(double s) const;
    bool contains(const Vec2& p) const;
    double area() const;
    /// Axis-aligned bounding box {xmin, ymin, xmax, ymax}.
    Eigen::Vector4d bounding_box() const;
    /// Dense polygonal approximation used for containment and overlap tests.
    const std::vector<Vec2>& outline() const { return outline_; }

private:
    Kind kind_ = Kind::Disk;
    Vec2 center_ = Vec2::Zero();
    double radius_ = 0.0;
    CurveFunction fn_;
    std::string label_;
    bool smooth_ = true;
    std::vector<Vec2> outline_;
    void build_outline(int n);
};

struct Separation {
    double t_d = std::numeric_limits<double>::infinity();
    bool has_pair = false;
    std::size_t first = 0;
    std::size_t second = 0;
};

class InclusionSet {
public:
    InclusionSet() = default;
    explicit InclusionSet(std::vector<Inclusion> inclusions, std::optional<double> buffer_b = std::nullopt);

    const std::vector<Inclusion>& inclusions() const { return inclusions_; }
    std::size_t size() const { return inclusions_.size(); }
    bool empty() const { return inclusions_.empty(); }
    const Inclusion& operator[](std::size_t i) const { return inclusions_[i]; }
    std::optional<double> buffer() const { return buffer_b_; }
    bool all_disks() const;
    double area() const;
    bool contains(const Vec2& p) const;

    /// Throws ConfigError naming the offending inclusion or pair.
    void validate() const;

private:
    std::vector<Inclusion> inclusions_;
    std::optional<double> buffer_b_;
};

struct BoundaryMesh {
    std::size_t nodes_per_inclusion = 0;
    std::size_t inclusion_count = 0;
    Eigen::MatrixX2d x;
    Eigen::MatrixX2d normal;
    Eigen::VectorXd weight;    ///< trapezoid weight |x'(t)| * 2pi/n
    Eigen::VectorXd speed;     ///< |x'(t)| for t in [0, 2pi)
    Eigen::VectorXd curvature;
    Eigen::VectorXd param;     ///< t in [0, 2pi)
    std::vector<std::size_t> owner;

    std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t offset(std::size_t inclusion) const { return inclusion * nodes_per_inclusion; }
};

BoundaryMesh build_mesh(const InclusionSet& set, int nodes_per_inclusion);

Separation min_separation(const InclusionSet& set);

}  // namespace bloch
