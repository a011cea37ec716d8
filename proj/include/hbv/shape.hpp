#pragma once

#include <memory>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hbv/field.hpp"
#include "hbv/grid.hpp"

namespace hbv {

// Exact analytic set descriptions. Balls are open, boxes and halfspaces
// closed; membership of a cell is decided by its center.
struct Shape;
using ShapePtr = std::shared_ptr<const Shape>;

struct BallSpec {
    Vec3 center{0, 0, 0};
    double radius = 0;
};
struct BoxSpec {
    Vec3 lo{0, 0, 0};
    Vec3 hi{0, 0, 0};
};
struct HalfspaceSpec {
    Vec3 normal{0, 0, 0};
    double offset = 0;
};
struct UnionSpec {
    std::vector<ShapePtr> parts;
};
struct IntersectionSpec {
    std::vector<ShapePtr> parts;
};
struct DifferenceSpec {
    ShapePtr minuend;
    ShapePtr subtrahend;
};

struct Shape {
    std::variant<BallSpec, BoxSpec, HalfspaceSpec, UnionSpec, IntersectionSpec, DifferenceSpec> v;
};

inline ShapePtr ball(Vec3 c, double r) {
    if (!(r >= 0.0)) throw Error("ball: radius must be >= 0");
    return std::make_shared<Shape>(Shape{BallSpec{c, r}});
}
inline ShapePtr ball(double r) { return ball(Vec3{0, 0, 0}, r); }
inline ShapePtr box(Vec3 lo, Vec3 hi) { return std::make_shared<Shape>(Shape{BoxSpec{lo, hi}}); }
inline ShapePtr halfspace(Vec3 n, double off) {
    return std::make_shared<Shape>(Shape{HalfspaceSpec{n, off}});
}
inline ShapePtr shape_union(std::vector<ShapePtr> parts) {
    return std::make_shared<Shape>(Shape{UnionSpec{std::move(parts)}});
}
inline ShapePtr shape_intersection(std::vector<ShapePtr> parts) {
    return std::make_shared<Shape>(Shape{IntersectionSpec{std::move(parts)}});
}
inline ShapePtr shape_difference(ShapePtr a, ShapePtr b) {
    return std::make_shared<Shape>(Shape{DifferenceSpec{std::move(a), std::move(b)}});
}

inline bool shape_contains(const Shape& s, const Vec3& x, int dim) {
    return std::visit(
        [&](const auto& sp) -> bool {
            using T = std::decay_t<decltype(sp)>;
            if constexpr (std::is_same_v<T, BallSpec>) {
                double d2 = 0;
                for (int i = 0; i < dim; ++i) {
                    const double t = x[i] - sp.center[i];
                    d2 += t * t;
                }
                return d2 < sp.radius * sp.radius;
            } else if constexpr (std::is_same_v<T, BoxSpec>) {
                for (int i = 0; i < dim; ++i)
                    if (x[i] < sp.lo[i] || x[i] > sp.hi[i]) return false;
                return true;
            } else if constexpr (std::is_same_v<T, HalfspaceSpec>) {
                double d = 0;
                for (int i = 0; i < dim; ++i) d += x[i] * sp.normal[i];
                return d <= sp.offset;
            } else if constexpr (std::is_same_v<T, UnionSpec>) {
                for (const auto& p : sp.parts)
                    if (shape_contains(*p, x, dim)) return true;
                return false;
            } else if constexpr (std::is_same_v<T, IntersectionSpec>) {
                for (const auto& p : sp.parts)
                    if (!shape_contains(*p, x, dim)) return false;
                return true;
            } else {
                return shape_contains(*sp.minuend, x, dim) && !shape_contains(*sp.subtrahend, x, dim);
            }
        },
        s.v);
}

inline CellSet rasterize(const Shape& s, const Grid& g) {
    CellSet out(g);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.m[i] = shape_contains(s, g.cell_center(i), g.dim) ? 1 : 0;
    return out;
}
inline CellSet rasterize(const ShapePtr& s, const Grid& g) { return rasterize(*s, g); }

// sE = {s x : x in E}.
inline ShapePtr scale_shape(const ShapePtr& s, double t) {
    return std::visit(
        [&](const auto& sp) -> ShapePtr {
            using T = std::decay_t<decltype(sp)>;
            if constexpr (std::is_same_v<T, BallSpec>) {
                return ball(Vec3{sp.center[0] * t, sp.center[1] * t, sp.center[2] * t}, sp.radius * t);
            } else if constexpr (std::is_same_v<T, BoxSpec>) {
                return box(Vec3{sp.lo[0] * t, sp.lo[1] * t, sp.lo[2] * t},
                           Vec3{sp.hi[0] * t, sp.hi[1] * t, sp.hi[2] * t});
            } else if constexpr (std::is_same_v<T, HalfspaceSpec>) {
                return halfspace(sp.normal, sp.offset * t);
            } else if constexpr (std::is_same_v<T, UnionSpec>) {
                std::vector<ShapePtr> parts;
                for (const auto& p : sp.parts) parts.push_back(scale_shape(p, t));
                return shape_union(std::move(parts));
            } else if constexpr (std::is_same_v<T, IntersectionSpec>) {
                std::vector<ShapePtr> parts;
                for (const auto& p : sp.parts) parts.push_back(scale_shape(p, t));
                return shape_intersection(std::move(parts));
            } else {
                return shape_difference(scale_shape(sp.minuend, t), scale_shape(sp.subtrahend, t));
            }
        },
        s->v);
}

inline double unit_sphere_area(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return 2.0 * std::numbers::pi;
        default: return 4.0 * std::numbers::pi;
    }
}

inline double unit_ball_volume(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return std::numbers::pi;
        default: return 4.0 * std::numbers::pi / 3.0;
    }
}

// Classical (Euclidean) perimeter when a closed form exists.
inline std::optional<double> classical_perimeter(const Shape& s, int dim) {
    if (const auto* b = std::get_if<BallSpec>(&s.v))
        return unit_sphere_area(dim) * std::pow(b->radius, dim - 1);
    if (const auto* b = std::get_if<BoxSpec>(&s.v)) {
        double per = 0;
        for (int i = 0; i < dim; ++i) {
            double face = 2.0;
            for (int j = 0; j < dim; ++j)
                if (j != i) face *= (b->hi[j] - b->lo[j]);
            per += face;
        }
        return per;
    }
    return std::nullopt;
}

inline bool is_origin_ball(const Shape& s, int dim, double* radius = nullptr) {
    const auto* b = std::get_if<BallSpec>(&s.v);
    if (!b) return false;
    for (int i = 0; i < dim; ++i)
        if (b->center[i] != 0.0) return false;
    if (radius) *radius = b->radius;
    return true;
}

// Integral of |x|^(alpha/2) over the set. Closed form for origin-centered
// balls (radial integral), midpoint quadrature on the grid otherwise.
inline double moment_quadrature(const CellSet& e, const AlphaParam& alpha) {
    const Grid& g = e.grid;
    const double p = alpha.alpha / 2.0;
    return pairwise_sum_index(e.size(),
                              [&](std::size_t i) {
                                  if (!e.m[i]) return 0.0;
                                  return std::pow(norm(g.cell_center(i), g.dim), p);
                              }) *
           g.cell_volume();
}

inline double moment_ball_closed_form(double radius, int dim, const AlphaParam& alpha) {
    const double p = static_cast<double>(dim) + alpha.alpha / 2.0;
    return unit_sphere_area(dim) * std::pow(radius, p) / p;
}

inline double moment_integral(const Shape& s, const AlphaParam& alpha, const Grid& g) {
    double r;
    if (is_origin_ball(s, g.dim, &r)) return moment_ball_closed_form(r, g.dim, alpha);
    return moment_quadrature(rasterize(s, g), alpha);
}
inline double moment_integral(const ShapePtr& s, const AlphaParam& alpha, const Grid& g) {
    return moment_integral(*s, alpha, g);
}

// --- JSON round trip ("variant" discriminator) ---

inline nlohmann::ordered_json vec_to_json(const Vec3& v, int dim) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (int i = 0; i < dim; ++i) a.push_back(v[i]);
    return a;
}

inline Vec3 vec_from_json(const nlohmann::json& j) {
    Vec3 v{0, 0, 0};
    if (!j.is_array() || j.size() > 3) throw Error("shape json: expected coordinate array of size <= 3");
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

inline nlohmann::ordered_json shape_to_json(const Shape& s, int dim) {
    nlohmann::ordered_json j;
    std::visit(
        [&](const auto& sp) {
            using T = std::decay_t<decltype(sp)>;
            if constexpr (std::is_same_v<T, BallSpec>) {
                j["variant"] = "ball";
                j["center"] = vec_to_json(sp.center, dim);
                j["radius"] = sp.radius;
            } else if constexpr (std::is_same_v<T, BoxSpec>) {
                j["variant"] = "box";
                j["lo"] = vec_to_json(sp.lo, dim);
                j["hi"] = vec_to_json(sp.hi, dim);
            } else if constexpr (std::is_same_v<T, HalfspaceSpec>) {
                j["variant"] = "halfspace";
                j["normal"] = vec_to_json(sp.normal, dim);
                j["offset"] = sp.offset;
            } else if constexpr (std::is_same_v<T, UnionSpec>) {
                j["variant"] = "union";
                auto arr = nlohmann::ordered_json::array();
                for (const auto& p : sp.parts) arr.push_back(shape_to_json(*p, dim));
                j["parts"] = std::move(arr);
            } else if constexpr (std::is_same_v<T, IntersectionSpec>) {
                j["variant"] = "intersection";
                auto arr = nlohmann::ordered_json::array();
                for (const auto& p : sp.parts) arr.push_back(shape_to_json(*p, dim));
                j["parts"] = std::move(arr);
            } else {
                j["variant"] = "difference";
                j["minuend"] = shape_to_json(*sp.minuend, dim);
                j["subtrahend"] = shape_to_json(*sp.subtrahend, dim);
            }
        },
        s.v);
    return j;
}

inline ShapePtr shape_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("variant")) throw Error("shape json: missing variant");
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "ball") {
        const double r = j.at("radius").get<double>();
        if (!(r >= 0.0)) throw Error("shape json: ball radius must be >= 0");
        return ball(vec_from_json(j.at("center")), r);
    }
    if (variant == "box") {
        Vec3 lo = vec_from_json(j.at("lo")), hi = vec_from_json(j.at("hi"));
        return box(lo, hi);
    }
    if (variant == "halfspace")
        return halfspace(vec_from_json(j.at("normal")), j.at("offset").get<double>());
    if (variant == "union" || variant == "intersection") {
        std::vector<ShapePtr> parts;
        for (const auto& p : j.at("parts")) parts.push_back(shape_from_json(p));
        if (variant == "union") return shape_union(std::move(parts));
        return shape_intersection(std::move(parts));
    }
    if (variant == "difference")
        return shape_difference(shape_from_json(j.at("minuend")), shape_from_json(j.at("subtrahend")));
    throw Error("shape json: unknown variant '" + variant + "'");
}

}  // namespace hbv
