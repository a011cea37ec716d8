#pragma once

// Canonical shape and profile corpora used by the verification suites and
// the regression tests.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "hbv/shape.hpp"

namespace hbv {

inline ShapePtr annulus(double r_in, double r_out) {
    return shape_difference(ball(r_out), ball(r_in));
}

// Annular sector: annulus minus the wedge spanning [a0, a1] degrees.
inline ShapePtr annulus_sector(double r_in, double r_out, double a0_deg, double a1_deg) {
    const double a0 = a0_deg * std::numbers::pi / 180.0;
    const double a1 = a1_deg * std::numbers::pi / 180.0;
    const Vec3 n0{-std::sin(a0), std::cos(a0), 0};
    const Vec3 n1{std::sin(a1), -std::cos(a1), 0};
    auto wedge = shape_intersection(
        {halfspace({-n0[0], -n0[1], 0}, 0.0), halfspace({-n1[0], -n1[1], 0}, 0.0)});
    return shape_difference(annulus(r_in, r_out), wedge);
}

// Curved mixed shapes inside the box [-2, 2]^2, used for the
// dual-definition consistency sweep.
inline std::vector<std::pair<std::string, ShapePtr>> consistency_corpus() {
    return {
        {"ball_1.0", ball(1.0)},
        {"ball_0.55", ball(0.55)},
        {"ball_off_0.8", ball({0.4, 0.3, 0}, 0.8)},
        {"ball_off_0.45", ball({-0.5, 0.25, 0}, 0.45)},
        {"annulus_0.5_1.1", annulus(0.5, 1.1)},
        {"annulus_0.8_1.3", annulus(0.8, 1.3)},
        {"union_two", shape_union({ball({-0.6, -0.4, 0}, 0.5), ball({0.55, 0.45, 0}, 0.62)})},
        {"union_three",
         shape_union({ball({-0.7, 0.5, 0}, 0.4), ball({0.6, -0.55, 0}, 0.35), ball({0.1, 0.1, 0}, 0.55)})},
        {"lens", shape_intersection({ball({-0.25, 0, 0}, 0.8), ball({0.25, 0, 0}, 0.8)})},
        {"holes",
         shape_difference(ball(1.2), shape_union({ball({0.5, 0.5, 0}, 0.35), ball({-0.5, -0.5, 0}, 0.35)}))},
        {"capped_ball", shape_intersection({ball(1.2), halfspace({1, 0.6, 0}, 0.3)})},
        {"ring_plus_ball", shape_union({annulus(0.35, 0.7), ball({0.9, 0.0, 0}, 0.28)})},
    };
}

// Shapes with closed-form or well-understood geometry inside [-2, 2]^2.
inline std::vector<std::pair<std::string, ShapePtr>> isoperimetric_corpus() {
    return {
        {"ball_1.0", ball(1.0)},
        {"ball_0.6", ball(0.6)},
        {"ball_off", ball({0.5, 0.3, 0}, 0.7)},
        {"box", box({-0.6, -0.8, 0}, {0.7, 0.5, 0})},
        {"union_two", shape_union({ball({-0.6, -0.4, 0}, 0.5), ball({0.55, 0.45, 0}, 0.6)})},
        {"annulus", annulus(0.5, 1.1)},
    };
}

// Bounded radial profiles supported inside radius ~2.
inline std::vector<std::pair<std::string, std::function<double(double)>>> radial_profiles() {
    return {
        {"gauss", [](double r) { return std::exp(-r * r); }},
        {"wide_gauss", [](double r) { return std::exp(-r * r / 1.5); }},
        {"quartic_bump",
         [](double r) {
             const double t = 1.0 - r * r / 1.44;
             return t > 0 ? t * t : 0.0;
         }},
        {"tent", [](double r) { return std::max(0.0, 1.0 - r / 1.3); }},
        {"ring", [](double r) { return r * r * std::exp(-2.0 * r * r); }},
        {"plateau", [](double r) { return 1.0 / (1.0 + std::exp((r - 0.9) * 12.0)); }},
    };
}

inline ScalarField sample_radial(const Grid& g, const std::function<double(double)>& profile) {
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f.v[i] = profile(norm(g.cell_center(i), g.dim));
    return f;
}

// Curvature corpus: each entry fixes its own box, coupling constant and
// geometry; the weight must dominate the staircase savings of the faces
// metric near the concave arcs, which pins the sector at alpha = 4.
struct CurvatureInput {
    std::string name;
    ShapePtr shape;
    double alpha;
    double extent;
};

inline std::vector<CurvatureInput> curvature_corpus() {
    return {
        {"disk", ball(1.0), 2.0, 2.0},
        {"annulus_sector", annulus_sector(2.2, 3.2, 0.0, 90.0), 4.0, 4.5},
        {"two_blob", shape_union({ball({-1.6, -1.2, 0}, 0.9), ball({1.7, 1.3, 0}, 1.1)}), 2.0, 4.0},
    };
}

}  // namespace hbv
