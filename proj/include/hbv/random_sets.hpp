#pragma once

#include <cstdint>
#include <vector>

#include "hbv/field.hpp"
#include "hbv/shape.hpp"

namespace hbv {

// Small self-contained generator (splitmix64) so seeded streams do not
// depend on standard-library distribution internals.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [lo, hi]
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    bool coin(double p = 0.5) { return uniform() < p; }
};

// Union of a few random balls, rasterized. Radii and centers stay inside a
// margin so the blob does not hug the wall.
inline CellSet random_blob(const Grid& g, Rng& rng, int max_balls = 3) {
    const int nballs = static_cast<int>(rng.uniform_int(1, max_balls));
    std::vector<ShapePtr> parts;
    double extent = 0;
    for (int a = 0; a < g.dim; ++a)
        extent = std::max(extent, std::abs(g.origin[a]) + 0.5 * g.spacing * g.shape[a]);
    for (int b = 0; b < nballs; ++b) {
        Vec3 c{0, 0, 0};
        for (int a = 0; a < g.dim; ++a) c[a] = rng.uniform(-0.55 * extent, 0.55 * extent);
        parts.push_back(ball(c, rng.uniform(0.1, 0.35) * extent));
    }
    return rasterize(shape_union(std::move(parts)), g);
}

// Random membership with density p; used by exhaustive tiny-grid oracles.
inline CellSet random_mask(const Grid& g, Rng& rng, double p = 0.5) {
    CellSet s(g);
    for (std::size_t i = 0; i < s.size(); ++i) s.m[i] = rng.coin(p) ? 1 : 0;
    return s;
}

inline ScalarField random_unary(const Grid& g, Rng& rng, double lo = -1.0, double hi = 1.0) {
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f.v[i] = rng.uniform(lo, hi);
    return f;
}

// Smooth random field: a sum of a few Gaussian bumps.
inline ScalarField random_smooth_field(const Grid& g, Rng& rng, int bumps = 4) {
    ScalarField f(g);
    double extent = 0;
    for (int a = 0; a < g.dim; ++a)
        extent = std::max(extent, std::abs(g.origin[a]) + 0.5 * g.spacing * g.shape[a]);
    for (int b = 0; b < bumps; ++b) {
        Vec3 c{0, 0, 0};
        for (int a = 0; a < g.dim; ++a) c[a] = rng.uniform(-0.6 * extent, 0.6 * extent);
        const double amp = rng.uniform(-1.0, 1.0);
        const double s = rng.uniform(0.15, 0.5) * extent;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const Vec3 x = g.cell_center(i);
            double d2 = 0;
            for (int a = 0; a < g.dim; ++a) d2 += (x[a] - c[a]) * (x[a] - c[a]);
            f.v[i] += amp * std::exp(-d2 / (2.0 * s * s));
        }
    }
    return f;
}

}  // namespace hbv
