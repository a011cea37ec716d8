#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hbv/grid.hpp"
#include "hbv/sum.hpp"

namespace hbv {

struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), v(g.cells(), fill) {}

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    std::size_t size() const { return v.size(); }

    void check_finite(const char* who = "ScalarField") const {
        for (double x : v)
            if (!std::isfinite(x)) throw Error(std::string(who) + ": non-finite value");
    }
};

struct CellSet {
    Grid grid;
    std::vector<std::uint8_t> m;

    CellSet() = default;
    explicit CellSet(const Grid& g, bool fill = false)
        : grid(g), m(g.cells(), fill ? 1 : 0) {}

    bool contains(std::size_t i) const { return m[i] != 0; }
    void set(std::size_t i, bool in) { m[i] = in ? 1 : 0; }
    std::size_t size() const { return m.size(); }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto b : m) c += b;
        return c;
    }
    bool empty() const { return count() == 0; }
};

inline double volume(const CellSet& s) {
    return static_cast<double>(s.count()) * s.grid.cell_volume();
}

inline CellSet set_union(const CellSet& a, const CellSet& b) {
    CellSet r(a.grid);
    for (std::size_t i = 0; i < r.size(); ++i) r.m[i] = a.m[i] | b.m[i];
    return r;
}

inline CellSet set_intersection(const CellSet& a, const CellSet& b) {
    CellSet r(a.grid);
    for (std::size_t i = 0; i < r.size(); ++i) r.m[i] = a.m[i] & b.m[i];
    return r;
}

inline CellSet set_difference(const CellSet& a, const CellSet& b) {
    CellSet r(a.grid);
    for (std::size_t i = 0; i < r.size(); ++i) r.m[i] = a.m[i] & static_cast<std::uint8_t>(1 - b.m[i]);
    return r;
}

inline CellSet set_complement(const CellSet& a) {
    CellSet r(a.grid);
    for (std::size_t i = 0; i < r.size(); ++i) r.m[i] = 1 - a.m[i];
    return r;
}

inline bool is_subset(const CellSet& a, const CellSet& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.m[i] && !b.m[i]) return false;
    return true;
}

// Chebyshev one-ring dilation: the smallest grid-expressible open
// neighborhood of a set.
inline CellSet dilate(const CellSet& s, int rings = 1) {
    CellSet cur = s;
    const Grid& g = s.grid;
    for (int r = 0; r < rings; ++r) {
        CellSet next = cur;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            if (!cur.m[i]) continue;
            const auto k = g.coords(i);
            std::array<int, 3> off{0, 0, 0};
            const int lo = -1, hi = 1;
            for (off[0] = (g.dim > 0 ? lo : 0); off[0] <= (g.dim > 0 ? hi : 0); ++off[0])
                for (off[1] = (g.dim > 1 ? lo : 0); off[1] <= (g.dim > 1 ? hi : 0); ++off[1])
                    for (off[2] = (g.dim > 2 ? lo : 0); off[2] <= (g.dim > 2 ? hi : 0); ++off[2]) {
                        std::array<int, 3> kk{k[0] + off[0], k[1] + off[1], k[2] + off[2]};
                        bool ok = true;
                        for (int a = 0; a < g.dim; ++a)
                            if (kk[a] < 0 || kk[a] >= g.shape[a]) ok = false;
                        if (ok) next.m[g.index(kk)] = 1;
                    }
        }
        cur = std::move(next);
    }
    return cur;
}

inline ScalarField indicator(const CellSet& s) {
    ScalarField f(s.grid);
    for (std::size_t i = 0; i < s.size(); ++i) f.v[i] = s.m[i] ? 1.0 : 0.0;
    return f;
}

inline CellSet superlevel_set(const ScalarField& f, double t) {
    CellSet s(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) s.m[i] = f.v[i] > t ? 1 : 0;
    return s;
}

inline ScalarField cellwise_max(const ScalarField& a, const ScalarField& b) {
    ScalarField r(a.grid);
    for (std::size_t i = 0; i < r.size(); ++i) r.v[i] = std::max(a.v[i], b.v[i]);
    return r;
}

inline ScalarField cellwise_min(const ScalarField& a, const ScalarField& b) {
    ScalarField r(a.grid);
    for (std::size_t i = 0; i < r.size(); ++i) r.v[i] = std::min(a.v[i], b.v[i]);
    return r;
}

inline double field_mass(const ScalarField& f) {
    return pairwise_sum(f.v) * f.grid.cell_volume();
}

inline double field_abs_mass(const ScalarField& f) {
    return pairwise_sum_index(f.size(), [&](std::size_t i) { return std::abs(f.v[i]); }) *
           f.grid.cell_volume();
}

inline double field_lp_norm(const ScalarField& f, double p) {
    const double s =
        pairwise_sum_index(f.size(), [&](std::size_t i) { return std::pow(std::abs(f.v[i]), p); });
    return std::pow(s * f.grid.cell_volume(), 1.0 / p);
}

// Scalar magnitude of the alpha-Hermite weight, w(x) = kappa * |x|^(alpha/2).
inline ScalarField weight_field(const Grid& g, const AlphaParam& alpha) {
    ScalarField w(g);
    if (alpha.kappa == 0.0) return w;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double r = norm(g.cell_center(i), g.dim);
        w.v[i] = alpha.kappa * std::pow(r, alpha.alpha / 2.0);
    }
    return w;
}

// Per-axis coefficient w_k(x) = kappa * x_k * |x|^((alpha-2)/2), extended by
// continuity to w_k(0) = 0.
inline Vec3 weight_vector(const Vec3& x, int dim, const AlphaParam& alpha) {
    Vec3 w{0.0, 0.0, 0.0};
    if (alpha.kappa == 0.0) return w;
    const double r = norm(x, dim);
    if (r == 0.0) return w;
    const double f = alpha.kappa * std::pow(r, (alpha.alpha - 2.0) / 2.0);
    for (int i = 0; i < dim; ++i) w[i] = f * x[i];
    return w;
}

}  // namespace hbv
