#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hbv/field.hpp"
#include "hbv/shape.hpp"
#include "hbv/variation.hpp"

namespace hbv {

enum class Estimator { faces, crofton, analytic };

inline const char* estimator_name(Estimator e) {
    switch (e) {
        case Estimator::faces: return "faces";
        case Estimator::crofton: return "crofton";
        default: return "analytic";
    }
}

inline Estimator estimator_from_name(const std::string& s) {
    if (s == "faces") return Estimator::faces;
    if (s == "crofton") return Estimator::crofton;
    if (s == "analytic") return Estimator::analytic;
    throw Error("unknown estimator '" + s + "'");
}

// Whether faces against the box wall count as boundary. `exposed` treats the
// set as extended by zero (perimeter relative to R^d, the graph energy);
// `interior` is the perimeter relative to the open box.
enum class BoundaryRule { interior, exposed };

inline std::size_t count_interior_cut_faces(const CellSet& e) {
    const Grid& g = e.grid;
    std::size_t cuts = 0;
    for (int axis = 0; axis < g.dim; ++axis) {
        const std::size_t st = g.stride(axis);
        const int n = g.shape[axis];
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (g.coords(i)[axis] == n - 1) continue;
            cuts += static_cast<std::size_t>(e.m[i] != e.m[i + st]);
        }
    }
    return cuts;
}

inline std::size_t count_wall_faces(const CellSet& e) {
    const Grid& g = e.grid;
    std::size_t walls = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (!e.m[i]) continue;
        const auto k = g.coords(i);
        for (int axis = 0; axis < g.dim; ++axis) {
            if (k[axis] == 0) ++walls;
            if (k[axis] == g.shape[axis] - 1) ++walls;
        }
    }
    return walls;
}

// l1 (anisotropic) perimeter: exposed faces times face area. Exact graph-cut
// energy; overestimates Euclidean length by up to 4/pi in 2-D.
inline double faces_perimeter(const CellSet& e, BoundaryRule rule = BoundaryRule::interior) {
    std::size_t cuts = count_interior_cut_faces(e);
    if (rule == BoundaryRule::exposed) cuts += count_wall_faces(e);
    return static_cast<double>(cuts) * e.grid.face_area();
}

namespace detail {

struct CroftonClass {
    std::array<int, 3> off;
    double weight;  // length contribution per cut pair, in units of h^{d-1}... absolute
};

// Direction-class weights of the discrete Cauchy-Crofton estimator.
// 2-D: 8-neighborhood, equal angular sectors pi/4.
// 3-D: 26-neighborhood; solid angles are the spherical Voronoi areas of the
// direction set, normalized so that 6 a1 + 12 a2 + 8 a3 = 4 pi.
inline std::vector<CroftonClass> crofton_classes(const Grid& g) {
    const double h = g.spacing;
    std::vector<CroftonClass> cls;
    if (g.dim == 1) {
        cls.push_back({{1, 0, 0}, 1.0});
        return cls;
    }
    if (g.dim == 2) {
        const double w_axis = std::numbers::pi * h / 8.0;
        const double w_diag = std::numbers::pi * h / (8.0 * std::numbers::sqrt2);
        cls.push_back({{1, 0, 0}, w_axis});
        cls.push_back({{0, 1, 0}, w_axis});
        cls.push_back({{1, 1, 0}, w_diag});
        cls.push_back({{1, -1, 0}, w_diag});
        return cls;
    }
    constexpr double omega_axis = 0.57526465376929614;
    constexpr double omega_face = 0.46471342593733905;
    constexpr double omega_body = 0.44227769756191582;
    const double h2 = h * h;
    const double w_axis = omega_axis * h2 / std::numbers::pi;
    const double w_face = omega_face * h2 / (std::numbers::pi * std::numbers::sqrt2);
    const double w_body = omega_body * h2 / (std::numbers::pi * std::numbers::sqrt3);
    const int A[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (auto& a : A) cls.push_back({{a[0], a[1], a[2]}, w_axis});
    const int F[6][3] = {{1, 1, 0}, {1, -1, 0}, {1, 0, 1}, {1, 0, -1}, {0, 1, 1}, {0, 1, -1}};
    for (auto& a : F) cls.push_back({{a[0], a[1], a[2]}, w_face});
    const int B[4][3] = {{1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {1, -1, -1}};
    for (auto& a : B) cls.push_back({{a[0], a[1], a[2]}, w_body});
    return cls;
}

}  // namespace detail

// Euclidean-faithful perimeter from multi-direction cut counts.
inline double crofton_perimeter(const CellSet& e) {
    const Grid& g = e.grid;
    const auto classes = detail::crofton_classes(g);
    double total = 0.0;
    for (const auto& c : classes) {
        std::size_t cuts = 0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const auto k = g.coords(i);
            std::array<int, 3> kk{k[0] + c.off[0], k[1] + c.off[1], k[2] + c.off[2]};
            bool in = true;
            for (int a = 0; a < g.dim; ++a)
                if (kk[a] < 0 || kk[a] >= g.shape[a]) in = false;
            if (!in) continue;
            cuts += static_cast<std::size_t>(e.m[i] != e.m[g.index(kk)]);
        }
        total += c.weight * static_cast<double>(cuts);
    }
    return total;
}

inline double classical_perimeter_disc(const CellSet& e, Estimator est,
                                       BoundaryRule rule = BoundaryRule::interior) {
    switch (est) {
        case Estimator::faces: return faces_perimeter(e, rule);
        case Estimator::crofton: return crofton_perimeter(e);
        default: throw Error("classical_perimeter_disc: analytic estimator needs a shape");
    }
}

struct PerimeterValue {
    double total = 0;
    double jump_part = 0;
    double weight_part = 0;
    Estimator estimator = Estimator::faces;
};

inline double weight_part_of(const CellSet& e, const AlphaParam& alpha) {
    if (alpha.kappa == 0.0) return 0.0;
    return std::numbers::sqrt2 * alpha.kappa * moment_quadrature(e, alpha);
}

// P(E, box) = sqrt(2) Per(E) + sqrt(2 (alpha-1)) * integral_E |x|^{alpha/2}.
inline PerimeterValue perimeter_indicator(const CellSet& e, const AlphaParam& alpha,
                                          Estimator est = Estimator::crofton) {
    PerimeterValue p;
    p.estimator = est;
    p.jump_part = std::numbers::sqrt2 * classical_perimeter_disc(e, est, BoundaryRule::interior);
    p.weight_part = weight_part_of(e, alpha);
    p.total = p.jump_part + p.weight_part;
    return p;
}

// Closed-form perimeter for analytic shapes; rasterized crofton fallback for
// compositions (needs a grid).
inline PerimeterValue perimeter_shape(const ShapePtr& s, const AlphaParam& alpha, int dim,
                                      const Grid* grid = nullptr) {
    PerimeterValue p;
    const auto cls = classical_perimeter(*s, dim);
    double r = 0;
    const bool origin_ball = is_origin_ball(*s, dim, &r);

    std::optional<CellSet> raster;
    const auto need_raster = [&]() -> const CellSet& {
        if (!raster) {
            if (!grid) throw Error("perimeter_shape: shape has no closed form and no grid was supplied");
            raster = rasterize(s, *grid);
        }
        return *raster;
    };

    bool analytic = true;
    if (cls) {
        p.jump_part = std::numbers::sqrt2 * *cls;
    } else {
        p.jump_part = std::numbers::sqrt2 * crofton_perimeter(need_raster());
        analytic = false;
    }
    if (alpha.kappa == 0.0) {
        p.weight_part = 0.0;
    } else if (origin_ball) {
        p.weight_part = std::numbers::sqrt2 * alpha.kappa * moment_ball_closed_form(r, dim, alpha);
    } else {
        p.weight_part = std::numbers::sqrt2 * alpha.kappa * moment_quadrature(need_raster(), alpha);
        analytic = false;
    }
    p.total = p.jump_part + p.weight_part;
    p.estimator = analytic ? Estimator::analytic : Estimator::crofton;
    return p;
}

struct ScalingRow {
    double s = 0;
    double perimeter = 0;     // P(sE)
    double low_exponent = 0;  // s^{d+alpha/2} P(E)
    double high_exponent = 0; // s^{d-1} P(E)
    bool inside = false;
};

// Scaling sandwich of the perimeter under dilation sE. For s <= 1 the bounds
// are [s^{d+a/2} P, s^{d-1} P]; reversed for s > 1.
inline std::vector<ScalingRow> scaling_sweep(const ShapePtr& shape, const AlphaParam& alpha, int dim,
                                             const std::vector<double>& s_values,
                                             const Grid* grid = nullptr) {
    std::vector<ScalingRow> rows;
    const double base = perimeter_shape(shape, alpha, dim, grid).total;
    for (double s : s_values) {
        if (!(s > 0)) throw Error("scaling_sweep: s must be positive");
        ScalingRow row;
        row.s = s;
        row.perimeter = perimeter_shape(scale_shape(shape, s), alpha, dim, grid).total;
        row.low_exponent = std::pow(s, dim + alpha.alpha / 2.0) * base;
        row.high_exponent = std::pow(s, dim - 1.0) * base;
        const double lo = s <= 1.0 ? row.low_exponent : row.high_exponent;
        const double hi = s <= 1.0 ? row.high_exponent : row.low_exponent;
        const double slack = 1e-12 * (1.0 + hi);
        row.inside = (row.perimeter >= lo - slack) && (row.perimeter <= hi + slack);
        rows.push_back(row);
    }
    return rows;
}

// lhs = P(E cap F) + P(E cup F), rhs = P(E) + P(F); faces estimator, where
// submodularity is exact by edge counting.
inline std::pair<double, double> submodularity_check(const CellSet& e, const CellSet& f,
                                                     const AlphaParam& alpha) {
    if (!e.grid.same_layout(f.grid)) throw Error("submodularity_check: grids differ");
    const auto per = [&](const CellSet& s) {
        return perimeter_indicator(s, alpha, Estimator::faces).total;
    };
    const double lhs = per(set_intersection(e, f)) + per(set_union(e, f));
    const double rhs = per(e) + per(f);
    return {lhs, rhs};
}

struct GrowthRow {
    double extent = 0;
    double total = 0;
    double jump_part = 0;
    double weight_part = 0;
};

// P((box_R \ E), box_R) across growing boxes; the weight part grows like
// R^{d + alpha/2} once R dominates the shape.
inline std::vector<GrowthRow> complement_growth(const ShapePtr& shape, const AlphaParam& alpha, int dim,
                                                const std::vector<double>& box_extents,
                                                int cells_per_axis, Estimator est = Estimator::crofton) {
    std::vector<GrowthRow> rows;
    for (double R : box_extents) {
        const Grid g = build_grid(dim, R, cells_per_axis);
        const CellSet inside = rasterize(shape, g);
        const CellSet comp = set_complement(inside);
        const PerimeterValue p = perimeter_indicator(comp, alpha, est);
        rows.push_back(GrowthRow{R, p.total, p.jump_part, p.weight_part});
    }
    return rows;
}

// Least-squares log-log slope of the last `tail` rows of (extent, weight).
inline double growth_loglog_slope(const std::vector<GrowthRow>& rows, std::size_t tail = 3) {
    if (rows.size() < tail || tail < 2) throw Error("growth_loglog_slope: not enough rows");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const std::size_t b = rows.size() - tail;
    for (std::size_t i = b; i < rows.size(); ++i) {
        const double x = std::log(rows[i].extent);
        const double y = std::log(rows[i].weight_part);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(tail);
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct RestrictedPerimeterReport {
    double value = 0;
    double dual_bound = 0;  // min over the multiplier of the per-cell dual norms
    int iterations = 0;
    bool converged = false;
};

namespace detail {

// min over mu of sum_c |b_c + mu g_c|_2 h^d (Lagrangian dual of the single
// linear constraint), by golden-section on a bracketed convex objective.
inline double restricted_dual_scan(const VectorField& b, const VectorField& gdir, double hd) {
    const std::size_t cells = b.grid.cells();
    const int nc = b.ncomp;
    const auto eval = [&](double mu) {
        return pairwise_sum_index(cells,
                                  [&](std::size_t c) {
                                      double s = 0;
                                      for (int j = 0; j < nc; ++j) {
                                          const double v = b.comps[c * nc + j] + mu * gdir.comps[c * nc + j];
                                          s += v * v;
                                      }
                                      return std::sqrt(s);
                                  }) *
               hd;
    };
    // convexity: eval(2t) >= eval(t) places the minimizer beyond 2t
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i < 60 && eval(2.0 * lo) < eval(lo); ++i) lo *= 2.0;
    lo *= 2.0;
    for (int i = 0; i < 60 && eval(2.0 * hi) < eval(hi); ++i) hi *= 2.0;
    hi *= 2.0;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, c = hi;
    double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
    double f1 = eval(x1), f2 = eval(x2);
    for (int i = 0; i < 200 && (c - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(c)); ++i) {
        if (f1 < f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - gr * (c - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (c - a);
            f2 = eval(x2);
        }
    }
    return eval((a + c) / 2.0);
}

}  // namespace detail

// Definition-style restricted perimeter: the variation supremum with the
// additional zero-integral constraint on the weighted component combination.
// Projected ascent with Dykstra alternation between the per-cell ball and
// the constraint hyperplane.
inline RestrictedPerimeterReport restricted_perimeter(const CellSet& e, const AlphaParam& alpha,
                                                      int max_iters = 4000, double tol = 1e-7) {
    const Grid& g = e.grid;
    const int nc = 2 * g.dim;
    const double hd = g.cell_volume();
    const ScalarField f = indicator(e);
    const HermiteGradient b = hermite_gradient(f, alpha);

    // coefficient field of the zero-order part of the divergence
    VectorField gdir(g, nc);
    if (alpha.kappa > 0) {
        for (std::size_t c = 0; c < g.cells(); ++c) {
            const Vec3 w = weight_vector(g.cell_center(c), g.dim, alpha);
            for (int j = 0; j < nc; ++j)
                gdir.comps[c * nc + j] = component_sign(j, g.dim) * w[component_axis(j, g.dim)];
        }
    }
    double gg = 0;
    for (double v : gdir.comps) gg += v * v;

    RestrictedPerimeterReport rep;
    rep.dual_bound = gg > 0 ? detail::restricted_dual_scan(b, gdir, hd)
                            : pairwise_sum_index(g.cells(), [&](std::size_t c) { return b.cell_norm(c); }) * hd;

    const double tau = 1.0 / variation_step_bound(g, alpha);
    const std::size_t m = b.comps.size();
    std::vector<double> phi(m, 0.0), pcorr(m, 0.0), qcorr(m, 0.0), y(m, 0.0);
    const auto project_ball = [&](std::vector<double>& z) {
        for (std::size_t c = 0; c < g.cells(); ++c) {
            double n2 = 0;
            for (int j = 0; j < nc; ++j) n2 += z[c * nc + j] * z[c * nc + j];
            if (n2 > 1.0) {
                const double inv = 1.0 / std::sqrt(n2);
                for (int j = 0; j < nc; ++j) z[c * nc + j] *= inv;
            }
        }
    };
    const auto project_plane = [&](std::vector<double>& z) {
        if (gg == 0) return;
        double dot = 0;
        for (std::size_t i = 0; i < m; ++i) dot += z[i] * gdir.comps[i];
        const double t = dot / gg;
        for (std::size_t i = 0; i < m; ++i) z[i] -= t * gdir.comps[i];
    };

    const auto objective = [&]() {
        return -pairwise_sum_index(g.cells(),
                                   [&](std::size_t c) {
                                       double s = 0;
                                       for (int j = 0; j < nc; ++j)
                                           s += b.comps[c * nc + j] * phi[c * nc + j];
                                       return s;
                                   }) *
               hd;
    };

    double value = 0;
    const double scale = 1.0 + std::abs(rep.dual_bound);
    std::vector<double> yp(m), xp(m);
    int it = 0;
    double bmax = 0;
    for (double v : b.comps) bmax = std::max(bmax, std::abs(v));
    // the objective is linear, so the step may grow geometrically; the cap
    // keeps the Dykstra corrections small enough that doubles retain the
    // O(1) iterate underneath them
    const double step_cap = 3e5 / (1.0 + bmax);
    double step = tau;
    bool saturated = false;
    for (it = 1; it <= max_iters; ++it) {
        // once the step saturates the target is stationary and the Dykstra
        // corrections are carried across outer steps
        if (!saturated) {
            step = std::min(step * 1.5, step_cap);
            for (std::size_t i = 0; i < m; ++i) phi[i] -= step * b.comps[i];
            std::fill(pcorr.begin(), pcorr.end(), 0.0);
            std::fill(qcorr.begin(), qcorr.end(), 0.0);
            if (step >= step_cap) saturated = true;
        }
        for (int inner = 0; inner < 50; ++inner) {
            for (std::size_t i = 0; i < m; ++i) y[i] = phi[i] + pcorr[i];
            yp = y;
            project_ball(yp);
            for (std::size_t i = 0; i < m; ++i) pcorr[i] = y[i] - yp[i];
            for (std::size_t i = 0; i < m; ++i) y[i] = yp[i] + qcorr[i];
            xp = y;
            project_plane(xp);
            for (std::size_t i = 0; i < m; ++i) qcorr[i] = y[i] - xp[i];
            phi = xp;
        }
        value = objective();
        if (rep.dual_bound - value <= tol * scale) break;
    }
    // exact feasibility: the hyperplane passes through the origin, so a
    // global rescale stays on it while restoring the ball constraints
    project_plane(phi);
    double worst = 0;
    for (std::size_t c = 0; c < g.cells(); ++c) {
        double n2 = 0;
        for (int j = 0; j < nc; ++j) n2 += phi[c * nc + j] * phi[c * nc + j];
        worst = std::max(worst, n2);
    }
    if (worst > 1.0) {
        const double inv = 1.0 / std::sqrt(worst);
        for (auto& v : phi) v *= inv;
    }
    value = objective();
    rep.value = value;
    rep.iterations = std::min(it, max_iters);
    rep.converged = rep.dual_bound - value <= tol * scale;
    return rep;
}

// Midpoint quadrature over levels t of the perimeter of superlevel sets
// {f > t} between min f and max f.
inline double coarea_integral(const ScalarField& f, const AlphaParam& alpha, int n_levels,
                              Estimator est = Estimator::crofton) {
    if (n_levels < 16) throw Error("coarea_integral: n_levels must be >= 16");
    double lo = f.v.empty() ? 0.0 : f.v[0], hi = lo;
    for (double v : f.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) return 0.0;
    const double dt = (hi - lo) / n_levels;
    return pairwise_sum_index(static_cast<std::size_t>(n_levels),
                              [&](std::size_t j) {
                                  const double t = lo + (static_cast<double>(j) + 0.5) * dt;
                                  return perimeter_indicator(superlevel_set(f, t), alpha, est).total;
                              }) *
           dt;
}

}  // namespace hbv
