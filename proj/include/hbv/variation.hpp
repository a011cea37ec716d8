#pragma once

#include <cmath>
#include <vector>

#include "hbv/field.hpp"
#include "hbv/grid.hpp"
#include "hbv/sum.hpp"

namespace hbv {

// 2*dim components per cell. Component order follows the generalized
// gradient: first the minus block over axes d..1, then the plus block over
// axes 1..d, so component j and its mirror 2d-1-j act along the same axis
// and differ only in the sign of the zero-order term.
struct VectorField {
    Grid grid;
    int ncomp = 0;
    std::vector<double> comps;  // cell-major: comps[cell * ncomp + j]

    VectorField() = default;
    VectorField(const Grid& g, int nc) : grid(g), ncomp(nc), comps(g.cells() * nc, 0.0) {}

    double& at(std::size_t cell, int j) { return comps[cell * ncomp + j]; }
    double at(std::size_t cell, int j) const { return comps[cell * ncomp + j]; }

    double cell_norm(std::size_t cell) const {
        double s = 0;
        for (int j = 0; j < ncomp; ++j) {
            const double v = comps[cell * ncomp + j];
            s += v * v;
        }
        return std::sqrt(s);
    }
};

using HermiteGradient = VectorField;
using VectorTestField = VectorField;

inline int component_axis(int j, int dim) { return j < dim ? dim - 1 - j : j - dim; }
inline double component_sign(int j, int dim) { return j < dim ? -1.0 : 1.0; }

namespace detail {

// First derivative along one axis: central differences in the interior,
// one-sided at the box boundary. Axes of extent one get derivative zero.
template <class Get, class Put>
void axis_derivative(const Grid& g, int axis, Get&& get, Put&& put) {
    const int n = g.shape[axis];
    const std::size_t st = g.stride(axis);
    const double inv_h = 1.0 / g.spacing;
    const double inv_2h = 0.5 / g.spacing;
    const std::size_t cells = g.cells();
    for (std::size_t i = 0; i < cells; ++i) {
        const int k = g.coords(i)[axis];
        double d = 0.0;
        if (n > 1) {
            if (k == 0)
                d = (get(i + st) - get(i)) * inv_h;
            else if (k == n - 1)
                d = (get(i) - get(i - st)) * inv_h;
            else
                d = (get(i + st) - get(i - st)) * inv_2h;
        }
        put(i, d);
    }
}

// Exact transpose of axis_derivative: scatter each stencil row.
template <class Get, class Acc>
void axis_derivative_transpose(const Grid& g, int axis, Get&& get, Acc&& acc) {
    const int n = g.shape[axis];
    if (n <= 1) return;
    const std::size_t st = g.stride(axis);
    const double inv_h = 1.0 / g.spacing;
    const double inv_2h = 0.5 / g.spacing;
    const std::size_t cells = g.cells();
    for (std::size_t i = 0; i < cells; ++i) {
        const int k = g.coords(i)[axis];
        const double p = get(i);
        if (p == 0.0) continue;
        if (k == 0) {
            acc(i, -p * inv_h);
            acc(i + st, p * inv_h);
        } else if (k == n - 1) {
            acc(i - st, -p * inv_h);
            acc(i, p * inv_h);
        } else {
            acc(i - st, -p * inv_2h);
            acc(i + st, p * inv_2h);
        }
    }
}

}  // namespace detail

inline HermiteGradient hermite_gradient(const ScalarField& f, const AlphaParam& alpha) {
    const Grid& g = f.grid;
    const int d = g.dim;
    HermiteGradient out(g, 2 * d);
    std::vector<double> deriv(g.cells());
    for (int axis = 0; axis < d; ++axis) {
        detail::axis_derivative(
            g, axis, [&](std::size_t i) { return f.v[i]; },
            [&](std::size_t i, double v) { deriv[i] = v; });
        const int jm = d - 1 - axis;  // minus block slot
        const int jp = d + axis;      // plus block slot
        for (std::size_t i = 0; i < g.cells(); ++i) {
            const Vec3 w = weight_vector(g.cell_center(i), d, alpha);
            const double zo = w[axis] * f.v[i];
            out.at(i, jm) = deriv[i] - zo;
            out.at(i, jp) = deriv[i] + zo;
        }
    }
    return out;
}

// Transpose of the discrete gradient; the discrete divergence is its
// negative, so integration by parts holds with zero error by construction.
inline ScalarField adjoint_gradient(const VectorTestField& phi, const AlphaParam& alpha) {
    const Grid& g = phi.grid;
    const int d = g.dim;
    if (phi.ncomp != 2 * d) throw Error("adjoint_gradient: component count mismatch");
    ScalarField out(g, 0.0);
    for (int j = 0; j < 2 * d; ++j) {
        const int axis = component_axis(j, d);
        const double sign = component_sign(j, d);
        detail::axis_derivative_transpose(
            g, axis, [&](std::size_t i) { return phi.at(i, j); },
            [&](std::size_t i, double v) { out.v[i] += v; });
        for (std::size_t i = 0; i < g.cells(); ++i) {
            const Vec3 w = weight_vector(g.cell_center(i), d, alpha);
            out.v[i] += sign * w[axis] * phi.at(i, j);
        }
    }
    return out;
}

inline ScalarField hermite_divergence(const VectorTestField& phi, const AlphaParam& alpha) {
    ScalarField out = adjoint_gradient(phi, alpha);
    for (auto& v : out.v) v = -v;
    return out;
}

inline ScalarField pointwise_magnitude(const HermiteGradient& grad) {
    ScalarField out(grad.grid);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = grad.cell_norm(i);
    return out;
}

// exact discrete supremum of the dual formulation: sum of pointwise l2
// norms of the gradient, times the cell volume
inline double variation_dual_norm(const ScalarField& f, const AlphaParam& alpha) {
    const HermiteGradient grad = hermite_gradient(f, alpha);
    return pairwise_sum_index(f.size(), [&](std::size_t i) { return grad.cell_norm(i); }) *
           f.grid.cell_volume();
}

inline double total_variation_smooth(const ScalarField& f, const AlphaParam& alpha) {
    return variation_dual_norm(f, alpha);
}

struct VariationReport {
    double quadrature_value = 0;
    double sup_value = 0;
    int iterations = 0;
    double dual_gap_estimate = 0;
    bool converged = false;
};

inline double variation_step_bound(const Grid& g, const AlphaParam& alpha) {
    double max_w2 = 0;
    if (alpha.kappa > 0) {
        for (std::size_t i = 0; i < g.cells(); ++i) {
            const double r = norm(g.cell_center(i), g.dim);
            const double w = alpha.kappa * std::pow(r, alpha.alpha / 2.0);
            max_w2 = std::max(max_w2, w * w);
        }
    }
    return 2.0 * std::sqrt(2.0 * g.dim / (g.spacing * g.spacing) + max_w2);
}

// Projected gradient ascent on phi -> sum f * div phi * h^d over test fields
// with pointwise Euclidean norm <= 1. The exact optimum is
// variation_dual_norm(f), which furnishes the gap estimate.
inline VariationReport variation_sup(const ScalarField& f, const AlphaParam& alpha, int max_iters = 2000,
                                     double tol = 1e-8) {
    const Grid& g = f.grid;
    const int nc = 2 * g.dim;
    const double hd = g.cell_volume();
    const HermiteGradient b = hermite_gradient(f, alpha);

    VariationReport rep;
    rep.quadrature_value =
        pairwise_sum_index(f.size(), [&](std::size_t i) { return b.cell_norm(i); }) * hd;

    const double tau = 1.0 / variation_step_bound(g, alpha);
    VectorTestField phi(g, nc);
    double value = 0.0;
    int it = 0;
    const double scale = 1.0 + std::abs(rep.quadrature_value);
    for (it = 1; it <= max_iters; ++it) {
        for (std::size_t c = 0; c < f.size(); ++c) {
            double n2 = 0;
            for (int j = 0; j < nc; ++j) {
                double& p = phi.comps[c * nc + j];
                p -= tau * b.comps[c * nc + j];
                n2 += p * p;
            }
            if (n2 > 1.0) {
                const double inv = 1.0 / std::sqrt(n2);
                for (int j = 0; j < nc; ++j) phi.comps[c * nc + j] *= inv;
            }
        }
        value = -pairwise_sum_index(f.size(),
                                    [&](std::size_t c) {
                                        double s = 0;
                                        for (int j = 0; j < nc; ++j)
                                            s += b.comps[c * nc + j] * phi.comps[c * nc + j];
                                        return s;
                                    }) *
                hd;
        if (rep.quadrature_value - value <= tol * scale) break;
    }
    rep.sup_value = value;
    rep.iterations = std::min(it, max_iters);
    rep.dual_gap_estimate = std::max(0.0, rep.quadrature_value - value);
    rep.converged = rep.dual_gap_estimate <= tol * scale;
    return rep;
}

struct MinMaxReport {
    double tv_max = 0;
    double tv_min = 0;
    double tv_u = 0;
    double tv_v = 0;
};

inline MinMaxReport minmax_pair(const ScalarField& u, const ScalarField& v, const AlphaParam& alpha) {
    if (!u.grid.same_layout(v.grid)) throw Error("minmax_pair: grids differ");
    MinMaxReport r;
    r.tv_max = variation_dual_norm(cellwise_max(u, v), alpha);
    r.tv_min = variation_dual_norm(cellwise_min(u, v), alpha);
    r.tv_u = variation_dual_norm(u, alpha);
    r.tv_v = variation_dual_norm(v, alpha);
    return r;
}

}  // namespace hbv
