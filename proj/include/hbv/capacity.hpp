#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hbv/field.hpp"
#include "hbv/graphcut.hpp"
#include "hbv/perimeter.hpp"
#include "hbv/random_sets.hpp"
#include "hbv/variation.hpp"

namespace hbv {

// Exposed-face (zero extension) perimeter used by every optimization module;
// for sets away from the wall it coincides with perimeter_indicator(faces).
inline double graph_perimeter(const CellSet& s, const AlphaParam& alpha) {
    return std::numbers::sqrt2 * faces_perimeter(s, BoundaryRule::exposed) + weight_part_of(s, alpha);
}

enum class CapacityMethod { setcut, relaxed, ballscan };

inline const char* capacity_method_name(CapacityMethod m) {
    switch (m) {
        case CapacityMethod::setcut: return "setcut";
        case CapacityMethod::relaxed: return "relaxed";
        default: return "ballscan";
    }
}

struct CapacityResult {
    double value = 0;
    CellSet minimizer_set;       // setcut path
    ScalarField minimizer_field; // relaxed path
    CapacityMethod method = CapacityMethod::setcut;
    bool converged = true;
    double gap = 0;
    int iterations = 0;
};

inline ScalarField capacity_unary(const Grid& g, const AlphaParam& alpha) {
    ScalarField u(g);
    const double hd = g.cell_volume();
    const ScalarField w = weight_field(g, alpha);
    for (std::size_t c = 0; c < u.size(); ++c)
        u.v[c] = hd * (1.0 + std::numbers::sqrt2 * w.v[c]);
    return u;
}

// Geometric route: minimize |A| + P(A) over supersets A of K by one cut.
inline CapacityResult capacity_set_based(const CellSet& k, const AlphaParam& alpha) {
    const Grid& g = k.grid;
    CutGraph cg = build_energy(capacity_unary(g, alpha), std::numbers::sqrt2, k, CellSet(g));
    CutSolution sol = min_cut(cg);
    CapacityResult r;
    r.value = sol.value;
    r.minimizer_set = sol.set;
    r.method = CapacityMethod::setcut;
    r.iterations = sol.flow_iterations;
    return r;
}

namespace detail {

// Face-difference operator matching the exposed-face graph energy: interior
// faces carry f(c') - f(c), wall faces carry f(c).
struct FaceOperator {
    const Grid* grid;
    struct Face {
        std::size_t a;
        std::size_t b;  // == a for wall faces
        bool wall;
    };
    std::vector<Face> faces;

    explicit FaceOperator(const Grid& g) : grid(&g) {
        for (int axis = 0; axis < g.dim; ++axis) {
            const std::size_t st = g.stride(axis);
            const int n = g.shape[axis];
            for (std::size_t c = 0; c < g.cells(); ++c) {
                const int k = g.coords(c)[axis];
                if (k < n - 1) faces.push_back(Face{c, c + st, false});
                if (k == 0) faces.push_back(Face{c, c, true});
                if (k == n - 1) faces.push_back(Face{c, c, true});
            }
        }
    }

    void apply(const std::vector<double>& f, std::vector<double>& out) const {
        out.resize(faces.size());
        for (std::size_t i = 0; i < faces.size(); ++i) {
            const Face& fc = faces[i];
            out[i] = fc.wall ? f[fc.a] : f[fc.b] - f[fc.a];
        }
    }

    void apply_transpose(const std::vector<double>& p, std::vector<double>& out) const {
        out.assign(grid->cells(), 0.0);
        for (std::size_t i = 0; i < faces.size(); ++i) {
            const Face& fc = faces[i];
            if (fc.wall) {
                out[fc.a] += p[i];
            } else {
                out[fc.b] += p[i];
                out[fc.a] -= p[i];
            }
        }
    }

    double norm_estimate() const {
        std::vector<double> v(grid->cells(), 1.0), t, w;
        double lam = 1.0;
        for (int it = 0; it < 30; ++it) {
            apply(v, t);
            apply_transpose(t, w);
            double n2 = 0;
            for (double x : w) n2 += x * x;
            const double n = std::sqrt(n2);
            if (n == 0) break;
            lam = n;
            for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / n;
        }
        return std::sqrt(lam) * 1.01;
    }
};

}  // namespace detail

// Function route: the convex program over admissible profiles 0 <= f <= 1,
// f = 1 on the one-ring dilation of K, solved by a primal-dual first-order
// scheme with an exact primal-dual gap certificate. The discrete anisotropic
// functional obeys an exact layer-cake identity, so at convergence the value
// matches the set route on the dilated obstacle.
inline CapacityResult capacity_relaxed(const CellSet& k, const AlphaParam& alpha, int max_iters = 200000,
                                       double tol = 1e-7) {
    const Grid& g = k.grid;
    const std::size_t n = g.cells();
    const CellSet kd = dilate(k);
    const detail::FaceOperator D(g);
    const double wface = std::numbers::sqrt2 * g.face_area();
    const ScalarField a = capacity_unary(g, alpha);

    const double L = D.norm_estimate();
    const double sigma = 0.95 / L, tau = 0.95 / L;

    std::vector<double> f(n, 0.0), fbar(n, 0.0), p(D.faces.size(), 0.0), df, dtp;
    for (std::size_t c = 0; c < n; ++c)
        if (kd.m[c]) f[c] = fbar[c] = 1.0;

    const auto primal = [&]() {
        double lin = pairwise_sum_index(n, [&](std::size_t c) { return a.v[c] * f[c]; });
        D.apply(f, df);
        double tv = pairwise_sum_index(df.size(), [&](std::size_t i) { return std::abs(df[i]); });
        return lin + wface * tv;
    };
    const auto dual = [&]() {
        D.apply_transpose(p, dtp);
        return pairwise_sum_index(n, [&](std::size_t c) {
            const double y = dtp[c] + a.v[c];
            return kd.m[c] ? y : std::min(0.0, y);
        });
    };

    CapacityResult r;
    r.method = CapacityMethod::relaxed;
    int it = 0;
    double pv = primal();
    for (it = 1; it <= max_iters; ++it) {
        D.apply(fbar, df);
        for (std::size_t i = 0; i < p.size(); ++i) {
            double z = p[i] + sigma * df[i];
            p[i] = std::min(wface, std::max(-wface, z));
        }
        D.apply_transpose(p, dtp);
        for (std::size_t c = 0; c < n; ++c) {
            const double prev = f[c];
            double z = prev - tau * (dtp[c] + a.v[c]);
            z = kd.m[c] ? 1.0 : std::min(1.0, std::max(0.0, z));
            f[c] = z;
            fbar[c] = 2.0 * z - prev;
        }
        if (it % 50 == 0 || it == max_iters) {
            pv = primal();
            const double dv = dual();
            r.gap = pv - dv;
            if (r.gap <= tol * (1.0 + std::abs(pv))) break;
        }
    }
    r.value = pv;
    r.iterations = it;
    r.converged = r.gap <= tol * (1.0 + std::abs(pv));
    r.minimizer_field = ScalarField(g);
    r.minimizer_field.v = f;
    return r;
}

// Sobolev 1-capacity: minimize the full W^{1,1} norm (l1 over the 2d
// generalized derivative components plus the L1 norm) over f >= 0 with
// f >= 1 on the dilated obstacle.
inline CapacityResult sobolev_1_capacity(const CellSet& k, const AlphaParam& alpha, int max_iters = 60000,
                                         double tol = 1e-7) {
    const Grid& g = k.grid;
    const std::size_t n = g.cells();
    const int nc = 2 * g.dim;
    const CellSet kd = dilate(k);
    const double hd = g.cell_volume();

    ScalarField f(g), fbar(g);
    for (std::size_t c = 0; c < n; ++c)
        if (kd.m[c]) f.v[c] = fbar.v[c] = 1.0;
    std::vector<double> q(n * nc, 0.0);

    const double L = 1.05 * variation_step_bound(g, alpha);
    const double sigma = 0.95 / L, tau = 0.95 / L;

    const auto objective = [&](const ScalarField& x) {
        const HermiteGradient gr = hermite_gradient(x, alpha);
        const double tv1 = pairwise_sum_index(n, [&](std::size_t c) {
            double s = 0;
            for (int j = 0; j < nc; ++j) s += std::abs(gr.comps[c * nc + j]);
            return s;
        });
        const double l1 = pairwise_sum_index(n, [&](std::size_t c) { return std::abs(x.v[c]); });
        return (tv1 + l1) * hd;
    };

    CapacityResult r;
    r.method = CapacityMethod::relaxed;
    double prev_obj = objective(f);
    int it = 0;
    for (it = 1; it <= max_iters; ++it) {
        const HermiteGradient gb = hermite_gradient(fbar, alpha);
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double z = q[i] + sigma * gb.comps[i];
            q[i] = std::min(1.0, std::max(-1.0, z));
        }
        VectorTestField qf(g, nc);
        qf.comps = q;
        const ScalarField gtq = adjoint_gradient(qf, alpha);
        for (std::size_t c = 0; c < n; ++c) {
            const double prev = f.v[c];
            double z = prev - tau * (gtq.v[c] + 1.0);  // d/df of (|f| + f-part): f >= 0 so |f| = f
            const double lower = kd.m[c] ? 1.0 : 0.0;
            z = std::max(lower, z);
            f.v[c] = z;
            fbar.v[c] = 2.0 * z - prev;
        }
        if (it % 200 == 0) {
            const double obj = objective(f);
            const double change = std::abs(prev_obj - obj);
            if (change <= tol * (1.0 + std::abs(obj)) && it > 400) {
                prev_obj = obj;
                break;
            }
            prev_obj = obj;
        }
    }
    r.value = objective(f);
    r.iterations = it;
    r.converged = it < max_iters;
    r.gap = 0.0;
    r.minimizer_field = f;
    return r;
}

// --- capacity axioms on seeded random instances ---

struct AxiomCheck {
    std::string axiom;
    int instance = 0;
    double lhs = 0;
    double rhs = 0;
    bool ok = true;
};

struct AxiomSuiteReport {
    int trials = 0;
    int violations = 0;
    std::vector<AxiomCheck> checks;
};

inline AxiomSuiteReport capacity_axiom_suite(const Grid& g, const AlphaParam& alpha, std::uint64_t seed,
                                             int trials) {
    if (trials < 1) throw Error("capacity_axiom_suite: trials must be >= 1");
    AxiomSuiteReport rep;
    rep.trials = trials;
    Rng rng(seed);
    const double rtol = 1e-9;
    const auto cap = [&](const CellSet& s) { return capacity_set_based(s, alpha).value; };
    const auto push = [&](const char* axiom, int inst, double lhs, double rhs) {
        AxiomCheck c{axiom, inst, lhs, rhs, lhs <= rhs + rtol * (1.0 + std::abs(rhs))};
        if (!c.ok) ++rep.violations;
        rep.checks.push_back(std::move(c));
    };

    for (int t = 0; t < trials; ++t) {
        const CellSet A = random_blob(g, rng);
        const CellSet B = random_blob(g, rng);
        const CellSet U = set_union(A, B);
        const CellSet I = set_intersection(A, B);
        const double cA = cap(A), cB = cap(B), cU = cap(U), cI = cap(I);
        push("monotonicity", t, cA, cU);
        push("monotonicity", t, cB, cU);
        push("strong_subadditivity", t, cU + cI, cA + cB);

        const int kcount = static_cast<int>(rng.uniform_int(2, 8));
        std::vector<CellSet> family;
        CellSet big(g);
        double sum = 0;
        for (int j = 0; j < kcount; ++j) {
            family.push_back(random_blob(g, rng, 2));
            big = set_union(big, family.back());
            sum += cap(family.back());
        }
        push("finite_subadditivity", t, cap(big), sum);

        // increasing chain by repeated dilation: the union is the last set
        std::vector<CellSet> chain{A};
        for (int j = 0; j < 3; ++j) chain.push_back(dilate(chain.back()));
        double prev = -1;
        bool mono = true;
        for (const auto& s : chain) {
            const double v = cap(s);
            if (v < prev - rtol * (1.0 + std::abs(prev))) mono = false;
            prev = v;
        }
        AxiomCheck inc{"increasing_chain", t, prev, cap(chain.back()), mono};
        inc.ok = inc.ok && std::abs(inc.lhs - inc.rhs) <= rtol * (1.0 + std::abs(inc.rhs));
        if (!inc.ok) ++rep.violations;
        rep.checks.push_back(inc);

        // decreasing compact chain by unions with shrinking companions
        std::vector<CellSet> down{U, set_union(A, I), A, I};
        for (std::size_t j = 0; j + 1 < down.size(); ++j)
            if (!is_subset(down[j + 1], down[j])) down[j + 1] = set_intersection(down[j + 1], down[j]);
        prev = std::numeric_limits<double>::infinity();
        mono = true;
        for (const auto& s : down) {
            const double v = cap(s);
            if (v > prev + rtol * (1.0 + std::abs(prev))) mono = false;
            prev = v;
        }
        AxiomCheck dec{"decreasing_chain", t, prev, cap(down.back()), mono};
        dec.ok = dec.ok && std::abs(dec.lhs - dec.rhs) <= rtol * (1.0 + std::abs(dec.rhs));
        if (!dec.ok) ++rep.violations;
        rep.checks.push_back(dec);
    }
    return rep;
}

// --- trace and isocapacity ---

struct TraceEntry {
    double lhs = 0;
    double rhs = 0;
    double ratio = 0;
};

struct TraceReport {
    double p = 0;
    std::vector<TraceEntry> entries;
    double max_ratio = 0;
};

// lhs = (sum |f|^p h^d)^{1/p} against rhs = ||f||_1 + ||grad_H f||, with the
// Lebesgue measure as the trace measure.
inline TraceReport trace_check(double p, const std::vector<ScalarField>& corpus, const AlphaParam& alpha) {
    TraceReport rep;
    rep.p = p;
    for (const auto& f : corpus) {
        TraceEntry e;
        e.lhs = field_lp_norm(f, p);
        e.rhs = field_abs_mass(f) + variation_dual_norm(f, alpha);
        e.ratio = e.rhs > 0 ? e.lhs / e.rhs : 0.0;
        rep.max_ratio = std::max(rep.max_ratio, e.ratio);
        rep.entries.push_back(e);
    }
    return rep;
}

// Capacity of a centered ball through the geometric description, scanning
// concentric candidate radii; the objective is increasing in the radius, so
// the optimum sits at the obstacle radius.
inline double capacity_ballscan(double r, int dim, const AlphaParam& alpha, int samples = 512) {
    if (!(r >= 0)) throw Error("capacity_ballscan: radius must be >= 0");
    if (r == 0) return 0;
    const double sigma = unit_sphere_area(dim);
    const double wd = unit_ball_volume(dim);
    const double pexp = dim + alpha.alpha / 2.0;
    const auto value = [&](double rho) {
        return wd * std::pow(rho, dim) + std::numbers::sqrt2 * sigma * std::pow(rho, dim - 1) +
               std::numbers::sqrt2 * alpha.kappa * sigma * std::pow(rho, pexp) / pexp;
    };
    double best = value(r);
    for (int i = 1; i <= samples; ++i) best = std::min(best, value(r * (1.0 + 3.0 * i / samples)));
    return best;
}

struct IsocapacityReport {
    std::string inequality_id;
    double lhs = 0;
    double rhs = 0;
    double ratio = 0;
};

inline IsocapacityReport make_isocap(const char* id, double lhs, double rhs) {
    return IsocapacityReport{id, lhs, rhs, rhs != 0 ? lhs / rhs : 0.0};
}

// Chain inequalities eq5 and eq7 for a radial profile: the superlevel sets
// are balls, whose radius is recovered from the measured volume, and whose
// capacity follows the radius-scan route.
inline std::pair<IsocapacityReport, IsocapacityReport> isocapacity_check(const ScalarField& f,
                                                                         const AlphaParam& alpha,
                                                                         int n_levels) {
    const Grid& g = f.grid;
    if (g.dim < 2) throw Error("isocapacity_check: needs dim >= 2");
    const double q = static_cast<double>(g.dim) / (g.dim - 1);
    double tmax = 0;
    for (double v : f.v) tmax = std::max(tmax, std::abs(v));
    const double dt = tmax / n_levels;
    const double hd = g.cell_volume();

    // c(f) = ( int_0^inf cap({|f| >= t})^q d(t^q) )^{1/q}
    const double cap_integral =
        pairwise_sum_index(static_cast<std::size_t>(n_levels), [&](std::size_t j) {
            const double t = (static_cast<double>(j) + 0.5) * dt;
            std::size_t cnt = 0;
            for (double v : f.v) cnt += std::abs(v) >= t;
            const double vol = static_cast<double>(cnt) * hd;
            const double r = std::pow(vol / unit_ball_volume(g.dim), 1.0 / g.dim);
            const double cap = capacity_ballscan(r, g.dim, alpha);
            return std::pow(cap, q) * q * std::pow(t, q - 1.0) * dt;
        });
    const double cfrak = std::pow(cap_integral, 1.0 / q);

    const double lq = field_lp_norm(f, q);
    const double bv = field_abs_mass(f) + variation_dual_norm(f, alpha);
    return {make_isocap("eq5", lq, cfrak), make_isocap("eq7", cfrak, bv)};
}

// eq6 and eq8 for a rasterized compact set, with the set-cut capacity.
inline std::pair<IsocapacityReport, IsocapacityReport> isocapacity_set_check(const CellSet& k,
                                                                             const AlphaParam& alpha) {
    const int d = k.grid.dim;
    if (d < 2) throw Error("isocapacity_set_check: needs dim >= 2");
    const double cap = capacity_set_based(k, alpha).value;
    const double vol = volume(k);
    const double eq6_lhs = std::pow(vol, (d - 1.0) / d);
    const double eq8_rhs = vol + graph_perimeter(k, alpha);
    return {make_isocap("eq6", eq6_lhs, cap), make_isocap("eq8", cap, eq8_rhs)};
}

}  // namespace hbv
