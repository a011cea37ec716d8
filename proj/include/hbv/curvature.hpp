#pragma once

#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "hbv/capacity.hpp"
#include "hbv/field.hpp"
#include "hbv/graphcut.hpp"
#include "hbv/io.hpp"
#include "hbv/random_sets.hpp"

namespace hbv {

// State of one lambda-sweep run: the nested minimizers E_i of
// P(F) + lambda_i * Lambda(E \ F) over F inside E, and the curvature
// function assembled from them.
struct CurvatureRun {
    AlphaParam alpha;
    CellSet E;
    ScalarField h_field;
    std::vector<double> lambdas;
    std::vector<CellSet> nested_sets;
    std::vector<double> sweep_values;  // minimized energy per lambda (without the constant term)
    double c_increment = 0;
    ScalarField u;
    std::size_t unconverged_cells = 0;
    double unconverged_mass = 0;
};

inline double lambda_measure(const CellSet& f, const ScalarField& h) {
    return pairwise_sum_index(f.size(), [&](std::size_t c) { return f.m[c] ? h.v[c] : 0.0; }) *
           f.grid.cell_volume();
}

// lambda_i = i * c with c = P(E)/Lambda(E): bounded increments that reach
// the exhaustion regime.
inline std::vector<double> default_lambda_schedule(const CellSet& e, const ScalarField& h_field,
                                                   const AlphaParam& alpha, int steps = 64) {
    const double per = graph_perimeter(e, alpha);
    const double lam = lambda_measure(e, h_field);
    if (!(lam > 0)) throw Error("default_lambda_schedule: set has zero mass");
    const double c = per / lam;
    std::vector<double> out;
    for (int i = 0; i <= steps; ++i) out.push_back(c * i);
    return out;
}

// Step I of the construction: solve min P(F) + lambda Lambda(E \ F) over
// F inside E for each lambda via one warm-started parametric family of cuts.
// Minimizers are the canonical lowest ones, hence nested.
inline CurvatureRun lambda_sweep(const CellSet& e, const ScalarField& h_field,
                                 const std::vector<double>& lambdas, const AlphaParam& alpha) {
    const Grid& g = e.grid;
    if (!g.same_layout(h_field.grid)) throw Error("lambda_sweep: grids differ");
    if (lambdas.empty() || lambdas.front() != 0.0)
        throw Error("lambda_sweep: lambda schedule must start at 0");
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i - 1])) throw Error("lambda_sweep: lambdas must be ascending");
    for (std::size_t c = 0; c < e.size(); ++c)
        if (e.m[c] && !(h_field.v[c] > 0)) throw Error("lambda_sweep: h must be positive on E");

    const double hd = g.cell_volume();
    ScalarField base(g), direction(g);
    const ScalarField w = weight_field(g, alpha);
    for (std::size_t c = 0; c < g.cells(); ++c) {
        base.v[c] = std::numbers::sqrt2 * w.v[c] * hd;
        direction.v[c] = e.m[c] ? -h_field.v[c] * hd : 0.0;
    }
    const CellSet none(g);
    auto sols = parametric_sweep(base, direction, lambdas, std::numbers::sqrt2, none, set_complement(e));

    CurvatureRun run{alpha, e, h_field, lambdas, {}, {}, 0.0, ScalarField(g), 0, 0.0};
    for (std::size_t i = 0; i < sols.size(); ++i) {
        run.nested_sets.push_back(sols[i].set);
        run.sweep_values.push_back(sols[i].value);
        if (i > 0 && !is_subset(run.nested_sets[i - 1], run.nested_sets[i]))
            throw Error("lambda_sweep: nesting violated");  // cannot happen with lowest minimizers
        run.c_increment = std::max(run.c_increment, i > 0 ? lambdas[i] - lambdas[i - 1] : lambdas[0]);
    }
    return run;
}

// Step II: u = -lambda_i h on E_i \ E_{i-1}, zero outside; cells of E never
// absorbed at the final lambda stay at zero and are reported, not hidden.
inline ScalarField build_curvature(CurvatureRun& run) {
    const Grid& g = run.E.grid;
    for (std::size_t i = 1; i < run.nested_sets.size(); ++i)
        if (!is_subset(run.nested_sets[i - 1], run.nested_sets[i]))
            throw Error("build_curvature: nested_sets are not a chain");
    ScalarField u(g);
    for (std::size_t i = 1; i < run.nested_sets.size(); ++i) {
        const CellSet& cur = run.nested_sets[i];
        const CellSet& prev = run.nested_sets[i - 1];
        for (std::size_t c = 0; c < g.cells(); ++c)
            if (cur.m[c] && !prev.m[c]) u.v[c] = -run.lambdas[i] * run.h_field.v[c];
    }
    run.unconverged_cells = 0;
    run.unconverged_mass = 0;
    const CellSet& last = run.nested_sets.back();
    for (std::size_t c = 0; c < g.cells(); ++c) {
        if (run.E.m[c] && !last.m[c]) {
            ++run.unconverged_cells;
            run.unconverged_mass += run.h_field.v[c] * g.cell_volume();
        }
    }
    run.u = u;
    return u;
}

struct MassariValue {
    double perimeter_term = 0;
    double integral_term = 0;
    double total = 0;
};

// F_u(F) = P(F) + integral_F u, with the exposed-face box-relative perimeter.
inline MassariValue massari_value(const CellSet& f, const ScalarField& u, const AlphaParam& alpha) {
    if (!f.grid.same_layout(u.grid)) throw Error("massari_value: grids differ");
    MassariValue m;
    m.perimeter_term = graph_perimeter(f, alpha);
    m.integral_term =
        pairwise_sum_index(f.size(), [&](std::size_t c) { return f.m[c] ? u.v[c] : 0.0; }) *
        f.grid.cell_volume();
    m.total = m.perimeter_term + m.integral_term;
    return m;
}

struct MinimalityReport {
    double value_at_e = 0;
    double global_min = 0;
    double worst_margin = 0;  // max over competitors of F_u(E) - F_u(F)
    std::string worst_family;
    int competitors = 0;
    bool ok = true;
};

// Minimality of E for the Massari functional. Sampled families plus the
// exact global check: u enters only through a unary term, so one
// unconstrained cut finds the true minimizer of F_u.
inline MinimalityReport verify_minimality(const CurvatureRun& run, int trials, std::uint64_t seed,
                                          double tol_scale = 1e-9) {
    const Grid& g = run.E.grid;
    const AlphaParam& alpha = run.alpha;
    const ScalarField& u = run.u;
    MinimalityReport rep;
    rep.value_at_e = massari_value(run.E, u, alpha).total;
    const double scale = 1.0 + std::abs(rep.value_at_e);

    const auto consider = [&](const CellSet& f, const char* family) {
        const double margin = rep.value_at_e - massari_value(f, u, alpha).total;
        ++rep.competitors;
        if (margin > rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_family = family;
        }
    };

    for (const auto& s : run.nested_sets) consider(s, "nested");

    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        // random subset of E: drop a random fraction of its cells
        CellSet sub = run.E;
        const double drop = rng.uniform(0.05, 0.9);
        for (std::size_t c = 0; c < sub.size(); ++c)
            if (sub.m[c] && rng.coin(drop)) sub.m[c] = 0;
        consider(sub, "subset");
        consider(set_union(run.E, random_blob(g, rng)), "superset");
        consider(random_blob(g, rng), "blob");
    }

    ScalarField unary(g);
    const ScalarField w = weight_field(g, alpha);
    const double hd = g.cell_volume();
    for (std::size_t c = 0; c < g.cells(); ++c)
        unary.v[c] = (std::numbers::sqrt2 * w.v[c] + u.v[c]) * hd;
    const CellSet none(g);
    const CutSolution sol = min_cut(build_energy(unary, std::numbers::sqrt2, none, none));
    rep.global_min = sol.value;
    rep.worst_margin = std::max(rep.worst_margin, rep.value_at_e - sol.value);
    if (rep.value_at_e - sol.value > rep.worst_margin - 1e-300) rep.worst_family = "global_cut";
    ++rep.competitors;

    rep.ok = rep.worst_margin <= tol_scale * scale;
    return rep;
}

// Prefix telescoping bound: sum_{i<N} lambda_i Lambda(E_{i+1}\E_i) <= P(E_N).
inline bool telescoping_bound_holds(const CurvatureRun& run, double rtol = 1e-9) {
    double acc = 0;
    for (std::size_t i = 0; i + 1 < run.nested_sets.size(); ++i) {
        acc += run.lambdas[i] * lambda_measure(set_difference(run.nested_sets[i + 1], run.nested_sets[i]),
                                               run.h_field);
        const double per = graph_perimeter(run.nested_sets[i + 1], run.alpha);
        if (acc > per + rtol * (1.0 + per)) return false;
    }
    return true;
}

// L1 bound of Step II: sum |u| h^d <= c Lambda(E) + P(E).
inline bool l1_bound_holds(const CurvatureRun& run, double* lhs_out = nullptr, double* rhs_out = nullptr,
                           double rtol = 1e-9) {
    const double lhs = field_abs_mass(run.u);
    const double rhs =
        run.c_increment * lambda_measure(run.E, run.h_field) + graph_perimeter(run.E, run.alpha);
    if (lhs_out) *lhs_out = lhs;
    if (rhs_out) *rhs_out = rhs;
    return lhs <= rhs + rtol * (1.0 + rhs);
}

// --- run directory: meta.json + u.hbvfield + E_i.hbvset per level ---

inline void save_curvature_run(const CurvatureRun& run, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::ordered_json meta;
    meta["schema"] = 1;
    meta["alpha"] = run.alpha.alpha;
    meta["lambdas"] = run.lambdas;
    meta["c_increment"] = run.c_increment;
    meta["levels"] = run.nested_sets.size();
    meta["unconverged_cells"] = run.unconverged_cells;
    meta["unconverged_mass"] = run.unconverged_mass;
    double l1 = 0, bound = 0;
    l1_bound_holds(run, &l1, &bound);
    meta["u_l1"] = l1;
    meta["l1_bound"] = bound;
    meta["sweep_values"] = run.sweep_values;
    write_text_file((fs::path(dir) / "meta.json").string(), dump_json17(meta) + "\n");
    save_hbvfield(run.u, (fs::path(dir) / "u.hbvfield").string());
    for (std::size_t i = 0; i < run.nested_sets.size(); ++i)
        save_hbvset(run.nested_sets[i], (fs::path(dir) / ("E_" + std::to_string(i) + ".hbvset")).string());
}

}  // namespace hbv
