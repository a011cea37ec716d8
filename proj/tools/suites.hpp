#pragma once

#include <filesystem>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "hbv/hbv.hpp"
#include "hbv/corpus.hpp"
#include "svg.hpp"

namespace hbvtool {

struct Config {
    double alpha = 2.0;
    int dim = 2;
    double extent = 2.0;
    int cells = 128;
    std::uint64_t seed = 1;
    hbv::Estimator estimator = hbv::Estimator::crofton;
    int workers = 0;
    std::string out = "hbv_out";

    int effective_workers() const {
        if (workers > 0) return workers;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw ? static_cast<int>(hw) : 1;
    }
};

// Static index partition across threads; results merge by index, so the
// output is independent of the worker count.
template <class F>
void parallel_for_index(std::size_t n, int workers, F&& fn) {
    const int nw = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (nw == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w)
        pool.emplace_back([&, w]() {
            for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(nw)) fn(i);
        });
    for (auto& t : pool) t.join();
}

struct Check {
    std::string id;
    double value = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool pass = true;
};

struct SuiteResult {
    std::string name;
    std::vector<Check> checks;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    std::string plot_title;
    std::string plot_xlabel, plot_ylabel;
    std::vector<Series> plot;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    void bounded(const std::string& id, double value, double lo, double hi) {
        checks.push_back(Check{id, value, lo, hi, value >= lo && value <= hi});
    }
    void at_most(const std::string& id, double value, double hi) {
        checks.push_back(Check{id, value, -std::numeric_limits<double>::infinity(), hi, value <= hi});
    }
    void flag(const std::string& id, bool ok) {
        checks.push_back(Check{id, ok ? 1.0 : 0.0, 1.0, 1.0, ok});
    }
};

inline nlohmann::ordered_json config_json(const Config& cfg) {
    nlohmann::ordered_json j;
    j["alpha"] = cfg.alpha;
    j["dim"] = cfg.dim;
    j["extent"] = cfg.extent;
    j["cells"] = cfg.cells;
    j["seed"] = cfg.seed;
    j["estimator"] = hbv::estimator_name(cfg.estimator);
    return j;
}

inline void write_suite_outputs(const SuiteResult& res, const Config& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out);
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["suite"] = res.name;
    j["config"] = config_json(cfg);
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : res.checks) {
        nlohmann::ordered_json cj;
        cj["id"] = c.id;
        cj["value"] = c.value;
        if (std::isfinite(c.lo)) cj["lo"] = c.lo;
        if (std::isfinite(c.hi)) cj["hi"] = c.hi;
        cj["pass"] = c.pass;
        arr.push_back(std::move(cj));
    }
    j["checks"] = std::move(arr);
    if (!res.extra.empty()) j["detail"] = res.extra;
    j["pass"] = res.pass();
    hbv::write_text_file((fs::path(cfg.out) / (res.name + ".json")).string(), hbv::dump_json17(j) + "\n");
    if (!res.plot.empty())
        hbv::write_text_file((fs::path(cfg.out) / (res.name + ".svg")).string(),
                             line_plot(res.plot_title.empty() ? res.name : res.plot_title, res.plot,
                                       res.plot_xlabel, res.plot_ylabel));
}

// ---- suite: coarea -------------------------------------------------------

inline SuiteResult suite_coarea(const Config& cfg) {
    SuiteResult res;
    res.name = "coarea";
    res.plot_title = "coarea integral over total variation";
    res.plot_xlabel = "profile index";
    res.plot_ylabel = "ratio";
    const hbv::Grid g = hbv::build_grid(2, cfg.extent, cfg.cells);
    const auto profiles = hbv::radial_profiles();
    const std::vector<double> alphas{1.0, 2.0, 3.0};

    std::vector<double> ratios(profiles.size() * alphas.size(), 0.0);
    parallel_for_index(ratios.size(), cfg.effective_workers(), [&](std::size_t idx) {
        const std::size_t pi = idx % profiles.size();
        const std::size_t ai = idx / profiles.size();
        const hbv::AlphaParam ap(alphas[ai]);
        const hbv::ScalarField f = hbv::sample_radial(g, profiles[pi].second);
        ratios[idx] = hbv::coarea_integral(f, ap, 200, cfg.estimator) / hbv::total_variation_smooth(f, ap);
    });
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        Series s;
        s.label = "alpha=" + svg_num(alphas[ai]);
        for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
            const double r = ratios[ai * profiles.size() + pi];
            res.bounded("ratio/" + profiles[pi].first + "/alpha=" + svg_num(alphas[ai]), r, 0.95,
                        std::numbers::sqrt2 + 0.05);
            s.x.push_back(static_cast<double>(pi));
            s.y.push_back(r);
        }
        res.plot.push_back(std::move(s));
    }
    return res;
}

// ---- suite: scaling (dilation sandwich + complement growth) --------------

inline SuiteResult suite_scaling(const Config& cfg) {
    SuiteResult res;
    res.name = "scaling";
    res.plot_title = "perimeter of dilated balls";
    res.plot_xlabel = "s";
    res.plot_ylabel = "P";
    std::vector<double> svals;
    for (int i = 1; i <= 10; ++i) svals.push_back(0.1 * i);
    for (double s = 1.25; s <= 4.0 + 1e-12; s += 0.25) svals.push_back(s);

    for (int d : {2, 3})
        for (double alpha : {1.0, 2.0, 3.0}) {
            const auto rows = hbv::scaling_sweep(hbv::ball(1.0), hbv::AlphaParam(alpha), d, svals);
            bool all = true;
            for (const auto& r : rows) all = all && r.inside;
            res.flag("sandwich/d=" + std::to_string(d) + "/alpha=" + svg_num(alpha), all);
        }

    // CSV table for the configured (dim, alpha)
    const auto rows = hbv::scaling_sweep(hbv::ball(1.0), hbv::AlphaParam(cfg.alpha), cfg.dim, svals);
    std::string csv = "s,P,P_lower_bound,P_upper_bound\n";
    Series sp{"P(sB)", {}, {}}, slo{"lower", {}, {}}, shi{"upper", {}, {}};
    for (const auto& r : rows) {
        const double lo = r.s <= 1.0 ? r.low_exponent : r.high_exponent;
        const double hi = r.s <= 1.0 ? r.high_exponent : r.low_exponent;
        csv += hbv::format_double(r.s) + "," + hbv::format_double(r.perimeter) + "," +
               hbv::format_double(lo) + "," + hbv::format_double(hi) + "\n";
        sp.x.push_back(r.s);
        sp.y.push_back(r.perimeter);
        slo.x.push_back(r.s);
        slo.y.push_back(lo);
        shi.x.push_back(r.s);
        shi.y.push_back(hi);
    }
    std::filesystem::create_directories(cfg.out);
    hbv::write_text_file((std::filesystem::path(cfg.out) / "scaling.csv").string(), csv);
    res.plot = {sp, slo, shi};

    // complement growth for the divergence of the complement perimeter
    const auto growth =
        hbv::complement_growth(hbv::ball(1.0), hbv::AlphaParam(2.0), cfg.dim, {2, 4, 8, 16},
                               std::min(cfg.cells, cfg.dim == 3 ? 96 : 256), cfg.estimator);
    std::string gcsv = "R,P_total,P_jump,P_weight\n";
    for (const auto& r : growth)
        gcsv += hbv::format_double(r.extent) + "," + hbv::format_double(r.total) + "," +
                hbv::format_double(r.jump_part) + "," + hbv::format_double(r.weight_part) + "\n";
    hbv::write_text_file((std::filesystem::path(cfg.out) / "growth.csv").string(), gcsv);
    const double slope = hbv::growth_loglog_slope(growth);
    const double target = cfg.dim + 1.0;  // d + alpha/2 at alpha = 2
    res.bounded("growth_loglog_slope", slope, 0.9 * target, 1.1 * target);
    return res;
}

// ---- suite: isoperimetric (+ trace regression) ---------------------------

inline SuiteResult suite_isoperimetric(const Config& cfg) {
    SuiteResult res;
    res.name = "isoperimetric";
    res.plot_title = "|E|^{(d-1)/d} / P over the corpus";
    res.plot_xlabel = "shape index";
    res.plot_ylabel = "ratio";
    const hbv::Grid g = hbv::build_grid(2, 2.0, cfg.cells);
    const hbv::AlphaParam ap(cfg.alpha);
    const auto corpus = hbv::isoperimetric_corpus();
    const double bound = 1.0 / (std::numbers::sqrt2 * 2.0 * std::sqrt(std::numbers::pi));

    std::vector<double> ratios(corpus.size(), 0.0);
    parallel_for_index(corpus.size(), cfg.effective_workers(), [&](std::size_t i) {
        const hbv::CellSet e = hbv::rasterize(corpus[i].second, g);
        ratios[i] = std::pow(hbv::volume(e), 0.5) / hbv::perimeter_indicator(e, ap, cfg.estimator).total;
    });
    Series s{"ratio", {}, {}};
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        res.at_most("ratio/" + corpus[i].first, ratios[i], bound * 1.05);
        s.x.push_back(static_cast<double>(i));
        s.y.push_back(ratios[i]);
    }
    res.plot.push_back(std::move(s));

    // Gaussian trace regression (Lebesgue measure, p = d/(d-1))
    const hbv::Grid gt = hbv::build_grid(2, 4.0, std::max(cfg.cells, 128));
    const hbv::ScalarField f = hbv::sample_radial(gt, [](double r) { return std::exp(-r * r); });
    const auto rep = hbv::trace_check(2.0, {f}, hbv::AlphaParam(1.0));
    const double tv = hbv::variation_dual_norm(f, hbv::AlphaParam(1.0));
    res.bounded("gauss_lhs_over_tv", rep.entries[0].lhs / tv, 0.14, 0.17);
    res.at_most("gauss_trace_ratio", rep.entries[0].lhs / tv, 1.0 / (2.0 * std::sqrt(std::numbers::pi)));
    res.extra["gauss_lhs"] = rep.entries[0].lhs;
    res.extra["gauss_tv"] = tv;
    return res;
}

// ---- suite: capacity-axioms ----------------------------------------------

inline SuiteResult suite_capacity_axioms(const Config& cfg, int trials = 200) {
    SuiteResult res;
    res.name = "capacity-axioms";
    const hbv::Grid g = hbv::build_grid(2, 1.0, 16);
    const auto rep = hbv::capacity_axiom_suite(g, hbv::AlphaParam(cfg.alpha), cfg.seed, trials);
    res.at_most("violations", static_cast<double>(rep.violations), 0.0);
    res.extra["trials"] = rep.trials;
    res.extra["checks"] = rep.checks.size();
    if (rep.violations > 0) {
        auto bad = nlohmann::ordered_json::array();
        for (const auto& c : rep.checks)
            if (!c.ok) {
                nlohmann::ordered_json cj;
                cj["axiom"] = c.axiom;
                cj["instance"] = c.instance;
                cj["lhs"] = c.lhs;
                cj["rhs"] = c.rhs;
                bad.push_back(std::move(cj));
            }
        res.extra["violations"] = std::move(bad);
    }
    return res;
}

// ---- suite: isocapacity (tightness + chain inequalities) -----------------

inline SuiteResult suite_isocapacity(const Config& cfg) {
    SuiteResult res;
    res.name = "isocapacity";
    res.plot_title = "chain inequality ratios under refinement";
    res.plot_xlabel = "refinement level";
    res.plot_ylabel = "ratio";
    const hbv::AlphaParam ap(cfg.alpha);

    // relaxed vs dilated set-cut tightness on 20 seeded sets
    {
        const hbv::Grid g = hbv::build_grid(2, 1.0, 32);
        hbv::Rng rng(cfg.seed);
        std::vector<hbv::CellSet> sets;
        for (int t = 0; t < 20; ++t) sets.push_back(hbv::random_blob(g, rng, 2));
        std::vector<double> gaps(sets.size(), 0.0);
        parallel_for_index(sets.size(), cfg.effective_workers(), [&](std::size_t i) {
            const auto rel = hbv::capacity_relaxed(sets[i], ap, 400000, 1e-8);
            const auto set = hbv::capacity_set_based(hbv::dilate(sets[i]), ap);
            gaps[i] = std::abs(rel.value - set.value) / (1.0 + std::abs(set.value));
        });
        double worst = 0;
        for (double v : gaps) worst = std::max(worst, v);
        res.at_most("relaxed_setcut_gap", worst, 1e-6);
    }

    // eq8 feasibility and eq6 ratio over the shape corpus
    {
        const hbv::Grid g = hbv::build_grid(2, 2.0, std::min(cfg.cells, 96));
        for (const auto& [name, sp] : hbv::isoperimetric_corpus()) {
            const auto [e6, e8] = hbv::isocapacity_set_check(hbv::rasterize(sp, g), ap);
            res.at_most("eq8/" + name, e8.lhs, e8.rhs * (1.0 + 1e-12));
            res.flag("eq6_finite/" + name, std::isfinite(e6.ratio) && e6.ratio > 0.0);
        }
    }

    // eq5 / eq7 refinement drift for two radial profiles
    {
        Series s5{"eq5", {}, {}}, s7{"eq7", {}, {}};
        int level = 0;
        for (const bool tent : {false, true}) {
            double p5 = 0, p7 = 0;
            for (int cells : {cfg.cells / 2, cfg.cells, cfg.cells * 2}) {
                const hbv::Grid g = hbv::build_grid(2, 2.0, std::max(32, cells));
                const hbv::ScalarField f = hbv::sample_radial(g, [&](double r) {
                    return tent ? std::max(0.0, 1.0 - r) : std::exp(-2.0 * r * r);
                });
                const auto [e5, e7] = hbv::isocapacity_check(f, ap, 200);
                if (p5 > 0) {
                    res.at_most(std::string("eq5_drift/") + (tent ? "tent" : "gauss"),
                                std::abs(e5.ratio - p5) / p5, 0.05);
                    res.at_most(std::string("eq7_drift/") + (tent ? "tent" : "gauss"),
                                std::abs(e7.ratio - p7) / p7, 0.05);
                }
                p5 = e5.ratio;
                p7 = e7.ratio;
                s5.x.push_back(level);
                s5.y.push_back(e5.ratio);
                s7.x.push_back(level);
                s7.y.push_back(e7.ratio);
                ++level;
            }
        }
        res.plot = {s5, s7};
    }
    return res;
}

// ---- suite: trace ---------------------------------------------------------

inline SuiteResult suite_trace(const Config& cfg) {
    SuiteResult res;
    res.name = "trace";
    res.plot_title = "trace ratio under refinement";
    res.plot_xlabel = "refinement level";
    res.plot_ylabel = "max ratio";
    const hbv::AlphaParam ap(cfg.alpha);
    const double q = 2.0;  // d/(d-1) at d = 2
    Series sq{"p=d/(d-1)", {}, {}};
    double prev1 = -1, prevq = -1;
    int level = 0;
    for (int cells : {cfg.cells / 2, cfg.cells, cfg.cells * 2}) {
        const hbv::Grid g = hbv::build_grid(2, 2.0, std::max(32, cells));
        std::vector<hbv::ScalarField> corpus;
        for (const auto& [name, profile] : hbv::radial_profiles())
            corpus.push_back(hbv::sample_radial(g, profile));
        const auto rep1 = hbv::trace_check(1.0, corpus, ap);
        const auto repq = hbv::trace_check(q, corpus, ap);
        res.at_most("p1_max_ratio/level" + std::to_string(level), rep1.max_ratio, 1.0 + 1e-12);
        if (prevq >= 0) {
            res.at_most("pq_ratio_growth/level" + std::to_string(level), repq.max_ratio,
                        prevq * 1.05);
            res.at_most("p1_ratio_growth/level" + std::to_string(level), rep1.max_ratio,
                        prev1 * 1.05 + 1e-12);
        }
        prev1 = rep1.max_ratio;
        prevq = repq.max_ratio;
        sq.x.push_back(level);
        sq.y.push_back(repq.max_ratio);
        ++level;
    }
    res.plot = {sq};
    return res;
}

// ---- suite: curvature ------------------------------------------------------

inline SuiteResult suite_curvature(const Config& cfg, bool write_runs = true) {
    SuiteResult res;
    res.name = "curvature";
    res.plot_title = "absorbed fraction along the lambda sweep";
    res.plot_xlabel = "lambda / c";
    res.plot_ylabel = "|E_i| / |E|";
    const double h = 2.0 * cfg.extent / cfg.cells;
    for (const auto& input : hbv::curvature_corpus()) {
        const int cells = std::max(16, static_cast<int>(std::lround(2.0 * input.extent / h)));
        const hbv::Grid g = hbv::build_grid(2, input.extent, cells);
        const hbv::AlphaParam ap(input.alpha);
        const hbv::CellSet e = hbv::rasterize(input.shape, g);
        const hbv::ScalarField h1(g, 1.0);
        hbv::CurvatureRun run = hbv::lambda_sweep(e, h1, hbv::default_lambda_schedule(e, h1, ap), ap);
        hbv::build_curvature(run);

        bool nested = true;
        for (std::size_t i = 1; i < run.nested_sets.size(); ++i)
            nested = nested && hbv::is_subset(run.nested_sets[i - 1], run.nested_sets[i]);
        res.flag("nesting/" + input.name, nested);
        res.flag("telescoping/" + input.name, hbv::telescoping_bound_holds(run));
        double l1 = 0, bound = 0;
        res.flag("l1_bound/" + input.name, hbv::l1_bound_holds(run, &l1, &bound));
        const auto rep = hbv::verify_minimality(run, 100, cfg.seed);
        res.at_most("minimality_margin/" + input.name, rep.worst_margin,
                    1e-9 * (1.0 + std::abs(rep.value_at_e)));
        res.at_most("unconverged_cells/" + input.name, static_cast<double>(run.unconverged_cells), 0.0);

        Series s{input.name, {}, {}};
        const double denom = static_cast<double>(e.count());
        for (std::size_t i = 0; i < run.nested_sets.size(); ++i) {
            s.x.push_back(static_cast<double>(i));
            s.y.push_back(denom > 0 ? run.nested_sets[i].count() / denom : 0.0);
        }
        res.plot.push_back(std::move(s));
        if (write_runs)
            hbv::save_curvature_run(run, (std::filesystem::path(cfg.out) / ("run_" + input.name)).string());
    }
    return res;
}

// ---- suite: selfcheck (exhaustive tiny-grid oracles) ----------------------

inline SuiteResult suite_selfcheck(const Config& cfg) {
    SuiteResult res;
    res.name = "selfcheck";
    hbv::Rng rng(cfg.seed);

    // min-cut against exhaustive enumeration
    {
        int bad = 0;
        for (int t = 0; t < 200; ++t) {
            const hbv::Grid g = hbv::build_grid(2, 1.0, 3);
            const hbv::ScalarField unary = hbv::random_unary(g, rng, -2.0, 2.0);
            const hbv::CellSet none(g);
            const hbv::CutGraph cg = hbv::build_energy(unary, rng.uniform(0.0, 2.0), none, none);
            const hbv::CutSolution sol = hbv::min_cut(cg);
            double best = 1e300;
            for (unsigned mask = 0; mask < 512; ++mask) {
                hbv::CellSet s(g);
                for (int i = 0; i < 9; ++i) s.m[i] = (mask >> i) & 1;
                best = std::min(best, cg.energy(s));
            }
            if (std::abs(best - sol.value) > 1e-9 * (1.0 + std::abs(best))) ++bad;
        }
        res.at_most("mincut_vs_enumeration", bad, 0.0);
    }

    // set capacity against exhaustive supersets
    {
        int bad = 0;
        const hbv::Grid g = hbv::build_grid(2, 1.0, 3);
        for (int t = 0; t < 40; ++t) {
            const hbv::AlphaParam ap(1.0 + (t % 3));
            const hbv::CellSet k = hbv::random_mask(g, rng, 0.3);
            const double cap = hbv::capacity_set_based(k, ap).value;
            const hbv::CutGraph cg =
                hbv::build_energy(hbv::capacity_unary(g, ap), std::numbers::sqrt2, k, hbv::CellSet(g));
            double best = 1e300;
            for (unsigned mask = 0; mask < 512; ++mask) {
                hbv::CellSet s(g);
                bool ok = true;
                for (int i = 0; i < 9; ++i) {
                    s.m[i] = (mask >> i) & 1;
                    if (k.m[i] && !s.m[i]) ok = false;
                }
                if (ok) best = std::min(best, cg.energy(s));
            }
            if (std::abs(best - cap) > 1e-9 * (1.0 + std::abs(best))) ++bad;
        }
        res.at_most("capacity_vs_enumeration", bad, 0.0);
    }

    // discrete integration by parts
    {
        const hbv::Grid g = hbv::build_grid(2, 1.0, 12);
        const hbv::AlphaParam ap(cfg.alpha);
        const hbv::ScalarField f = hbv::random_smooth_field(g, rng);
        hbv::VectorTestField phi(g, 4);
        for (auto& v : phi.comps) v = rng.uniform(-1, 1);
        const hbv::HermiteGradient grad = hbv::hermite_gradient(f, ap);
        double a = 0;
        for (std::size_t i = 0; i < grad.comps.size(); ++i) a += grad.comps[i] * phi.comps[i];
        const hbv::ScalarField div = hbv::hermite_divergence(phi, ap);
        double b = 0;
        for (std::size_t i = 0; i < f.size(); ++i) b += f.v[i] * div.v[i];
        res.at_most("adjointness_residual", std::abs(a + b) / (1.0 + std::abs(a)), 1e-12);
    }

    const auto st = hbv::graphcut_stats();
    res.at_most("flow_cut_certificate", st.worst_certificate_gap, 1e-9);
    res.extra["solves"] = st.solves;
    return res;
}

inline std::vector<std::string> suite_names() {
    return {"coarea",      "scaling", "isoperimetric", "capacity-axioms",
            "isocapacity", "trace",   "curvature",     "selfcheck"};
}

inline SuiteResult run_suite(const std::string& name, const Config& cfg) {
    if (name == "coarea") return suite_coarea(cfg);
    if (name == "scaling") return suite_scaling(cfg);
    if (name == "isoperimetric") return suite_isoperimetric(cfg);
    if (name == "capacity-axioms") return suite_capacity_axioms(cfg);
    if (name == "isocapacity") return suite_isocapacity(cfg);
    if (name == "trace") return suite_trace(cfg);
    if (name == "curvature") return suite_curvature(cfg);
    if (name == "selfcheck") return suite_selfcheck(cfg);
    throw hbv::Error("unknown suite '" + name + "'");
}

}  // namespace hbvtool
