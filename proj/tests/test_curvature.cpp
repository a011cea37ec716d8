#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <numbers>

#include "hbv/curvature.hpp"
#include "hbv/io.hpp"
#include "hbv/random_sets.hpp"
#include "hbv/shape.hpp"

using namespace hbv;

namespace {

CellSet toy_disk(const Grid& g, double r = 0.8) {
    CellSet e(g);
    for (std::size_t i = 0; i < e.size(); ++i) e.m[i] = norm(g.cell_center(i), g.dim) < r;
    return e;
}

// generic multipliers of the natural scale c = P/Lambda, chosen off the
// breakpoints so enumeration comparisons are tie-free
std::vector<double> generic_schedule(const CellSet& e, const ScalarField& h, const AlphaParam& a) {
    const double c = graph_perimeter(e, a) / lambda_measure(e, h);
    return {0.0, 0.37 * c, 0.81 * c, 1.27 * c, 1.9 * c, 3.1 * c, 5.3 * c, 9.1 * c};
}

}  // namespace

TEST_CASE("lambda zero yields the empty minimizer") {
    Grid g = build_grid(2, 1.0, 16);
    AlphaParam a(2.0);
    CellSet e = toy_disk(g, 0.6);
    ScalarField h1(g, 1.0);
    CurvatureRun run = lambda_sweep(e, h1, {0.0}, a);
    CHECK(run.nested_sets[0].count() == 0);
}

TEST_CASE("large lambda absorbs the whole set") {
    Grid g = build_grid(2, 1.0, 16);
    AlphaParam a(2.0);
    CellSet e = toy_disk(g, 0.6);
    ScalarField h1(g, 1.0);
    const double big = 10.0 * graph_perimeter(e, a) / (1.0 * g.cell_volume());  // 10 P / (min h * h^d)
    CurvatureRun run = lambda_sweep(e, h1, {0.0, big}, a);
    CHECK(run.nested_sets[1].m == e.m);
}

TEST_CASE("sweep refusals") {
    Grid g = build_grid(2, 1.0, 8);
    AlphaParam a(2.0);
    CellSet e = toy_disk(g, 0.6);
    ScalarField h1(g, 1.0);
    SECTION("h must be positive on E") {
        ScalarField hbad = h1;
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e.m[i]) {
                hbad.v[i] = 0.0;
                break;
            }
        CHECK_THROWS_AS(lambda_sweep(e, hbad, {0.0, 1.0}, a), Error);
    }
    SECTION("schedule must start at zero and ascend") {
        CHECK_THROWS_AS(lambda_sweep(e, h1, {0.5, 1.0}, a), Error);
        CHECK_THROWS_AS(lambda_sweep(e, h1, {0.0, 1.0, 0.5}, a), Error);
    }
}

TEST_CASE("toy sweeps match exhaustive enumeration") {
    Rng rng(5150);
    int checked = 0;
    for (int inst = 0; inst < 6; ++inst) {
        Grid g = build_grid(2, 1.0, 4);
        AlphaParam a(inst % 2 ? 2.0 : 3.0);
        CellSet e = toy_disk(g);
        ScalarField hf(g);
        for (std::size_t i = 0; i < hf.size(); ++i) hf.v[i] = rng.uniform(0.5, 2.0);
        const auto lambdas = generic_schedule(e, hf, a);
        CurvatureRun run = lambda_sweep(e, hf, lambdas, a);
        std::vector<std::size_t> ecells;
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e.m[i]) ecells.push_back(i);
        REQUIRE(ecells.size() <= 16);
        for (std::size_t li = 0; li < lambdas.size(); ++li) {
            double best = 1e300;
            CellSet lowest(g);
            for (unsigned mask = 0; mask < (1u << ecells.size()); ++mask) {
                CellSet f(g);
                for (std::size_t j = 0; j < ecells.size(); ++j) f.m[ecells[j]] = (mask >> j) & 1;
                const double val =
                    graph_perimeter(f, a) + lambdas[li] * lambda_measure(set_difference(e, f), hf);
                if (val < best - 1e-11) {
                    best = val;
                    lowest = f;
                } else if (val <= best + 1e-11) {
                    lowest = set_intersection(lowest, f);
                }
            }
            CHECK(run.nested_sets[li].m == lowest.m);
            ++checked;
        }
    }
    CHECK(checked >= 48);
}

TEST_CASE("curvature assembly") {
    Grid g = build_grid(2, 1.0, 16);
    AlphaParam a(2.0);
    CellSet e = toy_disk(g, 0.6);
    ScalarField h1(g, 1.0);
    SECTION("single lambda absorbing E gives u = -lambda h on E") {
        const double big = 20.0 * graph_perimeter(e, a) / volume(e);
        CurvatureRun run = lambda_sweep(e, h1, {0.0, big}, a);
        build_curvature(run);
        for (std::size_t i = 0; i < e.size(); ++i)
            CHECK(run.u.v[i] == (e.m[i] ? -big * h1.v[i] : 0.0));
        CHECK(run.unconverged_cells == 0);
    }
    SECTION("stagnant levels place no mass") {
        const double big = 20.0 * graph_perimeter(e, a) / volume(e);
        CurvatureRun run = lambda_sweep(e, h1, {0.0, big, 2.0 * big}, a);
        build_curvature(run);
        // second level already absorbed everything: no cell carries -2 big
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e.m[i]) CHECK(run.u.v[i] == -big * h1.v[i]);
    }
    SECTION("sign and support") {
        CurvatureRun run = lambda_sweep(e, h1, default_lambda_schedule(e, h1, a), a);
        build_curvature(run);
        for (std::size_t i = 0; i < e.size(); ++i) {
            CHECK(run.u.v[i] <= 0.0);
            if (!e.m[i]) CHECK(run.u.v[i] == 0.0);
        }
    }
}

TEST_CASE("massari functional values") {
    Grid g = build_grid(2, 1.0, 16);
    AlphaParam a(2.0);
    CellSet e = toy_disk(g, 0.6);
    SECTION("empty set") {
        CHECK(massari_value(CellSet(g), ScalarField(g), a).total == 0.0);
    }
    SECTION("zero curvature leaves only the perimeter") {
        auto m = massari_value(e, ScalarField(g), a);
        CHECK(m.integral_term == 0.0);
        CHECK_THAT(m.total, Catch::Matchers::WithinRel(graph_perimeter(e, a), 1e-12));
    }
    SECTION("at E the integral term is minus the L1 mass of u") {
        ScalarField h1(g, 1.0);
        CurvatureRun run = lambda_sweep(e, h1, default_lambda_schedule(e, h1, a), a);
        build_curvature(run);
        auto m = massari_value(e, run.u, a);
        CHECK_THAT(m.integral_term, Catch::Matchers::WithinAbs(-field_abs_mass(run.u), 1e-12));
    }
}

TEST_CASE("disk construction satisfies every bound") {
    Grid g = build_grid(2, 2.0, 128);
    AlphaParam a(2.0);
    CellSet e = rasterize(ball(1.0), g);
    ScalarField h1(g, 1.0);
    CurvatureRun run = lambda_sweep(e, h1, default_lambda_schedule(e, h1, a), a);
    build_curvature(run);

    SECTION("nesting is exact") {
        for (std::size_t i = 1; i < run.nested_sets.size(); ++i)
            CHECK(is_subset(run.nested_sets[i - 1], run.nested_sets[i]));
    }
    SECTION("telescoping and L1 bounds") {
        CHECK(telescoping_bound_holds(run));
        double lhs, rhs;
        CHECK(l1_bound_holds(run, &lhs, &rhs));
        CHECK(lhs <= rhs + 1e-9 * (1.0 + rhs));
    }
    SECTION("global minimality by exact cut") {
        auto rep = verify_minimality(run, 100, 99);
        CHECK(rep.ok);
        CHECK(rep.worst_margin <= 1e-9 * (1.0 + std::abs(rep.value_at_e)));
    }
    SECTION("per-lambda optimality against single-cell flips") {
        Rng rng(314);
        for (std::size_t li = 1; li < run.lambdas.size(); li += 16) {
            const CellSet& s = run.nested_sets[li];
            const double base =
                graph_perimeter(s, a) + run.lambdas[li] * lambda_measure(set_difference(e, s), h1);
            for (int t = 0; t < 25; ++t) {
                CellSet flip = s;
                const std::size_t c = static_cast<std::size_t>(rng.uniform_int(0, (long)e.size() - 1));
                if (!e.m[c]) continue;
                flip.m[c] = 1 - flip.m[c];
                const double val =
                    graph_perimeter(flip, a) + run.lambdas[li] * lambda_measure(set_difference(e, flip), h1);
                CHECK(base <= val + 1e-9 * (1.0 + std::abs(val)));
            }
        }
    }
}

TEST_CASE("run directory serialization") {
    Grid g = build_grid(2, 1.0, 12);
    AlphaParam a(2.0);
    CellSet e = toy_disk(g, 0.6);
    ScalarField h1(g, 1.0);
    CurvatureRun run = lambda_sweep(e, h1, default_lambda_schedule(e, h1, a, 8), a);
    build_curvature(run);

    const std::string dir = (std::filesystem::temp_directory_path() / "hbv_run_test").string();
    std::filesystem::remove_all(dir);
    save_curvature_run(run, dir);
    CHECK(std::filesystem::exists(dir + "/meta.json"));
    CHECK(std::filesystem::exists(dir + "/u.hbvfield"));
    CHECK(std::filesystem::exists(dir + "/E_0.hbvset"));
    CHECK(std::filesystem::exists(dir + "/E_8.hbvset"));

    ScalarField u = load_hbvfield(dir + "/u.hbvfield");
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(u.v[i] == run.u.v[i]);
    CellSet e8 = load_hbvset(dir + "/E_8.hbvset");
    CHECK(e8.m == run.nested_sets[8].m);
    const auto meta = nlohmann::json::parse(read_text_file(dir + "/meta.json"));
    CHECK(meta.at("schema").get<int>() == 1);
    CHECK(meta.at("levels").get<std::size_t>() == run.nested_sets.size());
    std::filesystem::remove_all(dir);
}
