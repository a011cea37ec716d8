#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "hbv/mollify.hpp"
#include "hbv/perimeter.hpp"
#include "hbv/random_sets.hpp"
#include "hbv/shape.hpp"
#include "hbv/variation.hpp"
#include "oracles.hpp"

using namespace hbv;

namespace {

ScalarField radial_field(const Grid& g, double (*f)(double)) {
    ScalarField out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = f(norm(g.cell_center(i), g.dim));
    return out;
}

double gauss(double r) { return std::exp(-r * r); }

}  // namespace

TEST_CASE("hermite gradient on linear 1-D data, alpha = 1") {
    Grid g = build_grid(1, 2.0, 16);
    AlphaParam a1(1.0);
    ScalarField f(g);
    const double slope = 0.75;
    for (std::size_t i = 0; i < f.size(); ++i) f.v[i] = slope * g.cell_center(i)[0] + 0.2;
    HermiteGradient grad = hermite_gradient(f, a1);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK_THAT(grad.at(i, 0), Catch::Matchers::WithinRel(slope, 1e-12));
        CHECK_THAT(grad.at(i, 1), Catch::Matchers::WithinRel(slope, 1e-12));
    }
}

TEST_CASE("hermite gradient of zero is zero") {
    Grid g = build_grid(2, 1.0, 8);
    HermiteGradient grad = hermite_gradient(ScalarField(g), AlphaParam(3.0));
    for (double v : grad.comps) CHECK(v == 0.0);
}

TEST_CASE("hermite gradient zero-order term and component order") {
    // grid with a cell centered exactly at (1, 0)
    Grid g = build_grid(2, 2.5, 5);
    AlphaParam a2(2.0);
    ScalarField one(g, 1.0);
    HermiteGradient grad = hermite_gradient(one, a2);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const Vec3 x = g.cell_center(i);
        if (x[0] == 1.0 && x[1] == 0.0) idx = i;
    }
    // components (A-_2, A-_1, A+_1, A+_2) with w = (1, 0)
    CHECK_THAT(grad.at(idx, 0), Catch::Matchers::WithinAbs(0.0, 1e-14));
    CHECK_THAT(grad.at(idx, 1), Catch::Matchers::WithinAbs(-1.0, 1e-14));
    CHECK_THAT(grad.at(idx, 2), Catch::Matchers::WithinAbs(1.0, 1e-14));
    CHECK_THAT(grad.at(idx, 3), Catch::Matchers::WithinAbs(0.0, 1e-14));
}

TEST_CASE("mirror components differ by twice the zero-order term") {
    Grid g = build_grid(2, 1.3, 24);
    AlphaParam a(2.6);
    Rng rng(21);
    ScalarField f = random_smooth_field(g, rng);
    HermiteGradient grad = hermite_gradient(f, a);
    const int d = g.dim;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const Vec3 w = weight_vector(g.cell_center(i), d, a);
        for (int j = 0; j < d; ++j) {
            const int axis = component_axis(j, d);
            const double diff = grad.at(i, 2 * d - 1 - j) - grad.at(i, j);
            CHECK_THAT(diff, Catch::Matchers::WithinAbs(2.0 * w[axis] * f.v[i], 1e-12));
        }
    }
}

TEST_CASE("pointwise magnitude matches the algebraic identity") {
    Grid g = build_grid(2, 1.1, 20);
    AlphaParam a(2.0), a1(1.0);
    Rng rng(22);
    ScalarField f = random_smooth_field(g, rng);
    ScalarField mag = pointwise_magnitude(hermite_gradient(f, a));
    ScalarField mag1 = pointwise_magnitude(hermite_gradient(f, a1));
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const double grad2 = mag1.v[i] * mag1.v[i] / 2.0;  // |grad f|^2
        const double r = norm(g.cell_center(i), 2);
        const double expect = std::sqrt(2.0 * grad2 + 2.0 * (a.alpha - 1.0) * std::pow(r, a.alpha) * f.v[i] * f.v[i]);
        CHECK_THAT(mag.v[i], Catch::Matchers::WithinRel(expect, 1e-12));
    }
}

TEST_CASE("constant field magnitude, alpha = 2") {
    Grid g = build_grid(2, 1.0, 16);
    AlphaParam a2(2.0);
    ScalarField c(g, 0.5);
    ScalarField mag = pointwise_magnitude(hermite_gradient(c, a2));
    // interior cells: sqrt(2) |x| |c|
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const auto k = g.coords(i);
        bool interior = true;
        for (int ax = 0; ax < 2; ++ax)
            if (k[ax] == 0 || k[ax] == g.shape[ax] - 1) interior = false;
        if (!interior) continue;
        const double expect = std::numbers::sqrt2 * norm(g.cell_center(i), 2) * 0.5;
        CHECK_THAT(mag.v[i], Catch::Matchers::WithinRel(expect, 1e-12));
    }
}

TEST_CASE("discrete integration by parts is exact") {
    Grid g = build_grid(3, 0.8, 10);
    AlphaParam a(2.3);
    Rng rng(23);
    ScalarField f = random_smooth_field(g, rng);
    VectorTestField phi(g, 6);
    for (auto& v : phi.comps) v = rng.uniform(-1, 1);
    HermiteGradient grad = hermite_gradient(f, a);
    double inner_grad = 0;
    for (std::size_t i = 0; i < grad.comps.size(); ++i) inner_grad += grad.comps[i] * phi.comps[i];
    ScalarField div = hermite_divergence(phi, a);
    double inner_div = 0;
    for (std::size_t i = 0; i < f.size(); ++i) inner_div += f.v[i] * div.v[i];
    CHECK(std::abs(inner_grad + inner_div) <= 1e-12 * (1.0 + std::abs(inner_grad)));
}

TEST_CASE("total variation of smooth fields against the radial oracle") {
    Grid g = build_grid(2, 4.0, 128);  // h = 1/16... use 1/32: cells = 256
    Grid g32 = build_grid(2, 4.0, 256);
    ScalarField f = radial_field(g32, gauss);

    SECTION("alpha = 1: closed form sqrt2 pi^{3/2}") {
        const double expect = std::numbers::sqrt2 * std::pow(std::numbers::pi, 1.5);
        const double tv = total_variation_smooth(f, AlphaParam(1.0));
        CHECK(std::abs(tv - expect) <= 0.01 * expect);
    }
    SECTION("alpha = 2 and 3: radial quadrature oracle") {
        for (double alpha : {2.0, 3.0}) {
            const double expect = oracle::radial_tv([](double r) { return std::exp(-r * r); },
                                                    [](double r) { return -2.0 * r * std::exp(-r * r); },
                                                    alpha, 2, 8.0);
            const double tv = total_variation_smooth(f, AlphaParam(alpha));
            CHECK(std::abs(tv - expect) <= 0.01 * expect);
        }
    }
    SECTION("zero field") { CHECK(total_variation_smooth(ScalarField(g), AlphaParam(2.0)) == 0.0); }
}

TEST_CASE("variation homogeneity") {
    Grid g = build_grid(2, 1.0, 24);
    AlphaParam a(2.2);
    Rng rng(31);
    ScalarField f = random_smooth_field(g, rng);
    ScalarField cf = f;
    for (auto& v : cf.v) v *= -3.25;
    CHECK_THAT(variation_dual_norm(cf, a),
               Catch::Matchers::WithinRel(3.25 * variation_dual_norm(f, a), 1e-13));
}

TEST_CASE("variation_sup converges to the dual norm") {
    SECTION("zero field in one iteration") {
        Grid g = build_grid(2, 1.0, 8);
        auto rep = variation_sup(ScalarField(g), AlphaParam(2.0), 50, 1e-12);
        CHECK(rep.sup_value == 0.0);
        CHECK(rep.iterations == 1);
        CHECK(rep.converged);
    }
    SECTION("smooth gaussian reaches [0.99, 1.0] of the quadrature value") {
        Grid g = build_grid(2, 4.0, 128);  // h = 1/16
        ScalarField f = radial_field(g, gauss);
        auto rep = variation_sup(f, AlphaParam(2.0), 2000, 1e-8);
        CHECK(rep.sup_value / rep.quadrature_value >= 0.99);
        CHECK(rep.sup_value <= rep.quadrature_value * (1.0 + 1e-6));
        CHECK(rep.dual_gap_estimate >= 0.0);
    }
    SECTION("half-plane indicator: sqrt2 times the interface length") {
        Grid g = build_grid(2, 1.0, 32);
        ScalarField f(g);
        for (std::size_t i = 0; i < f.size(); ++i) f.v[i] = g.cell_center(i)[0] < 0 ? 1.0 : 0.0;
        auto rep = variation_sup(f, AlphaParam(1.0), 5000, 1e-10);
        CHECK_THAT(rep.sup_value, Catch::Matchers::WithinRel(std::numbers::sqrt2 * 2.0, 1e-9));
    }
}

TEST_CASE("max-min property") {
    Grid g = build_grid(2, 1.0, 24);
    SECTION("equality at u = v") {
        Rng rng(41);
        ScalarField u = random_smooth_field(g, rng);
        auto r = minmax_pair(u, u, AlphaParam(2.0));
        CHECK_THAT(r.tv_max + r.tv_min, Catch::Matchers::WithinRel(r.tv_u + r.tv_v, 1e-13));
    }
    SECTION("indicators of overlapping balls") {
        AlphaParam a(2.0);
        ScalarField u = indicator(rasterize(ball({-0.2, 0, 0}, 0.5), g));
        ScalarField v = indicator(rasterize(ball({0.25, 0.1, 0}, 0.45), g));
        auto r = minmax_pair(u, v, a);
        CHECK(r.tv_max + r.tv_min <= r.tv_u + r.tv_v + 1e-9);
    }
    SECTION("100 seeded random smooth pairs") {
        // the continuum inequality swaps gradients a.e.; the central stencil
        // mixes cells across the u = v interface, so the discrete excess is
        // an O(h) interface term rather than exactly zero
        Rng rng(42);
        for (int t = 0; t < 100; ++t) {
            AlphaParam a(1.0 + (t % 3));
            ScalarField u = random_smooth_field(g, rng);
            ScalarField v = random_smooth_field(g, rng);
            auto r = minmax_pair(u, v, a);
            CHECK(r.tv_max + r.tv_min <= (r.tv_u + r.tv_v) * (1.0 + 1e-3));
        }
    }
    SECTION("100 seeded indicator pairs") {
        Rng rng(43);
        for (int t = 0; t < 100; ++t) {
            AlphaParam a(1.0 + (t % 3));
            ScalarField u = indicator(random_blob(g, rng));
            ScalarField v = indicator(random_blob(g, rng));
            auto r = minmax_pair(u, v, a);
            CHECK(r.tv_max + r.tv_min <= r.tv_u + r.tv_v + 1e-9);
        }
    }
}

TEST_CASE("pointwise sandwich between classical and weighted gradients") {
    Grid g = build_grid(2, 1.2, 32);
    AlphaParam a(3.0), a1(1.0);
    Rng rng(51);
    ScalarField f = random_smooth_field(g, rng);
    HermiteGradient gh = hermite_gradient(f, a);
    HermiteGradient ge = hermite_gradient(f, a1);
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const double grad_f = ge.cell_norm(i) / std::numbers::sqrt2;
        const double w = a.kappa * std::pow(norm(g.cell_center(i), 2), a.alpha / 2.0);
        const double mh = gh.cell_norm(i);
        CHECK(mh >= grad_f - 1e-12);
        CHECK(mh <= std::numbers::sqrt2 * (grad_f + w * std::abs(f.v[i])) + 1e-12);
    }
}

TEST_CASE("lower semicontinuity proxy under mollification") {
    Grid g = build_grid(2, 4.0, 128);
    ScalarField f = radial_field(g, gauss);
    for (double alpha : {1.0, 2.0}) {
        AlphaParam a(alpha);
        const double tv = total_variation_smooth(f, a);
        double last = 0;
        for (double m : {8.0, 4.0, 2.0, 1.0}) {
            last = total_variation_smooth(mollify(f, m * g.spacing), a);
            CHECK(last <= tv * (1.0 + 1e-12));  // smoothing does not create variation
        }
        CHECK(tv <= last + 1e-6 * (1.0 + tv));  // the tail recovers the variation
    }
}

TEST_CASE("coarea integral examples") {
    Grid g = build_grid(2, 2.0, 128);
    AlphaParam a2(2.0);
    SECTION("constant field integrates to zero") {
        CHECK(coarea_integral(ScalarField(g, 3.0), a2, 64) == 0.0);
    }
    SECTION("indicator of a ball reproduces its perimeter") {
        CellSet e = rasterize(ball(1.0), g);
        const double per = perimeter_indicator(e, a2, Estimator::crofton).total;
        CHECK_THAT(coarea_integral(indicator(e), a2, 64), Catch::Matchers::WithinRel(per, 1e-12));
    }
    SECTION("smooth radial fields stay inside the [1, sqrt2] bracket") {
        Grid gf = build_grid(2, 2.0, 256);  // h = 1/64
        ScalarField f(gf);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double r = norm(gf.cell_center(i), 2);
            f.v[i] = std::exp(-2.0 * r * r);
        }
        for (double alpha : {1.0, 2.0, 3.0}) {
            const double ratio = coarea_integral(f, AlphaParam(alpha), 200) /
                                 total_variation_smooth(f, AlphaParam(alpha));
            CHECK(ratio >= 0.95);
            CHECK(ratio <= std::numbers::sqrt2 + 0.05);
        }
    }
    SECTION("level count precondition") {
        CHECK_THROWS_AS(coarea_integral(ScalarField(g), a2, 8), Error);
    }
}
