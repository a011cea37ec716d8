// Command-line driver: perimeter measurements, verification suites, and
// curvature construction runs.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hbv/hbv.hpp"
#include "hbv/corpus.hpp"
#include "suites.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_perimeter(const hbvtool::Config& cfg, const std::string& shapes_path) {
    std::vector<std::pair<std::string, hbv::ShapePtr>> shapes;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(hbv::read_text_file(shapes_path));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: cannot read shape file '%s': %s\n", shapes_path.c_str(), e.what());
        return 2;
    }
    try {
        if (doc.is_array()) {
            int idx = 0;
            for (const auto& j : doc) shapes.emplace_back("shape_" + std::to_string(idx++), hbv::shape_from_json(j));
        } else {
            shapes.emplace_back("shape_0", hbv::shape_from_json(doc));
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: malformed shape document: %s\n", e.what());
        return 2;
    }

    const hbv::Grid grid = hbv::build_grid(cfg.dim, cfg.extent, cfg.cells);
    const hbv::AlphaParam alpha(cfg.alpha);

    std::string csv = "shape,estimator,total,jump_part,weight_part\n";
    auto rows = nlohmann::ordered_json::array();
    for (const auto& [name, shape] : shapes) {
        const hbv::CellSet raster = hbv::rasterize(shape, grid);
        std::vector<std::pair<std::string, hbv::PerimeterValue>> values;
        values.emplace_back("faces", hbv::perimeter_indicator(raster, alpha, hbv::Estimator::faces));
        values.emplace_back("crofton", hbv::perimeter_indicator(raster, alpha, hbv::Estimator::crofton));
        try {
            const auto analytic = hbv::perimeter_shape(shape, alpha, cfg.dim, &grid);
            values.emplace_back(hbv::estimator_name(analytic.estimator), analytic);
        } catch (const hbv::Error&) {
            // no closed form and no usable raster path; skip the analytic row
        }
        for (const auto& [est, p] : values) {
            csv += name + "," + est + "," + hbv::format_double(p.total) + "," +
                   hbv::format_double(p.jump_part) + "," + hbv::format_double(p.weight_part) + "\n";
            nlohmann::ordered_json r;
            r["shape"] = name;
            r["estimator"] = est;
            r["total"] = p.total;
            r["jump_part"] = p.jump_part;
            r["weight_part"] = p.weight_part;
            rows.push_back(std::move(r));
        }
    }
    fs::create_directories(cfg.out);
    hbv::write_text_file((fs::path(cfg.out) / "perimeter.csv").string(), csv);
    nlohmann::ordered_json rep;
    rep["schema"] = 1;
    rep["config"] = hbvtool::config_json(cfg);
    rep["rows"] = std::move(rows);
    hbv::write_text_file((fs::path(cfg.out) / "perimeter.json").string(), hbv::dump_json17(rep) + "\n");
    std::fputs(csv.c_str(), stdout);
    return 0;
}

int cmd_suite(const hbvtool::Config& cfg, const std::string& name) {
    const auto names = hbvtool::suite_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        std::fprintf(stderr, "error: unknown suite '%s'; available:", name.c_str());
        for (const auto& n : names) std::fprintf(stderr, " %s", n.c_str());
        std::fprintf(stderr, "\n");
        return 2;
    }
    const hbvtool::SuiteResult res = hbvtool::run_suite(name, cfg);
    hbvtool::write_suite_outputs(res, cfg);
    int failed = 0;
    for (const auto& c : res.checks) {
        if (!c.pass) {
            ++failed;
            std::printf("FAIL %s: value=%s\n", c.id.c_str(), hbv::format_double(c.value).c_str());
        }
    }
    std::printf("suite %s: %zu checks, %d failed -> %s\n", name.c_str(), res.checks.size(), failed,
                failed == 0 ? "PASS" : "FAIL");
    return failed == 0 ? 0 : 1;
}

int cmd_curvature(const hbvtool::Config& cfg, const std::string& input, int lambda_steps,
                  const std::string& h_field_path) {
    if (!fs::exists(input)) {
        std::fprintf(stderr, "error: input '%s' does not exist\n", input.c_str());
        return 2;
    }
    hbv::CellSet e;
    if (input.size() > 7 && input.substr(input.size() - 7) == ".hbvset") {
        e = hbv::load_hbvset(input);
    } else {
        const auto shape = hbv::shape_from_json(nlohmann::json::parse(hbv::read_text_file(input)));
        e = hbv::rasterize(shape, hbv::build_grid(cfg.dim, cfg.extent, cfg.cells));
    }
    if (e.count() == 0) {
        std::fprintf(stderr, "error: input set is empty\n");
        return 2;
    }
    const hbv::AlphaParam alpha(cfg.alpha);
    hbv::ScalarField h_field(e.grid, 1.0);
    if (!h_field_path.empty()) {
        h_field = hbv::load_hbvfield(h_field_path);
        if (!h_field.grid.same_layout(e.grid)) {
            std::fprintf(stderr, "error: h-field grid does not match the input set\n");
            return 2;
        }
    }
    hbv::CurvatureRun run =
        hbv::lambda_sweep(e, h_field, hbv::default_lambda_schedule(e, h_field, alpha, lambda_steps), alpha);
    hbv::build_curvature(run);
    const auto rep = hbv::verify_minimality(run, 50, cfg.seed);
    double l1 = 0, bound = 0;
    hbv::l1_bound_holds(run, &l1, &bound);
    const std::string dir = (fs::path(cfg.out) / "curvature_run").string();
    hbv::save_curvature_run(run, dir);
    std::printf("curvature run: levels=%zu unconverged_cells=%zu minimality_margin=%s l1_slack=%s -> %s\n",
                run.nested_sets.size(), run.unconverged_cells,
                hbv::format_double(rep.worst_margin).c_str(), hbv::format_double(bound - l1).c_str(),
                dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hbv: weighted variation, perimeter, capacity and prescribed curvature on grids"};
    app.require_subcommand(1);

    hbvtool::Config cfg;
    std::string estimator = "crofton";
    app.add_option("--alpha", cfg.alpha, "coupling constant alpha >= 1")->capture_default_str();
    app.add_option("--dim", cfg.dim, "grid dimension (1..3)")->capture_default_str();
    app.add_option("--extent", cfg.extent, "half-width of the symmetric box")->capture_default_str();
    app.add_option("--cells", cfg.cells, "cells per axis")->capture_default_str();
    app.add_option("--seed", cfg.seed, "seed for all randomized sweeps")->capture_default_str();
    app.add_option("--estimator", estimator, "classical perimeter estimator: faces|crofton")
        ->capture_default_str();
    app.add_option("--workers", cfg.workers, "worker threads (0 = hardware)")->capture_default_str();
    app.add_option("--out", cfg.out, "output directory")->capture_default_str();

    std::string shapes_path, curv_input, h_field_path;
    int lambda_steps = 64;
    std::string suite_name;

    auto* perim = app.add_subcommand("perimeter", "perimeter decomposition of a shape corpus");
    perim->add_option("shapes", shapes_path, "JSON shape document or array")->required();

    auto* suite = app.add_subcommand("suite", "run a named verification suite");
    suite->add_option("name", suite_name, "suite name (see 'suite' with a bad name for the list)")->required();

    auto* curv = app.add_subcommand("curvature", "prescribed mean curvature construction");
    curv->add_option("input", curv_input, "input set (.hbvset) or shape JSON")->required();
    curv->add_option("--lambda-steps", lambda_steps, "number of lambda increments")->capture_default_str();
    curv->add_option("--h-field", h_field_path, "positive density h as .hbvfield");

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.estimator = hbv::estimator_from_name(estimator);
        if (!(cfg.alpha >= 1.0)) throw hbv::Error("--alpha must be >= 1");
        if (cfg.dim < 1 || cfg.dim > 3) throw hbv::Error("--dim must be 1, 2 or 3");
        if (!(cfg.extent > 0)) throw hbv::Error("--extent must be positive");
        if (cfg.cells < 2) throw hbv::Error("--cells must be >= 2");

        if (perim->parsed()) return cmd_perimeter(cfg, shapes_path);
        if (suite->parsed()) return cmd_suite(cfg, suite_name);
        if (curv->parsed()) return cmd_curvature(cfg, curv_input, lambda_steps, h_field_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
