// vdx: explain the changes between two versions of a table.
//
//   vdx explain --left T.csv --right T2.csv [--match m.json] [--holdout-left ..
//               --holdout-right ..] [--config c.cfg] [--format json|text] [--out file]
//   vdx gen-bench --seed-table seed.csv --script s.vds --rng-seed 7 --out-dir dir
//   vdx run-bench --bench-dir dir [--config c.cfg] [--out dir]
//   vdx gen-seed --kind movies|flowers --rows 120 --rng-seed 1 --out seed.csv
//
// Exit codes: 0 success, 2 partial (some goal failed), 1 input error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "vdx/benchmark.hpp"
#include "vdx/config.hpp"
#include "vdx/engine.hpp"
#include "vdx/report.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kPartial = 2;

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw vdx::Error("cannot write '" + path + "'");
    out << text;
}

vdx::EngineConfig engine_config(const std::string& path, std::optional<std::size_t> workers, bool timings) {
    vdx::EngineConfig cfg;
    if (!path.empty()) cfg = vdx::load_config(path);
    if (workers) cfg.workers = *workers;
    if (timings) cfg.timings = true;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explain the semantic differences between two versions of a table"};
    app.require_subcommand(1);

    std::string left, right, match_path, hold_left, hold_right, config_path, out_path, format = "text", id_column = "first";
    std::optional<std::size_t> workers;
    bool timings = false;
    auto* explain = app.add_subcommand("explain", "Explain the changes from --left to --right");
    explain->add_option("--left", left, "Original table (CSV, first column holds tuple ids)")->required();
    explain->add_option("--right", right, "Derived table (CSV)")->required();
    explain->add_option("--match", match_path, "Attribute match as JSON {\"left\": \"right\", ...}; default: by name");
    explain->add_option("--holdout-left", hold_left, "Hold-out original table, for generalizability");
    explain->add_option("--holdout-right", hold_right, "Hold-out derived table");
    explain->add_option("--config", config_path, "key = value file overriding engine settings");
    explain->add_option("--workers", workers, "Goals explained concurrently; default: available cores");
    explain->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));
    explain->add_option("--out", out_path, "Report file; default: standard output");
    explain->add_option("--id-column", id_column, "Tuple id column name, 'first' or 'synthesize'");
    explain->add_flag("--timings", timings, "Include wall-clock timings in the report");

    std::string seed_table, script_path, out_dir;
    std::uint64_t rng_seed = 7;
    auto* gen = app.add_subcommand("gen-bench", "Generate a version set from a seed table and a transform script");
    gen->add_option("--seed-table", seed_table, "Seed table (CSV)")->required();
    gen->add_option("--script", script_path, "Transform script (.vds)")->required();
    gen->add_option("--rng-seed", rng_seed, "Seed of the 80/20 split and random changes");
    gen->add_option("--out-dir", out_dir, "Output directory")->required();

    std::string bench_dir;
    auto* run = app.add_subcommand("run-bench", "Explain every version set below --bench-dir and report metrics");
    run->add_option("--bench-dir", bench_dir, "Directory of version sets (or a single one)")->required();
    run->add_option("--config", config_path, "key = value file overriding engine settings");
    run->add_option("--workers", workers, "Worker threads; default: available cores");
    run->add_option("--out", out_path, "Directory for metrics.csv and metrics.json; default: CSV on standard output");
    run->add_flag("--timings", timings, "Include timings in metrics.json");

    std::string kind = "movies";
    std::size_t rows = 120;
    auto* seed = app.add_subcommand("gen-seed", "Write a synthetic seed table");
    seed->add_option("--kind", kind, "movies or flowers")->check(CLI::IsMember({"movies", "flowers"}));
    seed->add_option("--rows", rows, "Number of tuples");
    seed->add_option("--rng-seed", rng_seed, "Generator seed");
    seed->add_option("--out", out_path, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    try {
        if (*explain) {
            auto cfg = engine_config(config_path, workers, timings);
            vdx::CsvOptions csv;
            csv.id_column = id_column;
            csv.types = {cfg.categorical_ratio, cfg.categorical_max};
            auto t = vdx::load_table(left, csv);
            auto t2 = vdx::load_table(right, csv);
            auto m = match_path.empty() ? vdx::match_by_name(t, t2) : vdx::load_match(match_path);
            std::optional<vdx::Table> ht, ht2;
            if (hold_left.empty() != hold_right.empty()) {
                throw vdx::Error("--holdout-left and --holdout-right go together");
            }
            if (!hold_left.empty()) {
                ht = vdx::load_table(hold_left, csv);
                ht2 = vdx::load_table(hold_right, csv);
            }
            std::optional<vdx::Holdout> holdout;
            if (ht) holdout.emplace(vdx::Holdout{*ht, *ht2});
            auto rep = vdx::explain_versions(t, t2, m, cfg, holdout);
            vdx::ReportOptions ro;
            ro.timings = cfg.timings;
            emit(format == "json" ? vdx::report_json(rep, ro) : vdx::report_text(rep, ro), out_path);
            for (const auto& g : rep.goals) {
                if (!g.error.empty()) std::cerr << "vdx: goal " << g.goal.name << ": " << g.error << "\n";
            }
            return rep.partial() ? kPartial : kOk;
        }
        if (*gen) {
            auto s = vdx::load_script(script_path);
            auto table = vdx::load_table(seed_table);
            auto vs = vdx::generate_versions(table, s, rng_seed);
            auto problems = vdx::check_annotations(vs);
            if (!problems.empty()) throw vdx::Error("generated pair fails its own annotations: " + problems.front());
            vdx::write_version_set(vs, out_dir);
            std::cerr << "vdx: wrote " << out_dir << " (" << vs.t.num_rows() << " + " << vs.hold_t.num_rows()
                      << " tuples, " << vs.annotations.size() << " changes)\n";
            return kOk;
        }
        if (*run) {
            auto cfg = engine_config(config_path, workers, timings);
            auto dirs = vdx::find_version_sets(bench_dir);
            if (dirs.empty()) throw vdx::Error("no version sets under '" + bench_dir + "'");
            auto metrics = vdx::run_benchmark(dirs, cfg);
            if (out_path.empty()) {
                std::cout << vdx::metrics_csv(metrics);
            } else {
                std::filesystem::create_directories(out_path);
                emit(vdx::metrics_csv(metrics), out_path + "/metrics.csv");
                emit(vdx::metrics_json(metrics, cfg.timings), out_path + "/metrics.json");
            }
            bool failed = false;
            for (const auto& s : metrics.sets) {
                if (s.error.empty()) continue;
                std::cerr << "vdx: " << s.name << ": " << s.error << "\n";
                failed = true;
            }
            return failed ? kPartial : kOk;
        }
        if (*seed) {
            auto t = vdx::synthetic_seed(kind, rows, rng_seed);
            vdx::save_table(t, out_path);
            return kOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "vdx: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
