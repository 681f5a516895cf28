#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vdx/engine.hpp"
#include "vdx/expr.hpp"
#include "vdx/table.hpp"

namespace vdx {

// --- transform scripts -----------------------------------------------------
//
//   name  movies-cleanup
//   family supported                 (or "unsupported" for negative controls)
//   remove-tuples <expr>             marker or predicate, evaluated on the seed half
//   add <attr> = <expr>              evaluated after the tuple removals
//   add-noise <attr>                 uniform random numbers; explainable by nothing
//   drop <attr>
//   add-tuples <n>                   bootstrapped copies of surviving tuples
//
// Changes are applied in that phase order whatever their order in the file.

enum class ChangeKind { RemoveTuples, AddAttr, AddNoise, DropAttr, AddTuples };

std::string_view to_string(ChangeKind k);

struct Change {
    ChangeKind kind = ChangeKind::AddAttr;
    std::string attr;       // AddAttr, AddNoise, DropAttr
    std::optional<Expr> expr;  // AddAttr, RemoveTuples
    std::size_t count = 0;  // AddTuples
};

struct TransformScript {
    std::string name;
    std::string family = "supported";
    std::vector<Change> changes;
};

// Errors carry the line number and, for expressions, the byte offset.
TransformScript parse_script(std::string_view text);
TransformScript load_script(const std::string& path);
// parse_script(serialize_script(s)) reproduces s.
std::string serialize_script(const TransformScript& s);

// --- version sets ----------------------------------------------------------

struct Annotation {
    ChangeKind kind = ChangeKind::AddAttr;
    std::string attr;
    std::string expr;                 // canonical form; empty for drops, "noise" for noise
    std::vector<std::string> covers;  // tuple changes: affected ids of the main pair
    std::vector<std::string> hold_covers;
};

struct VersionSet {
    std::string name, family;
    std::uint64_t rng_seed = 0;
    Table t, t2, hold_t, hold_t2;
    std::vector<Annotation> annotations;
};

// Applies the script to one table. Throws Error when the script reads an
// attribute the table lacks.
Table apply_script(const Table& t, const TransformScript& s, std::uint64_t rng_seed,
                   std::vector<Annotation>* annotations = nullptr);

// Seeded 80/20 split of the seed rows (original order kept within each part),
// then the same script on both parts.
VersionSet generate_versions(const Table& seed, const TransformScript& s, std::uint64_t rng_seed);

// Writes T.csv, T2.csv, hold_T.csv, hold_T2.csv and annotations.json.
void write_version_set(const VersionSet& vs, const std::string& dir);
VersionSet load_version_set(const std::string& dir);

// Re-applies every annotation to T and checks it reproduces T2: added columns
// by evaluating their expression on the surviving tuples, removals and
// bootstrapped tuples by comparing id sets. Returns a description of each
// mismatch; empty means the pair is sound.
std::vector<std::string> check_annotations(const VersionSet& vs);

// Synthetic seed tables: "movies" (title, runtime, rating, genre, studio,
// budget with a few Missing cells) and "flowers" (four measurements, species,
// species code).
Table synthetic_seed(std::string_view kind, std::size_t rows, std::uint64_t rng_seed);

// --- evaluation ------------------------------------------------------------

struct SetMetrics {
    std::string name, family;
    std::size_t changes = 0;          // goals in the report
    double validity = 0.0;            // mean winner validity, 0 for goals without a winner
    std::optional<double> generalizability;  // mean over goals with a hold-out score
    double perfect = 0.0;             // share of goals explained with validity 1
    double candidates = 0.0;          // mean candidate count per goal
    double seconds = 0.0;
    std::vector<std::string> idiopathic;  // goal names
    std::string error;
};

struct BenchmarkMetrics {
    std::vector<SetMetrics> sets;
    double mean_validity = 0.0;        // over every set
    double supported_validity = 0.0;   // over sets of the "supported" family
    std::optional<double> mean_generalizability;
};

// Version-set directories under `dir` (or `dir` itself when it holds T.csv),
// sorted by name.
std::vector<std::string> find_version_sets(const std::string& dir);

BenchmarkMetrics run_benchmark(const std::vector<std::string>& set_dirs, const EngineConfig& cfg = {});

std::string metrics_csv(const BenchmarkMetrics& m);
// Timings are left out unless asked for, so the output is reproducible.
std::string metrics_json(const BenchmarkMetrics& m, bool timings = false);

}  // namespace vdx
