#include "vdx/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <omp.h>

#include "json.hpp"

namespace vdx {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string_view to_string(ChangeKind k) {
    switch (k) {
        case ChangeKind::RemoveTuples: return "remove-tuples";
        case ChangeKind::AddAttr: return "add";
        case ChangeKind::AddNoise: return "add-noise";
        case ChangeKind::DropAttr: return "drop";
        case ChangeKind::AddTuples: return "add-tuples";
    }
    return "?";
}

namespace {

ChangeKind change_kind_from(std::string_view s) {
    for (auto k : {ChangeKind::RemoveTuples, ChangeKind::AddAttr, ChangeKind::AddNoise, ChangeKind::DropAttr,
                   ChangeKind::AddTuples}) {
        if (to_string(k) == s) return k;
    }
    throw Error("unknown change kind '" + std::string(s) + "'");
}

std::string_view strip(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::pair<std::string_view, std::string_view> head_word(std::string_view s) {
    s = strip(s);
    auto sp = s.find_first_of(" \t");
    if (sp == std::string_view::npos) return {s, {}};
    return {s.substr(0, sp), strip(s.substr(sp + 1))};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

int phase(ChangeKind k) {
    switch (k) {
        case ChangeKind::RemoveTuples: return 0;
        case ChangeKind::AddAttr:
        case ChangeKind::AddNoise: return 1;
        case ChangeKind::DropAttr: return 2;
        case ChangeKind::AddTuples: return 3;
    }
    return 4;
}

bool flagged(const Value& v) { return (v.is_bool() && v.boolean()) || (v.is_text() && v.text() == kRemove); }

}  // namespace

TransformScript parse_script(std::string_view text) {
    TransformScript s;
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        line = strip(line);
        if (line.empty() || line.front() == '#') continue;
        auto where = [&] { return "script line " + std::to_string(lineno) + ": "; };
        auto [word, rest] = head_word(line);
        try {
            if (word == "name") {
                if (rest.empty()) throw Error("name needs a value");
                s.name = std::string(rest);
                continue;
            }
            if (word == "family") {
                if (rest != "supported" && rest != "unsupported") {
                    throw Error("family must be supported or unsupported");
                }
                s.family = std::string(rest);
                continue;
            }
            Change c;
            c.kind = change_kind_from(word);
            switch (c.kind) {
                case ChangeKind::AddAttr: {
                    auto eq = rest.find('=');
                    if (eq == std::string_view::npos) throw Error("expected 'add <attr> = <expr>'");
                    c.attr = std::string(strip(rest.substr(0, eq)));
                    if (c.attr.empty()) throw Error("missing attribute name");
                    c.expr = parse_expr(strip(rest.substr(eq + 1)));
                    break;
                }
                case ChangeKind::AddNoise:
                case ChangeKind::DropAttr:
                    if (rest.empty() || rest.find_first_of(" \t") != std::string_view::npos) {
                        throw Error("expected one attribute name");
                    }
                    c.attr = std::string(rest);
                    break;
                case ChangeKind::RemoveTuples:
                    c.expr = parse_expr(rest);
                    if (!std::holds_alternative<MarkerExpr>(c.expr->node) &&
                        !std::holds_alternative<PredicateExpr>(c.expr->node)) {
                        throw Error("remove-tuples needs a marker or a predicate");
                    }
                    break;
                case ChangeKind::AddTuples: {
                    auto n = parse_number(rest);
                    if (!n || *n < 1 || *n != std::floor(*n)) throw Error("add-tuples needs a positive count");
                    c.count = static_cast<std::size_t>(*n);
                    break;
                }
            }
            s.changes.push_back(std::move(c));
        } catch (const Error& e) {
            throw Error(where() + e.what());
        }
    }
    if (s.name.empty()) throw Error("script has no name line");
    return s;
}

TransformScript load_script(const std::string& path) {
    try {
        return parse_script(read_file(path));
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

std::string serialize_script(const TransformScript& s) {
    std::string out = "name " + s.name + "\nfamily " + s.family + "\n";
    for (const auto& c : s.changes) {
        out += to_string(c.kind);
        switch (c.kind) {
            case ChangeKind::AddAttr: out += " " + c.attr + " = " + serialize_expr(*c.expr); break;
            case ChangeKind::AddNoise:
            case ChangeKind::DropAttr: out += " " + c.attr; break;
            case ChangeKind::RemoveTuples: out += " " + serialize_expr(*c.expr); break;
            case ChangeKind::AddTuples: out += " " + std::to_string(c.count); break;
        }
        out += "\n";
    }
    return out;
}

Table apply_script(const Table& t, const TransformScript& s, std::uint64_t rng_seed,
                   std::vector<Annotation>* annotations) {
    std::mt19937_64 rng(rng_seed);
    std::vector<const Change*> order;
    for (const auto& c : s.changes) order.push_back(&c);
    std::stable_sort(order.begin(), order.end(),
                     [](const Change* a, const Change* b) { return phase(a->kind) < phase(b->kind); });

    auto note = [&](Annotation a) {
        if (annotations) annotations->push_back(std::move(a));
    };

    // Every removal rule reads the untouched table.
    std::vector<char> gone(t.num_rows(), 0);
    for (const auto* c : order) {
        if (c->kind != ChangeKind::RemoveTuples) continue;
        auto vals = eval_expr(*c->expr, t);
        Annotation a{c->kind, "", serialize_expr(*c->expr), {}, {}};
        for (std::size_t r = 0; r < t.num_rows(); ++r) {
            if (flagged(vals[r])) {
                gone[r] = 1;
                a.covers.push_back(t.tuple_ids()[r]);
            }
        }
        note(std::move(a));
    }
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        if (!gone[r]) keep.push_back(r);
    }
    const Table base = t.select_rows(keep);
    Table cur = base;

    for (const auto* c : order) {
        if (c->kind == ChangeKind::AddAttr) {
            for (const auto& a : expr_attrs(*c->expr)) {
                if (!base.has_attr(a)) throw Error("script '" + s.name + "' reads unknown attribute '" + a + "'");
            }
            if (cur.has_attr(c->attr)) throw Error("script '" + s.name + "' adds existing attribute '" + c->attr + "'");
            cur = cur.with_column(Attribute{c->attr}, eval_expr(*c->expr, base));
            note({c->kind, c->attr, serialize_expr(*c->expr), {}, {}});
        } else if (c->kind == ChangeKind::AddNoise) {
            if (cur.has_attr(c->attr)) throw Error("script '" + s.name + "' adds existing attribute '" + c->attr + "'");
            std::uniform_int_distribution<int> d(0, 999999);
            std::vector<Value> vals;
            for (std::size_t r = 0; r < cur.num_rows(); ++r) vals.emplace_back(d(rng) / 1000.0);
            cur = cur.with_column(Attribute{c->attr}, std::move(vals));
            note({c->kind, c->attr, "noise", {}, {}});
        }
    }
    for (const auto* c : order) {
        if (c->kind != ChangeKind::DropAttr) continue;
        if (!base.has_attr(c->attr)) throw Error("script '" + s.name + "' drops unknown attribute '" + c->attr + "'");
        cur = cur.without_column(c->attr);
        note({c->kind, c->attr, "", {}, {}});
    }
    for (const auto* c : order) {
        if (c->kind != ChangeKind::AddTuples) continue;
        if (cur.num_rows() == 0) throw Error("script '" + s.name + "' bootstraps from an empty table");
        Annotation a{c->kind, "", "", {}, {}};
        std::uniform_int_distribution<std::size_t> d(0, cur.num_rows() - 1);
        std::vector<std::string> ids = cur.tuple_ids();
        std::vector<std::vector<Value>> cols(cur.num_cols());
        for (std::size_t j = 0; j < cur.num_cols(); ++j) cols[j] = cur.column(j);
        const std::size_t n0 = cur.num_rows();
        for (std::size_t k = 0; k < c->count; ++k) {
            std::size_t src = d(rng);
            std::string id = cur.tuple_ids()[src] + "_b" + std::to_string(ids.size() - n0 + 1);
            ids.push_back(id);
            a.covers.push_back(id);
            for (std::size_t j = 0; j < cur.num_cols(); ++j) cols[j].push_back(cur.at(src, j));
        }
        cur = Table(cur.name(), cur.attributes(), std::move(ids), std::move(cols));
        note(std::move(a));
    }
    return infer_types(cur);
}

VersionSet generate_versions(const Table& seed, const TransformScript& s, std::uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    std::vector<std::size_t> idx(seed.num_rows());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n_hold = seed.num_rows() / 5;
    std::vector<std::size_t> hold(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_hold));
    std::vector<std::size_t> main(idx.begin() + static_cast<std::ptrdiff_t>(n_hold), idx.end());
    std::sort(hold.begin(), hold.end());
    std::sort(main.begin(), main.end());

    VersionSet vs;
    vs.name = s.name;
    vs.family = s.family;
    vs.rng_seed = rng_seed;
    vs.t = infer_types(seed.select_rows(main).renamed("T"));
    vs.hold_t = infer_types(seed.select_rows(hold).renamed("hold_T"));
    std::vector<Annotation> ann, hold_ann;
    vs.t2 = apply_script(vs.t, s, rng_seed + 1, &ann).renamed("T2");
    vs.hold_t2 = apply_script(vs.hold_t, s, rng_seed + 2, &hold_ann).renamed("hold_T2");
    for (std::size_t i = 0; i < ann.size(); ++i) ann[i].hold_covers = hold_ann[i].covers;
    vs.annotations = std::move(ann);
    return vs;
}

void write_version_set(const VersionSet& vs, const std::string& dir) {
    fs::create_directories(dir);
    save_table(vs.t, dir + "/T.csv");
    save_table(vs.t2, dir + "/T2.csv");
    save_table(vs.hold_t, dir + "/hold_T.csv");
    save_table(vs.hold_t2, dir + "/hold_T2.csv");
    ordered_json j;
    j["name"] = vs.name;
    j["family"] = vs.family;
    j["rng_seed"] = vs.rng_seed;
    ordered_json changes = ordered_json::array();
    for (const auto& a : vs.annotations) {
        ordered_json c;
        c["kind"] = std::string(to_string(a.kind));
        c["attr"] = a.attr;
        c["expr"] = a.expr;
        c["covers"] = a.covers;
        c["hold_covers"] = a.hold_covers;
        changes.push_back(std::move(c));
    }
    j["changes"] = std::move(changes);
    write_file(dir + "/annotations.json", j.dump(2) + "\n");
}

VersionSet load_version_set(const std::string& dir) {
    VersionSet vs;
    auto load = [&](const char* file, const char* name) {
        return load_table(dir + "/" + file).renamed(name);
    };
    vs.t = load("T.csv", "T");
    vs.t2 = load("T2.csv", "T2");
    vs.hold_t = load("hold_T.csv", "hold_T");
    vs.hold_t2 = load("hold_T2.csv", "hold_T2");
    const std::string path = dir + "/annotations.json";
    try {
        auto j = nlohmann::json::parse(read_file(path));
        vs.name = j.at("name").get<std::string>();
        vs.family = j.at("family").get<std::string>();
        vs.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        for (const auto& c : j.at("changes")) {
            Annotation a;
            a.kind = change_kind_from(c.at("kind").get<std::string>());
            a.attr = c.at("attr").get<std::string>();
            a.expr = c.at("expr").get<std::string>();
            a.covers = c.at("covers").get<std::vector<std::string>>();
            a.hold_covers = c.at("hold_covers").get<std::vector<std::string>>();
            vs.annotations.push_back(std::move(a));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(path + ": " + e.what());
    }
    return vs;
}

std::vector<std::string> check_annotations(const VersionSet& vs) {
    std::vector<std::string> problems;
    auto check_pair = [&](const Table& t, const Table& t2, bool hold) {
        const std::string tag = hold ? " (hold-out)" : "";
        std::vector<std::string> surviving, removed;
        for (const auto& id : t.tuple_ids()) (t2.find_row(id) ? surviving : removed).push_back(id);
        std::set<std::string> added;
        for (const auto& id : t2.tuple_ids()) {
            if (!t.find_row(id)) added.insert(id);
        }
        const Table base = t.select_ids(surviving);
        std::set<std::string> covered_removed, covered_added;
        for (const auto& a : vs.annotations) {
            const auto& covers = hold ? a.hold_covers : a.covers;
            switch (a.kind) {
                case ChangeKind::AddAttr: {
                    if (!t2.has_attr(a.attr)) {
                        problems.push_back("added attribute '" + a.attr + "' missing" + tag);
                        break;
                    }
                    auto vals = eval_expr(parse_expr(a.expr), base);
                    const auto& col = t2.column(a.attr);
                    for (std::size_t r = 0; r < base.num_rows(); ++r) {
                        if (!values_match(vals[r], col[*t2.find_row(base.tuple_ids()[r])])) {
                            problems.push_back("'" + a.attr + "' differs at " + base.tuple_ids()[r] + tag);
                            break;
                        }
                    }
                    break;
                }
                case ChangeKind::AddNoise:
                    if (!t2.has_attr(a.attr)) problems.push_back("noise attribute '" + a.attr + "' missing" + tag);
                    break;
                case ChangeKind::DropAttr:
                    if (!t.has_attr(a.attr) || t2.has_attr(a.attr)) {
                        problems.push_back("dropped attribute '" + a.attr + "' not dropped" + tag);
                    }
                    break;
                case ChangeKind::RemoveTuples: {
                    auto vals = eval_expr(parse_expr(a.expr), t);
                    std::vector<std::string> flagged_ids;
                    for (std::size_t r = 0; r < t.num_rows(); ++r) {
                        if (flagged(vals[r])) flagged_ids.push_back(t.tuple_ids()[r]);
                    }
                    if (flagged_ids != covers) problems.push_back("removal rule " + a.expr + " disagrees" + tag);
                    covered_removed.insert(covers.begin(), covers.end());
                    break;
                }
                case ChangeKind::AddTuples:
                    for (const auto& id : covers) {
                        auto r2 = t2.find_row(id);
                        auto src = t.find_row(id.substr(0, id.rfind("_b")));
                        if (!r2 || !src) {
                            problems.push_back("bootstrapped tuple '" + id + "' unresolved" + tag);
                            continue;
                        }
                        for (const auto& attr : t2.attributes()) {
                            if (!t.has_attr(attr.id)) continue;
                            if (!(t.column(attr.id)[*src] == t2.column(attr.id)[*r2])) {
                                problems.push_back("bootstrapped tuple '" + id + "' is not a copy" + tag);
                                break;
                            }
                        }
                    }
                    covered_added.insert(covers.begin(), covers.end());
                    break;
            }
        }
        if (std::set<std::string>(removed.begin(), removed.end()) != covered_removed) {
            problems.push_back("removed tuples do not match the removal rules" + tag);
        }
        if (added != covered_added) problems.push_back("added tuples do not match the bootstrap changes" + tag);
    };
    check_pair(vs.t, vs.t2, false);
    check_pair(vs.hold_t, vs.hold_t2, true);
    return problems;
}

Table synthetic_seed(std::string_view kind, std::size_t rows, std::uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    auto pick = [&](const std::vector<std::string>& xs) -> const std::string& {
        return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng)];
    };
    auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    std::vector<std::string> ids;
    std::vector<Attribute> attrs;
    std::vector<std::vector<Value>> cols;
    if (kind == "movies") {
        static const std::vector<std::string> adj = {"Silent", "Golden", "Last", "Hidden", "Broken", "Lost",
                                                     "Wild", "Crimson", "Frozen", "Secret", "Iron", "Dark"};
        static const std::vector<std::string> noun = {"River", "Kingdom", "Empire", "Garden", "Storm", "City",
                                                      "Voyage", "Island", "Dream", "Mountain", "Shadow", "Legacy"};
        static const std::vector<std::string> cert = {"G", "PG", "PG-13", "R", "U"};
        static const std::vector<std::string> genre = {"Drama", "Action", "Animation", "Comedy"};
        static const std::vector<std::string> studio = {"Disney", "Pixar", "Warner", "Universal", "Paramount"};
        for (const char* a : {"title", "runtime", "rating", "genre", "studio", "budget"}) attrs.push_back({a});
        cols.resize(attrs.size());
        for (std::size_t r = 0; r < rows; ++r) {
            ids.push_back("m" + std::to_string(r + 1));
            std::string title = "The " + pick(adj) + " " + pick(noun);
            if (uniform(0, 2) == 0) title += " " + std::to_string(uniform(2, 4));
            cols[0].emplace_back(title + " (" + pick(cert) + ")");
            cols[1].emplace_back(static_cast<double>(uniform(80, 180)));
            cols[2].emplace_back(uniform(10, 100) / 10.0);
            cols[3].emplace_back(pick(genre));
            cols[4].emplace_back(pick(studio));
            if (uniform(0, 19) == 0) {
                cols[5].emplace_back(Missing{});
            } else {
                cols[5].emplace_back(static_cast<double>(uniform(5, 250)));
            }
        }
        return infer_types(Table("movies", std::move(attrs), std::move(ids), std::move(cols)));
    }
    if (kind == "flowers") {
        static const std::vector<std::string> species = {"setosa", "versicolor", "virginica"};
        // Per-species means of the four measurements.
        static const double mu[3][4] = {{5.0, 3.4, 1.5, 0.25}, {5.9, 2.8, 4.3, 1.3}, {6.6, 3.0, 5.5, 2.0}};
        static const double sd[4] = {0.4, 0.3, 0.4, 0.2};
        for (const char* a : {"sepal_length", "sepal_width", "petal_length", "petal_width", "species",
                              "species_code"}) {
            attrs.push_back({a});
        }
        cols.resize(attrs.size());
        for (std::size_t r = 0; r < rows; ++r) {
            ids.push_back("f" + std::to_string(r + 1));
            int s = uniform(0, 2);
            for (int j = 0; j < 4; ++j) {
                double x = std::normal_distribution<double>(mu[s][j], sd[j])(rng);
                x = std::max(0.1, std::round(x * 10.0) / 10.0);
                cols[j].emplace_back(x);
            }
            cols[4].emplace_back(species[s]);
            cols[5].emplace_back(static_cast<double>(s));
        }
        return infer_types(Table("flowers", std::move(attrs), std::move(ids), std::move(cols)));
    }
    throw Error("unknown seed kind '" + std::string(kind) + "' (expected movies or flowers)");
}

std::vector<std::string> find_version_sets(const std::string& dir) {
    if (!fs::is_directory(dir)) throw Error("benchmark directory '" + dir + "' not found");
    if (fs::exists(fs::path(dir) / "T.csv")) return {dir};
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory() && fs::exists(e.path() / "T.csv")) out.push_back(e.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

BenchmarkMetrics run_benchmark(const std::vector<std::string>& set_dirs, const EngineConfig& cfg) {
    BenchmarkMetrics out;
    out.sets.resize(set_dirs.size());
    const int threads = cfg.workers > 0 ? static_cast<int>(cfg.workers) : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::size_t i = 0; i < set_dirs.size(); ++i) {
        auto& m = out.sets[i];
        m.name = fs::path(set_dirs[i]).filename().string();
        const auto t0 = std::chrono::steady_clock::now();
        try {
            auto vs = load_version_set(set_dirs[i]);
            m.name = vs.name;
            m.family = vs.family;
            auto match = match_by_name(vs.t, vs.t2);
            auto rep = explain_versions(vs.t, vs.t2, match, cfg, Holdout{vs.hold_t, vs.hold_t2});
            m.changes = rep.goals.size();
            double val = 0, perfect = 0, cands = 0, gen = 0;
            std::size_t n_gen = 0;
            for (const auto& g : rep.goals) {
                cands += static_cast<double>(g.candidates.size());
                if (g.idiopathic) m.idiopathic.push_back(g.goal.name);
                if (!g.winner) continue;
                const auto& s = g.candidates[*g.winner].scores;
                val += s.validity;
                perfect += s.validity >= 1.0 ? 1.0 : 0.0;
                if (s.generalizability) {
                    gen += *s.generalizability;
                    ++n_gen;
                }
            }
            const double n = static_cast<double>(std::max<std::size_t>(1, m.changes));
            m.validity = m.changes ? val / n : 1.0;
            m.perfect = m.changes ? perfect / n : 1.0;
            m.candidates = cands / n;
            if (n_gen) m.generalizability = gen / static_cast<double>(n_gen);
            for (const auto& g : rep.goals) {
                if (!g.error.empty() && m.error.empty()) m.error = g.goal.name + ": " + g.error;
            }
        } catch (const std::exception& e) {
            m.error = e.what();
        }
        m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    double all = 0, sup = 0, gen = 0;
    std::size_t n_sup = 0, n_gen = 0;
    for (const auto& m : out.sets) {
        all += m.validity;
        if (m.family == "supported") {
            sup += m.validity;
            ++n_sup;
        }
        if (m.generalizability) {
            gen += *m.generalizability;
            ++n_gen;
        }
    }
    if (!out.sets.empty()) out.mean_validity = all / static_cast<double>(out.sets.size());
    out.supported_validity = n_sup ? sup / static_cast<double>(n_sup) : 0.0;
    if (n_gen) out.mean_generalizability = gen / static_cast<double>(n_gen);
    return out;
}

std::string metrics_csv(const BenchmarkMetrics& m) {
    std::string out = "name,family,changes,val,gen,perfect,candidates,seconds,idiopathic\n";
    for (const auto& s : m.sets) {
        std::string idio;
        for (std::size_t i = 0; i < s.idiopathic.size(); ++i) idio += (i ? ";" : "") + s.idiopathic[i];
        out += s.name + "," + s.family + "," + std::to_string(s.changes) + "," + format_sig(s.validity, 4) + "," +
               (s.generalizability ? format_sig(*s.generalizability, 4) : "") + "," + format_sig(s.perfect, 4) +
               "," + format_sig(s.candidates, 4) + "," + format_sig(s.seconds, 4) + ",\"" + idio + "\"\n";
    }
    return out;
}

std::string metrics_json(const BenchmarkMetrics& m, bool timings) {
    ordered_json j;
    ordered_json sets = ordered_json::array();
    for (const auto& s : m.sets) {
        ordered_json x;
        x["name"] = s.name;
        x["family"] = s.family;
        x["changes"] = s.changes;
        x["val"] = s.validity;
        x["gen"] = s.generalizability ? ordered_json(*s.generalizability) : ordered_json(nullptr);
        x["perfect"] = s.perfect;
        x["candidates"] = s.candidates;
        if (timings) x["seconds"] = s.seconds;
        x["idiopathic"] = s.idiopathic;
        if (!s.error.empty()) x["error"] = s.error;
        sets.push_back(std::move(x));
    }
    j["sets"] = std::move(sets);
    j["mean_val"] = m.mean_validity;
    j["supported_val"] = m.supported_validity;
    j["mean_gen"] = m.mean_generalizability ? ordered_json(*m.mean_generalizability) : ordered_json(nullptr);
    return j.dump(2) + "\n";
}

}  // namespace vdx
