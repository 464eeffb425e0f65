// starsis: command-line front end for the starlike SIS library.
//
// Exit codes: 0 ok, 1 validation failure, 2 usage or parameter error,
// 3 solver failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "starsis/starsis.hpp"

namespace {

using ojson = nlohmann::ordered_json;
using namespace starsis;

constexpr const char* kSchema = "starlike-sis/1";

enum Exit { kOk = 0, kValidationFailed = 1, kUsage = 2, kSolverFailed = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        out.push_back(item);
    }
    return out;
}

std::vector<int> parse_counts(const std::string& s) {
    std::vector<int> out;
    for (const auto& tok : split(s, ',')) {
        int v = 0;
        const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size() || v < 1) {
            throw UsageError("--counts expects positive integers separated by commas, got '" + s + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw UsageError("--counts must not be empty");
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) {
                throw std::invalid_argument(tok);
            }
        } catch (const std::logic_error&) {
            throw UsageError(std::string(what) + " expects numbers separated by commas, got '" + s + "'");
        }
    }
    return out;
}

ojson state_json(std::span<const double> s) {
    ojson arr = ojson::array();
    for (double v : s) {
        arr.push_back(v);
    }
    return arr;
}

ojson state_json(const State2& s) { return ojson::array({s.x, s.y}); }

// ---------------------------------------------------------------------------
// Output

struct Options {
    std::string format = "auto";
    std::string output;
    std::string config;
};

/// A report is either a single JSON object or a table of rows.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

void flatten(const ojson& j, const std::string& prefix, std::vector<std::string>& keys,
             std::vector<std::string>& values) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            flatten(v, prefix.empty() ? k : prefix + "." + k, keys, values);
        }
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            flatten(j[i], prefix + "[" + std::to_string(i) + "]", keys, values);
        }
    } else {
        keys.push_back(prefix);
        if (j.is_null()) {
            values.emplace_back();
        } else if (j.is_number_float()) {
            values.push_back(fmt(j.get<double>()));
        } else if (j.is_string()) {
            values.push_back(j.get<std::string>());
        } else {
            values.push_back(j.dump());
        }
    }
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) {
            line += ',';
        }
        line += cells[i];
    }
    return line + '\n';
}

std::string render_table_csv(const Table& t) {
    std::string out = csv_line(t.columns);
    for (const auto& r : t.rows) {
        out += csv_line(r);
    }
    return out;
}

void emit(const Options& opt, const std::string& text) {
    if (opt.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(opt.output);
    if (!f) {
        throw UsageError("cannot open output file '" + opt.output + "'");
    }
    f << text;
}

/// Object reports default to JSON; tables default to CSV.
void emit_object(const Options& opt, ojson body) {
    ojson doc;
    doc["schema"] = kSchema;
    for (auto& [k, v] : body.items()) {
        doc[k] = v;
    }
    if (opt.format == "csv") {
        std::vector<std::string> keys;
        std::vector<std::string> values;
        body.erase("schema");
        flatten(body, "", keys, values);
        emit(opt, csv_line(keys) + csv_line(values));
    } else {
        emit(opt, doc.dump(2) + "\n");
    }
}

void emit_table(const Options& opt, const Table& t, ojson meta = ojson::object()) {
    if (opt.format == "json") {
        ojson doc;
        doc["schema"] = kSchema;
        for (auto& [k, v] : meta.items()) {
            doc[k] = v;
        }
        doc["columns"] = t.columns;
        ojson rows = ojson::array();
        for (const auto& r : t.rows) {
            ojson row = ojson::object();
            for (std::size_t i = 0; i < t.columns.size(); ++i) {
                const auto& cell = r[i];
                if (cell.empty()) {
                    row[t.columns[i]] = nullptr;
                } else if (t.columns[i] == "regime" || t.columns[i] == "region") {
                    row[t.columns[i]] = cell;
                } else {
                    row[t.columns[i]] = std::stod(cell);
                }
            }
            rows.push_back(row);
        }
        doc["rows"] = rows;
        emit(opt, doc.dump(2) + "\n");
    } else {
        emit(opt, render_table_csv(t));
    }
}

// ---------------------------------------------------------------------------
// Shared model flags

struct ModelFlags {
    double a = std::nan("");
    double b = std::nan("");
    int n = 0;
    std::string counts;
    bool scalar = false;
};

void add_a(CLI::App* cmd, ModelFlags& m, bool required = true) {
    auto* o = cmd->add_option("--a", m.a, "survival probability a = 1 - delta, in (0, 1)");
    if (required) {
        o->required();
    }
}

void add_b(CLI::App* cmd, ModelFlags& m, bool required = true) {
    auto* o = cmd->add_option("--b", m.b, "infection probability b = beta, in (0, 1)");
    if (required) {
        o->required();
    }
}

void add_shape(CLI::App* cmd, ModelFlags& m, bool with_scalar) {
    cmd->add_option("--n", m.n, "spoke count of a two-level star");
    cmd->add_option("--counts", m.counts, "spoke counts per level, e.g. 2,3");
    if (with_scalar) {
        cmd->add_flag("--scalar", m.scalar, "one-spoke scalar reduction");
    }
}

/// Resolves --n / --counts / --scalar to a list of counts. A single count is a
/// plain star.
std::vector<int> resolve_counts(const ModelFlags& m) {
    const int given = (m.n != 0) + !m.counts.empty() + m.scalar;
    if (given != 1) {
        throw UsageError("give exactly one of --n, --counts" + std::string(m.scalar ? ", --scalar" : ""));
    }
    if (m.scalar) {
        return {1};
    }
    if (m.n != 0) {
        if (m.n < 1) {
            throw UsageError("--n must be >= 1");
        }
        return {m.n};
    }
    return parse_counts(m.counts);
}

ojson counts_json(const std::vector<int>& counts) {
    ojson arr = ojson::array();
    for (int c : counts) {
        arr.push_back(c);
    }
    return arr;
}

Regime regime_against(double b, double t) {
    return b < t ? Regime::Subcritical : b == t ? Regime::Critical : Regime::Supercritical;
}

double level_threshold(double a, const std::vector<int>& counts) {
    if (counts.size() == 1) {
        return threshold(a, counts[0]);
    }
    if (counts.size() == 2) {
        return threshold_3level(a, counts[0], counts[1]);
    }
    return conjectured_threshold(a, counts);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_threshold(const Options& opt, const ModelFlags& m) {
    const auto counts = resolve_counts(m);
    Params{m.a, std::isnan(m.b) ? 0.5 : m.b};  // validates a (and b when given)
    const double t = level_threshold(m.a, counts);
    ojson body;
    body["threshold"] = t;
    if (!std::isnan(m.b)) {
        body["regime"] = to_string(regime_against(m.b, t));
    }
    body["counts"] = counts_json(counts);
    body["basis"] = counts.size() <= 2 ? "proven" : "conjectured";
    emit_object(opt, body);
    return kOk;
}

int cmd_fixed_point(const Options& opt, const ModelFlags& m) {
    const auto counts = resolve_counts(m);
    const Params p{m.a, m.b};
    ojson body;
    if (m.scalar) {
        const auto r = scalar_report(p);
        body["trivial"] = 0.0;
        body["x_f"] = r.x_f ? ojson(*r.x_f) : ojson(nullptr);
        body["x_c"] = r.x_c ? ojson(*r.x_c) : ojson(nullptr);
        body["f_prime_at_0"] = r.f_prime_at_0;
        body["f_prime_at_1"] = r.f_prime_at_1;
        body["regime"] = to_string(classify_regime(StarParams{p, 1}));
    } else if (counts.size() == 1) {
        const auto r = solve_fixed_points(StarParams{p, counts[0]});
        body["trivial"] = state_json(r.trivial);
        body["nontrivial"] = r.nontrivial ? state_json(*r.nontrivial) : ojson(nullptr);
        body["regime"] = to_string(r.regime);
        body["residual"] = r.residual;
    } else {
        const LevelParams lp{p, counts};
        const auto fp = solve_fixed_point_multilevel(lp);
        body["trivial"] = state_json(StateL(lp.levels(), 0.0));
        body["nontrivial"] = fp ? state_json(*fp) : ojson(nullptr);
        body["regime"] = to_string(regime_against(m.b, level_threshold(m.a, counts)));
        body["residual"] = fp ? sup_distance(apply_F_multilevel(lp, *fp), *fp) : 0.0;
    }
    emit_object(opt, body);
    return kOk;
}

struct IterateFlags {
    std::string start;
    double tol = 1e-10;
    long max_iters = 1'000'000;
    bool trace = false;
};

int cmd_iterate(const Options& opt, const ModelFlags& m, const IterateFlags& it) {
    const auto counts = resolve_counts(m);
    const Params p{m.a, m.b};
    if (!(it.tol > 0.0) || it.max_iters < 1) {
        throw UsageError("--tol and --max-iters must be positive");
    }
    const std::size_t dim = m.scalar ? 1 : counts.size() + 1;
    std::vector<double> s0 = it.start.empty() ? std::vector<double>(dim, 1.0) : parse_doubles(it.start, "--start");
    if (s0.size() != dim) {
        throw UsageError("--start needs " + std::to_string(dim) + " values");
    }

    std::vector<std::vector<double>> trace;
    std::vector<double> limit;
    long iterations = 0;
    std::string kind;
    if (m.scalar) {
        const auto r = iterate_scalar(p, s0[0], it.max_iters, it.tol);
        if (it.trace) {
            double x = s0[0];
            trace.push_back({x});
            for (long k = 0; k < r.iterations; ++k) {
                x = f_scalar(p, x);
                trace.push_back({x});
            }
        }
        limit = {r.limit};
        iterations = r.iterations;
        const auto rep = scalar_report(p);
        if (!r.resolved) {
            kind = "Unresolved";
        } else if (std::abs(r.limit) < 10 * it.tol) {
            kind = "Trivial";
        } else if (rep.x_f && std::abs(r.limit - *rep.x_f) < std::max(10 * it.tol, 1e-8)) {
            kind = "Nontrivial";
        } else {
            kind = "Unresolved";
        }
    } else if (counts.size() == 1) {
        IterateOptions io;
        io.max_iters = it.max_iters;
        io.tol = it.tol;
        io.record_points = it.trace;
        const auto t = iterate(StarParams{p, counts[0]}, {s0[0], s0[1]}, io);
        for (const auto& pt : t.points) {
            trace.push_back({pt.x, pt.y});
        }
        const State2 last = t.converged_to ? *t.converged_to : (t.points.empty() ? State2{} : t.points.back());
        limit = {last.x, last.y};
        if (!t.converged_to && !it.trace) {
            // Recompute the endpoint when points were not recorded.
            State2 s{s0[0], s0[1]};
            for (long k = 0; k < t.iterations_used; ++k) {
                s = apply_F(StarParams{p, counts[0]}, s);
            }
            limit = {s.x, s.y};
        }
        iterations = t.iterations_used;
        kind = to_string(t.limit_kind);
    } else {
        const LevelParams lp{p, counts};
        StateL cur = s0;
        if (it.trace) {
            trace.push_back(cur);
        }
        bool converged = false;
        while (iterations < it.max_iters) {
            StateL next = apply_F_multilevel(lp, cur);
            const double step = sup_distance(next, cur);
            cur = std::move(next);
            ++iterations;
            if (it.trace) {
                trace.push_back(cur);
            }
            if (step < it.tol && sup_distance(apply_F_multilevel(lp, cur), cur) < it.tol) {
                converged = true;
                break;
            }
        }
        limit = cur;
        kind = "Unresolved";
        if (converged) {
            const double size = *std::max_element(cur.begin(), cur.end());
            const auto fp = solve_fixed_point_multilevel(lp);
            if (size < std::max(10 * it.tol, 1e-8)) {
                kind = "Trivial";
            } else if (fp && sup_distance(cur, *fp) < std::max(10 * it.tol, 1e-8)) {
                kind = "Nontrivial";
            }
        }
    }

    if (it.trace && opt.format != "json") {
        Table t;
        t.columns.push_back("t");
        static const char* names[] = {"x", "y", "z"};
        for (std::size_t k = 0; k < dim; ++k) {
            t.columns.push_back(k < 3 ? names[k] : "s" + std::to_string(k + 1));
        }
        for (std::size_t i = 0; i < trace.size(); ++i) {
            std::vector<std::string> row{std::to_string(i)};
            for (double v : trace[i]) {
                row.push_back(fmt(v));
            }
            t.rows.push_back(std::move(row));
        }
        emit(opt, render_table_csv(t));
        return kOk;
    }
    ojson body;
    body["limit"] = state_json(limit);
    body["limit_kind"] = kind;
    body["iterations"] = iterations;
    if (it.trace) {
        ojson tr = ojson::array();
        for (const auto& row : trace) {
            tr.push_back(state_json(row));
        }
        body["trace"] = tr;
    }
    emit_object(opt, body);
    return kOk;
}

struct SweepFlags {
    double line_m = std::nan("");
    int steps = 0;
    int grid = 0;
    int n = 0;
};

const std::vector<std::string> kSweepColumns{"a", "b", "n", "regime", "x_f", "y_f", "lambda1"};

int cmd_sweep(const Options& opt, const SweepFlags& sw) {
    const bool line = !std::isnan(sw.line_m);
    if (line == (sw.grid != 0)) {
        throw UsageError("give exactly one of --line-m or --grid");
    }
    Table t;
    t.columns = kSweepColumns;
    ojson meta;
    if (line) {
        if (sw.steps < 2) {
            throw UsageError("--steps must be >= 2");
        }
        meta["line_m"] = sw.line_m;
        for (const auto& r : eigen_sweep_line(sw.line_m, sw.steps)) {
            t.rows.push_back({fmt(r.a), fmt(r.b), "2", "Supercritical", fmt(r.x_f), fmt(r.y_f), fmt(r.lambda1)});
        }
    } else {
        if (sw.grid < 1 || sw.n < 1) {
            throw UsageError("--grid and --n must be >= 1");
        }
        // Cell midpoints (i + 1/2) / grid on both axes; a outer, b inner.
        for (int i = 0; i < sw.grid; ++i) {
            for (int j = 0; j < sw.grid; ++j) {
                const double a = (i + 0.5) / sw.grid;
                const double b = (j + 0.5) / sw.grid;
                const StarParams sp{a, b, sw.n};
                const auto r = solve_fixed_points(sp);
                const State2 at = r.nontrivial.value_or(State2{});
                const double l1 = eig2(jacobian(sp, at)).lambda1;
                t.rows.push_back({fmt(a), fmt(b), std::to_string(sw.n), to_string(r.regime),
                                  r.nontrivial ? fmt(at.x) : "", r.nontrivial ? fmt(at.y) : "", fmt(l1)});
            }
        }
    }
    emit_table(opt, t, meta);
    return kOk;
}

struct ValidateFlags {
    int steps = 1000;
    double tol = 1e-12;
    std::uint64_t seed = 1;
    bool perturb = false;
};

int cmd_validate(const Options& opt, const ModelFlags& m, const ValidateFlags& v) {
    const auto counts = resolve_counts(m);
    const Params p{m.a, m.b};
    if (v.steps < 1) {
        throw UsageError("--steps must be >= 1");
    }
    const LevelParams lp{p, counts};
    const auto g = build_multilevel_star(counts);
    const auto sizes = level_sizes(counts);
    const auto offsets = level_offsets(counts);
    std::mt19937_64 rng(v.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Level-homogeneous start: the reduced map must track the full graph.
    StateL reduced(lp.levels());
    for (auto& r : reduced) {
        r = unit(rng);
    }
    std::vector<double> init;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        init.insert(init.end(), sizes[k], reduced[k]);
    }
    FullState full(init);
    double worst = 0.0;
    for (int t = 0; t < v.steps; ++t) {
        full = step_full(g, p, full);
        reduced = apply_F_multilevel(lp, reduced);
        if (v.perturb) {
            reduced[0] = std::min(1.0, reduced[0] + 1e-9);  // test fixture: corrupted reduced map
        }
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            for (std::size_t i = 0; i < sizes[k]; ++i) {
                worst = std::max(worst, std::abs(full[offsets[k] + i] - reduced[k]));
            }
        }
    }

    // Heterogeneous start: within-level spread must shrink.
    std::vector<double> het(offsets.back());
    for (auto& x : het) {
        x = unit(rng);
    }
    FullState h(het);
    const double spread0 = level_spread(counts, h);
    bool monotone = true;
    double spread = spread0;
    for (int t = 0; t < v.steps; ++t) {
        h = step_full(g, p, h);
        const double next = level_spread(counts, h);
        if (counts.size() == 1 && spread > 0.0 && !(next < spread)) {
            monotone = false;
        }
        spread = next;
    }
    const bool agree = worst <= v.tol;
    const bool homogenized = spread < spread0 && (counts.size() > 1 || monotone);
    ojson body;
    body["counts"] = counts_json(counts);
    body["steps"] = v.steps;
    body["max_discrepancy"] = worst;
    body["tol"] = v.tol;
    body["agreement"] = agree;
    body["initial_spread"] = spread0;
    body["final_spread"] = spread;
    body["spread_decreasing"] = homogenized;
    body["pass"] = agree && homogenized;
    emit_object(opt, body);
    return agree && homogenized ? kOk : kValidationFailed;
}

struct ClassifyFlags {
    std::string point;
    bool flip = false;
    long samples = 10000;
    std::uint64_t seed = 0;
    int workers = 1;
};

ojson tally_json(const TransitionTally& t) {
    ojson j;
    j["I"] = t.to[0];
    j["II"] = t.to[1];
    j["III"] = t.to[2];
    j["IV"] = t.to[3];
    j["curve"] = t.to[4];
    j["total"] = t.total;
    return j;
}

int cmd_classify(const Options& opt, const ModelFlags& m, const ClassifyFlags& c) {
    const auto counts = resolve_counts(m);
    if (counts.size() != 1) {
        throw UsageError("classify works on two-level stars only (use --n)");
    }
    const StarParams sp{Params{m.a, m.b}, counts[0]};
    if (c.point.empty() == !c.flip) {
        throw UsageError("give exactly one of --point or --flip");
    }
    ojson body;
    if (!c.point.empty()) {
        const auto xy = parse_doubles(c.point, "--point");
        if (xy.size() != 2) {
            throw UsageError("--point needs two values x,y");
        }
        body["point"] = ojson::array({xy[0], xy[1]});
        body["region"] = to_string(classify_region(sp, {xy[0], xy[1]}));
    } else {
        FlipOptions fo;
        fo.seed = c.seed;
        fo.workers = c.workers;
        const auto r = flip_classifier(sp, c.samples, fo);
        const auto opt_point = [](const std::optional<State2>& s) { return s ? state_json(*s) : ojson(nullptr); };
        body["label"] = to_string(r.label);
        body["samples"] = c.samples;
        body["seed"] = c.seed;
        body["candidates_drawn"] = r.candidates_drawn;
        body["from_II"] = tally_json(r.from_ii);
        body["from_IV"] = tally_json(r.from_iv);
        body["first_II_to_II"] = opt_point(r.first_ii_to_ii);
        body["first_IV_to_IV"] = opt_point(r.first_iv_to_iv);
        body["first_II_to_IV"] = opt_point(r.first_ii_to_iv);
        body["first_IV_to_II"] = opt_point(r.first_iv_to_ii);
    }
    emit_object(opt, body);
    return kOk;
}

// ---------------------------------------------------------------------------
// --config: a JSON object whose keys mirror long flag names. Its entries are
// spliced in right after the subcommand name, ahead of the real flags, and
// every option keeps the last value given, so command-line flags win.

std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw UsageError("cannot read config file '" + path + "'");
    }
    ojson j;
    try {
        j = ojson::parse(f);
    } catch (const ojson::parse_error& e) {
        throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw UsageError("config file must contain a JSON object");
    }
    std::vector<std::string> out;
    for (const auto& [key, val] : j.items()) {
        if (key == "config") {
            continue;
        }
        const std::string flag = "--" + key;
        if (val.is_boolean()) {
            if (val.get<bool>()) {
                out.push_back(flag);
            }
        } else if (val.is_array()) {
            std::string joined;
            for (const auto& e : val) {
                joined += (joined.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
            }
            out.push_back(flag);
            out.push_back(joined);
        } else if (val.is_string()) {
            out.push_back(flag);
            out.push_back(val.get<std::string>());
        } else if (val.is_number_float()) {
            out.push_back(flag);
            out.push_back(fmt(val.get<double>()));
        } else if (val.is_number()) {
            out.push_back(flag);
            out.push_back(val.dump());
        } else {
            throw UsageError("config key '" + key + "' has an unsupported value");
        }
    }
    return out;
}

std::vector<std::string> expand_config(int argc, char** argv, const std::vector<std::string>& subcommands) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        }
    }
    if (path.empty()) {
        return args;
    }
    const auto extra = config_tokens(path);
    auto pos = args.begin();
    for (; pos != args.end(); ++pos) {
        if (std::find(subcommands.begin(), subcommands.end(), *pos) != subcommands.end()) {
            ++pos;
            break;
        }
    }
    if (pos == args.end() && std::none_of(args.begin(), args.end(), [&](const std::string& a) {
            return std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end();
        })) {
        throw UsageError("a subcommand is required");
    }
    args.insert(pos, extra.begin(), extra.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-time SIS dynamics on star and multilevel-star graphs", "starsis"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--format", opt.format, "output format: json, csv or auto (CSV for tables, JSON otherwise)")
        ->check(CLI::IsMember({"auto", "json", "csv"}));
    app.add_option("--output", opt.output, "write output to this file instead of stdout");
    app.add_option("--config", opt.config, "JSON file with flag values; command-line flags override it");

    ModelFlags m;

    auto* th = app.add_subcommand("threshold", "critical b for (a, n) or (a, counts), with the regime of --b");
    add_a(th, m);
    add_b(th, m, false);
    add_shape(th, m, false);

    auto* fp = app.add_subcommand("fixed-point", "trivial and nontrivial fixed points");
    add_a(fp, m);
    add_b(fp, m);
    add_shape(fp, m, true);

    IterateFlags it;
    auto* itc = app.add_subcommand("iterate", "iterate the reduced map from --start (default all ones)");
    add_a(itc, m);
    add_b(itc, m);
    add_shape(itc, m, true);
    itc->add_option("--start", it.start, "initial state, comma separated (hub first)");
    itc->add_option("--tol", it.tol, "stop when step and residual are below tol");
    itc->add_option("--max-iters", it.max_iters, "iteration cap");
    itc->add_flag("--trace", it.trace, "emit the trajectory; CSV columns t,x,y[,z,s4,...]");

    SweepFlags sw;
    auto* swc = app.add_subcommand(
        "sweep",
        "parameter sweeps; CSV columns a,b,n,regime,x_f,y_f,lambda1. lambda1 is the larger Jacobian eigenvalue at "
        "the nontrivial fixed point, or at the origin when there is none (x_f,y_f are then empty)");
    swc->add_option("--line-m", sw.line_m, "n = 2 line b = (m - a)/sqrt(2), 1 < m < 1 + sqrt(2)");
    swc->add_option("--steps", sw.steps, "points along the line (>= 2)");
    swc->add_option("--grid", sw.grid, "grid of cell midpoints per axis over (0,1)^2");
    swc->add_option("--n", sw.n, "spoke count for --grid");

    ValidateFlags v;
    auto* va = app.add_subcommand("validate", "full-graph recursion vs reduced map, and within-level homogenization");
    add_a(va, m);
    add_b(va, m);
    add_shape(va, m, false);
    va->add_option("--steps", v.steps, "steps to run");
    va->add_option("--tol", v.tol, "largest accepted per-step discrepancy");
    va->add_option("--seed", v.seed, "seed for the random start");
    va->add_flag("--perturb-reduced", v.perturb, "corrupt the reduced map (negative control)")->group("");

    ClassifyFlags c;
    auto* cl = app.add_subcommand("classify", "region of a point, or the flip classifier");
    add_a(cl, m);
    add_b(cl, m);
    add_shape(cl, m, false);
    cl->add_option("--point", c.point, "point x,y to classify");
    cl->add_flag("--flip", c.flip, "run the Region II/IV flip classifier");
    cl->add_option("--samples", c.samples, "samples per region for --flip");
    cl->add_option("--seed", c.seed, "offset into the Halton sequence for --flip");
    cl->add_option("--workers", c.workers, "worker threads for --flip");

    try {
        std::vector<std::string> names;
        for (const auto* sub : app.get_subcommands({})) {
            names.push_back(sub->get_name());
        }
        auto args = expand_config(argc, argv, names);
        std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*th) return cmd_threshold(opt, m);
        if (*fp) return cmd_fixed_point(opt, m);
        if (*itc) return cmd_iterate(opt, m, it);
        if (*swc) return cmd_sweep(opt, sw);
        if (*va) return cmd_validate(opt, m, v);
        if (*cl) return cmd_classify(opt, m, c);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolverFailed;
    }
    return kUsage;
}
