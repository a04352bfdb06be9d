#pragma once

// `ddesc` command-line front end. Exit codes: 0 success, 1 input error
// (including unknown flags), 2 capacity error, 3 `report` ran but at least
// one criterion failed.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddesc/core_stats.hpp"
#include "ddesc/exact_dist.hpp"
#include "ddesc/io.hpp"
#include "ddesc/janson.hpp"
#include "ddesc/monte_carlo.hpp"
#include "ddesc/reproduction.hpp"

namespace ddesc::cli {

enum exit_code : int { ok = 0, bad_input = 1, over_capacity = 2, criteria_failed = 3 };

namespace detail {

struct spec_flags {
    std::optional<int> d;
    std::vector<int> vector;

    void attach(CLI::App* sub) {
        auto* od = sub->add_option("--d", d, "uniform reach d >= 1");
        auto* ov = sub->add_option("--vector", vector, "per-position reaches d_1..d_{n-1}")
                       ->delimiter(',');
        od->excludes(ov);
    }

    descent_spec resolve() const {
        if (!vector.empty()) return descent_spec::vector(vector);
        if (d) return descent_spec::uniform(*d);
        throw input_error("one of --d or --vector is required");
    }
};

inline run_manifest manifest_for(const CLI::App* sub, std::optional<std::uint64_t> seed = {}) {
    run_manifest m;
    m.command = sub->get_name();
    for (const auto* opt : sub->get_options()) {
        if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
        std::string value;
        if (opt->count() > 0) {
            for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
        } else {
            value = opt->get_default_str();
        }
        std::string key = opt->get_name();
        while (!key.empty() && key.front() == '-') key.erase(key.begin());
        m.parameters[key] = value;
    }
    m.seed = seed;
    m.timestamp = rfc3339_now();
    return m;
}

class sink {
public:
    sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw input_error("cannot open output file " + path);
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_;
};

inline void check_format(const std::string& f) {
    if (f != "json" && f != "csv") throw input_error("--format must be json or csv");
}

} // namespace detail

inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact and Monte Carlo distributions of d-descents of permutations", "ddesc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version));

    std::string format = "json";
    std::string out_path;
    std::string cache_dir;
    unsigned workers = 0;
    int limit = default_enumeration_limit;

    // exact
    auto* exact = app.add_subcommand("exact", "exact distribution by exhaustive enumeration");
    int exact_n = 0;
    detail::spec_flags exact_spec;
    exact->add_option("--n", exact_n, "permutation length")->required();
    exact_spec.attach(exact);
    exact->add_option("--limit", limit, "enumeration limit")->capture_default_str();
    exact->add_option("--workers", workers, "worker threads (0 = all cores)")->capture_default_str();
    exact->add_option("--format", format, "json or csv")->capture_default_str();
    exact->add_option("--out", out_path, "output file (default stdout)");
    exact->add_option("--cache-dir", cache_dir,
                      std::string("table cache directory (default $") + cache_dir_env + ")");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "closed-form oracle tables");
    std::string oracle_kind;
    int oracle_n = 0;
    oracle->add_option("kind", oracle_kind, "inversions or eulerian")
        ->required()
        ->check(CLI::IsMember({"inversions", "eulerian"}));
    oracle->add_option("--n", oracle_n, "permutation length")->required();
    oracle->add_option("--format", format, "json or csv")->capture_default_str();
    oracle->add_option("--out", out_path, "output file (default stdout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo normality diagnostics");
    int sim_n = 0;
    detail::spec_flags sim_spec;
    std::int64_t trials = 10'000;
    std::vector<std::uint64_t> seeds{1};
    std::optional<double> epsilon;
    std::vector<int> schedule;
    std::string dump_path;
    sim->add_option("--n", sim_n, "permutation length");
    sim_spec.attach(sim);
    sim->add_option("--trials", trials, "samples per run")->capture_default_str();
    sim->add_option("--seed", seeds, "seed(s); one run per seed")->delimiter(',')->capture_default_str();
    sim->add_option("--workers", workers, "worker threads (0 = all cores)")->capture_default_str();
    sim->add_option("--limit", limit, "enumeration limit for table-based standardization")
        ->capture_default_str();
    sim->add_option("--epsilon", epsilon, "growth mode: d = floor(n^(1-epsilon)) over --schedule");
    sim->add_option("--schedule", schedule, "growth mode: list of n")->delimiter(',');
    sim->add_option("--format", format, "json or csv")->capture_default_str();
    sim->add_option("--out", out_path, "output file (default stdout)");
    sim->add_option("--dump-samples", dump_path, "write standardized samples as CSV (seed,n,d,z)");

    // janson
    auto* jan = app.add_subcommand("janson", "Janson criterion certificates");
    int jan_n = 0;
    std::optional<int> jan_d;
    std::optional<int> jan_m;
    bool exact_degree = false;
    bool table_mode = false;
    bool audit_mode = false;
    std::optional<double> jan_epsilon;
    std::vector<int> jan_schedule;
    std::int64_t guard = default_graph_guard;
    jan->add_option("--n", jan_n, "permutation length");
    jan->add_option("--d", jan_d, "reach d");
    jan->add_option("--m", jan_m, "moment order m (bound: default 3; table: auto)");
    jan->add_flag("--exact-degree", exact_degree, "materialize the graph and use its max degree");
    jan->add_option("--guard", guard, "max vertices for graph materialization")->capture_default_str();
    jan->add_flag("--table", table_mode, "convergence table over --schedule");
    jan->add_option("--epsilon", jan_epsilon, "table: d = floor(n^(1-epsilon))");
    jan->add_option("--schedule", jan_schedule, "table: list of n")->delimiter(',');
    jan->add_flag("--audit", audit_mode, "exhaustive independence audit at (n, d)");
    jan->add_option("--limit", limit, "audit enumeration limit")->capture_default_str();
    jan->add_option("--format", format, "json or csv")->capture_default_str();
    jan->add_option("--out", out_path, "output file (default stdout)");

    // pairs
    auto* pairs = app.add_subcommand("pairs", "pair-class counts and classification");
    int pairs_n = 0, pairs_d = 0;
    bool dump = false;
    pairs->add_option("--n", pairs_n, "permutation length")->required();
    pairs->add_option("--d", pairs_d, "reach d")->required();
    pairs->add_flag("--dump", dump, "list the class of every ordered pair of eligible pairs");
    pairs->add_option("--format", format, "json or csv")->capture_default_str();
    pairs->add_option("--out", out_path, "output file (default stdout)");

    // report
    auto* report = app.add_subcommand("report", "run the full reproduction suite");
    report->add_option("--workers", workers, "worker threads (0 = all cores)")->capture_default_str();
    report->add_option("--out", out_path, "write the JSON summary here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::CallForVersion&) {
        out << tool_version << "\n";
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* failing = &app;
        for (const auto* sub : app.get_subcommands()) failing = sub;
        err << failing->help();
        return bad_input;
    }

    try {
        detail::check_format(format);
        detail::sink sink(out_path, out);
        std::ostream& os = sink.stream();

        if (*exact) {
            const auto spec = exact_spec.resolve();
            std::optional<table_cache> cache;
            if (!cache_dir.empty()) {
                cache.emplace(cache_dir, [&](const std::string& m) { err << "warning: " << m << "\n"; });
            } else {
                cache = table_cache::from_environment(
                    [&](const std::string& m) { err << "warning: " << m << "\n"; });
            }
            std::optional<distribution_table> t;
            if (cache) t = cache->lookup(exact_n, spec);
            if (!t) {
                t = exact_distribution(exact_n, spec, limit, workers);
                if (cache) cache->store(*t);
            }
            if (format == "csv") {
                os << table_csv(*t);
            } else {
                json result = to_json(*t);
                result["moments"] = to_json(moments_from_table(*t));
                result["unimodal"] = unimodality_check(*t);
                result["log_concavity_violations"] = log_concavity_report(*t);
                os << canonical_dump(with_manifest(detail::manifest_for(exact), result)) << "\n";
            }
        } else if (*oracle) {
            const auto t = oracle_kind == "inversions" ? oracle_inversions(oracle_n)
                                                       : oracle_eulerian(oracle_n);
            if (format == "csv") {
                os << table_csv(t);
            } else {
                json result = to_json(t);
                result["oracle"] = oracle_kind;
                os << canonical_dump(with_manifest(detail::manifest_for(oracle), result)) << "\n";
            }
        } else if (*sim) {
            std::vector<normality_report> reports;
            json growth_rows = json::array();
            if (epsilon) {
                if (schedule.empty()) throw input_error("--epsilon needs --schedule");
                for (auto seed : seeds) {
                    for (auto& row : growth_regime_experiment(*epsilon, schedule, trials, seed,
                                                              resolve_workers(workers))) {
                        if (row.report) {
                            growth_rows.push_back({{"n", row.n}, {"d", row.d}, {"report", to_json(*row.report)}});
                            reports.push_back(std::move(*row.report));
                        } else {
                            err << "warning: " << row.warning << "\n";
                            growth_rows.push_back({{"n", row.n}, {"d", row.d}, {"warning", row.warning}});
                        }
                    }
                }
            } else {
                if (sim_n < 1) throw input_error("--n is required (or use --epsilon with --schedule)");
                const auto spec = sim_spec.resolve();
                for (auto seed : seeds) {
                    simulation_config cfg;
                    cfg.n = sim_n;
                    cfg.spec = spec;
                    cfg.trials = trials;
                    cfg.seed = seed;
                    cfg.workers = resolve_workers(workers);
                    cfg.enumeration_limit = limit;
                    cfg.keep_samples = !dump_path.empty();
                    reports.push_back(simulate(cfg));
                }
            }
            if (!dump_path.empty()) {
                std::ofstream dump_os(dump_path, std::ios::trunc);
                if (!dump_os) throw input_error("cannot open " + dump_path);
                dump_os << "seed,n,d,z\n";
                for (const auto& r : reports) {
                    const std::string d = r.spec.is_uniform() ? std::to_string(r.spec.uniform_d()) : "vector";
                    for (double z : r.standardized) {
                        dump_os << r.seed << "," << r.n << "," << d << "," << format_double(z) << "\n";
                    }
                }
            }
            if (format == "csv") {
                os << normality_csv_header;
                for (const auto& r : reports) os << normality_csv_row(r);
            } else {
                json result;
                if (epsilon) {
                    result = {{"epsilon", *epsilon}, {"rows", growth_rows}};
                } else {
                    result = {{"runs", json::array()}};
                    for (const auto& r : reports) result["runs"].push_back(to_json(r));
                }
                const auto seed = seeds.size() == 1 ? std::optional<std::uint64_t>(seeds[0]) : std::nullopt;
                os << canonical_dump(with_manifest(detail::manifest_for(sim, seed), result)) << "\n";
            }
        } else if (*jan) {
            if (audit_mode) {
                if (!jan_d || jan_n < 2) throw input_error("--audit needs --n and --d");
                const auto rep = independence_audit(jan_n, *jan_d, limit);
                if (format == "csv") {
                    os << "i,j,r,s,relation,joint_expectation\n";
                    for (const auto& e : rep.entries) {
                        os << e.a.i << "," << e.a.j << "," << e.b.i << "," << e.b.j << ","
                           << to_string(e.relation) << "," << to_string(e.joint) << "\n";
                    }
                } else {
                    json entries = json::array();
                    for (const auto& e : rep.entries) {
                        entries.push_back({{"a", {e.a.i, e.a.j}}, {"b", {e.b.i, e.b.j}},
                                           {"relation", to_string(e.relation)},
                                           {"joint_expectation", to_string(e.joint)}});
                    }
                    json result = {{"n", jan_n}, {"d", *jan_d}, {"passed", rep.passed},
                                   {"failures", rep.failures}, {"entries", entries}};
                    os << canonical_dump(with_manifest(detail::manifest_for(jan), result)) << "\n";
                }
                if (!rep.passed) return criteria_failed;
            } else if (table_mode) {
                if (jan_schedule.empty()) throw input_error("--table needs --schedule");
                reach_rule rule = jan_epsilon ? reach_rule(power_reach{*jan_epsilon})
                                              : reach_rule(fixed_reach{jan_d.value_or(1)});
                const auto table = convergence_table(rule, jan_m.value_or(0), jan_schedule);
                if (format == "csv") {
                    os << janson_csv_header;
                    for (const auto& row : table.rows) {
                        if (row.certificate) os << janson_csv_row(*row.certificate);
                        else err << "warning: " << row.warning << "\n";
                    }
                } else {
                    json rows = json::array();
                    for (const auto& row : table.rows) {
                        if (row.certificate) rows.push_back(to_json(*row.certificate));
                        else rows.push_back({{"n", row.n}, {"d", row.d}, {"warning", row.warning}});
                    }
                    json result = {{"m", table.m}, {"rows", rows}};
                    os << canonical_dump(with_manifest(detail::manifest_for(jan), result)) << "\n";
                }
            } else {
                if (!jan_d || jan_n < 1) throw input_error("janson needs --n and --d");
                const auto cert = janson_bound(jan_n, *jan_d, jan_m.value_or(3), exact_degree, guard);
                if (format == "csv") {
                    os << janson_csv_header << janson_csv_row(cert);
                } else {
                    os << canonical_dump(with_manifest(detail::manifest_for(jan), to_json(cert))) << "\n";
                }
            }
        } else if (*pairs) {
            if (pairs_n < 2 || pairs_d < 1) throw input_error("pairs needs n >= 2 and d >= 1");
            const auto tally = reproduction::brute_force_pair_tally(pairs_n, pairs_d);
            auto tally_json = [](const pair_class_tally& t) {
                return json{{"equal", t.equal.str()}, {"aligned", t.aligned.str()},
                            {"crossed", t.crossed.str()}, {"independent", t.independent.str()}};
            };
            std::vector<pair_index> eligible;
            for (int i = 1; i < pairs_n; ++i) {
                for (int j = i + 1; j <= std::min(i + pairs_d, pairs_n); ++j) eligible.push_back({i, j});
            }
            if (format == "csv") {
                os << "i,j,r,s,class,expectation\n";
                if (dump) {
                    for (const auto& a : eligible) {
                        for (const auto& b : eligible) {
                            const auto c = classify_pair(a, b);
                            os << a.i << "," << a.j << "," << b.i << "," << b.j << "," << to_string(c)
                               << "," << to_string(expectation(c)) << "\n";
                        }
                    }
                }
            } else {
                json result = {{"n", pairs_n}, {"d", pairs_d},
                               {"N_n", eligible_pair_count(pairs_n, pairs_d)},
                               {"exhaustive", tally_json(tally)}};
                if (pairs_n >= 2 * pairs_d) {
                    const auto published = pair_class_counts(pairs_n, pairs_d);
                    const auto exact_counts = exact_pair_class_counts(pairs_n, pairs_d);
                    result["closed_form"] = tally_json(published);
                    result["closed_form_exact"] = tally_json(exact_counts);
                    result["match"] = published == tally;
                    result["match_exact"] = exact_counts == tally;
                    result["variance_from_classes"] = to_string(tally.implied_variance());
                    result["variance_closed_form"] = to_string(variance_closed_form(pairs_n, pairs_d));
                    result["variance_exact"] = to_string(exact_variance(pairs_n, pairs_d));
                } else {
                    result["closed_form"] = nullptr;
                    result["note"] = "closed forms need n >= 2d";
                }
                if (dump) {
                    json cls = json::array();
                    for (const auto& a : eligible) {
                        for (const auto& b : eligible) {
                            cls.push_back({{"a", {a.i, a.j}}, {"b", {b.i, b.j}},
                                           {"class", to_string(classify_pair(a, b))}});
                        }
                    }
                    result["classification"] = cls;
                }
                os << canonical_dump(with_manifest(detail::manifest_for(pairs), result)) << "\n";
            }
        } else if (*report) {
            reproduction::options opt{workers};
            reproduction::shared_state st;
            // lines go to stdout even when --out names the JSON file
            const auto results = reproduction::run_reproduction(
                opt, st, [&](const auto& r) { out << reproduction::format_line(r) << "\n" << std::flush; });
            const json summary = reproduction::summary_json(results, st);
            if (!out_path.empty()) {
                os << canonical_dump(with_manifest(detail::manifest_for(report), summary)) << "\n";
            }
            return summary.at("all_passed").get<bool>() ? ok : criteria_failed;
        }
        return ok;
    } catch (const capacity_error& e) {
        err << "capacity error: " << e.what() << "\n";
        return over_capacity;
    } catch (const unsupported_regime_error& e) {
        err << "error: " << e.what() << "\n";
        return bad_input;
    } catch (const input_error& e) {
        err << "error: " << e.what() << "\n";
        return bad_input;
    }
}

} // namespace ddesc::cli
