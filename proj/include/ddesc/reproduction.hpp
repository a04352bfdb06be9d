#pragma once

// End-to-end reproduction checks. Each check returns one criterion_result;
// run_reproduction runs them all in order. Shared by the acceptance binary
// and `ddesc report`.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ddesc/core_stats.hpp"
#include "ddesc/exact_dist.hpp"
#include "ddesc/io.hpp"
#include "ddesc/janson.hpp"
#include "ddesc/monte_carlo.hpp"

namespace ddesc::reproduction {

struct criterion_result {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0;
};

struct options {
    unsigned workers = 0;  // 0: hardware concurrency
};

// Tables computed along the way, reused by later checks.
struct shared_state {
    std::vector<distribution_table> tables;
    std::vector<std::string> inversion_eulerian_payloads;  // workers = default
    json log_concavity = json::array();
    json degree_sweep = json::array();
};

inline constexpr std::uint64_t normality_seeds[] = {1, 2, 3, 4, 5};
inline constexpr std::uint64_t vector_spec_seed = 20240601;

// 1. Exact variance equals the closed form for 2 <= n <= 9, 1 <= d <= n/2.
//
// Also records how the corrected form exact_variance fares on the same
// cases, so a failure comes with its diagnosis.
inline criterion_result check_variance_formula(const options& opt, shared_state& st) {
    criterion_result r{1, "variance (6dn+10d^3-3d^2-d)/72 vs exact enumeration (n<=9, d<=n/2)"};
    int checked = 0, corrected_ok = 0;
    std::ostringstream bad;
    for (int n = 2; n <= 9; ++n) {
        for (int d = 1; d <= n / 2; ++d) {
            auto t = exact_distribution(n, descent_spec::uniform(d), default_enumeration_limit,
                                        opt.workers);
            const rational exact = moments_from_table(t).variance;
            const rational closed = variance_closed_form(n, d);
            if (exact != closed) {
                bad << " (n=" << n << ",d=" << d << ": " << to_string(exact)
                    << " != " << to_string(closed) << ")";
            }
            corrected_ok += exact == exact_variance(n, d);
            ++checked;
            st.tables.push_back(std::move(t));
        }
    }
    r.passed = bad.str().empty();
    r.detail = std::to_string(checked) + " (n,d) cases, exact rational equality";
    if (!r.passed) r.detail += "; mismatches:" + bad.str();
    r.detail += "; (6dn+4d^3+3d^2-d)/72 matches " + std::to_string(corrected_ok) + "/" +
                std::to_string(checked);
    return r;
}

// 2. variance_closed_form(n, 1) == (n + 1) / 12.
inline criterion_result check_d1_variance(const options&, shared_state&) {
    criterion_result r{2, "variance at d=1 equals (n+1)/12 for n up to 1e6"};
    std::vector<std::int64_t> ns;
    for (std::int64_t n = 2; n <= 2000; ++n) ns.push_back(n);
    for (std::int64_t n : {10'000LL, 65'537LL, 100'000LL, 123'457LL, 999'999LL, 1'000'000LL}) {
        ns.push_back(n);
    }
    std::int64_t first_bad = -1;
    for (auto n : ns) {
        if (variance_closed_form(n, 1) != rational(big_int(n + 1), big_int(12))) {
            first_bad = n;
            break;
        }
    }
    r.passed = first_bad < 0;
    r.detail = std::to_string(ns.size()) + " values of n checked" +
               (r.passed ? "" : ", first mismatch at n=" + std::to_string(first_bad));
    return r;
}

// 3. Enumeration agrees with the inversion product and Eulerian recurrence.
inline criterion_result check_oracles(const options& opt, shared_state& st) {
    criterion_result r{3, "enumeration == inversion product and Eulerian oracles (n<=10)"};
    std::ostringstream bad;
    st.inversion_eulerian_payloads.clear();
    for (int n = 1; n <= 10; ++n) {
        auto inv = exact_distribution(n, descent_spec::uniform(std::max(1, n - 1)),
                                      default_enumeration_limit, opt.workers);
        auto eul = exact_distribution(n, descent_spec::uniform(1), default_enumeration_limit,
                                      opt.workers);
        if (inv.counts != oracle_inversions(n).counts) bad << " inversions n=" << n;
        if (eul.counts != oracle_eulerian(n).counts) bad << " eulerian n=" << n;
        st.inversion_eulerian_payloads.push_back(canonical_dump(to_json(inv)));
        st.inversion_eulerian_payloads.push_back(canonical_dump(to_json(eul)));
        st.tables.push_back(std::move(inv));
        st.tables.push_back(std::move(eul));
    }
    r.passed = bad.str().empty();
    r.detail = r.passed ? "20 tables, exact equality" : "mismatch:" + bad.str();
    return r;
}

// Brute-force tally of classify_pair over all ordered pairs of eligible pairs.
inline pair_class_tally brute_force_pair_tally(int n, int d) {
    std::vector<pair_index> pairs;
    for (int i = 1; i < n; ++i) {
        for (int j = i + 1; j <= std::min(i + d, n); ++j) pairs.push_back({i, j});
    }
    std::int64_t tally[4] = {0, 0, 0, 0};
    for (const auto& a : pairs) {
        for (const auto& b : pairs) ++tally[static_cast<int>(classify_pair(a, b))];
    }
    return {tally[0], tally[1], tally[2], tally[3]};
}

// 4. Pair-class closed forms vs exhaustive classification.
inline criterion_result check_pair_classes(const options&, shared_state&) {
    criterion_result r{4, "pair-class counts vs exhaustive classification (n<=30, d<=n/2)"};
    int checked = 0, corrected_ok = 0;
    int bad_equal = 0, bad_aligned = 0, bad_crossed = 0;
    std::ostringstream first_bad;
    for (int n = 2; n <= 30; ++n) {
        for (int d = 1; d <= n / 2; ++d) {
            const auto brute = brute_force_pair_tally(n, d);
            const auto closed = pair_class_counts(n, d);
            bad_equal += closed.equal != brute.equal;
            bad_aligned += closed.aligned != brute.aligned;
            if (closed.crossed != brute.crossed) {
                if (bad_crossed++ == 0) {
                    first_bad << " first crossed mismatch (n=" << n << ",d=" << d
                              << "): formula " << closed.crossed << " vs tally " << brute.crossed;
                }
            }
            corrected_ok += exact_pair_class_counts(n, d) == brute;
            ++checked;
        }
    }
    r.passed = bad_equal == 0 && bad_aligned == 0 && bad_crossed == 0;
    std::ostringstream detail;
    detail << checked << " (n,d) cases; mismatching cases: equal " << bad_equal << ", aligned "
           << bad_aligned << ", crossed " << bad_crossed << ";" << first_bad.str()
           << (bad_crossed ? ";" : "") << " crossed = 2(n-2d)d^2 + 2d^2(d-1) matches "
           << corrected_ok << "/" << checked;
    r.detail = detail.str();
    return r;
}

// 5. Degree bound, plus the exact maximum from the sweep.
//
// The sweep shows the maximum is 4d - 2 exactly when n >= 2d + 2; the one
// case with n >= 3d outside that range is (n, d) = (3, 1), where it is 1.
inline criterion_result check_degree_bound(const options&, shared_state& st) {
    criterion_result r{5, "max degree <= 4d (n<=40, all d); exact max 4d-2 for n>=2d+2"};
    int checked = 0;
    std::ostringstream bound_bad, regular_bad, three_d_exceptions;
    st.degree_sweep = json::array();
    for (int n = 2; n <= 40; ++n) {
        for (int d = 1; d <= n - 1; ++d) {
            const int deg = max_degree(build_dependency_graph(n, d));
            st.degree_sweep.push_back({{"n", n}, {"d", d}, {"max_degree", deg}});
            ++checked;
            if (deg > 4 * d) bound_bad << " (n=" << n << ",d=" << d << ":" << deg << ")";
            if (n >= 2 * d + 2 && deg != 4 * d - 2) {
                regular_bad << " (n=" << n << ",d=" << d << ":" << deg << ")";
            }
            if (n >= 3 * d && deg != 4 * d - 2) {
                three_d_exceptions << " (n=" << n << ",d=" << d << ":" << deg << ")";
            }
        }
    }
    r.passed = bound_bad.str().empty() && regular_bad.str().empty();
    r.detail = std::to_string(checked) + " graphs";
    if (!bound_bad.str().empty()) r.detail += "; bound violated:" + bound_bad.str();
    if (!regular_bad.str().empty()) r.detail += "; 4d-2 regularity broken:" + regular_bad.str();
    if (!three_d_exceptions.str().empty()) {
        r.detail += "; n>=3d cases below 4d-2:" + three_d_exceptions.str();
    }
    return r;
}

// 6. Unimodality of every table so far plus seeded random vector specs.
inline criterion_result check_unimodality(const options& opt, shared_state& st) {
    criterion_result r{6, "unimodality of all computed tables + 20 random vector specs per n<=8"};
    std::mt19937_64 g(vector_spec_seed);
    std::vector<distribution_table> vector_tables;
    for (int n = 2; n <= 8; ++n) {
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<int> ds(n - 1);
            // entries beyond n - i exercise clamping
            for (auto& x : ds) x = 1 + static_cast<int>(bounded_draw(g, static_cast<std::uint64_t>(n)));
            vector_tables.push_back(exact_distribution(n, descent_spec::vector(ds),
                                                       default_enumeration_limit, opt.workers));
        }
    }
    int checked = 0;
    std::ostringstream bad;
    auto check = [&](const distribution_table& t) {
        ++checked;
        const auto problems = table_problems(t);
        if (!unimodality_check(t) || !problems.empty()) {
            bad << " (n=" << t.n << "," << t.spec.describe() << ")";
        }
    };
    for (const auto& t : st.tables) check(t);
    for (const auto& t : vector_tables) check(t);
    r.passed = bad.str().empty();
    r.detail = std::to_string(checked) + " tables (sum = n!, symmetric, unimodal)" +
               (r.passed ? "" : ", failing:" + bad.str());
    return r;
}

// 7. Janson quantity: n^(-1/2) decay for m = 3, no decay for m = 2.
inline criterion_result check_janson_scaling(const options&, shared_state&) {
    criterion_result r{7, "Janson bound: m=3 ratio in [0.475,0.525]; m=2 non-vanishing"};
    std::ostringstream detail;
    bool ok = true;
    for (int n : {1'000, 4'000, 16'000}) {
        const double ratio = janson_bound(4 * n, 1, 3).bound_value / janson_bound(n, 1, 3).bound_value;
        detail << "m=3 b(" << 4 * n << ")/b(" << n << ")=" << ratio << "; ";
        ok = ok && ratio >= 0.475 && ratio <= 0.525;
    }
    const double small = janson_bound(100, 1, 2).bound_value;
    const double large = janson_bound(10'000, 1, 2).bound_value;
    const double rel = std::abs(large / small - 1.0);
    detail << "m=2 b(1e2)=" << small << " b(1e4)=" << large << " rel.diff=" << rel;
    ok = ok && rel <= 0.05;
    r.passed = ok;
    r.detail = detail.str();
    return r;
}

inline std::vector<normality_report> normality_runs(int n, int d, std::int64_t trials,
                                                    unsigned workers) {
    std::vector<normality_report> out;
    for (auto seed : normality_seeds) {
        simulation_config cfg;
        cfg.n = n;
        cfg.spec = descent_spec::uniform(d);
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.workers = resolve_workers(workers);
        out.push_back(simulate(cfg));
    }
    return out;
}

inline double median_ks(const std::vector<normality_report>& runs) {
    std::vector<double> ks;
    for (const auto& r : runs) ks.push_back(r.ks_statistic);
    return median(ks);
}

// 8. Fixed d = 1: KS shrinks with n, and the variance matches (n + 1)/12.
//
// The variance check pools the five seeds (5e4 draws), so 2% is about
// three standard errors of the sample variance.
inline criterion_result check_fixed_d_normality(const options& opt, shared_state&) {
    criterion_result r{8, "d=1 normality: median KS(1000)<=0.05, decreasing in n; variance within 2%"};
    std::ostringstream detail;
    std::vector<double> medians;
    std::vector<normality_report> at_1000;
    for (int n : {50, 200, 1000}) {
        auto runs = normality_runs(n, 1, 10'000, opt.workers);
        medians.push_back(median_ks(runs));
        detail << "median KS(n=" << n << ")=" << medians.back() << "; ";
        if (n == 1000) at_1000 = std::move(runs);
    }
    const bool decreasing = medians[0] > medians[1] && medians[1] > medians[2];
    const bool small_enough = medians[2] <= 0.05;

    big_int sum = 0, sum_sq = 0, count = 0;
    for (const auto& run : at_1000) {
        for (const auto& [x, c] : run.histogram) {
            sum += big_int(x) * c;
            sum_sq += big_int(x) * x * c;
            count += c;
        }
    }
    const rational mean(sum, count);
    const double pooled_var = static_cast<double>(rational(sum_sq, count) - mean * mean);
    const double target = static_cast<double>(variance_closed_form(1000, 1));
    const double rel = std::abs(pooled_var / target - 1.0);
    detail << "pooled variance(n=1000)=" << pooled_var << " vs " << target << " (rel " << rel << ")";

    r.passed = decreasing && small_enough && rel <= 0.02;
    r.detail = detail.str();
    return r;
}

// 9. Growing d = floor(sqrt(n)): median KS non-increasing along the schedule.
inline criterion_result check_growing_d_normality(const options& opt, shared_state&) {
    criterion_result r{9, "d=floor(sqrt n) normality: median KS non-increasing over 100/900/10^4"};
    const std::vector<int> schedule{100, 900, 10'000};
    std::vector<std::vector<double>> ks(schedule.size());
    for (auto seed : normality_seeds) {
        const auto rows = growth_regime_experiment(0.5, schedule, 5'000, seed, resolve_workers(opt.workers));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (rows[k].report) ks[k].push_back(rows[k].report->ks_statistic);
        }
    }
    std::ostringstream detail;
    std::vector<double> medians;
    bool complete = true;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (ks[k].size() != std::size(normality_seeds)) {
            complete = false;
            continue;
        }
        medians.push_back(median(ks[k]));
        detail << "median KS(n=" << schedule[k] << ", d=" << power_law_reach(schedule[k], 0.5)
               << ")=" << medians.back() << "; ";
    }
    bool non_increasing = complete;
    for (std::size_t k = 1; k < medians.size(); ++k) {
        non_increasing = non_increasing && medians[k] <= medians[k - 1];
    }
    r.passed = non_increasing;
    r.detail = detail.str();
    return r;
}

// 10. Worker count does not change any payload.
inline criterion_result check_determinism(const options&, shared_state& st) {
    criterion_result r{10, "bit-identical payloads for workers=1 and workers=4"};
    std::ostringstream bad;
    int compared = 0;
    for (int n = 1; n <= 10; ++n) {
        for (const auto& spec : {descent_spec::uniform(std::max(1, n - 1)), descent_spec::uniform(1)}) {
            const auto one = canonical_dump(to_json(exact_distribution(n, spec, default_enumeration_limit, 1)));
            const auto four = canonical_dump(to_json(exact_distribution(n, spec, default_enumeration_limit, 4)));
            ++compared;
            if (one != four) bad << " exact(n=" << n << "," << spec.describe() << ")";
        }
    }
    // the payloads recorded by criterion 3 ran with the default worker count
    for (std::size_t k = 0; k < st.inversion_eulerian_payloads.size(); ++k) {
        const int n = static_cast<int>(k / 2) + 1;
        const auto spec = k % 2 == 0 ? descent_spec::uniform(std::max(1, n - 1)) : descent_spec::uniform(1);
        ++compared;
        if (canonical_dump(to_json(exact_distribution(n, spec, default_enumeration_limit, 1))) !=
            st.inversion_eulerian_payloads[k]) {
            bad << " criterion-3 payload " << k;
        }
    }
    for (int n : {50, 200, 1000}) {
        const auto one = normality_runs(n, 1, 10'000, 1);
        const auto four = normality_runs(n, 1, 10'000, 4);
        for (std::size_t k = 0; k < one.size(); ++k) {
            ++compared;
            if (canonical_dump(to_json(one[k])) != canonical_dump(to_json(four[k]))) {
                bad << " simulate(n=" << n << ",seed=" << one[k].seed << ")";
            }
        }
    }
    r.passed = bad.str().empty();
    r.detail = std::to_string(compared) + " payload pairs compared" +
               (r.passed ? "" : ", differing:" + bad.str());
    return r;
}

// Log-concavity of every table with n <= 9, 1 <= d <= n-1. Recorded only.
inline json log_concavity_findings(const options& opt) {
    json out = json::array();
    for (int n = 1; n <= 9; ++n) {
        for (int d = 1; d <= std::max(1, n - 1); ++d) {
            const auto t = exact_distribution(n, descent_spec::uniform(d), default_enumeration_limit,
                                              opt.workers);
            out.push_back({{"n", n}, {"d", d}, {"violations", log_concavity_report(t)}});
        }
    }
    return out;
}

using progress_sink = std::function<void(const criterion_result&)>;

inline std::vector<criterion_result> run_reproduction(const options& opt, shared_state& st,
                                                      const progress_sink& on_result = {}) {
    using check_fn = criterion_result (*)(const options&, shared_state&);
    const check_fn checks[] = {check_variance_formula, check_d1_variance,    check_oracles,
                               check_pair_classes,     check_degree_bound,   check_unimodality,
                               check_janson_scaling,   check_fixed_d_normality,
                               check_growing_d_normality, check_determinism};
    std::vector<criterion_result> results;
    for (auto check : checks) {
        const auto start = std::chrono::steady_clock::now();
        auto res = check(opt, st);
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (on_result) on_result(res);
        results.push_back(std::move(res));
    }
    st.log_concavity = log_concavity_findings(opt);
    return results;
}

inline std::string format_line(const criterion_result& r) {
    std::ostringstream os;
    os << (r.passed ? "[PASS] " : "[FAIL] ") << "criterion " << r.id << ": " << r.title << " -- "
       << r.detail << " (" << std::fixed;
    os.precision(2);
    os << r.seconds << "s)";
    return os.str();
}

inline json summary_json(const std::vector<criterion_result>& results, const shared_state& st) {
    json crit = json::array();
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
        crit.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail}});
    }
    return {{"all_passed", all},
            {"criteria", crit},
            {"log_concavity", st.log_concavity},
            {"max_degree_sweep", st.degree_sweep}};
}

} // namespace ddesc::reproduction
