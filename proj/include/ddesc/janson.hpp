#pragma once

// Dependency graph of the d-descent indicators and the quantity
//
//     N * Delta^(m-1) * (A / sigma)^m
//
// whose vanishing gives asymptotic normality under Janson's criterion. Two
// indicators are joined when their position pairs share an index; pairs
// with disjoint index sets are independent, so every vertex has at most
// 4d neighbours. A = 1 because each indicator lies in [0, 1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ddesc/core_stats.hpp"
#include "ddesc/exact_dist.hpp"
#include "ddesc/errors.hpp"

namespace ddesc {

inline constexpr std::int64_t default_graph_guard = 1'000'000;
// total adjacency entries allowed, independent of the vertex guard
inline constexpr std::int64_t graph_edge_guard = 64'000'000;

struct dependency_graph {
    int n = 0;
    int d = 0;
    std::vector<pair_index> vertices;
    std::vector<std::vector<int>> adjacency;  // sorted neighbour indices
};

inline dependency_graph build_dependency_graph(int n, int d,
                                               std::int64_t guard = default_graph_guard) {
    if (n < 2 || d < 1 || d > n - 1) {
        throw input_error("dependency graph needs 1 <= d <= n - 1 (n=" + std::to_string(n) +
                          ", d=" + std::to_string(d) + ")");
    }
    const std::int64_t pairs = eligible_pair_count(n, d);
    const std::int64_t degree_cap = std::min<std::int64_t>(4LL * d - 2, 2LL * n);
    if (pairs > guard || pairs * std::max<std::int64_t>(degree_cap, 1) > graph_edge_guard) {
        throw capacity_error("dependency graph with " + std::to_string(pairs) +
                             " vertices exceeds the guard of " + std::to_string(guard));
    }

    // offset[i] = index of (i, i + 1)
    std::vector<std::int64_t> offset(n + 1, 0);
    for (int i = 1; i < n; ++i) offset[i + 1] = offset[i] + std::min(d, n - i);
    auto index_of = [&](int i, int j) { return static_cast<int>(offset[i] + (j - i - 1)); };

    dependency_graph g;
    g.n = n;
    g.d = d;
    g.vertices.reserve(pairs);
    for (int i = 1; i < n; ++i) {
        for (int j = i + 1; j <= std::min(i + d, n); ++j) g.vertices.push_back({i, j});
    }

    g.adjacency.resize(g.vertices.size());
    std::vector<int> scratch;
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
        const auto [i, j] = g.vertices[v];
        scratch.clear();
        for (int x : {i, j}) {
            for (int r = std::max(1, x - d); r < x; ++r) scratch.push_back(index_of(r, x));
            for (int s = x + 1; s <= std::min(x + d, n); ++s) scratch.push_back(index_of(x, s));
        }
        std::sort(scratch.begin(), scratch.end());
        scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
        scratch.erase(std::remove(scratch.begin(), scratch.end(), static_cast<int>(v)),
                      scratch.end());
        g.adjacency[v] = scratch;
    }
    return g;
}

inline int max_degree(const dependency_graph& g) {
    std::size_t best = 0;
    for (const auto& nb : g.adjacency) best = std::max(best, nb.size());
    return static_cast<int>(best);
}

struct janson_certificate {
    int n = 0;
    int d = 0;
    int m = 0;
    std::int64_t pairs = 0;            // N_n
    std::int64_t delta_bound = 0;      // 4d
    std::optional<int> delta_exact;    // from the materialized graph
    std::int64_t delta_used = 0;
    bool analytic_delta = true;        // true when delta_used is 4d
    int a_bound = 1;                   // A_n
    rational sigma_sq;                 // true variance
    rational sigma_sq_published;       // variance_closed_form, for comparison
    double bound_value = 0;
    double simplified_bound = 0;       // (dn)(4d)^(m-1)(12/(dn))^(m/2)
};

inline janson_certificate janson_bound(int n, int d, int m, bool use_exact_degree = false,
                                       std::int64_t guard = default_graph_guard) {
    if (m < 1) throw input_error("m must be >= 1");
    require_closed_form_regime(n, d);

    janson_certificate c;
    c.n = n;
    c.d = d;
    c.m = m;
    c.pairs = eligible_pair_count(n, d);
    c.delta_bound = 4LL * d;
    c.delta_used = c.delta_bound;
    c.sigma_sq = exact_variance(n, d);
    c.sigma_sq_published = variance_closed_form(n, d);

    if (use_exact_degree) {
        try {
            c.delta_exact = max_degree(build_dependency_graph(n, d, guard));
            c.delta_used = *c.delta_exact;
            c.analytic_delta = false;
        } catch (const capacity_error&) {
            // above the guard: keep 4d, flagged by analytic_delta
        }
    }

    // log space: the magnitudes span many decades
    const double log_sigma_sq = std::log(static_cast<double>(c.sigma_sq));
    const double log_delta = c.delta_used > 0 ? std::log(static_cast<double>(c.delta_used))
                                              : -HUGE_VAL;
    const double log_bound = std::log(static_cast<double>(c.pairs)) +
                             (m == 1 ? 0.0 : (m - 1) * log_delta) +
                             m * std::log(static_cast<double>(c.a_bound)) -
                             0.5 * m * log_sigma_sq;
    c.bound_value = std::exp(log_bound);

    const double dn = static_cast<double>(d) * n;
    c.simplified_bound = std::exp(std::log(dn) + (m - 1) * std::log(4.0 * d) +
                                  0.5 * m * std::log(12.0 / dn));
    return c;
}

// Smallest integer m with (m / 2) * epsilon > 1.
inline int auto_moment_order(double epsilon) {
    if (!(epsilon > 0 && epsilon < 1)) throw input_error("epsilon must lie in (0, 1)");
    int m = static_cast<int>(std::floor(2.0 / epsilon)) + 1;
    while (m > 1 && (m - 1) * epsilon / 2 > 1) --m;
    while (m * epsilon / 2 <= 1) ++m;
    return m;
}

struct fixed_reach {
    int d;
};
struct power_reach {
    double epsilon;
};
using reach_rule = std::variant<fixed_reach, power_reach>;

struct convergence_row {
    int n = 0;
    int d = 0;
    std::optional<janson_certificate> certificate;
    std::string warning;
};

struct convergence_result {
    int m = 0;
    std::vector<convergence_row> rows;
};

// m = 0 means auto: for power_reach the smallest m with (m/2) eps > 1,
// for fixed_reach m = 3.
inline convergence_result convergence_table(const reach_rule& rule, int m,
                                            const std::vector<int>& n_schedule) {
    convergence_result out;
    if (m == 0) {
        m = std::holds_alternative<power_reach>(rule)
                ? auto_moment_order(std::get<power_reach>(rule).epsilon)
                : 3;
    }
    out.m = m;
    for (int n : n_schedule) {
        convergence_row row;
        row.n = n;
        if (const auto* f = std::get_if<fixed_reach>(&rule)) {
            row.d = f->d;
        } else {
            row.d = static_cast<int>(power_law_reach(n, std::get<power_reach>(rule).epsilon));
        }
        if (row.d < 1 || n < 2 * row.d) {
            row.warning = "skipped: n=" + std::to_string(n) + " violates n >= 2d with d=" +
                          std::to_string(row.d);
        } else {
            row.certificate = janson_bound(n, row.d, m);
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

struct audit_entry {
    pair_index a;
    pair_index b;
    pair_class relation;
    rational joint;  // E(X_a X_b) over S_n
};

struct audit_report {
    bool passed = true;
    std::vector<audit_entry> entries;
    std::vector<std::string> failures;
};

// Exhaustive check over S_n that disjoint pairs have product joint laws and
// overlapping pairs have E(X_a X_b) as their relation predicts.
inline audit_report independence_audit(int n, int d, int enumeration_limit = 8) {
    if (n < 2 || d < 1) throw input_error("independence audit needs n >= 2, d >= 1");
    if (n > enumeration_limit) {
        throw capacity_error("n=" + std::to_string(n) + " exceeds the audit enumeration limit of " +
                             std::to_string(enumeration_limit));
    }
    std::vector<pair_index> pairs;
    for (int i = 1; i < n; ++i) {
        for (int j = i + 1; j <= std::min(i + d, n); ++j) pairs.push_back({i, j});
    }
    const std::size_t np = pairs.size();

    // joint[a][b][x][y] = #{p : X_a = x, X_b = y}
    std::vector<std::int64_t> joint(np * np * 4, 0);
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 1);
    std::vector<int> bits(np);
    std::int64_t total = 0;
    do {
        ++total;
        for (std::size_t a = 0; a < np; ++a) bits[a] = p[pairs[a].i - 1] > p[pairs[a].j - 1];
        for (std::size_t a = 0; a < np; ++a) {
            for (std::size_t b = 0; b < np; ++b) ++joint[((a * np + b) << 2) | (bits[a] << 1) | bits[b]];
        }
    } while (std::next_permutation(p.begin(), p.end()));

    audit_report rep;
    auto cell = [&](std::size_t a, std::size_t b, int x, int y) {
        return rational(big_int(joint[((a * np + b) << 2) | (x << 1) | y]), big_int(total));
    };
    for (std::size_t a = 0; a < np; ++a) {
        for (std::size_t b = 0; b < np; ++b) {
            const pair_class rel = classify_pair(pairs[a], pairs[b]);
            const rational e11 = cell(a, b, 1, 1);
            rep.entries.push_back({pairs[a], pairs[b], rel, e11});
            bool ok = true;
            if (rel == pair_class::independent) {
                for (int x = 0; x < 2; ++x) {
                    for (int y = 0; y < 2; ++y) {
                        const rational pa = cell(a, b, x, 0) + cell(a, b, x, 1);
                        const rational pb = cell(a, b, 0, y) + cell(a, b, 1, y);
                        ok = ok && cell(a, b, x, y) == pa * pb;
                    }
                }
            } else {
                ok = e11 == expectation(rel);
            }
            if (!ok) {
                rep.passed = false;
                rep.failures.push_back("(" + std::to_string(pairs[a].i) + "," +
                                       std::to_string(pairs[a].j) + ") vs (" +
                                       std::to_string(pairs[b].i) + "," +
                                       std::to_string(pairs[b].j) + "): " + to_string(rel) +
                                       " but E = " + to_string(e11));
            }
        }
    }
    return rep;
}

} // namespace ddesc
