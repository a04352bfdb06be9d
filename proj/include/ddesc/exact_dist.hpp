#pragma once

// Exact distributions c_0..c_K of the d-descent statistic over S_n.
//
// exact_distribution enumerates every permutation. The work is split into
// n * (n - 1) disjoint branches keyed by the first two values; workers pull
// branch indices from a shared counter and the per-branch count vectors are
// summed in branch order, so the table never depends on the worker count.
// Inside a branch a depth-first search places one value per position and
// adds the eligible comparisons against already-placed positions, which
// equals the reference rescan (count_statistic) at every leaf.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "ddesc/core_stats.hpp"

namespace ddesc {

inline constexpr int default_enumeration_limit = 12;
// Branch counts are accumulated in 64-bit words and the DFS uses a 32-bit
// value mask; 20! still fits in 64 bits.
inline constexpr int hard_enumeration_ceiling = 20;

struct distribution_table {
    int n = 1;
    descent_spec spec = descent_spec::uniform(1);
    std::vector<big_int> counts;

    // K, the largest statistic value represented.
    int max_value() const { return static_cast<int>(counts.size()) - 1; }

    big_int total() const {
        big_int s = 0;
        for (const auto& c : counts) s += c;
        return s;
    }

    friend bool operator==(const distribution_table&, const distribution_table&) = default;
};

inline big_int factorial(int n) {
    big_int f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

inline unsigned resolve_workers(unsigned workers) {
    if (workers != 0) return workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

class branch_enumerator {
public:
    branch_enumerator(int n, const std::vector<std::vector<int>>& partners, std::size_t k_max)
        : n_(n), partners_(partners), vals_(n, 0), counts_(k_max + 1, 0) {}

    // Enumerates every permutation whose first positions hold `prefix`.
    std::vector<std::uint64_t> run(const std::vector<int>& prefix) {
        std::fill(counts_.begin(), counts_.end(), 0);
        used_ = 0;
        int stat = 0;
        for (int pos = 0; pos < static_cast<int>(prefix.size()); ++pos) {
            stat += place_cost(pos, prefix[pos]);
            vals_[pos] = prefix[pos];
            used_ |= 1u << prefix[pos];
        }
        descend(static_cast<int>(prefix.size()), stat);
        return counts_;
    }

private:
    int place_cost(int pos, int v) const {
        int add = 0;
        for (int i : partners_[pos]) add += vals_[i] > v;
        return add;
    }

    void descend(int pos, int stat) {
        if (pos == n_) {
            ++counts_[stat];
            return;
        }
        for (int v = 1; v <= n_; ++v) {
            if (used_ & (1u << v)) continue;
            const int add = place_cost(pos, v);
            vals_[pos] = v;
            used_ |= 1u << v;
            descend(pos + 1, stat + add);
            used_ &= ~(1u << v);
        }
    }

    int n_;
    const std::vector<std::vector<int>>& partners_;
    std::vector<int> vals_;
    std::uint32_t used_ = 0;
    std::vector<std::uint64_t> counts_;
};

} // namespace detail

// counts[k] = |{p in S_n : statistic(p) = k}|.
//
// workers = 0 uses the hardware concurrency. Throws capacity_error when
// n > enumeration_limit.
inline distribution_table exact_distribution(int n, const descent_spec& spec,
                                             int enumeration_limit = default_enumeration_limit,
                                             unsigned workers = 0) {
    spec.check_compatible(n);
    if (enumeration_limit < 1) {
        throw input_error("enumeration limit must be >= 1");
    }
    if (n > enumeration_limit || n > hard_enumeration_ceiling) {
        throw capacity_error("n=" + std::to_string(n) + " exceeds the enumeration limit of " +
                             std::to_string(std::min(enumeration_limit, hard_enumeration_ceiling)));
    }

    const auto k_max = static_cast<std::size_t>(spec.eligible_pairs(n));

    // partners[j]: 0-based positions i < j with (i+1, j+1) eligible
    std::vector<std::vector<int>> partners(n);
    for (int i = 1; i < n; ++i) {
        const int last = i + spec.reach(i, n);
        for (int j = i + 1; j <= last; ++j) {
            partners[j - 1].push_back(i - 1);
        }
    }

    std::vector<std::vector<int>> prefixes;
    if (n == 1) {
        prefixes.push_back({});
    } else {
        for (int a = 1; a <= n; ++a) {
            for (int b = 1; b <= n; ++b) {
                if (a != b) prefixes.push_back({a, b});
            }
        }
    }

    std::vector<std::vector<std::uint64_t>> partial(prefixes.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        detail::branch_enumerator e(n, partners, k_max);
        for (std::size_t b = next++; b < prefixes.size(); b = next++) {
            partial[b] = e.run(prefixes[b]);
        }
    };

    const unsigned nworkers =
        std::min<unsigned>(resolve_workers(workers), static_cast<unsigned>(prefixes.size()));
    if (nworkers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(nworkers);
        for (unsigned w = 0; w < nworkers; ++w) pool.emplace_back(work);
    }

    std::vector<std::uint64_t> merged(k_max + 1, 0);
    for (const auto& part : partial) {
        for (std::size_t k = 0; k < merged.size(); ++k) merged[k] += part[k];
    }

    distribution_table t{n, spec, {}};
    t.counts.reserve(merged.size());
    for (auto c : merged) t.counts.emplace_back(c);
    return t;
}

// Coefficients of (1 + x)(1 + x + x^2) ... (1 + x + ... + x^{n-1}).
inline distribution_table oracle_inversions(int n) {
    if (n < 1) throw input_error("n must be >= 1");
    std::vector<big_int> poly{1};
    for (int m = 2; m <= n; ++m) {
        // multiply by 1 + x + ... + x^{m-1}
        std::vector<big_int> next(poly.size() + m - 1, 0);
        for (std::size_t a = 0; a < poly.size(); ++a) {
            for (int b = 0; b < m; ++b) next[a + b] += poly[a];
        }
        poly = std::move(next);
    }
    return {n, descent_spec::uniform(std::max(1, n - 1)), std::move(poly)};
}

// Eulerian numbers A(n, k) = (k + 1) A(n-1, k) + (n - k) A(n-1, k-1).
inline distribution_table oracle_eulerian(int n) {
    if (n < 1) throw input_error("n must be >= 1");
    std::vector<big_int> row{1};
    for (int m = 2; m <= n; ++m) {
        std::vector<big_int> next(m, 0);
        for (int k = 0; k < m; ++k) {
            if (k < static_cast<int>(row.size())) next[k] += (k + 1) * row[k];
            if (k >= 1) next[k] += (m - k) * row[k - 1];
        }
        row = std::move(next);
    }
    return {n, descent_spec::uniform(1), std::move(row)};
}

enum class moment_source { closed_form, from_table, empirical };

inline const char* to_string(moment_source s) {
    switch (s) {
    case moment_source::closed_form: return "closed_form";
    case moment_source::from_table: return "from_table";
    case moment_source::empirical: return "empirical";
    }
    return "?";
}

struct moment_report {
    rational mean;
    rational variance;
    moment_source source = moment_source::closed_form;
};

// Mean N/2 and the true variance, for n >= 2d.
inline moment_report closed_form_moments(std::int64_t n, std::int64_t d) {
    return {mean_closed_form(n, d), exact_variance(n, d), moment_source::closed_form};
}

inline moment_report moments_from_table(const distribution_table& t) {
    big_int total = 0, first = 0, second = 0;
    for (std::size_t k = 0; k < t.counts.size(); ++k) {
        const auto& c = t.counts[k];
        total += c;
        first += c * k;
        second += c * k * k;
    }
    if (total == 0) throw input_error("empty distribution table");
    const rational mean(first, total);
    const rational variance = rational(second, total) - mean * mean;
    return {mean, variance, moment_source::from_table};
}

// True iff c_0 <= ... <= c_m >= ... >= c_K for some m.
inline bool unimodality_check(const std::vector<big_int>& c) {
    std::size_t k = 1;
    while (k < c.size() && c[k - 1] <= c[k]) ++k;
    while (k < c.size() && c[k - 1] >= c[k]) ++k;
    return k >= c.size();
}

inline bool unimodality_check(const distribution_table& t) { return unimodality_check(t.counts); }

// Indices k with c_{k-1} c_{k+1} > c_k^2. Empty means log-concave.
inline std::vector<int> log_concavity_report(const std::vector<big_int>& c) {
    std::vector<int> violations;
    for (std::size_t k = 1; k + 1 < c.size(); ++k) {
        if (c[k - 1] * c[k + 1] > c[k] * c[k]) violations.push_back(static_cast<int>(k));
    }
    return violations;
}

inline std::vector<int> log_concavity_report(const distribution_table& t) {
    return log_concavity_report(t.counts);
}

// Structural invariants every enumerated table satisfies. Returns a list of
// human-readable problems, empty when the table is consistent.
inline std::vector<std::string> table_problems(const distribution_table& t) {
    std::vector<std::string> out;
    if (t.total() != factorial(t.n)) out.push_back("sum of counts != n!");
    if (t.max_value() != t.spec.eligible_pairs(t.n)) out.push_back("K != eligible pair count");
    if (t.counts.empty() || t.counts.back() < 1) out.push_back("c_K < 1");
    for (std::size_t k = 0; k < t.counts.size(); ++k) {
        if (t.counts[k] != t.counts[t.counts.size() - 1 - k]) {
            out.push_back("asymmetric at k=" + std::to_string(k));
            break;
        }
    }
    return out;
}

} // namespace ddesc
