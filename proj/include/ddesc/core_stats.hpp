#pragma once

// d-descent statistic and its closed-form moments.
//
// A pair of positions (i, j) is a d-descent of p when i < j <= i + d and
// p_i > p_j. With d = 1 this counts ordinary descents, with d >= n - 1 it
// counts inversions. The vector variant lets the reach depend on the left
// position: (i, j) is eligible when 0 < j - i <= d_i.
//
// All positions and values are 1-based at the public surface.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ddesc/errors.hpp"

namespace ddesc {

using big_int = boost::multiprecision::cpp_int;
using rational = boost::multiprecision::cpp_rational;

inline std::string to_string(const rational& q) {
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    if (denominator(q) == 1) {
        return numerator(q).str();
    }
    return numerator(q).str() + "/" + denominator(q).str();
}

class permutation {
public:
    permutation() = default;

    // Throws input_error unless values is a bijection onto {1..n}.
    explicit permutation(std::vector<int> values) : values_(std::move(values)) {
        if (values_.empty()) {
            throw input_error("permutation must have length >= 1");
        }
        std::vector<bool> seen(values_.size() + 1, false);
        for (int v : values_) {
            if (v < 1 || static_cast<std::size_t>(v) > values_.size() || seen[v]) {
                throw input_error("not a permutation of 1..n: offending value " +
                                  std::to_string(v));
            }
            seen[v] = true;
        }
    }

    static permutation identity(int n) {
        check_length(n);
        std::vector<int> v(n);
        std::iota(v.begin(), v.end(), 1);
        return permutation(unchecked{}, std::move(v));
    }

    static permutation reversal(int n) {
        check_length(n);
        std::vector<int> v(n);
        std::iota(v.rbegin(), v.rend(), 1);
        return permutation(unchecked{}, std::move(v));
    }

    // For callers that construct values they know to be valid (samplers,
    // enumerators).
    static permutation from_trusted(std::vector<int> values) {
        return permutation(unchecked{}, std::move(values));
    }

    int size() const { return static_cast<int>(values_.size()); }

    // p_pos, 1-based.
    int at(int pos) const {
        if (pos < 1 || pos > size()) {
            throw input_error("position " + std::to_string(pos) + " out of range 1.." +
                              std::to_string(size()));
        }
        return values_[pos - 1];
    }

    std::span<const int> values() const { return values_; }

    // p_i -> n + 1 - p_i. Maps a statistic value k to N - k.
    permutation complement() const {
        std::vector<int> v(values_);
        const int n1 = size() + 1;
        for (int& x : v) {
            x = n1 - x;
        }
        return permutation(unchecked{}, std::move(v));
    }

    friend bool operator==(const permutation&, const permutation&) = default;

private:
    struct unchecked {};
    permutation(unchecked, std::vector<int> values) : values_(std::move(values)) {}

    static void check_length(int n) {
        if (n < 1) {
            throw input_error("permutation length must be >= 1");
        }
    }

    std::vector<int> values_;
};

// Which position pairs are eligible.
class descent_spec {
public:
    struct uniform_t {
        int d;
        friend bool operator==(const uniform_t&, const uniform_t&) = default;
    };
    struct vector_t {
        std::vector<int> ds;
        friend bool operator==(const vector_t&, const vector_t&) = default;
    };

    static descent_spec uniform(int d) {
        if (d < 1) {
            throw input_error("uniform reach d must be >= 1, got " + std::to_string(d));
        }
        return descent_spec(uniform_t{d});
    }

    // ds[k] is the reach of position k + 1. Entries larger than n - i are
    // accepted and clamped when evaluated.
    static descent_spec vector(std::vector<int> ds) {
        for (int d : ds) {
            if (d < 1) {
                throw input_error("vector reach entries must be >= 1, got " +
                                  std::to_string(d));
            }
        }
        return descent_spec(vector_t{std::move(ds)});
    }

    bool is_uniform() const { return std::holds_alternative<uniform_t>(v_); }

    int uniform_d() const { return std::get<uniform_t>(v_).d; }
    const std::vector<int>& reaches() const { return std::get<vector_t>(v_).ds; }

    // Throws input_error if this spec cannot be paired with length n.
    void check_compatible(int n) const {
        if (n < 1) {
            throw input_error("n must be >= 1");
        }
        if (!is_uniform() && static_cast<int>(reaches().size()) != n - 1) {
            throw input_error("vector spec has length " + std::to_string(reaches().size()) +
                              " but permutation length " + std::to_string(n) +
                              " needs " + std::to_string(n - 1));
        }
    }

    // Effective reach of position i (1-based) in a length-n permutation,
    // clamped to n - i.
    int reach(int i, int n) const {
        const int raw = is_uniform() ? uniform_d() : reaches()[i - 1];
        return std::min(raw, n - i);
    }

    // Number of eligible pairs, which is also the largest attainable value.
    std::int64_t eligible_pairs(int n) const {
        check_compatible(n);
        std::int64_t total = 0;
        for (int i = 1; i < n; ++i) {
            total += reach(i, n);
        }
        return total;
    }

    // Vector spec with every reach clamped. Uniform(d) and
    // Vector(d, ..., d) have identical clamped forms.
    std::vector<int> clamped_reaches(int n) const {
        check_compatible(n);
        std::vector<int> out;
        out.reserve(n > 0 ? n - 1 : 0);
        for (int i = 1; i < n; ++i) {
            out.push_back(reach(i, n));
        }
        return out;
    }

    std::string describe() const {
        if (is_uniform()) {
            return "uniform(" + std::to_string(uniform_d()) + ")";
        }
        std::string s = "vector(";
        for (std::size_t k = 0; k < reaches().size(); ++k) {
            if (k) s += ",";
            s += std::to_string(reaches()[k]);
        }
        return s + ")";
    }

    friend bool operator==(const descent_spec&, const descent_spec&) = default;

private:
    explicit descent_spec(std::variant<uniform_t, vector_t> v) : v_(std::move(v)) {}
    std::variant<uniform_t, vector_t> v_;
};

struct pair_index {
    int i;
    int j;
    friend auto operator<=>(const pair_index&, const pair_index&) = default;
};

enum class pair_class { equal, aligned, crossed, independent };

inline const char* to_string(pair_class c) {
    switch (c) {
    case pair_class::equal: return "equal";
    case pair_class::aligned: return "aligned";
    case pair_class::crossed: return "crossed";
    case pair_class::independent: return "independent";
    }
    return "?";
}

// E(X_a X_b) for two pair indicators in the given relation.
inline rational expectation(pair_class c) {
    switch (c) {
    case pair_class::equal: return rational(1, 2);
    case pair_class::aligned: return rational(1, 3);
    case pair_class::crossed: return rational(1, 6);
    case pair_class::independent: return rational(1, 4);
    }
    throw std::logic_error("unknown pair_class");
}

inline void check_pair(const pair_index& pr, int n) {
    if (!(1 <= pr.i && pr.i < pr.j && pr.j <= n)) {
        throw input_error("pair (" + std::to_string(pr.i) + "," + std::to_string(pr.j) +
                          ") violates 1 <= i < j <= " + std::to_string(n));
    }
}

// Raw indicator p_i > p_j. Eligibility is the caller's business.
inline bool is_descent_pair(const permutation& p, pair_index pr) {
    check_pair(pr, p.size());
    return p.at(pr.i) > p.at(pr.j);
}

// Scan with precomputed clamped reaches: reach[k] belongs to position k + 1.
inline std::int64_t scan_count(std::span<const int> v, std::span<const int> reach) {
    std::int64_t count = 0;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t last = i + static_cast<std::size_t>(reach[i]);
        const int pi = v[i];
        for (std::size_t j = i + 1; j <= last; ++j) {
            count += pi > v[j];
        }
    }
    return count;
}

// Reference O(n * d) scan over all eligible pairs.
inline std::int64_t count_statistic(const permutation& p, const descent_spec& spec) {
    const int n = p.size();
    spec.check_compatible(n);
    const auto v = p.values();
    std::int64_t count = 0;
    for (int i = 1; i < n; ++i) {
        const int last = i + spec.reach(i, n);
        const int pi = v[i - 1];
        for (int j = i + 1; j <= last; ++j) {
            count += pi > v[j - 1];
        }
    }
    return count;
}

// Uniform(d) statistic in O(n log n) with a Fenwick tree over the values of
// the sliding window p_{j-d} .. p_{j-1}. Reuses its buffer between calls.
class window_counter {
public:
    std::int64_t operator()(std::span<const int> v, int d) {
        const int n = static_cast<int>(v.size());
        if (d < 1) {
            throw input_error("d must be >= 1");
        }
        tree_.assign(n + 1, 0);
        std::int64_t count = 0;
        int in_window = 0;
        for (int j = 0; j < n; ++j) {
            if (j - d - 1 >= 0) {
                add(v[j - d - 1], -1, n);
                --in_window;
            }
            // window members greater than v[j]
            count += in_window - prefix(v[j]);
            add(v[j], 1, n);
            ++in_window;
        }
        return count;
    }

private:
    void add(int pos, int delta, int n) {
        for (; pos <= n; pos += pos & -pos) {
            tree_[pos] += delta;
        }
    }
    int prefix(int pos) const {
        int s = 0;
        for (; pos > 0; pos -= pos & -pos) {
            s += tree_[pos];
        }
        return s;
    }

    std::vector<int> tree_;
};

// N_n = |{(i, j) : i < j <= min(i + d, n)}|. For d >= n - 1 this is C(n, 2).
inline std::int64_t eligible_pair_count(std::int64_t n, std::int64_t d) {
    if (n < 1) {
        throw input_error("n must be >= 1");
    }
    if (d < 1) {
        throw input_error("d must be >= 1");
    }
    if (d >= n - 1) {
        return n * (n - 1) / 2;
    }
    return (n - d) * d + d * (d - 1) / 2;
}

inline void require_closed_form_regime(std::int64_t n, std::int64_t d) {
    if (d < 1) {
        throw input_error("d must be >= 1");
    }
    if (n < 2 * d) {
        throw unsupported_regime_error("closed form requires n >= 2d (n=" + std::to_string(n) +
                                       ", d=" + std::to_string(d) + ")");
    }
}

// Ordered pairs (k1, k2) of eligible pairs, tallied by relation.
struct pair_class_tally {
    big_int equal;
    big_int aligned;
    big_int crossed;
    big_int independent;

    big_int total() const { return equal + aligned + crossed + independent; }

    // sum of E(X_k1 X_k2) over all ordered pairs, minus (E X)^2
    rational implied_variance() const {
        return rational(equal) / 2 + rational(aligned) / 3 + rational(crossed) / 6 +
               rational(independent) / 4 - rational(total()) / 4;
    }

    friend bool operator==(const pair_class_tally&, const pair_class_tally&) = default;
};

namespace detail {

inline pair_class_tally tally_with_crossed(std::int64_t n, std::int64_t d, const big_int& crossed) {
    const big_int nn = n;
    const big_int dd = d;
    const big_int pairs = eligible_pair_count(n, d);
    const big_int d_choose_3 = dd * (dd - 1) * (dd - 2) / 6;
    pair_class_tally t;
    t.equal = pairs;
    t.aligned = 2 * (nn - dd) * dd * (dd - 1) + 4 * d_choose_3;
    t.crossed = crossed;
    t.independent = pairs * pairs - t.equal - t.aligned - t.crossed;
    return t;
}

} // namespace detail

// Class counts as originally stated:
//   equal   = N
//   aligned = 2(n-d)d(d-1) + 4 C(d,3)
//   crossed = 2(n-2d)d^2 + d^2(d-1)
// The crossed count misses half of the boundary terms; it is short by
// d^2(d-1) whenever d >= 2. exact_pair_class_counts has the true tally.
inline pair_class_tally pair_class_counts(std::int64_t n, std::int64_t d) {
    require_closed_form_regime(n, d);
    const big_int nn = n;
    const big_int dd = d;
    return detail::tally_with_crossed(n, d, 2 * (nn - 2 * dd) * dd * dd + dd * dd * (dd - 1));
}

// True tally for n >= 2d. A crossed pair is (i, j), (j, s) in either order;
// summing min(d, j-1) * min(d, n-j) over the middle index j gives
// 2(n-2d)d^2 + 2d^2(d-1) ordered pairs.
inline pair_class_tally exact_pair_class_counts(std::int64_t n, std::int64_t d) {
    require_closed_form_regime(n, d);
    const big_int nn = n;
    const big_int dd = d;
    return detail::tally_with_crossed(n, d, 2 * (nn - 2 * dd) * dd * dd + 2 * dd * dd * (dd - 1));
}

// Relation between two eligible pairs (i, j) and (r, s).
inline pair_class classify_pair(pair_index a, pair_index b) {
    if (a.i >= a.j || b.i >= b.j || a.i < 1 || b.i < 1) {
        throw input_error("classify_pair needs pairs with 1 <= i < j");
    }
    if (a == b) {
        return pair_class::equal;
    }
    const bool aligned = a.i == b.i || a.j == b.j;
    const bool crossed = a.i == b.j || a.j == b.i;
    if (aligned && crossed) {
        // unreachable for pairs with i < j
        throw std::logic_error("pair relation is both aligned and crossed");
    }
    if (aligned) return pair_class::aligned;
    if (crossed) return pair_class::crossed;
    return pair_class::independent;
}

inline rational mean_closed_form(std::int64_t n, std::int64_t d) {
    return rational(big_int(eligible_pair_count(n, d)), big_int(2));
}

// (6dn + 10d^3 - 3d^2 - d) / 72 for n >= 2d, the closed form as originally
// stated. It follows from pair_class_counts and inherits its crossed-pair
// shortfall: it exceeds the true variance by d^2(d-1)/12. Exact for d = 1.
inline rational variance_closed_form(std::int64_t n, std::int64_t d) {
    require_closed_form_regime(n, d);
    const big_int nn = n;
    const big_int dd = d;
    const big_int num = 6 * dd * nn + 10 * dd * dd * dd - 3 * dd * dd - dd;
    return rational(num, big_int(72));
}

// True variance (6dn + 4d^3 + 3d^2 - d) / 72 for n >= 2d, i.e.
// N/4 + (aligned - crossed)/12 with the exact class counts.
inline rational exact_variance(std::int64_t n, std::int64_t d) {
    require_closed_form_regime(n, d);
    const big_int nn = n;
    const big_int dd = d;
    const big_int num = 6 * dd * nn + 4 * dd * dd * dd + 3 * dd * dd - dd;
    return rational(num, big_int(72));
}

// max(1, floor(n^(1 - epsilon))), nudged onto the integer when pow() lands
// a hair below an exact power (10000^0.5 must give 100).
inline std::int64_t power_law_reach(std::int64_t n, double epsilon) {
    if (!(epsilon > 0 && epsilon < 1)) {
        throw input_error("epsilon must lie in (0, 1)");
    }
    const double raw = std::pow(static_cast<double>(n), 1.0 - epsilon);
    const double nearest = std::round(raw);
    const double fl =
        std::abs(raw - nearest) <= 1e-9 * std::max(1.0, nearest) ? nearest : std::floor(raw);
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(fl));
}

} // namespace ddesc
