#pragma once

// Monte Carlo normality diagnostics for the standardized d-descent count.
//
// Sampling is split into fixed-size chunks. Chunk c draws from a
// std::mt19937_64 seeded with chunk_seed(seed, c), so the sample stream is
// a function of (seed, trials) only. Each chunk produces a histogram of raw
// statistic values; histograms are merged by integer addition, and every
// reported number is computed from the merged histogram. Reports are
// therefore bit-identical for any worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ddesc/core_stats.hpp"
#include "ddesc/exact_dist.hpp"

namespace ddesc {

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream derivation rule: h(seed, c) = mix64(seed + 0x9e3779b97f4a7c15 * (c + 1)).
inline std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk_index) {
    return mix64(seed + 0x9e3779b97f4a7c15ULL * (chunk_index + 1));
}

using rng_engine = std::mt19937_64;

// Unbiased draw from [0, bound) by rejection; portable across standard
// libraries, unlike std::uniform_int_distribution. One engine draw except
// with probability < bound / 2^64.
inline std::uint64_t bounded_draw(rng_engine& g, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = g();
        if (r >= threshold) return r % bound;
    }
}

// Decreasing-index swap shuffle of v in place: for i = n-1 down to 1, swap
// v[i] with v[bounded_draw(i + 1)]. Consumes n - 1 bounded draws.
inline void shuffle_in_place(std::span<int> v, rng_engine& g) {
    for (std::size_t i = v.size(); i-- > 1;) {
        const auto j = static_cast<std::size_t>(bounded_draw(g, i + 1));
        std::swap(v[i], v[j]);
    }
}

inline permutation sample_permutation(int n, rng_engine& g) {
    if (n < 1) throw input_error("n must be >= 1");
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 1);
    shuffle_in_place(v, g);
    return permutation::from_trusted(std::move(v));
}

// Phi(x) = erfc(-x / sqrt(2)) / 2. glibc's erfc is accurate to a few ulp,
// which keeps the absolute error far below 1e-7 over the whole real line.
inline double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Two-sided KS distance between weighted atoms and Phi. xs must be
// strictly increasing; counts are multiplicities.
inline double ks_statistic_atoms(std::span<const double> xs, std::span<const std::int64_t> counts) {
    if (xs.empty() || xs.size() != counts.size()) {
        throw input_error("ks_statistic needs a non-empty sample");
    }
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    const auto t = static_cast<double>(total);
    double d = 0;
    std::int64_t below = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k > 0 && !(xs[k - 1] < xs[k])) {
            throw input_error("ks_statistic atoms must be strictly increasing");
        }
        const double phi = standard_normal_cdf(xs[k]);
        const std::int64_t upto = below + counts[k];
        d = std::max({d, std::abs(static_cast<double>(upto) / t - phi),
                      std::abs(phi - static_cast<double>(below) / t)});
        below = upto;
    }
    return d;
}

// KS distance for sorted samples. Ties are collapsed into one atom so that
// lattice data jump by their full multiplicity.
inline double ks_statistic(std::span<const double> sorted) {
    if (sorted.empty()) throw input_error("ks_statistic needs at least one sample");
    std::vector<double> xs;
    std::vector<std::int64_t> counts;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        if (k > 0 && sorted[k] < sorted[k - 1]) {
            throw input_error("ks_statistic samples must be sorted");
        }
        if (!xs.empty() && xs.back() == sorted[k]) {
            ++counts.back();
        } else {
            xs.push_back(sorted[k]);
            counts.push_back(1);
        }
    }
    return ks_statistic_atoms(xs, counts);
}

struct simulation_config {
    int n = 2;
    descent_spec spec = descent_spec::uniform(1);
    std::int64_t trials = 1;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    // used only when the closed-form variance does not apply
    int enumeration_limit = default_enumeration_limit;
    bool keep_samples = false;
};

inline constexpr std::int64_t simulation_chunk_size = 4096;

struct normality_report {
    int n = 0;
    descent_spec spec = descent_spec::uniform(1);
    std::int64_t trials = 0;
    std::uint64_t seed = 0;

    double empirical_mean = 0;      // raw statistic
    double empirical_variance = 0;  // raw statistic, population form
    moment_report sample_moments;   // the same two quantities, exact
    double ks_statistic = 0;        // standardized values vs Phi
    double skewness = 0;
    double excess_kurtosis = 0;

    rational mu;                    // standardization mean
    rational sigma_sq;              // standardization variance
    double sigma = 0;
    moment_source sigma_source = moment_source::closed_form;

    // KS cannot go much below the largest lattice jump of the standardized
    // statistic; approximated by the normal peak density 1 / (sigma sqrt(2 pi)).
    double lattice_floor = 0;

    std::map<std::int64_t, std::int64_t> histogram;  // raw value -> count
    std::vector<double> standardized;                // only if keep_samples
};

// Exact mean and variance used to standardize. Closed forms when
// available, else the enumerated table within the limit, else refuse.
inline moment_report standardization_moments(int n, const descent_spec& spec,
                                             int enumeration_limit, unsigned workers = 1) {
    spec.check_compatible(n);
    if (spec.is_uniform() && n >= 2 * static_cast<std::int64_t>(spec.uniform_d())) {
        return closed_form_moments(n, spec.uniform_d());
    }
    if (n <= enumeration_limit) {
        return moments_from_table(exact_distribution(n, spec, enumeration_limit, workers));
    }
    throw unsupported_regime_error(
        "no closed-form variance for " + spec.describe() + " at n=" + std::to_string(n) +
        ", and n exceeds the enumeration limit " + std::to_string(enumeration_limit));
}

namespace detail {

inline std::map<std::int64_t, std::int64_t> run_chunk(int n, const descent_spec& spec,
                                                       std::uint64_t seed, std::int64_t chunk,
                                                       std::int64_t count) {
    rng_engine g(chunk_seed(seed, static_cast<std::uint64_t>(chunk)));
    std::vector<int> v(n);
    const std::vector<int> reach = spec.clamped_reaches(n);
    // the Fenwick path wins once the window is wide
    const bool use_window = spec.is_uniform() && spec.uniform_d() > 32;
    window_counter window;
    std::map<std::int64_t, std::int64_t> hist;
    for (std::int64_t t = 0; t < count; ++t) {
        std::iota(v.begin(), v.end(), 1);
        shuffle_in_place(v, g);
        const std::int64_t x = use_window ? window(v, spec.uniform_d()) : scan_count(v, reach);
        ++hist[x];
    }
    return hist;
}

} // namespace detail

inline normality_report simulate(const simulation_config& cfg) {
    cfg.spec.check_compatible(cfg.n);
    if (cfg.trials < 1) throw input_error("trials must be >= 1");
    if (cfg.workers < 1) throw input_error("workers must be >= 1");

    const moment_report target = standardization_moments(cfg.n, cfg.spec, cfg.enumeration_limit);
    if (target.variance <= 0) {
        throw input_error("degenerate statistic (zero variance) at n=" + std::to_string(cfg.n));
    }

    const std::int64_t chunks = (cfg.trials + simulation_chunk_size - 1) / simulation_chunk_size;
    std::vector<std::map<std::int64_t, std::int64_t>> partial(chunks);
    std::atomic<std::int64_t> next{0};
    auto work = [&] {
        for (std::int64_t c = next++; c < chunks; c = next++) {
            const std::int64_t count =
                std::min(simulation_chunk_size, cfg.trials - c * simulation_chunk_size);
            partial[c] = detail::run_chunk(cfg.n, cfg.spec, cfg.seed, c, count);
        }
    };
    const auto nworkers = static_cast<std::int64_t>(std::min<std::int64_t>(cfg.workers, chunks));
    if (nworkers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::int64_t w = 0; w < nworkers; ++w) pool.emplace_back(work);
    }

    normality_report r;
    r.n = cfg.n;
    r.spec = cfg.spec;
    r.trials = cfg.trials;
    r.seed = cfg.seed;
    for (const auto& part : partial) {
        for (const auto& [x, c] : part) r.histogram[x] += c;
    }

    big_int sum = 0, sum_sq = 0;
    for (const auto& [x, c] : r.histogram) {
        sum += big_int(x) * c;
        sum_sq += big_int(x) * x * c;
    }
    const rational mean(sum, big_int(cfg.trials));
    r.sample_moments = {mean, rational(sum_sq, big_int(cfg.trials)) - mean * mean,
                        moment_source::empirical};
    r.empirical_mean = static_cast<double>(r.sample_moments.mean);
    r.empirical_variance = static_cast<double>(r.sample_moments.variance);

    r.mu = target.mean;
    r.sigma_sq = target.variance;
    r.sigma_source = target.source;
    r.sigma = std::sqrt(static_cast<double>(target.variance));
    const double mu = static_cast<double>(target.mean);
    r.lattice_floor = 1.0 / (r.sigma * std::sqrt(2.0 * M_PI));

    std::vector<double> xs;
    std::vector<std::int64_t> counts;
    double m3 = 0, m4 = 0;
    const double t = static_cast<double>(cfg.trials);
    for (const auto& [x, c] : r.histogram) {
        const double z = (static_cast<double>(x) - mu) / r.sigma;
        xs.push_back(z);
        counts.push_back(c);
        const double dev = static_cast<double>(x) - r.empirical_mean;
        m3 += c * dev * dev * dev / t;
        m4 += c * dev * dev * dev * dev / t;
    }
    r.ks_statistic = ks_statistic_atoms(xs, counts);
    if (r.empirical_variance > 0) {
        r.skewness = m3 / std::pow(r.empirical_variance, 1.5);
        r.excess_kurtosis = m4 / (r.empirical_variance * r.empirical_variance) - 3.0;
    }
    if (cfg.keep_samples) {
        r.standardized.reserve(static_cast<std::size_t>(cfg.trials));
        for (std::size_t k = 0; k < xs.size(); ++k) {
            r.standardized.insert(r.standardized.end(), static_cast<std::size_t>(counts[k]), xs[k]);
        }
    }
    return r;
}

struct regime_row {
    int n = 0;
    int d = 0;
    std::optional<normality_report> report;
    std::string warning;  // set when the entry was skipped
};

inline std::vector<regime_row> growth_regime_experiment(double epsilon, std::vector<int> schedule,
                                                        std::int64_t trials, std::uint64_t seed,
                                                        unsigned workers = 1) {
    if (!(epsilon > 0 && epsilon < 1)) throw input_error("epsilon must lie in (0, 1)");
    std::sort(schedule.begin(), schedule.end());
    std::vector<regime_row> rows;
    for (int n : schedule) {
        regime_row row;
        row.n = n;
        row.d = static_cast<int>(power_law_reach(n, epsilon));
        if (n < 2 * static_cast<std::int64_t>(row.d) || n < 2) {
            row.warning = "skipped: n=" + std::to_string(n) + " violates n >= 2d with d=" +
                          std::to_string(row.d);
        } else {
            simulation_config cfg;
            cfg.n = n;
            cfg.spec = descent_spec::uniform(row.d);
            cfg.trials = trials;
            cfg.seed = seed;
            cfg.workers = workers;
            row.report = simulate(cfg);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw input_error("median of empty list");
    std::sort(xs.begin(), xs.end());
    const std::size_t m = xs.size() / 2;
    return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

} // namespace ddesc
