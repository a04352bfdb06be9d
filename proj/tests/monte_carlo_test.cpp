#include <random>

#include <gtest/gtest.h>

#include "ddesc/io.hpp"
#include "ddesc/monte_carlo.hpp"
#include "oracles.hpp"

using namespace ddesc;

TEST(SamplePermutation, LengthOneIsIdentity) {
    rng_engine g(1);
    for (int k = 0; k < 10; ++k) EXPECT_EQ(sample_permutation(1, g), permutation({1}));
    EXPECT_THROW(sample_permutation(0, g), input_error);
}

TEST(SamplePermutation, ProducesValidPermutations) {
    rng_engine g(2);
    for (int k = 0; k < 200; ++k) {
        const auto p = sample_permutation(17, g);
        EXPECT_NO_THROW(permutation(std::vector<int>(p.values().begin(), p.values().end())));
    }
}

TEST(SamplePermutation, TwoElementsAreFair) {
    rng_engine g(3);
    int swapped = 0;
    const int trials = 100'000;
    for (int k = 0; k < trials; ++k) swapped += sample_permutation(2, g).at(1) == 2;
    EXPECT_NEAR(static_cast<double>(swapped) / trials, 0.5, 0.01);
}

TEST(SamplePermutation, ThreeElementsPassChiSquare) {
    rng_engine g(4);
    std::map<std::vector<int>, int> cells;
    const int trials = 60'000;
    for (int k = 0; k < trials; ++k) {
        const auto p = sample_permutation(3, g);
        ++cells[std::vector<int>(p.values().begin(), p.values().end())];
    }
    ASSERT_EQ(cells.size(), 6u);
    const double expected = trials / 6.0;
    double chi2 = 0;
    for (const auto& [_, c] : cells) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi2, 20.5);  // 0.999 quantile of chi-square with 5 dof
}

TEST(SamplePermutation, ConsumesOneDrawPerPosition) {
    rng_engine a(5), b(5);
    sample_permutation(10, a);
    b.discard(9);
    EXPECT_EQ(a(), b());
}

TEST(BoundedDraw, StaysInRange) {
    rng_engine g(6);
    for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 7ULL, 1000ULL, (1ULL << 63) + 1}) {
        for (int k = 0; k < 1000; ++k) EXPECT_LT(bounded_draw(g, bound), bound);
    }
}

TEST(ChunkSeed, DistinctStreams) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        for (std::uint64_t c = 0; c < 1000; ++c) seen.insert(chunk_seed(seed, c));
    }
    EXPECT_EQ(seen.size(), 3000u);
}

TEST(StandardNormalCdf, Examples) {
    EXPECT_EQ(standard_normal_cdf(0.0), 0.5);
    EXPECT_NEAR(standard_normal_cdf(10.0), 1.0, 1e-7);
    EXPECT_NEAR(standard_normal_cdf(-10.0), 0.0, 1e-7);
    EXPECT_NEAR(standard_normal_cdf(1.0), 0.8413447, 1e-6);
}

TEST(StandardNormalCdf, MatchesQuadrature) {
    for (double x = -6.0; x <= 6.0; x += 0.25) {
        EXPECT_NEAR(standard_normal_cdf(x), oracle::normal_cdf_quadrature(x), 1e-7) << "x=" << x;
    }
}

TEST(KsStatistic, SingleAndConstantSamples) {
    const std::vector<double> one{0.0};
    EXPECT_DOUBLE_EQ(ks_statistic(one), 0.5);

    for (double c : {-1.3, 0.0, 0.7}) {
        const std::vector<double> same(1000, c);
        const double phi = standard_normal_cdf(c);
        EXPECT_NEAR(ks_statistic(same), std::max(phi, 1 - phi), 1e-15);
    }
}

TEST(KsStatistic, Errors) {
    EXPECT_THROW(ks_statistic(std::vector<double>{}), input_error);
    EXPECT_THROW(ks_statistic(std::vector<double>{1.0, 0.0}), input_error);
}

TEST(KsStatistic, ExactQuantilesAreClose) {
    // inverse Phi by bisection on the library CDF
    auto quantile = [](double u) {
        double lo = -10, hi = 10;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (standard_normal_cdf(mid) < u ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const int t = 100'000;
    std::vector<double> xs(t);
    for (int i = 0; i < t; ++i) xs[i] = quantile((i + 0.5) / t);
    EXPECT_LT(ks_statistic(xs), 0.005);
}

// The lattice case: the exact law of the n = 6, d = 1 statistic as weighted
// atoms, against a direct evaluation of sup |F - Phi| that computes F and
// its left limits by summing atoms at each probe point.
TEST(KsStatistic, LatticeAtomsMatchDirectSupremum) {
    const auto t = exact_distribution(6, descent_spec::uniform(1));
    const double mu = static_cast<double>(mean_closed_form(6, 1));
    const double sigma = std::sqrt(static_cast<double>(exact_variance(6, 1)));
    std::vector<double> xs;
    std::vector<std::int64_t> w;
    for (std::size_t k = 0; k < t.counts.size(); ++k) {
        xs.push_back((static_cast<double>(k) - mu) / sigma);
        w.push_back(static_cast<std::int64_t>(t.counts[k]));
    }
    const double total = 720.0;
    double direct = 0;
    for (double probe : xs) {
        double at = 0, below = 0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            if (xs[k] <= probe) at += w[k];
            if (xs[k] < probe) below += w[k];
        }
        const double phi = standard_normal_cdf(probe);
        direct = std::max({direct, std::abs(at / total - phi), std::abs(below / total - phi)});
    }
    EXPECT_NEAR(ks_statistic_atoms(xs, w), direct, 1e-12);

    std::vector<double> expanded;
    for (std::size_t k = 0; k < xs.size(); ++k) expanded.insert(expanded.end(), w[k], xs[k]);
    EXPECT_NEAR(ks_statistic(expanded), direct, 1e-12);
}

TEST(Simulate, FairIndicator) {
    simulation_config cfg;
    cfg.n = 2;
    cfg.spec = descent_spec::uniform(1);
    cfg.trials = 100'000;
    cfg.seed = 42;
    const auto r = simulate(cfg);
    EXPECT_NEAR(r.empirical_mean, 0.5, 0.01);
    EXPECT_NEAR(r.empirical_variance, 0.25, 0.01);
    EXPECT_GE(r.ks_statistic, 0.0);
    EXPECT_LE(r.ks_statistic, 1.0);
    EXPECT_EQ(r.mu, rational(1, 2));
    EXPECT_EQ(r.sigma_sq, rational(1, 4));
}

TEST(Simulate, DescentVarianceAtLargeN) {
    simulation_config cfg;
    cfg.n = 1000;
    cfg.spec = descent_spec::uniform(1);
    cfg.trials = 10'000;
    cfg.seed = 2024;
    const auto r = simulate(cfg);
    EXPECT_NEAR(r.empirical_variance / (1001.0 / 12.0), 1.0, 0.02);
    EXPECT_EQ(r.sigma_source, moment_source::closed_form);
    EXPECT_LT(std::abs(r.skewness), 0.1);
    EXPECT_LT(std::abs(r.excess_kurtosis), 0.2);
}

TEST(Simulate, EmpiricalMeanWithinFourStandardErrors) {
    struct c { int n; int d; };
    for (auto [n, d] : {c{10, 1}, c{30, 4}, c{200, 10}, c{500, 60}, c{9, 8}}) {
        simulation_config cfg;
        cfg.n = n;
        cfg.spec = descent_spec::uniform(d);
        cfg.trials = 20'000;
        cfg.seed = static_cast<std::uint64_t>(n * 131 + d);
        const auto r = simulate(cfg);
        const double se = r.sigma / std::sqrt(static_cast<double>(cfg.trials));
        EXPECT_LE(std::abs(r.empirical_mean - eligible_pair_count(n, d) / 2.0), 4 * se)
            << "n=" << n << " d=" << d;
    }
}

TEST(Simulate, SmallNHistogramMatchesExactLaw) {
    for (int n : {3, 5, 6}) {
        for (int d : {1, 2, n - 1}) {
            simulation_config cfg;
            cfg.n = n;
            cfg.spec = descent_spec::uniform(d);
            cfg.trials = 1'000'000;
            cfg.seed = 77;
            const auto r = simulate(cfg);
            const auto t = exact_distribution(n, cfg.spec);
            const double total = static_cast<double>(t.total());
            double tv = 0;
            for (std::size_t k = 0; k < t.counts.size(); ++k) {
                const auto it = r.histogram.find(static_cast<std::int64_t>(k));
                const double emp = it == r.histogram.end() ? 0.0 : it->second / 1e6;
                tv += std::abs(emp - static_cast<double>(t.counts[k]) / total);
            }
            EXPECT_LT(0.5 * tv, 0.01) << "n=" << n << " d=" << d;
        }
    }
}

TEST(Simulate, FallsBackToTableBelowClosedFormRegime) {
    simulation_config cfg;
    cfg.n = 6;
    cfg.spec = descent_spec::uniform(4);
    cfg.trials = 5'000;
    const auto r = simulate(cfg);
    EXPECT_EQ(r.sigma_source, moment_source::from_table);
    EXPECT_EQ(r.sigma_sq, moments_from_table(exact_distribution(6, cfg.spec)).variance);

    cfg.spec = descent_spec::vector({1, 2, 3, 1, 1});
    EXPECT_EQ(simulate(cfg).sigma_source, moment_source::from_table);

    cfg.n = 40;
    cfg.spec = descent_spec::uniform(30);
    EXPECT_THROW(simulate(cfg), unsupported_regime_error);
}

TEST(Simulate, DegenerateAndInvalidConfigs) {
    simulation_config cfg;
    cfg.n = 1;
    cfg.spec = descent_spec::uniform(1);
    cfg.trials = 10;
    EXPECT_THROW(simulate(cfg), input_error);
    cfg.n = 5;
    cfg.trials = 0;
    EXPECT_THROW(simulate(cfg), input_error);
}

TEST(Simulate, WorkerCountIndependence) {
    for (int d : {1, 40}) {
        simulation_config cfg;
        cfg.n = 300;
        cfg.spec = descent_spec::uniform(d);
        cfg.trials = 3 * simulation_chunk_size + 17;
        cfg.seed = 9;
        cfg.workers = 1;
        const auto one = canonical_dump(to_json(simulate(cfg)));
        for (unsigned w : {2u, 4u, 5u}) {
            cfg.workers = w;
            EXPECT_EQ(canonical_dump(to_json(simulate(cfg))), one);
        }
    }
}

TEST(Simulate, KeepSamplesMatchesHistogram) {
    simulation_config cfg;
    cfg.n = 12;
    cfg.spec = descent_spec::uniform(3);
    cfg.trials = 1000;
    cfg.keep_samples = true;
    const auto r = simulate(cfg);
    ASSERT_EQ(r.standardized.size(), 1000u);
    EXPECT_TRUE(std::is_sorted(r.standardized.begin(), r.standardized.end()));
    EXPECT_DOUBLE_EQ(ks_statistic(r.standardized), r.ks_statistic);
}

TEST(GrowthRegime, ReachSchedule) {
    const auto rows = growth_regime_experiment(0.5, {10'000, 100}, 200, 1);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].n, 100);
    EXPECT_EQ(rows[0].d, 10);
    EXPECT_EQ(rows[1].d, 100);
    EXPECT_TRUE(rows[1].report.has_value());

    for (const auto& row : growth_regime_experiment(0.99, {50, 1000}, 100, 1)) {
        EXPECT_EQ(row.d, 1);
    }
    EXPECT_THROW(growth_regime_experiment(1.5, {100}, 10, 1), input_error);
}

TEST(GrowthRegime, SkipsInfeasibleEntries) {
    // n = 3, epsilon = 0.1: d = floor(3^0.9) = 2 > n / 2
    const auto rows = growth_regime_experiment(0.1, {3, 100}, 100, 1);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_FALSE(rows[0].report.has_value());
    EXPECT_FALSE(rows[0].warning.empty());
    EXPECT_TRUE(rows[1].report.has_value() || !rows[1].warning.empty());
}

TEST(Median, OddAndEven) {
    EXPECT_EQ(median({3, 1, 2}), 2);
    EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
    EXPECT_THROW(median({}), input_error);
}
