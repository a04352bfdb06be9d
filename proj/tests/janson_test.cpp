#include <gtest/gtest.h>

#include "ddesc/janson.hpp"

using namespace ddesc;

namespace {

bool shares_index(pair_index a, pair_index b) {
    return a.i == b.i || a.i == b.j || a.j == b.i || a.j == b.j;
}

} // namespace

TEST(DependencyGraph, SmallExamples) {
    const auto g31 = build_dependency_graph(3, 1);
    ASSERT_EQ(g31.vertices.size(), 2u);
    EXPECT_EQ(g31.adjacency[0], std::vector<int>{1});
    EXPECT_EQ(g31.adjacency[1], std::vector<int>{0});

    const auto g41 = build_dependency_graph(4, 1);
    ASSERT_EQ(g41.vertices.size(), 3u);
    EXPECT_EQ(g41.adjacency[0], std::vector<int>{1});
    EXPECT_EQ(g41.adjacency[1], (std::vector<int>{0, 2}));
    EXPECT_EQ(g41.adjacency[2], std::vector<int>{1});
    EXPECT_EQ(max_degree(g41), 2);

    EXPECT_EQ(max_degree(build_dependency_graph(2, 1)), 0);
    EXPECT_EQ(max_degree(build_dependency_graph(6, 2)), 6);
    EXPECT_EQ(max_degree(build_dependency_graph(20, 3)), 10);
}

TEST(DependencyGraph, EdgesAreExactlyIndexSharingPairs) {
    for (int n = 2; n <= 12; ++n) {
        for (int d = 1; d <= n - 1; ++d) {
            const auto g = build_dependency_graph(n, d);
            ASSERT_EQ(static_cast<std::int64_t>(g.vertices.size()), eligible_pair_count(n, d));
            for (std::size_t u = 0; u < g.vertices.size(); ++u) {
                std::vector<int> expected;
                for (std::size_t v = 0; v < g.vertices.size(); ++v) {
                    if (u != v && shares_index(g.vertices[u], g.vertices[v])) {
                        expected.push_back(static_cast<int>(v));
                    }
                }
                EXPECT_EQ(g.adjacency[u], expected) << "n=" << n << " d=" << d << " u=" << u;
            }
        }
    }
}

TEST(DependencyGraph, DegreeBoundAndRegularity) {
    for (int n = 2; n <= 40; ++n) {
        for (int d = 1; d <= n - 1; ++d) {
            const int delta = max_degree(build_dependency_graph(n, d));
            EXPECT_LE(delta, 4 * d);
            if (n >= 2 * d + 2) EXPECT_EQ(delta, 4 * d - 2) << "n=" << n << " d=" << d;
            else EXPECT_LT(delta, 4 * d - 2) << "n=" << n << " d=" << d;
        }
    }
}

TEST(DependencyGraph, GuardAndErrors) {
    EXPECT_THROW(build_dependency_graph(100, 5, 100), capacity_error);
    EXPECT_NO_THROW(build_dependency_graph(100, 5, 1000));
    EXPECT_THROW(build_dependency_graph(1, 1), input_error);
    EXPECT_THROW(build_dependency_graph(5, 0), input_error);
    EXPECT_THROW(build_dependency_graph(5, 5), input_error);
}

TEST(JansonBound, FixedReachExample) {
    const auto c = janson_bound(100, 1, 3);
    EXPECT_EQ(c.pairs, 99);
    EXPECT_EQ(c.delta_used, 4);
    EXPECT_TRUE(c.analytic_delta);
    EXPECT_EQ(c.sigma_sq, rational(101, 12));
    EXPECT_NEAR(c.bound_value, 64.87, 0.01);
    // 99 * 16 * (12/101)^(3/2)
    EXPECT_NEAR(c.bound_value, 99.0 * 16.0 * std::pow(12.0 / 101.0, 1.5), 1e-9);
}

TEST(JansonBound, SecondMomentOrder) {
    EXPECT_NEAR(janson_bound(100, 1, 2).bound_value, 48.0 * 99 / 101, 1e-9);
    EXPECT_NEAR(janson_bound(100, 1, 2).bound_value, 47.05, 0.01);
    EXPECT_NEAR(janson_bound(10'000, 1, 2).bound_value, 47.99, 0.01);
    EXPECT_NEAR(janson_bound(10'000, 1, 2).simplified_bound, 48.0, 1e-9);
}

TEST(JansonBound, DecaysLikeInverseSquareRoot) {
    const double r = janson_bound(10'000, 1, 3).bound_value / janson_bound(100, 1, 3).bound_value;
    EXPECT_NEAR(r, (9999.0 / 99.0) * std::pow(101.0 / 10001.0, 1.5), 1e-12);
    EXPECT_NEAR(r, 0.1, 0.005);
    double prev = HUGE_VAL;
    for (int n : {100, 1000, 10'000, 100'000, 1'000'000}) {
        const double b = janson_bound(n, 1, 3).bound_value;
        EXPECT_LT(b, prev);
        prev = b;
    }
}

TEST(JansonBound, ExactDegreeFlag) {
    const auto c = janson_bound(50, 3, 4, true);
    ASSERT_TRUE(c.delta_exact.has_value());
    EXPECT_EQ(*c.delta_exact, 10);
    EXPECT_EQ(c.delta_used, 10);
    EXPECT_FALSE(c.analytic_delta);
    EXPECT_LT(c.bound_value, janson_bound(50, 3, 4).bound_value);

    // above the guard the analytic degree is kept
    const auto big = janson_bound(50, 3, 4, true, 10);
    EXPECT_FALSE(big.delta_exact.has_value());
    EXPECT_TRUE(big.analytic_delta);
    EXPECT_EQ(big.delta_used, 12);
}

TEST(JansonBound, Errors) {
    EXPECT_THROW(janson_bound(5, 3, 3), unsupported_regime_error);
    EXPECT_THROW(janson_bound(100, 1, 0), input_error);
}

TEST(JansonBound, PublishedVarianceCarriedAlongside) {
    const auto c = janson_bound(1000, 5, 3);
    EXPECT_EQ(c.sigma_sq, exact_variance(1000, 5));
    EXPECT_EQ(c.sigma_sq_published, variance_closed_form(1000, 5));
    EXPECT_GT(c.sigma_sq_published, c.sigma_sq);
}

TEST(AutoMomentOrder, Values) {
    EXPECT_EQ(auto_moment_order(0.5), 5);
    EXPECT_EQ(auto_moment_order(0.9), 3);
    EXPECT_EQ(auto_moment_order(0.1), 21);
    EXPECT_EQ(auto_moment_order(0.3), 7);
    EXPECT_THROW(auto_moment_order(0.0), input_error);
    EXPECT_THROW(auto_moment_order(1.0), input_error);
}

TEST(ConvergenceTable, GrowingReachDecreases) {
    const auto t = convergence_table(power_reach{0.5}, 0, {100, 1000, 10'000, 100'000});
    EXPECT_EQ(t.m, 5);
    ASSERT_EQ(t.rows.size(), 4u);
    EXPECT_EQ(t.rows[2].d, 100);
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
        ASSERT_TRUE(t.rows[k].certificate && t.rows[k - 1].certificate);
        EXPECT_LT(t.rows[k].certificate->bound_value, t.rows[k - 1].certificate->bound_value);
    }
}

TEST(ConvergenceTable, FixedReachAndSkips) {
    const auto t = convergence_table(fixed_reach{4}, 0, {5, 8, 100});
    EXPECT_EQ(t.m, 3);
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_FALSE(t.rows[0].certificate.has_value());
    EXPECT_NE(t.rows[0].warning.find("skipped"), std::string::npos);
    EXPECT_TRUE(t.rows[1].certificate.has_value());
    EXPECT_TRUE(t.rows[2].warning.empty());
}

TEST(IndependenceAudit, Examples) {
    EXPECT_TRUE(independence_audit(4, 2).passed);
    EXPECT_TRUE(independence_audit(2, 1).passed);

    const auto r = independence_audit(3, 1);
    EXPECT_TRUE(r.passed);
    bool seen = false;
    for (const auto& e : r.entries) {
        if (e.a == pair_index{1, 2} && e.b == pair_index{2, 3}) {
            EXPECT_EQ(e.relation, pair_class::crossed);
            EXPECT_EQ(e.joint, rational(1, 6));
            seen = true;
        }
    }
    EXPECT_TRUE(seen);
}

TEST(IndependenceAudit, AllSmallCasesPass) {
    for (int n = 2; n <= 7; ++n) {
        for (int d = 1; d <= n - 1; ++d) {
            const auto r = independence_audit(n, d);
            EXPECT_TRUE(r.passed) << "n=" << n << " d=" << d
                                  << (r.failures.empty() ? "" : ": " + r.failures.front());
            for (const auto& e : r.entries) EXPECT_EQ(e.joint, expectation(e.relation));
        }
    }
}

TEST(IndependenceAudit, CapacityLimit) {
    EXPECT_THROW(independence_audit(9, 2), capacity_error);
    EXPECT_THROW(independence_audit(6, 2, 5), capacity_error);
}
