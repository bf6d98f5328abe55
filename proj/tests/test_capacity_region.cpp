#include "macec/capacity_region.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace macec;

namespace {

/// Independent evaluation of the weighted support objective for a
/// two-user policy (delta12, delta21): transmit powers written out by
/// hand, then the sorted marginal-weight sum. Used by the grid oracles.
double oracle_objective(const NormalizedMac& inst, double mu1, double mu2,
                        double d12, double d21) {
    const double t = inst.slot_seconds;
    const double p1 =
        inst.p_budget[0] - (d12 - inst.alpha_eff(1, 0) * d21) / t;
    const double p2 =
        inst.p_budget[1] - (d21 - inst.alpha_eff(0, 1) * d12) / t;
    const double a = std::max(p1, 0.0);
    const double b = std::max(p2, 0.0);
    double hi_w;
    double lo_w;
    double hi_p;
    if (mu1 >= mu2) {
        hi_w = mu1;
        lo_w = mu2;
        hi_p = a;
    } else {
        hi_w = mu2;
        lo_w = mu1;
        hi_p = b;
    }
    return 0.5 * (hi_w - lo_w) * std::log1p(hi_p) + 0.5 * lo_w * std::log1p(a + b);
}

/// Exhaustive grid maximum of the weighted objective over the feasible
/// rectangle with the given step.
double grid_oracle(const NormalizedMac& inst, double mu1, double mu2,
                   double step = 1e-3) {
    const double t = inst.slot_seconds;
    const double b1 = t * inst.p_budget[0];
    const double b2 = t * inst.p_budget[1];
    const auto n1 = static_cast<std::int64_t>(std::floor(b1 / step));
    const auto n2 = static_cast<std::int64_t>(std::floor(b2 / step));
    double best = -1.0;
    for (std::int64_t i = 0; i <= n1; ++i) {
        const double d12 = std::min(b1, static_cast<double>(i) * step);
        for (std::int64_t j = 0; j <= n2; ++j) {
            const double d21 = std::min(b2, static_cast<double>(j) * step);
            best = std::max(best, oracle_objective(inst, mu1, mu2, d12, d21));
        }
    }
    return best;
}

NormalizedMac random_two_user(std::mt19937_64& rng) {
    Vec budget(2);
    budget << test::uniform(rng, 0.0, 5.0), test::uniform(rng, 0.0, 5.0);
    Mat alpha = Mat::Zero(2, 2);
    alpha(0, 1) = test::uniform(rng, 0.0, 1.5);
    alpha(1, 0) = test::uniform(rng, 0.0, 1.5);
    return NormalizedMac(budget, alpha, 1.0);
}

}  // namespace

TEST_CASE("zero power collapses the region to the origin") {
    const PolymatroidRegion r = region_from_powers(Vec::Zero(3));
    for (double b : r.bounds) CHECK(b == 0.0);
    CHECK(contains(r, Vec::Zero(3), 0.0));
}

TEST_CASE("single-user bound is the scalar AWGN capacity") {
    const PolymatroidRegion r = region_from_powers(Vec::Ones(1));
    CHECK(r.bound(1) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("two-user bounds on the experiment powers") {
    Vec p(2);
    p << 0.8, 3.0;
    const PolymatroidRegion r = region_from_powers(p);
    CHECK(r.bound(0b01) == doctest::Approx(0.5 * std::log(1.8)).epsilon(1e-14));
    CHECK(r.bound(0b10) == doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-14));
    CHECK(r.bound(0b11) == doctest::Approx(0.5 * std::log(4.8)).epsilon(1e-14));
    CHECK(r.bounds.size() == 4);  // slot 0 is the empty-set convention
}

TEST_CASE("region construction rejects bad input") {
    Vec neg(2);
    neg << 1.0, -0.1;
    CHECK_THROWS_AS(region_from_powers(neg), InvalidParameter);
    CHECK_THROWS_AS(region_from_powers(Vec::Ones(17)), SizeLimit);
}

TEST_CASE("bounds are monotone and submodular") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 50; ++trial) {
        const int users = 1 + static_cast<int>(rng() % 4);
        Vec p(users);
        for (int i = 0; i < users; ++i) p[i] = test::uniform(rng, 0.0, 6.0);
        const PolymatroidRegion r = region_from_powers(p);
        const SubsetMask total = SubsetMask{1} << users;
        CHECK(r.bounds.size() == total);
        for (SubsetMask s = 0; s < total; ++s) {
            for (SubsetMask t = 0; t < total; ++t) {
                if ((s & t) == s) {
                    CHECK(r.bounds[s] <= r.bounds[t] + 1e-12);  // monotone
                }
                CHECK(r.bounds[s | t] + r.bounds[s & t] <=
                      r.bounds[s] + r.bounds[t] + 1e-12);  // submodular
            }
        }
    }
}

TEST_CASE("corners satisfy the region with equality along their chain") {
    std::mt19937_64 rng(556);
    for (int trial = 0; trial < 20; ++trial) {
        const int users = 2 + static_cast<int>(rng() % 3);
        Vec p(users);
        for (int i = 0; i < users; ++i) p[i] = test::uniform(rng, 0.0, 6.0);
        const PolymatroidRegion r = region_from_powers(p);

        std::vector<int> order(users);
        for (int i = 0; i < users; ++i) order[i] = i;
        do {
            const Vec corner = corner_point(p, order);
            CHECK(contains(r, corner, 1e-9));
            SubsetMask chain = 0;
            double sum = 0.0;
            for (int i = 0; i < users; ++i) {
                chain |= SubsetMask{1} << order[i];
                sum += corner[order[i]];
                CHECK(sum == doctest::Approx(r.bounds[chain]).epsilon(1e-12));
            }
        } while (std::next_permutation(order.begin(), order.end()));
    }
}

TEST_CASE("membership check notices a violated sum bound") {
    Vec p(2);
    p << 0.8, 3.0;
    const PolymatroidRegion r = region_from_powers(p);
    const Vec corner = corner_point(p, {0, 1});
    CHECK(contains(r, corner, 1e-12));
    Vec pushed = corner;
    pushed[1] += 1e-3;  // breaks the two-user sum bound
    CHECK_FALSE(contains(r, pushed, 1e-9));
}

TEST_CASE("policy region matches the no-cooperation region for idle policies") {
    const NormalizedMac inst = test::paper_instance();
    const PolymatroidRegion direct = region_from_powers(inst.p_budget);
    const PolymatroidRegion via_policy = region_with_policy(
        inst.p_budget, CooperationPolicy::zero(2), inst.alpha_eff, 1.0);
    CHECK(direct.bounds == via_policy.bounds);
}

TEST_CASE("policy region on the derived transfer example") {
    const NormalizedMac inst = test::paper_instance();
    CooperationPolicy d = CooperationPolicy::zero(2);
    d.delta(1, 0) = 1.0;
    const PolymatroidRegion r =
        region_with_policy(inst.p_budget, d, inst.alpha_eff, 1.0);
    const double p1 = 0.8 + 4.0 / 15.0;
    CHECK(r.bound(0b01) == doctest::Approx(0.5 * std::log1p(p1)).epsilon(1e-14));
    CHECK(r.bound(0b10) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-14));
    CHECK(r.bound(0b11) ==
          doctest::Approx(0.5 * std::log1p(p1 + 2.0)).epsilon(1e-14));
}

TEST_CASE("spending the whole budget is still a valid policy") {
    const NormalizedMac inst = test::paper_instance();
    CooperationPolicy d = CooperationPolicy::zero(2);
    d.delta(0, 1) = 0.8;  // donor ends at zero transmit power
    const PolymatroidRegion r =
        region_with_policy(inst.p_budget, d, inst.alpha_eff, 1.0);
    CHECK(r.powers[0] == 0.0);
    CHECK(r.bound(0b01) == 0.0);

    d.delta(0, 1) = 0.9;
    CHECK_THROWS_AS(region_with_policy(inst.p_budget, d, inst.alpha_eff, 1.0),
                    InfeasiblePolicy);
}

TEST_CASE("weight validation") {
    const NormalizedMac inst = test::paper_instance();
    CHECK_THROWS_AS(max_weighted_rate(inst, Vec::Zero(2)), InvalidParameter);
    Vec neg(2);
    neg << 1.0, -0.2;
    CHECK_THROWS_AS(max_weighted_rate(inst, neg), InvalidParameter);
}

TEST_CASE("without links the optimum is no cooperation") {
    Vec budget(2);
    budget << 1.0, 2.0;
    const NormalizedMac inst(budget, Mat::Zero(2, 2), 1.0);
    const BoundarySample s = max_weighted_rate(inst, Vec::Ones(2));
    CHECK(s.value == doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-9));
    CHECK(s.policy.delta.isZero(1e-9));
}

TEST_CASE("sum-capacity direction matches the exhaustive grid") {
    const NormalizedMac inst = test::paper_instance();
    const BoundarySample s = max_weighted_rate(inst, Vec::Ones(2));
    const double grid = grid_oracle(inst, 1.0, 1.0);
    CHECK(std::abs(s.value - grid) <= 1e-3);
    // Relaying to the stronger user dominates here: full first-user
    // budget forwarded, nothing back.
    CHECK(s.policy.delta(0, 1) == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(s.policy.delta(1, 0) <= 1e-8);
    CHECK(s.value == doctest::Approx(0.5 * std::log(5.2)).epsilon(1e-8));
}

TEST_CASE("single-user weight matches a one-dimensional sweep") {
    const NormalizedMac inst = test::paper_instance();
    Vec mu(2);
    mu << 1.0, 0.0;
    const BoundarySample s = max_weighted_rate(inst, mu);
    double best = 0.0;
    for (int j = 0; j <= 3000; ++j) {
        const double d21 = 1e-3 * j;
        best = std::max(best, oracle_objective(inst, 1.0, 0.0, 0.0, d21));
    }
    CHECK(std::abs(s.value - best) <= 1e-3);
    // All of user 2's budget flows to user 1 once its own rate has no
    // weight.
    CHECK(s.policy.delta(1, 0) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("mixed weights match the exhaustive grid on random instances") {
    std::mt19937_64 rng(9001);
    const std::vector<std::pair<double, double>> mus = {{1.0, 2.0}, {2.0, 1.0}};
    for (int trial = 0; trial < 4; ++trial) {
        const NormalizedMac inst = random_two_user(rng);
        for (const auto& [m1, m2] : mus) {
            Vec mu(2);
            mu << m1, m2;
            const BoundarySample s = max_weighted_rate(inst, mu);
            const double grid = grid_oracle(inst, m1, m2, 2e-3);
            CHECK(std::abs(s.value - grid) <= 2e-3);
        }
    }
}

TEST_CASE("equal weights give the same value under either tie order") {
    const NormalizedMac inst = test::paper_instance();
    const BoundarySample s = max_weighted_rate(inst, Vec::Ones(2));
    const Vec p = transmit_powers(inst.p_budget, s.policy, inst.alpha_eff, 1.0);
    const Vec corner_a = corner_point(p, {0, 1});
    const Vec corner_b = corner_point(p, {1, 0});
    CHECK(corner_a.sum() == doctest::Approx(corner_b.sum()).epsilon(1e-12));
}

TEST_CASE("objective is concave along policy segments") {
    std::mt19937_64 rng(31337);
    const NormalizedMac inst = test::paper_instance();
    for (int trial = 0; trial < 30; ++trial) {
        Vec mu(2);
        mu << test::uniform(rng, 0.0, 2.0), test::uniform(rng, 0.0, 2.0);
        if (mu.maxCoeff() <= 0.0) mu[0] = 1.0;
        const CooperationPolicy d1 =
            test::random_feasible_policy(rng, inst.p_budget, 1.0);
        const CooperationPolicy d2 =
            test::random_feasible_policy(rng, inst.p_budget, 1.0);
        auto value = [&](const CooperationPolicy& d) {
            return oracle_objective(inst, mu[0], mu[1], d.delta(0, 1), d.delta(1, 0));
        };
        CooperationPolicy mid;
        mid.delta = 0.5 * (d1.delta + d2.delta);
        CHECK(value(mid) >= 0.5 * (value(d1) + value(d2)) - 1e-12);
    }
}

TEST_CASE("boundary sweep endpoints maximize each user alone") {
    const NormalizedMac inst = test::paper_instance();
    const std::vector<BoundarySample> sweep = trace_boundary(inst, 2);
    REQUIRE(sweep.size() == 2);
    CHECK(sweep[0].mu[1] == 0.0);
    CHECK(sweep[1].mu[0] == 0.0);

    Vec mu1(2);
    mu1 << 1.0, 0.0;
    Vec mu2(2);
    mu2 << 0.0, 1.0;
    CHECK(sweep[0].rates[0] ==
          doctest::Approx(max_weighted_rate(inst, mu1).rates[0]).epsilon(1e-12));
    CHECK(sweep[1].rates[1] ==
          doctest::Approx(max_weighted_rate(inst, mu2).rates[1]).epsilon(1e-12));
}

TEST_CASE("cooperation hull contains the no-cooperation region") {
    const NormalizedMac inst = test::paper_instance();
    const std::vector<BoundarySample> sweep = trace_boundary(inst, 64);
    for (const BoundarySample& s : sweep) {
        const Vec nocoop = corner_point(inst.p_budget, decode_order(s.mu));
        CHECK(s.value >= s.mu.dot(nocoop) - 1e-9);
    }
}

TEST_CASE("without links the hull collapses onto the no-cooperation region") {
    Vec budget(2);
    budget << 1.3, 0.7;
    const NormalizedMac inst(budget, Mat::Zero(2, 2), 1.0);
    for (const BoundarySample& s : trace_boundary(inst, 16)) {
        const Vec nocoop = corner_point(budget, decode_order(s.mu));
        CHECK(std::abs(s.value - s.mu.dot(nocoop)) <= 1e-9);
    }
}

TEST_CASE("sweep corners move monotonically with the direction") {
    const NormalizedMac inst = test::paper_instance();
    const std::vector<BoundarySample> sweep = trace_boundary(inst, 32);
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        CHECK(sweep[i].rates[0] <= sweep[i - 1].rates[0] + 1e-9);
        CHECK(sweep[i].rates[1] >= sweep[i - 1].rates[1] - 1e-9);
    }
}

TEST_CASE("every boundary sample is achieved by its own fixed policy") {
    std::mt19937_64 rng(808);
    std::vector<NormalizedMac> instances;
    instances.push_back(test::paper_instance());
    for (int i = 0; i < 5; ++i) instances.push_back(random_two_user(rng));
    for (const NormalizedMac& inst : instances) {
        for (const BoundarySample& s : trace_boundary(inst, 16)) {
            const PolymatroidRegion r =
                region_with_policy(inst.p_budget, s.policy, inst.alpha_eff,
                                   inst.slot_seconds);
            CHECK(contains(r, s.rates, 1e-9));
        }
    }
}

TEST_CASE("sum capacity special cases") {
    Vec budget(2);
    budget << 1.0, 2.0;
    const NormalizedMac no_links(budget, Mat::Zero(2, 2), 1.0);
    CHECK(sum_capacity(no_links).value ==
          doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-9));

    Vec single(1);
    single << 1.7;
    const NormalizedMac lone(single, Mat::Zero(1, 1), 1.0);
    CHECK(sum_capacity(lone).value ==
          doctest::Approx(0.5 * std::log1p(1.7)).epsilon(1e-12));
}

TEST_CASE("union membership: origin, boundary, and beyond") {
    const NormalizedMac inst = test::paper_instance();
    CHECK(membership_with_cooperation(inst, Vec::Zero(2)));

    const std::vector<BoundarySample> sweep = trace_boundary(inst, 9);
    for (const BoundarySample& s : sweep) {
        CHECK(membership_with_cooperation(inst, s.rates));
        if (s.rates.maxCoeff() > 1e-6) {
            const Vec outside = 1.05 * s.rates;
            CHECK_FALSE(membership_with_cooperation(inst, outside));
            // The scaled point must sit outside every supporting
            // hyperplane collected along the sweep.
            bool separated = false;
            for (const BoundarySample& h : sweep) {
                if (h.mu.dot(outside) > h.value + 1e-9) separated = true;
            }
            CHECK(separated);
        }
    }

    // Comfortably interior point.
    CHECK(membership_with_cooperation(inst, 0.5 * sweep[4].rates));
}

TEST_CASE("union membership on a three-user instance") {
    Vec budget(3);
    budget << 1.0, 2.0, 0.5;
    Mat alpha = Mat::Zero(3, 3);
    alpha(0, 1) = 0.6;
    alpha(1, 0) = 0.4;
    alpha(2, 1) = 0.7;
    alpha(1, 2) = 0.3;
    alpha(0, 2) = 0.28;
    alpha(2, 0) = 0.42;
    const NormalizedMac inst(budget, alpha, 1.0);

    const BoundarySample s = max_weighted_rate(inst, Vec::Ones(3));
    CHECK(membership_with_cooperation(inst, 0.9 * s.rates));
    CHECK_FALSE(membership_with_cooperation(inst, 1.1 * s.rates));
}

TEST_CASE("union membership on random instances with clear margins") {
    std::mt19937_64 rng(24601);
    int checked = 0;
    for (int trial = 0; trial < 8; ++trial) {
        const NormalizedMac inst = random_two_user(rng);
        if (inst.p_budget.maxCoeff() < 0.1) continue;
        for (double angle : {0.3, 0.8, 1.2}) {
            Vec mu(2);
            mu << std::cos(angle), std::sin(angle);
            const BoundarySample s = max_weighted_rate(inst, mu);
            if (s.rates.maxCoeff() < 1e-3) continue;
            CHECK(membership_with_cooperation(inst, 0.95 * s.rates));
            CHECK_FALSE(membership_with_cooperation(inst, 1.10 * s.rates));
            ++checked;
        }
    }
    CHECK(checked >= 10);
}

TEST_CASE("no-cooperation corners stay inside the union hull") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        const NormalizedMac inst = random_two_user(rng);
        const std::vector<BoundarySample> sweep = trace_boundary(inst, 16);
        const CooperationPolicy d =
            test::random_feasible_policy(rng, inst.p_budget, 1.0);
        const PolymatroidRegion member =
            region_with_policy(inst.p_budget, d, inst.alpha_eff, 1.0);
        // Corner points of any member region satisfy every supporting
        // hyperplane of the union.
        std::vector<int> order = {0, 1};
        do {
            const Vec corner = corner_point(member.powers, order);
            for (const BoundarySample& h : sweep) {
                CHECK(h.mu.dot(corner) <= h.value + 1e-9);
            }
        } while (std::next_permutation(order.begin(), order.end()));
    }
}
