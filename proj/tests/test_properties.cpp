#include "gridreg/duality.hpp"
#include "gridreg/generators.hpp"
#include "gridreg/oracle.hpp"

#include <gtest/gtest.h>

using namespace gridreg;

namespace {

constexpr int kCases = 50;
constexpr double kCertTol = 1e-5;

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

class RandomToy : public ::testing::TestWithParam<int> {
protected:
    std::uint64_t seed() const { return 1000u + static_cast<std::uint64_t>(GetParam()); }
    double kappa() const { return static_cast<double>(GetParam() % 5) / 4.0; }
};

} // namespace

// Every plan's market LP carries a passing certificate.
TEST_P(RandomToy, EveryMarketSolveCertifies) {
    const auto c = generate_toy_case(seed());
    for (const auto& plan : enumerate_plans(c)) {
        const auto o = solve_wsm(c, plan);
        ASSERT_EQ(o.status, solver::Status::optimal);
        const auto cert = certify(o, c, plan, kCertTol);
        EXPECT_TRUE(cert.pass()) << nlohmann::json(cert).dump();
    }
}

TEST_P(RandomToy, MilpMatchesOptimisticOracle) {
    const auto c = generate_toy_case(seed(), {.kappa = kappa()});
    solver::SolverConfig cfg;
    cfg.params.mip_gap = 1e-9;
    const auto sol = solve_planning(c, kappa(), cfg);
    ASSERT_EQ(sol.status, solver::Status::optimal);
    EXPECT_TRUE(sol.certified()) << solution_to_json(sol, c).dump();
    EXPECT_LE(sol.certificate.worst(), kCertTol);

    const auto oracle = brute_force(c, kappa(), cfg, {.refine_ties = true});
    EXPECT_LE(rel(sol.objective, oracle.best_profit), 1e-6);
    const auto at_plan = evaluate_plan(c, kappa(), sol.plan, cfg, true);
    EXPECT_LE(rel(at_plan.profit, sol.objective), 1e-6);
    EXPECT_TRUE(recompute_metrics_from_primal(sol, c).ok());
}

// The Transco never loses money: the empty plan earns non-negative rent and
// a zero fee.
TEST_P(RandomToy, ProfitIsNonNegative) {
    const auto c = generate_toy_case(seed(), {.kappa = kappa()});
    const auto sol = solve_planning(c, kappa());
    EXPECT_GE(sol.objective, -1e-7);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomToy, ::testing::Range(0, kCases));

TEST(ToyGeneratorTest, Deterministic) {
    const auto a = generate_toy_case(5), b = generate_toy_case(5), d = generate_toy_case(6);
    ASSERT_EQ(a.bids.size(), 12u);
    for (std::size_t k = 0; k < a.bids.size(); ++k) {
        EXPECT_EQ(a.bids[k].price, b.bids[k].price);
        EXPECT_EQ(a.bids[k].q_max, b.bids[k].q_max);
    }
    EXPECT_NE(a.bids[0].price, d.bids[0].price);
}
