#include "fixtures.hpp"
#include "gridreg/duality.hpp"
#include "gridreg/generators.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace gridreg;

TEST(DualityTest, HandSolvedTwoBusCertifies) {
    const auto c = fixtures::two_bus(5.0);
    const auto plan = ExpansionPlan::empty_for(c);
    const auto o = solve_wsm(c, plan);
    EXPECT_NEAR(o.phi_max[0], 0.0, 1e-9);
    EXPECT_NEAR(o.phi_max[1], 0.0, 1e-9);
    EXPECT_LE(dual_feasibility(o, c, plan), 1e-9);
    EXPECT_LE(strong_duality_gap(o, c, plan), 1e-9);
    EXPECT_LE(complementarity(o, c, plan), 1e-9);
    const auto cert = certify(o, c, plan);
    EXPECT_TRUE(cert.pass());
    EXPECT_DOUBLE_EQ(cert.scale, 51.0);
}

TEST(DualityTest, PriceShiftShowsUpInStationarity) {
    const auto c = fixtures::two_bus(5.0);
    const auto plan = ExpansionPlan::empty_for(c);
    auto o = solve_wsm(c, plan);
    o.pi[0] += 1.0;
    EXPECT_GE(dual_feasibility(o, c, plan), 1.0 - 1e-9);
    EXPECT_FALSE(certify(o, c, plan).pass());
}

TEST(DualityTest, HandBuiltZeroTradeCertificate) {
    const auto c = fixtures::two_bus(0.0);
    const auto plan = ExpansionPlan::empty_for(c);
    MarketOutcome o;
    o.resize(CaseLayout(c));
    o.pi = {40.0, 50.0};
    o.mu_max = {10.0};
    EXPECT_DOUBLE_EQ(dual_feasibility(o, c, plan), 0.0);
    EXPECT_DOUBLE_EQ(strong_duality_gap(o, c, plan), 0.0);
    EXPECT_DOUBLE_EQ(complementarity(o, c, plan), 0.0);
    EXPECT_DOUBLE_EQ(primal_feasibility(o, c, plan), 0.0);
}

TEST(DualityTest, HalvedDispatchOpensTheGap) {
    const auto c = fixtures::two_bus(5.0);
    const auto plan = ExpansionPlan::empty_for(c);
    auto o = solve_wsm(c, plan);
    for (auto& q : o.quantity) q *= 0.5;
    o.flow[0] *= 0.5;
    o.theta[1] *= 0.5;
    // Primal side 10 * 2.5; dual side is still mu * cap = 10 * 5.
    EXPECT_NEAR(strong_duality_gap(o, c, plan), 25.0, 1e-9);
}

TEST(DualityTest, SpuriousBoundMultiplierCostsItsSlack) {
    auto c = fixtures::two_bus(5.0);
    const auto plan = ExpansionPlan::empty_for(c);
    auto o = solve_wsm(c, plan);
    o.phi_max[0] = 1.0; // generator runs at 5 of 10 MW
    EXPECT_NEAR(complementarity(o, c, plan), 5.0, 1e-9);
}

TEST(DualityTest, MissingDualsAreRejected) {
    const auto c = fixtures::two_bus(5.0);
    MarketOutcome o;
    EXPECT_THROW(dual_feasibility(o, c, ExpansionPlan::empty_for(c)), ValidationError);
}

TEST(DualityTest, CertificateJsonFields) {
    const auto c = fixtures::two_bus(5.0);
    const auto plan = ExpansionPlan::empty_for(c);
    const nlohmann::json j = certify(solve_wsm(c, plan), c, plan);
    for (const char* key : {"dual_feasibility", "strong_duality_gap", "complementarity", "scale", "pass"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_TRUE(j["pass"].get<bool>());
}

// Every backend optimum over random cases and plans certifies, and the
// price-quantity linearization holds.
class CertificateProperty : public ::testing::TestWithParam<std::string> {};

TEST_P(CertificateProperty, RandomOptimaCertify) {
    solver::SolverConfig cfg;
    cfg.backend = GetParam();
    std::mt19937_64 rng(3);
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        TwoNodeOptions opt;
        opt.generators = 8;
        opt.consumers = 8;
        opt.max_lump = 40;
        opt.years = 3;
        opt.redraw_each_year = true;
        opt.existing_capacity = static_cast<double>(seed % 4) * 3.0;
        opt.reactance = seed % 3 == 0 ? 25.0 : 0.2; // some cases hit the angle limit
        const auto c = generate_two_node_case(seed, opt);
        auto plan = ExpansionPlan::empty_for(c);
        if (seed % 2 == 0) plan.select(c, 0, 1 + rng() % 2, rng() % 40);
        const auto o = solve_wsm(c, plan, cfg);
        ASSERT_EQ(o.status, solver::Status::optimal);
        const auto cert = certify(o, c, plan);
        EXPECT_TRUE(cert.pass()) << nlohmann::json(cert).dump();
        EXPECT_LE(cert.worst(), 1e-7);
    }
}

TEST_P(CertificateProperty, GarverOptimaCertify) {
    solver::SolverConfig cfg;
    cfg.backend = GetParam();
    GarverOptions opt;
    opt.agents_per_node = 4;
    opt.years = 3;
    const auto c = generate_garver_case(5, opt);
    auto plan = ExpansionPlan::empty_for(c);
    plan.select(c, 6, 1, 2);
    plan.select(c, 7, 2, 0);
    const auto o = solve_wsm(c, plan, cfg);
    ASSERT_EQ(o.status, solver::Status::optimal);
    EXPECT_TRUE(certify(o, c, plan).pass());
}

TEST_P(CertificateProperty, MoreCapacityNeverLowersWelfare) {
    solver::SolverConfig cfg;
    cfg.backend = GetParam();
    TwoNodeOptions opt;
    opt.generators = 10;
    opt.consumers = 10;
    opt.max_lump = 60;
    for (std::uint64_t seed = 20; seed < 26; ++seed) {
        const auto c = generate_two_node_case(seed, opt);
        double last = -1.0;
        for (std::size_t j = 0; j < 60; j += 7) {
            auto plan = ExpansionPlan::empty_for(c);
            plan.select(c, 0, 1, j);
            const double z = solve_wsm(c, plan, cfg).objective;
            EXPECT_GE(z, last - 1e-7);
            last = z;
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Backends, CertificateProperty, ::testing::ValuesIn(solver::available_backends()));
