#include "gridreg/solver.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace gridreg;
using namespace gridreg::solver;

class SolverTest : public ::testing::TestWithParam<std::string> {
protected:
    SolverConfig cfg() const {
        SolverConfig c;
        c.backend = GetParam();
        return c;
    }
};

TEST_P(SolverTest, MaxXBelowThree) {
    Model m;
    auto x = m.add_var("x", -kInf, kInf, VarKind::continuous, 1.0);
    auto r = m.add_row({{x, 1.0}}, RowSense::le, 3.0, "cap");
    EXPECT_EQ(m.num_vars(), 1u);
    EXPECT_EQ(m.num_rows(), 1u);
    const auto res = optimize(m, cfg());
    ASSERT_EQ(res.status, Status::optimal);
    EXPECT_NEAR(res.value(x), 3.0, 1e-9);
    EXPECT_NEAR(res.dual(r), 1.0, 1e-9);
    EXPECT_NEAR(res.objective, 3.0, 1e-9);
}

TEST_P(SolverTest, DualSignConventions) {
    // max -x s.t. x >= 2: raising the rhs lowers the objective.
    Model m;
    auto x = m.add_var("x", -kInf, kInf, VarKind::continuous, -1.0);
    auto r = m.add_row({{x, 1.0}}, RowSense::ge, 2.0);
    auto res = optimize(m, cfg());
    ASSERT_EQ(res.status, Status::optimal);
    EXPECT_NEAR(res.dual(r), -1.0, 1e-9);

    // min x s.t. x >= 2: objective rises with the rhs.
    Model n;
    auto y = n.add_var("y", -kInf, kInf, VarKind::continuous, 1.0);
    auto q = n.add_row({{y, 1.0}}, RowSense::ge, 2.0);
    n.set_sense(ObjectiveSense::minimize);
    res = optimize(n, cfg());
    ASSERT_EQ(res.status, Status::optimal);
    EXPECT_NEAR(res.objective, 2.0, 1e-9);
    EXPECT_NEAR(res.dual(q), 1.0, 1e-9);

    // Equality rows carry free duals: max 2a + b, a + b = 1, a <= 0.25 (bound).
    Model e;
    auto a = e.add_var("a", 0.0, 0.25, VarKind::continuous, 2.0);
    auto b = e.add_var("b", 0.0, kInf, VarKind::continuous, 1.0);
    auto eq = e.add_row({{a, 1.0}, {b, 1.0}}, RowSense::eq, 1.0);
    res = optimize(e, cfg());
    ASSERT_EQ(res.status, Status::optimal);
    EXPECT_NEAR(res.dual(eq), 1.0, 1e-9);
    EXPECT_NEAR(res.col_duals[a.index], 1.0, 1e-9); // at its upper bound
    EXPECT_NEAR(res.col_duals[b.index], 0.0, 1e-9);
}

TEST_P(SolverTest, Infeasible) {
    Model m;
    auto x = m.add_var("x", -kInf, kInf);
    m.add_row({{x, 1.0}}, RowSense::ge, 1.0);
    m.add_row({{x, 1.0}}, RowSense::le, 0.0);
    EXPECT_EQ(optimize(m, cfg()).status, Status::infeasible);
}

TEST_P(SolverTest, Unbounded) {
    Model m;
    m.add_var("x", -kInf, kInf, VarKind::continuous, 1.0);
    EXPECT_EQ(optimize(m, cfg()).status, Status::unbounded);
}

TEST_P(SolverTest, EmptyObjectiveIsFeasibilityModel) {
    Model m;
    auto x = m.add_var("x", 0.0, 10.0);
    m.add_row({{x, 1.0}}, RowSense::ge, 4.0);
    const auto res = optimize(m, cfg());
    ASSERT_EQ(res.status, Status::optimal);
    EXPECT_GE(res.value(x), 4.0 - 1e-9);
    EXPECT_NEAR(res.objective, 0.0, 1e-12);
}

TEST_P(SolverTest, RandomLpsPassKktAndResolveIsStable) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        Model m;
        std::vector<VarId> x;
        for (int j = 0; j < 8; ++j) x.push_back(m.add_var("x", -2.0, 3.0, VarKind::continuous, u(rng)));
        for (int i = 0; i < 6; ++i) {
            LinearExpr e;
            for (int j = 0; j < 8; ++j) e.push_back({x[j], u(rng)});
            const auto sense = i % 3 == 0 ? RowSense::le : (i % 3 == 1 ? RowSense::ge : RowSense::eq);
            m.add_row(e, sense, sense == RowSense::eq ? 0.1 * u(rng) : (sense == RowSense::le ? 1.0 : -1.0));
        }
        KktResiduals k;
        const auto a = optimize(m, cfg(), &k);
        if (a.status != Status::optimal) continue;
        EXPECT_TRUE(k.ok()) << "primal " << k.primal << " dual " << k.dual << " cs " << k.complementarity;
        const auto b = optimize(m, cfg());
        EXPECT_NEAR(a.objective, b.objective, 1e-9 * (1.0 + std::abs(a.objective)));
    }
}

TEST_P(SolverTest, SmallKnapsackMatchesEnumeration) {
    const std::vector<double> w{3, 4, 5, 9, 2, 7};
    const std::vector<double> v{4, 5, 7, 11, 1.5, 8.5};
    const double cap = 15;
    Model m;
    LinearExpr row;
    for (std::size_t j = 0; j < w.size(); ++j) {
        auto b = m.add_var("b", 0, 1, VarKind::binary, v[j]);
        row.push_back({b, w[j]});
    }
    m.add_row(row, RowSense::le, cap);
    double best = 0.0;
    for (unsigned mask = 0; mask < (1u << w.size()); ++mask) {
        double ww = 0, vv = 0;
        for (std::size_t j = 0; j < w.size(); ++j)
            if (mask & (1u << j)) {
                ww += w[j];
                vv += v[j];
            }
        if (ww <= cap) best = std::max(best, vv);
    }
    const auto res = optimize(m, cfg());
    ASSERT_EQ(res.status, Status::optimal);
    EXPECT_NEAR(res.objective, best, 1e-6);
    EXPECT_GE(res.gap, 0.0);
    EXPECT_FALSE(res.has_duals());
}

INSTANTIATE_TEST_SUITE_P(Backends, SolverTest, ::testing::ValuesIn(available_backends()));

TEST(ModelTest, UnregisteredVariableIsRejected) {
    Model m;
    m.add_var("x", 0, 1);
    EXPECT_THROW(m.add_row({{VarId{5}, 1.0}}, RowSense::le, 1.0), ModelError);
    EXPECT_THROW(m.add_row({{VarId{0}, std::nan("")}}, RowSense::le, 1.0), ModelError);
}

TEST(SolverConfigTest, KeysAndEnvOverride) {
    SolverConfig c;
    c.set("solver.backend", "reference");
    c.set("solver.mip_gap", "1e-4");
    c.set("solver.lp_tol", "1e-9");
    c.set("solver.time_limit_s", "12");
    EXPECT_EQ(c.backend, "reference");
    EXPECT_DOUBLE_EQ(c.params.mip_gap, 1e-4);
    EXPECT_DOUBLE_EQ(c.params.lp_tol, 1e-9);
    EXPECT_DOUBLE_EQ(c.params.time_limit_s, 12.0);
    EXPECT_THROW(c.set("solver.bogus", "1"), ParseError);
    EXPECT_THROW(c.set("solver.mip_gap", "abc"), ParseError);
    c.merge(nlohmann::json{{"solver", {{"mip_gap", 0.5}}}});
    EXPECT_DOUBLE_EQ(c.params.mip_gap, 0.5);
    setenv("GRIDREG_SOLVER", "somebackend", 1);
    c.apply_env();
    unsetenv("GRIDREG_SOLVER");
    EXPECT_EQ(c.backend, "somebackend");
    EXPECT_THROW(make_backend("somebackend"), SolverError);
}
