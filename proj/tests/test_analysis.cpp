#include "fixtures.hpp"
#include "gridreg/analysis.hpp"
#include "gridreg/generators.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace gridreg;

namespace {

SweepTable toy_sweep(unsigned parallelism = 1) {
    const auto c = fixtures::toy();
    return sweep_kappa(c, parse_grid("0:1:0.25"), {}, {.parallelism = parallelism});
}

std::string csv(const SweepTable& t) {
    std::ostringstream s;
    write_sweep_csv(t, s);
    return s.str();
}

} // namespace

TEST(GridTest, Parse) {
    EXPECT_EQ(parse_grid("0:1:0.25"), (std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
    const auto g = parse_grid("0:1:0.1");
    ASSERT_EQ(g.size(), 11u);
    EXPECT_DOUBLE_EQ(g[3], 0.3);
    EXPECT_DOUBLE_EQ(g.back(), 1.0);
    EXPECT_EQ(parse_grid("0.5:0.5:0.1"), std::vector<double>{0.5});
    EXPECT_THROW(parse_grid("0:1"), ParseError);
    EXPECT_THROW(parse_grid("a:1:0.1"), ParseError);
    EXPECT_THROW(parse_grid("0:2:0.1"), ValidationError);
    EXPECT_THROW(parse_grid("0:1:0"), ValidationError);
}

TEST(SweepTest, RejectsBadGrids) {
    const auto c = fixtures::toy();
    EXPECT_THROW(sweep_kappa(c, {0.5, 0.25}), ValidationError);
    EXPECT_THROW(sweep_kappa(c, {0.0, 1.5}), ValidationError);
}

TEST(SweepTest, AccountingIdentitiesHoldOnEveryRow) {
    const auto t = toy_sweep();
    ASSERT_EQ(t.rows.size(), 5u);
    for (const auto& r : t.rows) {
        ASSERT_TRUE(r.ok()) << r.error;
        EXPECT_LE(std::abs(r.social_welfare - r.transco_profit - r.participant_benefits),
                  1e-6 * (1.0 + std::abs(r.social_welfare)));
        EXPECT_LE(r.identity_residual, 1e-6);
        EXPECT_LE(r.fee_residual, 1e-5);
        EXPECT_DOUBLE_EQ(r.fee_per_year.front(), 0.0);
        EXPECT_TRUE(r.certificate.pass());
    }
    const auto& one = t.rows.back();
    EXPECT_NEAR(one.participant_benefits, 0.0, 1e-6 * (1.0 + std::abs(one.social_welfare)));
    EXPECT_NEAR(one.transco_profit, one.social_welfare, 1e-6 * (1.0 + std::abs(one.social_welfare)));
    EXPECT_NEAR(t.rows.front().fee_total, 0.0, 1e-9);
}

// With first-year trade the fee only claims the increase, so at kappa = 1 the
// participants keep exactly their baseline surplus.
TEST(SweepTest, BaselineSurplusStaysWithParticipants) {
    const auto c = coarsen_lumps(generate_garver_case(2, {.agents_per_node = 4}), 100);
    const auto t = sweep_kappa(c, {0.0, 1.0});
    for (const auto& r : t.rows) ASSERT_TRUE(r.ok()) << r.error;
    const auto& one = t.rows.back();
    EXPECT_GT(one.retained_baseline, 0.0);
    EXPECT_NEAR(one.participant_benefits, one.retained_baseline, 1e-6 * (1.0 + std::abs(one.social_welfare)));
    EXPECT_DOUBLE_EQ(toy_sweep().rows.back().retained_baseline, 0.0);
}

// No first-year trade and r = 0: participants keep (1 - kappa) of the gain.
TEST(SweepTest, HalfKappaSplitsTheGain) {
    auto c = fixtures::toy(0.5);
    c.horizon.discount_rate = 0.0;
    const auto t = sweep_kappa(c, {0.5});
    ASSERT_TRUE(t.rows[0].ok());
    EXPECT_GT(t.rows[0].change_in_surplus, 0.0);
    EXPECT_NEAR(t.rows[0].participant_benefits, 0.5 * t.rows[0].change_in_surplus, 1e-9);
}

TEST(SweepTest, WelfareIsMaximalAtKappaOne) {
    const auto t = toy_sweep();
    for (const auto& r : t.rows) EXPECT_LE(r.social_welfare, t.rows.back().social_welfare + 1e-9);
}

TEST(SweepTest, ParallelMatchesSerial) {
    const auto a = csv(toy_sweep(1));
    EXPECT_EQ(a, csv(toy_sweep(3)));
    EXPECT_EQ(a, csv(toy_sweep(1)));
}

TEST(SweepTest, CsvLayout) {
    const auto s = csv(toy_sweep());
    std::istringstream in(s);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "kappa,tp,sw,benefits,fee,ms,cost,change_in_surplus,expansion_1,status");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9);
        EXPECT_TRUE(line.ends_with(",ok"));
    }
    EXPECT_EQ(rows, 5);
}

TEST(SweepTest, FailedRowsKeepTheirStatus) {
    auto c = fixtures::toy();
    c.bids[0].q_min = c.bids[0].q_max; // generator at node 1 must run with no line to carry it
    const auto t = sweep_kappa(c, {0.0, 1.0});
    for (const auto& r : t.rows) EXPECT_FALSE(r.ok());
    EXPECT_THROW(participant_optimal_kappa(t), ValidationError);
    EXPECT_TRUE(csv(t).find(",solver_failure") != std::string::npos);
}

TEST(SummaryTest, ParticipantOptimalTiesGoToSmallerKappa) {
    SweepTable t;
    t.line_ids = {1};
    for (const double k : {0.0, 0.5, 1.0}) {
        MetricsRow r;
        r.kappa = k;
        r.participant_benefits = k < 1.0 ? 10.0 : 0.0;
        r.expansion_mw = {0.0};
        t.rows.push_back(r);
    }
    EXPECT_DOUBLE_EQ(participant_optimal_kappa(t).kappa, 0.0);
    t.rows[1].participant_benefits = 11.0;
    EXPECT_DOUBLE_EQ(participant_optimal_kappa(t).kappa, 0.5);

    const auto j = sweep_summary(t);
    ASSERT_EQ(j.at("rows").size(), 3u);
    EXPECT_EQ(j["rows"][0]["label"], "kappa=1");
    EXPECT_EQ(j["rows"][1]["label"], "kappa*");
    EXPECT_EQ(j["rows"][1]["kappa"], "0.5");
    EXPECT_EQ(j["rows"][2]["label"], "kappa=0");
    EXPECT_NE(summary_text(j).find("kappa*"), std::string::npos);
}

TEST(ReportTest, WritesRequestedFormatsOnly) {
    const auto t = toy_sweep();
    const auto dir = std::filesystem::temp_directory_path() / "gridreg_report_test";
    std::filesystem::remove_all(dir);
    EXPECT_TRUE(emit_report(t, {}, dir).empty());
    EXPECT_FALSE(std::filesystem::exists(dir));
    const auto paths = emit_report(t, {"csv", "summary"}, dir);
    ASSERT_EQ(paths.size(), 2u);
    EXPECT_TRUE(std::filesystem::exists(dir / "sweep.csv"));
    std::ifstream in(dir / "summary.json");
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j.at("rows").size(), 3u);
    EXPECT_THROW(emit_report(t, {"pdf"}, dir), ValidationError);
    std::filesystem::remove_all(dir);
}
