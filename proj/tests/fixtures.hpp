#pragma once

#include "gridreg/case.hpp"

namespace fixtures {

// One generator (price 40, 10 MW) at node 1, one consumer (price 50, 10 MW) at
// node 2, one line of capacity `cap` and a single year.
inline gridreg::CaseStudy two_bus(double cap, std::vector<double> lumps = {1.0}) {
    using namespace gridreg;
    CaseStudy c;
    c.nodes = {{1, 0.5}, {2, 0.5}};
    c.lines = {{1, 1, 2, 500.0, cap, std::move(lumps), 100.0, 5.0}};
    c.horizon.years = {1};
    c.horizon.psi = 1.0;
    c.bids = {{AgentKind::generator, 1, 1, 1, 40.0, 0.0, 10.0},
              {AgentKind::consumer, 2, 1, 1, 50.0, 0.0, 10.0}};
    return c;
}

// The toy instance used for oracle comparisons: 3 generators at node 1, 3
// consumers at node 2, lumps 1..5 MW, two years, Psi = 1.
// Quantities are chosen so that no cumulative supply or demand total is an
// integer: every congested flow then leaves a marginal bid strictly inside its
// bounds and node prices are unique.
inline gridreg::CaseStudy toy(double kappa = 1.0) {
    using namespace gridreg;
    CaseStudy c;
    c.nodes = {{1, 0.5}, {2, 0.5}};
    c.lines = {{1, 1, 2, 500.0, 0.0, {1, 2, 3, 4, 5}, 1.0, 0.5}};
    c.horizon.years = {1, 2};
    c.horizon.psi = 1.0;
    c.horizon.discount_rate = 0.01;
    c.policy = {kappa, 3000.0};
    const double gp[] = {20, 30, 40}, gq[] = {1.3, 1.9, 2.2};
    const double dp[] = {70, 55, 45}, dq[] = {1.6, 1.7, 2.4};
    for (int t : {1, 2})
        for (int k = 0; k < 3; ++k) {
            c.bids.push_back({AgentKind::generator, 1, t, 1, gp[k], 0.0, gq[k]});
            c.bids.push_back({AgentKind::consumer, 2, t, 1, dp[k], 0.0, dq[k]});
        }
    return c;
}

} // namespace fixtures
