#pragma once

// Optimality certificate for a market outcome: dual feasibility of the market
// LP's stationarity conditions, the primal/dual objective gap, and
// complementary slackness. Works on any MarketOutcome, whether it came from
// the market LP or was read back out of the planning MILP.

#include "gridreg/market.hpp"

#include <json.hpp>

namespace gridreg {

namespace detail {

inline void require_duals(const MarketOutcome& o, const CaseStudy& c, const CaseLayout& lay) {
    const auto nodes = lay.num_blocks() * lay.num_nodes();
    const auto lines = lay.num_blocks() * lay.num_lines();
    if (o.quantity.size() != c.bids.size() || o.phi_max.size() != c.bids.size() ||
        o.phi_min.size() != c.bids.size() || o.pi.size() != nodes || o.theta.size() != nodes ||
        o.xi_max.size() != nodes || o.xi_min.size() != nodes || o.flow.size() != lines ||
        o.gamma.size() != lines || o.mu_max.size() != lines || o.mu_min.size() != lines ||
        o.chi.size() != lay.num_blocks())
        throw ValidationError("outcome", "missing primal or dual values");
}

} // namespace detail

// Largest violation of the stationarity conditions and dual sign restrictions.
inline double dual_feasibility(const MarketOutcome& o, const CaseStudy& c, const ExpansionPlan& plan) {
    plan.validate(c);
    const CaseLayout lay(c);
    detail::require_duals(o, c, lay);
    double r = 0.0;
    auto neg = [&r](double v) { r = std::max(r, -v); };

    for (std::size_t k = 0; k < c.bids.size(); ++k) {
        const auto& bid = c.bids[k];
        const double pi = o.pi[lay.node_slot(lay.bid_block(k), lay.bid_node(k))];
        const double bound = o.phi_max[k] - o.phi_min[k];
        const double res = bid.kind == AgentKind::generator ? -pi + bound + bid.price
                                                            : pi + bound - bid.price;
        r = std::max(r, std::abs(res));
        neg(o.phi_max[k]);
        neg(o.phi_min[k]);
    }
    for (std::size_t blk = 0; blk < lay.num_blocks(); ++blk) {
        std::vector<double> angle(lay.num_nodes(), 0.0);
        for (std::size_t l = 0; l < lay.num_lines(); ++l) {
            const auto slot = lay.line_slot(blk, l);
            const auto from = lay.line_from(l), to = lay.line_to(l);
            const double res = o.pi[lay.node_slot(blk, from)] - o.pi[lay.node_slot(blk, to)] +
                               o.gamma[slot] + o.mu_max[slot] - o.mu_min[slot];
            r = std::max(r, std::abs(res));
            neg(o.mu_max[slot]);
            neg(o.mu_min[slot]);
            const double bg = c.lines[l].susceptance * o.gamma[slot];
            angle[from] -= bg;
            angle[to] += bg;
        }
        for (std::size_t b = 0; b < lay.num_nodes(); ++b) {
            const auto slot = lay.node_slot(blk, b);
            const double res = b == 0 ? angle[b] + o.chi[blk] : angle[b] + o.xi_max[slot] - o.xi_min[slot];
            r = std::max(r, std::abs(res));
            neg(o.xi_max[slot]);
            neg(o.xi_min[slot]);
        }
    }
    return r;
}

// Welfare of the dispatch in `o`, per hour, summed over all blocks.
inline double primal_objective(const MarketOutcome& o, const CaseStudy& c) {
    double z = 0.0;
    for (std::size_t k = 0; k < c.bids.size(); ++k)
        z += (c.bids[k].kind == AgentKind::consumer ? 1.0 : -1.0) * c.bids[k].price * o.quantity[k];
    return z;
}

// Dual objective: bid bounds, line capacities (existing plus built lumps) and
// angle limits weighted by their multipliers.
inline double dual_objective(const MarketOutcome& o, const CaseStudy& c, const ExpansionPlan& plan) {
    const CaseLayout lay(c);
    double z = 0.0;
    for (std::size_t k = 0; k < c.bids.size(); ++k)
        z += o.phi_max[k] * c.bids[k].q_max - o.phi_min[k] * c.bids[k].q_min;
    for (std::size_t blk = 0; blk < lay.num_blocks(); ++blk) {
        const auto t = lay.block_year(blk);
        for (std::size_t l = 0; l < lay.num_lines(); ++l) {
            const auto slot = lay.line_slot(blk, l);
            z += plan.capacity(c, l, t) * (o.mu_max[slot] + o.mu_min[slot]);
        }
        for (std::size_t b = 1; b < lay.num_nodes(); ++b) {
            const auto slot = lay.node_slot(blk, b);
            z += c.nodes[b].theta_max * (o.xi_max[slot] + o.xi_min[slot]);
        }
    }
    return z;
}

inline double strong_duality_gap(const MarketOutcome& o, const CaseStudy& c, const ExpansionPlan& plan) {
    plan.validate(c);
    detail::require_duals(o, c, CaseLayout(c));
    return std::abs(primal_objective(o, c) - dual_objective(o, c, plan));
}

inline double complementarity(const MarketOutcome& o, const CaseStudy& c, const ExpansionPlan& plan) {
    plan.validate(c);
    const CaseLayout lay(c);
    detail::require_duals(o, c, lay);
    double r = 0.0;
    auto acc = [&r](double mult, double slack) { r = std::max(r, std::abs(mult * slack)); };
    for (std::size_t k = 0; k < c.bids.size(); ++k) {
        acc(o.phi_max[k], c.bids[k].q_max - o.quantity[k]);
        acc(o.phi_min[k], o.quantity[k] - c.bids[k].q_min);
    }
    for (std::size_t blk = 0; blk < lay.num_blocks(); ++blk) {
        const auto t = lay.block_year(blk);
        for (std::size_t l = 0; l < lay.num_lines(); ++l) {
            const auto slot = lay.line_slot(blk, l);
            const double cap = plan.capacity(c, l, t);
            acc(o.mu_max[slot], cap - o.flow[slot]);
            acc(o.mu_min[slot], cap + o.flow[slot]);
        }
        for (std::size_t b = 1; b < lay.num_nodes(); ++b) {
            const auto slot = lay.node_slot(blk, b);
            const double tm = c.nodes[b].theta_max;
            acc(o.xi_max[slot], tm - o.theta[slot]);
            acc(o.xi_min[slot], o.theta[slot] + tm);
        }
    }
    return r;
}

// Largest violation of the market LP's primal constraints.
inline double primal_feasibility(const MarketOutcome& o, const CaseStudy& c, const ExpansionPlan& plan) {
    plan.validate(c);
    const CaseLayout lay(c);
    detail::require_duals(o, c, lay);
    double r = 0.0;
    std::vector<double> balance(lay.num_blocks() * lay.num_nodes(), 0.0);
    for (std::size_t k = 0; k < c.bids.size(); ++k) {
        const double q = o.quantity[k];
        r = std::max({r, c.bids[k].q_min - q, q - c.bids[k].q_max});
        balance[lay.node_slot(lay.bid_block(k), lay.bid_node(k))] +=
            c.bids[k].kind == AgentKind::generator ? -q : q;
    }
    for (std::size_t blk = 0; blk < lay.num_blocks(); ++blk) {
        const auto t = lay.block_year(blk);
        for (std::size_t l = 0; l < lay.num_lines(); ++l) {
            const auto slot = lay.line_slot(blk, l);
            const double f = o.flow[slot];
            const auto from = lay.node_slot(blk, lay.line_from(l)), to = lay.node_slot(blk, lay.line_to(l));
            balance[from] += f;
            balance[to] -= f;
            r = std::max(r, std::abs(f - c.lines[l].susceptance * (o.theta[from] - o.theta[to])));
            r = std::max(r, std::abs(f) - plan.capacity(c, l, t));
        }
        r = std::max(r, std::abs(o.theta[lay.node_slot(blk, 0)]));
        for (std::size_t b = 1; b < lay.num_nodes(); ++b)
            r = std::max(r, std::abs(o.theta[lay.node_slot(blk, b)]) - c.nodes[b].theta_max);
    }
    for (const double v : balance) r = std::max(r, std::abs(v));
    return std::max(r, 0.0);
}

// pi*q rewritten through bid bounds and their multipliers; exact at any KKT point.
inline double linearization_residual(const MarketOutcome& o, const CaseStudy& c) {
    const CaseLayout lay(c);
    double r = 0.0;
    for (std::size_t k = 0; k < c.bids.size(); ++k) {
        const auto& bid = c.bids[k];
        const double pi = o.pi[lay.node_slot(lay.bid_block(k), lay.bid_node(k))];
        const double q = o.quantity[k];
        const double lin = bid.kind == AgentKind::generator
                               ? bid.price * q + o.phi_max[k] * bid.q_max - o.phi_min[k] * bid.q_min
                               : bid.price * q - o.phi_max[k] * bid.q_max + o.phi_min[k] * bid.q_min;
        r = std::max(r, std::abs(pi * q - lin));
    }
    return r;
}

// Residuals are divided by `scale` = 1 + |primal objective|.
struct DualCertificate {
    double primal_feasibility = 0.0;
    double dual_feasibility = 0.0;
    double strong_duality_gap = 0.0;
    double complementarity = 0.0;
    double linearization = 0.0;
    double scale = 1.0;
    double tolerance = 1e-5;

    double worst() const {
        return std::max({primal_feasibility, dual_feasibility, strong_duality_gap, complementarity, linearization});
    }
    bool pass() const { return worst() <= tolerance; }
};

inline DualCertificate certify(const MarketOutcome& o, const CaseStudy& c, const ExpansionPlan& plan,
                               double tolerance = 1e-5) {
    DualCertificate d;
    d.tolerance = tolerance;
    d.scale = 1.0 + std::abs(primal_objective(o, c));
    d.primal_feasibility = primal_feasibility(o, c, plan) / d.scale;
    d.dual_feasibility = dual_feasibility(o, c, plan) / d.scale;
    d.strong_duality_gap = strong_duality_gap(o, c, plan) / d.scale;
    d.complementarity = complementarity(o, c, plan) / d.scale;
    d.linearization = linearization_residual(o, c) / d.scale;
    return d;
}

inline void to_json(nlohmann::json& j, const DualCertificate& d) {
    j = nlohmann::json{{"primal_feasibility", d.primal_feasibility},
                       {"dual_feasibility", d.dual_feasibility},
                       {"strong_duality_gap", d.strong_duality_gap},
                       {"complementarity", d.complementarity},
                       {"linearization", d.linearization},
                       {"scale", d.scale},
                       {"tolerance", d.tolerance},
                       {"pass", d.pass()}};
}

} // namespace gridreg
