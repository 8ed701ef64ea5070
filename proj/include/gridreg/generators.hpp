#pragma once

// Seeded generators for the 2-node and modified Garver 6-node case studies.

#include "gridreg/case.hpp"

#include <array>
#include <random>

namespace gridreg {

namespace detail {

inline std::vector<double> integer_lumps(int lo, int hi) {
    std::vector<double> v;
    for (int x = lo; x <= hi; ++x) v.push_back(x);
    return v;
}

inline std::vector<int> year_range(int n) {
    std::vector<int> v;
    for (int t = 1; t <= n; ++t) v.push_back(t);
    return v;
}

} // namespace detail

struct TwoNodeOptions {
    int generators = 50;        // all at node 1
    int consumers = 50;         // all at node 2
    double generator_price_mean = 40.0;
    double consumer_price_mean = 50.0;
    double price_sd = 10.0;
    double q_max_high = 10.0;   // q_max ~ U(0, q_max_high)
    double reactance = 0.2;     // p.u.
    double base_mva = 100.0;
    double existing_capacity = 0.0;
    double k_fix = 100.0;
    double k_var = 5.0;
    int max_lump = 400;         // lumps {1, ..., max_lump} MW
    int years = 2;
    double psi = 8760.0;
    double discount_rate = 0.01;
    double theta_max = 0.5;
    double kappa = 1.0;
    double big_m = 3000.0;
    bool redraw_each_year = false; // otherwise the same draws repeat for every (t, s)
};

inline CaseStudy generate_two_node_case(std::uint64_t seed, const TwoNodeOptions& o = {}) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gen_price(o.generator_price_mean, o.price_sd);
    std::normal_distribution<double> con_price(o.consumer_price_mean, o.price_sd);
    std::uniform_real_distribution<double> qty(0.0, o.q_max_high);

    CaseStudy c;
    c.nodes = {{1, o.theta_max}, {2, o.theta_max}};
    c.lines = {{1, 1, 2, o.base_mva / o.reactance, o.existing_capacity,
                detail::integer_lumps(1, o.max_lump), o.k_fix, o.k_var}};
    c.horizon.years = detail::year_range(o.years);
    c.horizon.periods = {1};
    c.horizon.psi = o.psi;
    c.horizon.discount_rate = o.discount_rate;
    c.policy = {o.kappa, o.big_m};

    struct Draw { double price, q_max; };
    auto draw_all = [&] {
        std::vector<Draw> gens, cons;
        for (int k = 0; k < o.generators; ++k) {
            const double p = gen_price(rng);
            gens.push_back({p, std::max(0.0, qty(rng))});
        }
        for (int k = 0; k < o.consumers; ++k) {
            const double p = con_price(rng);
            cons.push_back({p, std::max(0.0, qty(rng))});
        }
        return std::pair{gens, cons};
    };

    auto draws = draw_all();
    for (int year : c.horizon.years) {
        if (o.redraw_each_year && year != c.horizon.years.front()) draws = draw_all();
        for (int period : c.horizon.periods) {
            for (const auto& g : draws.first)
                c.bids.push_back({AgentKind::generator, 1, year, period, g.price, 0.0, g.q_max});
            for (const auto& d : draws.second)
                c.bids.push_back({AgentKind::consumer, 2, year, period, d.price, 0.0, d.q_max});
        }
    }

    c.provenance.generator = "two_node";
    c.provenance.seed = seed;
    c.provenance.params = {{"generators", o.generators},
                           {"consumers", o.consumers},
                           {"generator_price_mean", o.generator_price_mean},
                           {"consumer_price_mean", o.consumer_price_mean},
                           {"price_sd", o.price_sd},
                           {"q_max_high", o.q_max_high},
                           {"reactance", o.reactance},
                           {"base_mva", o.base_mva},
                           {"max_lump", o.max_lump},
                           {"redraw_each_year", o.redraw_each_year}};
    return c;
}

// One branch of the Garver network; reactance in p.u., capacity in MW.
struct GarverBranch {
    int from, to;
    double reactance;
    double capacity;
};

// Branches 1-6 exist in the base year; 7 and 8 are new corridors from node 6.
// Endpoints, reactances and ratings follow the standard Garver data set.
inline constexpr const char* kGarverTopologyVersion = "garver6-v1";
inline const std::array<GarverBranch, 8>& garver_topology() {
    static const std::array<GarverBranch, 8> t{{
        {1, 2, 0.40, 100.0},
        {1, 4, 0.60, 80.0},
        {1, 5, 0.20, 100.0},
        {2, 3, 0.20, 100.0},
        {2, 4, 0.40, 100.0},
        {3, 5, 0.20, 100.0},
        {6, 2, 0.30, 0.0},
        {6, 4, 0.30, 0.0},
    }};
    return t;
}

struct GarverOptions {
    int agents_per_node = 1000;
    double price_mean = 50.0;
    double price_sd = 10.0;
    double q_max_high = 0.5;       // MW, consumers and generators at nodes 1 and 3
    double node6_q_max_high = 1.0; // MW, generators at node 6
    double load_growth = 0.05;     // per year, applied to consumer bounds
    double base_mva = 100.0;
    double k_fix = 100.0;
    double k_var = 5.0;
    int max_lump = 400;
    int years = 2;
    double psi = 8760.0;
    double discount_rate = 0.01;
    double theta_max = 0.5;
    double kappa = 1.0;
    double big_m = 3000.0;
    std::vector<GarverBranch> topology; // empty: garver_topology()
};

inline CaseStudy generate_garver_case(std::uint64_t seed, const GarverOptions& o = {}) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> price(o.price_mean, o.price_sd);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    CaseStudy c;
    for (int b = 1; b <= 6; ++b) c.nodes.push_back({b, o.theta_max});
    const std::vector<GarverBranch> topo =
        o.topology.empty() ? std::vector<GarverBranch>(garver_topology().begin(),
                                                       garver_topology().end())
                           : o.topology;
    int id = 1;
    for (const auto& br : topo)
        c.lines.push_back({id++, br.from, br.to, o.base_mva / br.reactance, br.capacity,
                           detail::integer_lumps(1, o.max_lump), o.k_fix, o.k_var});
    c.horizon.years = detail::year_range(o.years);
    c.horizon.periods = {1};
    c.horizon.psi = o.psi;
    c.horizon.discount_rate = o.discount_rate;
    c.policy = {o.kappa, o.big_m};

    struct Agent { AgentKind kind; int node; double price, q_max; };
    std::vector<Agent> agents;
    for (int node : {1, 3, 6}) {
        const double hi = node == 6 ? o.node6_q_max_high : o.q_max_high;
        for (int k = 0; k < o.agents_per_node; ++k) {
            const double p = price(rng);
            agents.push_back({AgentKind::generator, node, p, hi * unit(rng)});
        }
    }
    for (int node : {1, 2, 3, 4, 5}) {
        for (int k = 0; k < o.agents_per_node; ++k) {
            const double p = price(rng);
            agents.push_back({AgentKind::consumer, node, p, o.q_max_high * unit(rng)});
        }
    }

    for (std::size_t t = 0; t < c.horizon.years.size(); ++t) {
        const double growth = std::pow(1.0 + o.load_growth, static_cast<double>(t));
        for (int period : c.horizon.periods) {
            for (const auto& a : agents) {
                const double q = a.kind == AgentKind::consumer ? a.q_max * growth : a.q_max;
                c.bids.push_back({a.kind, a.node, c.horizon.years[t], period, a.price, 0.0, q});
            }
        }
    }

    c.provenance.generator = "garver6";
    c.provenance.seed = seed;
    c.provenance.params = {{"agents_per_node", o.agents_per_node},
                           {"price_mean", o.price_mean},
                           {"price_sd", o.price_sd},
                           {"q_max_high", o.q_max_high},
                           {"node6_q_max_high", o.node6_q_max_high},
                           {"load_growth", o.load_growth},
                           {"base_mva", o.base_mva},
                           {"max_lump", o.max_lump},
                           {"topology", o.topology.empty() ? kGarverTopologyVersion : "custom"}};
    return c;
}

// Small 2-node instance for brute-force cross-checks: 3 generators at node 1,
// 3 consumers at node 2, one empty corridor with lumps {1, ..., 5} MW, two
// years and Psi = 1. Prices and quantities are drawn once and repeated.
struct ToyOptions {
    int agents = 3;
    int max_lump = 5;
    double k_fix = 1.0;
    double k_var = 0.5;
    double discount_rate = 0.01;
    double kappa = 1.0;
};

inline CaseStudy generate_toy_case(std::uint64_t seed, const ToyOptions& o = {}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> gen_price(10.0, 45.0), con_price(35.0, 80.0), qty(0.5, 2.5);
    CaseStudy c;
    c.nodes = {{1, 0.5}, {2, 0.5}};
    c.lines = {{1, 1, 2, 500.0, 0.0, detail::integer_lumps(1, o.max_lump), o.k_fix, o.k_var}};
    c.horizon.years = {1, 2};
    c.horizon.psi = 1.0;
    c.horizon.discount_rate = o.discount_rate;
    c.policy.kappa = o.kappa;
    std::vector<Bid> draws;
    for (int k = 0; k < o.agents; ++k) {
        const double p = gen_price(rng);
        draws.push_back({AgentKind::generator, 1, 1, 1, p, 0.0, qty(rng)});
    }
    for (int k = 0; k < o.agents; ++k) {
        const double p = con_price(rng);
        draws.push_back({AgentKind::consumer, 2, 1, 1, p, 0.0, qty(rng)});
    }
    for (int year : c.horizon.years)
        for (auto b : draws) {
            b.year = year;
            c.bids.push_back(b);
        }
    c.provenance.generator = "toy";
    c.provenance.seed = seed;
    c.provenance.params = {{"agents", o.agents}, {"max_lump", o.max_lump}, {"k_fix", o.k_fix}, {"k_var", o.k_var}};
    return c;
}

} // namespace gridreg
