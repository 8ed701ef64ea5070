#pragma once

// Brute-force bilevel solver for small cases: every expansion plan is priced
// by clearing the market LP and computing the Transco's profit.

#include "gridreg/planning.hpp"

#include <atomic>
#include <mutex>
#include <numeric>
#include <thread>

namespace gridreg {

struct OracleOptions {
    std::size_t max_lumps_per_line = std::numeric_limits<std::size_t>::max(); // first N lumps of each menu
    std::size_t budget = 100'000;
    bool refine_ties = false; // pick the Transco-preferred prices among all market duals
    unsigned parallelism = 1;
};

// Number of plans: product over lines of (1 + (|T| - 1) * lumps considered).
inline double count_plans(const CaseStudy& c, const OracleOptions& opt = {}) {
    double n = 1.0;
    const double years = static_cast<double>(c.horizon.years.size() - 1);
    for (const auto& l : c.lines)
        n *= 1.0 + years * static_cast<double>(std::min(l.lumps.size(), opt.max_lumps_per_line));
    return n;
}

// All plans in lexicographic order of per-line choices; per line the order is
// no build, then (year, lump) ascending. The last line varies fastest.
inline std::vector<ExpansionPlan> enumerate_plans(const CaseStudy& c, const OracleOptions& opt = {}) {
    const double n = count_plans(c, opt);
    if (n > static_cast<double>(opt.budget))
        throw BudgetError(fmt::format("{:.0f} plans exceed the enumeration budget of {}", n, opt.budget), n);

    const auto T = c.horizon.years.size();
    std::vector<std::vector<std::optional<LumpChoice>>> menu(c.lines.size());
    for (std::size_t l = 0; l < c.lines.size(); ++l) {
        menu[l].push_back(std::nullopt);
        const auto J = std::min(c.lines[l].lumps.size(), opt.max_lumps_per_line);
        for (std::size_t t = 1; t < T; ++t)
            for (std::size_t j = 0; j < J; ++j) menu[l].push_back(LumpChoice{t, j});
    }

    std::vector<ExpansionPlan> plans;
    plans.reserve(static_cast<std::size_t>(n));
    std::vector<std::size_t> idx(c.lines.size(), 0);
    while (true) {
        auto p = ExpansionPlan::empty_for(c);
        for (std::size_t l = 0; l < idx.size(); ++l)
            if (const auto& ch = menu[l][idx[l]]) p.select(c, l, ch->year, ch->lump);
        plans.push_back(std::move(p));
        std::size_t l = idx.size();
        while (l > 0) {
            --l;
            if (++idx[l] < menu[l].size()) break;
            idx[l] = 0;
            if (l == 0) return plans;
        }
        if (idx.empty()) return plans;
    }
}

struct OracleRow {
    ExpansionPlan plan;
    double profit = 0.0;
    double welfare = 0.0;   // discounted social welfare net of investment cost
    double fee_total = 0.0; // discounted
    double ms_total = 0.0;  // discounted, Psi-scaled
    double cost_total = 0.0;
    bool degenerate = false; // a node price may not be unique
};

struct OracleResult {
    ExpansionPlan best_plan;
    double best_profit = 0.0;
    std::size_t best_index = 0;
    std::vector<OracleRow> table;
    std::size_t plans_enumerated = 0;
};

namespace detail {

// Minimizes the participants' surplus (equivalently maximizes merchandising
// surplus) over the market duals that are optimal for the already cleared
// block `blk`, and writes the resulting prices and multipliers into `o`.
inline void refine_block_duals(const CaseStudy& c, const CaseLayout& lay, const ExpansionPlan& plan, std::size_t blk,
                               double welfare, MarketOutcome& o, const solver::SolverConfig& cfg) {
    using namespace solver;
    const auto t = lay.block_year(blk);
    const auto N = lay.num_nodes(), L = lay.num_lines();
    Model m;
    m.set_sense(ObjectiveSense::minimize);
    std::vector<VarId> pi(N), gamma(L), mux(L), mun(L);
    std::vector<std::optional<VarId>> xix(N), xin(N);
    std::vector<std::pair<std::size_t, std::pair<VarId, VarId>>> phi;
    LinearExpr dual_obj;
    for (std::size_t b = 0; b < N; ++b) {
        pi[b] = m.add_var("pi", -kInf, kInf);
        if (b == 0) continue;
        xix[b] = m.add_var("xi_max", 0.0, kInf);
        xin[b] = m.add_var("xi_min", 0.0, kInf);
        dual_obj.push_back({*xix[b], c.nodes[b].theta_max});
        dual_obj.push_back({*xin[b], c.nodes[b].theta_max});
    }
    for (const auto k : lay.block_bids(blk)) {
        const auto& bid = c.bids[k];
        const double sign = bid.kind == AgentKind::generator ? -1.0 : 1.0;
        const auto px = m.add_var("phi_max", 0.0, kInf, VarKind::continuous, bid.q_max);
        const auto pn = m.add_var("phi_min", 0.0, kInf, VarKind::continuous, -bid.q_min);
        m.add_row({{pi[lay.bid_node(k)], sign}, {px, 1.0}, {pn, -1.0}}, RowSense::eq, sign * bid.price);
        dual_obj.push_back({px, bid.q_max});
        dual_obj.push_back({pn, -bid.q_min});
        phi.push_back({k, {px, pn}});
    }
    std::vector<LinearExpr> angle(N);
    for (std::size_t l = 0; l < L; ++l) {
        gamma[l] = m.add_var("gamma", -kInf, kInf);
        mux[l] = m.add_var("mu_max", 0.0, kInf);
        mun[l] = m.add_var("mu_min", 0.0, kInf);
        const double cap = plan.capacity(c, l, t);
        dual_obj.push_back({mux[l], cap});
        dual_obj.push_back({mun[l], cap});
        m.add_row({{pi[lay.line_from(l)], 1.0}, {pi[lay.line_to(l)], -1.0}, {gamma[l], 1.0}, {mux[l], 1.0}, {mun[l], -1.0}},
                  RowSense::eq, 0.0);
        const double bl = c.lines[l].susceptance;
        angle[lay.line_from(l)].push_back({gamma[l], -bl});
        angle[lay.line_to(l)].push_back({gamma[l], bl});
    }
    for (std::size_t b = 1; b < N; ++b) {
        auto row = std::move(angle[b]);
        row.push_back({*xix[b], 1.0});
        row.push_back({*xin[b], -1.0});
        m.add_row(std::move(row), RowSense::eq, 0.0);
    }
    m.add_row(std::move(dual_obj), RowSense::le, welfare + 1e-9 * (1.0 + std::abs(welfare)));
    const auto r = optimize(m, cfg);
    if (r.status != Status::optimal) {
        spdlog::warn("tie refinement LP for block {} returned {}; keeping backend duals", blk, to_string(r.status));
        return;
    }
    for (std::size_t b = 0; b < N; ++b) {
        const auto s = lay.node_slot(blk, b);
        o.pi[s] = r.value(pi[b]);
        if (b > 0) {
            o.xi_max[s] = r.value(*xix[b]);
            o.xi_min[s] = r.value(*xin[b]);
        }
    }
    for (const auto& [k, v] : phi) {
        o.phi_max[k] = r.value(v.first);
        o.phi_min[k] = r.value(v.second);
    }
    double chi = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        const auto s = lay.line_slot(blk, l);
        o.gamma[s] = r.value(gamma[l]);
        o.mu_max[s] = r.value(mux[l]);
        o.mu_min[s] = r.value(mun[l]);
        const double bg = c.lines[l].susceptance * o.gamma[s];
        if (lay.line_from(l) == 0) chi += bg;
        if (lay.line_to(l) == 0) chi -= bg;
    }
    o.chi[blk] = chi;
}

// Nodes joined by lines below their limits form price groups. A group that
// trades but has every traded bid on a bound has no bid pinning its price.
inline bool possibly_degenerate(const CaseStudy& c, const CaseLayout& lay, const ExpansionPlan& plan,
                                const MarketOutcome& o) {
    const auto N = lay.num_nodes();
    for (std::size_t blk = 0; blk < lay.num_blocks(); ++blk) {
        std::vector<std::size_t> group(N);
        std::iota(group.begin(), group.end(), std::size_t{0});
        auto root = [&group](std::size_t v) {
            while (group[v] != v) v = group[v] = group[group[v]];
            return v;
        };
        for (std::size_t l = 0; l < lay.num_lines(); ++l) {
            const double cap = plan.capacity(c, l, lay.block_year(blk));
            if (std::abs(o.flow[lay.line_slot(blk, l)]) < cap - 1e-9 * (1.0 + cap))
                group[root(lay.line_from(l))] = root(lay.line_to(l));
        }
        std::vector<char> traded(N, 0), pinned(N, 0);
        for (const auto k : lay.block_bids(blk)) {
            const auto g = root(lay.bid_node(k));
            const double q = o.quantity[k], tol = 1e-9 * (1.0 + c.bids[k].q_max);
            if (q > tol) traded[g] = 1;
            if (q > c.bids[k].q_min + tol && q < c.bids[k].q_max - tol) pinned[g] = 1;
        }
        for (std::size_t g = 0; g < N; ++g)
            if (traded[g] && !pinned[g]) return true;
    }
    return false;
}

} // namespace detail

// Profit and bookkeeping of one plan at the market-clearing outcome.
inline OracleRow evaluate_plan(const CaseStudy& c, double kappa, const ExpansionPlan& plan,
                               const solver::SolverConfig& cfg = {}, bool refine_ties = false) {
    const CaseLayout lay(c);
    auto o = solve_wsm(c, plan, cfg);
    if (o.status != solver::Status::optimal)
        throw SolverError(fmt::format("market LP {} for plan {}", solver::to_string(o.status),
                                      plan_to_json(plan, c).dump()));
    OracleRow row;
    row.plan = plan;
    row.degenerate = detail::possibly_degenerate(c, lay, plan, o);
    if (refine_ties) {
        for (std::size_t blk = 0; blk < lay.num_blocks(); ++blk) {
            double w = 0.0;
            for (const auto k : lay.block_bids(blk))
                w += (c.bids[k].kind == AgentKind::consumer ? 1.0 : -1.0) * c.bids[k].price * o.quantity[k];
            detail::refine_block_duals(c, lay, plan, blk, w, o, cfg);
        }
    }
    const auto s = compute_surpluses(o, c);
    const auto fee = fee_from_surpluses(s, kappa);
    for (std::size_t t = 0; t < lay.num_years(); ++t) {
        const double d = lay.discount(t);
        row.fee_total += d * fee.phi[t];
        row.ms_total += d * s.yearly_merchandising(t);
        row.cost_total += d * plan.cost(c, t);
        row.welfare += d * (c.horizon.psi * s.welfare[t] - plan.cost(c, t));
    }
    row.profit = row.ms_total + row.fee_total - row.cost_total;
    return row;
}

inline OracleResult brute_force(const CaseStudy& c, double kappa, const solver::SolverConfig& cfg = {},
                                const OracleOptions& opt = {}) {
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw ValidationError("kappa", "must lie in [0, 1]");
    validate(c, {.check_big_m = false});
    auto plans = enumerate_plans(c, opt);
    OracleResult res;
    res.plans_enumerated = plans.size();
    res.table.resize(plans.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < plans.size(); i = next++) {
            try {
                res.table[i] = evaluate_plan(c, kappa, plans[i], cfg, opt.refine_ties);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(opt.parallelism, static_cast<unsigned>(plans.size())));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    // Highest profit; ties (1e-9 relative) go to fewer MW, then enumeration order.
    std::size_t best = 0;
    for (std::size_t i = 1; i < res.table.size(); ++i) {
        const double a = res.table[i].profit, b = res.table[best].profit;
        const double tol = 1e-9 * (1.0 + std::abs(b));
        if (a > b + tol || (a > b - tol && res.table[i].plan.total_mw(c) < res.table[best].plan.total_mw(c)))
            best = i;
    }
    res.best_index = best;
    res.best_plan = res.table[best].plan;
    res.best_profit = res.table[best].profit;
    if (!opt.refine_ties &&
        std::any_of(res.table.begin(), res.table.end(), [](const OracleRow& r) { return r.degenerate; }))
        spdlog::warn("oracle: some plans have non-unique market prices; profits use the backend's duals "
                     "(enable tie refinement for the Transco-optimistic prices)");
    return res;
}

inline void write_oracle_csv(const OracleResult& r, const CaseStudy& c, std::ostream& out) {
    out << "plan_id,line,year,lump_mw,profit,welfare,fee_total,ms_total,cost_total\n";
    for (std::size_t i = 0; i < r.table.size(); ++i) {
        const auto& row = r.table[i];
        const auto tail = fmt::format("{},{},{},{},{}", fmt6(row.profit), fmt6(row.welfare), fmt6(row.fee_total),
                                      fmt6(row.ms_total), fmt6(row.cost_total));
        bool any = false;
        for (std::size_t l = 0; l < row.plan.num_lines(); ++l)
            if (const auto& sel = row.plan.at(l)) {
                out << i << ',' << c.lines[l].id << ',' << c.horizon.years[sel->year] << ','
                    << fmt6(c.lines[l].lumps[sel->lump]) << ',' << tail << '\n';
                any = true;
            }
        if (!any) out << i << ",,,0," << tail << '\n';
    }
}

} // namespace gridreg
