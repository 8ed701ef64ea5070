#pragma once

// Wholesale market clearing for a fixed expansion plan: a welfare-maximizing
// DC-OPF LP over every (year, period) block, its full dual solution, and the
// surplus accounting built on top of it.

#include "gridreg/case.hpp"
#include "gridreg/solver.hpp"

#include <fmt/format.h>

#include <optional>

namespace gridreg {

// Lumpy expansion decisions: at most one (build year, lump) per line. Years and
// lumps are positional; year 0 is the baseline and cannot carry a build.
struct LumpChoice {
    std::size_t year = 1;
    std::size_t lump = 0;
    bool operator==(const LumpChoice&) const = default;
};

class ExpansionPlan {
public:
    ExpansionPlan() = default;
    explicit ExpansionPlan(std::size_t num_lines) : choice_(num_lines) {}

    static ExpansionPlan empty_for(const CaseStudy& c) { return ExpansionPlan(c.lines.size()); }

    // Records a build; rejects baseline-year builds, unknown lumps and a second
    // build on the same line.
    void select(const CaseStudy& c, std::size_t line, std::size_t year, std::size_t lump) {
        const auto field = "plan.line[" + std::to_string(line) + "]";
        if (line >= choice_.size()) throw ValidationError(field, "no such line");
        if (year == 0) throw ValidationError(field, "no expansion allowed in the baseline year");
        if (year >= c.horizon.years.size()) throw ValidationError(field, "year outside horizon");
        if (lump >= c.lines[line].lumps.size()) throw ValidationError(field, "no such lump");
        if (choice_[line]) throw ValidationError(field, "line already selected once");
        choice_[line] = LumpChoice{year, lump};
    }

    // Same, addressed by line id, calendar year and lump size in MW.
    void select_mw(const CaseStudy& c, int line_id, int year, double mw) {
        const auto l = std::find_if(c.lines.begin(), c.lines.end(),
                                    [&](const Line& x) { return x.id == line_id; });
        if (l == c.lines.end()) throw ValidationError("plan", "unknown line id " + std::to_string(line_id));
        const auto y = std::find(c.horizon.years.begin(), c.horizon.years.end(), year);
        if (y == c.horizon.years.end()) throw ValidationError("plan", "unknown year " + std::to_string(year));
        const auto j = std::find(l->lumps.begin(), l->lumps.end(), mw);
        if (j == l->lumps.end())
            throw ValidationError("plan", fmt::format("line {} has no {} MW lump", line_id, mw));
        select(c, static_cast<std::size_t>(l - c.lines.begin()),
               static_cast<std::size_t>(y - c.horizon.years.begin()),
               static_cast<std::size_t>(j - l->lumps.begin()));
    }

    void validate(const CaseStudy& c) const {
        if (choice_.size() != c.lines.size()) throw ValidationError("plan", "line count mismatch");
        ExpansionPlan check(choice_.size());
        for (std::size_t l = 0; l < choice_.size(); ++l)
            if (choice_[l]) check.select(c, l, choice_[l]->year, choice_[l]->lump);
    }

    std::size_t num_lines() const { return choice_.size(); }
    const std::optional<LumpChoice>& at(std::size_t line) const { return choice_.at(line); }

    // b^F: whether lump j of line l is built in year t.
    bool built(std::size_t l, std::size_t t, std::size_t j) const {
        return choice_[l] && choice_[l]->year == t && choice_[l]->lump == j;
    }
    // u: whether line l is expanded in year t.
    bool expanded_in(std::size_t l, std::size_t t) const { return choice_[l] && choice_[l]->year == t; }

    double lump_mw(const CaseStudy& c, std::size_t l) const {
        return choice_[l] ? c.lines[l].lumps[choice_[l]->lump] : 0.0;
    }

    // Existing plus cumulative expansion available on line l in year t.
    double capacity(const CaseStudy& c, std::size_t l, std::size_t t) const {
        double cap = c.lines[l].capacity;
        if (choice_[l] && choice_[l]->year <= t) cap += c.lines[l].lumps[choice_[l]->lump];
        return cap;
    }

    // Undiscounted, Psi-scaled investment cost charged in year t.
    double cost(const CaseStudy& c, std::size_t t) const {
        double k = 0.0;
        for (std::size_t l = 0; l < choice_.size(); ++l)
            if (expanded_in(l, t))
                k += c.horizon.psi * (c.lines[l].k_fix + c.lines[l].k_var * lump_mw(c, l));
        return k;
    }

    double total_mw(const CaseStudy& c) const {
        double mw = 0.0;
        for (std::size_t l = 0; l < choice_.size(); ++l) mw += lump_mw(c, l);
        return mw;
    }

    bool operator==(const ExpansionPlan&) const = default;

private:
    std::vector<std::optional<LumpChoice>> choice_;
};

// Primal and dual values of the market LP. Bid-indexed vectors align with
// CaseStudy::bids; node and line vectors use CaseLayout slots.
struct MarketOutcome {
    solver::Status status = solver::Status::error;
    std::vector<double> quantity;       // g or d per bid, MW
    std::vector<double> phi_max, phi_min;
    std::vector<double> theta, pi, xi_max, xi_min; // per node slot
    std::vector<double> flow, gamma, mu_max, mu_min; // per line slot
    std::vector<double> chi;            // per block
    double objective = 0.0;             // per-hour welfare summed over blocks

    void resize(const CaseLayout& lay) {
        const auto nb = lay.data().bids.size();
        quantity.assign(nb, 0.0);
        phi_max.assign(nb, 0.0);
        phi_min.assign(nb, 0.0);
        const auto ns = lay.num_blocks() * lay.num_nodes();
        theta.assign(ns, 0.0);
        pi.assign(ns, 0.0);
        xi_max.assign(ns, 0.0);
        xi_min.assign(ns, 0.0);
        const auto nl = lay.num_blocks() * lay.num_lines();
        flow.assign(nl, 0.0);
        gamma.assign(nl, 0.0);
        mu_max.assign(nl, 0.0);
        mu_min.assign(nl, 0.0);
        chi.assign(lay.num_blocks(), 0.0);
    }
};

// Column/row handles of a market LP built over a subset of blocks.
struct WsmModel {
    solver::Model model;
    std::vector<std::size_t> blocks;
    std::vector<std::optional<solver::VarId>> q;       // per bid
    std::vector<std::optional<solver::VarId>> theta;   // per node slot
    std::vector<std::optional<solver::VarId>> flow;    // per line slot
    std::vector<std::optional<solver::RowId>> balance; // per node slot
    std::vector<std::optional<solver::RowId>> flow_def, cap_max, cap_min; // per line slot
};

// Builds the market LP for `blocks` (all blocks when empty).
inline WsmModel build_wsm_lp(const CaseStudy& c, const ExpansionPlan& plan,
                             std::vector<std::size_t> blocks = {}) {
    using namespace solver;
    plan.validate(c);
    const CaseLayout lay(c);
    if (blocks.empty())
        for (std::size_t b = 0; b < lay.num_blocks(); ++b) blocks.push_back(b);

    WsmModel w;
    w.blocks = blocks;
    w.q.resize(c.bids.size());
    w.theta.resize(lay.num_blocks() * lay.num_nodes());
    w.balance.resize(w.theta.size());
    w.flow.resize(lay.num_blocks() * lay.num_lines());
    w.flow_def.resize(w.flow.size());
    w.cap_max.resize(w.flow.size());
    w.cap_min.resize(w.flow.size());
    auto& m = w.model;
    m.set_sense(ObjectiveSense::maximize);

    for (const auto blk : blocks) {
        const auto t = lay.block_year(blk);
        std::vector<LinearExpr> bal(lay.num_nodes());
        for (const auto k : lay.block_bids(blk)) {
            const auto& bid = c.bids[k];
            const bool gen = bid.kind == AgentKind::generator;
            const auto v = m.add_var(fmt::format("{}[{}]", gen ? "g" : "d", k), bid.q_min, bid.q_max,
                                     VarKind::continuous, gen ? -bid.price : bid.price);
            w.q[k] = v;
            bal[lay.bid_node(k)].push_back({v, gen ? -1.0 : 1.0});
        }
        for (std::size_t b = 0; b < lay.num_nodes(); ++b) {
            const double tmax = c.nodes[b].theta_max;
            w.theta[lay.node_slot(blk, b)] =
                b == 0 ? m.add_var(fmt::format("theta[{},{}]", blk, b), 0.0, 0.0)
                       : m.add_var(fmt::format("theta[{},{}]", blk, b), -tmax, tmax);
        }
        for (std::size_t l = 0; l < lay.num_lines(); ++l) {
            const auto slot = lay.line_slot(blk, l);
            const auto f = m.add_var(fmt::format("f[{},{}]", blk, l), -kInf, kInf);
            w.flow[slot] = f;
            bal[lay.line_from(l)].push_back({f, 1.0});
            bal[lay.line_to(l)].push_back({f, -1.0});
            const double bl = c.lines[l].susceptance;
            w.flow_def[slot] = m.add_row({{f, 1.0},
                                          {*w.theta[lay.node_slot(blk, lay.line_from(l))], -bl},
                                          {*w.theta[lay.node_slot(blk, lay.line_to(l))], bl}},
                                         RowSense::eq, 0.0, fmt::format("flowdef[{},{}]", blk, l));
            const double cap = plan.capacity(c, l, t);
            w.cap_max[slot] = m.add_row({{f, 1.0}}, RowSense::le, cap, fmt::format("fmax[{},{}]", blk, l));
            w.cap_min[slot] = m.add_row({{f, -1.0}}, RowSense::le, cap, fmt::format("fmin[{},{}]", blk, l));
        }
        for (std::size_t b = 0; b < lay.num_nodes(); ++b)
            w.balance[lay.node_slot(blk, b)] =
                m.add_row(std::move(bal[b]), RowSense::eq, 0.0, fmt::format("balance[{},{}]", blk, b));
    }
    return w;
}

namespace detail {

// Copies primal/dual values of one solved WsmModel into `out`.
inline void extract_market(const CaseStudy& c, const CaseLayout& lay, const WsmModel& w,
                           const solver::SolveResult& r, MarketOutcome& out) {
    for (const auto blk : w.blocks) {
        for (const auto k : lay.block_bids(blk)) {
            const auto v = *w.q[k];
            out.quantity[k] = r.value(v);
            const double d = r.col_duals.at(v.index);
            out.phi_max[k] = std::max(d, 0.0);
            out.phi_min[k] = std::max(-d, 0.0);
        }
        for (std::size_t b = 0; b < lay.num_nodes(); ++b) {
            const auto slot = lay.node_slot(blk, b);
            out.theta[slot] = r.value(*w.theta[slot]);
            out.pi[slot] = r.dual(*w.balance[slot]);
            if (b != 0) {
                const double d = r.col_duals.at(w.theta[slot]->index);
                out.xi_max[slot] = std::max(d, 0.0);
                out.xi_min[slot] = std::max(-d, 0.0);
            }
        }
        double chi = 0.0;
        for (std::size_t l = 0; l < lay.num_lines(); ++l) {
            const auto slot = lay.line_slot(blk, l);
            out.flow[slot] = r.value(*w.flow[slot]);
            out.gamma[slot] = r.dual(*w.flow_def[slot]);
            out.mu_max[slot] = r.dual(*w.cap_max[slot]);
            out.mu_min[slot] = r.dual(*w.cap_min[slot]);
            const double bg = c.lines[l].susceptance * out.gamma[slot];
            if (lay.line_from(l) == 0) chi += bg;
            if (lay.line_to(l) == 0) chi -= bg;
        }
        out.chi[blk] = chi; // reference-node stationarity
    }
}

} // namespace detail

struct MarketOptions {
    bool decompose = true; // one LP per (year, period) block instead of one for the horizon
};

// Clears the market for a fixed plan. An infeasible LP (possible only with
// q_min > 0) is reported through `status`; backend failures throw.
inline MarketOutcome solve_wsm(const CaseStudy& c, const ExpansionPlan& plan,
                               const solver::SolverConfig& cfg = {}, MarketOptions opt = {}) {
    const CaseLayout lay(c);
    MarketOutcome out;
    out.resize(lay);
    out.status = solver::Status::optimal;

    std::vector<std::vector<std::size_t>> groups;
    if (opt.decompose)
        for (std::size_t b = 0; b < lay.num_blocks(); ++b) groups.push_back({b});
    else
        groups.emplace_back();

    for (const auto& g : groups) {
        const auto w = build_wsm_lp(c, plan, g);
        const auto r = solver::optimize(w.model, cfg);
        if (r.status != solver::Status::optimal) {
            out.status = r.status;
            return out;
        }
        if (!r.has_duals()) throw SolverError("market LP solved without duals");
        detail::extract_market(c, lay, w, r, out);
        out.objective += r.objective;
    }
    return out;
}

// Per-year surplus accounting (per hour, summed over periods).
struct SurplusReport {
    std::vector<double> load;          // S^L_t
    std::vector<double> generation;    // S^G_t
    std::vector<double> merchandising; // MS_t
    std::vector<double> welfare;       // bid-weighted welfare, S^L + S^G + MS
    double psi = 1.0;

    double yearly_load(std::size_t t) const { return psi * load[t]; }
    double yearly_generation(std::size_t t) const { return psi * generation[t]; }
    double yearly_merchandising(std::size_t t) const { return psi * merchandising[t]; }
    double participant_surplus(std::size_t t) const { return load[t] + generation[t]; }
};

inline SurplusReport compute_surpluses(const MarketOutcome& o, const CaseStudy& c) {
    const CaseLayout lay(c);
    SurplusReport s;
    const auto nt = lay.num_years();
    s.load.assign(nt, 0.0);
    s.generation.assign(nt, 0.0);
    s.merchandising.assign(nt, 0.0);
    s.welfare.assign(nt, 0.0);
    s.psi = c.horizon.psi;
    for (std::size_t k = 0; k < c.bids.size(); ++k) {
        const auto& bid = c.bids[k];
        const auto blk = lay.bid_block(k);
        const auto t = lay.block_year(blk);
        const double price = o.pi[lay.node_slot(blk, lay.bid_node(k))];
        const double q = o.quantity[k];
        if (bid.kind == AgentKind::consumer) {
            s.load[t] += (bid.price - price) * q;
            s.merchandising[t] += price * q;
            s.welfare[t] += bid.price * q;
        } else {
            s.generation[t] += (price - bid.price) * q;
            s.merchandising[t] -= price * q;
            s.welfare[t] -= bid.price * q;
        }
    }
    return s;
}

// Congestion rent sum_l f * (pi_to - pi_from) per year; equals MS when every
// node balances.
inline std::vector<double> congestion_rent(const MarketOutcome& o, const CaseStudy& c) {
    const CaseLayout lay(c);
    std::vector<double> rent(lay.num_years(), 0.0);
    for (std::size_t blk = 0; blk < lay.num_blocks(); ++blk)
        for (std::size_t l = 0; l < lay.num_lines(); ++l) {
            const double spread = o.pi[lay.node_slot(blk, lay.line_to(l))] -
                                  o.pi[lay.node_slot(blk, lay.line_from(l))];
            rent[lay.block_year(blk)] += o.flow[lay.line_slot(blk, l)] * spread;
        }
    return rent;
}

inline std::string fmt6(double v) { return fmt::format("{:.6g}", v == 0.0 ? 0.0 : v); }

inline void write_prices_csv(const MarketOutcome& o, const CaseStudy& c, std::ostream& out) {
    const CaseLayout lay(c);
    out << "t,s,b,pi\n";
    for (std::size_t t = 0; t < lay.num_years(); ++t)
        for (std::size_t s = 0; s < lay.num_periods(); ++s)
            for (std::size_t b = 0; b < lay.num_nodes(); ++b)
                out << c.horizon.years[t] << ',' << c.horizon.periods[s] << ',' << c.nodes[b].id << ','
                    << fmt6(o.pi[lay.node_slot(lay.block(t, s), b)]) << '\n';
}

inline void write_flows_csv(const MarketOutcome& o, const CaseStudy& c, std::ostream& out) {
    const CaseLayout lay(c);
    out << "t,s,l,f\n";
    for (std::size_t t = 0; t < lay.num_years(); ++t)
        for (std::size_t s = 0; s < lay.num_periods(); ++s)
            for (std::size_t l = 0; l < lay.num_lines(); ++l)
                out << c.horizon.years[t] << ',' << c.horizon.periods[s] << ',' << c.lines[l].id << ','
                    << fmt6(o.flow[lay.line_slot(lay.block(t, s), l)]) << '\n';
}

inline void write_dispatch_csv(const MarketOutcome& o, const CaseStudy& c, std::ostream& out) {
    out << "t,s,b,kind,bid,q\n";
    for (std::size_t k = 0; k < c.bids.size(); ++k) {
        const auto& bid = c.bids[k];
        out << bid.year << ',' << bid.period << ',' << bid.node << ',' << to_string(bid.kind) << ','
            << k << ',' << fmt6(o.quantity[k]) << '\n';
    }
}

} // namespace gridreg
