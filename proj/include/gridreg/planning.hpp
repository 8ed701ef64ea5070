#pragma once

// Single-level planning MILP. The market LP is replaced by its primal
// constraints, dual constraints and a linearized strong-duality equality;
// price-times-quantity terms are rewritten through bid bounds and bound
// multipliers, and binary-times-multiplier products use big-M envelopes.

#include "gridreg/duality.hpp"

#include <spdlog/spdlog.h>

#include <chrono>

namespace gridreg {

struct PlanningOptions {
    bool skip_big_m_guard = false; // allow M below the largest bid (audit tests)
    bool polish = true;            // re-solve the LP with the binaries fixed
    double certificate_tol = 1e-5;
};

struct ModelStats {
    std::size_t variables = 0;
    std::size_t constraints = 0;
    std::size_t binaries = 0;
    std::size_t envelopes = 0;
};

// y^max / y^min stand in for b * mu^max / b * mu^min of lump j on line l,
// built in year `build_year`, seen from block `block`.
struct Envelope {
    std::size_t build_year = 0, block = 0, line = 0, lump = 0;
    solver::VarId y_max, y_min;
};

struct PlanningMilp {
    solver::Model model;
    double kappa = 1.0;
    double big_m = 0.0;
    ModelStats stats;

    std::vector<solver::VarId> q, phi_max, phi_min;                     // per bid
    std::vector<std::optional<solver::VarId>> theta, xi_max, xi_min;    // per node slot
    std::vector<solver::VarId> pi;                                       // per node slot
    std::vector<solver::VarId> flow, gamma, mu_max, mu_min;              // per line slot
    std::vector<std::vector<std::vector<solver::VarId>>> b;              // [t][l][j]
    std::vector<std::vector<solver::VarId>> u;                           // [t][l]
    std::vector<solver::VarId> surplus, fee;                             // per year
    std::vector<Envelope> envelopes;
};

inline PlanningMilp assemble_milp(const CaseStudy& c, double kappa, const PlanningOptions& opt = {}) {
    using namespace solver;
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw ValidationError("kappa", "must lie in [0, 1]");
    validate(c, {.check_big_m = !opt.skip_big_m_guard});
    const double M = c.policy.big_m;
    if (M < c.max_abs_bid_price())
        spdlog::warn("big-M {} is below the largest bid price {}; envelopes may cut off optimal duals", M,
                     c.max_abs_bid_price());

    const CaseLayout lay(c);
    const auto T = lay.num_years(), N = lay.num_nodes(), L = lay.num_lines();
    const double psi = c.horizon.psi;

    PlanningMilp p;
    p.kappa = kappa;
    p.big_m = M;
    auto& m = p.model;
    m.set_sense(ObjectiveSense::maximize);

    // Investment decisions. Baseline-year binaries exist but are fixed at 0.
    p.b.resize(T);
    p.u.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        p.b[t].resize(L);
        for (std::size_t l = 0; l < L; ++l) {
            const double ub = t == 0 ? 0.0 : 1.0;
            for (std::size_t j = 0; j < c.lines[l].lumps.size(); ++j)
                p.b[t][l].push_back(m.add_var(fmt::format("b[{},{},{}]", t, l, j), 0.0, ub, VarKind::binary));
            p.u[t].push_back(m.add_var(fmt::format("u[{},{}]", t, l), 0.0, ub, VarKind::binary));
        }
    }
    for (std::size_t l = 0; l < L; ++l) {
        LinearExpr once;
        for (std::size_t t = 0; t < T; ++t) {
            LinearExpr link{{p.u[t][l], -1.0}};
            for (const auto v : p.b[t][l]) link.push_back({v, 1.0});
            m.add_row(std::move(link), RowSense::eq, 0.0, fmt::format("u_def[{},{}]", t, l));
            once.push_back({p.u[t][l], 1.0});
        }
        m.add_row(std::move(once), RowSense::le, 1.0, fmt::format("once[{}]", l));
    }

    // Lower level, block by block.
    const auto nb = c.bids.size();
    p.q.resize(nb);
    p.phi_max.resize(nb);
    p.phi_min.resize(nb);
    p.theta.resize(lay.num_blocks() * N);
    p.xi_max.resize(p.theta.size());
    p.xi_min.resize(p.theta.size());
    p.pi.resize(p.theta.size());
    p.flow.resize(lay.num_blocks() * L);
    p.gamma.resize(p.flow.size());
    p.mu_max.resize(p.flow.size());
    p.mu_min.resize(p.flow.size());
    p.surplus.resize(T);
    p.fee.resize(T);

    std::vector<LinearExpr> welfare(T), surplus_def(T);
    for (std::size_t blk = 0; blk < lay.num_blocks(); ++blk) {
        const auto t = lay.block_year(blk);
        LinearExpr sd; // primal objective minus dual objective of this block
        std::vector<LinearExpr> bal(N);

        for (std::size_t b = 0; b < N; ++b) {
            const auto slot = lay.node_slot(blk, b);
            p.pi[slot] = m.add_var(fmt::format("pi[{},{}]", blk, b), -kInf, kInf);
            if (b == 0) continue; // reference angle is the constant 0
            const double tm = c.nodes[b].theta_max;
            p.theta[slot] = m.add_var(fmt::format("theta[{},{}]", blk, b), -tm, tm);
            p.xi_max[slot] = m.add_var(fmt::format("xi_max[{},{}]", blk, b), 0.0, kInf);
            p.xi_min[slot] = m.add_var(fmt::format("xi_min[{},{}]", blk, b), 0.0, kInf);
            sd.push_back({*p.xi_max[slot], -tm});
            sd.push_back({*p.xi_min[slot], -tm});
        }

        for (const auto k : lay.block_bids(blk)) {
            const auto& bid = c.bids[k];
            const bool gen = bid.kind == AgentKind::generator;
            const double sign = gen ? -1.0 : 1.0;
            p.q[k] = m.add_var(fmt::format("q[{}]", k), bid.q_min, bid.q_max);
            p.phi_max[k] = m.add_var(fmt::format("phi_max[{}]", k), 0.0, kInf);
            p.phi_min[k] = m.add_var(fmt::format("phi_min[{}]", k), 0.0, kInf);
            const auto pi = p.pi[lay.node_slot(blk, lay.bid_node(k))];
            bal[lay.bid_node(k)].push_back({p.q[k], sign});
            // Stationarity in q: sign*pi + phi_max - phi_min = sign*price.
            m.add_row({{pi, sign}, {p.phi_max[k], 1.0}, {p.phi_min[k], -1.0}}, RowSense::eq,
                      sign * bid.price, fmt::format("stat_q[{}]", k));
            sd.push_back({p.q[k], sign * bid.price});
            sd.push_back({p.phi_max[k], -bid.q_max});
            sd.push_back({p.phi_min[k], bid.q_min});
            welfare[t].push_back({p.q[k], sign * bid.price});
            surplus_def[t].push_back({p.phi_max[k], bid.q_max});
            surplus_def[t].push_back({p.phi_min[k], -bid.q_min});
        }

        std::vector<LinearExpr> angle(N);
        for (std::size_t l = 0; l < L; ++l) {
            const auto slot = lay.line_slot(blk, l);
            const auto from = lay.line_from(l), to = lay.line_to(l);
            const double bl = c.lines[l].susceptance;
            const double f0 = c.lines[l].capacity;
            const auto f = p.flow[slot] = m.add_var(fmt::format("f[{},{}]", blk, l), -kInf, kInf);
            const auto g = p.gamma[slot] = m.add_var(fmt::format("gamma[{},{}]", blk, l), -kInf, kInf);
            const auto mx = p.mu_max[slot] = m.add_var(fmt::format("mu_max[{},{}]", blk, l), 0.0, kInf);
            const auto mn = p.mu_min[slot] = m.add_var(fmt::format("mu_min[{},{}]", blk, l), 0.0, kInf);
            bal[from].push_back({f, 1.0});
            bal[to].push_back({f, -1.0});

            LinearExpr def{{f, 1.0}};
            if (from != 0) def.push_back({*p.theta[lay.node_slot(blk, from)], -bl});
            if (to != 0) def.push_back({*p.theta[lay.node_slot(blk, to)], bl});
            m.add_row(std::move(def), RowSense::eq, 0.0, fmt::format("flowdef[{},{}]", blk, l));

            LinearExpr upper{{f, 1.0}}, lower{{f, -1.0}};
            for (std::size_t tb = 1; tb <= t; ++tb)
                for (std::size_t j = 0; j < c.lines[l].lumps.size(); ++j) {
                    const double mw = c.lines[l].lumps[j];
                    upper.push_back({p.b[tb][l][j], -mw});
                    lower.push_back({p.b[tb][l][j], -mw});
                    Envelope e{tb, blk, l, j, {}, {}};
                    const auto bv = p.b[tb][l][j];
                    for (const auto& [mu, y, tag] : {std::tuple{mx, &e.y_max, "max"}, std::tuple{mn, &e.y_min, "min"}}) {
                        *y = m.add_var(fmt::format("y_{}[{},{},{},{}]", tag, tb, blk, l, j), 0.0, kInf);
                        m.add_row({{*y, 1.0}, {bv, -M}}, RowSense::le, 0.0);
                        m.add_row({{mu, 1.0}, {*y, -1.0}}, RowSense::ge, 0.0);
                        m.add_row({{mu, 1.0}, {*y, -1.0}, {bv, M}}, RowSense::le, M);
                        sd.push_back({*y, -mw});
                    }
                    p.envelopes.push_back(e);
                }
            m.add_row(std::move(upper), RowSense::le, f0, fmt::format("fmax[{},{}]", blk, l));
            m.add_row(std::move(lower), RowSense::le, f0, fmt::format("fmin[{},{}]", blk, l));
            sd.push_back({mx, -f0});
            sd.push_back({mn, -f0});

            // Stationarity in f.
            m.add_row({{p.pi[lay.node_slot(blk, from)], 1.0},
                       {p.pi[lay.node_slot(blk, to)], -1.0},
                       {g, 1.0},
                       {mx, 1.0},
                       {mn, -1.0}},
                      RowSense::eq, 0.0, fmt::format("stat_f[{},{}]", blk, l));
            angle[from].push_back({g, -bl});
            angle[to].push_back({g, bl});
        }
        // Stationarity in theta; the reference node's condition only defines chi.
        for (std::size_t b = 1; b < N; ++b) {
            const auto slot = lay.node_slot(blk, b);
            auto row = std::move(angle[b]);
            row.push_back({*p.xi_max[slot], 1.0});
            row.push_back({*p.xi_min[slot], -1.0});
            m.add_row(std::move(row), RowSense::eq, 0.0, fmt::format("stat_theta[{},{}]", blk, b));
        }
        for (std::size_t b = 0; b < N; ++b)
            m.add_row(std::move(bal[b]), RowSense::eq, 0.0, fmt::format("balance[{},{}]", blk, b));
        m.add_row(std::move(sd), RowSense::eq, 0.0, fmt::format("strong_duality[{}]", blk));
    }

    // Upper level: surplus per year, fee recursion, discounted profit.
    for (std::size_t t = 0; t < T; ++t) {
        p.surplus[t] = m.add_var(fmt::format("surplus[{}]", t), -kInf, kInf);
        auto def = std::move(surplus_def[t]);
        def.push_back({p.surplus[t], -1.0});
        m.add_row(std::move(def), RowSense::eq, 0.0, fmt::format("surplus_def[{}]", t));
        p.fee[t] = t == 0 ? m.add_var("fee[0]", 0.0, 0.0) : m.add_var(fmt::format("fee[{}]", t), -kInf, kInf);
        if (t > 0)
            m.add_row({{p.fee[t], 1.0},
                       {p.fee[t - 1], -1.0},
                       {p.surplus[t], -kappa * psi},
                       {p.surplus[t - 1], kappa * psi}},
                      RowSense::eq, 0.0, fmt::format("fee_rec[{}]", t));

        const double d = lay.discount(t);
        for (const auto& term : welfare[t]) m.add_obj(term.var, d * psi * term.coef);
        m.add_obj(p.surplus[t], -d * psi);
        m.add_obj(p.fee[t], d);
        for (std::size_t l = 0; l < L; ++l) {
            m.add_obj(p.u[t][l], -d * psi * c.lines[l].k_fix);
            for (std::size_t j = 0; j < c.lines[l].lumps.size(); ++j)
                m.add_obj(p.b[t][l][j], -d * psi * c.lines[l].k_var * c.lines[l].lumps[j]);
        }
    }

    p.stats = {m.num_vars(), m.num_rows(), m.num_integer(), p.envelopes.size()};
    spdlog::info("planning MILP (kappa {}): {} variables, {} constraints, {} binaries, {} envelopes", kappa,
                 p.stats.variables, p.stats.constraints, p.stats.binaries, p.stats.envelopes);
    return p;
}

struct FeeTrajectory {
    double kappa = 0.0;
    std::vector<double> phi; // per year, currency
};

// Post-solve check of the big-M envelopes. `lp_mu_max` is the largest
// capacity multiplier on an envelope-bearing line in an independent market LP
// solved at the chosen plan.
struct EnvelopeAudit {
    double big_m = 0.0;
    double max_violation = 0.0; // max |y - b * mu|
    double tolerance = 0.0;     // 1e-5 * (1 + M)
    double lp_mu_max = 0.0;
    double welfare_mismatch = 0.0; // |LP welfare - embedded welfare|, scaled
    bool milp_infeasible = false;
    std::vector<std::string> messages;

    bool flagged() const { return !messages.empty(); }
};

struct PlanningSolution {
    solver::Status status = solver::Status::error;
    bool proven = false;
    double objective = 0.0; // discounted Transco profit
    double bound = 0.0;
    double gap = 0.0;
    double wall_time_s = 0.0;
    ExpansionPlan plan;
    FeeTrajectory fee;
    MarketOutcome outcome;
    std::vector<double> surplus; // per year, per hour, from the multiplier expression
    std::vector<double> y_max, y_min;
    DualCertificate certificate;
    EnvelopeAudit audit;
    ModelStats stats;

    bool certified() const { return status == solver::Status::optimal && certificate.pass() && !audit.flagged(); }
};

namespace detail {

inline MarketOutcome extract_outcome(const CaseStudy& c, const PlanningMilp& p, const std::vector<double>& x) {
    const CaseLayout lay(c);
    MarketOutcome o;
    o.resize(lay);
    o.status = solver::Status::optimal;
    auto val = [&x](solver::VarId v) { return x.at(v.index); };
    for (std::size_t k = 0; k < c.bids.size(); ++k) {
        o.quantity[k] = val(p.q[k]);
        o.phi_max[k] = val(p.phi_max[k]);
        o.phi_min[k] = val(p.phi_min[k]);
    }
    for (std::size_t s = 0; s < p.pi.size(); ++s) {
        o.pi[s] = val(p.pi[s]);
        if (p.theta[s]) {
            o.theta[s] = val(*p.theta[s]);
            o.xi_max[s] = val(*p.xi_max[s]);
            o.xi_min[s] = val(*p.xi_min[s]);
        }
    }
    for (std::size_t blk = 0; blk < lay.num_blocks(); ++blk) {
        double chi = 0.0;
        for (std::size_t l = 0; l < lay.num_lines(); ++l) {
            const auto s = lay.line_slot(blk, l);
            o.flow[s] = val(p.flow[s]);
            o.gamma[s] = val(p.gamma[s]);
            o.mu_max[s] = val(p.mu_max[s]);
            o.mu_min[s] = val(p.mu_min[s]);
            const double bg = c.lines[l].susceptance * o.gamma[s];
            if (lay.line_from(l) == 0) chi += bg;
            if (lay.line_to(l) == 0) chi -= bg;
        }
        o.chi[blk] = chi;
    }
    o.objective = primal_objective(o, c);
    return o;
}

} // namespace detail

inline constexpr double kInfPrice = std::numeric_limits<double>::infinity();

inline EnvelopeAudit audit_envelopes(const CaseStudy& c, const PlanningMilp& p, const PlanningSolution& s,
                                     const solver::SolverConfig& cfg) {
    EnvelopeAudit a;
    a.big_m = p.big_m;
    a.tolerance = 1e-5 * (1.0 + p.big_m);
    for (std::size_t e = 0; e < p.envelopes.size(); ++e) {
        const auto& env = p.envelopes[e];
        const double b = s.plan.built(env.line, env.build_year, env.lump) ? 1.0 : 0.0;
        const auto slot = CaseLayout(c).line_slot(env.block, env.line);
        a.max_violation = std::max({a.max_violation, std::abs(s.y_max[e] - b * s.outcome.mu_max[slot]),
                                    std::abs(s.y_min[e] - b * s.outcome.mu_min[slot])});
    }
    if (a.max_violation > a.tolerance)
        a.messages.push_back(fmt::format("envelope |y - b*mu| = {:.3g} exceeds {:.3g}", a.max_violation, a.tolerance));

    // The embedded lower level must agree with an unconstrained market LP.
    const auto lp = solve_wsm(c, s.plan, cfg);
    if (lp.status != solver::Status::optimal) {
        a.messages.push_back("market LP at the chosen plan is not optimal");
        return a;
    }
    const CaseLayout lay(c);
    for (std::size_t blk = 0; blk < lay.num_blocks(); ++blk) {
        if (lay.block_year(blk) == 0) continue;
        for (std::size_t l = 0; l < lay.num_lines(); ++l) {
            if (c.lines[l].lumps.empty()) continue;
            const auto slot = lay.line_slot(blk, l);
            a.lp_mu_max = std::max({a.lp_mu_max, lp.mu_max[slot], lp.mu_min[slot]});
        }
    }
    if (a.lp_mu_max > p.big_m * (1.0 + 1e-9))
        a.messages.push_back(fmt::format("market LP needs a capacity multiplier of {:.6g} > M = {:.6g}", a.lp_mu_max,
                                         p.big_m));
    // A multiplier can need up to the widest bid spread on radial paths; a
    // smaller M may hide plans from the MILP even when the chosen one is clean.
    double top = -kInfPrice, bottom = kInfPrice;
    for (const auto& bid : c.bids) {
        if (bid.kind == AgentKind::consumer) top = std::max(top, bid.price);
        else bottom = std::min(bottom, bid.price);
    }
    if (top > bottom && p.big_m < top - bottom)
        a.messages.push_back(
            fmt::format("M = {:.6g} is below the widest bid spread {:.6g}", p.big_m, top - bottom));
    a.welfare_mismatch = std::abs(lp.objective - s.outcome.objective) / (1.0 + std::abs(lp.objective));
    if (a.welfare_mismatch > 1e-6)
        a.messages.push_back(fmt::format("embedded market welfare {:.10g} differs from the market LP's {:.10g}",
                                         s.outcome.objective, lp.objective));
    return a;
}

// Solves the planning MILP. An infeasible MILP is reported with a flagged
// audit (the empty plan is always feasible unless M cuts off the duals); a
// time limit returns the incumbent with proven = false.
inline PlanningSolution solve_planning(const CaseStudy& c, double kappa, const solver::SolverConfig& cfg = {},
                                       const PlanningOptions& opt = {}) {
    const auto start = std::chrono::steady_clock::now();
    const auto p = assemble_milp(c, kappa, opt);
    PlanningSolution s;
    s.stats = p.stats;
    s.fee.kappa = kappa;

    const auto r = solver::optimize(p.model, cfg);
    s.status = r.status;
    s.gap = r.gap;
    s.bound = r.bound;
    if (r.status == solver::Status::infeasible) {
        s.audit.big_m = p.big_m;
        s.audit.milp_infeasible = true;
        s.audit.messages.push_back(fmt::format(
            "planning MILP infeasible: big-M envelopes (M = {:.6g}) cut off every dual solution", p.big_m));
        spdlog::error("{}", s.audit.messages.back());
        return s;
    }
    if (r.status == solver::Status::unbounded) throw SolverError("planning MILP unbounded");
    if (!r.has_incumbent || r.x.empty()) throw SolverError("planning MILP stopped without an incumbent");
    s.proven = r.status == solver::Status::optimal;

    std::vector<double> x = r.x;
    s.objective = r.objective;
    if (opt.polish) {
        const auto lp = solver::optimize(p.model.with_integers_fixed(x), cfg);
        if (lp.status == solver::Status::optimal) {
            x = lp.x;
            s.objective = lp.objective;
        } else {
            spdlog::warn("polish LP returned {}; keeping MILP values", solver::to_string(lp.status));
        }
    }

    const CaseLayout lay(c);
    s.plan = ExpansionPlan::empty_for(c);
    for (std::size_t t = 1; t < lay.num_years(); ++t)
        for (std::size_t l = 0; l < lay.num_lines(); ++l)
            for (std::size_t j = 0; j < p.b[t][l].size(); ++j)
                if (x[p.b[t][l][j].index] > 0.5) s.plan.select(c, l, t, j);
    s.outcome = detail::extract_outcome(c, p, x);
    for (std::size_t t = 0; t < lay.num_years(); ++t) {
        s.surplus.push_back(x[p.surplus[t].index]);
        s.fee.phi.push_back(x[p.fee[t].index]);
    }
    for (const auto& e : p.envelopes) {
        s.y_max.push_back(x[e.y_max.index]);
        s.y_min.push_back(x[e.y_min.index]);
    }
    s.certificate = certify(s.outcome, c, s.plan, opt.certificate_tol);
    s.audit = audit_envelopes(c, p, s, cfg);
    for (const auto& msg : s.audit.messages) spdlog::warn("envelope audit: {}", msg);
    if (!s.certificate.pass()) spdlog::warn("embedded market solution fails its optimality certificate");
    s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    spdlog::info("kappa {}: profit {:.6g}, gap {:.2g}, {:.2f} s, {} MW built", kappa, s.objective, s.gap,
                 s.wall_time_s, s.plan.total_mw(c));
    return s;
}

// Surpluses, fees and profit rebuilt from the extracted prices and dispatch,
// compared with the MILP's own multiplier-based values.
struct PrimalRecomputation {
    SurplusReport surpluses;
    FeeTrajectory fee;
    double transco_profit = 0.0;
    double surplus_mismatch = 0.0; // scaled
    double fee_mismatch = 0.0;     // scaled
    double profit_mismatch = 0.0;  // relative
    double tolerance = 1e-5;

    bool ok() const { return surplus_mismatch <= tolerance && fee_mismatch <= tolerance && profit_mismatch <= tolerance; }
};

inline FeeTrajectory fee_from_surpluses(const SurplusReport& s, double kappa) {
    FeeTrajectory f;
    f.kappa = kappa;
    f.phi.assign(s.load.size(), 0.0);
    for (std::size_t t = 1; t < f.phi.size(); ++t)
        f.phi[t] = f.phi[t - 1] + kappa * s.psi * (s.participant_surplus(t) - s.participant_surplus(t - 1));
    return f;
}

// Discounted sum over years of Psi * MS + fee - investment cost.
inline double transco_profit(const CaseStudy& c, const ExpansionPlan& plan, const SurplusReport& s,
                             const FeeTrajectory& fee) {
    const CaseLayout lay(c);
    double tp = 0.0;
    for (std::size_t t = 0; t < lay.num_years(); ++t)
        tp += lay.discount(t) * (s.yearly_merchandising(t) + fee.phi[t] - plan.cost(c, t));
    return tp;
}

inline PrimalRecomputation recompute_metrics_from_primal(const PlanningSolution& sol, const CaseStudy& c,
                                                         double tolerance = 1e-5) {
    if (sol.status != solver::Status::optimal && sol.status != solver::Status::limit)
        throw CertificateError("no planning solution to recompute");
    PrimalRecomputation r;
    r.tolerance = tolerance;
    r.surpluses = compute_surpluses(sol.outcome, c);
    r.fee = fee_from_surpluses(r.surpluses, sol.fee.kappa);
    r.transco_profit = transco_profit(c, sol.plan, r.surpluses, r.fee);

    double scale = 1.0;
    for (const double w : r.surpluses.welfare) scale += std::abs(w);
    for (std::size_t t = 0; t < sol.surplus.size(); ++t) {
        r.surplus_mismatch =
            std::max(r.surplus_mismatch, std::abs(r.surpluses.participant_surplus(t) - sol.surplus[t]) / scale);
        r.fee_mismatch =
            std::max(r.fee_mismatch, std::abs(r.fee.phi[t] - sol.fee.phi[t]) / (c.horizon.psi * scale));
    }
    r.profit_mismatch = std::abs(r.transco_profit - sol.objective) / (1.0 + std::abs(sol.objective));
    return r;
}

inline nlohmann::json plan_to_json(const ExpansionPlan& plan, const CaseStudy& c) {
    auto arr = nlohmann::json::array();
    for (std::size_t l = 0; l < plan.num_lines(); ++l)
        if (const auto& sel = plan.at(l))
            arr.push_back({{"line", c.lines[l].id},
                           {"year", c.horizon.years[sel->year]},
                           {"lump_mw", c.lines[l].lumps[sel->lump]}});
    return arr;
}

inline nlohmann::json solution_to_json(const PlanningSolution& s, const CaseStudy& c) {
    nlohmann::json fee = nlohmann::json::array();
    for (std::size_t t = 0; t < s.fee.phi.size(); ++t)
        fee.push_back({{"year", c.horizon.years[t]}, {"phi", s.fee.phi[t]}});
    return {{"status", solver::to_string(s.status)},
            {"proven", s.proven},
            {"kappa", s.fee.kappa},
            {"objective", s.objective},
            {"gap", s.gap},
            {"plan", plan_to_json(s.plan, c)},
            {"fee", fee},
            {"certificate", s.certificate},
            {"envelope_audit",
             {{"big_m", s.audit.big_m},
              {"max_violation", s.audit.max_violation},
              {"lp_mu_max", s.audit.lp_mu_max},
              {"milp_infeasible", s.audit.milp_infeasible},
              {"messages", s.audit.messages}}},
            {"model",
             {{"variables", s.stats.variables},
              {"constraints", s.stats.constraints},
              {"binaries", s.stats.binaries},
              {"envelopes", s.stats.envelopes}}},
            {"wall_time_s", s.wall_time_s}};
}

} // namespace gridreg
