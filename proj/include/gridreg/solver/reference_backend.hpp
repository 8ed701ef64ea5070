#pragma once

// Self-contained dense backend: bounded-variable primal simplex (two phases,
// full tableau, Dantzig pricing with a Bland fallback against cycling) and a
// best-first branch-and-bound on top of it. Intended for small models and as an
// independent cross-check of the production backend.

#include "gridreg/solver/model.hpp"

#include <chrono>
#include <numeric>
#include <queue>

namespace gridreg::solver {

namespace detail {

struct LpOutcome {
    Status status = Status::error;
    std::vector<double> x;      // structural values
    std::vector<double> y;      // row sensitivities, maximization orientation
    std::vector<double> d;      // structural reduced costs, maximization orientation
    double objective = 0.0;     // maximization orientation, without offset
};

class DenseSimplex {
public:
    using Clock = std::chrono::steady_clock;

    DenseSimplex(const Model& model, const std::vector<double>& lb, const std::vector<double>& ub,
                 double tol, Clock::time_point deadline)
        : m_(model.num_rows()), n_(model.num_vars()), tol_(std::max(tol, 1e-10)),
          deadline_(deadline) {
        const double s = model.sense() == ObjectiveSense::maximize ? 1.0 : -1.0;
        cost_.assign(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) cost_[j] = s * model.vars()[j].obj;
        a_.assign(m_ * n_, 0.0);
        rhs_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& row = model.rows()[i];
            rhs_[i] = row.rhs;
            for (const auto& t : row.terms) a_[i * n_ + t.var.index] += t.coef;
        }
        const std::size_t cols = n_ + 2 * m_;
        lo_.assign(cols, 0.0);
        hi_.assign(cols, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            lo_[j] = lb[j];
            hi_[j] = ub[j];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            const auto sense = model.rows()[i].sense;
            lo_[n_ + i] = sense == RowSense::ge ? -kInf : 0.0;
            hi_[n_ + i] = sense == RowSense::le ? kInf : 0.0;
        }
    }

    LpOutcome run() {
        LpOutcome out;
        for (std::size_t j = 0; j < n_; ++j)
            if (lo_[j] > hi_[j] + tol_) {
                out.status = Status::infeasible;
                return out;
            }
        initialise();

        std::vector<double> phase1(cols(), 0.0);
        bool need_phase1 = false;
        for (std::size_t i = 0; i < m_; ++i)
            if (hi_[art(i)] > 0.0) {
                phase1[art(i)] = -1.0;
                need_phase1 = true;
            }
        if (need_phase1) {
            const auto st = iterate(phase1);
            if (st != Status::optimal) {
                out.status = st == Status::unbounded ? Status::error : st;
                return out;
            }
            double infeas = 0.0;
            for (std::size_t i = 0; i < m_; ++i) infeas += x_[art(i)];
            double scale = 1.0;
            for (double b : rhs_) scale = std::max(scale, std::abs(b));
            if (infeas > 1e-7 * scale) {
                out.status = Status::infeasible;
                return out;
            }
        }
        for (std::size_t i = 0; i < m_; ++i) {
            hi_[art(i)] = 0.0;
            if (!basic_[art(i)]) x_[art(i)] = 0.0;
        }

        std::vector<double> phase2(cols(), 0.0);
        std::copy(cost_.begin(), cost_.end(), phase2.begin());
        const auto st = iterate(phase2);
        if (st != Status::optimal) {
            out.status = st;
            return out;
        }
        refine();

        out.status = Status::optimal;
        out.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
        for (std::size_t j = 0; j < n_; ++j) out.x[j] = std::clamp(out.x[j], lo_[j], hi_[j]);
        out.y.assign(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            double y = 0.0;
            for (std::size_t r = 0; r < m_; ++r) y += phase2[basis_[r]] * t(r, n_ + i);
            out.y[i] = y;
        }
        out.d = cost_;
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < n_; ++j) out.d[j] -= a_[i * n_ + j] * out.y[i];
        out.objective = 0.0;
        for (std::size_t j = 0; j < n_; ++j) out.objective += cost_[j] * out.x[j];
        return out;
    }

private:
    std::size_t cols() const { return n_ + 2 * m_; }
    std::size_t art(std::size_t i) const { return n_ + m_ + i; }
    double& t(std::size_t r, std::size_t c) { return tab_[r * cols() + c]; }

    static double initial_value(double lo, double hi) {
        if (std::isfinite(lo)) return lo;
        if (std::isfinite(hi)) return hi;
        return 0.0;
    }

    void initialise() {
        const std::size_t nc = cols();
        x_.assign(nc, 0.0);
        basic_.assign(nc, false);
        basis_.assign(m_, 0);
        tab_.assign(m_ * nc, 0.0);
        art_sign_.assign(m_, 1.0);
        for (std::size_t j = 0; j < n_; ++j) x_[j] = initial_value(lo_[j], hi_[j]);
        // Row i starts with its slack basic when that is feasible, otherwise with
        // an artificial column art_sign_[i] * e_i carrying the residual.
        for (std::size_t i = 0; i < m_; ++i) {
            double r = rhs_[i];
            for (std::size_t j = 0; j < n_; ++j) r -= a_[i * n_ + j] * x_[j];
            const std::size_t sl = n_ + i;
            const double clamped = std::clamp(r, lo_[sl], hi_[sl]);
            if (std::abs(r - clamped) <= tol_) {
                x_[sl] = r;
                basis_[i] = sl;
                lo_[art(i)] = hi_[art(i)] = 0.0;
            } else {
                x_[sl] = clamped;
                art_sign_[i] = r - clamped > 0.0 ? 1.0 : -1.0;
                x_[art(i)] = std::abs(r - clamped);
                lo_[art(i)] = 0.0;
                hi_[art(i)] = kInf;
                basis_[i] = art(i);
            }
            basic_[basis_[i]] = true;
            const double beta = basis_[i] == sl ? 1.0 : art_sign_[i];
            for (std::size_t j = 0; j < n_; ++j) t(i, j) = a_[i * n_ + j] / beta;
            t(i, sl) = 1.0 / beta;
            t(i, art(i)) = art_sign_[i] / beta;
        }
    }

    void compute_reduced(const std::vector<double>& c) {
        d_ = c;
        for (std::size_t r = 0; r < m_; ++r) {
            const double cb = c[basis_[r]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < cols(); ++j) d_[j] -= cb * t(r, j);
        }
    }

    Status iterate(const std::vector<double>& c) {
        compute_reduced(c);
        const std::size_t nc = cols();
        const std::size_t max_iter = 50 * (m_ + nc) + 1000;
        std::size_t degenerate = 0;
        bool bland = false;
        for (std::size_t iter = 0; iter < max_iter; ++iter) {
            if ((iter & 63) == 0) {
                if (Clock::now() > deadline_) return Status::limit;
                if (iter > 0) compute_reduced(c);
            }
            // Pricing.
            std::size_t q = nc;
            double best = 0.0;
            int dir = 0;
            for (std::size_t j = 0; j < nc; ++j) {
                if (basic_[j] || hi_[j] - lo_[j] <= 0.0) continue;
                int dj = 0;
                if (d_[j] > tol_ && x_[j] < hi_[j] - tol_) dj = 1;
                else if (d_[j] < -tol_ && x_[j] > lo_[j] + tol_) dj = -1;
                if (dj == 0) continue;
                if (bland) {
                    q = j;
                    dir = dj;
                    break;
                }
                if (std::abs(d_[j]) > best) {
                    best = std::abs(d_[j]);
                    q = j;
                    dir = dj;
                }
            }
            if (q == nc) return Status::optimal;

            // Ratio test.
            double theta = hi_[q] - lo_[q];
            std::size_t leave = m_;
            double leave_alpha = 0.0;
            constexpr double piv_tol = 1e-9;
            for (std::size_t r = 0; r < m_; ++r) {
                const double alpha = t(r, q) * dir;
                const std::size_t b = basis_[r];
                double ratio = kInf;
                if (alpha > piv_tol && std::isfinite(lo_[b])) ratio = (x_[b] - lo_[b]) / alpha;
                else if (alpha < -piv_tol && std::isfinite(hi_[b])) ratio = (hi_[b] - x_[b]) / -alpha;
                else continue;
                ratio = std::max(ratio, 0.0);
                const bool better =
                    ratio < theta - 1e-12 ||
                    (ratio <= theta + 1e-12 && leave != m_ &&
                     (bland ? basis_[r] < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha)));
                if (better) {
                    theta = ratio;
                    leave = r;
                    leave_alpha = alpha;
                }
            }
            if (!std::isfinite(theta)) return Status::unbounded;

            x_[q] += dir * theta;
            for (std::size_t r = 0; r < m_; ++r) x_[basis_[r]] -= t(r, q) * dir * theta;

            if (theta < 1e-12) {
                if (++degenerate > 50) bland = true;
            } else {
                degenerate = 0;
                bland = false;
            }

            if (leave == m_) {
                x_[q] = dir > 0 ? hi_[q] : lo_[q];
                continue;
            }
            const std::size_t out = basis_[leave];
            x_[out] = leave_alpha > 0.0 ? lo_[out] : hi_[out];
            pivot(leave, q);
        }
        return Status::limit;
    }

    void pivot(std::size_t r, std::size_t q) {
        const std::size_t nc = cols();
        const double p = t(r, q);
        double* row = &tab_[r * nc];
        for (std::size_t j = 0; j < nc; ++j) row[j] /= p;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = t(i, q);
            if (f == 0.0) continue;
            double* ri = &tab_[i * nc];
            for (std::size_t j = 0; j < nc; ++j) ri[j] -= f * row[j];
            ri[q] = 0.0;
        }
        const double dq = d_[q];
        if (dq != 0.0)
            for (std::size_t j = 0; j < nc; ++j) d_[j] -= dq * row[j];
        d_[q] = 0.0;
        basic_[basis_[r]] = false;
        basic_[q] = true;
        basis_[r] = q;
    }

    // Recompute basic values from B^-1 (the slack block of the tableau).
    void refine() {
        std::vector<double> resid = rhs_;
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j)
                if (!basic_[j]) resid[i] -= a_[i * n_ + j] * x_[j];
            if (!basic_[n_ + i]) resid[i] -= x_[n_ + i];
            if (!basic_[art(i)]) resid[i] -= art_sign_[i] * x_[art(i)];
        }
        for (std::size_t r = 0; r < m_; ++r) {
            double v = 0.0;
            for (std::size_t i = 0; i < m_; ++i) v += t(r, n_ + i) * resid[i];
            x_[basis_[r]] = v;
        }
    }

    std::size_t m_, n_;
    double tol_;
    Clock::time_point deadline_;
    std::vector<double> cost_, a_, rhs_, lo_, hi_;
    std::vector<double> tab_, x_, d_, art_sign_;
    std::vector<bool> basic_;
    std::vector<std::size_t> basis_;
};

inline LpOutcome solve_dense_lp(const Model& m, const std::vector<double>& lb,
                                const std::vector<double>& ub, double tol,
                                DenseSimplex::Clock::time_point deadline) {
    return DenseSimplex(m, lb, ub, tol, deadline).run();
}

} // namespace detail

class ReferenceBackend final : public Backend {
public:
    std::string name() const override { return "reference"; }

    SolveResult solve(const Model& model, const SolverParams& params) const override {
        using Clock = detail::DenseSimplex::Clock;
        const auto start = Clock::now();
        const auto deadline =
            std::isfinite(params.time_limit_s)
                ? start + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(params.time_limit_s))
                : Clock::time_point::max();
        std::vector<double> lb, ub;
        for (const auto& v : model.vars()) {
            lb.push_back(v.lb);
            ub.push_back(v.ub);
        }
        SolveResult res = model.is_mip() ? branch_and_bound(model, lb, ub, params, deadline)
                                         : solve_lp(model, lb, ub, params, deadline);
        res.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
        return res;
    }

private:
    static SolveResult solve_lp(const Model& model, const std::vector<double>& lb,
                                const std::vector<double>& ub, const SolverParams& params,
                                detail::DenseSimplex::Clock::time_point deadline) {
        const auto lp = detail::solve_dense_lp(model, lb, ub, params.lp_tol, deadline);
        SolveResult res;
        res.status = lp.status;
        if (lp.status != Status::optimal) return res;
        const double s = model.sense() == ObjectiveSense::maximize ? 1.0 : -1.0;
        res.x = lp.x;
        res.row_duals = lp.y;
        res.col_duals = lp.d;
        for (auto& v : res.row_duals) v *= s;
        for (auto& v : res.col_duals) v *= s;
        res.objective = s * lp.objective + model.obj_offset();
        res.bound = res.objective;
        res.has_incumbent = true;
        return res;
    }

    struct Node {
        std::vector<double> lb, ub;
        double bound;
    };

    static SolveResult branch_and_bound(const Model& model, std::vector<double> lb,
                                        std::vector<double> ub, const SolverParams& params,
                                        detail::DenseSimplex::Clock::time_point deadline) {
        const double s = model.sense() == ObjectiveSense::maximize ? 1.0 : -1.0;
        constexpr double int_tol = 1e-7;
        auto cmp = [](const Node& a, const Node& b) { return a.bound < b.bound; };
        std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);
        open.push({std::move(lb), std::move(ub), kInf});

        double incumbent = -kInf;
        std::vector<double> best_x;
        long nodes = 0;
        bool limited = false;
        bool root_unbounded = false;

        auto closed_gap = [&](double bound) {
            if (!std::isfinite(incumbent)) return false;
            return bound - incumbent <= params.mip_gap * std::max(1.0, std::abs(incumbent));
        };

        while (!open.empty()) {
            if (closed_gap(open.top().bound)) break;
            if (++nodes > params.node_limit || detail::DenseSimplex::Clock::now() > deadline) {
                limited = true;
                break;
            }
            Node node = open.top();
            open.pop();
            const auto lp = detail::solve_dense_lp(model, node.lb, node.ub, params.lp_tol, deadline);
            if (lp.status == Status::limit) {
                open.push(std::move(node));
                limited = true;
                break;
            }
            if (lp.status == Status::unbounded) {
                root_unbounded = nodes == 1;
                if (root_unbounded) break;
                continue;
            }
            if (lp.status != Status::optimal) continue;
            if (closed_gap(lp.objective)) continue;

            std::size_t branch = model.num_vars();
            double most = int_tol;
            for (std::size_t j = 0; j < model.num_vars(); ++j) {
                if (model.vars()[j].kind == VarKind::continuous) continue;
                const double f = lp.x[j] - std::floor(lp.x[j]);
                const double frac = std::min(f, 1.0 - f);
                if (frac > most) {
                    most = frac;
                    branch = j;
                }
            }
            if (branch == model.num_vars()) {
                if (lp.objective > incumbent) {
                    incumbent = lp.objective;
                    best_x = lp.x;
                    for (std::size_t j = 0; j < model.num_vars(); ++j)
                        if (model.vars()[j].kind != VarKind::continuous)
                            best_x[j] = std::round(best_x[j]);
                }
                continue;
            }
            Node down = node, up = std::move(node);
            down.ub[branch] = std::floor(lp.x[branch]);
            up.lb[branch] = std::ceil(lp.x[branch]);
            down.bound = up.bound = lp.objective;
            open.push(std::move(down));
            open.push(std::move(up));
        }

        SolveResult res;
        if (root_unbounded) {
            res.status = Status::unbounded;
            return res;
        }
        double bound = open.empty() ? incumbent : std::max(incumbent, open.top().bound);
        if (best_x.empty()) {
            res.status = limited ? Status::limit : Status::infeasible;
            return res;
        }
        res.has_incumbent = true;
        res.x = best_x;
        res.objective = s * incumbent + model.obj_offset();
        res.bound = s * bound + model.obj_offset();
        res.gap = std::abs(bound - incumbent) / std::max(1e-9, std::abs(incumbent));
        if (std::abs(bound - incumbent) <= 1e-12) res.gap = 0.0;
        res.status = limited && res.gap > params.mip_gap ? Status::limit : Status::optimal;
        return res;
    }
};

} // namespace gridreg::solver
