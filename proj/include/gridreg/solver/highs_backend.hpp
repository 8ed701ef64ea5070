#pragma once

// HiGHS (dual simplex / branch-and-cut) behind the Backend interface.

#include "gridreg/solver/model.hpp"

#include <Highs.h>

#include <chrono>

namespace gridreg::solver {

class HighsBackend final : public Backend {
public:
    std::string name() const override { return "highs"; }

    SolveResult solve(const Model& model, const SolverParams& params) const override {
        const auto start = std::chrono::steady_clock::now();
        const auto n = static_cast<HighsInt>(model.num_vars());
        const auto m = static_cast<HighsInt>(model.num_rows());

        HighsLp lp;
        lp.num_col_ = n;
        lp.num_row_ = m;
        lp.sense_ = model.sense() == ObjectiveSense::maximize ? ::ObjSense::kMaximize : ::ObjSense::kMinimize;
        lp.offset_ = model.obj_offset();
        lp.col_cost_.resize(n);
        lp.col_lower_.resize(n);
        lp.col_upper_.resize(n);
        lp.integrality_.assign(n, HighsVarType::kContinuous);
        bool mip = false;
        for (HighsInt j = 0; j < n; ++j) {
            const auto& v = model.vars()[j];
            lp.col_cost_[j] = v.obj;
            lp.col_lower_[j] = std::isinf(v.lb) ? -kHighsInf : v.lb;
            lp.col_upper_[j] = std::isinf(v.ub) ? kHighsInf : v.ub;
            if (v.kind != VarKind::continuous) {
                lp.integrality_[j] = HighsVarType::kInteger;
                mip = true;
            }
        }
        if (!mip) lp.integrality_.clear();

        lp.row_lower_.resize(m);
        lp.row_upper_.resize(m);
        lp.a_matrix_.format_ = MatrixFormat::kRowwise;
        lp.a_matrix_.num_col_ = n;
        lp.a_matrix_.num_row_ = m;
        lp.a_matrix_.start_.assign(1, 0);
        for (HighsInt i = 0; i < m; ++i) {
            const auto& row = model.rows()[i];
            lp.row_lower_[i] = row.sense == RowSense::le ? -kHighsInf : row.rhs;
            lp.row_upper_[i] = row.sense == RowSense::ge ? kHighsInf : row.rhs;
            for (const auto& t : row.terms) {
                if (t.coef == 0.0) continue;
                lp.a_matrix_.index_.push_back(static_cast<HighsInt>(t.var.index));
                lp.a_matrix_.value_.push_back(t.coef);
            }
            lp.a_matrix_.start_.push_back(static_cast<HighsInt>(lp.a_matrix_.index_.size()));
        }
        // HiGHS rejects duplicate entries within a row; merge them.
        lp.a_matrix_.ensureColwise();

        Highs h;
        h.setOptionValue("output_flag", false);
        h.setOptionValue("random_seed", params.seed);
        if (params.threads > 0) h.setOptionValue("threads", params.threads);
        h.setOptionValue("primal_feasibility_tolerance", params.lp_tol);
        h.setOptionValue("dual_feasibility_tolerance", params.lp_tol);
        h.setOptionValue("mip_feasibility_tolerance", std::max(params.lp_tol, 1e-9));
        h.setOptionValue("mip_rel_gap", params.mip_gap);
        h.setOptionValue("mip_abs_gap", 0.0);
        if (std::isfinite(params.time_limit_s)) h.setOptionValue("time_limit", params.time_limit_s);

        SolveResult res;
        if (h.passModel(std::move(lp)) == HighsStatus::kError) {
            res.message = "HiGHS rejected the model";
            return res;
        }
        const auto run = h.run();
        res.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (run == HighsStatus::kError) {
            res.message = "HiGHS run failed: " + h.modelStatusToString(h.getModelStatus());
            return res;
        }

        const auto ms = h.getModelStatus();
        const auto& info = h.getInfo();
        const auto& sol = h.getSolution();
        res.has_incumbent = sol.value_valid;
        switch (ms) {
        case HighsModelStatus::kOptimal: res.status = Status::optimal; break;
        case HighsModelStatus::kInfeasible: res.status = Status::infeasible; break;
        case HighsModelStatus::kUnbounded: res.status = Status::unbounded; break;
        case HighsModelStatus::kUnboundedOrInfeasible:
            res.status = info.primal_solution_status == kSolutionStatusFeasible ? Status::unbounded
                                                                                : Status::infeasible;
            break;
        case HighsModelStatus::kTimeLimit:
        case HighsModelStatus::kIterationLimit:
        case HighsModelStatus::kSolutionLimit:
        case HighsModelStatus::kInterrupt: res.status = Status::limit; break;
        default:
            res.status = Status::error;
            res.message = h.modelStatusToString(ms);
            return res;
        }
        if (!sol.value_valid) return res;

        res.x = sol.col_value;
        res.objective = info.objective_function_value;
        if (mip) {
            res.bound = info.mip_dual_bound;
            res.gap = std::isfinite(info.mip_gap) ? std::max(0.0, info.mip_gap) : 0.0;
        } else {
            res.bound = res.objective;
            if (sol.dual_valid) {
                res.row_duals = sol.row_dual;
                res.col_duals = sol.col_dual;
            }
        }
        return res;
    }

private:
    static constexpr double kHighsInf = 1e30;
};

} // namespace gridreg::solver
