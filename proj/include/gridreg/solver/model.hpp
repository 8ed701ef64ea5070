#pragma once

// Backend-neutral linear model: variables with bounds and kinds, linear rows,
// linear objective. Backends consume a Model and return a SolveResult.

#include "gridreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace gridreg::solver {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, binary, integer };
enum class RowSense { le, eq, ge };
enum class ObjectiveSense { maximize, minimize };

struct VarId {
    std::size_t index = 0;
    bool operator==(const VarId&) const = default;
};

struct RowId {
    std::size_t index = 0;
    bool operator==(const RowId&) const = default;
};

struct Term {
    VarId var;
    double coef = 0.0;
};

using LinearExpr = std::vector<Term>;

struct Variable {
    std::string name;
    VarKind kind = VarKind::continuous;
    double lb = 0.0;
    double ub = kInf;
    double obj = 0.0;
};

struct Row {
    std::string name;
    LinearExpr terms;
    RowSense sense = RowSense::le;
    double rhs = 0.0;
};

class Model {
public:
    VarId add_var(std::string name, double lb, double ub, VarKind kind = VarKind::continuous,
                  double obj = 0.0) {
        if (std::isnan(lb) || std::isnan(ub) || std::isnan(obj))
            throw ModelError("variable " + name + ": NaN bound or objective");
        if (lb > ub) throw ModelError("variable " + name + ": lb > ub");
        if (kind == VarKind::binary) {
            lb = std::max(lb, 0.0);
            ub = std::min(ub, 1.0);
        }
        vars_.push_back({std::move(name), kind, lb, ub, obj});
        return VarId{vars_.size() - 1};
    }

    RowId add_row(LinearExpr terms, RowSense sense, double rhs, std::string name = {}) {
        if (std::isnan(rhs) || std::isinf(rhs)) throw ModelError("row " + name + ": non-finite rhs");
        for (const auto& t : terms) {
            if (t.var.index >= vars_.size())
                throw ModelError("row " + name + ": unregistered variable " +
                                 std::to_string(t.var.index));
            if (!std::isfinite(t.coef)) throw ModelError("row " + name + ": non-finite coefficient");
        }
        rows_.push_back({std::move(name), std::move(terms), sense, rhs});
        return RowId{rows_.size() - 1};
    }

    void set_obj(VarId v, double coef) {
        check(v);
        if (!std::isfinite(coef)) throw ModelError("non-finite objective coefficient");
        vars_[v.index].obj = coef;
    }
    void add_obj(VarId v, double coef) { set_obj(v, vars_.at(v.index).obj + coef); }

    void set_bounds(VarId v, double lb, double ub) {
        check(v);
        if (std::isnan(lb) || std::isnan(ub) || lb > ub) throw ModelError("bad bounds");
        vars_[v.index].lb = lb;
        vars_[v.index].ub = ub;
    }

    void set_kind(VarId v, VarKind k) {
        check(v);
        vars_[v.index].kind = k;
    }

    void set_sense(ObjectiveSense s) { sense_ = s; }
    void set_obj_offset(double c) { offset_ = c; }

    ObjectiveSense sense() const { return sense_; }
    double obj_offset() const { return offset_; }
    const std::vector<Variable>& vars() const { return vars_; }
    const std::vector<Row>& rows() const { return rows_; }
    std::size_t num_vars() const { return vars_.size(); }
    std::size_t num_rows() const { return rows_.size(); }

    std::size_t num_integer() const {
        return static_cast<std::size_t>(std::count_if(vars_.begin(), vars_.end(), [](const auto& v) {
            return v.kind != VarKind::continuous;
        }));
    }
    bool is_mip() const { return num_integer() > 0; }

    double max_abs_coef() const {
        double m = 0.0;
        for (const auto& r : rows_) {
            m = std::max(m, std::abs(r.rhs));
            for (const auto& t : r.terms) m = std::max(m, std::abs(t.coef));
        }
        for (const auto& v : vars_) m = std::max(m, std::abs(v.obj));
        return m;
    }

    // Same model with every integer variable fixed to round(values[j]) and
    // relaxed to continuous.
    Model with_integers_fixed(const std::vector<double>& values) const {
        Model m = *this;
        for (std::size_t j = 0; j < m.vars_.size(); ++j) {
            auto& v = m.vars_[j];
            if (v.kind == VarKind::continuous) continue;
            const double r = std::round(values.at(j));
            v.lb = v.ub = r;
            v.kind = VarKind::continuous;
        }
        return m;
    }

private:
    void check(VarId v) const {
        if (v.index >= vars_.size()) throw ModelError("unregistered variable");
    }

    std::vector<Variable> vars_;
    std::vector<Row> rows_;
    ObjectiveSense sense_ = ObjectiveSense::maximize;
    double offset_ = 0.0;
};

enum class Status { optimal, infeasible, unbounded, limit, error };

inline const char* to_string(Status s) {
    switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::limit: return "limit";
    case Status::error: return "error";
    }
    return "?";
}

// Dual convention (both backends): row_duals[i] is the sensitivity of the
// optimal objective (in the model's own sense) to rhs[i]. For a maximization
// that makes <= duals nonnegative and >= duals nonpositive; equality duals are
// free. col_duals[j] = obj[j] - sum_i a_ij * row_duals[i].
struct SolveResult {
    Status status = Status::error;
    std::vector<double> x;
    std::vector<double> row_duals; // empty for MIP solves
    std::vector<double> col_duals;
    double objective = 0.0;
    double bound = 0.0;            // best bound (MIP), equals objective for LP
    double gap = 0.0;              // relative MIP gap, >= 0
    double wall_time_s = 0.0;
    bool has_incumbent = false;
    std::string message;

    bool has_duals() const { return !row_duals.empty(); }
    double value(VarId v) const { return x.at(v.index); }
    double dual(RowId r) const { return row_duals.at(r.index); }
};

struct SolverParams {
    double mip_gap = 1e-6;
    double lp_tol = 1e-8;
    double time_limit_s = kInf;
    int threads = 1;
    int seed = 0;
    long node_limit = 1'000'000;
};

// Primal/dual feasibility and complementarity residuals of an LP solution.
struct KktResiduals {
    double primal = 0.0;
    double dual = 0.0;
    double complementarity = 0.0;
    double tolerance = 0.0;

    bool ok() const { return primal <= tolerance && dual <= tolerance && complementarity <= tolerance; }
};

inline KktResiduals kkt_residuals(const Model& m, const SolveResult& r, double rel_tol = 1e-6) {
    KktResiduals k;
    const double scale = 1.0 + m.max_abs_coef();
    k.tolerance = rel_tol * scale;
    const double s = m.sense() == ObjectiveSense::maximize ? 1.0 : -1.0;

    std::vector<double> reduced(m.num_vars());
    for (std::size_t j = 0; j < m.num_vars(); ++j) reduced[j] = m.vars()[j].obj;

    for (std::size_t i = 0; i < m.num_rows(); ++i) {
        const auto& row = m.rows()[i];
        double act = 0.0;
        for (const auto& t : row.terms) act += t.coef * r.x[t.var.index];
        const double slack = row.rhs - act;
        double viol = 0.0;
        if (row.sense == RowSense::le) viol = std::max(0.0, -slack);
        if (row.sense == RowSense::ge) viol = std::max(0.0, slack);
        if (row.sense == RowSense::eq) viol = std::abs(slack);
        k.primal = std::max(k.primal, viol);

        const double y = r.row_duals.at(i) * s; // oriented as a maximization
        if (row.sense == RowSense::le) k.dual = std::max(k.dual, -y);
        if (row.sense == RowSense::ge) k.dual = std::max(k.dual, y);
        if (row.sense != RowSense::eq) k.complementarity = std::max(k.complementarity, std::abs(y * slack));
        for (const auto& t : row.terms) reduced[t.var.index] -= t.coef * r.row_duals[i];
    }
    for (std::size_t j = 0; j < m.num_vars(); ++j) {
        const auto& v = m.vars()[j];
        const double x = r.x[j];
        k.primal = std::max({k.primal, v.lb - x, x - v.ub});
        const double d = reduced[j] * s;
        // At optimum of a maximization: d > 0 only at ub, d < 0 only at lb.
        if (d > 0.0) {
            if (std::isinf(v.ub)) k.dual = std::max(k.dual, d);
            else k.complementarity = std::max(k.complementarity, std::abs(d * (v.ub - x)));
        } else if (d < 0.0) {
            if (std::isinf(v.lb)) k.dual = std::max(k.dual, -d);
            else k.complementarity = std::max(k.complementarity, std::abs(d * (x - v.lb)));
        }
    }
    return k;
}

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    virtual SolveResult solve(const Model& model, const SolverParams& params) const = 0;
};

} // namespace gridreg::solver
