#pragma once

// Backend selection and configuration. Backends are chosen by name at run time:
//   "highs"     HiGHS (default when compiled in)
//   "reference" dense simplex + branch-and-bound, for small models and cross-checks

#include "gridreg/solver/model.hpp"
#include "gridreg/solver/reference_backend.hpp"
#ifdef GRIDREG_HAVE_HIGHS
#include "gridreg/solver/highs_backend.hpp"
#endif

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>

namespace gridreg::solver {

inline std::vector<std::string> available_backends() {
#ifdef GRIDREG_HAVE_HIGHS
    return {"highs", "reference"};
#else
    return {"reference"};
#endif
}

inline std::string default_backend_name() { return available_backends().front(); }

inline std::shared_ptr<const Backend> make_backend(const std::string& name) {
    if (name == "reference") return std::make_shared<ReferenceBackend>();
#ifdef GRIDREG_HAVE_HIGHS
    if (name == "highs") return std::make_shared<HighsBackend>();
#endif
    std::string valid;
    for (const auto& b : available_backends()) valid += (valid.empty() ? "" : ", ") + b;
    throw SolverError("unknown solver backend '" + name + "' (available: " + valid + ")");
}

// The `solver.*` configuration block.
struct SolverConfig {
    std::string backend = default_backend_name();
    SolverParams params;

    // Applies one `solver.<key>` setting; throws ParseError on unknown keys or bad values.
    void set(const std::string& key, const std::string& value) {
        try {
            if (key == "solver.backend") backend = value;
            else if (key == "solver.mip_gap") params.mip_gap = std::stod(value);
            else if (key == "solver.lp_tol") params.lp_tol = std::stod(value);
            else if (key == "solver.time_limit_s") params.time_limit_s = std::stod(value);
            else if (key == "solver.threads") params.threads = std::stoi(value);
            else if (key == "solver.seed") params.seed = std::stoi(value);
            else throw ParseError("unknown solver setting '" + key + "'");
        } catch (const std::logic_error&) {
            throw ParseError("bad value '" + value + "' for " + key);
        }
        if (!(params.mip_gap >= 0.0) || !(params.lp_tol > 0.0) || !(params.time_limit_s > 0.0))
            throw ParseError("solver tolerances and limits must be positive");
    }

    // Reads a `{"solver": {...}}` object; values may be numbers or strings.
    void merge(const nlohmann::json& j) {
        if (!j.contains("solver")) return;
        for (const auto& [k, v] : j.at("solver").items())
            set("solver." + k, v.is_string() ? v.get<std::string>() : v.dump());
    }

    // GRIDREG_SOLVER overrides the backend name.
    void apply_env() {
        if (const char* env = std::getenv("GRIDREG_SOLVER"); env && *env) backend = env;
    }
};

// Solves with the configured backend. LP optima are checked for primal/dual
// feasibility and complementarity; failures are logged and reported through
// the returned residuals.
inline SolveResult optimize(const Model& model, const SolverConfig& cfg,
                            KktResiduals* residuals = nullptr) {
    auto backend = make_backend(cfg.backend);
    SolveResult res = backend->solve(model, cfg.params);
    if (res.status == Status::error)
        throw SolverError(backend->name() + ": " +
                          (res.message.empty() ? std::string("backend failure") : res.message));
    if (res.status == Status::optimal && !model.is_mip() && res.has_duals()) {
        const auto k = kkt_residuals(model, res);
        if (!k.ok())
            spdlog::warn("{}: LP optimum fails KKT check (primal {:.3g}, dual {:.3g}, cs {:.3g})",
                         backend->name(), k.primal, k.dual, k.complementarity);
        if (residuals) *residuals = k;
    }
    return res;
}

} // namespace gridreg::solver
