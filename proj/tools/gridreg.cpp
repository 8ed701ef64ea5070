// gridreg: case generation, planning solves, kappa sweeps and oracle checks.

#include "gridreg/analysis.hpp"
#include "gridreg/generators.hpp"
#include "gridreg/oracle.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>

#include <fstream>
#include <iostream>

namespace {

using namespace gridreg;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kCertificate = 1, kUsage = 2, kIo = 3, kSolver = 4 };

// Failure raised by a command after it has already reported its findings.
struct VerificationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string> kGenerators{"two_node", "garver6", "toy"};

struct CaseSource {
    std::string path;
    std::string generator;
    std::uint64_t seed = 1;
    int agents = 0;
    std::size_t lump_stride = 1;
    double big_m = 0.0; // > 0 overrides the case value

    void add(CLI::App& app, bool required_path = false) {
        auto* p = app.add_option("--case", path, "Case file (JSON)");
        if (required_path) p->required();
        app.add_option("--generator", generator, "Generate the case in memory instead of reading a file")
            ->excludes(p);
        app.add_option("--seed", seed, "Generator seed");
        app.add_option("--agents", agents, "Agents per generator/consumer group");
        app.add_option("--lump-stride", lump_stride, "Keep every k-th lump of each menu")->check(CLI::PositiveNumber);
        app.add_option("--big-m", big_m, "Override the big-M constant of the case")->check(CLI::PositiveNumber);
    }

    CaseStudy load(bool validate_big_m = true) const {
        if (path.empty() == generator.empty())
            throw ValidationError("case", "give exactly one of --case or --generator");
        CaseStudy c;
        if (!path.empty()) {
            c = load_case(path);
        } else {
            c = generate(generator, seed, agents);
        }
        if (big_m > 0.0) {
            spdlog::warn("big-M overridden: {} -> {}", c.policy.big_m, big_m);
            c.policy.big_m = big_m;
        }
        validate(c, {.check_big_m = validate_big_m});
        return lump_stride > 1 ? coarsen_lumps(std::move(c), lump_stride) : c;
    }

    static CaseStudy generate(const std::string& name, std::uint64_t seed, int agents) {
        if (name == "two_node") {
            TwoNodeOptions o;
            if (agents > 0) o.generators = o.consumers = agents;
            return generate_two_node_case(seed, o);
        }
        if (name == "garver6") {
            GarverOptions o;
            if (agents > 0) o.agents_per_node = agents;
            return generate_garver_case(seed, o);
        }
        if (name == "toy") {
            ToyOptions o;
            if (agents > 0) o.agents = agents;
            return generate_toy_case(seed, o);
        }
        std::string valid;
        for (const auto& g : kGenerators) valid += (valid.empty() ? "" : ", ") + g;
        throw ValidationError("generator", "unknown generator '" + name + "' (valid: " + valid + ")");
    }
};

struct SolverFlags {
    std::map<std::string, std::string> values;

    void add(CLI::App& app) {
        for (const char* key : {"backend", "mip_gap", "lp_tol", "time_limit_s", "threads", "seed"}) {
            const std::string name = std::string("solver.") + key;
            app.add_option("--" + name, values[name], "Solver setting " + name);
        }
    }

    // Defaults, then GRIDREG_SOLVER, then explicit flags.
    solver::SolverConfig config() const {
        solver::SolverConfig cfg;
        cfg.apply_env();
        try {
            for (const auto& [k, v] : values)
                if (!v.empty()) cfg.set(k, v);
            solver::make_backend(cfg.backend);
        } catch (const Error& e) {
            throw ValidationError("solver", e.what());
        }
        return cfg;
    }
};

fs::path ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    return dir;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    body(out);
    if (!out) throw IoError("failed writing " + path.string());
    spdlog::info("wrote {}", path.string());
}

void check_kappa(double kappa) {
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw ValidationError("kappa", "must lie in [0, 1]");
}

int cmd_gen_case(const std::string& name, const CaseSource& src, const std::string& out) {
    auto c = CaseSource::generate(name, src.seed, src.agents);
    if (src.lump_stride > 1) c = coarsen_lumps(std::move(c), src.lump_stride);
    const fs::path path = out.empty() ? fs::path(name + "_" + std::to_string(src.seed) + ".json") : fs::path(out);
    if (path.has_parent_path()) ensure_dir(path.parent_path().string());
    save_case(c, path);
    std::cout << path.string() << '\n';
    return kOk;
}

int cmd_solve(const CaseSource& src, double kappa, const solver::SolverConfig& cfg, const std::string& out) {
    check_kappa(kappa);
    const auto c = src.load();
    const auto sol = solve_planning(c, kappa, cfg);
    const auto dir = ensure_dir(out);
    write_file(dir / "solution.json", [&](std::ostream& o) { o << solution_to_json(sol, c).dump(2) << '\n'; });
    write_file(dir / "certificate.json", [&](std::ostream& o) { o << nlohmann::json(sol.certificate).dump(2) << '\n'; });
    if (sol.status == solver::Status::optimal || sol.status == solver::Status::limit) {
        write_file(dir / "prices.csv", [&](std::ostream& o) { write_prices_csv(sol.outcome, c, o); });
        write_file(dir / "flows.csv", [&](std::ostream& o) { write_flows_csv(sol.outcome, c, o); });
    }
    SweepTable table;
    for (const auto& l : c.lines) table.line_ids.push_back(l.id);
    MetricsRow row;
    try {
        row = evaluate_metrics(sol, c);
    } catch (const CertificateError& e) {
        row.kappa = kappa;
        row.status = "certificate_failure";
        row.error = e.what();
    } catch (const SolverError& e) {
        row.kappa = kappa;
        row.status = "solver_failure";
        row.error = e.what();
    }
    table.rows.push_back(row);
    write_file(dir / "metrics.csv", [&](std::ostream& o) { write_sweep_csv(table, o); });

    std::cout << fmt::format("kappa {}  profit {}  gap {:.2g}  certificate {}\n", fmt6(kappa), fmt6(sol.objective),
                             sol.gap, sol.certified() ? "pass" : "FAIL");
    for (std::size_t l = 0; l < c.lines.size(); ++l)
        if (const auto& s = sol.plan.at(l))
            std::cout << fmt::format("  line {}: {} MW in year {}\n", c.lines[l].id, fmt6(sol.plan.lump_mw(c, l)),
                                     c.horizon.years[s->year]);
    if (row.status == "solver_failure") throw SolverError(row.error);
    if (!row.ok()) throw CertificateError(row.error);
    return kOk;
}

int cmd_sweep(const CaseSource& src, const std::string& grid_spec, unsigned parallel,
              const solver::SolverConfig& cfg, const std::string& out) {
    const auto grid = parse_grid(grid_spec);
    const auto c = src.load();
    const auto table = sweep_kappa(c, grid, cfg, {.parallelism = parallel});
    emit_report(table, {"csv", "summary"}, ensure_dir(out));
    const auto summary = sweep_summary(table);
    std::cout << summary_text(summary);
    if (!summary.at("failures").empty())
        throw VerificationFailed(fmt::format("{} of {} sweep rows failed", summary.at("failures").size(), grid.size()));
    return kOk;
}

int cmd_verify(const CaseSource& src, const std::vector<double>& kappas, const OracleOptions& oopt,
               const solver::SolverConfig& cfg) {
    const auto c = src.load(false);
    if (count_plans(c, oopt) > static_cast<double>(oopt.budget))
        throw BudgetError(fmt::format("{:.0f} plans exceed the oracle budget of {}; shrink the lump menus with "
                                      "--lump-stride or --max-lumps",
                                      count_plans(c, oopt), oopt.budget),
                          count_plans(c, oopt));
    bool all_ok = true;
    for (const double kappa : kappas) {
        check_kappa(kappa);
        const auto sol = solve_planning(c, kappa, cfg, {.skip_big_m_guard = true});
        std::cout << fmt::format("kappa {}\n", fmt6(kappa));
        if (sol.status != solver::Status::optimal) {
            for (const auto& m : sol.audit.messages) std::cout << "  envelope audit: FAIL " << m << '\n';
            all_ok = false;
            continue;
        }
        const auto oracle = brute_force(c, kappa, cfg, oopt);
        const auto at_plan = evaluate_plan(c, kappa, sol.plan, cfg, oopt.refine_ties);
        const double scale = 1.0 + std::abs(oracle.best_profit);
        const double d_best = std::abs(sol.objective - oracle.best_profit) / scale;
        const double d_plan = std::abs(at_plan.profit - sol.objective) / (1.0 + std::abs(sol.objective));
        auto line = [&](const char* what, bool ok, const std::string& detail) {
            std::cout << fmt::format("  {:<22} {}  {}\n", what, ok ? "pass" : "FAIL", detail);
            all_ok = all_ok && ok;
        };
        line("certificate", sol.certificate.pass(), fmt::format("worst scaled residual {:.3g}", sol.certificate.worst()));
        line("envelope audit", !sol.audit.flagged(),
             sol.audit.flagged() ? sol.audit.messages.front()
                                 : fmt::format("max |y - b*mu| {:.3g}", sol.audit.max_violation));
        const auto re = recompute_metrics_from_primal(sol, c);
        line("primal recomputation", re.ok(),
             fmt::format("surplus {:.3g} fee {:.3g} profit {:.3g}", re.surplus_mismatch, re.fee_mismatch,
                         re.profit_mismatch));
        line("oracle best profit", d_best <= 1e-6,
             fmt::format("milp {} oracle {} ({} plans)", fmt6(sol.objective), fmt6(oracle.best_profit),
                         oracle.plans_enumerated));
        line("oracle at milp plan", d_plan <= 1e-6, fmt::format("{}", fmt6(at_plan.profit)));
    }
    if (!all_ok) throw VerificationFailed("verification failed");
    return kOk;
}

int cmd_oracle_table(const CaseSource& src, double kappa, const OracleOptions& oopt, const solver::SolverConfig& cfg,
                     const std::string& out) {
    check_kappa(kappa);
    const auto c = src.load(false);
    const auto r = brute_force(c, kappa, cfg, oopt);
    if (out.empty() || out == "-") {
        write_oracle_csv(r, c, std::cout);
    } else {
        const fs::path path(out);
        if (path.has_parent_path()) ensure_dir(path.parent_path().string());
        write_file(path, [&](std::ostream& o) { write_oracle_csv(r, c, o); });
    }
    spdlog::info("best plan {} with profit {}", r.best_index, fmt6(r.best_profit));
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    auto log = spdlog::stderr_color_mt("gridreg");
    spdlog::set_default_logger(log);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);

    CLI::App app{"Incentive-regulated transmission expansion planning"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

    CaseSource src;
    SolverFlags solver_flags;
    double kappa = 1.0;
    std::string out, grid = "0:1:0.25", generator;
    unsigned parallel = 1;
    std::vector<double> kappas{0.0, 0.5, 1.0};
    OracleOptions oopt;

    auto* gen = app.add_subcommand("gen-case", "Write a generated case file");
    gen->add_option("generator", generator, "two_node | garver6 | toy")->required();
    gen->add_option("--seed", src.seed, "Generator seed");
    gen->add_option("--agents", src.agents, "Agents per group");
    gen->add_option("--lump-stride", src.lump_stride, "Keep every k-th lump")->check(CLI::PositiveNumber);
    gen->add_option("--out", out, "Output file");

    auto* solve = app.add_subcommand("solve", "Solve the planning problem for one kappa");
    src.add(*solve);
    solver_flags.add(*solve);
    solve->add_option("--kappa", kappa, "Incentive parameter in [0, 1]");
    solve->add_option("--out", out, "Output directory")->default_val("out");

    auto* sweep = app.add_subcommand("sweep", "Solve over a kappa grid and report");
    src.add(*sweep);
    solver_flags.add(*sweep);
    sweep->add_option("--grid", grid, "lo:hi:step")->default_val("0:1:0.25");
    sweep->add_option("--parallel", parallel, "Concurrent solves")->check(CLI::PositiveNumber);
    sweep->add_option("--out", out, "Output directory")->default_val("out");

    auto* verify = app.add_subcommand("verify", "Check certificates and compare against brute force");
    src.add(*verify);
    solver_flags.add(*verify);
    verify->add_option("--kappa", kappas, "Kappa values to check")->expected(1, -1);
    verify->add_option("--max-lumps", oopt.max_lumps_per_line, "Oracle: first N lumps per line");
    verify->add_option("--budget", oopt.budget, "Oracle: maximum number of plans");
    verify->add_flag("--refine-ties", oopt.refine_ties, "Oracle: Transco-preferred prices among market duals");

    auto* table = app.add_subcommand("oracle-table", "Enumerate all plans and write the profit table");
    src.add(*table);
    solver_flags.add(*table);
    table->add_option("--kappa", kappa, "Incentive parameter in [0, 1]");
    table->add_option("--out", out, "CSV file, - for stdout");
    table->add_option("--max-lumps", oopt.max_lumps_per_line, "First N lumps per line");
    table->add_option("--budget", oopt.budget, "Maximum number of plans");
    table->add_option("--parallel", oopt.parallelism, "Concurrent LP solves")->check(CLI::PositiveNumber);
    table->add_flag("--refine-ties", oopt.refine_ties, "Transco-preferred prices among market duals");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }
    if (verbose) spdlog::set_level(spdlog::level::info);

    try {
        if (*gen) return cmd_gen_case(generator, src, out);
        const auto cfg = solver_flags.config();
        if (*solve) return cmd_solve(src, kappa, cfg, out);
        if (*sweep) return cmd_sweep(src, grid, parallel, cfg, out);
        if (*verify) return cmd_verify(src, kappas, oopt, cfg);
        if (*table) return cmd_oracle_table(src, kappa, oopt, cfg, out);
    } catch (const VerificationFailed& e) {
        spdlog::error("{}", e.what());
        return kCertificate;
    } catch (const CertificateError& e) {
        spdlog::error("certificate failure: {}", e.what());
        return kCertificate;
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        return kIo;
    } catch (const ParseError& e) {
        spdlog::error("{}", e.what());
        return kIo;
    } catch (const BudgetError& e) {
        spdlog::error("{}", e.what());
        return kUsage;
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return kUsage;
    } catch (const SolverError& e) {
        spdlog::error("solver: {}", e.what());
        return kSolver;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return kSolver;
    }
    return kUsage;
}
