#pragma once

// Stakeholder metrics per planning solution, kappa sweeps and report output.

#include "gridreg/planning.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace gridreg {

// All money values are discounted sums over the horizon except
// change_in_surplus, which is the undiscounted Psi-scaled surplus gain.
struct MetricsRow {
    double kappa = 0.0;
    double transco_profit = 0.0;
    double social_welfare = 0.0;
    double participant_benefits = 0.0;
    double fee_total = 0.0;
    double ms_total = 0.0;
    double cost_total = 0.0;
    double change_in_surplus = 0.0;
    // Discounted Psi-scaled first-year participant surplus carried through every
    // year; the part of the benefits no fee can touch. Zero when the first year
    // has no trade, and then benefits(kappa = 1) = 0.
    double retained_baseline = 0.0;
    std::vector<double> expansion_mw; // per line
    std::vector<double> fee_per_year; // undiscounted Phi_t

    // Bookkeeping, not part of the CSV.
    std::string status = "ok";
    std::string error;
    bool proven = true;
    double gap = 0.0;
    double wall_time_s = 0.0;
    double identity_residual = 0.0; // |SW - TP - benefits| / (1 + |SW|)
    double fee_residual = 0.0;      // fee recursion, scaled
    DualCertificate certificate;

    bool ok() const { return status == "ok"; }
};

inline MetricsRow evaluate_metrics(const PlanningSolution& sol, const CaseStudy& c) {
    if (sol.status != solver::Status::optimal)
        throw SolverError(fmt::format("planning solve ended with status {}", solver::to_string(sol.status)));
    if (sol.audit.flagged()) throw CertificateError("envelope audit: " + sol.audit.messages.front());
    if (!sol.certificate.pass())
        throw CertificateError(fmt::format("embedded market solution fails its certificate (worst residual {:.3g})",
                                           sol.certificate.worst()));
    const auto re = recompute_metrics_from_primal(sol, c, sol.certificate.tolerance);
    if (!re.ok())
        throw CertificateError(fmt::format("primal recomputation mismatch: surplus {:.3g}, fee {:.3g}, profit {:.3g}",
                                           re.surplus_mismatch, re.fee_mismatch, re.profit_mismatch));
    const CaseLayout lay(c);
    const auto& s = re.surpluses;
    MetricsRow m;
    m.kappa = sol.fee.kappa;
    m.proven = sol.proven;
    m.gap = sol.gap;
    m.wall_time_s = sol.wall_time_s;
    m.certificate = sol.certificate;
    m.fee_residual = re.fee_mismatch;
    m.fee_per_year = re.fee.phi;
    for (std::size_t t = 0; t < lay.num_years(); ++t) {
        const double d = lay.discount(t);
        const double cost = sol.plan.cost(c, t);
        const double gain = c.horizon.psi * s.participant_surplus(t);
        m.fee_total += d * re.fee.phi[t];
        m.ms_total += d * s.yearly_merchandising(t);
        m.cost_total += d * cost;
        m.social_welfare += d * (s.yearly_merchandising(t) + gain - cost);
        m.participant_benefits += d * (gain - re.fee.phi[t]);
        m.retained_baseline += d * c.horizon.psi * s.participant_surplus(0);
        if (t > 0) m.change_in_surplus += c.horizon.psi * (s.participant_surplus(t) - s.participant_surplus(0));
    }
    m.transco_profit = m.ms_total + m.fee_total - m.cost_total;
    m.identity_residual = std::abs(m.social_welfare - m.transco_profit - m.participant_benefits) /
                          (1.0 + std::abs(m.social_welfare));
    for (std::size_t l = 0; l < c.lines.size(); ++l) m.expansion_mw.push_back(sol.plan.lump_mw(c, l));
    return m;
}

// lo:hi:step, inclusive of hi when it lies on the lattice.
inline std::vector<double> parse_grid(const std::string& spec) {
    const auto a = spec.find(':'), b = spec.rfind(':');
    if (a == std::string::npos || a == b) throw ParseError("grid must look like lo:hi:step, got '" + spec + "'");
    double lo = 0, hi = 0, step = 0;
    try {
        lo = std::stod(spec.substr(0, a));
        hi = std::stod(spec.substr(a + 1, b - a - 1));
        step = std::stod(spec.substr(b + 1));
    } catch (const std::exception&) {
        throw ParseError("grid must look like lo:hi:step, got '" + spec + "'");
    }
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) throw ValidationError("grid", "bounds must satisfy 0 <= lo <= hi <= 1");
    if (!(step > 0.0)) throw ValidationError("grid", "step must be > 0");
    std::vector<double> g;
    for (long i = 0;; ++i) {
        const double v = std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9;
        if (v > hi + 1e-9) break;
        g.push_back(std::min(v, hi));
    }
    return g;
}

struct SweepOptions {
    unsigned parallelism = 1;
    PlanningOptions planning;
};

struct SweepTable {
    std::vector<MetricsRow> rows;
    std::vector<int> line_ids;
    nlohmann::json provenance;
};

// One row per kappa, in grid order. Failed rows keep their status and error.
inline SweepTable sweep_kappa(const CaseStudy& c, const std::vector<double>& grid,
                              const solver::SolverConfig& cfg = {}, const SweepOptions& opt = {}) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) throw ValidationError("grid", "values must lie in [0, 1]");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw ValidationError("grid", "must be strictly increasing");
    }
    SweepTable table;
    for (const auto& l : c.lines) table.line_ids.push_back(l.id);
    table.provenance = {{"generator", c.provenance.generator},
                        {"seed", c.provenance.seed},
                        {"params", c.provenance.params},
                        {"backend", cfg.backend}};
    table.rows.resize(grid.size());

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            auto& row = table.rows[i];
            try {
                row = evaluate_metrics(solve_planning(c, grid[i], cfg, opt.planning), c);
            } catch (const CertificateError& e) {
                row.status = "certificate_failure";
                row.error = e.what();
            } catch (const Error& e) {
                row.status = "solver_failure";
                row.error = e.what();
            }
            row.kappa = grid[i];
            if (!row.ok()) spdlog::error("kappa {}: {}", grid[i], row.error);
        }
    };
    const auto workers = std::max(1u, std::min<unsigned>(opt.parallelism, static_cast<unsigned>(grid.size())));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    return table;
}

// Row with the largest participant benefits; ties within 1e-9 relative go to
// the smaller kappa.
inline const MetricsRow& participant_optimal_kappa(const SweepTable& t) {
    const MetricsRow* best = nullptr;
    for (const auto& r : t.rows) {
        if (!r.ok()) continue;
        if (!best || r.participant_benefits >
                         best->participant_benefits + 1e-9 * (1.0 + std::abs(best->participant_benefits)))
            best = &r;
    }
    if (!best) throw ValidationError("sweep", "no successful rows");
    return *best;
}

inline void write_sweep_csv(const SweepTable& t, std::ostream& out) {
    out << "kappa,tp,sw,benefits,fee,ms,cost,change_in_surplus";
    for (const int id : t.line_ids) out << ",expansion_" << id;
    out << ",status\n";
    for (const auto& r : t.rows) {
        out << fmt6(r.kappa);
        if (r.ok()) {
            for (const double v : {r.transco_profit, r.social_welfare, r.participant_benefits, r.fee_total, r.ms_total,
                                   r.cost_total, r.change_in_surplus})
                out << ',' << fmt6(v);
            for (const double mw : r.expansion_mw) out << ',' << fmt6(mw);
        } else {
            for (std::size_t i = 0; i < 7 + t.line_ids.size(); ++i) out << ',';
        }
        out << ',' << r.status << '\n';
    }
}

// The three comparison rows: kappa = 1, the participant-optimal kappa, kappa = 0.
inline nlohmann::json sweep_summary(const SweepTable& t) {
    auto row_json = [&](const std::string& label, const MetricsRow& r) {
        nlohmann::json exp = nlohmann::json::object();
        for (std::size_t l = 0; l < t.line_ids.size(); ++l) exp[std::to_string(t.line_ids[l])] = fmt6(r.expansion_mw[l]);
        return nlohmann::json{{"label", label},
                              {"kappa", fmt6(r.kappa)},
                              {"tp", fmt6(r.transco_profit)},
                              {"sw", fmt6(r.social_welfare)},
                              {"benefits", fmt6(r.participant_benefits)},
                              {"expansion_mw", exp}};
    };
    auto find = [&](double k) -> const MetricsRow* {
        for (const auto& r : t.rows)
            if (r.ok() && std::abs(r.kappa - k) < 1e-12) return &r;
        return nullptr;
    };
    nlohmann::json rows = nlohmann::json::array();
    if (const auto* r = find(1.0)) rows.push_back(row_json("kappa=1", *r));
    rows.push_back(row_json("kappa*", participant_optimal_kappa(t)));
    if (const auto* r = find(0.0)) rows.push_back(row_json("kappa=0", *r));

    nlohmann::json failures = nlohmann::json::array();
    for (const auto& r : t.rows)
        if (!r.ok()) failures.push_back({{"kappa", fmt6(r.kappa)}, {"status", r.status}, {"error", r.error}});
    return {{"rows", rows}, {"failures", failures}, {"provenance", t.provenance}};
}

// Plain-text rendering of the summary rows.
inline std::string summary_text(const nlohmann::json& summary) {
    std::string s = fmt::format("{:<10} {:>8} {:>14} {:>14} {:>14}  expansion (MW)\n", "row", "kappa", "TP", "SW",
                                "benefits");
    for (const auto& r : summary.at("rows")) {
        std::string exp;
        for (const auto& [line, mw] : r.at("expansion_mw").items())
            exp += fmt::format("{}{}:{}", exp.empty() ? "" : " ", line, mw.get<std::string>());
        s += fmt::format("{:<10} {:>8} {:>14} {:>14} {:>14}  {}\n", r.at("label").get<std::string>(),
                         r.at("kappa").get<std::string>(), r.at("tp").get<std::string>(),
                         r.at("sw").get<std::string>(), r.at("benefits").get<std::string>(), exp);
    }
    for (const auto& f : summary.at("failures"))
        s += fmt::format("failed: kappa {} ({}): {}\n", f.at("kappa").get<std::string>(),
                         f.at("status").get<std::string>(), f.at("error").get<std::string>());
    return s;
}

// Writes sweep.csv and/or summary.json into `dir` for the requested formats
// ("csv", "summary"); returns the paths written.
inline std::vector<std::filesystem::path> emit_report(const SweepTable& t, const std::vector<std::string>& formats,
                                                      const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    if (formats.empty()) return written;
    if (t.rows.empty()) throw ValidationError("sweep", "empty table");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    for (const auto& f : formats) {
        std::filesystem::path path;
        std::ofstream out;
        auto open = [&](const char* name) {
            path = dir / name;
            out.open(path, std::ios::binary);
            if (!out) throw IoError("cannot write " + path.string());
        };
        if (f == "csv") {
            open("sweep.csv");
            write_sweep_csv(t, out);
        } else if (f == "summary") {
            open("summary.json");
            out << sweep_summary(t).dump(2) << '\n';
        } else {
            throw ValidationError("formats", "unknown report format '" + f + "'");
        }
        if (!out) throw IoError("failed writing " + path.string());
        written.push_back(path);
    }
    return written;
}

} // namespace gridreg
