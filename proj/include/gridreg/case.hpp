#pragma once

// Case data: network, bids, horizon and policy, plus validation and JSON I/O.

#include "gridreg/error.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gridreg {

struct Node {
    int id = 0;
    double theta_max = 0.5; // rad

    bool operator==(const Node&) const = default;
};

// Susceptance is in MW/rad so that flow = susceptance * angle difference.
struct Line {
    int id = 0;
    int from = 0;
    int to = 0;
    double susceptance = 0.0;
    double capacity = 0.0;        // existing capacity, MW
    std::vector<double> lumps;    // expansion menu, MW, strictly increasing
    double k_fix = 0.0;           // currency/h
    double k_var = 0.0;           // currency/MWh

    bool operator==(const Line&) const = default;
};

enum class AgentKind { generator, consumer };

inline const char* to_string(AgentKind k) {
    return k == AgentKind::generator ? "generator" : "consumer";
}

// One price-quantity offer (generator) or bid (consumer) for a single (year, period).
struct Bid {
    AgentKind kind = AgentKind::generator;
    int node = 0;
    int year = 1;
    int period = 1;
    double price = 0.0;
    double q_min = 0.0;
    double q_max = 0.0;

    bool operator==(const Bid&) const = default;
};

struct Horizon {
    std::vector<int> years{1, 2}; // first entry is the pre-investment baseline
    std::vector<int> periods{1};
    double psi = 8760.0;          // operation periods per investment period
    double discount_rate = 0.01;

    bool operator==(const Horizon&) const = default;
};

struct Policy {
    double kappa = 1.0;
    double big_m = 3000.0;

    bool operator==(const Policy&) const = default;
};

struct Provenance {
    std::string generator = "manual";
    std::uint64_t seed = 0;
    nlohmann::json params = nlohmann::json::object();

    bool operator==(const Provenance&) const = default;
};

struct CaseStudy {
    std::vector<Node> nodes; // nodes.front() is the reference node
    std::vector<Line> lines;
    std::vector<Bid> bids;
    Horizon horizon;
    Policy policy;
    Provenance provenance;

    bool operator==(const CaseStudy&) const = default;

    double max_abs_bid_price() const {
        double m = 0.0;
        for (const auto& b : bids) m = std::max(m, std::abs(b.price));
        return m;
    }
};

struct ValidateOptions {
    bool check_big_m = true;
};

// Throws ValidationError on the first broken invariant; returns warnings.
inline std::vector<std::string> validate(const CaseStudy& c, ValidateOptions opt = {}) {
    std::vector<std::string> warnings;
    if (c.nodes.empty()) throw ValidationError("nodes", "case has no nodes");

    std::set<int> node_ids;
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        const auto& n = c.nodes[i];
        const auto field = "nodes[" + std::to_string(i) + "]";
        if (!node_ids.insert(n.id).second)
            throw ValidationError(field, "duplicate node id " + std::to_string(n.id));
        if (!(n.theta_max > 0.0) || !std::isfinite(n.theta_max))
            throw ValidationError(field + ".theta_max", "must be finite and > 0");
    }

    std::set<int> line_ids;
    for (std::size_t i = 0; i < c.lines.size(); ++i) {
        const auto& l = c.lines[i];
        const auto field = "lines[" + std::to_string(i) + "]";
        if (!line_ids.insert(l.id).second)
            throw ValidationError(field, "duplicate line id " + std::to_string(l.id));
        if (!node_ids.count(l.from)) throw ValidationError(field + ".from", "unknown node");
        if (!node_ids.count(l.to)) throw ValidationError(field + ".to", "unknown node");
        if (l.from == l.to) throw ValidationError(field, "from and to must differ");
        if (!(l.susceptance > 0.0) || !std::isfinite(l.susceptance))
            throw ValidationError(field + ".susceptance", "must be finite and > 0");
        if (!(l.capacity >= 0.0) || !std::isfinite(l.capacity))
            throw ValidationError(field + ".capacity", "must be finite and >= 0");
        if (!(l.k_fix >= 0.0) || !(l.k_var >= 0.0) || !std::isfinite(l.k_fix) ||
            !std::isfinite(l.k_var))
            throw ValidationError(field + ".k_fix/k_var", "costs must be finite and >= 0");
        for (std::size_t j = 0; j < l.lumps.size(); ++j) {
            if (!(l.lumps[j] > 0.0) || !std::isfinite(l.lumps[j]))
                throw ValidationError(field + ".lumps[" + std::to_string(j) + "]", "must be > 0");
            if (j > 0 && !(l.lumps[j] > l.lumps[j - 1]))
                throw ValidationError(field + ".lumps", "must be strictly increasing");
        }
    }

    const auto& h = c.horizon;
    if (h.years.size() < 2) throw ValidationError("horizon.years", "need at least 2 years");
    if (h.periods.empty()) throw ValidationError("horizon.periods", "need at least 1 period");
    if (!std::is_sorted(h.years.begin(), h.years.end()) ||
        std::adjacent_find(h.years.begin(), h.years.end()) != h.years.end())
        throw ValidationError("horizon.years", "must be strictly increasing");
    if (std::set<int>(h.periods.begin(), h.periods.end()).size() != h.periods.size())
        throw ValidationError("horizon.periods", "duplicate period");
    if (!(h.psi > 0.0) || !std::isfinite(h.psi)) throw ValidationError("horizon.psi", "must be > 0");
    if (!(h.discount_rate >= 0.0) || !std::isfinite(h.discount_rate))
        throw ValidationError("horizon.discount_rate", "must be >= 0");

    if (!(c.policy.kappa >= 0.0 && c.policy.kappa <= 1.0))
        throw ValidationError("policy.kappa", "must lie in [0, 1]");
    if (!(c.policy.big_m > 0.0) || !std::isfinite(c.policy.big_m))
        throw ValidationError("policy.big_m", "must be finite and > 0");

    const std::set<int> years(h.years.begin(), h.years.end());
    const std::set<int> periods(h.periods.begin(), h.periods.end());
    bool nonzero_qmin = false;
    for (std::size_t i = 0; i < c.bids.size(); ++i) {
        const auto& b = c.bids[i];
        const auto field = "bids[" + std::to_string(i) + "]";
        if (!node_ids.count(b.node)) throw ValidationError(field + ".node", "unknown node");
        if (!years.count(b.year)) throw ValidationError(field + ".year", "not in horizon");
        if (!periods.count(b.period)) throw ValidationError(field + ".period", "not in horizon");
        if (!std::isfinite(b.price)) throw ValidationError(field + ".price", "must be finite");
        if (!(b.q_min >= 0.0) || !std::isfinite(b.q_max) || !(b.q_min <= b.q_max))
            throw ValidationError(field, "requires 0 <= q_min <= q_max");
        nonzero_qmin = nonzero_qmin || b.q_min > 0.0;
    }
    if (nonzero_qmin)
        warnings.emplace_back("bids with q_min > 0 present: the market LP may be infeasible");

    if (opt.check_big_m && c.policy.big_m < c.max_abs_bid_price())
        throw ValidationError("policy.big_m", "smaller than the largest bid price");
    return warnings;
}

// Dense positional indexing over a validated case. Years, periods, nodes and
// lines are addressed by position; bids keep their position in CaseStudy::bids.
class CaseLayout {
public:
    explicit CaseLayout(const CaseStudy& c) : case_(&c) {
        for (std::size_t i = 0; i < c.nodes.size(); ++i) node_pos_[c.nodes[i].id] = i;
        for (std::size_t i = 0; i < c.horizon.years.size(); ++i) year_pos_[c.horizon.years[i]] = i;
        for (std::size_t i = 0; i < c.horizon.periods.size(); ++i)
            period_pos_[c.horizon.periods[i]] = i;
        for (const auto& l : c.lines) {
            line_from_.push_back(node_pos_.at(l.from));
            line_to_.push_back(node_pos_.at(l.to));
        }
        blocks_.resize(num_years() * num_periods());
        bid_node_.reserve(c.bids.size());
        bid_block_.reserve(c.bids.size());
        for (std::size_t k = 0; k < c.bids.size(); ++k) {
            const auto& b = c.bids[k];
            const auto blk = block(year_pos_.at(b.year), period_pos_.at(b.period));
            blocks_[blk].push_back(k);
            bid_node_.push_back(node_pos_.at(b.node));
            bid_block_.push_back(blk);
        }
    }

    const CaseStudy& data() const { return *case_; }

    std::size_t num_years() const { return case_->horizon.years.size(); }
    std::size_t num_periods() const { return case_->horizon.periods.size(); }
    std::size_t num_nodes() const { return case_->nodes.size(); }
    std::size_t num_lines() const { return case_->lines.size(); }
    std::size_t num_blocks() const { return num_years() * num_periods(); }

    std::size_t block(std::size_t t, std::size_t s) const { return t * num_periods() + s; }
    std::size_t block_year(std::size_t blk) const { return blk / num_periods(); }

    std::size_t node_slot(std::size_t blk, std::size_t b) const { return blk * num_nodes() + b; }
    std::size_t line_slot(std::size_t blk, std::size_t l) const { return blk * num_lines() + l; }

    std::size_t node_pos(int id) const { return node_pos_.at(id); }
    std::size_t year_pos(int year) const { return year_pos_.at(year); }

    std::size_t line_from(std::size_t l) const { return line_from_[l]; }
    std::size_t line_to(std::size_t l) const { return line_to_[l]; }

    // Bids (positions into CaseStudy::bids) belonging to one (year, period) block.
    const std::vector<std::size_t>& block_bids(std::size_t blk) const { return blocks_[blk]; }
    std::size_t bid_node(std::size_t k) const { return bid_node_[k]; }
    std::size_t bid_block(std::size_t k) const { return bid_block_[k]; }

    // 1 / (1 + r)^(t - 1) with t counted from 1 at the baseline year.
    double discount(std::size_t t) const {
        return 1.0 / std::pow(1.0 + case_->horizon.discount_rate, static_cast<double>(t));
    }

private:
    const CaseStudy* case_;
    std::map<int, std::size_t> node_pos_, year_pos_, period_pos_;
    std::vector<std::size_t> line_from_, line_to_;
    std::vector<std::vector<std::size_t>> blocks_;
    std::vector<std::size_t> bid_node_, bid_block_;
};

// Keeps every stride-th lump (stride, 2*stride, ...) on every line. The
// transformation is recorded in provenance and logged.
inline CaseStudy coarsen_lumps(CaseStudy c, std::size_t stride) {
    if (stride == 0) throw ValidationError("lump_stride", "must be >= 1");
    if (stride == 1) return c;
    std::size_t before = 0, after = 0;
    for (auto& l : c.lines) {
        std::vector<double> kept;
        for (std::size_t j = stride - 1; j < l.lumps.size(); j += stride) kept.push_back(l.lumps[j]);
        before += l.lumps.size();
        after += kept.size();
        l.lumps = std::move(kept);
    }
    const auto prev = c.provenance.params.value("lump_stride", std::uint64_t{1});
    c.provenance.params["lump_stride"] = prev * stride;
    spdlog::info("lump menus coarsened with stride {}: {} -> {} lumps", stride, before, after);
    return c;
}

// ---------------------------------------------------------------------------
// JSON mapping

inline void to_json(nlohmann::json& j, const CaseStudy& c) {
    using nlohmann::json;
    j = json::object();
    j["nodes"] = json::array();
    for (const auto& n : c.nodes) j["nodes"].push_back({{"id", n.id}, {"theta_max", n.theta_max}});
    j["lines"] = json::array();
    for (const auto& l : c.lines)
        j["lines"].push_back({{"id", l.id},
                              {"from", l.from},
                              {"to", l.to},
                              {"susceptance", l.susceptance},
                              {"capacity", l.capacity},
                              {"lumps", l.lumps},
                              {"k_fix", l.k_fix},
                              {"k_var", l.k_var}});
    j["bids"] = json::array();
    for (const auto& b : c.bids)
        j["bids"].push_back({{"kind", to_string(b.kind)},
                             {"node", b.node},
                             {"year", b.year},
                             {"period", b.period},
                             {"price", b.price},
                             {"q_min", b.q_min},
                             {"q_max", b.q_max}});
    j["horizon"] = {{"years", c.horizon.years},
                    {"periods", c.horizon.periods},
                    {"psi", c.horizon.psi},
                    {"discount_rate", c.horizon.discount_rate}};
    j["policy"] = {{"kappa", c.policy.kappa}, {"big_m", c.policy.big_m}};
    j["provenance"] = {{"generator", c.provenance.generator},
                       {"seed", c.provenance.seed},
                       {"params", c.provenance.params}};
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key,
                                     const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw ParseError("missing key '" + std::string(key) + "' in " + where);
    return j.at(key);
}

template <class T>
T get_as(const nlohmann::json& j, const char* key, const std::string& where) {
    try {
        return require(j, key, where).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(where + "." + key + ": " + e.what());
    }
}

} // namespace detail

inline CaseStudy case_from_json(const nlohmann::json& j) {
    using detail::get_as;
    using detail::require;
    CaseStudy c;
    for (const auto& n : require(j, "nodes", "case")) {
        Node node;
        node.id = get_as<int>(n, "id", "nodes[]");
        node.theta_max = get_as<double>(n, "theta_max", "nodes[]");
        c.nodes.push_back(node);
    }
    for (const auto& l : require(j, "lines", "case")) {
        Line line;
        line.id = get_as<int>(l, "id", "lines[]");
        line.from = get_as<int>(l, "from", "lines[]");
        line.to = get_as<int>(l, "to", "lines[]");
        line.susceptance = get_as<double>(l, "susceptance", "lines[]");
        line.capacity = get_as<double>(l, "capacity", "lines[]");
        line.lumps = get_as<std::vector<double>>(l, "lumps", "lines[]");
        line.k_fix = get_as<double>(l, "k_fix", "lines[]");
        line.k_var = get_as<double>(l, "k_var", "lines[]");
        c.lines.push_back(std::move(line));
    }
    for (const auto& b : require(j, "bids", "case")) {
        Bid bid;
        const auto kind = get_as<std::string>(b, "kind", "bids[]");
        if (kind == "generator")
            bid.kind = AgentKind::generator;
        else if (kind == "consumer")
            bid.kind = AgentKind::consumer;
        else
            throw ParseError("bids[].kind: expected generator|consumer, got '" + kind + "'");
        bid.node = get_as<int>(b, "node", "bids[]");
        bid.year = get_as<int>(b, "year", "bids[]");
        bid.period = get_as<int>(b, "period", "bids[]");
        bid.price = get_as<double>(b, "price", "bids[]");
        bid.q_min = get_as<double>(b, "q_min", "bids[]");
        bid.q_max = get_as<double>(b, "q_max", "bids[]");
        c.bids.push_back(bid);
    }
    const auto& h = require(j, "horizon", "case");
    c.horizon.years = get_as<std::vector<int>>(h, "years", "horizon");
    c.horizon.periods = get_as<std::vector<int>>(h, "periods", "horizon");
    c.horizon.psi = get_as<double>(h, "psi", "horizon");
    c.horizon.discount_rate = get_as<double>(h, "discount_rate", "horizon");
    const auto& p = require(j, "policy", "case");
    c.policy.kappa = get_as<double>(p, "kappa", "policy");
    c.policy.big_m = get_as<double>(p, "big_m", "policy");
    if (j.contains("provenance")) {
        const auto& pv = j.at("provenance");
        c.provenance.generator = pv.value("generator", std::string("manual"));
        c.provenance.seed = pv.value("seed", std::uint64_t{0});
        c.provenance.params = pv.value("params", nlohmann::json::object());
    }
    return c;
}

inline CaseStudy load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open case file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    CaseStudy c = case_from_json(j);
    for (const auto& w : validate(c)) spdlog::warn("{}: {}", path.string(), w);
    return c;
}

inline void save_case(const CaseStudy& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write case file " + path.string());
    out << nlohmann::json(c).dump(1) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace gridreg
