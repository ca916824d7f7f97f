// Outer cutting-plane loop: alternate bundle runs with ESC separation over an
// increasing schedule of subgraph orders, carrying multipliers of retained
// blocks across cycles. Also: report serialization (json/csv/table), exact
// brute-force references, and the desk-scale verification harness.
#pragma once

#include <armadillo>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "escbundle/bundle.hpp"
#include "escbundle/common.hpp"
#include "escbundle/graph.hpp"
#include "escbundle/operators.hpp"
#include "escbundle/sdp.hpp"
#include "escbundle/separation.hpp"

namespace escbundle {

struct RunConfig {
    Problem problem = Problem::maxcut;
    std::string instance;        // file path; empty when a graph is passed directly
    std::string format = "dimacs";  // dimacs | rudy
    std::vector<int> k_schedule;    // empty = problem default
    int cycles = 10;
    int escs_per_cycle = 200;
    int bundle_iters = 30;
    double bundle_tol = 1e-6;
    double oracle_tol = 1e-6;
    double final_tol = 1e-8;
    double violation_threshold = 1e-4;
    int candidates_per_new = 20;
    std::uint64_t seed = 42;
    double known_value = 0.0;  // optional reference optimum for the table output
    bool has_known_value = false;

    std::vector<int> schedule() const {
        if (!k_schedule.empty()) return k_schedule;
        // Max-Cut skips order 4: forcing all order-3 subgraphs exact already
        // implies exactness of order 4.
        if (problem == Problem::maxcut) return {3, 5, 7};
        return {2, 3, 4, 5, 6};
    }

    void validate() const {
        auto ks = schedule();
        for (size_t i = 0; i < ks.size(); ++i) {
            if (ks[i] < 2 || ks[i] > 8) throw ParseError("k-schedule entries must lie in [2,8]");
            if (i > 0 && ks[i] <= ks[i - 1]) throw ParseError("k-schedule must be ascending");
        }
        if (cycles < 0 || escs_per_cycle < 0 || bundle_iters < 1)
            throw ParseError("counts must be positive");
    }
};

struct CycleRow {
    int cycle = 0;
    int k = 0;
    int num_blocks = 0;   // |J| during this cycle's bundle run
    long long b = 0;      // total multiplier dimension during the run
    double bound = 0.0;   // user-facing bound of this cycle's bundle run
    double best_bound = 0.0;  // user-facing best-so-far
    double max_distance = 0.0;  // largest projection distance this cycle's separation saw
    int serious = 0;
    int nulls = 0;
    double seconds = 0.0;

    friend bool operator==(const CycleRow&, const CycleRow&) = default;
};

struct KSummary {
    int k = 0;
    double esb = 0.0;  // user-facing bound when this order was exhausted
    double dist_first = -1.0;
    double dist_last = -1.0;
    int cycles_run = 0;

    friend bool operator==(const KSummary&, const KSummary&) = default;
};

struct BoundReport {
    std::string instance_name;
    Problem problem = Problem::maxcut;
    int n = 0;
    int m = 0;
    RunConfig config;
    double basic_bound = 0.0;  // user-facing basic relaxation value
    std::vector<CycleRow> rows;
    std::vector<KSummary> per_k;
    double final_bound = 0.0;  // certified at final_tol
    double best_bound = 0.0;   // best-so-far trajectory endpoint
    double total_seconds = 0.0;
    bool complete = false;
    std::string error;

    friend bool operator==(const BoundReport&, const BoundReport&) = default;
};

inline bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.problem == b.problem && a.instance == b.instance && a.format == b.format &&
           a.k_schedule == b.k_schedule && a.cycles == b.cycles &&
           a.escs_per_cycle == b.escs_per_cycle && a.bundle_iters == b.bundle_iters &&
           a.bundle_tol == b.bundle_tol && a.oracle_tol == b.oracle_tol &&
           a.final_tol == b.final_tol && a.violation_threshold == b.violation_threshold &&
           a.candidates_per_new == b.candidates_per_new && a.seed == b.seed &&
           a.known_value == b.known_value && a.has_known_value == b.has_known_value;
}

namespace detail {

// user-facing bounds negate the internal maximize form for coloring
inline double user_sign(Problem p) { return p == Problem::coloring ? -1.0 : 1.0; }

inline arma::mat esc_slice(const arma::mat& X, const SdpProblem& base, int n) {
    if (base.esc_offset == 0) return X;
    return X.submat(1, 1, n, n);
}

}  // namespace detail

inline WeightedGraph load_instance(const std::string& path, const std::string& format) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file: " + path);
    if (format == "dimacs") return parse_dimacs(in);
    if (format == "rudy") return parse_rudy(in);
    throw ParseError("unknown instance format: " + format);
}

inline BoundReport run_cycles(const RunConfig& cfg, const WeightedGraph& g,
                              const std::string& name) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    BoundReport report;
    report.instance_name = name;
    report.problem = cfg.problem;
    report.n = g.n();
    report.m = g.m();
    report.config = cfg;

    const double sign = detail::user_sign(cfg.problem);
    const SdpProblem base = build_basic(cfg.problem, g);

    BlockSet blocks;
    arma::vec y;
    double best_internal = 0.0;

    try {
        OracleResult basic = solve_sdp(base, IpmOptions{cfg.final_tol, 200});
        if (!basic.converged) throw SolverError("basic relaxation did not converge");
        report.basic_bound = sign * basic.value;
        best_internal = basic.value;

        SeparationOptions sep_opts;
        sep_opts.candidates_per_new = cfg.candidates_per_new;
        sep_opts.threshold = cfg.violation_threshold;
        Rng seeder(cfg.seed);

        std::set<VertexSubset> registered;
        for (int k : cfg.schedule()) {
            KSummary summary;
            summary.k = k;
            for (int cycle = 1; cycle <= cfg.cycles; ++cycle) {
                const double t_cycle = elapsed();

                BundleOptions bopt;
                bopt.max_iters = cfg.bundle_iters;
                bopt.tol = cfg.bundle_tol;
                bopt.oracle.tol = cfg.oracle_tol;
                BundleResult br = run_bundle(base, blocks, y, bopt);
                if (br.aborted) throw SolverError("bundle aborted: " + br.abort_reason);
                y = br.best_y;
                best_internal = std::min(best_internal, br.best_bound);

                arma::mat X_sep = detail::esc_slice(br.last_X, base, g.n());
                SeparationResult sep =
                    select_escs(X_sep, cfg.problem, g, k, cfg.escs_per_cycle, registered,
                                seeder.next(), sep_opts);

                CycleRow row;
                row.cycle = cycle;
                row.k = k;
                row.num_blocks = static_cast<int>(blocks.size());
                row.b = static_cast<long long>(blocks.total_b());
                row.bound = sign * br.best_bound;
                row.best_bound = sign * best_internal;
                row.max_distance = sep.max_distance;
                row.serious = br.serious_steps;
                row.nulls = br.null_steps;
                row.seconds = elapsed() - t_cycle;
                report.rows.push_back(row);

                if (summary.cycles_run == 0) summary.dist_first = sep.max_distance;
                summary.dist_last = sep.max_distance;
                ++summary.cycles_run;

                if (sep.selected.empty()) break;
                for (const auto& rec : sep.selected) {
                    blocks.add(make_block(cfg.problem, g, rec.I));
                    registered.insert(rec.I);
                }
                const arma::uword old = y.n_elem;
                y.resize(blocks.total_b());
                y.subvec(old, y.n_elem - 1).zeros();
            }
            summary.esb = sign * best_internal;
            report.per_k.push_back(summary);
        }

        // certify the carried multiplier point at the tight tolerance
        double final_internal = dual_value(y, blocks, base, IpmOptions{cfg.final_tol, 200});
        report.best_bound = sign * best_internal;
        report.final_bound = sign * final_internal;
        report.complete = true;
    } catch (const std::exception& err) {
        report.complete = false;
        report.error = err.what();
        report.best_bound = sign * best_internal;
        report.final_bound = sign * best_internal;
    }
    report.total_seconds = elapsed();
    return report;
}

inline BoundReport run_cycles(const RunConfig& cfg) {
    WeightedGraph g = load_instance(cfg.instance, cfg.format);
    std::string name = cfg.instance;
    if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
    return run_cycles(cfg, g, name);
}

// ---------------------------------------------------------------------------
// report serialization

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json{{"problem", problem_name(c.problem)},
                       {"instance", c.instance},
                       {"format", c.format},
                       {"k_schedule", c.k_schedule},
                       {"cycles", c.cycles},
                       {"escs_per_cycle", c.escs_per_cycle},
                       {"bundle_iters", c.bundle_iters},
                       {"bundle_tol", c.bundle_tol},
                       {"oracle_tol", c.oracle_tol},
                       {"final_tol", c.final_tol},
                       {"violation_threshold", c.violation_threshold},
                       {"candidates_per_new", c.candidates_per_new},
                       {"seed", c.seed},
                       {"known_value", c.known_value},
                       {"has_known_value", c.has_known_value}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
    c.problem = problem_from_name(j.at("problem").get<std::string>());
    j.at("instance").get_to(c.instance);
    j.at("format").get_to(c.format);
    j.at("k_schedule").get_to(c.k_schedule);
    j.at("cycles").get_to(c.cycles);
    j.at("escs_per_cycle").get_to(c.escs_per_cycle);
    j.at("bundle_iters").get_to(c.bundle_iters);
    j.at("bundle_tol").get_to(c.bundle_tol);
    j.at("oracle_tol").get_to(c.oracle_tol);
    j.at("final_tol").get_to(c.final_tol);
    j.at("violation_threshold").get_to(c.violation_threshold);
    j.at("candidates_per_new").get_to(c.candidates_per_new);
    j.at("seed").get_to(c.seed);
    j.at("known_value").get_to(c.known_value);
    j.at("has_known_value").get_to(c.has_known_value);
}

inline void to_json(nlohmann::json& j, const CycleRow& r) {
    j = nlohmann::json{{"cycle", r.cycle},        {"k", r.k},
                       {"blocks", r.num_blocks},  {"b", r.b},
                       {"bound", r.bound},        {"best_bound", r.best_bound},
                       {"max_distance", r.max_distance}, {"serious", r.serious},
                       {"nulls", r.nulls},        {"seconds", r.seconds}};
}

inline void from_json(const nlohmann::json& j, CycleRow& r) {
    j.at("cycle").get_to(r.cycle);
    j.at("k").get_to(r.k);
    j.at("blocks").get_to(r.num_blocks);
    j.at("b").get_to(r.b);
    j.at("bound").get_to(r.bound);
    j.at("best_bound").get_to(r.best_bound);
    j.at("max_distance").get_to(r.max_distance);
    j.at("serious").get_to(r.serious);
    j.at("nulls").get_to(r.nulls);
    j.at("seconds").get_to(r.seconds);
}

inline void to_json(nlohmann::json& j, const KSummary& s) {
    j = nlohmann::json{{"k", s.k},
                       {"esb", s.esb},
                       {"dist_first", s.dist_first},
                       {"dist_last", s.dist_last},
                       {"cycles_run", s.cycles_run}};
}

inline void from_json(const nlohmann::json& j, KSummary& s) {
    j.at("k").get_to(s.k);
    j.at("esb").get_to(s.esb);
    j.at("dist_first").get_to(s.dist_first);
    j.at("dist_last").get_to(s.dist_last);
    j.at("cycles_run").get_to(s.cycles_run);
}

inline void to_json(nlohmann::json& j, const BoundReport& r) {
    j = nlohmann::json{{"instance", r.instance_name},
                       {"problem", problem_name(r.problem)},
                       {"n", r.n},
                       {"m", r.m},
                       {"config", r.config},
                       {"basic_bound", r.basic_bound},
                       {"rows", r.rows},
                       {"per_k", r.per_k},
                       {"final_bound", r.final_bound},
                       {"best_bound", r.best_bound},
                       {"total_seconds", r.total_seconds},
                       {"complete", r.complete},
                       {"error", r.error}};
}

inline void from_json(const nlohmann::json& j, BoundReport& r) {
    j.at("instance").get_to(r.instance_name);
    r.problem = problem_from_name(j.at("problem").get<std::string>());
    j.at("n").get_to(r.n);
    j.at("m").get_to(r.m);
    j.at("config").get_to(r.config);
    j.at("basic_bound").get_to(r.basic_bound);
    j.at("rows").get_to(r.rows);
    j.at("per_k").get_to(r.per_k);
    j.at("final_bound").get_to(r.final_bound);
    j.at("best_bound").get_to(r.best_bound);
    j.at("total_seconds").get_to(r.total_seconds);
    j.at("complete").get_to(r.complete);
    j.at("error").get_to(r.error);
}

enum class ReportFormat { json, csv, table };

inline ReportFormat report_format_from_name(const std::string& s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    if (s == "table") return ReportFormat::table;
    throw ParseError("unknown report format: " + s);
}

inline void emit_report(const BoundReport& r, ReportFormat format, std::ostream& out) {
    switch (format) {
        case ReportFormat::json: {
            nlohmann::json j = r;
            out << j.dump(2) << '\n';
            break;
        }
        case ReportFormat::csv: {
            out << "cycle,k,blocks,b,bound,best_bound,max_distance,serious,nulls,seconds\n";
            out.precision(17);
            for (const auto& row : r.rows)
                out << row.cycle << ',' << row.k << ',' << row.num_blocks << ',' << row.b << ','
                    << row.bound << ',' << row.best_bound << ',' << row.max_distance << ','
                    << row.serious << ',' << row.nulls << ',' << row.seconds << '\n';
            break;
        }
        case ReportFormat::table: {
            out << "instance  problem  n  m  basic";
            for (const auto& s : r.per_k) out << "  esb" << s.k;
            out << "  final";
            if (r.config.has_known_value) out << "  known";
            out << '\n';
            char buf[64];
            auto fmt = [&](double v) {
                snprintf(buf, sizeof(buf), "%.2f", v);
                return std::string(buf);
            };
            out << r.instance_name << "  " << problem_name(r.problem) << "  " << r.n << "  "
                << r.m << "  " << fmt(r.basic_bound);
            for (const auto& s : r.per_k) out << "  " << fmt(s.esb);
            out << "  " << fmt(r.final_bound);
            if (r.config.has_known_value) out << "  " << fmt(r.config.known_value);
            out << '\n';
            if (!r.complete) out << "INCOMPLETE: " << r.error << '\n';
            break;
        }
    }
}

inline BoundReport parse_report(std::istream& in) {
    nlohmann::json j;
    in >> j;
    return j.get<BoundReport>();
}

// ---------------------------------------------------------------------------
// exact references by enumeration (desk scale)

inline double exact_max_cut(const WeightedGraph& g) {
    const int n = g.n();
    if (n < 1 || n > 22) throw SolverError("exact_max_cut limited to n <= 22");
    double best = 0.0;  // empty cut is always available
    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
        double cut = 0.0;
        for (const auto& e : g.edges()) {
            const bool su = e.u < n - 1 && ((mask >> e.u) & 1u);
            const bool sv = e.v < n - 1 && ((mask >> e.v) & 1u);
            if (su != sv) cut += e.w;
        }
        best = std::max(best, cut);
    }
    return 4.0 * best;  // <L, cc'> = 4 * cut weight
}

namespace detail {

// alpha(G) = max(alpha(G - v), 1 + alpha(G - N[v])), branching on a maximum
// degree vertex; isolated vertices are taken greedily.
inline int mis_branch(const std::vector<std::uint64_t>& adj, std::uint64_t remaining) {
    int taken = 0;
    for (;;) {
        if (remaining == 0) return taken;
        int pick = -1, max_deg = -1;
        std::uint64_t r = remaining;
        while (r) {
            const int v = std::countr_zero(r);
            r &= r - 1;
            const int deg = std::popcount(adj[v] & remaining);
            if (deg == 0) {
                ++taken;
                remaining &= ~(1ULL << v);
                pick = -2;
                break;
            }
            if (deg > max_deg) {
                max_deg = deg;
                pick = v;
            }
        }
        if (pick == -2) continue;
        const std::uint64_t bit = 1ULL << pick;
        return taken + std::max(detail::mis_branch(adj, remaining & ~bit),
                                1 + detail::mis_branch(adj, remaining & ~(bit | adj[pick])));
    }
}

}  // namespace detail

inline int exact_stability_number(const WeightedGraph& g) {
    const int n = g.n();
    if (n < 1 || n > 64) throw SolverError("exact_stability_number limited to n <= 64");
    std::vector<std::uint64_t> adj(n, 0);
    for (const auto& e : g.edges()) {
        adj[e.u] |= 1ULL << e.v;
        adj[e.v] |= 1ULL << e.u;
    }
    const std::uint64_t all = n == 64 ? ~0ULL : (1ULL << n) - 1;
    return detail::mis_branch(adj, all);
}

namespace detail {

inline bool colorable(const std::vector<std::uint32_t>& adj, std::vector<int>& color, int v,
                      int k) {
    const int n = static_cast<int>(adj.size());
    if (v == n) return true;
    int used_max = 0;
    for (int u = 0; u < v; ++u) used_max = std::max(used_max, color[u] + 1);
    for (int c = 0; c < std::min(k, used_max + 1); ++c) {  // symmetry break: first unused color only
        bool ok = true;
        for (int u = 0; u < v && ok; ++u)
            if (((adj[v] >> u) & 1u) && color[u] == c) ok = false;
        if (!ok) continue;
        color[v] = c;
        if (colorable(adj, color, v + 1, k)) return true;
    }
    color[v] = -1;
    return false;
}

}  // namespace detail

inline int exact_chromatic_number(const WeightedGraph& g) {
    const int n = g.n();
    if (n < 1 || n > 16) throw SolverError("exact_chromatic_number limited to n <= 16");
    if (n == 0) return 0;
    std::vector<std::uint32_t> adj(n, 0);
    for (const auto& e : g.edges()) {
        adj[e.u] |= 1u << e.v;
        adj[e.v] |= 1u << e.u;
    }
    for (int k = 1; k <= n; ++k) {
        std::vector<int> color(n, -1);
        if (detail::colorable(adj, color, 0, k)) return k;
    }
    return n;
}

// ---------------------------------------------------------------------------
// desk-scale certificate: run the pipeline with the exhaustive block I = N
// and compare against enumeration

struct SmallCertificate {
    bool passed = false;
    double exact = 0.0;   // z_mc or alpha; chi for coloring
    double bound = 0.0;   // user-facing pipeline bound
    double basic = 0.0;   // user-facing basic relaxation value
    std::string detail;
};

struct VerifySmallOptions {
    int bundle_iters = 400;
    int chunk = 25;          // early-exit check interval
    double bundle_tol = 1e-9;
    double oracle_tol = 1e-8;
    double exact_tol = 1e-4;
    double safety_tol = 1e-6;
};

inline SmallCertificate verify_small(Problem problem, const WeightedGraph& g,
                                     const VerifySmallOptions& opts = {}) {
    const int n = g.n();
    if (n > 10) throw SolverError("verify_small requires n <= 10");
    SmallCertificate cert;
    const double sign = detail::user_sign(problem);

    SdpProblem base = build_basic(problem, g);
    OracleResult basic = solve_sdp(base, IpmOptions{opts.oracle_tol, 200});
    cert.basic = sign * basic.value;

    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    BlockSet blocks;
    blocks.add(make_block(problem, g, VertexSubset::of(all, n)));

    double chi = 0.0;
    switch (problem) {
        case Problem::maxcut:    cert.exact = exact_max_cut(g); break;
        case Problem::stableset: cert.exact = exact_stability_number(g); break;
        case Problem::coloring:
            chi = exact_chromatic_number(g);
            cert.exact = chi;
            break;
    }

    BundleOptions bopt;
    bopt.max_iters = opts.chunk;
    bopt.tol = opts.bundle_tol;
    bopt.oracle.tol = opts.oracle_tol;

    arma::vec y(blocks.total_b(), arma::fill::zeros);
    double best = arma::datum::inf;
    for (int done = 0; done < opts.bundle_iters; done += opts.chunk) {
        BundleResult br = run_bundle(base, blocks, y, bopt);
        if (br.aborted) {
            cert.detail = "bundle aborted: " + br.abort_reason;
            cert.bound = sign * std::min(best, br.best_bound);
            return cert;
        }
        best = std::min(best, br.best_bound);
        y = br.best_y;
        const double user = sign * best;
        if (problem != Problem::coloring && user - cert.exact <= 0.5 * opts.exact_tol) break;
        if (problem == Problem::coloring && br.converged) break;
    }
    cert.bound = sign * best;

    std::ostringstream detail;
    if (problem == Problem::coloring) {
        // esh_c^n need not equal chi; assert the sandwich theta(complement)
        // <= bound <= chi.
        cert.passed = cert.bound >= cert.basic - opts.exact_tol &&
                      cert.bound <= chi + opts.exact_tol;
        detail << "coloring: theta-bar " << cert.basic << " <= bound " << cert.bound
               << " <= chi " << chi << (cert.passed ? " ok" : " VIOLATED");
    } else {
        const bool safe = cert.bound >= cert.exact - opts.safety_tol;
        const bool tight = cert.bound - cert.exact <= opts.exact_tol;
        cert.passed = safe && tight;
        detail << problem_name(problem) << ": exact " << cert.exact << ", bound " << cert.bound
               << (safe ? "" : " UNSAFE") << (tight ? "" : " NOT-CONVERGED");
    }
    cert.detail = detail.str();
    return cert;
}

}  // namespace escbundle
