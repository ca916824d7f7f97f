// escbundle command line: tightened SDP bounds via exact subgraph constraints.
//
//   solve         run the full cutting-plane pipeline on an instance
//   theta         basic relaxation value only
//   verify-small  desk-scale certification against brute force
//   atoms         dump atom matrices as CSV (debug)
//   gen           write a built-in benchmark instance to a file
//
// Exit codes: 0 success, 2 parse/input error, 3 solver failure.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "escbundle/escbundle.hpp"

using namespace escbundle;

namespace {

std::vector<int> parse_schedule(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

void print_trace(const BundleResult& br) {
    std::printf("iter  F_center      model         step  mu        |g|       oracle_s  qp_gap\n");
    for (const auto& r : br.trace)
        std::printf("%-5d %-13.6f %-13.6f %c     %-9.3g %-9.3g %-9.3f %-9.3g\n", r.iter,
                    r.f_center, r.model, r.step, r.mu, r.grad_norm, r.oracle_seconds, r.qp_gap);
}

int run_solve(const RunConfig& cfg, const std::string& out_path, ReportFormat out_format) {
    BoundReport report = run_cycles(cfg);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw ParseError("cannot write report to " + out_path);
        emit_report(report, out_format, out);
    }
    emit_report(report, ReportFormat::table, std::cout);
    if (!report.complete) {
        std::cerr << "run incomplete: " << report.error << "\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact subgraph constraint bounds for Max-Cut, stable set and coloring"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string schedule_csv, out_path, out_format_name = "json";
    std::string problem_name_arg = "maxcut";
    double known = 0.0;

    auto* solve = app.add_subcommand("solve", "run the cutting-plane pipeline");
    solve->add_option("--problem", problem_name_arg, "maxcut|stableset|coloring")->required();
    solve->add_option("--instance", cfg.instance, "instance file")->required();
    solve->add_option("--format", cfg.format, "dimacs|rudy");
    solve->add_option("--k-schedule", schedule_csv, "comma separated subgraph orders");
    solve->add_option("--cycles", cfg.cycles, "cycles per subgraph order");
    solve->add_option("--escs-per-cycle", cfg.escs_per_cycle, "new constraints per cycle");
    solve->add_option("--bundle-iters", cfg.bundle_iters, "bundle iterations per cycle");
    solve->add_option("--tol", cfg.oracle_tol, "oracle/bundle tolerance");
    solve->add_option("--seed", cfg.seed, "separation seed");
    solve->add_option("--out", out_path, "report output path");
    solve->add_option("--out-format", out_format_name, "json|csv|table");
    auto* known_opt = solve->add_option("--known", known, "known optimum for the table output");

    std::string theta_instance, theta_format = "dimacs", theta_problem = "stableset";
    std::string sdpa_path;
    auto* theta = app.add_subcommand("theta", "basic relaxation only");
    theta->add_option("--instance", theta_instance)->required();
    theta->add_option("--format", theta_format, "dimacs|rudy");
    theta->add_option("--problem", theta_problem, "maxcut|stableset|coloring");
    theta->add_option("--dump-sdpa", sdpa_path, "write the SDP in SDPA sparse format");

    int vs_n = 8, vs_trials = 20;
    std::uint64_t vs_seed = 1;
    std::string vs_problem = "all";
    auto* verify = app.add_subcommand("verify-small", "certify against brute force, n <= 10");
    verify->add_option("--n", vs_n, "vertices per trial graph")->check(CLI::Range(2, 10));
    verify->add_option("--trials", vs_trials);
    verify->add_option("--seed", vs_seed);
    verify->add_option("--problem", vs_problem, "maxcut|stableset|coloring|all");

    std::string atoms_problem = "maxcut", atoms_instance, atoms_subset;
    int atoms_k = 3;
    auto* atoms_cmd = app.add_subcommand("atoms", "dump atom matrices as CSV");
    atoms_cmd->add_option("--problem", atoms_problem)->required();
    atoms_cmd->add_option("--k", atoms_k, "order (maxcut, or with no instance: empty graph)");
    atoms_cmd->add_option("--instance", atoms_instance, "graph file for stableset/coloring");
    atoms_cmd->add_option("--format", theta_format, "dimacs|rudy");
    atoms_cmd->add_option("--subset", atoms_subset, "comma separated 1-based vertices");

    std::string gen_name, gen_out;
    auto* gen_cmd = app.add_subcommand("gen", "write a built-in instance (DIMACS format)");
    gen_cmd->add_option("--name", gen_name, "c5|petersen|myciel3..5|hamming6_4|cubicvt26_5|spin5")
        ->required();
    gen_cmd->add_option("--out", gen_out, "output path (default: stdout)");

    try {
        app.parse(argc, argv);

        if (solve->parsed()) {
            cfg.problem = problem_from_name(problem_name_arg);
            if (!schedule_csv.empty()) cfg.k_schedule = parse_schedule(schedule_csv);
            cfg.bundle_tol = cfg.oracle_tol;
            if (known_opt->count() > 0) {
                cfg.known_value = known;
                cfg.has_known_value = true;
            }
            return run_solve(cfg, out_path, report_format_from_name(out_format_name));
        }

        if (theta->parsed()) {
            Problem problem = problem_from_name(theta_problem);
            WeightedGraph g = load_instance(theta_instance, theta_format);
            SdpProblem base = build_basic(problem, g);
            if (!sdpa_path.empty()) {
                std::ofstream out(sdpa_path);
                if (!out) throw ParseError("cannot write " + sdpa_path);
                write_sdpa(base, base.C, out);
            }
            OracleResult res = solve_sdp(base, IpmOptions{1e-8, 200});
            if (!res.converged) throw SolverError("basic relaxation did not converge");
            const double sign = problem == Problem::coloring ? -1.0 : 1.0;
            std::printf("%.8f\n", sign * res.value);
            return 0;
        }

        if (verify->parsed()) {
            bool all_passed = true;
            Rng seeds(vs_seed);
            for (int trial = 0; trial < vs_trials; ++trial) {
                WeightedGraph g = gen::gnp(vs_n, 0.5, seeds.next());
                for (Problem problem :
                     {Problem::maxcut, Problem::stableset, Problem::coloring}) {
                    if (vs_problem != "all" && problem_from_name(vs_problem) != problem) continue;
                    SmallCertificate cert = verify_small(problem, g);
                    std::printf("trial %2d %-9s %s  %s\n", trial, problem_name(problem),
                                cert.passed ? "pass" : "FAIL", cert.detail.c_str());
                    all_passed &= cert.passed;
                }
            }
            if (!all_passed) throw SolverError("verify-small found violations");
            std::printf("all trials passed\n");
            return 0;
        }

        if (atoms_cmd->parsed()) {
            Problem problem = problem_from_name(atoms_problem);
            std::shared_ptr<const AtomSet> set;
            if (problem == Problem::maxcut) {
                set = atoms_for(problem, gen::complete(atoms_k));
            } else {
                WeightedGraph g = atoms_instance.empty()
                                      ? WeightedGraph::make(atoms_k, {})
                                      : load_instance(atoms_instance, theta_format);
                if (!atoms_subset.empty()) {
                    std::vector<int> idx;
                    for (int v : parse_schedule(atoms_subset)) idx.push_back(v - 1);
                    g = induced_subgraph(g, VertexSubset::of(idx, g.n()));
                }
                set = atoms_for(problem, g);
            }
            std::printf("atom,row");
            for (int j = 0; j < set->k; ++j) std::printf(",c%d", j + 1);
            std::printf("\n");
            for (int i = 0; i < set->t(); ++i)
                for (int r = 0; r < set->k; ++r) {
                    std::printf("%d,%d", i + 1, r + 1);
                    for (int j = 0; j < set->k; ++j)
                        std::printf(",%g", set->atoms[i](r, j));
                    std::printf("\n");
                }
            return 0;
        }

        if (gen_cmd->parsed()) {
            WeightedGraph g = gen::by_name(gen_name);
            if (gen_out.empty()) {
                serialize_dimacs(g, std::cout);
            } else {
                std::ofstream out(gen_out);
                if (!out) throw ParseError("cannot write " + gen_out);
                serialize_dimacs(g, out);
            }
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
