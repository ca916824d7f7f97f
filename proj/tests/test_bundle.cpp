#include <catch2/catch_amalgamated.hpp>

#include "escbundle/bundle.hpp"
#include "escbundle/driver.hpp"
#include "escbundle/instances.hpp"
#include "escbundle/simplex_qp.hpp"

using namespace escbundle;

namespace {

VertexSubset full_set(int n) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    return VertexSubset::of(all, n);
}

std::vector<BundleElement> single_plane(const arma::vec& y, double h, const arma::vec& g) {
    return {BundleElement{y, h, g, arma::mat(), 0.0, 1.0}};
}

}  // namespace

TEST_CASE("simplex qp closed forms") {
    // min 1/2 x'Ix - c'x over the simplex: uniform c gives the analytic center
    arma::mat Q = arma::eye(3, 3);
    auto res = simplex_qp(Q, arma::vec{1.0, 1.0, 1.0}, {}, 1e-12);
    REQUIRE(res.optimal);
    REQUIRE(arma::norm(res.x - arma::vec{1, 1, 1} / 3.0, "inf") <= 1e-10);

    // strongly skewed linear term pins a vertex
    auto vertex = simplex_qp(0.01 * Q, arma::vec{0.0, 5.0, 0.0}, {}, 1e-12);
    REQUIRE(vertex.x(1) >= 1.0 - 1e-10);

    // compare against a dense grid on a random 3-dim instance
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        arma::mat B(3, 3, arma::fill::zeros);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) B(i, j) = rng.uniform(-1, 1);
        arma::mat Qr = B.t() * B;
        arma::vec c(3);
        for (int i = 0; i < 3; ++i) c(i) = rng.uniform(-2, 2);
        auto sol = simplex_qp(Qr, c, {}, 1e-12);
        REQUIRE(sol.optimal);
        auto value = [&](const arma::vec& x) {
            return 0.5 * arma::dot(x, Qr * x) - arma::dot(c, x);
        };
        const double vstar = value(sol.x);
        const int grid = 60;
        for (int a = 0; a <= grid; ++a)
            for (int b = 0; a + b <= grid; ++b) {
                arma::vec x = {double(a) / grid, double(b) / grid,
                               double(grid - a - b) / grid};
                REQUIRE(value(x) >= vstar - 1e-9);
            }
    }
}

TEST_CASE("trial point with one plane and no blocks is a proximal step") {
    BlockSet none;
    TrialQpSolver qp(none, 1e-10, 100);
    arma::vec center = {1.0, -2.0, 0.5};
    arma::vec g = {0.3, -1.0, 2.0};
    auto elements = single_plane(center, 7.0, g);
    for (double mu : {0.5, 1.0, 4.0}) {
        auto sol = qp.solve(center, 7.0, elements, mu);
        REQUIRE(arma::norm(sol.y - (center - g / mu), "inf") <= 1e-9);
        REQUIRE_THAT(sol.w, Catch::Matchers::WithinAbs(7.0 + arma::dot(g, sol.y - center), 1e-9));
    }
}

TEST_CASE("trial point with one K2 block matches the hand solution") {
    // plane h >= 4 + 2y, block max(y, -y), mu = 2:
    // min_y 4 + 2y + |y| + y^2 has its optimum at y = -1/2
    WeightedGraph k2 = gen::complete(2);
    BlockSet blocks;
    blocks.add(make_block(Problem::maxcut, k2, full_set(2)));
    TrialQpSolver qp(blocks, 1e-12, 1000);
    arma::vec center = {0.0};
    auto elements = single_plane(center, 4.0, arma::vec{2.0});
    auto sol = qp.solve(center, 4.0, elements, 2.0);
    REQUIRE_THAT(sol.y(0), Catch::Matchers::WithinAbs(-0.5, 1e-8));
    REQUIRE_THAT(sol.w, Catch::Matchers::WithinAbs(3.0, 1e-8));
    REQUIRE_THAT(sol.v(0), Catch::Matchers::WithinAbs(0.5, 1e-8));
    REQUIRE_THAT(sol.model, Catch::Matchers::WithinAbs(3.5, 1e-8));
    REQUIRE(sol.gap <= 1e-10 * 4.0);
}

TEST_CASE("doubling mu never increases the step length") {
    WeightedGraph g = gen::gnp(6, 0.5, 41);
    BlockSet blocks;
    blocks.add(make_block(Problem::maxcut, g, VertexSubset::of({0, 1, 2}, 6)));
    blocks.add(make_block(Problem::maxcut, g, VertexSubset::of({1, 3, 5}, 6)));
    Rng rng(12);
    arma::vec center(blocks.total_b());
    for (auto& v : center) v = rng.uniform(-1, 1);

    std::vector<BundleElement> elements;
    for (int j = 0; j < 3; ++j) {
        arma::vec yj(blocks.total_b()), gj(blocks.total_b());
        for (auto& v : yj) v = rng.uniform(-1, 1);
        for (auto& v : gj) v = rng.uniform(-1, 1);
        elements.push_back({yj, rng.uniform(0, 2), gj, arma::mat(), rng.uniform01(), 0.0});
    }
    double prev = arma::datum::inf;
    for (double mu : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        TrialQpSolver qp(blocks, 1e-11, 2000);
        auto local = elements;
        auto sol = qp.solve(center, 1.5, local, mu);
        const double step = arma::norm(sol.y - center, 2);
        REQUIRE(step <= prev + 1e-7);
        prev = step;
    }
}

TEST_CASE("step decision rule") {
    // exact model: serious for any m_ss <= 1
    REQUIRE(step_decision(10.0, 8.0, 8.0, 1.0));
    // no progress at all: null
    REQUIRE(!step_decision(10.0, 10.0, 8.0, 0.1));
    // predicted 2, achieved 0.1 < 0.2: null
    REQUIRE(!step_decision(10.0, 9.9, 8.0, 0.1));
    // model above center violates the precondition
    REQUIRE_THROWS_AS(step_decision(10.0, 9.0, 11.0, 0.1), SolverError);
}

TEST_CASE("state update rules") {
    BundleOptions opts;
    opts.r_max = 3;

    BundleState state;
    state.center = arma::vec{0.0};
    state.h_center = 5.0;
    state.f_center = 5.0;
    state.mu = 1.0;
    state.elements.push_back({arma::vec{0.0}, 5.0, arma::vec{1.0}, {}, 0.0, 1.0});
    state.center_plane = 0;

    // serious step with strong decrease halves mu
    BundleElement trial{arma::vec{-1.0}, 4.0, arma::vec{0.5}, {}, 0.0, 0.0};
    state.update(true, trial, 4.0, 1.2, opts);
    REQUIRE(state.mu == 0.5);
    REQUIRE(state.f_center == 4.0);
    REQUIRE(state.center_plane == 1);
    REQUIRE(state.consecutive_nulls == 0);

    // three consecutive nulls double mu
    state.mu = 1.0;
    for (int i = 0; i < 3; ++i) {
        BundleElement nul{arma::vec{double(i)}, 4.5 + i, arma::vec{0.1}, {}, 0.0, 0.0};
        state.update(false, nul, 5.0, 0.5, opts);
    }
    REQUIRE(state.mu == 2.0);
    REQUIRE(state.consecutive_nulls == 0);

    // eviction keeps at most r_max elements, never the newest or the center
    REQUIRE(static_cast<int>(state.elements.size()) == opts.r_max);
    const arma::vec center_y = state.elements[state.center_plane].y;
    double max_e = 0.0;
    for (const auto& el : state.elements) max_e = std::max(max_e, el.e);
    BundleElement extra{arma::vec{9.0}, 9.0, arma::vec{0.2}, {}, 0.0, 0.0};
    state.update(false, extra, 5.0, 0.5, opts);
    REQUIRE(static_cast<int>(state.elements.size()) == opts.r_max);
    REQUIRE(arma::norm(state.elements.back().y - arma::vec{9.0}, 2) == 0.0);
    REQUIRE(arma::norm(state.elements[state.center_plane].y - center_y, 2) == 0.0);
}

TEST_CASE("dual value at zero equals the basic relaxation") {
    WeightedGraph g = gen::gnp(6, 0.5, 8);
    SdpProblem base = build_basic(Problem::maxcut, g);
    BlockSet blocks;
    blocks.add(make_block(Problem::maxcut, g, VertexSubset::of({0, 2, 4}, 6)));
    arma::vec zero(blocks.total_b(), arma::fill::zeros);
    IpmOptions tol{1e-8, 200};
    const double f0 = dual_value(zero, blocks, base, tol);
    OracleResult basic = solve_sdp(base, tol);
    REQUIRE(f0 == basic.value);
}

TEST_CASE("max_iters = 1 evaluates only the start point") {
    WeightedGraph g = gen::gnp(6, 0.5, 9);
    SdpProblem base = build_basic(Problem::maxcut, g);
    BlockSet blocks;
    blocks.add(make_block(Problem::maxcut, g, full_set(6)));
    BundleOptions opts;
    opts.max_iters = 1;
    opts.oracle.tol = 1e-8;
    BundleResult res = run_bundle(base, blocks, arma::vec(blocks.total_b(), arma::fill::zeros),
                                  opts);
    REQUIRE(res.oracle_calls == 1);
    OracleResult basic = solve_sdp(base, IpmOptions{1e-8, 100});
    REQUIRE(res.best_bound == basic.value);
}

TEST_CASE("K2 with the full block converges to the exact cut value") {
    WeightedGraph k2 = gen::complete(2);
    SdpProblem base = build_basic(Problem::maxcut, k2);
    BlockSet blocks;
    blocks.add(make_block(Problem::maxcut, k2, full_set(2)));
    BundleOptions opts;
    opts.max_iters = 30;
    opts.tol = 1e-9;
    opts.oracle.tol = 1e-9;
    BundleResult res = run_bundle(base, blocks, arma::vec{0.0}, opts);
    REQUIRE_THAT(res.best_bound, Catch::Matchers::WithinAbs(4.0, 1e-5));
    REQUIRE(res.best_bound >= 4.0 - 1e-6);
}

TEST_CASE("bound trajectory is monotone and QP gaps stay small") {
    WeightedGraph g = gen::gnp(7, 0.5, 15);
    SdpProblem base = build_basic(Problem::maxcut, g);
    BlockSet blocks;
    blocks.add(make_block(Problem::maxcut, g, full_set(7)));
    BundleOptions opts;
    opts.max_iters = 40;
    BundleResult res = run_bundle(base, blocks, arma::vec(blocks.total_b(), arma::fill::zeros),
                                  opts);
    double prev = arma::datum::inf;
    for (const auto& row : res.trace) {
        REQUIRE(row.best_bound <= prev + 1e-12);
        prev = row.best_bound;
        REQUIRE(row.qp_gap <= 1e-6 * (1.0 + std::abs(row.f_center)));
    }
    // safety: still above the combinatorial optimum
    REQUIRE(res.best_bound >= exact_max_cut(g) - 1e-6);
}

TEST_CASE("model minorizes h at every evaluated point") {
    WeightedGraph g = gen::gnp(6, 0.5, 33);
    SdpProblem base = build_basic(Problem::stableset, g);
    BlockSet blocks;
    blocks.add(make_block(Problem::stableset, g, full_set(6)));
    IpmOptions tol{1e-8, 200};

    // build a small bundle by hand
    Rng rng(2);
    std::vector<BundleElement> elements;
    arma::vec center(blocks.total_b(), arma::fill::zeros);
    OracleResult at_center = evaluate_h(base, blocks, center, tol);
    for (int j = 0; j < 5; ++j) {
        arma::vec yj(blocks.total_b());
        for (auto& v : yj) v = rng.uniform(-0.5, 0.5);
        OracleResult oj = evaluate_h(base, blocks, yj, tol);
        const double e = at_center.value - oj.value - arma::dot(oj.subgrad, center - yj);
        REQUIRE(e >= -1e-8);  // linearization errors are nonnegative by convexity
        elements.push_back({yj, oj.value, oj.subgrad, oj.X, std::max(e, 0.0), 0.0});
    }
    for (int trial = 0; trial < 10; ++trial) {
        arma::vec y(blocks.total_b());
        for (auto& v : y) v = rng.uniform(-0.5, 0.5);
        const double h = evaluate_h(base, blocks, y, tol).value;
        for (const auto& el : elements) {
            const double plane = at_center.value - el.e + arma::dot(el.g, y - center);
            REQUIRE(h >= plane - 1e-6);
        }
    }
}

TEST_CASE("empty block set reduces to a single oracle call") {
    WeightedGraph g = gen::gnp(5, 0.5, 77);
    SdpProblem base = build_basic(Problem::coloring, g);
    BlockSet blocks;
    BundleOptions opts;
    BundleResult res = run_bundle(base, blocks, arma::vec(), opts);
    REQUIRE(res.oracle_calls == 1);
    REQUIRE(res.converged);
    OracleResult basic = solve_sdp(base, IpmOptions{opts.oracle.tol, 100});
    REQUIRE(res.best_bound == basic.value);
}
