#include <catch2/catch_amalgamated.hpp>

#include "escbundle/instances.hpp"
#include "escbundle/operators.hpp"

using namespace escbundle;

namespace {

arma::mat random_sym(int k, Rng& rng) {
    arma::mat s(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) s(i, j) = s(j, i) = rng.uniform(-2.0, 2.0);
    return s;
}

arma::vec random_vec(int b, Rng& rng) {
    arma::vec y(b);
    for (int i = 0; i < b; ++i) y(i) = rng.uniform(-2.0, 2.0);
    return y;
}

EscBlock block_on(Problem problem, const WeightedGraph& g, std::vector<int> idx) {
    return make_block(problem, g, VertexSubset::of(std::move(idx), g.n()));
}

}  // namespace

TEST_CASE("positions honour the b_I formulas") {
    auto mc = positions_for(Problem::maxcut, gen::complete(3));
    REQUIRE(mc == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});

    auto ss = positions_for(Problem::stableset, gen::complete(2));
    REQUIRE(ss == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});

    auto col = positions_for(Problem::coloring, WeightedGraph::make(3, {}));
    REQUIRE(col == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});

    // random graphs: counts match the closed forms for all three problems
    for (std::uint64_t seed : {4, 5, 6}) {
        WeightedGraph g = gen::gnp(6, 0.5, seed);
        const int k = 6, m = g.m();
        REQUIRE(static_cast<int>(positions_for(Problem::maxcut, g).size()) == k * (k - 1) / 2);
        REQUIRE(static_cast<int>(positions_for(Problem::stableset, g).size()) ==
                (k + 1) * k / 2 - m);
        REQUIRE(static_cast<int>(positions_for(Problem::coloring, g).size()) ==
                k * (k - 1) / 2 - m);
    }
}

TEST_CASE("extract reads entries") {
    WeightedGraph k2 = gen::complete(2);
    EscBlock mc = block_on(Problem::maxcut, k2, {0, 1});
    arma::mat flip = {{1.0, -1.0}, {-1.0, 1.0}};
    REQUIRE(extract(mc, flip)(0) == -1.0);

    EscBlock ss = block_on(Problem::stableset, k2, {0, 1});
    arma::vec diag = extract(ss, arma::eye(2, 2));
    REQUIRE(diag(0) == 1.0);
    REQUIRE(diag(1) == 1.0);
}

TEST_CASE("embed scaling") {
    WeightedGraph k2 = gen::complete(2);
    EscBlock mc = block_on(Problem::maxcut, k2, {0, 1});
    arma::mat e = embed(mc, arma::vec{4.0});
    REQUIRE(e(0, 0) == 0.0);
    REQUIRE(e(0, 1) == 2.0);
    REQUIRE(e(1, 0) == 2.0);

    EscBlock ss = block_on(Problem::stableset, k2, {0, 1});
    arma::mat d = embed(ss, arma::vec{3.0, 5.0});
    REQUIRE(arma::norm(d - arma::diagmat(arma::vec{3.0, 5.0}), "fro") == 0.0);
}

TEST_CASE("extract after embed halves off-diagonal coordinates") {
    // embed carries the 1/2 adjoint scaling on mirrored pairs, so the
    // composition is the identity on diagonal positions and 1/2 elsewhere;
    // the adjoint identity below is the property the algorithms rely on.
    Rng rng(21);
    for (Problem problem : {Problem::maxcut, Problem::stableset, Problem::coloring}) {
        WeightedGraph g = gen::gnp(5, 0.5, 31);
        EscBlock blk = block_on(problem, g, {0, 1, 2, 3, 4});
        for (int trial = 0; trial < 10; ++trial) {
            arma::vec y = random_vec(blk.b(), rng);
            arma::vec back = extract(blk, embed(blk, y));
            for (int e = 0; e < blk.b(); ++e) {
                const double scale = blk.positions[e].first == blk.positions[e].second ? 1.0 : 0.5;
                REQUIRE(back(e) == scale * y(e));
            }
        }
    }
}

TEST_CASE("adjoint identity over 1000 random trials") {
    Rng rng(77);
    WeightedGraph g = gen::gnp(6, 0.4, 13);
    for (Problem problem : {Problem::maxcut, Problem::stableset, Problem::coloring}) {
        EscBlock blk = block_on(problem, g, {0, 1, 2, 3, 4, 5});
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            arma::vec y = random_vec(blk.b(), rng);
            arma::mat s = random_sym(blk.k(), rng);
            worst = std::max(worst, std::abs(arma::dot(embed(blk, y), s) -
                                             arma::dot(y, extract(blk, s))));
        }
        REQUIRE(worst <= 1e-12);
    }
}

TEST_CASE("apply_D basics") {
    WeightedGraph k2 = gen::complete(2);
    EscBlock mc = block_on(Problem::maxcut, k2, {0, 1});
    REQUIRE(arma::norm(apply_D(mc, arma::vec{0.0}), 2) == 0.0);

    // atoms of order 2: J2 and its flip; <embed([2]), J2> = 2, flip gives -2
    arma::vec d = apply_D(mc, arma::vec{2.0});
    REQUIRE(d.n_elem == 2);
    for (int i = 0; i < 2; ++i) {
        const double expected = mc.atoms->atoms[i](0, 1) > 0 ? 2.0 : -2.0;
        REQUIRE(d(i) == expected);
    }
    REQUIRE(max_term(mc, arma::vec{2.0}).first == 2.0);
}

TEST_CASE("max term equals the simplex linear maximum") {
    Rng rng(5);
    WeightedGraph g = gen::gnp(5, 0.5, 55);
    EscBlock blk = block_on(Problem::stableset, g, {0, 1, 2, 3, 4});
    for (int trial = 0; trial < 50; ++trial) {
        arma::vec y = random_vec(blk.b(), rng);
        arma::vec d = apply_D(blk, y);
        auto [mx, idx] = max_term(blk, y);
        REQUIRE(mx == d.max());
        // any simplex point scores no better than the best vertex
        arma::vec lam(blk.t(), arma::fill::zeros);
        for (int i = 0; i < blk.t(); ++i) lam(i) = rng.uniform01();
        lam /= arma::accu(lam);
        REQUIRE(arma::dot(d, lam) <= mx + 1e-12);
    }
}

TEST_CASE("shifted cost") {
    WeightedGraph g = gen::gnp(6, 0.5, 3);
    arma::mat C = laplacian(g);

    BlockSet empty;
    arma::vec none;
    REQUIRE(arma::norm(shifted_cost(C, none, empty, 0) - C, "fro") == 0.0);

    // single block covering everything: C - embed(y)
    BlockSet full;
    full.add(block_on(Problem::maxcut, g, {0, 1, 2, 3, 4, 5}));
    Rng rng(8);
    arma::vec y = random_vec(full[0].b(), rng);
    REQUIRE(arma::norm(shifted_cost(C, y, full, 0) - (C - embed(full[0], y)), "fro") == 0.0);
}

TEST_CASE("overlapping blocks accumulate against a dense assembly oracle") {
    WeightedGraph g = gen::gnp(7, 0.5, 91);
    arma::mat C = laplacian(g);
    BlockSet blocks;
    blocks.add(block_on(Problem::maxcut, g, {0, 1, 2, 3}));
    blocks.add(block_on(Problem::maxcut, g, {2, 3, 4, 5}));
    blocks.add(block_on(Problem::maxcut, g, {0, 3, 5, 6}));
    Rng rng(14);
    arma::vec y = random_vec(static_cast<int>(blocks.total_b()), rng);

    // dense oracle: scatter each embed into ambient coordinates with loops
    arma::mat assembled(7, 7, arma::fill::zeros);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        arma::mat e = embed(blocks[i], blocks.segment(y, i));
        for (int p = 0; p < blocks[i].k(); ++p)
            for (int q = 0; q < blocks[i].k(); ++q)
                assembled(blocks[i].I.idx[p], blocks[i].I.idx[q]) += e(p, q);
    }
    REQUIRE(arma::norm(shifted_cost(C, y, blocks, 0) - (C - assembled), "fro") <= 1e-14);
}

TEST_CASE("projection embedding adjointness") {
    WeightedGraph g = gen::gnp(8, 0.5, 12);
    EscBlock blk = block_on(Problem::maxcut, g, {1, 3, 4, 6});
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        arma::mat M = random_sym(4, rng);
        arma::mat X = random_sym(8, rng);
        // <P'(M), X> as a dense scatter
        arma::mat scattered(8, 8, arma::fill::zeros);
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) scattered(blk.I.idx[p], blk.I.idx[q]) = M(p, q);
        arma::mat X_I(4, 4);
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) X_I(p, q) = X(blk.I.idx[p], blk.I.idx[q]);
        REQUIRE_THAT(arma::dot(scattered, X),
                     Catch::Matchers::WithinAbs(arma::dot(M, X_I), 1e-12));
    }
}

TEST_CASE("hull members satisfy the dualized equalities") {
    Rng rng(23);
    WeightedGraph g = gen::gnp(5, 0.5, 101);
    for (Problem problem : {Problem::maxcut, Problem::stableset, Problem::coloring}) {
        EscBlock blk = block_on(problem, g, {0, 1, 2, 3, 4});
        for (int trial = 0; trial < 20; ++trial) {
            arma::vec lam(blk.t());
            for (int i = 0; i < blk.t(); ++i) lam(i) = rng.uniform01();
            lam /= arma::accu(lam);
            arma::mat X_I(blk.k(), blk.k(), arma::fill::zeros);
            for (int i = 0; i < blk.t(); ++i) X_I += lam(i) * blk.atoms->atoms[i];
            // extract(sum lambda_i C_i - X_I) vanishes when X_I is the combination
            arma::vec lhs = blk.D.t() * lam - extract(blk, X_I);
            REQUIRE(arma::norm(lhs, "inf") <= 1e-12);
        }
    }
}

TEST_CASE("duplicate blocks are rejected") {
    WeightedGraph g = gen::gnp(5, 0.5, 2);
    BlockSet blocks;
    blocks.add(block_on(Problem::maxcut, g, {0, 1, 2}));
    REQUIRE_THROWS_AS(blocks.add(block_on(Problem::maxcut, g, {0, 1, 2})),
                      std::invalid_argument);
    REQUIRE(blocks.contains(VertexSubset::of({0, 1, 2}, 5)));
    REQUIRE(blocks.size() == 1);
}
