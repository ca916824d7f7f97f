// Operator algebra for exact subgraph constraints.
//
// For a subgraph on vertex set I the constraint "X_I is a convex combination
// of the atoms C^I_i" contributes b_I scalar equalities, one per matrix
// position that the ambient spectrahedron does not already force. The maps
// here move data between those b_I coordinates, the k_I x k_I symmetric
// matrices, and the t_I atom coordinates:
//
//   extract : Sym_k -> R^b     entry reading at the listed positions
//   embed   : R^b   -> Sym_k   adjoint of extract (half weights off-diagonal)
//   apply_D : R^b   -> R^t     [D(y)]_i = <embed(y), C_i>
//
// shifted_cost assembles C - sum_I P_I^T embed(y_I), the cost matrix of the
// dual function evaluation.
#pragma once

#include <armadillo>
#include <memory>
#include <set>
#include <vector>

#include "escbundle/atlas.hpp"
#include "escbundle/common.hpp"
#include "escbundle/graph.hpp"

namespace escbundle {

// Matrix positions carrying an equality constraint, in lexicographic order.
// Max-Cut: all off-diagonal pairs (the diagonal is 1 on both sides).
// Stable set: diagonal plus off-diagonal non-edges (edges are forced 0).
// Coloring: off-diagonal non-edges (diagonal forced 1, edges forced 0).
inline std::vector<std::pair<int, int>> positions_for(Problem problem, const WeightedGraph& g_I) {
    const int k = g_I.n();
    if (k < 2) throw SolverError("positions_for requires order >= 2");
    std::vector<std::pair<int, int>> pos;
    for (int p = 0; p < k; ++p) {
        if (problem == Problem::stableset) pos.emplace_back(p, p);
        for (int q = p + 1; q < k; ++q) {
            if (problem != Problem::maxcut && g_I.has_edge(p, q)) continue;
            pos.emplace_back(p, q);
        }
    }
    return pos;
}

// One exact subgraph constraint. Immutable after construction; the atom set
// is shared with the atlas cache where possible.
struct EscBlock {
    Problem problem;
    VertexSubset I;                            // ambient vertices, 0-based
    WeightedGraph subgraph;                    // induced, relabelled 0..k-1
    std::shared_ptr<const AtomSet> atoms;      // t_I atoms in I's labelling
    std::vector<std::pair<int, int>> positions;  // b_I pairs (p <= q)
    arma::mat D;  // t x b, row i = extract(C_i); apply_D(y) = D*y

    int k() const { return I.k(); }
    int b() const { return static_cast<int>(positions.size()); }
    int t() const { return atoms->t(); }
};

inline EscBlock make_block(Problem problem, const WeightedGraph& g, const VertexSubset& I) {
    EscBlock blk;
    blk.problem = problem;
    blk.I = I;
    blk.subgraph = induced_subgraph(g, I);
    blk.atoms = atoms_for(problem, blk.subgraph);
    blk.positions = positions_for(problem, blk.subgraph);

    const int kI = blk.k(), mI = blk.subgraph.m();
    int expected = 0;
    switch (problem) {
        case Problem::maxcut:    expected = kI * (kI - 1) / 2; break;
        case Problem::stableset: expected = (kI + 1) * kI / 2 - mI; break;
        case Problem::coloring:  expected = kI * (kI - 1) / 2 - mI; break;
    }
    if (blk.b() != expected) throw SolverError("b_I mismatch in block construction");

    blk.D.set_size(blk.t(), blk.b());
    for (int i = 0; i < blk.t(); ++i)
        for (int e = 0; e < blk.b(); ++e)
            blk.D(i, e) = blk.atoms->atoms[i](blk.positions[e].first, blk.positions[e].second);
    return blk;
}

// M_I^T: read the listed entries of a symmetric matrix into R^{b_I}.
inline arma::vec extract(const EscBlock& blk, const arma::mat& s) {
    arma::vec out(blk.b());
    for (int e = 0; e < blk.b(); ++e) out(e) = s(blk.positions[e].first, blk.positions[e].second);
    return out;
}

// M_I: adjoint of extract. Off-diagonal coordinates split in half across the
// two mirrored entries so that <embed(y), S> = <y, extract(S)> exactly.
inline arma::mat embed(const EscBlock& blk, const arma::vec& y_I) {
    arma::mat out(blk.k(), blk.k(), arma::fill::zeros);
    for (int e = 0; e < blk.b(); ++e) {
        auto [p, q] = blk.positions[e];
        if (p == q) {
            out(p, p) = y_I(e);
        } else {
            out(p, q) = out(q, p) = 0.5 * y_I(e);
        }
    }
    return out;
}

inline arma::vec apply_D(const EscBlock& blk, const arma::vec& y_I) { return blk.D * y_I; }

// max_i [D(y)]_i and the first atom index attaining it.
inline std::pair<double, arma::uword> max_term(const EscBlock& blk, const arma::vec& y_I) {
    arma::vec d = apply_D(blk, y_I);
    arma::uword idx = d.index_max();
    return {d(idx), idx};
}

// Registered blocks with their multiplier layout. Duplicate vertex sets are
// rejected: they would only add redundant multipliers.
class BlockSet {
  public:
    void add(EscBlock blk) {
        if (!seen_.insert(blk.I).second)
            throw std::invalid_argument("duplicate ESC vertex set registered");
        offsets_.push_back(total_b_);
        total_b_ += blk.b();
        total_t_ += blk.t();
        blocks_.push_back(std::move(blk));
    }

    bool contains(const VertexSubset& I) const { return seen_.count(I) > 0; }

    std::size_t size() const { return blocks_.size(); }
    bool empty() const { return blocks_.empty(); }
    arma::uword total_b() const { return total_b_; }
    arma::uword total_t() const { return total_t_; }
    const EscBlock& operator[](std::size_t i) const { return blocks_[i]; }
    const std::vector<EscBlock>& blocks() const { return blocks_; }
    arma::uword offset(std::size_t i) const { return offsets_[i]; }

    arma::subview_col<double> segment(arma::vec& y, std::size_t i) const {
        return y.subvec(offsets_[i], offsets_[i] + blocks_[i].b() - 1);
    }
    arma::vec segment(const arma::vec& y, std::size_t i) const {
        return y.subvec(offsets_[i], offsets_[i] + blocks_[i].b() - 1);
    }

  private:
    std::vector<EscBlock> blocks_;
    std::vector<arma::uword> offsets_;
    std::set<VertexSubset> seen_;
    arma::uword total_b_ = 0;
    arma::uword total_t_ = 0;
};

// Multiplier vector for a block set, segment I at blocks.offset(i).
struct DualPoint {
    arma::vec y;

    static DualPoint zeros(const BlockSet& blocks) {
        return DualPoint{arma::vec(blocks.total_b(), arma::fill::zeros)};
    }
};

// C - sum_I P_I^T M_I(y_I). The projection adjoint P_I^T scatters a k x k
// matrix into the ambient rows/columns I (shifted by ambient_offset when the
// SDP variable is bordered); overlapping blocks accumulate additively.
inline arma::mat shifted_cost(const arma::mat& C, const arma::vec& y, const BlockSet& blocks,
                              int ambient_offset) {
    arma::mat out = C;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const EscBlock& blk = blocks[i];
        const arma::uword off = blocks.offset(i);
        for (int e = 0; e < blk.b(); ++e) {
            auto [p, q] = blk.positions[e];
            const int a = blk.I.idx[p] + ambient_offset;
            const int b = blk.I.idx[q] + ambient_offset;
            const double v = y(off + e);
            if (a == b) {
                out(a, a) -= v;
            } else {
                out(a, b) -= 0.5 * v;
                out(b, a) -= 0.5 * v;
            }
        }
    }
    return out;
}

}  // namespace escbundle
