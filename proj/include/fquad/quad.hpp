#pragma once
// Quadratic spaces over F2 (possibly degenerate), their invariants, isometric
// embeddings, and constructive extension of partial isometries.
//
// A space stores the quadratic form as (q on basis vectors, polar bilinear
// form B); an arbitrary value is recovered through
//   q(x) = sum_i x_i q_i + sum_{i<j} x_i x_j B_ij,
// which is the unique quadratic extension satisfying the polar identity
// q(x+y) = q(x) + q(y) + B(x,y).

#include "fquad/gf2.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fquad::quad {

using gf2::BitMat;
using gf2::BitVec;
using gf2::Subspace;

class QuadSpace {
public:
    // Dimension-0 space (empty basis).
    QuadSpace() : q_basis_(0), bform_(0, 0), name_("0") {}
    // Validates: square B of matching size, symmetric, zero diagonal.
    QuadSpace(BitVec q_basis, BitMat bform, std::string name = "");

    // The hyperbolic planes: q(a)=q(b)=0 resp. q(a)=q(b)=1, B(a,b)=1.
    static QuadSpace H0();
    static QuadSpace H1();
    // The degenerate lines (x, 0) and (x, 1): one basis vector, B = 0.
    static QuadSpace line0();
    static QuadSpace line1();
    // Space-spec grammar: "0" | part ("+" part)* with part in
    // {H0, H1, x0, x1}; "+" is orthogonal sum.
    static QuadSpace parse(const std::string& spec);

    unsigned dim() const { return q_basis_.len(); }
    const BitVec& q_basis() const { return q_basis_; }
    const BitMat& bform() const { return bform_; }
    const std::string& name() const { return name_; }

    bool q(const BitVec& v) const;
    bool b(const BitVec& v, const BitVec& w) const;

    // Equality of the forms; the name is a display label and not compared.
    bool operator==(const QuadSpace& o) const {
        return q_basis_ == o.q_basis_ && bform_ == o.bform_;
    }

private:
    BitVec q_basis_;
    BitMat bform_;
    std::string name_;
};

// Kernel of the polar form B.
Subspace radical(const QuadSpace& s);
inline bool is_nondegenerate(const QuadSpace& s) { return radical(s).dim() == 0; }

// Block-diagonal B, concatenated q values.  Summing with a dimension-0
// space returns the other operand unchanged (exact unit law).
QuadSpace orthogonal_sum(const QuadSpace& s1, const QuadSpace& s2);

// Pairs (a_i, b_i) with B(a_i,b_j) = delta_ij and all other values 0.
// Requires a nondegenerate space; throws std::invalid_argument otherwise.
std::vector<std::pair<BitVec, BitVec>> symplectic_basis(const QuadSpace& s);

// Arf invariant sum_i q(a_i) q(b_i) over a symplectic basis (basis-independent).
// Requires a nondegenerate space.
bool arf(const QuadSpace& s);

// An injective linear map preserving q (hence B, by the polar identity).
struct Isometry {
    QuadSpace source;
    QuadSpace target;
    BitMat map;  // target.dim x source.dim
};

// Whether m is injective and q-preserving from src to tgt.
bool is_isometry_matrix(const QuadSpace& src, const QuadSpace& tgt, const BitMat& m);

// Streams every isometric embedding d -> w exactly once, ordered by the
// tuple of basis-vector images (image of e_0 varies slowest).  Backtracking
// with q/B pruning, so large ambient dimensions stay cheap.
void isometric_embeddings(const QuadSpace& d, const QuadSpace& w,
                          const std::function<void(const Isometry&)>& fn);
std::vector<Isometry> all_isometric_embeddings(const QuadSpace& d, const QuadSpace& w);

// Some isometric bijection s1 -> s2 if one exists.
std::optional<Isometry> is_isometric(const QuadSpace& s1, const QuadSpace& s2);

// Extends a partial isometry to the whole space: given subspaces d, d2 of a
// nondegenerate ambient space and f_bar whose column j is the image of the
// j-th rref basis row of d (an isometry of the restricted forms, validated —
// std::invalid_argument otherwise), returns an isometry of ambient whose
// matrix agrees with f_bar on d.  Extension always exists; exhaustion of the
// backtracking search is a hard internal error (std::logic_error).
Isometry witt_extend(const QuadSpace& ambient, const Subspace& d, const Subspace& d2,
                     const BitMat& f_bar);

}  // namespace fquad::quad
