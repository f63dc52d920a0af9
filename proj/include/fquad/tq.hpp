#pragma once
// The morphism calculus between nondegenerate quadratic spaces: every
// morphism V -> W is stored in the normal form (A, K) where
//   * A is the underlying linear map V -> W, and
//   * K is a subspace of V (the "conserved" subspace) contained in the
//     radical of the defect form of A, on which A is injective.
// rank = dim K.  Composition is
//   (A2, K2) after (A1, K1)  =  (A2 A1, K1 /\ A1^{-1}(K2)),
// and the identity is (Id, V).  Rank-0 morphisms (f, 0) exist for every
// linear map f; full-rank ones are exactly the isometric embeddings.

#include "fquad/gf2.hpp"
#include "fquad/quad.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fquad::tq {

using gf2::BitMat;
using gf2::BitVec;
using gf2::Subspace;
using quad::Isometry;
using quad::QuadSpace;

using SpacePtr = std::shared_ptr<const QuadSpace>;
inline SpacePtr share(QuadSpace s) { return std::make_shared<const QuadSpace>(std::move(s)); }

// The defect of a linear map A: V -> W measures its failure to be an
// isometry:  delta(v) = q_V(v) + q_W(A v), with polar form
// deltaB(v, w) = B_V(v, w) + B_W(A v, A w).  It is itself a (usually
// degenerate) quadratic form on V's coordinate space.
struct DefectForm {
    QuadSpace form;  // q_basis = delta on basis vectors, bform = deltaB

    // {v : deltaB(v, .) = 0 and delta(v) = 0}; delta is linear there.
    Subspace radical() const;
};

DefectForm defect(const BitMat& a, const QuadSpace& v, const QuadSpace& w);

class TqMorphism {
public:
    const QuadSpace& source() const { return *src_; }
    const QuadSpace& target() const { return *tgt_; }
    const SpacePtr& source_ptr() const { return src_; }
    const SpacePtr& target_ptr() const { return tgt_; }
    const BitMat& a() const { return a_; }
    const Subspace& k() const { return k_; }
    // Reduction matrix of K, cached for fast composition.
    const BitMat& k_reduction() const { return kred_; }
    unsigned rank() const { return k_.dim(); }

    bool operator==(const TqMorphism& o) const {
        return *src_ == *o.src_ && *tgt_ == *o.tgt_ && a_ == o.a_ && k_ == o.k_;
    }
    // (rank, packed A, packed K) — the canonical order within a hom-set.
    std::strong_ordering operator<=>(const TqMorphism& o) const;

    std::string to_string() const;

private:
    friend TqMorphism make_morphism(BitMat, Subspace, const SpacePtr&, const SpacePtr&);
    friend TqMorphism compose(const TqMorphism&, const TqMorphism&);
    friend TqMorphism orth_sum_morphism(const TqMorphism&, const TqMorphism&);
    friend void enumerate_hom(const SpacePtr&, const SpacePtr&,
                              const std::function<void(const TqMorphism&)>&,
                              std::optional<unsigned>);
    TqMorphism(SpacePtr src, SpacePtr tgt, BitMat a, Subspace k);

    SpacePtr src_, tgt_;
    BitMat a_;
    Subspace k_;
    BitMat kred_;
};

// Validated construction.  Throws std::invalid_argument when a space is
// degenerate, shapes mismatch, K is not contained in the defect radical
// (the morphism would be unrealizable), or A is not injective on K.
TqMorphism make_morphism(BitMat a, Subspace k, const SpacePtr& src, const SpacePtr& tgt);
inline TqMorphism make_morphism(BitMat a, Subspace k, QuadSpace src, QuadSpace tgt) {
    return make_morphism(std::move(a), std::move(k), share(std::move(src)), share(std::move(tgt)));
}

// Rank-0 morphism (f, 0): defined for every linear map f.
TqMorphism t_of(BitMat f, const SpacePtr& src, const SpacePtr& tgt);
inline TqMorphism t_of(BitMat f, QuadSpace src, QuadSpace tgt) {
    return t_of(std::move(f), share(std::move(src)), share(std::move(tgt)));
}

// Full-rank morphism (f, source) attached to an isometric embedding.
TqMorphism embedding_morphism(const Isometry& f);

// (Id, V) and the rank-0 idempotent (Id, 0).
TqMorphism identity(const SpacePtr& v);
inline TqMorphism identity(QuadSpace v) { return identity(share(std::move(v))); }
TqMorphism e_of(const SpacePtr& v);
inline TqMorphism e_of(QuadSpace v) { return e_of(share(std::move(v))); }

// t2 after t1; throws std::invalid_argument when t1's target and t2's
// source differ.  The result is always a valid morphism.
TqMorphism compose(const TqMorphism& t2, const TqMorphism& t1);

inline unsigned rank(const TqMorphism& t) { return t.rank(); }

// Block-diagonal sum acting on the orthogonal sums of sources and targets.
TqMorphism orth_sum_morphism(const TqMorphism& t1, const TqMorphism& t2);

// Streams every morphism v -> w exactly once, sorted by
// (rank, packed A, packed K); optionally only ranks <= max_rank.
void enumerate_hom(const SpacePtr& v, const SpacePtr& w,
                   const std::function<void(const TqMorphism&)>& fn,
                   std::optional<unsigned> max_rank = std::nullopt);
std::vector<TqMorphism> all_hom(const SpacePtr& v, const SpacePtr& w,
                                std::optional<unsigned> max_rank = std::nullopt);
inline std::vector<TqMorphism> all_hom(QuadSpace v, QuadSpace w,
                                       std::optional<unsigned> max_rank = std::nullopt) {
    return all_hom(share(std::move(v)), share(std::move(w)), max_rank);
}

// Classification of a rank-1 morphism out of a hyperbolic plane by its
// conserved line: span(a) -> A resp. E, span(b) -> B resp. F,
// span(a+b) -> C resp. G (letters A,B,C for the arf-0 plane, E,F,G for
// arf-1).  (v, w) are the images of the plane's basis vectors.
struct GeneratorClass {
    char label;
    BitVec v, w;
};
GeneratorClass classify_generator(const TqMorphism& t);

// Reduces a raw cospan  V -f-> X <-g- W  (both legs isometric embeddings
// into the same space, W nondegenerate) to normal form:
//   A = g^{-1} o (orthogonal projection onto g(W)) o f,   K = f^{-1}(g(W)).
TqMorphism from_diagram(const Isometry& f, const Isometry& g);

}  // namespace fquad::tq
