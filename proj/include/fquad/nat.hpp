#pragma once
// Natural transformations between computable functors over a finite site of
// spaces, and constructive solvers for the full space Hom(F, G).
//
// The primary solver exploits that every functor we ship is generated at a
// single small space V0: a natural transformation is determined by its
// component there, and naturality over the whole site reduces to linear
// constraints on that one matrix.  A dense solver over all components at
// once is kept as an independent cross-check for small instances.

#include "fquad/functors.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fquad::fn {

// Representatives of the isometry classes up to max_dim (even, >= 2):
// dimension 0, then one space per (dimension, arf) class.
std::vector<QuadSpace> default_site(unsigned max_dim = 4);

struct NatTransform {
    FunctorPtr from, to;
    // Component matrices keyed by space_key; shape dim to(V) x dim from(V).
    std::map<std::string, BitMat> comp;

    const BitMat& at(const QuadSpace& s) const;
    bool has(const QuadSpace& s) const { return comp.count(space_key(s)) != 0; }
};

// b after a (composes componentwise; a.to and b.from must agree).
NatTransform nat_compose(const NatTransform& b, const NatTransform& a);
// Componentwise inverse; throws std::invalid_argument on a singular component.
NatTransform nat_invert(const NatTransform& n);

// Checks to(T) . comp_V == comp_W . from(T) for every morphism T between
// site spaces.  Returns a description of the first failure, or nullopt.
std::optional<std::string> verify_natural(const NatTransform& nt,
                                          const std::vector<QuadSpace>& site);

struct HomSolveResult {
    std::vector<NatTransform> basis;  // a basis of Hom(from, to) over the site
    std::string method;               // "generated@<space>", "stacked", or "zero"
    std::vector<std::string> notes;
};

// Basis of all natural transformations f -> g over the site.  Prefers the
// generator-determined solver; falls back to the dense one (with a note)
// when f is not generated at any single site space.
HomSolveResult hom_space(const FunctorPtr& f, const FunctorPtr& g,
                         const std::vector<QuadSpace>& site);

// Independent dense solver over stacked naturality constraints; intended
// for small cross-checks (throws std::invalid_argument when too large).
HomSolveResult hom_space_stacked(const FunctorPtr& f, const FunctorPtr& g,
                                 const std::vector<QuadSpace>& site);

// The transformation P_v -> f sending a basis morphism [g] to f(g)(x).
NatTransform yoneda(const FunctorPtr& f, const QuadSpace& v, const BitVec& x,
                    const std::vector<QuadSpace>& site);

// Natural section of the top quotient of the projective at the arf-eps
// plane: a full-rank basis morphism goes to itself plus its three rank-1
// companions (same linear part, each conserved line).
NatTransform section_s(bool eps, const std::vector<QuadSpace>& site);

// Natural section of the rank-1 layer: a rank-1 basis morphism goes to
// itself plus the rank-0 morphism with the same linear part.
NatTransform layer_section(bool eps, const std::vector<QuadSpace>& site);

// The isomorphism from a single-letter rank-1 layer onto a mixed functor:
//   1: A -> Mix01 via (v,w) |-> (w, v+w)     4: E -> Mix11 via (w, v+w)
//   2: B -> Mix01 via (v,w) |-> (v, v+w)     5: F -> Mix11 via (v, v+w)
//   3: C -> Mix11 via (v,w) |-> (v, w)       6: G -> Mix11 via (v, w)
NatTransform sigma_iso(unsigned which, const std::vector<QuadSpace>& site);

}  // namespace fquad::fn
