#pragma once
// Computable functors: objects assigning to every quadratic space a labeled
// F2-vector space and to every morphism a matrix, with functoriality
// testable on finite sites.  Evaluation is cached per space; all shipped
// functors are immutable and safe to share across threads.

#include "fquad/gf2.hpp"
#include "fquad/quad.hpp"
#include "fquad/tq.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace fquad::fn {

using gf2::BitMat;
using gf2::BitVec;
using gf2::Subspace;
using quad::QuadSpace;
using tq::SpacePtr;
using tq::TqMorphism;

// Stable cache / component key of a space: depends only on the forms, not
// the display name.
std::string space_key(const QuadSpace& s);

struct FunctorValue {
    std::string space;                // display name of the space
    std::vector<std::string> labels;  // distinct, opaque, ordered
    unsigned dim() const { return static_cast<unsigned>(labels.size()); }
};

class ComputableFunctor {
public:
    virtual ~ComputableFunctor() = default;
    ComputableFunctor(const ComputableFunctor&) = delete;
    ComputableFunctor& operator=(const ComputableFunctor&) = delete;

    const std::string& name() const { return name_; }

    // Cached evaluation (each space computed exactly once, thread-safe).
    const FunctorValue& value(const QuadSpace& s) const;

    // Image of the j-th basis label of value(t.source()) under t, expressed
    // in the basis of value(t.target()).
    virtual BitVec act_column(const TqMorphism& t, unsigned j) const = 0;

    // Full action matrix, dim value(target) x dim value(source).
    virtual BitMat act(const TqMorphism& t) const;

protected:
    explicit ComputableFunctor(std::string name) : name_(std::move(name)) {}
    virtual FunctorValue compute_value(const QuadSpace& s) const = 0;

private:
    std::string name_;
    mutable std::mutex mu_;
    mutable std::map<std::string, FunctorValue> cache_;
};

using FunctorPtr = std::shared_ptr<const ComputableFunctor>;

// --- the represented functors and their filtration layers ---------------

// F2[Hom(v, -)]: basis at W is the canonically ordered hom-set; a morphism
// acts by post-composition, sending basis elements to basis elements.
FunctorPtr projective(QuadSpace v);

enum class LayerMode {
    sub,           // span of the morphisms of rank <= i (a subfunctor)
    layer,         // rank exactly i; composites that drop rank act as zero
    quotient_top,  // the layer at i = dim v (the top quotient)
};
FunctorPtr projective_layer(QuadSpace v, unsigned i, LayerMode mode);

// The single-letter sublayer of the rank-1 layer of the projective at the
// arf-eps plane: letter in {A,B,C} for eps=0, {E,F,G} for eps=1.
FunctorPtr type_layer(bool eps, char letter);

// --- functors lifted from plain vector spaces ----------------------------

// A functor of plain F2-vector spaces: everything derives from the labels
// per dimension and the matrix action.
class PlainFunctor {
public:
    virtual ~PlainFunctor() = default;
    const std::string& name() const { return name_; }
    virtual std::vector<std::string> labels(unsigned n) const = 0;
    // Action of a linear map a (shape m x n) from the label basis at n to
    // the label basis at m.
    virtual BitMat act(const BitMat& a) const = 0;
    // Single column of act(a); overridden where the full matrix is large.
    virtual BitVec act_column(const BitMat& a, unsigned j) const;

protected:
    explicit PlainFunctor(std::string name) : name_(std::move(name)) {}

private:
    std::string name_;
};
using PlainPtr = std::shared_ptr<const PlainFunctor>;

PlainPtr lambda_power(unsigned k);  // exterior power, k in {1, 2}
PlainPtr plain_projective();        // F2[Hom_vect(F2^2, -)]

// Precomposition with the linear-part functor: value at V is f(V's
// underlying vector space); a morphism acts through its linear part alone.
FunctorPtr iota_lift(PlainPtr f);

// --- the mixed and isotropic functors ------------------------------------

// Basis at V: ordered pairs (v1, v2) with q(v1+v2) = alpha, B(v1,v2) = 1;
// action [(v1,v2)] -> [(A v1, A v2)] when v1+v2 is conserved, else 0.
FunctorPtr mix(bool alpha);

// Basis at W: isometric embeddings of v; action [f] -> [A o f] when f's
// image is conserved, else 0.  Requires v nondegenerate.
FunctorPtr iso_nondeg(QuadSpace v);

// Basis at W: nonzero vectors of q-value alpha; action [w] -> [A w] when w
// is conserved, else 0.
FunctorPtr iso_point(bool alpha);

// --- combinators ----------------------------------------------------------

FunctorPtr constant();
FunctorPtr tensor(FunctorPtr f, FunctorPtr g);
FunctorPtr direct_sum(FunctorPtr f, FunctorPtr g);

// The difference functor: value at V is the kernel of f's action under the
// projection morphism V perp H_eps -> V (conserving V); a morphism t acts
// as the restriction of f.act(t perp id).
FunctorPtr delta(bool eps, FunctorPtr f);

// --- induced functors from a point with an automorphism module -----------

// kappa_tilde(v, m): basis at W = (embedding orbits under right O(v)) x
// basis(m); the action moves orbit representatives and twists by the unique
// deck transformation.  With the trivial module this counts embedding
// orbits; "natural" is the 2-dimensional module of the arf-1 plane's
// automorphism group acting as itself.
enum class KtModule { trivial, natural };
FunctorPtr kappa_tilde(QuadSpace v, KtModule m);

// --- registry -------------------------------------------------------------

// Parses functor names: "const", "Mix01", "Mix11", "P:<space>",
// "P:<space>:sub<i>" / ":layer<i>" / ":top", "iso:<space>" (including
// "iso:x0"/"iso:x1"), "iota:Lambda1" / "iota:Lambda2" / "iota:PF2",
// "ktilde:<space>:triv" / ":nat", "Delta0(F)" / "Delta1(F)",
// "tensor(F,G)", "sum(F,G)".  Throws std::invalid_argument on unknowns.
FunctorPtr parse_functor(const std::string& name);

// The functors shipped with the command-line tool, in registry order.
std::vector<FunctorPtr> shipped_functors();

}  // namespace fquad::fn
