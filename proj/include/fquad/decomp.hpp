#pragma once
// Direct-sum decompositions of the represented functors as machine-checked
// certificates, endomorphism rings with their multiplication tables, and
// the survey tables exposed by the command-line tool.

#include "fquad/functors.hpp"
#include "fquad/nat.hpp"

#include <string>
#include <utility>
#include <vector>

namespace fquad::decomp {

using fn::FunctorPtr;
using fn::NatTransform;
using gf2::BitMat;
using gf2::BitVec;
using quad::QuadSpace;

struct Summand {
    std::string name;  // distinguishes repeated functors, e.g. "Mix01@A"
    FunctorPtr functor;
    NatTransform injection;  // functor -> target, components over the site
};

struct CertReport {
    bool ok = false;
    std::string detail;  // first failure (with the offending morphism), or a summary
    // Per site space: the summand dimensions in order, then the target's.
    std::vector<std::pair<std::string, std::vector<unsigned>>> dims;
    unsigned long long morphisms_checked = 0;
    std::vector<std::string> notes;
};

struct DecompCertificate {
    std::string target;  // name of the decomposed functor
    std::vector<QuadSpace> site;
    std::vector<Summand> summands;
    CertReport report;  // filled by verify_certificate
};

// Builds the certificate payload without running verification.
// Three-part splitting of the projective at the arf-eps plane along its
// rank filtration: rank-0 part, rank-1 layer, and top quotient, with the
// natural sections supplying the latter two injections.
DecompCertificate split_certificate(bool eps, const std::vector<QuadSpace>& site);
// Five-summand decomposition: the rank-0 part as a lifted plain projective,
// two (resp. three) mixed-pair summands inside the rank-1 layer, and the
// isometric-embedding functor on top.
DecompCertificate decomposition_certificate(bool eps, const std::vector<QuadSpace>& site);

// Full verification: naturality of every injection against every morphism
// between site spaces, joint invertibility of the stacked components at
// every space, the induced idempotent family (pairwise orthogonal,
// idempotent, summing to the identity), and the dimension audit.
CertReport verify_certificate(const DecompCertificate& cert);

// Convenience wrappers: build, verify, and return with the report filled;
// throw std::logic_error naming the offending morphism when verification
// fails.
DecompCertificate verify_split(bool eps, const std::vector<QuadSpace>& site);
DecompCertificate verify_ph0(const std::vector<QuadSpace>& site);
DecompCertificate verify_ph1(const std::vector<QuadSpace>& site);

struct EndRing {
    FunctorPtr functor;
    std::vector<NatTransform> basis;
    // table[i][j] = coordinates of basis[i] o basis[j] over the basis.
    std::vector<std::vector<BitVec>> table;
    std::string method;  // solver method used
    std::vector<std::string> notes;
    unsigned dim() const { return static_cast<unsigned>(basis.size()); }
};

// Endomorphism ring of f over the site; the identity is always expressible
// in the basis.  A note records the truncation dimension, and a warning is
// added when f is not generated at a single site space.
EndRing end_ring(const FunctorPtr& f, const std::vector<QuadSpace>& site);

// All ring elements e with e o e = e, as coordinate vectors over
// ring.basis; throws std::invalid_argument when dim > 20 (enumeration is
// 2^dim).
std::vector<BitVec> find_idempotents(const EndRing& ring);

struct TopQuotientReport {
    bool ok = false;
    std::string detail;
    // Per site space: (dim of the top quotient, number of embeddings).
    std::vector<std::pair<std::string, std::pair<unsigned, unsigned>>> dims;
    unsigned long long morphisms_checked = 0;
};

// Checks that the top quotient of the projective at v is the embedding
// functor: dimensions agree with embedding counts at every site space and
// the basis relabeling is natural over every site morphism.
TopQuotientReport verify_top_quotient(const QuadSpace& v, const std::vector<QuadSpace>& site);

struct SurveyRow {
    std::string name;
    unsigned dim_h0 = 0, dim_h1 = 0;
    bool delta0_zero = false, delta1_zero = false;  // vanishing over the site
};

// Dimensions at the two planes and difference-functor vanishing flags for
// the small catalogued functors (the constant functor plus the simple
// ones shipped with the tool).
std::vector<SurveyRow> simple_survey(const std::vector<QuadSpace>& site);

}  // namespace fquad::decomp
