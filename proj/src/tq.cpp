#include "fquad/tq.hpp"

#include <algorithm>
#include <stdexcept>

namespace fquad::tq {

Subspace DefectForm::radical() const {
    // Kernel of deltaB first; delta is linear there, so one more kernel.
    Subspace kb = gf2::kernel(form.bform());
    BitMat vals(1, kb.dim());
    for (unsigned i = 0; i < kb.dim(); ++i)
        if (form.q(kb.basis().row(i))) vals.set(0, i, true);
    Subspace coeff = gf2::kernel(vals);
    std::vector<BitVec> gens;
    BitMat bt = kb.basis().transpose();
    for (unsigned i = 0; i < coeff.dim(); ++i) gens.push_back(bt.apply(coeff.basis().row(i)));
    return Subspace::span(form.dim(), gens);
}

DefectForm defect(const BitMat& a, const QuadSpace& v, const QuadSpace& w) {
    if (a.cols() != v.dim() || a.rows() != w.dim())
        throw std::invalid_argument("defect: shape mismatch");
    unsigned n = v.dim();
    BitVec dq(n);
    for (unsigned i = 0; i < n; ++i) {
        BitVec ei = BitVec::unit(n, i);
        dq.set(i, v.q(ei) ^ w.q(a.apply(ei)));
    }
    BitMat db(n, n);
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = i + 1; j < n; ++j) {
            BitVec ei = BitVec::unit(n, i), ej = BitVec::unit(n, j);
            bool val = v.b(ei, ej) ^ w.b(a.apply(ei), a.apply(ej));
            db.set(i, j, val);
            db.set(j, i, val);
        }
    return DefectForm{QuadSpace(dq, db)};
}

TqMorphism::TqMorphism(SpacePtr src, SpacePtr tgt, BitMat a, Subspace k)
    : src_(std::move(src)), tgt_(std::move(tgt)), a_(std::move(a)), k_(std::move(k)),
      kred_(k_.reduction_matrix()) {}

std::strong_ordering TqMorphism::operator<=>(const TqMorphism& o) const {
    if (auto c = rank() <=> o.rank(); c != 0) return c;
    if (auto c = a_.packed_key() <=> o.a_.packed_key(); c != 0) return c;
    return k_.basis().packed_key() <=> o.k_.basis().packed_key();
}

std::string TqMorphism::to_string() const {
    std::string s = "(A=" + a_.to_string() + ", K=";
    s += k_.dim() == 0 ? "0" : k_.basis().to_string();
    return s + ")";
}

TqMorphism make_morphism(BitMat a, Subspace k, const SpacePtr& src, const SpacePtr& tgt) {
    if (!quad::is_nondegenerate(*src) || !quad::is_nondegenerate(*tgt))
        throw std::invalid_argument("morphism: source and target must be nondegenerate");
    if (a.cols() != src->dim() || a.rows() != tgt->dim())
        throw std::invalid_argument("morphism: A must be target_dim x source_dim");
    if (k.ambient_dim() != src->dim())
        throw std::invalid_argument("morphism: K must live in the source");
    Subspace rad = defect(a, *src, *tgt).radical();
    for (unsigned i = 0; i < k.dim(); ++i)
        if (!rad.contains(k.basis().row(i)))
            throw std::invalid_argument("morphism: K exceeds the defect radical (unrealizable)");
    if (gf2::image(a, k).dim() != k.dim())
        throw std::invalid_argument("morphism: A must be injective on K");
    return TqMorphism(src, tgt, std::move(a), std::move(k));
}

TqMorphism t_of(BitMat f, const SpacePtr& src, const SpacePtr& tgt) {
    return make_morphism(std::move(f), Subspace::zero(src->dim()), src, tgt);
}

TqMorphism embedding_morphism(const Isometry& f) {
    if (!quad::is_isometry_matrix(f.source, f.target, f.map))
        throw std::invalid_argument("embedding_morphism: map is not an isometric embedding");
    return make_morphism(f.map, Subspace::full(f.source.dim()), share(f.source), share(f.target));
}

TqMorphism identity(const SpacePtr& v) {
    return make_morphism(BitMat::identity(v->dim()), Subspace::full(v->dim()), v, v);
}

TqMorphism e_of(const SpacePtr& v) {
    return make_morphism(BitMat::identity(v->dim()), Subspace::zero(v->dim()), v, v);
}

TqMorphism compose(const TqMorphism& t2, const TqMorphism& t1) {
    if (!(t1.target() == t2.source()))
        throw std::invalid_argument("compose: middle spaces differ");
    BitMat a = t2.a().mul(t1.a());
    // K = K1 /\ A1^{-1}(K2): v qualifies iff K1 reduces it to zero and
    // K2 reduces A1 v to zero; stack both conditions and take the kernel.
    unsigned n = t1.source().dim();
    BitMat pre = t2.k_reduction().mul(t1.a());
    std::vector<BitVec> rows;
    rows.reserve(n + pre.rows());
    for (unsigned i = 0; i < n; ++i) rows.push_back(t1.k_reduction().row(i));
    for (unsigned i = 0; i < pre.rows(); ++i) rows.push_back(pre.row(i));
    Subspace k = gf2::kernel(BitMat::from_rows(n, rows));
    return TqMorphism(t1.src_, t2.tgt_, std::move(a), std::move(k));
}

TqMorphism orth_sum_morphism(const TqMorphism& t1, const TqMorphism& t2) {
    QuadSpace src = quad::orthogonal_sum(t1.source(), t2.source());
    QuadSpace tgt = quad::orthogonal_sum(t1.target(), t2.target());
    BitMat a = t1.a().direct_sum(t2.a());
    unsigned n1 = t1.source().dim(), n = src.dim();
    std::vector<BitVec> gens;
    BitVec pad2(t2.source().dim()), pad1(n1);
    for (unsigned i = 0; i < t1.k().dim(); ++i) gens.push_back(t1.k().basis().row(i).concat(pad2));
    for (unsigned i = 0; i < t2.k().dim(); ++i) gens.push_back(pad1.concat(t2.k().basis().row(i)));
    return TqMorphism(share(std::move(src)), share(std::move(tgt)), std::move(a),
                      Subspace::span(n, gens));
}

void enumerate_hom(const SpacePtr& v, const SpacePtr& w,
                   const std::function<void(const TqMorphism&)>& fn,
                   std::optional<unsigned> max_rank) {
    if (!quad::is_nondegenerate(*v) || !quad::is_nondegenerate(*w))
        throw std::invalid_argument("enumerate_hom: spaces must be nondegenerate");
    unsigned top = std::min<unsigned>(v->dim(), max_rank.value_or(v->dim()));
    for (unsigned r = 0; r <= top; ++r) {
        gf2::enumerate_linear_maps(v->dim(), w->dim(), [&](const BitMat& a) {
            if (r == 0) {
                fn(TqMorphism(v, w, a, Subspace::zero(v->dim())));
                return;
            }
            Subspace rad = defect(a, *v, *w).radical();
            if (rad.dim() < r) return;
            std::vector<Subspace> ks;
            for (const Subspace& k : gf2::subspaces_of(rad, r))
                if (gf2::image(a, k).dim() == r) ks.push_back(k);
            std::sort(ks.begin(), ks.end(), [](const Subspace& x, const Subspace& y) {
                return x.basis().packed_key() < y.basis().packed_key();
            });
            for (Subspace& k : ks) fn(TqMorphism(v, w, a, std::move(k)));
        });
    }
}

std::vector<TqMorphism> all_hom(const SpacePtr& v, const SpacePtr& w,
                                std::optional<unsigned> max_rank) {
    std::vector<TqMorphism> out;
    enumerate_hom(v, w, [&](const TqMorphism& t) { out.push_back(t); }, max_rank);
    return out;
}

GeneratorClass classify_generator(const TqMorphism& t) {
    if (t.rank() != 1 || t.source().dim() != 2 || !quad::is_nondegenerate(t.source()))
        throw std::invalid_argument("classify_generator: need a rank-1 morphism out of a plane");
    bool arf1 = quad::arf(t.source());
    BitVec gen = t.k().basis().row(0);
    char label;
    if (gen == BitVec::from_string("10")) label = arf1 ? 'E' : 'A';
    else if (gen == BitVec::from_string("01")) label = arf1 ? 'F' : 'B';
    else label = arf1 ? 'G' : 'C';
    return GeneratorClass{label, t.a().col(0), t.a().col(1)};
}

TqMorphism from_diagram(const Isometry& f, const Isometry& g) {
    if (!(f.target == g.target))
        throw std::invalid_argument("from_diagram: legs must land in the same space");
    if (!quad::is_isometry_matrix(f.source, f.target, f.map) ||
        !quad::is_isometry_matrix(g.source, g.target, g.map))
        throw std::invalid_argument("from_diagram: legs must be isometric embeddings");
    const QuadSpace& x = f.target;
    unsigned m = g.source.dim();

    // Gram matrix of g(W)'s basis; invertible because W is nondegenerate.
    BitMat gram(m, m);
    for (unsigned i = 0; i < m; ++i)
        for (unsigned j = 0; j < m; ++j)
            gram.set(i, j, x.b(g.map.col(i), g.map.col(j)));

    // Column j of A: W-coordinates of the orthogonal projection of f(e_j)
    // onto g(W), read off by solving the Gram system.
    std::vector<BitVec> cols;
    for (unsigned j = 0; j < f.source.dim(); ++j) {
        BitVec fx = f.map.col(j);
        BitVec rhs(m);
        for (unsigned i = 0; i < m; ++i) rhs.set(i, x.b(fx, g.map.col(i)));
        auto c = gf2::solve(gram, rhs);
        if (!c) throw std::logic_error("from_diagram: degenerate Gram system");
        cols.push_back(*c);
    }
    BitMat a = BitMat::from_cols(m, cols);

    Subspace gw = gf2::image(g.map, Subspace::full(m));
    Subspace k = gf2::preimage(f.map, gw);
    return make_morphism(std::move(a), std::move(k), share(f.source), share(g.source));
}

}  // namespace fquad::tq
