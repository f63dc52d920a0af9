#include "fquad/functors.hpp"

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace fquad::fn {

using tq::all_hom;
using tq::share;

namespace {

// Canonical packing of a hom-set element for index lookup.  Covers every
// shape this library evaluates (sources of dimension <= 4, ambients <= 8).
std::uint64_t morph_key(const TqMorphism& t) {
    const BitMat& a = t.a();
    const BitMat& kb = t.k().basis();
    assert(a.rows() * a.cols() <= 36 && kb.rows() * kb.cols() <= 24);
    return (static_cast<std::uint64_t>(t.rank()) << 60) | (a.packed_key() << 24) |
           kb.packed_key();
}

const QuadSpace& plane(bool eps) {
    static const QuadSpace h0 = QuadSpace::H0();
    static const QuadSpace h1 = QuadSpace::H1();
    return eps ? h1 : h0;
}

std::string display(const QuadSpace& s) {
    if (!s.name().empty()) return s.name();
    return "dim" + std::to_string(s.dim());
}

BitVec unit_or_zero(unsigned dim, int idx) {
    BitVec out(dim);
    if (idx >= 0) out.set(static_cast<unsigned>(idx), true);
    return out;
}

}  // namespace

std::string space_key(const QuadSpace& s) {
    return s.q_basis().to_string() + "/" + s.bform().to_string();
}

const FunctorValue& ComputableFunctor::value(const QuadSpace& s) const {
    std::lock_guard<std::mutex> g(mu_);
    auto [it, fresh] = cache_.try_emplace(space_key(s));
    if (fresh) it->second = compute_value(s);
    return it->second;
}

BitMat ComputableFunctor::act(const TqMorphism& t) const {
    const unsigned rows = value(t.target()).dim();
    const unsigned cols = value(t.source()).dim();
    std::vector<BitVec> cs;
    cs.reserve(cols);
    for (unsigned j = 0; j < cols; ++j) cs.push_back(act_column(t, j));
    return BitMat::from_cols(rows, cs);
}

BitVec PlainFunctor::act_column(const BitMat& a, unsigned j) const { return act(a).col(j); }

// ---------------------------------------------------------------------------
// Projectives and their rank layers
// ---------------------------------------------------------------------------

namespace {

// Shared machinery: a basis of hom-set elements with O(1) index lookup.
struct HomBasisData {
    std::vector<TqMorphism> basis;
    std::unordered_map<std::uint64_t, int> idx;

    void build(const SpacePtr& v, const QuadSpace& w,
               const std::function<bool(const TqMorphism&)>& keep) {
        for (auto& m : all_hom(v, share(w)))
            if (keep(m)) {
                idx.emplace(morph_key(m), static_cast<int>(basis.size()));
                basis.push_back(std::move(m));
            }
    }
    int find(const TqMorphism& t) const {
        auto it = idx.find(morph_key(t));
        return it == idx.end() ? -1 : it->second;
    }
};

class Projective final : public ComputableFunctor {
public:
    explicit Projective(QuadSpace v)
        : ComputableFunctor("P:" + display(v)), v_(share(std::move(v))) {
        if (!quad::is_nondegenerate(*v_))
            throw std::invalid_argument("projective: base space must be nondegenerate");
    }

    BitVec act_column(const TqMorphism& t, unsigned j) const override {
        const HomBasisData& src = data(t.source());
        const HomBasisData& tgt = data(t.target());
        int at = tgt.find(tq::compose(t, src.basis.at(j)));
        assert(at >= 0);
        return unit_or_zero(static_cast<unsigned>(tgt.basis.size()), at);
    }

protected:
    FunctorValue compute_value(const QuadSpace& s) const override {
        const HomBasisData& d = data(s);
        FunctorValue out{display(s), {}};
        out.labels.reserve(d.basis.size());
        for (const auto& m : d.basis) out.labels.push_back(m.to_string());
        return out;
    }

private:
    const HomBasisData& data(const QuadSpace& w) const {
        std::lock_guard<std::mutex> g(dmu_);
        auto [it, fresh] = dmap_.try_emplace(space_key(w));
        if (fresh) it->second.build(v_, w, [](const TqMorphism&) { return true; });
        return it->second;
    }

    SpacePtr v_;
    mutable std::mutex dmu_;
    mutable std::map<std::string, HomBasisData> dmap_;
};

class ProjectiveLayer final : public ComputableFunctor {
public:
    ProjectiveLayer(QuadSpace v, unsigned i, LayerMode mode)
        : ComputableFunctor(layer_name(v, i, mode)),
          v_(share(std::move(v))),
          i_(mode == LayerMode::quotient_top ? v_->dim() : i),
          mode_(mode) {
        if (!quad::is_nondegenerate(*v_))
            throw std::invalid_argument("projective_layer: base space must be nondegenerate");
        if (i_ > v_->dim()) throw std::invalid_argument("projective_layer: rank out of range");
    }

    BitVec act_column(const TqMorphism& t, unsigned j) const override {
        const HomBasisData& src = data(t.source());
        const HomBasisData& tgt = data(t.target());
        TqMorphism c = tq::compose(t, src.basis.at(j));
        const unsigned dim = static_cast<unsigned>(tgt.basis.size());
        if (mode_ != LayerMode::sub && c.rank() != i_) return BitVec(dim);
        int at = tgt.find(c);
        assert(at >= 0);
        return unit_or_zero(dim, at);
    }

protected:
    FunctorValue compute_value(const QuadSpace& s) const override {
        const HomBasisData& d = data(s);
        FunctorValue out{display(s), {}};
        out.labels.reserve(d.basis.size());
        for (const auto& m : d.basis) out.labels.push_back(m.to_string());
        return out;
    }

private:
    static std::string layer_name(const QuadSpace& v, unsigned i, LayerMode mode) {
        switch (mode) {
            case LayerMode::sub: return "P:" + display(v) + ":sub" + std::to_string(i);
            case LayerMode::layer: return "P:" + display(v) + ":layer" + std::to_string(i);
            case LayerMode::quotient_top: return "P:" + display(v) + ":top";
        }
        return {};
    }

    const HomBasisData& data(const QuadSpace& w) const {
        std::lock_guard<std::mutex> g(dmu_);
        auto [it, fresh] = dmap_.try_emplace(space_key(w));
        if (fresh)
            it->second.build(v_, w, [this](const TqMorphism& m) {
                return mode_ == LayerMode::sub ? m.rank() <= i_ : m.rank() == i_;
            });
        return it->second;
    }

    SpacePtr v_;
    unsigned i_;
    LayerMode mode_;
    mutable std::mutex dmu_;
    mutable std::map<std::string, HomBasisData> dmap_;
};

class TypeLayer final : public ComputableFunctor {
public:
    TypeLayer(bool eps, char letter)
        : ComputableFunctor(std::string("layer:") + (eps ? "H1" : "H0") + ":" + letter),
          v_(share(plane(eps))),
          letter_(letter) {
        const std::string ok = eps ? "EFG" : "ABC";
        if (ok.find(letter) == std::string::npos)
            throw std::invalid_argument("type_layer: unknown letter for this plane");
    }

    BitVec act_column(const TqMorphism& t, unsigned j) const override {
        const HomBasisData& src = data(t.source());
        const HomBasisData& tgt = data(t.target());
        TqMorphism c = tq::compose(t, src.basis.at(j));
        const unsigned dim = static_cast<unsigned>(tgt.basis.size());
        if (c.rank() != 1) return BitVec(dim);
        int at = tgt.find(c);
        assert(at >= 0);  // the conserved line survives composition unchanged
        return unit_or_zero(dim, at);
    }

protected:
    FunctorValue compute_value(const QuadSpace& s) const override {
        const HomBasisData& d = data(s);
        FunctorValue out{display(s), {}};
        for (const auto& m : d.basis) out.labels.push_back(m.to_string());
        return out;
    }

private:
    const HomBasisData& data(const QuadSpace& w) const {
        std::lock_guard<std::mutex> g(dmu_);
        auto [it, fresh] = dmap_.try_emplace(space_key(w));
        if (fresh)
            it->second.build(v_, w, [this](const TqMorphism& m) {
                return m.rank() == 1 && tq::classify_generator(m).label == letter_;
            });
        return it->second;
    }

    SpacePtr v_;
    char letter_;
    mutable std::mutex dmu_;
    mutable std::map<std::string, HomBasisData> dmap_;
};

// ---------------------------------------------------------------------------
// Plain vector-space functors and their lifts
// ---------------------------------------------------------------------------

class Lambda1 final : public PlainFunctor {
public:
    Lambda1() : PlainFunctor("Lambda1") {}
    std::vector<std::string> labels(unsigned n) const override {
        std::vector<std::string> out;
        for (unsigned i = 0; i < n; ++i) out.push_back("e" + std::to_string(i));
        return out;
    }
    BitMat act(const BitMat& a) const override { return a; }
    BitVec act_column(const BitMat& a, unsigned j) const override { return a.col(j); }
};

class Lambda2 final : public PlainFunctor {
public:
    Lambda2() : PlainFunctor("Lambda2") {}
    std::vector<std::string> labels(unsigned n) const override {
        std::vector<std::string> out;
        for (unsigned i = 0; i < n; ++i)
            for (unsigned j = i + 1; j < n; ++j)
                out.push_back("e" + std::to_string(i) + "^e" + std::to_string(j));
        return out;
    }
    BitMat act(const BitMat& a) const override {
        const unsigned n = a.cols(), m = a.rows();
        std::vector<BitVec> cols;
        for (unsigned i = 0; i < n; ++i)
            for (unsigned j = i + 1; j < n; ++j) cols.push_back(wedge(a.col(i), a.col(j), m));
        return BitMat::from_cols(m * (m - 1) / 2, cols);
    }

private:
    // a ^ b expanded over the e_k^e_l basis (k < l) of the target.
    static BitVec wedge(const BitVec& x, const BitVec& y, unsigned m) {
        BitVec out(m * (m - 1) / 2);
        unsigned pos = 0;
        for (unsigned k = 0; k < m; ++k)
            for (unsigned l = k + 1; l < m; ++l, ++pos)
                if ((x.get(k) && y.get(l)) != (x.get(l) && y.get(k))) out.set(pos, true);
        return out;
    }
};

// F2[Hom_vect(F2^2, -)]: the basis at dimension n is all n x 2 matrices,
// ordered by (second column, first column) as numbers.
class PlainProjective final : public PlainFunctor {
public:
    PlainProjective() : PlainFunctor("PF2") {}
    std::vector<std::string> labels(unsigned n) const override {
        std::vector<std::string> out;
        out.reserve(std::size_t{1} << (2 * n));
        for (std::uint64_t k = 0; k < (std::uint64_t{1} << (2 * n)); ++k)
            out.push_back(matrix_at(n, k).to_string());
        return out;
    }
    BitMat act(const BitMat& a) const override {
        const unsigned n = a.cols(), m = a.rows();
        std::vector<BitVec> cols;
        cols.reserve(std::size_t{1} << (2 * n));
        for (std::uint64_t k = 0; k < (std::uint64_t{1} << (2 * n)); ++k)
            cols.push_back(act_at(a, n, m, k));
        return BitMat::from_cols(1u << (2 * m), cols);
    }
    BitVec act_column(const BitMat& a, unsigned j) const override {
        return act_at(a, a.cols(), a.rows(), j);
    }

private:
    static BitMat matrix_at(unsigned n, std::uint64_t k) {
        const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
        return BitMat::from_cols(
            n, {BitVec::from_key(n, k & mask), BitVec::from_key(n, k >> n)});
    }
    static BitVec act_at(const BitMat& a, unsigned n, unsigned m, std::uint64_t k) {
        const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
        std::uint64_t c0 = a.apply(BitVec::from_key(n, k & mask)).low_word();
        std::uint64_t c1 = a.apply(BitVec::from_key(n, k >> n)).low_word();
        BitVec out(1u << (2 * m));
        out.set(static_cast<unsigned>((c1 << m) | c0), true);
        return out;
    }
};

class IotaLift final : public ComputableFunctor {
public:
    explicit IotaLift(PlainPtr f) : ComputableFunctor("iota:" + f->name()), f_(std::move(f)) {}

    BitVec act_column(const TqMorphism& t, unsigned j) const override {
        return f_->act_column(t.a(), j);
    }
    BitMat act(const TqMorphism& t) const override { return f_->act(t.a()); }

protected:
    FunctorValue compute_value(const QuadSpace& s) const override {
        return {display(s), f_->labels(s.dim())};
    }

private:
    PlainPtr f_;
};

// ---------------------------------------------------------------------------
// Mix, isotropic-flag and point functors
// ---------------------------------------------------------------------------

class Mix final : public ComputableFunctor {
public:
    explicit Mix(bool alpha)
        : ComputableFunctor(alpha ? "Mix11" : "Mix01"), alpha_(alpha) {}

    BitVec act_column(const TqMorphism& t, unsigned j) const override {
        const Data& src = data(t.source());
        const Data& tgt = data(t.target());
        const unsigned dim = static_cast<unsigned>(tgt.basis.size());
        auto [k1, k2] = src.basis.at(j);
        const unsigned n = t.source().dim();
        BitVec v1 = BitVec::from_key(n, k1), v2 = BitVec::from_key(n, k2);
        if (!t.k().contains(v1 ^ v2)) return BitVec(dim);
        std::uint64_t w1 = t.a().apply(v1).low_word(), w2 = t.a().apply(v2).low_word();
        auto it = tgt.idx.find((w1 << 16) | w2);
        assert(it != tgt.idx.end());
        return unit_or_zero(dim, it->second);
    }

protected:
    FunctorValue compute_value(const QuadSpace& s) const override {
        const Data& d = data(s);
        FunctorValue out{display(s), {}};
        const unsigned n = s.dim();
        for (auto [k1, k2] : d.basis)
            out.labels.push_back("(" + BitVec::from_key(n, k1).to_string() + "," +
                                 BitVec::from_key(n, k2).to_string() + ")");
        return out;
    }

private:
    struct Data {
        std::vector<std::pair<std::uint64_t, std::uint64_t>> basis;
        std::unordered_map<std::uint64_t, int> idx;
    };

    const Data& data(const QuadSpace& s) const {
        std::lock_guard<std::mutex> g(mu2_);
        auto [it, fresh] = map_.try_emplace(space_key(s));
        if (!fresh) return it->second;
        const unsigned n = s.dim();
        assert(n <= 16);
        Data& d = it->second;
        for (std::uint64_t k1 = 0; k1 < (std::uint64_t{1} << n); ++k1)
            for (std::uint64_t k2 = 0; k2 < (std::uint64_t{1} << n); ++k2) {
                BitVec v1 = BitVec::from_key(n, k1), v2 = BitVec::from_key(n, k2);
                if (s.b(v1, v2) && s.q(v1 ^ v2) == alpha_) {
                    d.idx.emplace((k1 << 16) | k2, static_cast<int>(d.basis.size()));
                    d.basis.emplace_back(k1, k2);
                }
            }
        return d;
    }

    bool alpha_;
    mutable std::mutex mu2_;
    mutable std::map<std::string, Data> map_;
};

class IsoNondeg final : public ComputableFunctor {
public:
    explicit IsoNondeg(QuadSpace v)
        : ComputableFunctor("iso:" + display(v)), v_(share(std::move(v))) {
        if (!quad::is_nondegenerate(*v_))
            throw std::invalid_argument("iso_nondeg: space must be nondegenerate");
    }

    BitVec act_column(const TqMorphism& t, unsigned j) const override {
        const Data& src = data(t.source());
        const Data& tgt = data(t.target());
        const unsigned dim = static_cast<unsigned>(tgt.basis.size());
        const BitMat& f = src.basis.at(j);
        for (unsigned c = 0; c < f.cols(); ++c)
            if (!t.k().contains(f.col(c))) return BitVec(dim);
        auto it = tgt.idx.find(t.a().mul(f).packed_key());
        assert(it != tgt.idx.end());
        return unit_or_zero(dim, it->second);
    }

protected:
    FunctorValue compute_value(const QuadSpace& s) const override {
        const Data& d = data(s);
        FunctorValue out{display(s), {}};
        for (const auto& f : d.basis) out.labels.push_back(f.to_string());
        return out;
    }

private:
    struct Data {
        std::vector<BitMat> basis;
        std::unordered_map<std::uint64_t, int> idx;
    };

    const Data& data(const QuadSpace& s) const {
        std::lock_guard<std::mutex> g(mu2_);
        auto [it, fresh] = map_.try_emplace(space_key(s));
        if (!fresh) return it->second;
        Data& d = it->second;
        for (const auto& emb : quad::all_isometric_embeddings(*v_, s)) {
            d.idx.emplace(emb.map.packed_key(), static_cast<int>(d.basis.size()));
            d.basis.push_back(emb.map);
        }
        return d;
    }

    SpacePtr v_;
    mutable std::mutex mu2_;
    mutable std::map<std::string, Data> map_;
};

class IsoPoint final : public ComputableFunctor {
public:
    explicit IsoPoint(bool alpha)
        : ComputableFunctor(alpha ? "iso:x1" : "iso:x0"), alpha_(alpha) {}

    BitVec act_column(const TqMorphism& t, unsigned j) const override {
        const Data& src = data(t.source());
        const Data& tgt = data(t.target());
        const unsigned dim = static_cast<unsigned>(tgt.basis.size());
        BitVec w = BitVec::from_key(t.source().dim(), src.basis.at(j));
        if (!t.k().contains(w)) return BitVec(dim);
        int at = tgt.idx.at(t.a().apply(w).low_word());
        assert(at >= 0);
        return unit_or_zero(dim, at);
    }

protected:
    FunctorValue compute_value(const QuadSpace& s) const override {
        const Data& d = data(s);
        FunctorValue out{display(s), {}};
        for (auto k : d.basis) out.labels.push_back(BitVec::from_key(s.dim(), k).to_string());
        return out;
    }

private:
    struct Data {
        std::vector<std::uint64_t> basis;
        std::unordered_map<std::uint64_t, int> idx;
    };

    const Data& data(const QuadSpace& s) const {
        std::lock_guard<std::mutex> g(mu2_);
        auto [it, fresh] = map_.try_emplace(space_key(s));
        if (!fresh) return it->second;
        Data& d = it->second;
        for (std::uint64_t k = 1; k < (std::uint64_t{1} << s.dim()); ++k)
            if (s.q(BitVec::from_key(s.dim(), k)) == alpha_) {
                d.idx.emplace(k, static_cast<int>(d.basis.size()));
                d.basis.push_back(k);
            }
        return d;
    }

    bool alpha_;
    mutable std::mutex mu2_;
    mutable std::map<std::string, Data> map_;
};

// ---------------------------------------------------------------------------
// Combinators
// ---------------------------------------------------------------------------

class Constant final : public ComputableFunctor {
public:
    Constant() : ComputableFunctor("const") {}
    BitVec act_column(const TqMorphism&, unsigned) const override {
        return BitVec::unit(1, 0);
    }

protected:
    FunctorValue compute_value(const QuadSpace& s) const override {
        return {display(s), {"1"}};
    }
};

class Tensor final : public ComputableFunctor {
public:
    Tensor(FunctorPtr f, FunctorPtr g)
        : ComputableFunctor("tensor(" + f->name() + "," + g->name() + ")"),
          f_(std::move(f)),
          g_(std::move(g)) {}

    BitVec act_column(const TqMorphism& t, unsigned j) const override {
        const unsigned gs = g_->value(t.source()).dim();
        const unsigned ft = f_->value(t.target()).dim();
        const unsigned gt = g_->value(t.target()).dim();
        BitVec fcol = f_->act_column(t, j / gs);
        BitVec gcol = g_->act_column(t, j % gs);
        BitVec out(ft * gt);
        for (unsigned p = 0; p < ft; ++p)
            if (fcol.get(p))
                for (unsigned q = 0; q < gt; ++q)
                    if (gcol.get(q)) out.set(p * gt + q, true);
        return out;
    }

protected:
    FunctorValue compute_value(const QuadSpace& s) const override {
        const FunctorValue& fv = f_->value(s);
        const FunctorValue& gv = g_->value(s);
        FunctorValue out{display(s), {}};
        out.labels.reserve(std::size_t{fv.dim()} * gv.dim());
        for (const auto& a : fv.labels)
            for (const auto& b : gv.labels) out.labels.push_back(a + " (x) " + b);
        return out;
    }

private:
    FunctorPtr f_, g_;
};

class DirectSum final : public ComputableFunctor {
public:
    DirectSum(FunctorPtr f, FunctorPtr g)
        : ComputableFunctor("sum(" + f->name() + "," + g->name() + ")"),
          f_(std::move(f)),
          g_(std::move(g)) {}

    BitVec act_column(const TqMorphism& t, unsigned j) const override {
        const unsigned fs = f_->value(t.source()).dim();
        const unsigned ft = f_->value(t.target()).dim();
        const unsigned gt = g_->value(t.target()).dim();
        BitVec out(ft + gt);
        if (j < fs) {
            BitVec c = f_->act_column(t, j);
            for (unsigned p = 0; p < ft; ++p)
                if (c.get(p)) out.set(p, true);
        } else {
            BitVec c = g_->act_column(t, j - fs);
            for (unsigned p = 0; p < gt; ++p)
                if (c.get(p)) out.set(ft + p, true);
        }
        return out;
    }

protected:
    FunctorValue compute_value(const QuadSpace& s) const override {
        const FunctorValue& fv = f_->value(s);
        const FunctorValue& gv = g_->value(s);
        FunctorValue out{display(s), {}};
        for (const auto& a : fv.labels) out.labels.push_back("L:" + a);
        for (const auto& b : gv.labels) out.labels.push_back("R:" + b);
        return out;
    }

private:
    FunctorPtr f_, g_;
};

// Kernel of the action under the projection V perp H_eps -> V that
// conserves the V block.
class Delta final : public ComputableFunctor {
public:
    Delta(bool eps, FunctorPtr f)
        : ComputableFunctor(std::string("Delta") + (eps ? "1" : "0") + "(" + f->name() + ")"),
          eps_(eps),
          f_(std::move(f)) {}

    BitVec act_column(const TqMorphism& t, unsigned j) const override {
        const Data& src = data(t.source());
        const Data& tgt = data(t.target());
        TqMorphism tph = tq::orth_sum_morphism(t, tq::identity(share(plane(eps_))));
        // Push the j-th kernel basis vector through f and express it in the
        // target's kernel basis via pivot coordinates.
        const BitVec& x = src.ker.basis().row(j);
        BitVec y(f_->value(*tgt.vph).dim());
        for (unsigned i = 0; i < x.len(); ++i)
            if (x.get(i)) y ^= f_->act_column(tph, i);
        BitVec out(tgt.ker.dim());
        BitVec check(y.len());
        for (unsigned r = 0; r < tgt.ker.dim(); ++r)
            if (y.get(static_cast<unsigned>(tgt.pivots[r]))) {
                out.set(r, true);
                check ^= tgt.ker.basis().row(r);
            }
        if (!(check == y))
            throw std::logic_error("delta: action left the kernel subfunctor");
        return out;
    }

protected:
    FunctorValue compute_value(const QuadSpace& s) const override {
        const Data& d = data(s);
        FunctorValue out{display(s), {}};
        for (unsigned r = 0; r < d.ker.dim(); ++r)
            out.labels.push_back("k:" + d.ker.basis().row(r).to_string());
        return out;
    }

private:
    struct Data {
        SpacePtr vph;
        Subspace ker;
        std::vector<int> pivots;
    };

    const Data& data(const QuadSpace& s) const {
        std::lock_guard<std::mutex> g(mu2_);
        auto [it, fresh] = map_.try_emplace(space_key(s));
        if (!fresh) return it->second;
        Data& d = it->second;
        d.vph = share(quad::orthogonal_sum(s, plane(eps_)));
        const unsigned n = s.dim();
        BitMat proj(n, n + 2);
        std::vector<BitVec> block;
        for (unsigned i = 0; i < n; ++i) {
            proj.set(i, i, true);
            block.push_back(BitVec::unit(n + 2, i));
        }
        TqMorphism teps = tq::make_morphism(proj, Subspace::span(n + 2, block), d.vph, share(s));
        const unsigned cols = f_->value(*d.vph).dim();
        std::vector<BitVec> acted;
        acted.reserve(cols);
        for (unsigned j = 0; j < cols; ++j) acted.push_back(f_->act_column(teps, j));
        d.ker = gf2::kernel(BitMat::from_cols(f_->value(s).dim(), acted));
        for (unsigned r = 0; r < d.ker.dim(); ++r)
            d.pivots.push_back(d.ker.basis().row(r).lowest_set());
        return d;
    }

    bool eps_;
    FunctorPtr f_;
    mutable std::mutex mu2_;
    mutable std::map<std::string, Data> map_;
};

// ---------------------------------------------------------------------------
// Orbit-induced functors from a fixed space with an automorphism module
// ---------------------------------------------------------------------------

class KappaTilde final : public ComputableFunctor {
public:
    KappaTilde(QuadSpace v, KtModule m)
        : ComputableFunctor("ktilde:" + display(v) + (m == KtModule::trivial ? ":triv" : ":nat")),
          v_(share(std::move(v))) {
        for (const auto& g : quad::all_isometric_embeddings(*v_, *v_)) group_.push_back(g.map);
        if (m == KtModule::trivial) {
            mdim_ = 1;
            rho_.assign(group_.size(), BitMat::identity(1));
        } else {
            mdim_ = v_->dim();
            rho_ = group_;
        }
    }

    BitVec act_column(const TqMorphism& t, unsigned col) const override {
        const Data& src = data(t.source());
        const Data& tgt = data(t.target());
        const unsigned dim = static_cast<unsigned>(tgt.reps.size()) * mdim_;
        const unsigned o = col / mdim_, k = col % mdim_;
        const BitMat& rep = src.reps.at(o);
        for (unsigned c = 0; c < rep.cols(); ++c)
            if (!t.k().contains(rep.col(c))) return BitVec(dim);
        auto [o2, gi] = tgt.loc.at(t.a().mul(rep).packed_key());
        BitVec out(dim);
        BitVec twist = rho_.at(gi).col(k);
        for (unsigned r = 0; r < mdim_; ++r)
            if (twist.get(r)) out.set(o2 * mdim_ + r, true);
        return out;
    }

protected:
    FunctorValue compute_value(const QuadSpace& s) const override {
        const Data& d = data(s);
        FunctorValue out{display(s), {}};
        for (const auto& rep : d.reps)
            for (unsigned k = 0; k < mdim_; ++k)
                out.labels.push_back(rep.to_string() + "#" + std::to_string(k));
        return out;
    }

private:
    struct Data {
        std::vector<BitMat> reps;
        std::unordered_map<std::uint64_t, std::pair<unsigned, unsigned>> loc;
    };

    const Data& data(const QuadSpace& s) const {
        std::lock_guard<std::mutex> g(mu2_);
        auto [it, fresh] = map_.try_emplace(space_key(s));
        if (!fresh) return it->second;
        Data& d = it->second;
        for (const auto& emb : quad::all_isometric_embeddings(*v_, s)) {
            if (d.loc.count(emb.map.packed_key())) continue;
            const unsigned o = static_cast<unsigned>(d.reps.size());
            d.reps.push_back(emb.map);
            for (unsigned gi = 0; gi < group_.size(); ++gi)
                d.loc.emplace(emb.map.mul(group_[gi]).packed_key(), std::make_pair(o, gi));
        }
        return d;
    }

    SpacePtr v_;
    std::vector<BitMat> group_;
    std::vector<BitMat> rho_;
    unsigned mdim_ = 1;
    mutable std::mutex mu2_;
    mutable std::map<std::string, Data> map_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Factories and the registry
// ---------------------------------------------------------------------------

FunctorPtr projective(QuadSpace v) { return std::make_shared<Projective>(std::move(v)); }

FunctorPtr projective_layer(QuadSpace v, unsigned i, LayerMode mode) {
    return std::make_shared<ProjectiveLayer>(std::move(v), i, mode);
}

FunctorPtr type_layer(bool eps, char letter) { return std::make_shared<TypeLayer>(eps, letter); }

PlainPtr lambda_power(unsigned k) {
    if (k == 1) return std::make_shared<Lambda1>();
    if (k == 2) return std::make_shared<Lambda2>();
    throw std::invalid_argument("lambda_power: only k = 1, 2 are provided");
}

PlainPtr plain_projective() { return std::make_shared<PlainProjective>(); }

FunctorPtr iota_lift(PlainPtr f) { return std::make_shared<IotaLift>(std::move(f)); }

FunctorPtr mix(bool alpha) { return std::make_shared<Mix>(alpha); }

FunctorPtr iso_nondeg(QuadSpace v) { return std::make_shared<IsoNondeg>(std::move(v)); }

FunctorPtr iso_point(bool alpha) { return std::make_shared<IsoPoint>(alpha); }

FunctorPtr constant() { return std::make_shared<Constant>(); }

FunctorPtr tensor(FunctorPtr f, FunctorPtr g) {
    return std::make_shared<Tensor>(std::move(f), std::move(g));
}

FunctorPtr direct_sum(FunctorPtr f, FunctorPtr g) {
    return std::make_shared<DirectSum>(std::move(f), std::move(g));
}

FunctorPtr delta(bool eps, FunctorPtr f) { return std::make_shared<Delta>(eps, std::move(f)); }

FunctorPtr kappa_tilde(QuadSpace v, KtModule m) {
    return std::make_shared<KappaTilde>(std::move(v), m);
}

namespace {

// Functors are interned by name so repeated parses share evaluation caches.
std::mutex reg_mu;
std::map<std::string, FunctorPtr>& registry() {
    static std::map<std::string, FunctorPtr> r;
    return r;
}

FunctorPtr intern(FunctorPtr f) {
    std::lock_guard<std::mutex> g(reg_mu);
    auto [it, fresh] = registry().try_emplace(f->name(), f);
    return it->second;
}

std::vector<std::string> split_args(const std::string& s) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

FunctorPtr parse_impl(const std::string& name) {
    if (name == "const") return constant();
    if (name == "Mix01") return mix(false);
    if (name == "Mix11") return mix(true);
    if (name == "iso:x0") return iso_point(false);
    if (name == "iso:x1") return iso_point(true);
    if (name.rfind("iso:", 0) == 0) return iso_nondeg(QuadSpace::parse(name.substr(4)));
    if (name == "iota:Lambda1") return iota_lift(lambda_power(1));
    if (name == "iota:Lambda2") return iota_lift(lambda_power(2));
    if (name == "iota:PF2") return iota_lift(plain_projective());
    if (name.rfind("P:", 0) == 0) {
        const std::string rest = name.substr(2);
        auto colon = rest.find(':');
        if (colon == std::string::npos) return projective(QuadSpace::parse(rest));
        QuadSpace v = QuadSpace::parse(rest.substr(0, colon));
        const std::string layer = rest.substr(colon + 1);
        if (layer == "top") return projective_layer(std::move(v), 0, LayerMode::quotient_top);
        if (layer.rfind("sub", 0) == 0)
            return projective_layer(std::move(v), std::stoul(layer.substr(3)), LayerMode::sub);
        if (layer.rfind("layer", 0) == 0)
            return projective_layer(std::move(v), std::stoul(layer.substr(5)), LayerMode::layer);
        throw std::invalid_argument("unknown projective layer: " + name);
    }
    if (name.rfind("ktilde:", 0) == 0) {
        const std::string rest = name.substr(7);
        auto colon = rest.rfind(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("ktilde requires a module suffix: " + name);
        QuadSpace v = QuadSpace::parse(rest.substr(0, colon));
        const std::string mod = rest.substr(colon + 1);
        if (mod == "triv") return kappa_tilde(std::move(v), KtModule::trivial);
        if (mod == "nat") return kappa_tilde(std::move(v), KtModule::natural);
        throw std::invalid_argument("unknown ktilde module: " + name);
    }
    for (bool eps : {false, true}) {
        const std::string head = std::string("Delta") + (eps ? "1" : "0") + "(";
        if (name.rfind(head, 0) == 0 && name.back() == ')')
            return delta(eps, parse_functor(name.substr(head.size(),
                                                        name.size() - head.size() - 1)));
    }
    for (const char* head : {"tensor(", "sum("}) {
        const std::string h = head;
        if (name.rfind(h, 0) == 0 && name.back() == ')') {
            auto parts = split_args(name.substr(h.size(), name.size() - h.size() - 1));
            if (parts.size() != 2)
                throw std::invalid_argument("expected two arguments: " + name);
            FunctorPtr a = parse_functor(parts[0]);
            FunctorPtr b = parse_functor(parts[1]);
            return h == "tensor(" ? tensor(a, b) : direct_sum(a, b);
        }
    }
    throw std::invalid_argument("unknown functor: " + name);
}

}  // namespace

FunctorPtr parse_functor(const std::string& name) {
    {
        std::lock_guard<std::mutex> g(reg_mu);
        auto it = registry().find(name);
        if (it != registry().end()) return it->second;
    }
    FunctorPtr f = parse_impl(name);
    if (f->name() != name)
        throw std::invalid_argument("functor name not in canonical form: " + name +
                                    " (use " + f->name() + ")");
    return intern(std::move(f));
}

std::vector<FunctorPtr> shipped_functors() {
    static const char* names[] = {
        "const",        "iota:Lambda1", "iota:Lambda2", "iota:PF2",    "Mix01",
        "Mix11",        "iso:x0",       "iso:x1",       "iso:H0",      "iso:H1",
        "P:H0",         "P:H1",         "P:H0:sub0",    "P:H0:layer1", "P:H0:top",
        "P:H1:sub0",    "P:H1:layer1",  "P:H1:top",     "ktilde:H0:triv",
        "ktilde:H1:triv", "ktilde:H1:nat",
    };
    std::vector<FunctorPtr> out;
    for (const char* n : names) out.push_back(parse_functor(n));
    return out;
}

}  // namespace fquad::fn
