#include "fquad/quad.hpp"

#include <algorithm>
#include <stdexcept>

namespace fquad::quad {

QuadSpace::QuadSpace(BitVec q_basis, BitMat bform, std::string name)
    : q_basis_(std::move(q_basis)), bform_(std::move(bform)), name_(std::move(name)) {
    unsigned n = q_basis_.len();
    if (bform_.rows() != n || bform_.cols() != n)
        throw std::invalid_argument("quadratic space: B must be dim x dim");
    for (unsigned i = 0; i < n; ++i) {
        if (bform_.get(i, i))
            throw std::invalid_argument("quadratic space: B must have zero diagonal");
        for (unsigned j = i + 1; j < n; ++j)
            if (bform_.get(i, j) != bform_.get(j, i))
                throw std::invalid_argument("quadratic space: B must be symmetric");
    }
}

namespace {
BitMat hyperbolic_bform() { return BitMat::from_string(2, 2, "01;10"); }
}  // namespace

QuadSpace QuadSpace::H0() { return QuadSpace(BitVec::from_string("00"), hyperbolic_bform(), "H0"); }
QuadSpace QuadSpace::H1() { return QuadSpace(BitVec::from_string("11"), hyperbolic_bform(), "H1"); }
QuadSpace QuadSpace::line0() { return QuadSpace(BitVec::from_string("0"), BitMat(1, 1), "x0"); }
QuadSpace QuadSpace::line1() { return QuadSpace(BitVec::from_string("1"), BitMat(1, 1), "x1"); }

QuadSpace QuadSpace::parse(const std::string& spec) {
    if (spec == "0") return QuadSpace();
    QuadSpace acc;
    size_t pos = 0;
    while (pos <= spec.size()) {
        size_t next = spec.find('+', pos);
        std::string part = (next == std::string::npos) ? spec.substr(pos) : spec.substr(pos, next - pos);
        QuadSpace piece;
        if (part == "H0") piece = H0();
        else if (part == "H1") piece = H1();
        else if (part == "x0") piece = line0();
        else if (part == "x1") piece = line1();
        else throw std::invalid_argument("unknown space spec part: '" + part + "'");
        acc = orthogonal_sum(acc, piece);
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return acc;
}

bool QuadSpace::q(const BitVec& v) const {
    if (v.len() != dim()) throw std::invalid_argument("q: vector length mismatch");
    bool acc = false;
    for (unsigned i = 0; i < dim(); ++i) {
        if (!v.get(i)) continue;
        acc ^= q_basis_.get(i);
        for (unsigned j = i + 1; j < dim(); ++j)
            if (v.get(j)) acc ^= bform_.get(i, j);
    }
    return acc;
}

bool QuadSpace::b(const BitVec& v, const BitVec& w) const {
    if (v.len() != dim() || w.len() != dim())
        throw std::invalid_argument("b: vector length mismatch");
    return v.dot(bform_.apply(w));
}

Subspace radical(const QuadSpace& s) { return gf2::kernel(s.bform()); }

QuadSpace orthogonal_sum(const QuadSpace& s1, const QuadSpace& s2) {
    if (s1.dim() == 0) return s2;
    if (s2.dim() == 0) return s1;
    std::string name;
    if (!s1.name().empty() && !s2.name().empty()) name = s1.name() + "+" + s2.name();
    return QuadSpace(s1.q_basis().concat(s2.q_basis()), s1.bform().direct_sum(s2.bform()),
                     std::move(name));
}

std::vector<std::pair<BitVec, BitVec>> symplectic_basis(const QuadSpace& s) {
    if (!is_nondegenerate(s)) throw std::invalid_argument("symplectic_basis: degenerate space");
    std::vector<std::pair<BitVec, BitVec>> pairs;
    Subspace remaining = Subspace::full(s.dim());
    while (remaining.dim() > 0) {
        BitVec a = remaining.basis().row(0);
        // First partner in canonical order; nondegeneracy restricted to
        // `remaining` guarantees one exists.
        BitVec b(s.dim());
        bool found = false;
        for (const BitVec& cand : remaining.elements())
            if (s.b(a, cand)) { b = cand; found = true; break; }
        if (!found) throw std::logic_error("symplectic_basis: no partner found");
        pairs.emplace_back(a, b);
        // Restrict to the B-orthogonal complement of {a, b} inside remaining.
        BitMat cond = BitMat::from_rows(s.dim(), {s.bform().apply(a), s.bform().apply(b)});
        remaining = gf2::intersect(remaining, gf2::kernel(cond));
    }
    return pairs;
}

bool arf(const QuadSpace& s) {
    bool acc = false;
    for (const auto& [a, b] : symplectic_basis(s)) acc ^= s.q(a) && s.q(b);
    return acc;
}

bool is_isometry_matrix(const QuadSpace& src, const QuadSpace& tgt, const BitMat& m) {
    if (m.rows() != tgt.dim() || m.cols() != src.dim()) return false;
    auto [r, rank] = gf2::rref(m.transpose());
    (void)r;
    if (rank != src.dim()) return false;
    // q-preservation on a basis plus B-preservation on basis pairs implies
    // q-preservation everywhere, by the polar identity.
    for (unsigned i = 0; i < src.dim(); ++i) {
        BitVec ei = BitVec::unit(src.dim(), i);
        if (src.q(ei) != tgt.q(m.col(i))) return false;
        for (unsigned j = i + 1; j < src.dim(); ++j)
            if (src.b(ei, BitVec::unit(src.dim(), j)) != tgt.b(m.col(i), m.col(j))) return false;
    }
    return true;
}

void isometric_embeddings(const QuadSpace& d, const QuadSpace& w,
                          const std::function<void(const Isometry&)>& fn) {
    if (d.dim() > w.dim()) return;
    // Backtracking over images of the standard basis vectors of d, in
    // canonical vector order, so emission order is the image-tuple order.
    std::vector<BitVec> img;  // images of e_0..e_{k-1}
    std::vector<BitVec> span_elems{BitVec(w.dim())};  // span of current images
    std::function<void(unsigned)> extend = [&](unsigned k) {
        if (k == d.dim()) {
            BitMat m = BitMat::from_cols(w.dim(), img);
            fn(Isometry{d, w, m});
            return;
        }
        BitVec ek = BitVec::unit(d.dim(), k);
        for (std::uint64_t key = 0; key < (std::uint64_t{1} << w.dim()); ++key) {
            BitVec c = BitVec::from_key(w.dim(), key);
            if (w.q(c) != d.q(ek)) continue;
            bool ok = true;
            for (unsigned i = 0; i < k; ++i)
                if (w.b(img[i], c) != d.b(BitVec::unit(d.dim(), i), ek)) { ok = false; break; }
            if (!ok) continue;
            // Injectivity: c must avoid the span of the current images.
            if (std::find(span_elems.begin(), span_elems.end(), c) != span_elems.end()) continue;
            size_t old = span_elems.size();
            for (size_t i = 0; i < old; ++i) span_elems.push_back(span_elems[i] ^ c);
            img.push_back(c);
            extend(k + 1);
            img.pop_back();
            span_elems.resize(old);
        }
    };
    extend(0);
}

std::vector<Isometry> all_isometric_embeddings(const QuadSpace& d, const QuadSpace& w) {
    std::vector<Isometry> out;
    isometric_embeddings(d, w, [&](const Isometry& f) { out.push_back(f); });
    return out;
}

namespace {
// Thrown internally to stop the search at the first embedding.
struct FoundIsometry {
    Isometry f;
};
}  // namespace

std::optional<Isometry> is_isometric(const QuadSpace& s1, const QuadSpace& s2) {
    if (s1.dim() != s2.dim()) return std::nullopt;
    try {
        isometric_embeddings(s1, s2, [](const Isometry& f) { throw FoundIsometry{f}; });
    } catch (const FoundIsometry& hit) {
        return hit.f;
    }
    return std::nullopt;
}

Isometry witt_extend(const QuadSpace& ambient, const Subspace& d, const Subspace& d2,
                     const BitMat& f_bar) {
    unsigned n = ambient.dim();
    if (d.ambient_dim() != n || d2.ambient_dim() != n)
        throw std::invalid_argument("witt_extend: subspace ambient mismatch");
    if (!is_nondegenerate(ambient))
        throw std::invalid_argument("witt_extend: ambient space must be nondegenerate");
    if (f_bar.rows() != n || f_bar.cols() != d.dim())
        throw std::invalid_argument("witt_extend: f_bar must be ambient_dim x dim(d)");

    // Validate f_bar: images lie in d2, span it, and preserve q and B.
    std::vector<BitVec> pre, img;
    for (unsigned j = 0; j < d.dim(); ++j) {
        pre.push_back(d.basis().row(j));
        img.push_back(f_bar.col(j));
    }
    Subspace img_span = Subspace::span(n, img);
    if (img_span.dim() != d.dim() || !(img_span == d2))
        throw std::invalid_argument("witt_extend: f_bar must map d bijectively onto d2");
    for (unsigned i = 0; i < d.dim(); ++i) {
        if (ambient.q(pre[i]) != ambient.q(img[i]))
            throw std::invalid_argument("witt_extend: f_bar does not preserve q");
        for (unsigned j = i + 1; j < d.dim(); ++j)
            if (ambient.b(pre[i], pre[j]) != ambient.b(img[i], img[j]))
                throw std::invalid_argument("witt_extend: f_bar does not preserve B");
    }

    // Complete the domain basis with standard vectors outside d.
    Subspace dom = d;
    for (unsigned i = 0; i < n && dom.dim() < n; ++i) {
        BitVec ei = BitVec::unit(n, i);
        if (!dom.contains(ei)) {
            pre.push_back(ei);
            dom = gf2::sum(dom, Subspace::span(n, {ei}));
        }
    }

    // Backtracking over images of the completed vectors; the extension
    // theorem guarantees success, so failure here is an internal defect.
    std::vector<BitVec> span_elems = img_span.elements();
    std::function<bool(unsigned)> extend = [&](unsigned k) -> bool {
        if (k == n) return true;
        for (std::uint64_t key = 0; key < (std::uint64_t{1} << n); ++key) {
            BitVec c = BitVec::from_key(n, key);
            if (ambient.q(c) != ambient.q(pre[k])) continue;
            bool ok = true;
            for (unsigned i = 0; i < k; ++i)
                if (ambient.b(img[i], c) != ambient.b(pre[i], pre[k])) { ok = false; break; }
            if (!ok) continue;
            if (std::find(span_elems.begin(), span_elems.end(), c) != span_elems.end()) continue;
            size_t old = span_elems.size();
            for (size_t i = 0; i < old; ++i) span_elems.push_back(span_elems[i] ^ c);
            img.push_back(c);
            if (extend(k + 1)) return true;
            img.pop_back();
            span_elems.resize(old);
        }
        return false;
    };
    if (!extend(d.dim())) throw std::logic_error("witt_extend: extension search exhausted");

    // Assemble the matrix sending pre[k] to img[k]: columns of the result on
    // the standard basis are solved from the change of basis.
    BitMat p = BitMat::from_cols(n, pre);    // standard -> completed-basis coords is p^{-1}
    BitMat q = BitMat::from_cols(n, img);
    // result * p = q, so each standard basis column e_j of the result is
    // q * (p^{-1} e_j); solve p x = e_j and apply q.
    std::vector<BitVec> cols;
    for (unsigned j = 0; j < n; ++j) {
        auto x = gf2::solve(p, BitVec::unit(n, j));
        if (!x) throw std::logic_error("witt_extend: basis completion not invertible");
        cols.push_back(q.apply(*x));
    }
    return Isometry{ambient, ambient, BitMat::from_cols(n, cols)};
}

}  // namespace fquad::quad
