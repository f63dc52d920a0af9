#include "fquad/decomp.hpp"

#include "fquad/quad.hpp"
#include "fquad/tq.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace fquad::decomp {

using fn::FunctorValue;
using fn::space_key;
using gf2::Subspace;
using tq::SpacePtr;
using tq::TqMorphism;

namespace {

QuadSpace plane_space(bool eps) { return QuadSpace::parse(eps ? "H1" : "H0"); }

const char* plane_name(bool eps) { return eps ? "H1" : "H0"; }

// The three lines of the plane, indexed by the packed key of their
// generator: 1 = first basis vector, 2 = second, 3 = their sum.
std::array<Subspace, 4> plane_lines() {
    std::array<Subspace, 4> out;
    out[1] = Subspace::span(2, {BitVec::from_string("10")});
    out[2] = Subspace::span(2, {BitVec::from_string("01")});
    out[3] = Subspace::span(2, {BitVec::from_string("11")});
    return out;
}

std::unordered_map<std::string, unsigned> label_index(const std::vector<std::string>& labels) {
    std::unordered_map<std::string, unsigned> out;
    out.reserve(labels.size());
    for (unsigned i = 0; i < labels.size(); ++i) out.emplace(labels[i], i);
    return out;
}

unsigned find_label(const std::unordered_map<std::string, unsigned>& idx, const std::string& key,
                    const char* what) {
    auto it = idx.find(key);
    if (it == idx.end())
        throw std::logic_error(std::string("certificate construction: missing ") + what + " label " + key);
    return it->second;
}

BitMat label_matrix(unsigned wdim, const std::string& label) {
    return wdim == 0 ? BitMat(0, 2) : BitMat::from_string(wdim, 2, label);
}

std::pair<BitVec, BitVec> parse_pair_label(const std::string& label) {
    if (label.size() < 3 || label.front() != '(' || label.back() != ')')
        throw std::logic_error("certificate construction: malformed pair label " + label);
    size_t comma = label.find(',');
    if (comma == std::string::npos)
        throw std::logic_error("certificate construction: malformed pair label " + label);
    return {BitVec::from_string(label.substr(1, comma - 1)),
            BitVec::from_string(label.substr(comma + 1, label.size() - comma - 2))};
}

// ---------------------------------------------------------------------------
// Certificate construction
// ---------------------------------------------------------------------------

// Inclusion of the rank-0 part: every basis label of the subfunctor is a
// basis label of the projective.
NatTransform sub0_inclusion(bool eps, const std::vector<QuadSpace>& site) {
    NatTransform nt;
    nt.from = fn::parse_functor(std::string("P:") + plane_name(eps) + ":sub0");
    nt.to = fn::parse_functor(std::string("P:") + plane_name(eps));
    for (const auto& w : site) {
        const FunctorValue& pv = nt.to->value(w);
        const FunctorValue& sv = nt.from->value(w);
        auto pmap = label_index(pv.labels);
        std::vector<BitVec> cols;
        cols.reserve(sv.dim());
        for (const auto& label : sv.labels)
            cols.push_back(BitVec::unit(pv.dim(), find_label(pmap, label, "projective")));
        nt.comp.emplace(space_key(w), BitMat::from_cols(pv.dim(), cols));
    }
    return nt;
}

// Copy formulas embedding a mixed functor into the rank-1 layer: a basis
// pair (p1, p2) goes to the rank-1 morphism with the stated column images
// and conserved line, plus the rank-0 morphism with the same linear part.
struct MixCopy {
    char letter;     // A/B/C for the arf-0 plane, E/F/G for arf-1
    bool alpha;      // which mixed functor the copy comes from
    unsigned line;   // packed key of the conserved line's generator
};

std::vector<MixCopy> mix_copies(bool eps) {
    if (!eps) return {{'A', false, 1}, {'B', false, 2}, {'C', true, 3}};
    return {{'E', true, 1}, {'F', true, 2}, {'G', true, 3}};
}

NatTransform mix_injection(bool eps, const MixCopy& c, const std::vector<QuadSpace>& site) {
    NatTransform nt;
    nt.from = fn::parse_functor(c.alpha ? "Mix11" : "Mix01");
    nt.to = fn::parse_functor(std::string("P:") + plane_name(eps));
    SpacePtr pl = tq::share(plane_space(eps));
    auto lines = plane_lines();
    for (const auto& w : site) {
        SpacePtr ws = tq::share(w);
        const FunctorValue& pv = nt.to->value(w);
        const FunctorValue& mv = nt.from->value(w);
        auto pmap = label_index(pv.labels);
        std::vector<BitVec> cols;
        cols.reserve(mv.dim());
        for (const auto& label : mv.labels) {
            auto [p1, p2] = parse_pair_label(label);
            BitVec v, wv;
            switch (c.letter) {
                case 'A': case 'E': v = p1 ^ p2; wv = p1; break;
                case 'B': case 'F': v = p1; wv = p1 ^ p2; break;
                default:            v = p1; wv = p2; break;
            }
            BitMat a = BitMat::from_cols(w.dim(), {v, wv});
            TqMorphism t1 = tq::make_morphism(a, lines[c.line], pl, ws);
            BitVec col(pv.dim());
            col.set(find_label(pmap, t1.to_string(), "rank-1"), true);
            col.set(find_label(pmap, tq::t_of(a, pl, ws).to_string(), "rank-0"), true);
            cols.push_back(std::move(col));
        }
        nt.comp.emplace(space_key(w), BitMat::from_cols(pv.dim(), cols));
    }
    return nt;
}

// Lift of the plain projective onto the rank-0 part: a basis matrix goes to
// the rank-0 morphism it underlies.
NatTransform pf2_injection(bool eps, const std::vector<QuadSpace>& site) {
    NatTransform nt;
    nt.from = fn::parse_functor("iota:PF2");
    nt.to = fn::parse_functor(std::string("P:") + plane_name(eps));
    SpacePtr pl = tq::share(plane_space(eps));
    for (const auto& w : site) {
        SpacePtr ws = tq::share(w);
        const FunctorValue& pv = nt.to->value(w);
        const FunctorValue& fv = nt.from->value(w);
        auto pmap = label_index(pv.labels);
        std::vector<BitVec> cols;
        cols.reserve(fv.dim());
        for (const auto& label : fv.labels) {
            TqMorphism t = tq::t_of(label_matrix(w.dim(), label), pl, ws);
            cols.push_back(BitVec::unit(pv.dim(), find_label(pmap, t.to_string(), "rank-0")));
        }
        nt.comp.emplace(space_key(w), BitMat::from_cols(pv.dim(), cols));
    }
    return nt;
}

// Section of the top quotient, restricted along the embedding functor's
// relabeling: an embedding goes to its full-rank morphism plus the three
// rank-1 companions with the same linear part.
NatTransform iso_injection(bool eps, const std::vector<QuadSpace>& site) {
    NatTransform nt;
    nt.from = fn::parse_functor(std::string("iso:") + plane_name(eps));
    nt.to = fn::parse_functor(std::string("P:") + plane_name(eps));
    SpacePtr pl = tq::share(plane_space(eps));
    auto lines = plane_lines();
    for (const auto& w : site) {
        SpacePtr ws = tq::share(w);
        const FunctorValue& pv = nt.to->value(w);
        const FunctorValue& ev = nt.from->value(w);
        auto pmap = label_index(pv.labels);
        std::vector<BitVec> cols;
        cols.reserve(ev.dim());
        for (const auto& label : ev.labels) {
            BitMat a = label_matrix(w.dim(), label);
            BitVec col(pv.dim());
            TqMorphism full = tq::make_morphism(a, Subspace::full(2), pl, ws);
            col.set(find_label(pmap, full.to_string(), "full-rank"), true);
            for (unsigned l = 1; l <= 3; ++l) {
                TqMorphism t = tq::make_morphism(a, lines[l], pl, ws);
                col.set(find_label(pmap, t.to_string(), "rank-1"), true);
            }
            cols.push_back(std::move(col));
        }
        nt.comp.emplace(space_key(w), BitMat::from_cols(pv.dim(), cols));
    }
    return nt;
}

// ---------------------------------------------------------------------------
// Verification engine
// ---------------------------------------------------------------------------
//
// All shipped certificates have a projective at one of the planes as the
// target, so the basis of the target at W is the hom-set from the plane.
// Basis morphisms are decoded once per space into (c0, c1, k): the packed
// keys of the two matrix columns and the conserved subspace of the plane
// (0 = zero, 1..3 = generator key of a line, 4 = full).  A site morphism T
// acts by a key-image table plus a conserved-key mask, so each naturality
// entry costs a handful of array lookups.

struct PlaneTab {
    unsigned wdim = 0, stride = 1;
    std::vector<std::array<std::uint32_t, 3>> dec;  // (c0, c1, k) per basis index
    std::vector<int> pidx;                          // (c0*stride + c1)*5 + k -> index
    unsigned r1s = 0, r2s = 0;                      // first rank-1 / rank-2 index

    int at(std::uint32_t c0, std::uint32_t c1, unsigned k) const {
        return pidx[(c0 * stride + c1) * 5 + k];
    }
};

unsigned kidx_of(const TqMorphism& m) {
    if (m.rank() == 0) return 0;
    if (m.rank() == 2) return 4;
    return static_cast<unsigned>(m.k().basis().row(0).low_word());
}

PlaneTab build_plane_tab(const SpacePtr& pl, const QuadSpace& w,
                         const std::vector<std::string>& labels) {
    PlaneTab t;
    t.wdim = w.dim();
    t.stride = 1u << t.wdim;
    t.pidx.assign(static_cast<size_t>(t.stride) * t.stride * 5, -1);
    t.dec.reserve(labels.size());
    bool seen1 = false, seen2 = false;
    unsigned i = 0;
    tq::enumerate_hom(pl, tq::share(w), [&](const TqMorphism& m) {
        if (i >= labels.size() || labels[i] != m.to_string())
            throw std::logic_error("verify_certificate: target basis does not match the hom-set at " +
                                   w.name());
        auto c0 = static_cast<std::uint32_t>(m.a().col(0).low_word());
        auto c1 = static_cast<std::uint32_t>(m.a().col(1).low_word());
        unsigned k = kidx_of(m);
        if (m.rank() == 1 && !seen1) { t.r1s = i; seen1 = true; }
        if (m.rank() == 2 && !seen2) { t.r2s = i; seen2 = true; }
        t.dec.push_back({c0, c1, k});
        t.pidx[(static_cast<size_t>(c0) * t.stride + c1) * 5 + k] = static_cast<int>(i);
        ++i;
    });
    if (i != labels.size())
        throw std::logic_error("verify_certificate: target basis does not match the hom-set at " +
                               w.name());
    if (!seen2) t.r2s = i;
    if (!seen1) t.r1s = t.r2s;
    return t;
}

struct PairTab {
    unsigned stride = 1;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> dec;
    std::vector<int> idx;  // c0*stride + c1 -> index

    int at(std::uint32_t c0, std::uint32_t c1) const { return idx[c0 * stride + c1]; }
    void insert(std::uint32_t c0, std::uint32_t c1) {
        idx[c0 * stride + c1] = static_cast<int>(dec.size());
        dec.emplace_back(c0, c1);
    }
};

PairTab make_pair_tab(unsigned wdim) {
    PairTab t;
    t.stride = 1u << wdim;
    t.idx.assign(static_cast<size_t>(t.stride) * t.stride, -1);
    return t;
}

PairTab build_mix_tab(unsigned wdim, const std::vector<std::string>& labels) {
    PairTab t = make_pair_tab(wdim);
    for (const auto& label : labels) {
        auto [p1, p2] = parse_pair_label(label);
        t.insert(static_cast<std::uint32_t>(p1.low_word()), static_cast<std::uint32_t>(p2.low_word()));
    }
    return t;
}

PairTab build_iso_tab(unsigned wdim, const std::vector<std::string>& labels) {
    PairTab t = make_pair_tab(wdim);
    for (const auto& label : labels) {
        BitMat a = label_matrix(wdim, label);
        t.insert(static_cast<std::uint32_t>(a.col(0).low_word()),
                 static_cast<std::uint32_t>(a.col(1).low_word()));
    }
    return t;
}

void check_pf2_labels(unsigned wdim, const std::vector<std::string>& labels) {
    if (labels.size() != (std::size_t{1} << (2 * wdim)))
        throw std::logic_error("verify_certificate: unexpected rank-0 part dimension");
    const std::uint64_t mask = (std::uint64_t{1} << wdim) - 1;
    for (std::uint64_t k = 0; k < labels.size(); ++k) {
        BitMat m = BitMat::from_cols(wdim, {BitVec::from_key(wdim, k & mask),
                                            BitVec::from_key(wdim, k >> wdim)});
        if (labels[static_cast<size_t>(k)] != m.to_string())
            throw std::logic_error("verify_certificate: unexpected rank-0 part basis order");
    }
}

enum class Kind { pf2, mixk, iso, sub0, layer1, top };

Kind kind_of(const std::string& functor_name, bool eps) {
    const std::string p = plane_name(eps);
    if (functor_name == "iota:PF2") return Kind::pf2;
    if (functor_name == "Mix01" || functor_name == "Mix11") return Kind::mixk;
    if (functor_name == "iso:" + p) return Kind::iso;
    if (functor_name == "P:" + p + ":sub0") return Kind::sub0;
    if (functor_name == "P:" + p + ":layer1") return Kind::layer1;
    if (functor_name == "P:" + p + ":top") return Kind::top;
    throw std::invalid_argument("verify_certificate: unsupported summand functor " + functor_name);
}

// Column supports of an injection component, flattened.
struct Support {
    std::vector<std::uint32_t> flat;
    std::vector<std::uint32_t> off;  // column n covers flat[off[n] .. off[n+1])
};

Support column_supports(const BitMat& m) {
    Support s;
    s.off.assign(m.cols() + 1, 0);
    for (unsigned n = 0; n < m.cols(); ++n) {
        for (unsigned r = 0; r < m.rows(); ++r)
            if (m.get(r, n)) s.flat.push_back(r);
        s.off[n + 1] = static_cast<std::uint32_t>(s.flat.size());
    }
    return s;
}

// Per-summand data for one certificate verification run.
struct SumRt {
    Kind kind = Kind::pf2;
    std::string name;
    std::vector<PairTab> tabs;       // per space; mix / iso kinds only
    std::vector<Support> sup;        // per space
    std::vector<const BitMat*> comp; // per space
    std::vector<unsigned> dims;      // per space
};

struct abort_failure {
    std::string detail;
};

unsigned line_image(unsigned l, std::uint32_t c0, std::uint32_t c1) {
    return l == 1 ? c0 : l == 2 ? c1 : (c0 ^ c1);
}

void xor_row_into(BitMat& acc, const BitMat& m) {
    for (unsigned i = 0; i < acc.rows(); ++i) acc.row(i) ^= m.row(i);
}

}  // namespace

DecompCertificate split_certificate(bool eps, const std::vector<QuadSpace>& site) {
    DecompCertificate cert;
    cert.target = std::string("P:") + plane_name(eps);
    cert.site = site;
    const std::string p = plane_name(eps);
    NatTransform inc = sub0_inclusion(eps, site);
    NatTransform lay = fn::layer_section(eps, site);
    NatTransform top = fn::section_s(eps, site);
    cert.summands.push_back({"P:" + p + ":sub0", inc.from, std::move(inc)});
    cert.summands.push_back({"P:" + p + ":layer1", lay.from, std::move(lay)});
    cert.summands.push_back({"P:" + p + ":top", top.from, std::move(top)});
    return cert;
}

DecompCertificate decomposition_certificate(bool eps, const std::vector<QuadSpace>& site) {
    DecompCertificate cert;
    cert.target = std::string("P:") + plane_name(eps);
    cert.site = site;
    NatTransform pf2 = pf2_injection(eps, site);
    cert.summands.push_back({"iota:PF2", pf2.from, std::move(pf2)});
    for (const MixCopy& c : mix_copies(eps)) {
        NatTransform m = mix_injection(eps, c, site);
        std::string nm = m.from->name() + "@" + c.letter;
        cert.summands.push_back({std::move(nm), m.from, std::move(m)});
    }
    NatTransform iso = iso_injection(eps, site);
    cert.summands.push_back({iso.from->name(), iso.from, std::move(iso)});
    return cert;
}

CertReport verify_certificate(const DecompCertificate& cert) {
    CertReport rep;
    if (cert.site.empty()) throw std::invalid_argument("verify_certificate: empty site");
    bool eps;
    if (cert.target == "P:H0") eps = false;
    else if (cert.target == "P:H1") eps = true;
    else throw std::invalid_argument("verify_certificate: unsupported target " + cert.target);

    const fn::FunctorPtr target = fn::parse_functor(cert.target);
    const SpacePtr pl = tq::share(plane_space(eps));
    const unsigned ns = static_cast<unsigned>(cert.site.size());
    const unsigned nsum = static_cast<unsigned>(cert.summands.size());

    // Target tables and summand decoding tables per space.
    std::vector<SpacePtr> sps;
    std::vector<const FunctorValue*> tval(ns);
    std::vector<PlaneTab> ptab(ns);
    for (unsigned i = 0; i < ns; ++i) {
        sps.push_back(tq::share(cert.site[i]));
        tval[i] = &target->value(cert.site[i]);
        ptab[i] = build_plane_tab(pl, cert.site[i], tval[i]->labels);
    }

    std::vector<SumRt> rt(nsum);
    for (unsigned s = 0; s < nsum; ++s) {
        const Summand& sm = cert.summands[s];
        SumRt& r = rt[s];
        r.kind = kind_of(sm.functor->name(), eps);
        r.name = sm.name;
        r.tabs.resize(ns);
        r.sup.resize(ns);
        r.comp.resize(ns);
        r.dims.resize(ns);
        for (unsigned i = 0; i < ns; ++i) {
            const QuadSpace& w = cert.site[i];
            const unsigned wdim = w.dim();
            const FunctorValue& fv = sm.functor->value(w);
            r.dims[i] = fv.dim();
            auto it = sm.injection.comp.find(space_key(w));
            if (it == sm.injection.comp.end()) {
                rep.detail = "summand " + sm.name + " has no injection component at " + w.name();
                return rep;
            }
            r.comp[i] = &it->second;
            if (it->second.rows() != tval[i]->dim() || it->second.cols() != fv.dim()) {
                rep.detail = "summand " + sm.name + ": injection shape mismatch at " + w.name();
                return rep;
            }
            r.sup[i] = column_supports(it->second);
            switch (r.kind) {
                case Kind::pf2: check_pf2_labels(wdim, fv.labels); break;
                case Kind::mixk: r.tabs[i] = build_mix_tab(wdim, fv.labels); break;
                case Kind::iso: r.tabs[i] = build_iso_tab(wdim, fv.labels); break;
                case Kind::sub0:
                    if (fv.dim() != ptab[i].r1s)
                        throw std::logic_error("verify_certificate: rank-0 block size mismatch");
                    break;
                case Kind::layer1:
                    if (fv.dim() != ptab[i].r2s - ptab[i].r1s)
                        throw std::logic_error("verify_certificate: rank-1 block size mismatch");
                    break;
                case Kind::top:
                    if (fv.dim() != tval[i]->dim() - ptab[i].r2s)
                        throw std::logic_error("verify_certificate: full-rank block size mismatch");
                    break;
            }
        }
    }

    // Dimension audit, joint independence, and the idempotent family.
    for (unsigned i = 0; i < ns; ++i) {
        const QuadSpace& w = cert.site[i];
        const unsigned pd = tval[i]->dim();
        unsigned total = 0;
        std::vector<unsigned> row;
        for (unsigned s = 0; s < nsum; ++s) {
            row.push_back(rt[s].dims[i]);
            total += rt[s].dims[i];
        }
        row.push_back(pd);
        rep.dims.emplace_back(w.name(), std::move(row));
        if (total != pd) {
            rep.detail = "dimension audit failed at " + w.name() + ": summands total " +
                         std::to_string(total) + ", target has " + std::to_string(pd);
            return rep;
        }

        std::vector<BitVec> cols;
        cols.reserve(pd);
        for (unsigned s = 0; s < nsum; ++s)
            for (unsigned n = 0; n < rt[s].dims[i]; ++n) cols.push_back(rt[s].comp[i]->col(n));
        auto inv = gf2::invert(BitMat::from_cols(pd, cols));
        if (!inv) {
            rep.detail = "injections are not jointly independent at " + w.name();
            return rep;
        }
        std::vector<BitMat> idem;
        unsigned off = 0;
        for (unsigned s = 0; s < nsum; ++s) {
            std::vector<BitVec> pr;
            for (unsigned n = 0; n < rt[s].dims[i]; ++n) pr.push_back(inv->row(off + n));
            off += rt[s].dims[i];
            idem.push_back(rt[s].comp[i]->mul(BitMat::from_rows(pd, std::move(pr))));
        }
        BitMat acc(pd, pd);
        for (unsigned s = 0; s < nsum; ++s) {
            if (idem[s].mul(idem[s]) != idem[s]) {
                rep.detail = "projector of " + rt[s].name + " is not idempotent at " + w.name();
                return rep;
            }
            for (unsigned u = 0; u < nsum; ++u)
                if (u != s && !(idem[s].mul(idem[u]) == BitMat(pd, pd))) {
                    rep.detail = "projectors of " + rt[s].name + " and " + rt[u].name +
                                 " are not orthogonal at " + w.name();
                    return rep;
                }
            xor_row_into(acc, idem[s]);
        }
        if (acc != BitMat::identity(pd)) {
            rep.detail = "projectors do not sum to the identity at " + w.name();
            return rep;
        }
    }

    // Naturality of every injection against every morphism between site
    // spaces, streamed without materializing action matrices.
    try {
        std::vector<std::uint32_t> img, colkey;
        std::vector<char> kin;
        std::vector<std::uint64_t> rowkey;
        for (unsigned vi = 0; vi < ns; ++vi) {
            const unsigned vdim = cert.site[vi].dim();
            const std::uint32_t vsz = 1u << vdim;
            img.assign(vsz, 0);
            kin.assign(vsz, 0);
            colkey.assign(vdim, 0);
            const PlaneTab& ptV = ptab[vi];
            for (unsigned wi = 0; wi < ns; ++wi) {
                const unsigned wdim = cert.site[wi].dim();
                const PlaneTab& ptW = ptab[wi];
                tq::enumerate_hom(sps[vi], sps[wi], [&](const TqMorphism& t) {
                    ++rep.morphisms_checked;
                    for (unsigned j = 0; j < vdim; ++j)
                        colkey[j] = static_cast<std::uint32_t>(t.a().col(j).low_word());
                    for (std::uint32_t x = 1; x < vsz; ++x)
                        img[x] = img[x & (x - 1)] ^ colkey[std::countr_zero(x)];
                    std::fill(kin.begin(), kin.end(), char{0});
                    const unsigned kd = t.k().dim();
                    rowkey.assign(kd, 0);
                    for (unsigned rr = 0; rr < kd; ++rr)
                        rowkey[rr] = t.k().basis().row(rr).low_word();
                    for (std::uint32_t sset = 0; sset < (1u << kd); ++sset) {
                        std::uint64_t key = 0;
                        for (unsigned rr = 0; rr < kd; ++rr)
                            if (sset & (1u << rr)) key ^= rowkey[rr];
                        kin[key] = 1;
                    }

                    // Composite of a decoded target basis morphism with t.
                    auto comp_idx = [&](const std::array<std::uint32_t, 3>& d) -> int {
                        unsigned nk;
                        if (d[2] == 0) nk = 0;
                        else if (d[2] == 4) {
                            const bool s1 = kin[d[0]], s2 = kin[d[1]], s3 = kin[d[0] ^ d[1]];
                            nk = (s1 && s2) ? 4 : s1 ? 1 : s2 ? 2 : s3 ? 3 : 0;
                        } else {
                            nk = kin[line_image(d[2], d[0], d[1])] ? d[2] : 0;
                        }
                        return ptW.at(img[d[0]], img[d[1]], nk);
                    };

                    std::array<std::uint32_t, 8> acc{};
                    unsigned acnt = 0;
                    auto toggle = [&](std::uint32_t x) {
                        for (unsigned a = 0; a < acnt; ++a)
                            if (acc[a] == x) {
                                acc[a] = acc[--acnt];
                                return;
                            }
                        acc[acnt++] = x;
                    };

                    for (unsigned s = 0; s < nsum; ++s) {
                        const SumRt& r = rt[s];
                        const Support& sv = r.sup[vi];
                        const Support& sw = r.sup[wi];
                        const unsigned cols = r.dims[vi];
                        for (unsigned n = 0; n < cols; ++n) {
                            acnt = 0;
                            for (std::uint32_t e = sv.off[n]; e < sv.off[n + 1]; ++e) {
                                int q = comp_idx(ptV.dec[sv.flat[e]]);
                                if (q < 0)
                                    throw abort_failure{"internal: composite missing from the table"};
                                toggle(static_cast<std::uint32_t>(q));
                            }
                            int np = -1;
                            switch (r.kind) {
                                case Kind::pf2: {
                                    const std::uint32_t c0 = n & (vsz - 1), c1 = n >> vdim;
                                    np = static_cast<int>(img[c0] | (img[c1] << wdim));
                                    break;
                                }
                                case Kind::mixk: {
                                    auto [k1, k2] = r.tabs[vi].dec[n];
                                    if (kin[k1 ^ k2]) {
                                        np = r.tabs[wi].at(img[k1], img[k2]);
                                        if (np < 0)
                                            throw abort_failure{"internal: mixed-pair image missing"};
                                    }
                                    break;
                                }
                                case Kind::iso: {
                                    auto [c0, c1] = r.tabs[vi].dec[n];
                                    if (kin[c0] && kin[c1]) {
                                        np = r.tabs[wi].at(img[c0], img[c1]);
                                        if (np < 0)
                                            throw abort_failure{"internal: embedding image missing"};
                                    }
                                    break;
                                }
                                case Kind::sub0: {
                                    const auto& d = ptV.dec[n];
                                    np = ptW.at(img[d[0]], img[d[1]], 0);
                                    break;
                                }
                                case Kind::layer1: {
                                    const auto& d = ptV.dec[ptV.r1s + n];
                                    if (kin[line_image(d[2], d[0], d[1])]) {
                                        const int g = ptW.at(img[d[0]], img[d[1]], d[2]);
                                        if (g < 0)
                                            throw abort_failure{"internal: rank-1 image missing"};
                                        np = g - static_cast<int>(ptW.r1s);
                                    }
                                    break;
                                }
                                case Kind::top: {
                                    const auto& d = ptV.dec[ptV.r2s + n];
                                    if (kin[d[0]] && kin[d[1]]) {
                                        const int g = ptW.at(img[d[0]], img[d[1]], 4);
                                        if (g < 0)
                                            throw abort_failure{"internal: full-rank image missing"};
                                        np = g - static_cast<int>(ptW.r2s);
                                    }
                                    break;
                                }
                            }
                            if (np >= 0)
                                for (std::uint32_t e = sw.off[np]; e < sw.off[np + 1]; ++e)
                                    toggle(sw.flat[e]);
                            if (acnt != 0)
                                throw abort_failure{"naturality fails for summand " + r.name +
                                                    ", column " + std::to_string(n) + ", morphism " +
                                                    t.to_string() + " : " + cert.site[vi].name() +
                                                    " -> " + cert.site[wi].name()};
                        }
                    }
                });
            }
        }
    } catch (const abort_failure& f) {
        rep.detail = f.detail;
        return rep;
    }

    rep.ok = true;
    std::ostringstream os;
    os << "verified " << nsum << " injections against " << rep.morphisms_checked
       << " site morphisms";
    rep.detail = os.str();
    rep.notes.push_back("projector family checked explicitly at every site space");
    return rep;
}

namespace {

DecompCertificate verify_or_throw(DecompCertificate cert) {
    cert.report = verify_certificate(cert);
    if (!cert.report.ok)
        throw std::logic_error("certificate verification failed for " + cert.target + ": " +
                               cert.report.detail);
    return cert;
}

}  // namespace

DecompCertificate verify_split(bool eps, const std::vector<QuadSpace>& site) {
    return verify_or_throw(split_certificate(eps, site));
}

DecompCertificate verify_ph0(const std::vector<QuadSpace>& site) {
    return verify_or_throw(decomposition_certificate(false, site));
}

DecompCertificate verify_ph1(const std::vector<QuadSpace>& site) {
    return verify_or_throw(decomposition_certificate(true, site));
}

// ---------------------------------------------------------------------------
// Endomorphism rings
// ---------------------------------------------------------------------------

namespace {

BitVec flatten_transform(const NatTransform& nt, const std::vector<QuadSpace>& site,
                         unsigned width) {
    BitVec out(width);
    unsigned at = 0;
    for (const auto& v : site) {
        const BitMat& m = nt.at(v);
        for (unsigned i = 0; i < m.rows(); ++i)
            for (unsigned j = 0; j < m.cols(); ++j) {
                if (m.get(i, j)) out.set(at, true);
                ++at;
            }
    }
    return out;
}

}  // namespace

EndRing end_ring(const fn::FunctorPtr& f, const std::vector<QuadSpace>& site) {
    fn::HomSolveResult hs = fn::hom_space(f, f, site);
    EndRing ring{f, std::move(hs.basis), {}, std::move(hs.method), std::move(hs.notes)};

    unsigned trunc = 0;
    unsigned width = 0;
    for (const auto& v : site) {
        trunc = std::max(trunc, v.dim());
        const unsigned d = f->value(v).dim();
        width += d * d;
    }
    ring.notes.push_back("site truncation dimension: " + std::to_string(trunc));
    ring.notes.push_back(
        "transformations out of a functor generated at a site space are determined by their "
        "component there, so the truncated site computes the full ring for such functors");

    const unsigned d = ring.dim();
    std::vector<BitVec> flats;
    flats.reserve(d);
    for (const auto& b : ring.basis) flats.push_back(flatten_transform(b, site, width));
    BitMat bmat = BitMat::from_cols(width, flats);

    NatTransform idn{f, f, {}};
    for (const auto& v : site) {
        const unsigned fd = f->value(v).dim();
        idn.comp.emplace(space_key(v), BitMat::identity(fd));
    }
    auto idc = gf2::solve(bmat, flatten_transform(idn, site, width));
    if (!idc) throw std::logic_error("end_ring: the identity is outside the computed span");
    ring.notes.push_back("identity coordinates: " + idc->to_string());

    ring.table.assign(d, std::vector<BitVec>(d));
    for (unsigned i = 0; i < d; ++i)
        for (unsigned j = 0; j < d; ++j) {
            NatTransform prod = fn::nat_compose(ring.basis[i], ring.basis[j]);
            auto coords = gf2::solve(bmat, flatten_transform(prod, site, width));
            if (!coords)
                throw std::logic_error("end_ring: composition leaves the computed span");
            ring.table[i][j] = std::move(*coords);
        }
    return ring;
}

std::vector<BitVec> find_idempotents(const EndRing& ring) {
    const unsigned d = ring.dim();
    if (d > 20)
        throw std::invalid_argument("find_idempotents: ring dimension exceeds 20");
    std::vector<BitVec> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
        BitVec x(d), sq(d);
        for (unsigned i = 0; i < d; ++i)
            if (mask & (std::uint64_t{1} << i)) x.set(i, true);
        for (unsigned i = 0; i < d; ++i) {
            if (!x.get(i)) continue;
            for (unsigned j = 0; j < d; ++j)
                if (x.get(j)) sq ^= ring.table[i][j];
        }
        if (sq == x) out.push_back(std::move(x));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Top quotient vs the embedding functor
// ---------------------------------------------------------------------------

TopQuotientReport verify_top_quotient(const QuadSpace& v, const std::vector<QuadSpace>& site) {
    if (v.dim() != 2 || !quad::is_nondegenerate(v))
        throw std::invalid_argument("verify_top_quotient: the base must be one of the two planes");
    if (site.empty()) throw std::invalid_argument("verify_top_quotient: empty site");

    TopQuotientReport rep;
    const fn::FunctorPtr top = fn::projective_layer(v, 2, fn::LayerMode::quotient_top);
    const fn::FunctorPtr emb = fn::iso_nondeg(v);
    const SpacePtr pl = tq::share(v);
    const unsigned ns = static_cast<unsigned>(site.size());

    // Decode both bases per space and align them by the underlying matrix.
    std::vector<SpacePtr> sps;
    std::vector<PairTab> ttab(ns), etab(ns);
    std::vector<std::vector<std::uint32_t>> relab(ns);  // top index -> embedding index
    for (unsigned i = 0; i < ns; ++i) {
        const QuadSpace& w = site[i];
        sps.push_back(tq::share(w));
        const unsigned wdim = w.dim();
        const FunctorValue& tv = top->value(w);
        const FunctorValue& ev = emb->value(w);

        const auto embeddings = quad::all_isometric_embeddings(v, w);
        if (tv.dim() != embeddings.size() || ev.dim() != embeddings.size()) {
            rep.detail = "dimension mismatch at " + w.name() + ": top quotient has " +
                         std::to_string(tv.dim()) + ", embedding count is " +
                         std::to_string(embeddings.size());
            return rep;
        }
        for (unsigned n = 0; n < ev.dim(); ++n)
            if (ev.labels[n] != embeddings[n].map.to_string()) {
                rep.detail = "embedding basis does not match the census at " + w.name();
                return rep;
            }
        etab[i] = build_iso_tab(wdim, ev.labels);

        ttab[i] = make_pair_tab(wdim);
        unsigned n = 0;
        tq::enumerate_hom(pl, sps[i], [&](const TqMorphism& m) {
            if (m.rank() != 2) return;
            if (n >= tv.dim() || tv.labels[n] != m.to_string())
                throw std::logic_error("verify_top_quotient: top basis does not match the hom-set");
            ttab[i].insert(static_cast<std::uint32_t>(m.a().col(0).low_word()),
                           static_cast<std::uint32_t>(m.a().col(1).low_word()));
            ++n;
        });

        relab[i].resize(tv.dim());
        std::vector<char> seen(ev.dim(), 0);
        for (unsigned m = 0; m < tv.dim(); ++m) {
            auto [c0, c1] = ttab[i].dec[m];
            int e = etab[i].at(c0, c1);
            if (e < 0 || seen[static_cast<unsigned>(e)]) {
                rep.detail = "basis relabeling is not a bijection at " + w.name();
                return rep;
            }
            seen[static_cast<unsigned>(e)] = 1;
            relab[i][m] = static_cast<std::uint32_t>(e);
        }
        rep.dims.emplace_back(w.name(), std::make_pair(tv.dim(), static_cast<unsigned>(embeddings.size())));
    }

    // Naturality of the relabeling against every site morphism.
    std::vector<std::uint32_t> img, colkey;
    std::vector<char> kin;
    for (unsigned vi = 0; vi < ns; ++vi) {
        const unsigned vdim = site[vi].dim();
        const std::uint32_t vsz = 1u << vdim;
        img.assign(vsz, 0);
        kin.assign(vsz, 0);
        colkey.assign(vdim, 0);
        for (unsigned wi = 0; wi < ns; ++wi) {
            std::string fail;
            tq::enumerate_hom(sps[vi], sps[wi], [&](const TqMorphism& t) {
                ++rep.morphisms_checked;
                if (!fail.empty()) return;
                for (unsigned j = 0; j < vdim; ++j)
                    colkey[j] = static_cast<std::uint32_t>(t.a().col(j).low_word());
                for (std::uint32_t x = 1; x < vsz; ++x)
                    img[x] = img[x & (x - 1)] ^ colkey[std::countr_zero(x)];
                std::fill(kin.begin(), kin.end(), char{0});
                const unsigned kd = t.k().dim();
                for (std::uint32_t sset = 0; sset < (1u << kd); ++sset) {
                    std::uint64_t key = 0;
                    for (unsigned rr = 0; rr < kd; ++rr)
                        if (sset & (1u << rr)) key ^= t.k().basis().row(rr).low_word();
                    kin[key] = 1;
                }
                for (unsigned n = 0; n < ttab[vi].dec.size(); ++n) {
                    auto [c0, c1] = ttab[vi].dec[n];
                    const bool keep = kin[c0] && kin[c1];
                    const int tn = keep ? ttab[wi].at(img[c0], img[c1]) : -1;
                    const int en = keep ? etab[wi].at(img[c0], img[c1]) : -1;
                    const int lhs = en;
                    const int rhs = tn < 0 ? -1 : static_cast<int>(relab[wi][static_cast<unsigned>(tn)]);
                    if (lhs != rhs) {
                        fail = "natural map fails for basis " + std::to_string(n) + ", morphism " +
                               t.to_string() + " : " + site[vi].name() + " -> " + site[wi].name();
                        return;
                    }
                }
            });
            if (!fail.empty()) {
                rep.detail = std::move(fail);
                return rep;
            }
        }
    }

    rep.ok = true;
    rep.detail = "top quotient matches the embedding functor at every site space";
    return rep;
}

// ---------------------------------------------------------------------------
// Survey of the small functors
// ---------------------------------------------------------------------------

std::vector<SurveyRow> simple_survey(const std::vector<QuadSpace>& site) {
    static const char* names[] = {"const",          "iota:Lambda1",    "iota:Lambda2",
                                  "iso:x0",         "iso:x1",          "ktilde:H0:triv",
                                  "ktilde:H1:triv", "ktilde:H1:nat"};
    const QuadSpace h0 = QuadSpace::parse("H0");
    const QuadSpace h1 = QuadSpace::parse("H1");
    std::vector<SurveyRow> out;
    for (const char* name : names) {
        fn::FunctorPtr f = fn::parse_functor(name);
        SurveyRow row;
        row.name = name;
        row.dim_h0 = f->value(h0).dim();
        row.dim_h1 = f->value(h1).dim();
        for (bool eps : {false, true}) {
            fn::FunctorPtr d = fn::delta(eps, f);
            bool zero = true;
            for (const auto& v : site)
                if (d->value(v).dim() != 0) { zero = false; break; }
            (eps ? row.delta1_zero : row.delta0_zero) = zero;
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace fquad::decomp
