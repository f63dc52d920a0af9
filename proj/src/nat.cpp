#include "fquad/nat.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace fquad::fn {

using tq::all_hom;
using tq::SpacePtr;
using tq::share;

std::vector<QuadSpace> default_site(unsigned max_dim) {
    if (max_dim < 2 || max_dim % 2 != 0)
        throw std::invalid_argument("default_site: max_dim must be even and >= 2");
    std::vector<QuadSpace> out{QuadSpace::parse("0")};
    for (unsigned d = 2; d <= max_dim; d += 2) {
        std::string arf0, arf1;
        for (unsigned i = 0; i + 2 < d; i += 2) {
            arf0 += "H0+";
            arf1 += "H0+";
        }
        out.push_back(QuadSpace::parse(arf0 + "H0"));
        out.push_back(QuadSpace::parse(arf1 + "H1"));
    }
    return out;
}

const BitMat& NatTransform::at(const QuadSpace& s) const {
    auto it = comp.find(space_key(s));
    if (it == comp.end())
        throw std::invalid_argument("nat transform has no component at this space");
    return it->second;
}

NatTransform nat_compose(const NatTransform& b, const NatTransform& a) {
    if (a.to->name() != b.from->name())
        throw std::invalid_argument("nat_compose: middle functors differ");
    NatTransform out{a.from, b.to, {}};
    for (const auto& [key, am] : a.comp) {
        auto it = b.comp.find(key);
        if (it == b.comp.end())
            throw std::invalid_argument("nat_compose: components over different sites");
        out.comp.emplace(key, it->second.mul(am));
    }
    return out;
}

NatTransform nat_invert(const NatTransform& n) {
    NatTransform out{n.to, n.from, {}};
    for (const auto& [key, m] : n.comp) {
        auto inv = gf2::invert(m);
        if (!inv) throw std::invalid_argument("nat_invert: component is singular");
        out.comp.emplace(key, *inv);
    }
    return out;
}

std::optional<std::string> verify_natural(const NatTransform& nt,
                                          const std::vector<QuadSpace>& site) {
    std::vector<SpacePtr> ptrs;
    for (const auto& s : site) {
        if (!nt.has(s)) return "missing component at " + s.name();
        const BitMat& c = nt.comp.at(space_key(s));
        if (c.rows() != nt.to->value(s).dim() || c.cols() != nt.from->value(s).dim())
            return "component shape mismatch at " + s.name();
        ptrs.push_back(share(s));
    }
    for (size_t v = 0; v < site.size(); ++v)
        for (size_t w = 0; w < site.size(); ++w) {
            const BitMat& cv = nt.comp.at(space_key(site[v]));
            const BitMat& cw = nt.comp.at(space_key(site[w]));
            std::optional<std::string> fail;
            tq::enumerate_hom(ptrs[v], ptrs[w], [&](const tq::TqMorphism& t) {
                if (fail) return;
                if (!(nt.to->act(t).mul(cv) == cw.mul(nt.from->act(t))))
                    fail = "naturality fails on " + site[v].name() + " -> " +
                           site[w].name() + " at " + t.to_string();
            });
            if (fail) return fail;
        }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Hom-space solvers
// ---------------------------------------------------------------------------

namespace {

// Incremental echelon over F2 without coefficient tracking.
struct PlainEchelon {
    std::vector<BitVec> rows;
    std::vector<int> pos;

    void insert(BitVec v) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (v.get(static_cast<unsigned>(pos[i]))) v ^= rows[i];
        if (v.is_zero()) return;
        pos.push_back(v.lowest_set());
        rows.push_back(std::move(v));
    }
    Subspace solution_space(unsigned width) const {
        return gf2::kernel(BitMat::from_rows(width, rows));
    }
};

// Echelon with expansion tracking over the original (unreduced) vectors.
struct TrackedSection {
    unsigned fdim = 0;
    std::vector<BitVec> orig, resid, combo;
    std::vector<int> pos;
    std::vector<std::pair<int, unsigned>> source;  // (hom index, m) per pivot

    // Insert v reached as (hom ti, column m); returns its expansion over the
    // stored originals when dependent, nullopt when it became a new pivot.
    std::optional<BitVec> insert(const BitVec& v, int ti, unsigned m) {
        BitVec cur = v, cmb(fdim);
        for (std::size_t i = 0; i < resid.size(); ++i)
            if (cur.get(static_cast<unsigned>(pos[i]))) {
                cur ^= resid[i];
                cmb ^= combo[i];
            }
        if (cur.is_zero()) return cmb;
        cmb.set(static_cast<unsigned>(orig.size()), true);
        orig.push_back(v);
        resid.push_back(std::move(cur));
        combo.push_back(std::move(cmb));
        pos.push_back(resid.back().lowest_set());
        source.emplace_back(ti, m);
        return std::nullopt;
    }
    BitVec expand(const BitVec& v) const {
        BitVec cur = v, cmb(fdim);
        for (std::size_t i = 0; i < resid.size(); ++i)
            if (cur.get(static_cast<unsigned>(pos[i]))) {
                cur ^= resid[i];
                cmb ^= combo[i];
            }
        if (!cur.is_zero())
            throw std::logic_error("hom_space: expansion outside the section span");
        return cmb;
    }
    bool complete() const { return resid.size() == fdim; }
};

struct SpaceWork {
    QuadSpace space;
    std::vector<tq::TqMorphism> homs;  // V0 -> this space
    std::vector<BitMat> F, G, Gt;      // f.act, g.act, g.act transposed
    TrackedSection sec;
    std::set<std::pair<int, unsigned>> pivotal;
};

void xor_embed(BitVec& acc, const BitVec& src, unsigned at) {
    for (unsigned r = 0; r < src.len(); ++r)
        if (src.get(r)) acc.set(at + r, !acc.get(at + r));
}

BitVec mul_tr(const BitMat& gt, const BitVec& v) {
    BitVec out(gt.cols());
    for (unsigned r = 0; r < v.len(); ++r)
        if (v.get(r)) out ^= gt.row(r);
    return out;
}

BitMat unflatten(const BitVec& x, unsigned r_dim, unsigned c_dim) {
    BitMat m(r_dim, c_dim);
    for (unsigned c = 0; c < c_dim; ++c)
        for (unsigned r = 0; r < r_dim; ++r)
            if (x.get(c * r_dim + r)) m.set(r, c, true);
    return m;
}

// Builds the generator-determined solution over V0 = site[i0], or nullopt
// when f is not generated there.
std::optional<HomSolveResult> solve_generated(const FunctorPtr& f, const FunctorPtr& g,
                                              const std::vector<QuadSpace>& site,
                                              const std::vector<SpacePtr>& ptrs,
                                              std::size_t i0) {
    const unsigned c_dim = f->value(site[i0]).dim();
    const unsigned r_dim = g->value(site[i0]).dim();
    std::vector<SpaceWork> works(site.size());
    for (std::size_t w = 0; w < site.size(); ++w) {
        SpaceWork& sw = works[w];
        sw.space = site[w];
        sw.homs = all_hom(ptrs[i0], ptrs[w]);
        sw.sec.fdim = f->value(site[w]).dim();
        sw.F.reserve(sw.homs.size());
        sw.G.reserve(sw.homs.size());
        for (std::size_t ti = 0; ti < sw.homs.size(); ++ti) {
            sw.F.push_back(f->act(sw.homs[ti]));
            sw.G.push_back(f == g ? sw.F.back() : g->act(sw.homs[ti]));
            sw.Gt.push_back(sw.G.back().transpose());
            for (unsigned m = 0; m < c_dim; ++m)
                if (!sw.sec.insert(sw.F.back().col(m), static_cast<int>(ti), m))
                    sw.pivotal.emplace(static_cast<int>(ti), m);
        }
        if (!sw.sec.complete()) return std::nullopt;
    }

    // Phase A: naturality constraints within End(V0) pin down the component
    // at V0 (the only unknown).
    const unsigned width = r_dim * c_dim;  // layout: entry (r, m) at m*r_dim + r
    PlainEchelon endo;
    {
        const SpaceWork& sw = works[i0];
        for (std::size_t ti = 0; ti < sw.homs.size(); ++ti)
            for (unsigned m = 0; m < c_dim; ++m) {
                if (sw.pivotal.count({static_cast<int>(ti), m})) continue;
                BitVec cmb = sw.sec.expand(sw.F[ti].col(m));
                for (unsigned i = 0; i < r_dim; ++i) {
                    BitVec row(width);
                    xor_embed(row, sw.G[ti].row(i), m * r_dim);
                    for (unsigned j = 0; j < sw.sec.orig.size(); ++j)
                        if (cmb.get(j))
                            xor_embed(row, sw.G[sw.sec.source[j].first].row(i),
                                      sw.sec.source[j].second * r_dim);
                    endo.insert(std::move(row));
                }
            }
    }
    Subspace cand = endo.solution_space(width);
    std::vector<BitMat> xs;
    for (unsigned k = 0; k < cand.dim(); ++k)
        xs.push_back(unflatten(cand.basis().row(k), r_dim, c_dim));

    // Phase B: evaluate the remaining constraints on the candidate basis.
    PlainEchelon cuts;
    const unsigned s = static_cast<unsigned>(xs.size());
    if (s > 0)
        for (std::size_t w = 0; w < site.size(); ++w) {
            if (w == i0) continue;
            const SpaceWork& sw = works[w];
            const unsigned gw = g->value(site[w]).dim();
            if (gw == 0) continue;
            // Images of the pivot definitions under every candidate.
            std::vector<std::vector<BitVec>> piv_img(sw.sec.orig.size());
            for (std::size_t j = 0; j < sw.sec.orig.size(); ++j) {
                const auto& [tj, mj] = sw.sec.source[j];
                piv_img[j].reserve(s);
                for (unsigned k = 0; k < s; ++k)
                    piv_img[j].push_back(mul_tr(sw.Gt[tj], xs[k].col(mj)));
            }
            std::vector<BitVec> dels(s);
            for (std::size_t ti = 0; ti < sw.homs.size(); ++ti)
                for (unsigned m = 0; m < c_dim; ++m) {
                    if (sw.pivotal.count({static_cast<int>(ti), m})) continue;
                    BitVec cmb = sw.sec.expand(sw.F[ti].col(m));
                    bool any = false;
                    for (unsigned k = 0; k < s; ++k) {
                        dels[k] = mul_tr(sw.Gt[ti], xs[k].col(m));
                        for (unsigned j = 0; j < sw.sec.orig.size(); ++j)
                            if (cmb.get(j)) dels[k] ^= piv_img[j][k];
                        any = any || !dels[k].is_zero();
                    }
                    if (!any) continue;
                    for (unsigned i = 0; i < gw; ++i) {
                        BitVec row(s);
                        for (unsigned k = 0; k < s; ++k)
                            if (dels[k].get(i)) row.set(k, true);
                        cuts.insert(std::move(row));
                    }
                }
        }
    Subspace fin = cuts.solution_space(s);

    // Assemble components from the sections.
    std::vector<BitMat> base_inv;
    for (const SpaceWork& sw : works) {
        auto inv = gf2::invert(BitMat::from_cols(sw.sec.fdim, sw.sec.orig));
        if (!inv) throw std::logic_error("hom_space: section basis is singular");
        base_inv.push_back(std::move(*inv));
    }
    HomSolveResult out;
    out.method = "generated@" + site[i0].name();
    for (unsigned sol = 0; sol < fin.dim(); ++sol) {
        BitMat x(r_dim, c_dim);
        for (unsigned k = 0; k < s; ++k)
            if (fin.basis().row(sol).get(k))
                for (unsigned r = 0; r < r_dim; ++r) x.row(r) ^= xs[k].row(r);
        NatTransform nt{f, g, {}};
        for (std::size_t w = 0; w < site.size(); ++w) {
            const SpaceWork& sw = works[w];
            const unsigned gw = g->value(site[w]).dim();
            std::vector<BitVec> ycols;
            for (std::size_t j = 0; j < sw.sec.orig.size(); ++j) {
                const auto& [tj, mj] = sw.sec.source[j];
                ycols.push_back(mul_tr(sw.Gt[tj], x.col(mj)));
            }
            nt.comp.emplace(space_key(site[w]),
                            BitMat::from_cols(gw, ycols).mul(base_inv[w]));
        }
        out.basis.push_back(std::move(nt));
    }
    return out;
}

}  // namespace

HomSolveResult hom_space(const FunctorPtr& f, const FunctorPtr& g,
                         const std::vector<QuadSpace>& site) {
    if (site.empty()) throw std::invalid_argument("hom_space: empty site");
    std::vector<SpacePtr> ptrs;
    for (const auto& sp : site) ptrs.push_back(share(sp));

    bool all_zero = true;
    for (const auto& sp : site) all_zero = all_zero && f->value(sp).dim() == 0;
    if (all_zero) return {{}, "zero", {"source functor vanishes on the site"}};

    std::vector<std::string> notes;
    for (std::size_t i0 = 0; i0 < site.size(); ++i0) {
        if (f->value(site[i0]).dim() == 0) continue;
        if (auto res = solve_generated(f, g, site, ptrs, i0)) {
            res->notes = std::move(notes);
            return std::move(*res);
        }
        notes.push_back("not generated at " + site[i0].name());
    }
    notes.push_back("falling back to the stacked solver");
    HomSolveResult res = hom_space_stacked(f, g, site);
    res.notes.insert(res.notes.begin(), notes.begin(), notes.end());
    return res;
}

HomSolveResult hom_space_stacked(const FunctorPtr& f, const FunctorPtr& g,
                                 const std::vector<QuadSpace>& site) {
    std::vector<SpacePtr> ptrs;
    std::vector<unsigned> fd, gd, off;
    unsigned width = 0;
    for (const auto& sp : site) {
        ptrs.push_back(share(sp));
        fd.push_back(f->value(sp).dim());
        gd.push_back(g->value(sp).dim());
        off.push_back(width);
        width += fd.back() * gd.back();
    }
    if (width > 4096)
        throw std::invalid_argument("hom_space_stacked: system too large for the dense solver");

    PlainEchelon ech;
    for (std::size_t v = 0; v < site.size(); ++v)
        for (std::size_t w = 0; w < site.size(); ++w)
            tq::enumerate_hom(ptrs[v], ptrs[w], [&](const tq::TqMorphism& t) {
                BitMat ft = f->act(t).transpose();  // rows are columns of f(t)
                BitMat gt = g->act(t);
                for (unsigned i = 0; i < gd[w]; ++i)
                    for (unsigned c = 0; c < fd[v]; ++c) {
                        BitVec row(width);
                        xor_embed(row, gt.row(i), off[v] + c * gd[v]);
                        // eta_W(i, c') coefficients: f(t)[c'][c]
                        for (unsigned cp = 0; cp < fd[w]; ++cp)
                            if (ft.get(c, cp))
                                row.set(off[w] + cp * gd[w] + i,
                                        !row.get(off[w] + cp * gd[w] + i));
                        ech.insert(std::move(row));
                    }
            });

    Subspace sols = ech.solution_space(width);
    HomSolveResult out;
    out.method = "stacked";
    for (unsigned k = 0; k < sols.dim(); ++k) {
        NatTransform nt{f, g, {}};
        for (std::size_t w = 0; w < site.size(); ++w) {
            BitMat m(gd[w], fd[w]);
            for (unsigned c = 0; c < fd[w]; ++c)
                for (unsigned r = 0; r < gd[w]; ++r)
                    if (sols.basis().row(k).get(off[w] + c * gd[w] + r)) m.set(r, c, true);
            nt.comp.emplace(space_key(site[w]), std::move(m));
        }
        out.basis.push_back(std::move(nt));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Named transformations
// ---------------------------------------------------------------------------

NatTransform yoneda(const FunctorPtr& f, const QuadSpace& v, const BitVec& x,
                    const std::vector<QuadSpace>& site) {
    if (x.len() != f->value(v).dim())
        throw std::invalid_argument("yoneda: element does not live in f(v)");
    NatTransform out{projective(v), f, {}};
    SpacePtr vp = share(v);
    for (const auto& w : site) {
        std::vector<BitVec> cols;
        const unsigned rows = f->value(w).dim();
        for (const auto& t : all_hom(vp, share(w))) {
            BitVec col(rows);
            for (unsigned i = 0; i < x.len(); ++i)
                if (x.get(i)) col ^= f->act_column(t, i);
            cols.push_back(std::move(col));
        }
        out.comp.emplace(space_key(w), BitMat::from_cols(rows, cols));
    }
    return out;
}

namespace {

// The four subspaces of the plane that contain a conserved line, plus zero.
std::vector<Subspace> plane_lines() {
    return {Subspace::span(2, {BitVec::from_string("10")}),
            Subspace::span(2, {BitVec::from_string("01")}),
            Subspace::span(2, {BitVec::from_string("11")})};
}

}  // namespace

NatTransform section_s(bool eps, const std::vector<QuadSpace>& site) {
    const std::string p = eps ? "P:H1" : "P:H0";
    NatTransform out{parse_functor(p + ":top"), parse_functor(p), {}};
    SpacePtr pl = share(eps ? QuadSpace::H1() : QuadSpace::H0());
    for (const auto& w : site) {
        const FunctorValue& pv = out.to->value(w);
        std::unordered_map<std::string, int> pidx;
        for (unsigned i = 0; i < pv.dim(); ++i) pidx.emplace(pv.labels[i], i);
        std::vector<BitVec> cols;
        for (const auto& t : all_hom(pl, share(w))) {
            if (t.rank() != 2) continue;
            BitVec col(pv.dim());
            col.set(static_cast<unsigned>(pidx.at(t.to_string())), true);
            for (const auto& line : plane_lines()) {
                tq::TqMorphism companion =
                    tq::make_morphism(t.a(), line, t.source_ptr(), t.target_ptr());
                unsigned at = static_cast<unsigned>(pidx.at(companion.to_string()));
                col.set(at, !col.get(at));
            }
            cols.push_back(std::move(col));
        }
        if (cols.size() != out.from->value(w).dim())
            throw std::logic_error("section_s: column count mismatch");
        out.comp.emplace(space_key(w), BitMat::from_cols(pv.dim(), cols));
    }
    return out;
}

NatTransform layer_section(bool eps, const std::vector<QuadSpace>& site) {
    const std::string p = eps ? "P:H1" : "P:H0";
    NatTransform out{parse_functor(p + ":layer1"), parse_functor(p), {}};
    SpacePtr pl = share(eps ? QuadSpace::H1() : QuadSpace::H0());
    for (const auto& w : site) {
        const FunctorValue& pv = out.to->value(w);
        std::unordered_map<std::string, int> pidx;
        for (unsigned i = 0; i < pv.dim(); ++i) pidx.emplace(pv.labels[i], i);
        std::vector<BitVec> cols;
        for (const auto& t : all_hom(pl, share(w))) {
            if (t.rank() != 1) continue;
            BitVec col(pv.dim());
            col.set(static_cast<unsigned>(pidx.at(t.to_string())), true);
            tq::TqMorphism drop = tq::t_of(t.a(), t.source_ptr(), t.target_ptr());
            unsigned at = static_cast<unsigned>(pidx.at(drop.to_string()));
            col.set(at, !col.get(at));
            cols.push_back(std::move(col));
        }
        if (cols.size() != out.from->value(w).dim())
            throw std::logic_error("layer_section: column count mismatch");
        out.comp.emplace(space_key(w), BitMat::from_cols(pv.dim(), cols));
    }
    return out;
}

NatTransform sigma_iso(unsigned which, const std::vector<QuadSpace>& site) {
    if (which < 1 || which > 6) throw std::invalid_argument("sigma_iso: which must be 1..6");
    const bool eps = which >= 4;
    const char letter = (eps ? "EFG" : "ABC")[(which - 1) % 3];
    const bool alpha = which >= 3;  // 1,2 land in Mix01; 3..6 in Mix11
    NatTransform out{type_layer(eps, letter), mix(alpha), {}};
    SpacePtr pl = share(eps ? QuadSpace::H1() : QuadSpace::H0());
    for (const auto& w : site) {
        const FunctorValue& mv = out.to->value(w);
        std::unordered_map<std::string, int> midx;
        for (unsigned i = 0; i < mv.dim(); ++i) midx.emplace(mv.labels[i], i);
        std::vector<BitVec> cols;
        for (const auto& t : all_hom(pl, share(w))) {
            if (t.rank() != 1) continue;
            tq::GeneratorClass gc = tq::classify_generator(t);
            if (gc.label != letter) continue;
            BitVec p1, p2;
            switch ((which - 1) % 3) {
                case 0: p1 = gc.w, p2 = gc.v ^ gc.w; break;
                case 1: p1 = gc.v, p2 = gc.v ^ gc.w; break;
                default: p1 = gc.v, p2 = gc.w; break;
            }
            BitVec col(mv.dim());
            col.set(static_cast<unsigned>(
                        midx.at("(" + p1.to_string() + "," + p2.to_string() + ")")),
                    true);
            cols.push_back(std::move(col));
        }
        if (cols.size() != out.from->value(w).dim())
            throw std::logic_error("sigma_iso: column count mismatch");
        out.comp.emplace(space_key(w), BitMat::from_cols(mv.dim(), cols));
    }
    return out;
}

}  // namespace fquad::fn
