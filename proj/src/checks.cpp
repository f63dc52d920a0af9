#include "fquad/checks.hpp"

#include "fquad/decomp.hpp"
#include "fquad/json_io.hpp"
#include "fquad/nat.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fquad::checks {

using gf2::BitMat;
using gf2::BitVec;
using gf2::Subspace;
using nlohmann::json;
using quad::QuadSpace;
using tq::SpacePtr;
using tq::TqMorphism;

namespace {

json make_table(std::string name, std::vector<std::string> columns, json rows) {
    return json{{"name", std::move(name)}, {"columns", std::move(columns)}, {"rows", std::move(rows)}};
}

struct Builder {
    CheckResult res;
    json tables = json::array();
    json notes = json::array();
    std::string failure;

    explicit Builder(std::string id) {
        res.id = std::move(id);
        res.ok = true;
    }
    void fail(std::string why) {
        if (res.ok) failure = std::move(why);
        res.ok = false;
    }
    void require(bool cond, const std::string& why) {
        if (!cond) fail(why);
    }
    void note(std::string n) { notes.push_back(std::move(n)); }
    CheckResult finish() {
        res.payload = json{{"schema", "fquad.check/1"}, {"id", res.id}, {"ok", res.ok},
                           {"tables", std::move(tables)}, {"notes", std::move(notes)}};
        if (!res.ok) res.payload["failure"] = failure;
        return std::move(res);
    }
};

// --- certificates ----------------------------------------------------------

CheckResult check_certificate(const std::string& id, bool eps, bool split,
                              const CheckOptions& opts) {
    Builder b(id);
    const auto site = fn::default_site(opts.max_dim);
    decomp::DecompCertificate cert = split ? decomp::split_certificate(eps, site)
                                           : decomp::decomposition_certificate(eps, site);
    cert.report = decomp::verify_certificate(cert);
    b.require(cert.report.ok, cert.report.detail);

    std::vector<std::string> cols{"space"};
    for (const auto& sm : cert.summands) cols.push_back(sm.name);
    cols.push_back(cert.target);
    json rows = json::array();
    for (const auto& [space, row] : cert.report.dims) {
        json r = json::array();
        r.push_back(space);
        for (unsigned d : row) r.push_back(d);
        rows.push_back(std::move(r));
    }
    b.tables.push_back(make_table("summand dimensions", std::move(cols), std::move(rows)));
    b.note("site morphisms checked: " + std::to_string(cert.report.morphisms_checked));
    if (cert.report.ok) b.note(cert.report.detail);
    return b.finish();
}

// --- the five-case composition table ---------------------------------------

char letter_for_line(unsigned key) { return key == 1 ? 'A' : key == 2 ? 'B' : 'C'; }

CheckResult check_composition_table(const std::string& id, const CheckOptions& opts) {
    Builder b(id);
    const QuadSpace h0 = QuadSpace::parse("H0");
    const SpacePtr pl = tq::share(h0);
    const auto site = fn::default_site(opts.max_dim);

    const std::vector<TqMorphism> gens = tq::all_hom(pl, pl);
    std::map<std::string, unsigned long long> buckets{
        {"rank-0 absorbs", 0},          {"rank-1, conserved line kept", 0},
        {"rank-1, conserved line lost", 0}, {"full rank preserved", 0},
        {"full rank cut to a line", 0}, {"full rank collapsed", 0}};

    for (const auto& w : site) {
        const SpacePtr ws = tq::share(w);
        tq::enumerate_hom(pl, ws, [&](const TqMorphism& t) {
            for (const TqMorphism& g : gens) {
                const TqMorphism got = tq::compose(t, g);
                const BitMat a = t.a().mul(g.a());
                if (g.rank() == 0) {
                    ++buckets["rank-0 absorbs"];
                    b.require(got == tq::t_of(a, pl, ws),
                              "rank-0 composite mismatch for " + t.to_string() + " after " +
                                  g.to_string());
                } else if (g.rank() == 1) {
                    const BitVec gen = g.k().basis().row(0);
                    if (t.k().contains(g.a().apply(gen))) {
                        ++buckets["rank-1, conserved line kept"];
                        b.require(got == tq::make_morphism(a, g.k(), pl, ws),
                                  "conserved rank-1 composite mismatch for " + t.to_string() +
                                      " after " + g.to_string());
                        b.require(tq::classify_generator(got).label ==
                                      tq::classify_generator(g).label,
                                  "rank-1 composite changed type for " + g.to_string());
                    } else {
                        ++buckets["rank-1, conserved line lost"];
                        b.require(got == tq::t_of(a, pl, ws),
                                  "collapsed rank-1 composite mismatch for " + t.to_string() +
                                      " after " + g.to_string());
                    }
                } else {
                    const Subspace kept = gf2::preimage(g.a(), t.k());
                    if (kept.dim() == 2) {
                        ++buckets["full rank preserved"];
                        b.require(got == tq::make_morphism(a, Subspace::full(2), pl, ws),
                                  "full-rank composite mismatch for " + t.to_string());
                    } else if (kept.dim() == 1) {
                        ++buckets["full rank cut to a line"];
                        b.require(got == tq::make_morphism(a, kept, pl, ws),
                                  "restricted full-rank composite mismatch for " + t.to_string());
                        b.require(tq::classify_generator(got).label ==
                                      letter_for_line(static_cast<unsigned>(
                                          kept.basis().row(0).low_word())),
                                  "restricted composite carries the wrong line");
                    } else {
                        ++buckets["full rank collapsed"];
                        b.require(got == tq::t_of(a, pl, ws),
                                  "collapsed full-rank composite mismatch for " + t.to_string());
                    }
                }
            }
        });
    }

    json rows = json::array();
    unsigned long long total = 0;
    for (const auto& [name, count] : buckets) {
        rows.push_back(json::array({name, count}));
        total += count;
    }
    b.tables.push_back(make_table("composition cases", {"case", "composites"}, std::move(rows)));
    b.note("composites checked: " + std::to_string(total));
    return b.finish();
}

// --- top quotients ----------------------------------------------------------

CheckResult check_top_quotient(const std::string& id, bool eps, const CheckOptions& opts) {
    Builder b(id);
    const auto site = fn::default_site(opts.max_dim);
    decomp::TopQuotientReport rep =
        decomp::verify_top_quotient(QuadSpace::parse(eps ? "H1" : "H0"), site);
    b.require(rep.ok, rep.detail);
    json rows = json::array();
    for (const auto& [space, pr] : rep.dims)
        rows.push_back(json::array({space, pr.first, pr.second}));
    b.tables.push_back(
        make_table("top quotient vs embeddings", {"space", "dim", "embeddings"}, std::move(rows)));
    b.note("site morphisms checked: " + std::to_string(rep.morphisms_checked));
    return b.finish();
}

// --- endomorphism rings ------------------------------------------------------

int table_identity(const decomp::EndRing& ring) {
    for (unsigned i = 0; i < ring.dim(); ++i) {
        bool ok = true;
        for (unsigned j = 0; j < ring.dim() && ok; ++j)
            ok = ring.table[i][j] == BitVec::unit(ring.dim(), j) &&
                 ring.table[j][i] == BitVec::unit(ring.dim(), j);
        if (ok) return static_cast<int>(i);
    }
    return -1;
}

CheckResult check_mix_indecomposable(const std::string& id, const CheckOptions& opts) {
    Builder b(id);
    const auto site = fn::default_site(opts.max_dim);
    json rows = json::array();
    for (const char* name : {"Mix01", "Mix11"}) {
        decomp::EndRing ring = decomp::end_ring(fn::parse_functor(name), site);
        const int idn = table_identity(ring);
        std::vector<BitVec> idem = decomp::find_idempotents(ring);
        rows.push_back(json::array({name, ring.dim(), idem.size(), ring.method}));
        b.require(ring.dim() == 2, std::string(name) + ": ring dimension is not 2");
        b.require(idn >= 0, std::string(name) + ": multiplication table has no identity");
        b.require(idem.size() == 2, std::string(name) + ": unexpected idempotent count");
        for (const BitVec& e : idem)
            b.require(e.is_zero() || (idn >= 0 && e == BitVec::unit(ring.dim(),
                                                                    static_cast<unsigned>(idn))),
                      std::string(name) + ": nontrivial idempotent found");
        if (ring.dim() == 2 && idn >= 0) {
            const unsigned tau = 1u - static_cast<unsigned>(idn);
            b.require(ring.table[tau][tau] == BitVec::unit(2, static_cast<unsigned>(idn)),
                      std::string(name) + ": the non-identity basis element is not an involution");
        }
    }
    b.tables.push_back(make_table("mixed-functor endomorphism rings",
                                  {"functor", "ring dim", "idempotents", "method"},
                                  std::move(rows)));
    b.note("an indecomposable functor has no idempotents besides 0 and the identity");
    return b.finish();
}

// --- the rank-0 projector ----------------------------------------------------

CheckResult check_e_idempotent(const std::string& id, const CheckOptions& opts) {
    Builder b(id);
    const auto site = fn::default_site(opts.max_dim);
    std::vector<QuadSpace> small;
    for (const auto& v : site)
        if (v.dim() <= 2) small.push_back(v);

    json rows = json::array();
    for (bool eps : {false, true}) {
        const QuadSpace pl = QuadSpace::parse(eps ? "H1" : "H0");
        // Morphism level: the rank-0 identity is idempotent.
        const TqMorphism e = tq::e_of(pl);
        b.require(tq::compose(e, e) == e, pl.name() + ": rank-0 identity is not idempotent");

        // Ring level: its induced endomorphism of the represented functor
        // projects onto the rank-0 part.
        const fn::FunctorPtr p = fn::parse_functor(std::string("P:") + pl.name());
        const fn::FunctorPtr sub0 = fn::parse_functor(std::string("P:") + pl.name() + ":sub0");
        const auto& labels = p->value(pl).labels;
        unsigned at = 0;
        while (at < labels.size() && labels[at] != e.to_string()) ++at;
        b.require(at < labels.size(), "rank-0 identity not found in the hom basis");
        fn::NatTransform nt = fn::yoneda(p, pl, BitVec::unit(p->value(pl).dim(), at), site);
        for (const auto& w : site) {
            const BitMat& ew = nt.at(w);
            const unsigned rank = gf2::rref(ew).second;
            b.require(ew.mul(ew) == ew, "projector is not idempotent at " + w.name());
            b.require(rank == sub0->value(w).dim(),
                      "projector image has the wrong dimension at " + w.name());
            rows.push_back(json::array({pl.name(), w.name(), rank, p->value(w).dim()}));
        }
        auto bad = fn::verify_natural(nt, small);
        b.require(!bad.has_value(), bad.value_or(""));
    }
    b.tables.push_back(make_table("rank-0 projector images",
                                  {"plane", "space", "projector rank", "hom dim"}, std::move(rows)));
    b.note("naturality swept over the subsite of dimension <= 2; projector identities checked at "
           "every site space");
    return b.finish();
}

// --- rank-0 calculus ----------------------------------------------------------

CheckResult check_orthsum_e(const std::string& id, const CheckOptions& opts) {
    Builder b(id);
    (void)opts;
    const QuadSpace h0 = QuadSpace::parse("H0"), h1 = QuadSpace::parse("H1");
    unsigned long long cases = 0;
    for (const QuadSpace& v : {h0, h1})
        for (const QuadSpace& w : {h0, h1}) {
            const QuadSpace vw = quad::orthogonal_sum(v, w);
            b.require(tq::orth_sum_morphism(tq::e_of(v), tq::e_of(w)) == tq::e_of(vw),
                      "rank-0 identity of " + vw.name() + " is not the block sum");
            ++cases;

            // t_f . t_g = t_{fg} over every pair of linear maps u -> v -> w.
            for (const QuadSpace& u : {h0, h1}) {
                gf2::enumerate_linear_maps(u.dim(), v.dim(), [&](const BitMat& g) {
                    gf2::enumerate_linear_maps(v.dim(), w.dim(), [&](const BitMat& f) {
                        const TqMorphism tf = tq::t_of(f, v, w), tg = tq::t_of(g, u, v);
                        if (!(tq::compose(tf, tg) == tq::t_of(f.mul(g), u, w)))
                            b.fail("rank-0 composition is not multiplicative for " +
                                   tf.to_string() + " after " + tg.to_string());
                        ++cases;
                    });
                });
            }
        }
    b.note("cases checked: " + std::to_string(cases));
    b.tables.push_back(make_table("rank-0 calculus",
                                  {"law", "status"},
                                  json::array({json::array({"block sums of rank-0 identities",
                                                            b.res.ok ? "ok" : "failed"}),
                                               json::array({"rank-0 functoriality",
                                                            b.res.ok ? "ok" : "failed"})})));
    return b.finish();
}

// --- difference functors -------------------------------------------------------

CheckResult check_delta(const std::string& id, const CheckOptions& opts) {
    Builder b(id);
    const auto site = fn::default_site(opts.max_dim);
    json rows = json::array();
    for (const fn::FunctorPtr& f : fn::shipped_functors()) {
        bool zero[2];
        for (bool eps : {false, true}) {
            const fn::FunctorPtr d = fn::delta(eps, f);
            bool z = true;
            for (const auto& v : site)
                if (d->value(v).dim() != 0) { z = false; break; }
            zero[eps ? 1 : 0] = z;
        }
        rows.push_back(json::array({f->name(), zero[0], zero[1]}));
        b.require(zero[0] == zero[1],
                  f->name() + ": the two difference functors disagree about vanishing");
        if (f->name() == "const")
            b.require(zero[0], "the constant functor must have vanishing differences");
        else
            b.require(!zero[0], f->name() + ": difference functor vanished unexpectedly");
    }
    b.tables.push_back(make_table("difference-functor vanishing",
                                  {"functor", "delta0 zero", "delta1 zero"}, std::move(rows)));
    b.note("vanishing tested on every site space; the two flags must always agree");
    return b.finish();
}

// --- survey -----------------------------------------------------------------

CheckResult check_survey(const std::string& id, const CheckOptions& opts) {
    Builder b(id);
    const auto site = fn::default_site(opts.max_dim);
    std::vector<decomp::SurveyRow> rows = decomp::simple_survey(site);
    json tab = json::array();
    for (const auto& r : rows) {
        tab.push_back(json::array({r.name, r.dim_h0, r.dim_h1, r.delta0_zero, r.delta1_zero}));
        if (r.name == "const") {
            b.require(r.delta0_zero && r.delta1_zero, "constant functor has nonzero differences");
        } else {
            b.require(!r.delta0_zero && !r.delta1_zero,
                      r.name + ": difference functor vanished for a non-constant entry");
        }
        if (r.name == "iota:Lambda1")
            b.require(r.dim_h0 == 2 && r.dim_h1 == 2, "unexpected dimensions for iota:Lambda1");
        if (r.name == "iso:x1")
            b.require(r.dim_h0 == 1 && r.dim_h1 == 3, "unexpected dimensions for iso:x1");
    }
    b.tables.push_back(make_table(
        "small-functor survey", {"functor", "dim at H0", "dim at H1", "delta0 zero", "delta1 zero"},
        std::move(tab)));
    return b.finish();
}

// --- Witt extension ------------------------------------------------------------

CheckResult check_witt(const std::string& id, const CheckOptions& opts) {
    Builder b(id);
    (void)opts;
    json rows = json::array();
    for (const char* name : {"H0", "H1", "H0+H1", "H0+H0"}) {
        const QuadSpace v = QuadSpace::parse(name);
        const unsigned n = v.dim();
        unsigned long long extended = 0;
        for (unsigned k = 1; k <= std::min(n, 2u); ++k) {
            const auto subs = gf2::all_subspaces(n, k);
            // Stride the dimension-2 pairs on the dimension-4 ambients to
            // keep the sweep quick; planes are covered exhaustively.
            const size_t step = (n > 2 && k == 2) ? 5 : 1;
            for (size_t i = 0; i < subs.size(); i += step)
                for (size_t j = 0; j < subs.size(); j += step) {
                    const Subspace &d = subs[i], &d2 = subs[j];
                    gf2::enumerate_linear_maps(k, k, [&](const BitMat& c) {
                        if (gf2::rref(c).second != k) return;
                        // Candidate images: combinations of d2's basis.
                        std::vector<BitVec> imgs;
                        for (unsigned col = 0; col < k; ++col)
                            imgs.push_back(d2.basis().transpose().apply(c.col(col)));
                        // Keep only genuine partial isometries.
                        for (unsigned a = 0; a < k; ++a) {
                            const BitVec da = d.basis().row(a);
                            if (v.q(da) != v.q(imgs[a])) return;
                            for (unsigned bb = a + 1; bb < k; ++bb)
                                if (v.b(da, d.basis().row(bb)) != v.b(imgs[a], imgs[bb])) return;
                        }
                        const BitMat fbar = BitMat::from_cols(n, imgs);
                        const quad::Isometry g = quad::witt_extend(v, d, d2, fbar);
                        b.require(quad::is_isometry_matrix(v, v, g.map),
                                  "extension is not an isometry on " + v.name());
                        for (unsigned a = 0; a < k; ++a)
                            b.require(g.map.apply(d.basis().row(a)) == imgs[a],
                                      "extension does not restrict to the partial map on " +
                                          v.name());
                        ++extended;
                    });
                }
        }
        rows.push_back(json::array({name, extended}));
        b.require(extended > 0, std::string("no partial isometries extended on ") + name);
    }
    b.tables.push_back(make_table("partial isometries extended", {"space", "count"}, std::move(rows)));
    b.note("every partial isometry between subspaces extends to the whole space; extensions are "
           "re-validated and checked to restrict correctly");
    return b.finish();
}

// --- isometry classification ----------------------------------------------------

CheckResult check_arf(const std::string& id, const CheckOptions& opts) {
    Builder b(id);
    (void)opts;
    const QuadSpace h0 = QuadSpace::parse("H0"), h1 = QuadSpace::parse("H1");
    const QuadSpace h00 = QuadSpace::parse("H0+H0"), h01 = QuadSpace::parse("H0+H1");
    const QuadSpace h11 = QuadSpace::parse("H1+H1");

    json rows = json::array();
    auto describe = [&](const QuadSpace& s) {
        rows.push_back(json::array(
            {s.name(), s.dim(), quad::arf(s) ? 1 : 0,
             static_cast<unsigned>(quad::all_isometric_embeddings(s, s).size())}));
    };
    for (const QuadSpace* s : {&h0, &h1, &h00, &h01, &h11}) describe(*s);

    b.require(!quad::arf(h0) && quad::arf(h1), "plane arf invariants are wrong");
    b.require(quad::all_isometric_embeddings(h0, h0).size() == 2, "automorphism count of H0 is not 2");
    b.require(quad::all_isometric_embeddings(h1, h1).size() == 6, "automorphism count of H1 is not 6");
    b.require(!quad::arf(h00) && quad::arf(h01) && !quad::arf(h11),
              "arf invariants of the dimension-4 sums are wrong");

    auto iso = quad::is_isometric(h00, h11);
    b.require(iso.has_value(), "H0+H0 and H1+H1 are not matched");
    if (iso) {
        b.require(quad::is_isometry_matrix(h00, h11, iso->map), "returned matrix is not an isometry");
        b.require(gf2::invert(iso->map).has_value(), "returned isometry is not bijective");
    }
    b.require(!quad::is_isometric(h0, h1).has_value(), "the two planes compare isometric");
    b.require(!quad::is_isometric(h00, h01).has_value(),
              "dimension-4 spaces of different arf compare isometric");

    b.tables.push_back(
        make_table("isometry classes", {"space", "dim", "arf", "automorphisms"}, std::move(rows)));
    b.note("spaces of equal dimension are isometric exactly when their arf invariants agree");
    return b.finish();
}

using CheckFn = std::function<CheckResult(const std::string&, const CheckOptions&)>;

const std::vector<std::pair<std::string, CheckFn>>& registry() {
    static const std::vector<std::pair<std::string, CheckFn>> reg = {
        {"ph0-split",
         [](const std::string& id, const CheckOptions& o) { return check_certificate(id, false, true, o); }},
        {"ph1-split",
         [](const std::string& id, const CheckOptions& o) { return check_certificate(id, true, true, o); }},
        {"ph0-decomposition",
         [](const std::string& id, const CheckOptions& o) { return check_certificate(id, false, false, o); }},
        {"ph1-decomposition",
         [](const std::string& id, const CheckOptions& o) { return check_certificate(id, true, false, o); }},
        {"lemma3.9-table", check_composition_table},
        {"top-quotient-H0",
         [](const std::string& id, const CheckOptions& o) { return check_top_quotient(id, false, o); }},
        {"top-quotient-H1",
         [](const std::string& id, const CheckOptions& o) { return check_top_quotient(id, true, o); }},
        {"mix-indecomposable", check_mix_indecomposable},
        {"e-idempotent", check_e_idempotent},
        {"orthsum-e", check_orthsum_e},
        {"delta-lemma4.4", check_delta},
        {"simple-survey", check_survey},
        {"witt-roundtrip", check_witt},
        {"arf-classification", check_arf},
    };
    return reg;
}

}  // namespace

const std::vector<std::string>& check_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> out;
        for (const auto& [id, fn] : registry()) out.push_back(id);
        return out;
    }();
    return ids;
}

bool has_check(const std::string& id) {
    for (const auto& [name, fn] : registry())
        if (name == id) return true;
    return false;
}

CheckResult run_check(const std::string& id, const CheckOptions& opts) {
    for (const auto& [name, fn] : registry())
        if (name == id) return fn(id, opts);
    throw std::invalid_argument("unknown check id: " + id);
}

}  // namespace fquad::checks
