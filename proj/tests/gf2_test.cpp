#include "fquad/gf2.hpp"

#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

using namespace fquad::gf2;

namespace {

// Brute-force rank oracle: count the size of the row space by closure.
unsigned rank_oracle(const BitMat& m) {
    std::set<BitVec> space;
    BitVec zero(m.cols());
    space.insert(zero);
    for (unsigned i = 0; i < m.rows(); ++i) {
        std::set<BitVec> next = space;
        for (const BitVec& v : space) next.insert(v ^ m.row(i));
        space = next;
    }
    unsigned dim = 0;
    while ((1u << dim) < space.size()) ++dim;
    return dim;
}

// Enumerate every vector of F2^n in canonical order.
std::vector<BitVec> all_vectors(unsigned n) {
    std::vector<BitVec> out;
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k)
        out.push_back(BitVec::from_key(n, k));
    return out;
}

// Set-of-elements view of a subspace, for comparing against set oracles.
std::set<BitVec> element_set(const Subspace& s) {
    auto e = s.elements();
    return {e.begin(), e.end()};
}

}  // namespace

TEST_SUITE("gf2") {

TEST_CASE("bitvec basics") {
    BitVec v = BitVec::from_string("0110");
    CHECK(v.len() == 4);
    CHECK_FALSE(v.get(0));
    CHECK(v.get(1));
    CHECK(v.get(2));
    CHECK(v.popcount() == 2);
    CHECK(v.lowest_set() == 1);
    CHECK(v.to_string() == "0110");
    CHECK(v.low_word() == 6);
    CHECK(BitVec::from_key(4, 6) == v);

    BitVec z(4);
    CHECK(z.is_zero());
    CHECK(z.lowest_set() == -1);
    CHECK((v ^ v).is_zero());

    BitVec u = BitVec::unit(4, 3);
    CHECK(u.low_word() == 8);
    CHECK(v.dot(u) == false);
    CHECK(v.dot(BitVec::from_string("0100")) == true);
    CHECK(v.dot(v) == false);  // even weight

    CHECK(v.concat(u).to_string() == "01100001");
    CHECK(v.concat(u).slice(4, 4) == u);
    CHECK(v.slice(1, 2).to_string() == "11");

    CHECK_THROWS_AS(BitVec::from_string("01x"), std::invalid_argument);
}

TEST_CASE("bitvec long vectors cross word boundaries") {
    BitVec v(130);
    v.set(0, true);
    v.set(64, true);
    v.set(129, true);
    CHECK(v.popcount() == 3);
    CHECK(v.get(64));
    CHECK_FALSE(v.get(63));
    BitVec w(130);
    w.set(64, true);
    CHECK(v.dot(w) == true);
    CHECK((v ^ w).popcount() == 2);
    CHECK(v.key() != w.key());
    // Numeric order: the highest differing coordinate decides.
    CHECK(w < v);
}

TEST_CASE("bitvec canonical order matches packed keys") {
    auto vs = all_vectors(5);
    for (size_t i = 0; i + 1 < vs.size(); ++i) {
        CHECK(vs[i] < vs[i + 1]);
        CHECK(vs[i].low_word() == i);
    }
}

TEST_CASE("bitmat apply/mul/transpose agree with coordinate formulas") {
    BitMat m = BitMat::from_string(2, 3, "101;011");
    CHECK(m.to_string() == "101;011");
    // Key convention: bit (i*cols + j) of the key is M[i][j].
    std::uint64_t want_key = 0;
    for (unsigned i = 0; i < 2; ++i)
        for (unsigned j = 0; j < 3; ++j)
            if (m.get(i, j)) want_key |= std::uint64_t{1} << (i * 3 + j);
    CHECK(m.packed_key() == want_key);
    CHECK(want_key == 53);  // rows "101","011" -> bits {0,2} and {4,5}

    // (M v)_i = <row_i, v>, checked exhaustively.
    for (const BitVec& v : all_vectors(3)) {
        BitVec mv = m.apply(v);
        for (unsigned i = 0; i < 2; ++i) CHECK(mv.get(i) == m.row(i).dot(v));
    }

    BitMat n = BitMat::from_string(3, 2, "11;01;10");
    BitMat p = m.mul(n);
    // Composition oracle: apply one after the other on every vector.
    for (const BitVec& v : all_vectors(2)) CHECK(p.apply(v) == m.apply(n.apply(v)));

    BitMat t = m.transpose();
    for (unsigned i = 0; i < 2; ++i)
        for (unsigned j = 0; j < 3; ++j) CHECK(m.get(i, j) == t.get(j, i));

    CHECK(BitMat::identity(3).mul(n) == n);
    CHECK(BitMat::from_key(2, 3, m.packed_key()) == m);
    CHECK(m.col(0) == BitVec::from_string("10"));
    CHECK(m.col(2) == BitVec::from_string("11"));
}

TEST_CASE("direct_sum is block diagonal") {
    BitMat a = BitMat::from_string(2, 2, "11;01");
    BitMat b = BitMat::from_string(1, 3, "101");
    BitMat d = a.direct_sum(b);
    CHECK(d.rows() == 3);
    CHECK(d.cols() == 5);
    for (const BitVec& u : all_vectors(2))
        for (const BitVec& v : all_vectors(3))
            CHECK(d.apply(u.concat(v)) == a.apply(u).concat(b.apply(v)));
}

TEST_CASE("rref rank agrees with closure oracle on all small matrices") {
    for (unsigned r = 1; r <= 3; ++r)
        for (unsigned c = 1; c <= 3; ++c)
            for (std::uint64_t key = 0; key < (std::uint64_t{1} << (r * c)); ++key) {
                BitMat m = BitMat::from_key(r, c, key);
                auto [e, rank] = rref(m);
                CHECK(rank == rank_oracle(m));
                // Row space preserved: every original row reduces to zero.
                Subspace s = Subspace::row_space(e);
                for (unsigned i = 0; i < r; ++i) CHECK(s.contains(m.row(i)));
                CHECK(s.dim() == rank);
                // Idempotent.
                auto [e2, rank2] = rref(e);
                CHECK(e2 == e);
                CHECK(rank2 == rank);
            }
}

TEST_CASE("solve finds a solution exactly when one exists") {
    for (std::uint64_t key = 0; key < (1u << 9); ++key) {
        BitMat m = BitMat::from_key(3, 3, key);
        for (const BitVec& b : all_vectors(3)) {
            auto x = solve(m, b);
            bool any = false;
            for (const BitVec& v : all_vectors(3))
                if (m.apply(v) == b) { any = true; break; }
            CHECK(x.has_value() == any);
            if (x) CHECK(m.apply(*x) == b);
        }
    }
}

TEST_CASE("kernel membership is exact") {
    for (unsigned r = 1; r <= 3; ++r)
        for (unsigned c = 1; c <= 3; ++c)
            for (std::uint64_t key = 0; key < (std::uint64_t{1} << (r * c)); ++key) {
                BitMat m = BitMat::from_key(r, c, key);
                Subspace k = kernel(m);
                for (const BitVec& v : all_vectors(c))
                    CHECK(k.contains(v) == m.apply(v).is_zero());
            }
}

TEST_CASE("subspace span, reduce, and elements") {
    Subspace s = Subspace::span(4, {BitVec::from_string("1100"), BitVec::from_string("0110"),
                                    BitVec::from_string("1010")});
    CHECK(s.dim() == 2);
    CHECK(s.ambient_dim() == 4);
    CHECK(s.elements().size() == 4);
    CHECK(s.contains(BitVec::from_string("1010")));
    CHECK_FALSE(s.contains(BitVec::from_string("1000")));

    // reduce is constant on cosets and zero exactly on members.
    for (const BitVec& v : all_vectors(4)) {
        BitVec rv = s.reduce(v);
        CHECK(s.contains(v ^ rv));
        CHECK(s.contains(v) == rv.is_zero());
        for (const BitVec& w : s.elements()) CHECK(s.reduce(v ^ w) == rv);
    }

    // reduction_matrix realizes reduce as a linear map.
    BitMat rm = s.reduction_matrix();
    for (const BitVec& v : all_vectors(4)) CHECK(rm.apply(v) == s.reduce(v));

    CHECK(Subspace::zero(3).dim() == 0);
    CHECK(Subspace::zero(3).elements().size() == 1);
    CHECK(Subspace::full(3).dim() == 3);
    CHECK(Subspace::zero(0).ambient_dim() == 0);
    CHECK(Subspace::zero(0).elements().size() == 1);
}

TEST_CASE("subspace counts match Gaussian binomials") {
    // Number of d-dimensional subspaces of F2^n.
    auto gauss = [](unsigned n, unsigned d) {
        // Product formula evaluated in integers.
        std::uint64_t num = 1, den = 1;
        for (unsigned i = 0; i < d; ++i) {
            num *= (std::uint64_t{1} << (n - i)) - 1;
            den *= (std::uint64_t{1} << (d - i)) - 1;
        }
        return num / den;
    };
    for (unsigned n = 0; n <= 4; ++n) {
        std::uint64_t total = 0;
        for (unsigned d = 0; d <= n; ++d) {
            auto subs = all_subspaces(n, d);
            CHECK(subs.size() == gauss(n, d));
            total += subs.size();
            // Exactly once: all distinct, sorted strictly increasing.
            for (size_t i = 0; i + 1 < subs.size(); ++i) CHECK(subs[i] < subs[i + 1]);
            // Each really has the advertised dimension.
            for (const Subspace& s : subs) CHECK(s.dim() == d);
        }
        // Cross-check the total against a closure oracle over subsets:
        // every subspace is the span of some subset, so collect spans.
        if (n <= 3) {
            std::set<std::string> keys;
            auto vecs = all_vectors(n);
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << vecs.size()); ++mask) {
                std::vector<BitVec> gens;
                for (size_t i = 0; i < vecs.size(); ++i)
                    if ((mask >> i) & 1u) gens.push_back(vecs[i]);
                keys.insert(Subspace::span(n, gens).key());
            }
            CHECK(keys.size() == total);
        }
    }
    CHECK(all_subspaces(2, 1).size() == 3);
    CHECK(all_subspaces(4, 2).size() == 35);
    CHECK(all_subspaces(4, 1).size() == 15);
    CHECK(all_subspaces(4, 3).size() == 15);
    CHECK(all_subspaces(3, 1).size() == 7);
    CHECK(all_subspaces(3, 2).size() == 7);
}

TEST_CASE("enumerate_subspaces streams the same list all_subspaces returns") {
    std::vector<Subspace> streamed;
    enumerate_subspaces(4, 2, [&](const Subspace& s) { streamed.push_back(s); });
    CHECK(streamed == all_subspaces(4, 2));
}

TEST_CASE("intersect and sum agree with element-set oracles") {
    // All pairs of subspaces of F2^3 (16 x 16).
    std::vector<Subspace> all;
    for (unsigned d = 0; d <= 3; ++d)
        for (const Subspace& s : all_subspaces(3, d)) all.push_back(s);
    CHECK(all.size() == 16);
    for (const Subspace& a : all)
        for (const Subspace& b : all) {
            auto ea = element_set(a), eb = element_set(b);
            std::set<BitVec> want_i;
            std::set_intersection(ea.begin(), ea.end(), eb.begin(), eb.end(),
                                  std::inserter(want_i, want_i.begin()));
            CHECK(element_set(intersect(a, b)) == want_i);

            std::set<BitVec> want_s;
            for (const BitVec& x : ea)
                for (const BitVec& y : eb) want_s.insert(x ^ y);
            CHECK(element_set(sum(a, b)) == want_s);
        }
}

TEST_CASE("modular law spot checks in dimension 4") {
    // a <= c implies a + (b /\ c) = (a + b) /\ c.
    auto a = Subspace::span(4, {BitVec::from_string("1000")});
    auto c = Subspace::span(4, {BitVec::from_string("1000"), BitVec::from_string("0100")});
    for (unsigned d = 0; d <= 4; ++d)
        for (const Subspace& b : all_subspaces(4, d))
            CHECK(sum(a, intersect(b, c)) == intersect(sum(a, b), c));
}

TEST_CASE("preimage and image agree with pointwise oracles") {
    for (std::uint64_t key = 0; key < (1u << 6); ++key) {
        BitMat m = BitMat::from_key(2, 3, key);  // F2^3 -> F2^2
        for (unsigned d = 0; d <= 2; ++d)
            for (const Subspace& s : all_subspaces(2, d)) {
                Subspace pre = preimage(m, s);
                for (const BitVec& v : all_vectors(3))
                    CHECK(pre.contains(v) == s.contains(m.apply(v)));
            }
        for (unsigned d = 0; d <= 3; ++d)
            for (const Subspace& s : all_subspaces(3, d)) {
                Subspace img = image(m, s);
                std::set<BitVec> want;
                for (const BitVec& v : s.elements()) want.insert(m.apply(v));
                CHECK(element_set(img) == want);
            }
    }
}

TEST_CASE("subspaces_of lists exactly the subspaces contained in s") {
    Subspace s = Subspace::span(4, {BitVec::from_string("1100"), BitVec::from_string("0011"),
                                    BitVec::from_string("1111")});
    CHECK(s.dim() == 2);
    for (unsigned d = 0; d <= 2; ++d) {
        auto inner = subspaces_of(s, d);
        // Oracle: filter the global list by containment of every basis row.
        std::vector<Subspace> want;
        for (const Subspace& t : all_subspaces(4, d)) {
            bool inside = true;
            for (unsigned i = 0; i < t.dim(); ++i)
                if (!s.contains(t.basis().row(i))) { inside = false; break; }
            if (inside) want.push_back(t);
        }
        CHECK(inner == want);
    }
}

TEST_CASE("enumerate_linear_maps hits every matrix once in key order") {
    std::vector<std::uint64_t> keys;
    enumerate_linear_maps(2, 3, [&](const BitMat& m) {
        CHECK(m.rows() == 3);
        CHECK(m.cols() == 2);
        keys.push_back(m.packed_key());
    });
    CHECK(keys.size() == 64);
    for (size_t i = 0; i < keys.size(); ++i) CHECK(keys[i] == i);

    // Degenerate shapes still produce the single empty map.
    unsigned n = 0;
    enumerate_linear_maps(0, 3, [&](const BitMat& m) {
        CHECK(m.rows() == 3);
        CHECK(m.cols() == 0);
        ++n;
    });
    CHECK(n == 1);
}

}  // TEST_SUITE
