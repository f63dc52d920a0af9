#pragma once
// Dense linear algebra over the two-element field, bit-packed into machine
// words.  Everything here is value-semantic and immutable once built, so the
// higher layers can enumerate and compare without defensive copies.
//
// Conventions used throughout the library:
//   * A BitVec of length n is the column vector (v_0, ..., v_{n-1}); its
//     canonical key is the natural number sum v_i * 2^i, and "canonical
//     order" always means increasing key.
//   * A BitMat with r rows and c cols acts on length-c column vectors,
//     (M v)_i = <row_i, v>.  Its canonical key packs the entries row-major:
//     bit (i*c + j) of the key is M[i][j].
//   * A Subspace stores its reduced row-echelon basis, which is unique, so
//     subspace equality is plain row comparison.

#include <boost/container/small_vector.hpp>

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fquad::gf2 {

using Word = std::uint64_t;
inline constexpr unsigned word_bits = 64;

inline unsigned words_for(unsigned len) { return (len + word_bits - 1) / word_bits; }

class BitVec {
public:
    BitVec() = default;
    explicit BitVec(unsigned len) : len_(len), w_(words_for(len), Word{0}) {}

    static BitVec unit(unsigned len, unsigned i);
    static BitVec from_bits(std::initializer_list<int> bits);
    // Parses "0110..." with coordinate 0 first; throws std::invalid_argument.
    static BitVec from_string(const std::string& s);
    // Vector of length len whose packed key is idx (len <= 64).
    static BitVec from_key(unsigned len, std::uint64_t idx);

    unsigned len() const { return len_; }
    bool get(unsigned i) const { return (w_[i / word_bits] >> (i % word_bits)) & 1u; }
    void set(unsigned i, bool b) {
        Word m = Word{1} << (i % word_bits);
        if (b) w_[i / word_bits] |= m; else w_[i / word_bits] &= ~m;
    }

    bool is_zero() const;
    int lowest_set() const;  // -1 when zero
    unsigned popcount() const;
    // Parity of the coordinate-wise product (the standard dot product).
    bool dot(const BitVec& o) const;

    BitVec& operator^=(const BitVec& o);
    friend BitVec operator^(BitVec a, const BitVec& b) { a ^= b; return a; }

    bool operator==(const BitVec& o) const { return len_ == o.len_ && w_ == o.w_; }
    // Orders by (len, packed key).
    std::strong_ordering operator<=>(const BitVec& o) const;

    // Packed key for len <= 64 (asserts); key() works for any length.
    std::uint64_t low_word() const;
    Word word(unsigned k) const { return k < w_.size() ? w_[k] : 0; }
    std::string key() const;        // length-prefixed raw words, usable as map key
    std::string to_string() const;  // "0110...", coordinate 0 first

    // Appends the coordinates of `o` after this vector's (orthogonal-sum glue).
    BitVec concat(const BitVec& o) const;
    // The coordinates [from, from+count) as a fresh vector.
    BitVec slice(unsigned from, unsigned count) const;

private:
    unsigned len_ = 0;
    boost::container::small_vector<Word, 2> w_;
};

class BitMat {
public:
    BitMat() = default;
    BitMat(unsigned rows, unsigned cols);
    static BitMat identity(unsigned n);
    static BitMat zero(unsigned rows, unsigned cols) { return BitMat(rows, cols); }
    static BitMat from_rows(unsigned cols, std::vector<BitVec> rows);
    static BitMat from_cols(unsigned rows, const std::vector<BitVec>& cols);
    // Matrix of given shape whose row-major packed key is `key` (rows*cols <= 64).
    static BitMat from_key(unsigned rows, unsigned cols, std::uint64_t key);
    // Parses "row;row;..." in the BitVec string format.
    static BitMat from_string(unsigned rows, unsigned cols, const std::string& s);

    unsigned rows() const { return rows_; }
    unsigned cols() const { return cols_; }
    const BitVec& row(unsigned i) const { return r_[i]; }
    BitVec& row(unsigned i) { return r_[i]; }
    bool get(unsigned i, unsigned j) const { return r_[i].get(j); }
    void set(unsigned i, unsigned j, bool b) { r_[i].set(j, b); }
    BitVec col(unsigned j) const;

    BitVec apply(const BitVec& v) const;   // M v (v.len == cols)
    BitMat mul(const BitMat& rhs) const;   // this * rhs
    BitMat transpose() const;
    // Block-diagonal sum: this on the first coordinates, o on the rest.
    BitMat direct_sum(const BitMat& o) const;

    bool operator==(const BitMat& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && r_ == o.r_; }
    std::strong_ordering operator<=>(const BitMat& o) const;

    std::uint64_t packed_key() const;  // rows*cols <= 64 (asserts)
    std::string key() const;
    std::string to_string() const;     // rows joined with ';'

private:
    unsigned rows_ = 0, cols_ = 0;
    boost::container::small_vector<BitVec, 6> r_;
};

// Reduced row-echelon form and rank; row space is preserved.
std::pair<BitMat, unsigned> rref(const BitMat& m);

// One solution of M x = b, if any.
std::optional<BitVec> solve(const BitMat& m, const BitVec& b);

// Inverse of a square matrix (std::nullopt when singular).
std::optional<BitMat> invert(const BitMat& m);

class Subspace {
public:
    Subspace() = default;
    static Subspace zero(unsigned ambient);
    static Subspace full(unsigned ambient);
    static Subspace span(unsigned ambient, const std::vector<BitVec>& gens);
    static Subspace row_space(const BitMat& m);

    unsigned ambient_dim() const { return ambient_; }
    unsigned dim() const { return basis_.rows(); }
    // Basis rows in reduced row-echelon form (unique per subspace).
    const BitMat& basis() const { return basis_; }

    bool contains(const BitVec& v) const;
    // Canonical representative of v modulo the subspace (reduce by basis rows).
    BitVec reduce(const BitVec& v) const;
    // The linear map v |-> reduce(v) as an ambient x ambient matrix.
    BitMat reduction_matrix() const;
    // All 2^dim elements in increasing canonical vector order.
    std::vector<BitVec> elements() const;

    bool operator==(const Subspace& o) const { return ambient_ == o.ambient_ && basis_ == o.basis_; }
    std::strong_ordering operator<=>(const Subspace& o) const;
    std::string key() const;

private:
    unsigned ambient_ = 0;
    BitMat basis_;  // dim x ambient, rref
};

// {v : M v = 0} as a subspace of the column space.
Subspace kernel(const BitMat& m);
// {v : M v in s}; requires s.ambient_dim() == m.rows().
Subspace preimage(const BitMat& m, const Subspace& s);
// span{M v : v in s}.
Subspace image(const BitMat& m, const Subspace& s);
Subspace intersect(const Subspace& a, const Subspace& b);
Subspace sum(const Subspace& a, const Subspace& b);

// Every dim-dimensional subspace of F2^ambient exactly once, ordered by
// basis-matrix key (rref rows packed row-major).
void enumerate_subspaces(unsigned ambient, unsigned dim,
                         const std::function<void(const Subspace&)>& fn);
std::vector<Subspace> all_subspaces(unsigned ambient, unsigned dim);
// Subspaces of s of the given dimension, as subspaces of the ambient space.
std::vector<Subspace> subspaces_of(const Subspace& s, unsigned dim);

// All 2^(from*to) matrices (shape to x from), in increasing packed-key order.
void enumerate_linear_maps(unsigned from_dim, unsigned to_dim,
                           const std::function<void(const BitMat&)>& fn);

}  // namespace fquad::gf2
