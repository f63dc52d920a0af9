#include "fquad/gf2.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <optional>
#include <stdexcept>

namespace fquad::gf2 {

BitVec BitVec::unit(unsigned len, unsigned i) {
    BitVec v(len);
    v.set(i, true);
    return v;
}

BitVec BitVec::from_bits(std::initializer_list<int> bits) {
    BitVec v(static_cast<unsigned>(bits.size()));
    unsigned i = 0;
    for (int b : bits) v.set(i++, b != 0);
    return v;
}

BitVec BitVec::from_string(const std::string& s) {
    BitVec v(static_cast<unsigned>(s.size()));
    for (unsigned i = 0; i < s.size(); ++i) {
        if (s[i] == '1') v.set(i, true);
        else if (s[i] != '0') throw std::invalid_argument("bit string must be 0/1: " + s);
    }
    return v;
}

BitVec BitVec::from_key(unsigned len, std::uint64_t idx) {
    assert(len <= word_bits);
    BitVec v(len);
    if (len > 0) v.w_[0] = idx & (len == 64 ? ~Word{0} : ((Word{1} << len) - 1));
    return v;
}

bool BitVec::is_zero() const {
    for (Word x : w_) if (x) return false;
    return true;
}

int BitVec::lowest_set() const {
    for (unsigned k = 0; k < w_.size(); ++k)
        if (w_[k]) return static_cast<int>(k * word_bits + std::countr_zero(w_[k]));
    return -1;
}

unsigned BitVec::popcount() const {
    unsigned n = 0;
    for (Word x : w_) n += static_cast<unsigned>(std::popcount(x));
    return n;
}

bool BitVec::dot(const BitVec& o) const {
    assert(len_ == o.len_);
    Word acc = 0;
    for (unsigned k = 0; k < w_.size(); ++k) acc ^= w_[k] & o.w_[k];
    return std::popcount(acc) & 1u;
}

BitVec& BitVec::operator^=(const BitVec& o) {
    assert(len_ == o.len_);
    for (unsigned k = 0; k < w_.size(); ++k) w_[k] ^= o.w_[k];
    return *this;
}

std::strong_ordering BitVec::operator<=>(const BitVec& o) const {
    if (auto c = len_ <=> o.len_; c != 0) return c;
    // Numeric order of the packed key: compare from the most significant word.
    for (unsigned k = static_cast<unsigned>(w_.size()); k-- > 0;)
        if (auto c = w_[k] <=> o.w_[k]; c != 0) return c;
    return std::strong_ordering::equal;
}

std::uint64_t BitVec::low_word() const {
    assert(len_ <= word_bits);
    return w_.empty() ? 0 : w_[0];
}

std::string BitVec::key() const {
    std::string k;
    k.reserve(4 + 8 * w_.size());
    auto push_u32 = [&k](std::uint32_t x) {
        for (int i = 0; i < 4; ++i) k.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
    };
    push_u32(len_);
    for (Word x : w_)
        for (int i = 0; i < 8; ++i) k.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
    return k;
}

std::string BitVec::to_string() const {
    std::string s(len_, '0');
    for (unsigned i = 0; i < len_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

BitVec BitVec::concat(const BitVec& o) const {
    BitVec r(len_ + o.len_);
    for (unsigned i = 0; i < len_; ++i) r.set(i, get(i));
    for (unsigned i = 0; i < o.len_; ++i) r.set(len_ + i, o.get(i));
    return r;
}

BitVec BitVec::slice(unsigned from, unsigned count) const {
    assert(from + count <= len_);
    BitVec r(count);
    for (unsigned i = 0; i < count; ++i) r.set(i, get(from + i));
    return r;
}

BitMat::BitMat(unsigned rows, unsigned cols) : rows_(rows), cols_(cols), r_(rows, BitVec(cols)) {}

BitMat BitMat::identity(unsigned n) {
    BitMat m(n, n);
    for (unsigned i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

BitMat BitMat::from_rows(unsigned cols, std::vector<BitVec> rows) {
    BitMat m;
    m.rows_ = static_cast<unsigned>(rows.size());
    m.cols_ = cols;
    m.r_.assign(rows.begin(), rows.end());
    for (const BitVec& r : m.r_) {
        (void)r;
        assert(r.len() == cols);
    }
    return m;
}

BitMat BitMat::from_cols(unsigned rows, const std::vector<BitVec>& cols) {
    BitMat m(rows, static_cast<unsigned>(cols.size()));
    for (unsigned j = 0; j < cols.size(); ++j) {
        assert(cols[j].len() == rows);
        for (unsigned i = 0; i < rows; ++i) m.set(i, j, cols[j].get(i));
    }
    return m;
}

BitMat BitMat::from_key(unsigned rows, unsigned cols, std::uint64_t key) {
    assert(static_cast<std::uint64_t>(rows) * cols <= word_bits);
    BitMat m(rows, cols);
    for (unsigned i = 0; i < rows; ++i)
        for (unsigned j = 0; j < cols; ++j)
            if ((key >> (i * cols + j)) & 1u) m.set(i, j, true);
    return m;
}

BitMat BitMat::from_string(unsigned rows, unsigned cols, const std::string& s) {
    BitMat m(rows, cols);
    unsigned i = 0;
    size_t pos = 0;
    while (i < rows) {
        size_t next = s.find(';', pos);
        std::string part = (next == std::string::npos) ? s.substr(pos) : s.substr(pos, next - pos);
        BitVec r = BitVec::from_string(part);
        if (r.len() != cols) throw std::invalid_argument("bad row length in matrix string");
        m.r_[i++] = r;
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (i != rows) throw std::invalid_argument("bad row count in matrix string");
    return m;
}

BitVec BitMat::col(unsigned j) const {
    BitVec c(rows_);
    for (unsigned i = 0; i < rows_; ++i) c.set(i, get(i, j));
    return c;
}

BitVec BitMat::apply(const BitVec& v) const {
    assert(v.len() == cols_);
    BitVec out(rows_);
    for (unsigned i = 0; i < rows_; ++i)
        if (r_[i].dot(v)) out.set(i, true);
    return out;
}

BitMat BitMat::mul(const BitMat& rhs) const {
    assert(cols_ == rhs.rows_);
    BitMat out(rows_, rhs.cols_);
    for (unsigned i = 0; i < rows_; ++i) {
        BitVec& acc = out.r_[i];
        const BitVec& a = r_[i];
        for (unsigned j = 0; j < cols_; ++j)
            if (a.get(j)) acc ^= rhs.r_[j];
    }
    return out;
}

BitMat BitMat::transpose() const {
    BitMat out(cols_, rows_);
    for (unsigned i = 0; i < rows_; ++i)
        for (unsigned j = 0; j < cols_; ++j)
            if (get(i, j)) out.set(j, i, true);
    return out;
}

BitMat BitMat::direct_sum(const BitMat& o) const {
    BitMat out(rows_ + o.rows_, cols_ + o.cols_);
    for (unsigned i = 0; i < rows_; ++i)
        for (unsigned j = 0; j < cols_; ++j)
            if (get(i, j)) out.set(i, j, true);
    for (unsigned i = 0; i < o.rows_; ++i)
        for (unsigned j = 0; j < o.cols_; ++j)
            if (o.get(i, j)) out.set(rows_ + i, cols_ + j, true);
    return out;
}

std::strong_ordering BitMat::operator<=>(const BitMat& o) const {
    if (auto c = rows_ <=> o.rows_; c != 0) return c;
    if (auto c = cols_ <=> o.cols_; c != 0) return c;
    for (unsigned i = 0; i < rows_; ++i)
        if (auto c = r_[i] <=> o.r_[i]; c != 0) return c;
    return std::strong_ordering::equal;
}

std::uint64_t BitMat::packed_key() const {
    assert(static_cast<std::uint64_t>(rows_) * cols_ <= word_bits);
    std::uint64_t k = 0;
    for (unsigned i = 0; i < rows_; ++i) k |= r_[i].low_word() << (i * cols_);
    return k;
}

std::string BitMat::key() const {
    std::string k;
    auto push_u32 = [&k](std::uint32_t x) {
        for (int i = 0; i < 4; ++i) k.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
    };
    push_u32(rows_);
    push_u32(cols_);
    for (unsigned i = 0; i < rows_; ++i) k += r_[i].key();
    return k;
}

std::string BitMat::to_string() const {
    std::string s;
    for (unsigned i = 0; i < rows_; ++i) {
        if (i) s.push_back(';');
        s += r_[i].to_string();
    }
    return s;
}

std::pair<BitMat, unsigned> rref(const BitMat& m) {
    BitMat a = m;
    unsigned rank = 0;
    for (unsigned col = 0; col < a.cols() && rank < a.rows(); ++col) {
        unsigned pivot = rank;
        while (pivot < a.rows() && !a.get(pivot, col)) ++pivot;
        if (pivot == a.rows()) continue;
        std::swap(a.row(pivot), a.row(rank));
        for (unsigned i = 0; i < a.rows(); ++i)
            if (i != rank && a.get(i, col)) a.row(i) ^= a.row(rank);
        ++rank;
    }
    // Drop zero rows so the result is the canonical echelon basis plus
    // padded zeros only when the caller asked for them (we keep the shape).
    return {a, rank};
}

std::optional<BitVec> solve(const BitMat& m, const BitVec& b) {
    assert(b.len() == m.rows());
    // Gaussian elimination on the augmented system.
    BitMat a = m;
    BitVec rhs = b;
    std::vector<int> pivot_col;
    unsigned rank = 0;
    for (unsigned col = 0; col < a.cols() && rank < a.rows(); ++col) {
        unsigned p = rank;
        while (p < a.rows() && !a.get(p, col)) ++p;
        if (p == a.rows()) continue;
        std::swap(a.row(p), a.row(rank));
        bool bp = rhs.get(p), br = rhs.get(rank);
        rhs.set(p, br), rhs.set(rank, bp);
        for (unsigned i = 0; i < a.rows(); ++i)
            if (i != rank && a.get(i, col)) {
                a.row(i) ^= a.row(rank);
                rhs.set(i, rhs.get(i) ^ rhs.get(rank));
            }
        pivot_col.push_back(static_cast<int>(col));
        ++rank;
    }
    for (unsigned i = rank; i < a.rows(); ++i)
        if (rhs.get(i)) return std::nullopt;
    BitVec x(m.cols());
    for (unsigned i = 0; i < rank; ++i) x.set(static_cast<unsigned>(pivot_col[i]), rhs.get(i));
    return x;
}

std::optional<BitMat> invert(const BitMat& m) {
    assert(m.rows() == m.cols());
    const unsigned n = m.rows();
    // One elimination over the matrix augmented with the identity.
    std::vector<BitVec> rows;
    rows.reserve(n);
    for (unsigned i = 0; i < n; ++i) rows.push_back(m.row(i).concat(BitVec::unit(n, i)));
    auto [a, rank] = rref(BitMat::from_rows(2 * n, rows));
    (void)rank;  // the identity block keeps the augmented rank at n regardless
    std::vector<BitVec> inv;
    inv.reserve(n);
    for (unsigned i = 0; i < n; ++i) {
        if (!(a.row(i).slice(0, n) == BitVec::unit(n, i))) return std::nullopt;
        inv.push_back(a.row(i).slice(n, n));
    }
    return BitMat::from_rows(n, inv);
}

Subspace Subspace::zero(unsigned ambient) {
    Subspace s;
    s.ambient_ = ambient;
    s.basis_ = BitMat(0, ambient);
    return s;
}

Subspace Subspace::full(unsigned ambient) {
    Subspace s;
    s.ambient_ = ambient;
    s.basis_ = BitMat::identity(ambient);
    return s;
}

Subspace Subspace::span(unsigned ambient, const std::vector<BitVec>& gens) {
    BitMat m = BitMat::from_rows(ambient, gens);
    auto [r, rank] = rref(m);
    Subspace s;
    s.ambient_ = ambient;
    BitMat b(rank, ambient);
    for (unsigned i = 0; i < rank; ++i) b.row(i) = r.row(i);
    s.basis_ = b;
    return s;
}

Subspace Subspace::row_space(const BitMat& m) {
    std::vector<BitVec> rows;
    rows.reserve(m.rows());
    for (unsigned i = 0; i < m.rows(); ++i) rows.push_back(m.row(i));
    return span(m.cols(), rows);
}

bool Subspace::contains(const BitVec& v) const { return reduce(v).is_zero(); }

BitVec Subspace::reduce(const BitVec& v) const {
    assert(v.len() == ambient_);
    BitVec r = v;
    for (unsigned i = 0; i < basis_.rows(); ++i) {
        int p = basis_.row(i).lowest_set();
        if (p >= 0 && r.get(static_cast<unsigned>(p))) r ^= basis_.row(i);
    }
    return r;
}

BitMat Subspace::reduction_matrix() const {
    BitMat m(ambient_, ambient_);
    for (unsigned j = 0; j < ambient_; ++j) {
        BitVec rj = reduce(BitVec::unit(ambient_, j));
        for (unsigned i = 0; i < ambient_; ++i)
            if (rj.get(i)) m.set(i, j, true);
    }
    return m;
}

std::vector<BitVec> Subspace::elements() const {
    std::vector<BitVec> out;
    out.reserve(1u << dim());
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << dim()); ++mask) {
        BitVec v(ambient_);
        for (unsigned i = 0; i < dim(); ++i)
            if ((mask >> i) & 1u) v ^= basis_.row(i);
        out.push_back(std::move(v));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::strong_ordering Subspace::operator<=>(const Subspace& o) const {
    if (auto c = ambient_ <=> o.ambient_; c != 0) return c;
    return basis_ <=> o.basis_;
}

std::string Subspace::key() const {
    std::string k;
    k.push_back(static_cast<char>(ambient_));
    k += basis_.key();
    return k;
}

Subspace kernel(const BitMat& m) {
    auto [r, rank] = rref(m);
    // Free columns parameterize the kernel; pivot columns are back-solved.
    std::vector<int> pivot_of_col(m.cols(), -1);
    unsigned row = 0;
    for (unsigned col = 0; col < m.cols() && row < rank; ++col) {
        if (r.get(row, col)) pivot_of_col[col] = static_cast<int>(row), ++row;
    }
    std::vector<BitVec> gens;
    for (unsigned col = 0; col < m.cols(); ++col) {
        if (pivot_of_col[col] >= 0) continue;
        BitVec v(m.cols());
        v.set(col, true);
        for (unsigned c2 = 0; c2 < m.cols(); ++c2)
            if (pivot_of_col[c2] >= 0 && r.get(static_cast<unsigned>(pivot_of_col[c2]), col))
                v.set(c2, true);
        gens.push_back(std::move(v));
    }
    return Subspace::span(m.cols(), gens);
}

Subspace preimage(const BitMat& m, const Subspace& s) {
    if (s.ambient_dim() != m.rows()) throw std::invalid_argument("preimage: ambient mismatch");
    // v maps into s iff reduce(M v) = 0, and reduction mod a fixed basis is linear.
    return kernel(s.reduction_matrix().mul(m));
}

Subspace image(const BitMat& m, const Subspace& s) {
    std::vector<BitVec> gens;
    gens.reserve(s.dim());
    for (unsigned i = 0; i < s.dim(); ++i) gens.push_back(m.apply(s.basis().row(i)));
    return Subspace::span(m.rows(), gens);
}

Subspace intersect(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim()) throw std::invalid_argument("intersect: ambient mismatch");
    // x = sum c_i a_i lies in b iff reduce_b(x) = 0: solve for the coefficients.
    BitMat cond = b.reduction_matrix().mul(a.basis().transpose());
    Subspace coeff = kernel(cond);
    std::vector<BitVec> gens;
    for (unsigned i = 0; i < coeff.dim(); ++i)
        gens.push_back(a.basis().transpose().apply(coeff.basis().row(i)));
    return Subspace::span(a.ambient_dim(), gens);
}

Subspace sum(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim()) throw std::invalid_argument("sum: ambient mismatch");
    std::vector<BitVec> gens;
    for (unsigned i = 0; i < a.dim(); ++i) gens.push_back(a.basis().row(i));
    for (unsigned i = 0; i < b.dim(); ++i) gens.push_back(b.basis().row(i));
    return Subspace::span(a.ambient_dim(), gens);
}

void enumerate_subspaces(unsigned ambient, unsigned dim,
                         const std::function<void(const Subspace&)>& fn) {
    std::vector<Subspace> all = all_subspaces(ambient, dim);
    for (const Subspace& s : all) fn(s);
}

std::vector<Subspace> all_subspaces(unsigned ambient, unsigned dim) {
    std::vector<Subspace> out;
    if (dim > ambient) return out;
    if (dim == 0) {
        out.push_back(Subspace::zero(ambient));
        return out;
    }
    // Walk every set of pivot columns, then every assignment of the free
    // entries; each rref matrix produced this way is a distinct subspace.
    std::vector<unsigned> pivots(dim);
    std::function<void(unsigned, unsigned)> walk = [&](unsigned idx, unsigned start) {
        if (idx == dim) {
            // Free positions: row i may have 1s in columns > pivots[i] that
            // are not pivot columns themselves.
            std::vector<std::pair<unsigned, unsigned>> free_pos;
            std::vector<bool> is_pivot(ambient, false);
            for (unsigned p : pivots) is_pivot[p] = true;
            for (unsigned i = 0; i < dim; ++i)
                for (unsigned c = pivots[i] + 1; c < ambient; ++c)
                    if (!is_pivot[c]) free_pos.emplace_back(i, c);
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free_pos.size()); ++mask) {
                BitMat b(dim, ambient);
                for (unsigned i = 0; i < dim; ++i) b.set(i, pivots[i], true);
                for (unsigned k = 0; k < free_pos.size(); ++k)
                    if ((mask >> k) & 1u) b.set(free_pos[k].first, free_pos[k].second, true);
                Subspace s = Subspace::row_space(b);
                out.push_back(std::move(s));
            }
            return;
        }
        for (unsigned c = start; c + (dim - idx) <= ambient; ++c) {
            pivots[idx] = c;
            walk(idx + 1, c + 1);
        }
    };
    walk(0, 0);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Subspace> subspaces_of(const Subspace& s, unsigned dim) {
    std::vector<Subspace> out;
    BitMat bt = s.basis().transpose();  // coefficient vectors -> ambient vectors
    for (const Subspace& c : all_subspaces(s.dim(), dim)) {
        std::vector<BitVec> gens;
        for (unsigned i = 0; i < c.dim(); ++i) gens.push_back(bt.apply(c.basis().row(i)));
        out.push_back(Subspace::span(s.ambient_dim(), gens));
    }
    std::sort(out.begin(), out.end());
    return out;
}

void enumerate_linear_maps(unsigned from_dim, unsigned to_dim,
                           const std::function<void(const BitMat&)>& fn) {
    std::uint64_t total_bits = static_cast<std::uint64_t>(from_dim) * to_dim;
    assert(total_bits <= 48 && "enumeration beyond 2^48 maps is not supported");
    for (std::uint64_t key = 0; key < (std::uint64_t{1} << total_bits); ++key)
        fn(BitMat::from_key(to_dim, from_dim, key));
}

}  // namespace fquad::gf2
