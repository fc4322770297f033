#include "siqkd/gf2.hpp"

#include <fstream>
#include <sstream>

namespace siqkd {

BitString::BitString(const std::string& text) {
    bits_.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1')
            throw DimensionMismatch("bit string may contain only '0' and '1'");
        bits_.push_back(static_cast<uint8_t>(c - '0'));
    }
}

BitString BitString::random(size_t length, RngStream& rng) {
    BitString s(length);
    for (size_t i = 0; i < length; ++i) s.bits_[i] = rng.next_bit() ? 1 : 0;
    return s;
}

BitString BitString::tail(size_t count) const {
    if (count > size()) throw DimensionMismatch("tail longer than string");
    BitString s(count);
    std::copy(bits_.end() - count, bits_.end(), s.bits_.begin());
    return s;
}

std::string BitString::to_string() const {
    std::string s;
    s.reserve(size());
    for (uint8_t b : bits_) s.push_back(static_cast<char>('0' + b));
    return s;
}

std::vector<uint8_t> BitString::packed() const {
    std::vector<uint8_t> bytes((size() + 7) / 8, 0);
    for (size_t i = 0; i < size(); ++i)
        if (bits_[i]) bytes[i / 8] |= static_cast<uint8_t>(0x80u >> (i % 8));
    return bytes;
}

BitString BitString::from_packed(const std::vector<uint8_t>& bytes, size_t bit_length) {
    if (bytes.size() != (bit_length + 7) / 8)
        throw DimensionMismatch("packed byte count does not match bit length");
    BitString s(bit_length);
    for (size_t i = 0; i < bit_length; ++i)
        s.bits_[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
    return s;
}

std::string BitString::to_hex() const {
    static const char digits[] = "0123456789abcdef";
    std::string hex;
    for (uint8_t byte : packed()) {
        hex.push_back(digits[byte >> 4]);
        hex.push_back(digits[byte & 0xF]);
    }
    return hex;
}

BitString operator^(const BitString& a, const BitString& b) {
    if (a.size() != b.size())
        throw DimensionMismatch("xor requires equal lengths");
    BitString out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out.bits_[i] = a.bits_[i] ^ b.bits_[i];
    return out;
}

BinaryMatrix BinaryMatrix::identity(size_t n) {
    BinaryMatrix m(n, n);
    for (size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
}

BinaryMatrix BinaryMatrix::random(size_t rows, size_t cols, RngStream& rng) {
    BinaryMatrix m(rows, cols);
    for (auto& e : m.data_) e = rng.next_bit() ? 1 : 0;
    return m;
}

BinaryMatrix BinaryMatrix::random_invertible(size_t n, RngStream& rng) {
    for (;;) {
        BinaryMatrix m = random(n, n, rng);
        if (m.inverse()) return m;
    }
}

std::optional<BinaryMatrix> BinaryMatrix::inverse() const {
    if (rows_ != cols_) return std::nullopt;
    size_t n = rows_;
    BinaryMatrix a = *this;
    BinaryMatrix inv = identity(n);
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        while (pivot < n && a.at(pivot, col) == 0) ++pivot;
        if (pivot == n) return std::nullopt;
        if (pivot != col) {
            for (size_t j = 0; j < n; ++j) {
                std::swap(a.data_[pivot * n + j], a.data_[col * n + j]);
                std::swap(inv.data_[pivot * n + j], inv.data_[col * n + j]);
            }
        }
        for (size_t row = 0; row < n; ++row) {
            if (row != col && a.at(row, col)) {
                for (size_t j = 0; j < n; ++j) {
                    a.data_[row * n + j] ^= a.data_[col * n + j];
                    inv.data_[row * n + j] ^= inv.data_[col * n + j];
                }
            }
        }
    }
    return inv;
}

BinaryMatrix BinaryMatrix::parse(const std::string& text) {
    std::istringstream in(text);
    size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols) || rows == 0 || cols == 0)
        throw DimensionMismatch("matrix file must start with 'rows cols'");
    std::string line;
    std::getline(in, line); // rest of header line
    BinaryMatrix m(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        if (!std::getline(in, line))
            throw DimensionMismatch("matrix file truncated");
        if (line.size() != cols)
            throw DimensionMismatch("matrix row has wrong width");
        for (size_t c = 0; c < cols; ++c) {
            if (line[c] != '0' && line[c] != '1')
                throw DimensionMismatch("matrix entries must be '0' or '1'");
            m.set(r, c, static_cast<uint8_t>(line[c] - '0'));
        }
    }
    return m;
}

BinaryMatrix BinaryMatrix::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open matrix file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string BinaryMatrix::format() const {
    std::ostringstream out;
    out << rows_ << ' ' << cols_ << '\n';
    for (size_t r = 0; r < rows_; ++r) {
        for (size_t c = 0; c < cols_; ++c) out << static_cast<char>('0' + at(r, c));
        out << '\n';
    }
    return out.str();
}

BitString matvec(const BinaryMatrix& M, const BitString& x) {
    if (M.cols() != x.size())
        throw DimensionMismatch("matvec dimension mismatch");
    BitString y(M.rows());
    for (size_t r = 0; r < M.rows(); ++r) {
        uint8_t acc = 0;
        for (size_t c = 0; c < M.cols(); ++c) acc ^= M.at(r, c) & x.at(c);
        y.set(r, acc);
    }
    return y;
}

BinaryMatrix hash_matrix(const HashSpec& spec) {
    if (spec.output_length > spec.input_length)
        throw ConfigError("hash output length must not exceed input length");
    if (spec.kind == HashSpec::Kind::Identity) {
        if (spec.output_length != spec.input_length)
            throw ConfigError("identity hash requires equal lengths");
        return BinaryMatrix::identity(spec.input_length);
    }
    // Toeplitz: constant along diagonals, defined by input_length + output_length - 1
    // seeded bits t; H[i][j] = t[i - j + input_length - 1].
    RngStream rng(spec.seed, "toeplitz");
    size_t nbits = spec.input_length + spec.output_length - 1;
    std::vector<uint8_t> t(nbits);
    for (auto& b : t) b = rng.next_bit() ? 1 : 0;
    BinaryMatrix h(spec.output_length, spec.input_length);
    for (size_t i = 0; i < spec.output_length; ++i)
        for (size_t j = 0; j < spec.input_length; ++j)
            h.set(i, j, t[i + spec.input_length - 1 - j]);
    return h;
}

AliceRound alice_round(const BitString& x1, const BitString& x2, const BinaryMatrix& M) {
    AliceRound r;
    r.u1 = x1 ^ x2;
    r.mu1 = matvec(M, r.u1);
    return r;
}

BobRound bob_round(const BitString& y1, const BitString& y2, const BitString& mu1) {
    BobRound r;
    r.v1 = y1 ^ y2;
    r.w1 = mu1 ^ r.v1;
    return r;
}

BitString alice_reply(const BitString& x1, const BitString& w1, const BinaryMatrix& M) {
    return matvec(M, x1) ^ w1;
}

BitString bob_recover(const BitString& u2, const BitString& v1) {
    return u2 ^ v1;
}

BitString distill_key(const HashSpec& spec, const BitString& x,
                      const std::optional<BinaryMatrix>& M) {
    BitString input = x;
    if (M) {
        auto inv = M->inverse();
        if (!inv) throw ConfigError("distill_key requires an invertible M");
        input = matvec(*inv, x);
    }
    if (input.size() != spec.input_length)
        throw DimensionMismatch("hash input length mismatch");
    return matvec(hash_matrix(spec), input);
}

} // namespace siqkd
