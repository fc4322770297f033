#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "siqkd/errors.hpp"
#include "siqkd/rng.hpp"

namespace siqkd {

// Finite bit sequence over GF(2). Index 0 is the leftmost (most significant)
// character of the written form, matching the protocol tables.
class BitString {
  public:
    BitString() = default;
    explicit BitString(size_t length) : bits_(length, 0) {}
    explicit BitString(const std::string& text);

    static BitString random(size_t length, RngStream& rng);

    size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    uint8_t at(size_t i) const { return bits_.at(i); }
    void set(size_t i, uint8_t v) { bits_.at(i) = v & 1u; }

    BitString tail(size_t count) const; // last `count` bits
    std::string to_string() const;
    std::string to_hex() const; // MSB-first packing, zero-padded final byte
    std::vector<uint8_t> packed() const;
    static BitString from_packed(const std::vector<uint8_t>& bytes, size_t bit_length);

    friend BitString operator^(const BitString& a, const BitString& b);
    friend bool operator==(const BitString& a, const BitString& b) = default;

  private:
    std::vector<uint8_t> bits_;
};

// Dense GF(2) matrix, row-major.
class BinaryMatrix {
  public:
    BinaryMatrix() = default;
    BinaryMatrix(size_t rows, size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

    static BinaryMatrix identity(size_t n);
    static BinaryMatrix random(size_t rows, size_t cols, RngStream& rng);
    static BinaryMatrix random_invertible(size_t n, RngStream& rng);

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    uint8_t at(size_t r, size_t c) const { return data_[r * cols_ + c]; }
    void set(size_t r, size_t c, uint8_t v) { data_[r * cols_ + c] = v & 1u; }

    std::optional<BinaryMatrix> inverse() const; // nullopt if singular

    // File format: first line "rows cols", then one '0'/'1' row per line.
    static BinaryMatrix parse(const std::string& text);
    static BinaryMatrix load(const std::string& path);
    std::string format() const;

    friend bool operator==(const BinaryMatrix& a, const BinaryMatrix& b) = default;

  private:
    size_t rows_ = 0, cols_ = 0;
    std::vector<uint8_t> data_;
};

BitString matvec(const BinaryMatrix& M, const BitString& x);

// Seeded universal-hash description for privacy amplification. The default
// construction is a Toeplitz matrix whose first row and column are drawn from
// the seed; `identity` exists for transparent (pass-through) configurations.
struct HashSpec {
    enum class Kind { Toeplitz, Identity };
    uint64_t seed = 0;
    size_t input_length = 0;
    size_t output_length = 0;
    Kind kind = Kind::Toeplitz;
};

BinaryMatrix hash_matrix(const HashSpec& spec);

// --- The reconciliation dance -------------------------------------------
// All strings below are the tail (last n-k bits) of the session strings.

struct AliceRound {
    BitString u1;  // x1 ^ x2
    BitString mu1; // M u1, the disclosed image
};

AliceRound alice_round(const BitString& x1, const BitString& x2, const BinaryMatrix& M);

struct BobRound {
    BitString v1; // y1 ^ y2
    BitString w1; // mu1 ^ v1, disclosed back
};

BobRound bob_round(const BitString& y1, const BitString& y2, const BitString& mu1);

// U2 = M x1 ^ w1, disclosed to Bob.
BitString alice_reply(const BitString& x1, const BitString& w1, const BinaryMatrix& M);

// X'2 = u2 ^ v1; algebraically equal to M x2 for consistent rounds.
BitString bob_recover(const BitString& u2, const BitString& v1);

// K = H x, with H from the hash spec. When M is present the input is first
// mapped through M^-1 (Bob's side: f' = f o M^-1 applied to X'2 = M X2).
BitString distill_key(const HashSpec& spec, const BitString& x,
                      const std::optional<BinaryMatrix>& M = std::nullopt);

} // namespace siqkd
