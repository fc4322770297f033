#include <doctest.h>

#include "siqkd/gf2.hpp"

using namespace siqkd;

TEST_CASE("xor matches the worked example") {
    CHECK((BitString("10101") ^ BitString("10110")).to_string() == "00011");
    CHECK((BitString("010") ^ BitString("100")).to_string() == "110");
    BitString x("110101");
    CHECK((x ^ x).to_string() == "000000");
    CHECK_THROWS_AS(BitString("10") ^ BitString("100"), DimensionMismatch);
}

TEST_CASE("matvec over GF(2)") {
    CHECK(matvec(BinaryMatrix::identity(3), BitString("011")).to_string() == "011");
    CHECK(matvec(BinaryMatrix(2, 3), BitString("101")).to_string() == "00");
    BinaryMatrix m(2, 3);
    m.set(0, 0, 1);
    m.set(0, 1, 1);
    m.set(1, 1, 1);
    m.set(1, 2, 1);
    CHECK(matvec(m, BitString("101")).to_string() == "11");
    CHECK_THROWS_AS(matvec(m, BitString("10")), DimensionMismatch);
}

TEST_CASE("matvec is linear") {
    RngStream rng(41, "linear");
    for (int i = 0; i < 200; ++i) {
        BinaryMatrix m = BinaryMatrix::random(6, 9, rng);
        BitString x = BitString::random(9, rng), y = BitString::random(9, rng);
        CHECK(matvec(m, x ^ y) == (matvec(m, x) ^ matvec(m, y)));
    }
}

TEST_CASE("reconciliation rounds reproduce the published table") {
    BinaryMatrix I3 = BinaryMatrix::identity(3);
    // full-length strings for U1; the classical rounds act on the 3-bit tails
    CHECK((BitString("10101") ^ BitString("10110")).to_string() == "00011");
    AliceRound ar = alice_round(BitString("101"), BitString("110"), I3);
    CHECK(ar.u1.to_string() == "011");
    CHECK(ar.mu1.to_string() == "011");

    BobRound br = bob_round(BitString("010"), BitString("100"), ar.mu1);
    CHECK(br.v1.to_string() == "110");
    CHECK(br.w1.to_string() == "101");

    BitString u2 = alice_reply(BitString("101"), br.w1, I3);
    CHECK(u2.to_string() == "000");
    CHECK(bob_recover(u2, br.v1).to_string() == "110");
}

TEST_CASE("reconciliation edge cases") {
    BinaryMatrix I4 = BinaryMatrix::identity(4);
    BitString zero("0000"), x("1011");
    CHECK(alice_round(x, zero, I4).u1 == x);
    CHECK(alice_round(x, x, I4).u1 == zero);
    CHECK(bob_round(x, zero, zero).w1 == x);
    CHECK(alice_reply(zero, x, I4) == x);
    CHECK(bob_recover(x, x) == zero);
}

TEST_CASE("ledger identity: X'2 = M X2 for random instances") {
    RngStream rng(43, "ledger");
    for (int i = 0; i < 10000; ++i) {
        size_t m = 3 + (rng.next_u64() % 6);
        BinaryMatrix M =
            (i % 3 == 0) ? BinaryMatrix::identity(m) : BinaryMatrix::random_invertible(m, rng);
        BitString x1 = BitString::random(m, rng), x2 = BitString::random(m, rng);
        BitString y1 = BitString::random(m, rng), y2 = BitString::random(m, rng);
        AliceRound ar = alice_round(x1, x2, M);
        BobRound br = bob_round(y1, y2, ar.mu1);
        BitString u2 = alice_reply(x1, br.w1, M);
        CHECK(bob_recover(u2, br.v1) == matvec(M, x2));
    }
}

TEST_CASE("hash matrix construction") {
    SUBCASE("identity kind") {
        HashSpec spec{0, 3, 3, HashSpec::Kind::Identity};
        CHECK(distill_key(spec, BitString("110")).to_string() == "110");
    }
    SUBCASE("toeplitz is reproducible and seed-dependent") {
        HashSpec a{11, 16, 8};
        CHECK(hash_matrix(a) == hash_matrix(a));
        HashSpec b{12, 16, 8};
        CHECK(hash_matrix(a) != hash_matrix(b));
    }
    SUBCASE("toeplitz structure: constant diagonals") {
        HashSpec spec{99, 10, 6};
        BinaryMatrix h = hash_matrix(spec);
        for (size_t i = 1; i < h.rows(); ++i)
            for (size_t j = 1; j < h.cols(); ++j)
                CHECK(h.at(i, j) == h.at(i - 1, j - 1));
    }
    SUBCASE("oversized output rejected") {
        CHECK_THROWS_AS(hash_matrix(HashSpec{1, 4, 5}), ConfigError);
    }
}

TEST_CASE("distill_key: linearity, zero input, key agreement") {
    HashSpec spec{7, 12, 5};
    RngStream rng(47, "distill");
    SUBCASE("zero maps to zero") {
        CHECK(distill_key(spec, BitString(12)) == BitString(5));
    }
    SUBCASE("GF(2)-linear in the input") {
        for (int i = 0; i < 200; ++i) {
            BitString x = BitString::random(12, rng), y = BitString::random(12, rng);
            CHECK(distill_key(spec, x ^ y) ==
                  (distill_key(spec, x) ^ distill_key(spec, y)));
        }
    }
    SUBCASE("non-invertible M rejected") {
        CHECK_THROWS_AS(distill_key(spec, BitString(12), BinaryMatrix(12, 12)),
                        ConfigError);
    }
    SUBCASE("K_A equals K_B over random end-to-end sessions") {
        for (int i = 0; i < 1000; ++i) {
            size_t m = 4 + (rng.next_u64() % 8);
            size_t rf = 1 + (rng.next_u64() % m);
            HashSpec hs{rng.next_u64(), m, rf};
            BinaryMatrix M = BinaryMatrix::random_invertible(m, rng);
            BitString x1 = BitString::random(m, rng), x2 = BitString::random(m, rng);
            BitString y1 = BitString::random(m, rng), y2 = BitString::random(m, rng);
            AliceRound ar = alice_round(x1, x2, M);
            BobRound br = bob_round(y1, y2, ar.mu1);
            BitString recovered = bob_recover(alice_reply(x1, br.w1, M), br.v1);
            CHECK(distill_key(hs, x2) == distill_key(hs, recovered, M));
        }
    }
}

TEST_CASE("matrix file format round-trips and is parsed strictly") {
    RngStream rng(53, "matfile");
    BinaryMatrix m = BinaryMatrix::random(4, 7, rng);
    CHECK(BinaryMatrix::parse(m.format()) == m);
    CHECK_THROWS_AS(BinaryMatrix::parse("2 2\n10\n1"), DimensionMismatch);
    CHECK_THROWS_AS(BinaryMatrix::parse("2 2\n10\n12"), DimensionMismatch);
    CHECK_THROWS_AS(BinaryMatrix::parse("nonsense"), DimensionMismatch);
}

TEST_CASE("gf2 inverse") {
    RngStream rng(59, "inverse");
    for (int i = 0; i < 100; ++i) {
        size_t n = 2 + (rng.next_u64() % 7);
        BinaryMatrix M = BinaryMatrix::random_invertible(n, rng);
        auto inv = M.inverse();
        REQUIRE(inv.has_value());
        for (int t = 0; t < 5; ++t) {
            BitString x = BitString::random(n, rng);
            CHECK(matvec(*inv, matvec(M, x)) == x);
        }
    }
    BinaryMatrix singular(3, 3); // all zeros
    CHECK_FALSE(singular.inverse().has_value());
}

TEST_CASE("bit packing round-trip and hex form") {
    RngStream rng(61, "pack");
    for (int i = 0; i < 200; ++i) {
        size_t len = rng.next_u64() % 40;
        BitString x = BitString::random(len, rng);
        CHECK(BitString::from_packed(x.packed(), len) == x);
    }
    CHECK(BitString("110").to_hex() == "c0");
    CHECK(BitString("00011011").to_hex() == "1b");
}
