#pragma once

#include "siqkd/gf2.hpp"

namespace siqkd {

// The published worked example: n=5, k=2, complement-correlated X1/Y1,
// X2 = 10110, Y2 = 100, M = identity.
struct ToyInputs {
    BitString x1{std::string("10101")};
    BitString y1{std::string("01010")};
    BitString x2{std::string("10110")};
    BitString y2{std::string("100")};
    size_t k = 2;
    BinaryMatrix M = BinaryMatrix::identity(3);
    HashSpec hash{0, 3, 3, HashSpec::Kind::Identity};
};

struct ToyResult {
    BitString u1;  // full length n
    BitString mu1; // M applied to the tail of u1
    BitString v1;
    BitString w1;
    BitString u2;
    BitString x2_recovered;
    BitString key_alice;
    BitString key_bob;
    double ideal_key_rate = 0.0;
};

// Classical component only (the reconciliation ledger plus distillation);
// the quantum phase is exercised by run_session.
ToyResult run_toy_pipeline(const ToyInputs& inputs);

} // namespace siqkd
