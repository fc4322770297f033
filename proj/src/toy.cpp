#include "siqkd/toy.hpp"

namespace siqkd {

ToyResult run_toy_pipeline(const ToyInputs& in) {
    const size_t n = in.x1.size();
    if (in.x2.size() != n || in.y1.size() != n)
        throw DimensionMismatch("x1, x2, y1 must share one length");
    if (in.k < 1 || in.k >= n) throw ConfigError("require 1 <= k < n");
    const size_t m = n - in.k;
    if (in.y2.size() != m) throw DimensionMismatch("y2 must have length n-k");

    ToyResult out;
    out.u1 = in.x1 ^ in.x2;
    AliceRound alice = alice_round(in.x1.tail(m), in.x2.tail(m), in.M);
    out.mu1 = alice.mu1;
    BobRound bob = bob_round(in.y1.tail(m), in.y2, out.mu1);
    out.v1 = bob.v1;
    out.w1 = bob.w1;
    out.u2 = alice_reply(in.x1.tail(m), out.w1, in.M);
    out.x2_recovered = bob_recover(out.u2, out.v1);
    out.key_alice = distill_key(in.hash, in.x2.tail(m));
    out.key_bob = distill_key(in.hash, out.x2_recovered, in.M);
    out.ideal_key_rate = static_cast<double>(m) / static_cast<double>(n);
    return out;
}

} // namespace siqkd
