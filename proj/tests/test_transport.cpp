#include <doctest.h>

#include <thread>

#include "siqkd/transport.hpp"

using namespace siqkd;

TEST_CASE("frame encoding round-trips arbitrary payloads") {
    RngStream rng(7, "frames");
    for (int i = 0; i < 10000; ++i) {
        RngStream r = rng.split(i);
        Frame f;
        f.tag = static_cast<FrameTag>(1 + r.next_u64() % 9);
        size_t len = r.next_u64() % 64;
        for (size_t j = 0; j < len; ++j)
            f.payload.push_back(static_cast<uint8_t>(r.next_u64()));
        auto bytes = encode_frame(f);
        CHECK(decode_frame(bytes) == f);
    }
}

TEST_CASE("truncated frames raise FramingError") {
    Frame f{FrameTag::Mu1, {1, 2, 3, 4}};
    auto bytes = encode_frame(f);
    for (size_t cut = 0; cut < bytes.size(); ++cut) {
        std::span<const uint8_t> head(bytes.data(), cut);
        CHECK_THROWS_AS(decode_frame(head), FramingError);
    }
    // trailing garbage is also a framing violation
    bytes.push_back(0xff);
    CHECK_THROWS_AS(decode_frame(bytes), FramingError);
}

TEST_CASE("unknown tags raise ProtocolError") {
    std::vector<uint8_t> bytes = {0, 0, 0, 0, 0};
    CHECK_THROWS_AS(decode_frame(bytes), ProtocolError);
    bytes[0] = 42;
    CHECK_THROWS_AS(decode_frame(bytes), ProtocolError);
}

TEST_CASE("payload codecs are lossless") {
    SUBCASE("hello") {
        HelloMsg h;
        h.n = 5;
        h.k = 2;
        h.shots_per_ensemble = 100000;
        MeasurementSettings s = default_settings();
        h.axes = {s.a1.axis, s.a2.axis, s.b1.axis, s.b2.axis};
        HelloMsg back = decode_hello(encode_hello(h));
        CHECK(back.version == h.version);
        CHECK(back.n == h.n);
        CHECK(back.k == h.k);
        CHECK(back.shots_per_ensemble == h.shots_per_ensemble);
        for (int i = 0; i < 4; ++i) {
            CHECK(back.axes[i].x == h.axes[i].x); // bit-exact, not approximate
            CHECK(back.axes[i].y == h.axes[i].y);
            CHECK(back.axes[i].z == h.axes[i].z);
        }
    }

    SUBCASE("qstate") {
        RngStream rng(3, "qstate");
        QStatePayload q;
        q.ensemble_index = 4;
        for (int b = 0; b < 4; ++b) {
            ShotBlock blk;
            blk.axis = {rng.split(b).next_unit() - 0.5, 0.25, -0.125};
            for (int s = 0; s < 37; ++s)
                blk.outcomes.push_back(rng.split(b).split(s).next_bit() ? 1 : -1);
            q.blocks.push_back(blk);
        }
        QStatePayload back = decode_qstate(encode_qstate(q));
        CHECK(back.ensemble_index == q.ensemble_index);
        REQUIRE(back.blocks.size() == q.blocks.size());
        for (size_t b = 0; b < q.blocks.size(); ++b) {
            CHECK(back.blocks[b].axis.x == q.blocks[b].axis.x);
            CHECK(back.blocks[b].outcomes == q.blocks[b].outcomes);
        }
    }

    SUBCASE("disclosure") {
        CheckDisclosure d;
        d.ensembles.resize(2);
        d.ensembles[0].push_back(ShotBlock{kZAxis, {1, -1, -1, 1}});
        d.ensembles[1].push_back(ShotBlock{kXAxis, {-1, -1}});
        CheckDisclosure back = decode_disclosure(encode_disclosure(d));
        REQUIRE(back.ensembles.size() == 2);
        CHECK(back.ensembles[0][0].outcomes == d.ensembles[0][0].outcomes);
        CHECK(back.ensembles[1][0].axis.x == d.ensembles[1][0].axis.x);
    }

    SUBCASE("verdict") {
        VerdictMsg v{true, 1.4142, 0.003};
        auto payload = encode_verdict(v);
        VerdictMsg back = decode_verdict(FrameTag::Abort, payload);
        CHECK(back.abort_session);
        CHECK(back.chsh_value == v.chsh_value);
        CHECK(back.chsh_std_error == v.chsh_std_error);
        back = decode_verdict(FrameTag::Continue, payload);
        CHECK_FALSE(back.abort_session);
    }

    SUBCASE("bits") {
        BitsMsg m{BitString("10110")};
        BitsMsg back = decode_bits(encode_bits(m));
        CHECK(back.bits == m.bits);
        BitsMsg empty{BitString("")};
        CHECK(decode_bits(encode_bits(empty)).bits.size() == 0);
    }
}

TEST_CASE("eve_tap") {
    RngStream eve_rng(11, "eve");
    QStatePayload q;
    q.ensemble_index = 0;
    ShotBlock blk;
    blk.axis = kZAxis;
    for (int s = 0; s < 200; ++s)
        blk.outcomes.push_back(s % 2 ? 1 : -1);
    q.blocks.push_back(blk);

    SUBCASE("no strategy leaves the payload untouched") {
        QStatePayload out = eve_tap(q, EveStrategy::none(), eve_rng);
        CHECK(out.blocks[0].outcomes == q.blocks[0].outcomes);
        CHECK(out.blocks[0].axis.z == 1.0);
    }

    SUBCASE("intercepting along the preparation axis is invisible") {
        // measuring a Z eigenstate along Z reproduces the outcome exactly
        auto strat = EveStrategy::intercept_fixed(Observable(kZAxis, "E"));
        QStatePayload out = eve_tap(q, strat, eve_rng);
        CHECK(out.blocks[0].outcomes == q.blocks[0].outcomes);
    }

    SUBCASE("orthogonal intercept randomizes and re-labels the axis") {
        auto strat = EveStrategy::intercept_fixed(Observable(kXAxis, "E"));
        QStatePayload out = eve_tap(q, strat, eve_rng);
        CHECK(out.blocks[0].axis.x == 1.0);
        CHECK(out.blocks[0].axis.z == 0.0);
        int plus = 0;
        for (int8_t o : out.blocks[0].outcomes) plus += (o == 1);
        // unbiased coin over 200 shots
        CHECK(plus > 60);
        CHECK(plus < 140);
    }

    SUBCASE("tap is deterministic in the rng") {
        auto strat = EveStrategy::intercept_random();
        QStatePayload a = eve_tap(q, strat, eve_rng);
        QStatePayload b = eve_tap(q, strat, eve_rng);
        CHECK(a.blocks[0].outcomes == b.blocks[0].outcomes);
        CHECK(a.blocks[0].axis.x == b.blocks[0].axis.x);
    }
}

namespace {

SessionConfig stream_config(uint64_t seed, EveStrategy eve = EveStrategy::none()) {
    SessionConfig cfg;
    cfg.master_seed = seed;
    cfg.shots_per_ensemble = 8000;
    cfg.eve = eve;
    return cfg;
}

std::pair<SessionReport, SessionReport> run_over_socketpair(const SessionConfig& cfg) {
    auto [alice_end, bob_end] = local_stream_pair();
    SessionReport alice_report, bob_report;
    std::exception_ptr bob_error;
    std::thread bob([&] {
        try {
            bob_report = run_bob_over_stream(cfg, *bob_end);
        } catch (...) {
            bob_error = std::current_exception();
        }
    });
    alice_report = run_alice_over_stream(cfg, *alice_end);
    bob.join();
    if (bob_error) std::rethrow_exception(bob_error);
    return {alice_report, bob_report};
}

} // namespace

TEST_CASE("socketpair session matches the in-process session exactly") {
    SessionConfig cfg = stream_config(512);
    SessionReport local = run_session(cfg);
    auto [alice, bob] = run_over_socketpair(cfg);

    CHECK(alice.chsh.value == local.chsh.value);
    CHECK(alice.chsh.std_error == local.chsh.std_error);
    CHECK(alice.aborted == local.aborted);
    CHECK(bob.aborted == local.aborted);
    REQUIRE(alice.key_alice.has_value());
    CHECK(*alice.key_alice == *local.key_alice);
    CHECK(*bob.key_bob == *local.key_bob);
    CHECK(*alice.key_alice == *bob.key_bob);
}

TEST_CASE("socketpair session under intercept aborts on both ends") {
    SessionConfig cfg = stream_config(513, EveStrategy::intercept_fixed(Observable(kZAxis, "E")));
    SessionReport local = run_session(cfg);
    auto [alice, bob] = run_over_socketpair(cfg);
    CHECK(local.aborted);
    CHECK(alice.aborted);
    CHECK(bob.aborted);
    CHECK(alice.chsh.value == local.chsh.value);
    CHECK_FALSE(alice.key_alice.has_value());
    CHECK_FALSE(bob.key_bob.has_value());
}

TEST_CASE("out-of-order messages raise ProtocolError") {
    auto [alice_end, bob_end] = local_stream_pair();
    std::thread rogue([&] {
        // skip HELLO entirely and lead with key bits
        try {
            send_frame(*alice_end, Frame{FrameTag::Mu1, encode_bits(BitsMsg{BitString("101")})});
            // drain whatever Bob sent before he noticed
            while (true) recv_frame(*alice_end);
        } catch (...) {
        }
        alice_end.reset();
    });
    SessionConfig cfg = stream_config(514);
    CHECK_THROWS_AS(run_bob_over_stream(cfg, *bob_end), ProtocolError);
    bob_end.reset();
    rogue.join();
}
