#include <doctest.h>

#include "siqkd/protocol.hpp"
#include "siqkd/toy.hpp"

using namespace siqkd;

namespace {

SessionConfig quick_config(uint64_t seed) {
    SessionConfig cfg;
    cfg.master_seed = seed;
    cfg.shots_per_ensemble = 20000;
    return cfg;
}

SessionConfig toy_config(uint64_t seed) {
    SessionConfig cfg;
    cfg.n = 5;
    cfg.k = 2;
    cfg.shots_per_ensemble = 4000;
    cfg.master_seed = seed;
    cfg.x1 = BitString("10101");
    cfg.y1 = BitString("01010");
    cfg.x2 = BitString("10110");
    cfg.hash = HashSpec{0, 3, 3, HashSpec::Kind::Identity};
    // the printed toy settings use Z for both of Alice's observables, which
    // yields CHSH = sqrt(2): below the classical bound, so the threshold must
    // sit below sqrt(2) for the session to continue
    const double s = 1.0 / std::sqrt(2.0);
    cfg.settings = {Observable(kZAxis, "A1"), Observable(kZAxis, "A2"),
                    Observable({s, 0, s}, "B1"), Observable({-s, 0, s}, "B2")};
    cfg.threshold = 1.0;
    return cfg;
}

} // namespace

TEST_CASE("select_observable follows the 0->first, 1->second scheme") {
    MeasurementSettings s = default_settings();
    CHECK(select_observable(0, Side::Alice, s).label == "A1");
    CHECK(select_observable(1, Side::Alice, s).label == "A2");
    CHECK(select_observable(0, Side::Bob, s).label == "B1");
    CHECK(select_observable(1, Side::Bob, s).label == "B2");

    BitString u1("00011");
    std::vector<std::string> seq;
    for (size_t i = 0; i < u1.size(); ++i)
        seq.push_back(select_observable(u1.at(i), Side::Alice, s).label);
    CHECK(seq == std::vector<std::string>{"A1", "A1", "A1", "A2", "A2"});
}

TEST_CASE("decide_abort uses strict less-than") {
    CHECK_FALSE(decide_abort(ChshEstimate{2.82, 0, {}}, 2.0));
    CHECK(decide_abort(ChshEstimate{1.41, 0, {}}, 2.0));
    CHECK_FALSE(decide_abort(ChshEstimate{2.0, 0, {}}, 2.0));
}

TEST_CASE("config validation") {
    SessionConfig cfg = quick_config(1);
    cfg.k = 5;
    cfg.n = 5;
    CHECK_THROWS_AS(normalize_config(cfg), ConfigError);
    cfg = quick_config(1);
    cfg.shots_per_ensemble = 10; // not a multiple of 4
    CHECK_THROWS_AS(normalize_config(cfg), ConfigError);
    cfg = quick_config(1);
    cfg.M = BinaryMatrix(3, 3); // singular
    CHECK_THROWS_AS(normalize_config(cfg), ConfigError);
    cfg = quick_config(1);
    cfg.x2 = BitString("101"); // wrong length
    CHECK_THROWS_AS(normalize_config(cfg), ConfigError);
}

TEST_CASE("honest session continues and both keys agree") {
    SessionReport report = run_session(quick_config(101));
    CHECK_FALSE(report.aborted);
    CHECK(std::abs(report.chsh.value - kTsirelsonBound) < 5 * report.chsh.std_error);
    REQUIRE(report.key_alice.has_value());
    REQUIRE(report.key_bob.has_value());
    CHECK(*report.key_alice == *report.key_bob);
    CHECK(report.ideal_key_rate == doctest::Approx(0.6));
}

TEST_CASE("intercepted session aborts and withholds keys") {
    SessionConfig cfg = quick_config(202);
    cfg.eve = EveStrategy::intercept_fixed(Observable(kZAxis, "E"));
    SessionReport report = run_session(cfg);
    CHECK(report.aborted);
    CHECK(report.chsh.value < 2.0);
    CHECK_FALSE(report.key_alice.has_value());
    CHECK_FALSE(report.key_bob.has_value());

    cfg.eve = EveStrategy::intercept_random();
    cfg.master_seed = 203;
    SessionReport random_eve = run_session(cfg);
    CHECK(random_eve.aborted);
}

TEST_CASE("session is deterministic in the master seed") {
    SessionReport a = run_session(quick_config(77));
    SessionReport b = run_session(quick_config(77));
    CHECK(a.chsh.value == b.chsh.value);
    CHECK(*a.key_alice == *b.key_alice);
    REQUIRE(a.transcript.size() == b.transcript.size());
    for (size_t i = 0; i < a.transcript.size(); ++i)
        CHECK(a.transcript[i].data == b.transcript[i].data);
}

TEST_CASE("toy session recovers the published key bits") {
    SessionReport report = run_session(toy_config(5));
    CHECK_FALSE(report.aborted);
    // CHSH at the printed settings sits at sqrt(2)
    CHECK(std::abs(report.chsh.value - std::sqrt(2.0)) < 5 * report.chsh.std_error);
    REQUIRE(report.key_alice.has_value());
    CHECK(report.key_alice->to_string() == "110"); // X2 tail
    CHECK(report.key_bob->to_string() == "110");   // X'2 through identity M and hash
    CHECK(report.ideal_key_rate == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("toy pipeline reproduces every published intermediate") {
    ToyResult r = run_toy_pipeline(ToyInputs{});
    CHECK(r.u1.to_string() == "00011");
    CHECK(r.mu1.to_string() == "011");
    CHECK(r.v1.to_string() == "110");
    CHECK(r.w1.to_string() == "101");
    CHECK(r.u2.to_string() == "000");
    CHECK(r.x2_recovered.to_string() == "110");
    CHECK(r.key_alice == r.key_bob);
    CHECK(r.ideal_key_rate == doctest::Approx(0.6));
}

TEST_CASE("transcript carries every public message and none of the secrets") {
    SessionConfig cfg = quick_config(303);
    SessionReport report = run_session(cfg);
    auto count = [&report](const std::string& label) {
        size_t c = 0;
        for (const auto& e : report.transcript)
            if (e.label == label) ++c;
        return c;
    };
    CHECK(count("HELLO") == 2);
    CHECK(count("QSTATE") == cfg.n);
    CHECK(count("CHECK_DISCLOSE") == 1);
    CHECK(count("CONTINUE") == 1);
    CHECK(count("MU1") == 1);
    CHECK(count("W1") == 1);
    CHECK(count("U2") == 1);
    CHECK(count("DONE") == 1);
    CHECK(count("note:check-allocation") == 1);

    // nothing beyond the public messages ever shows up: no raw key material,
    // no X2/Y2 entries, nothing unlabelled
    for (const auto& e : report.transcript) {
        CAPTURE(e.label);
        bool known = e.label == "HELLO" || e.label == "QSTATE" ||
                     e.label == "CHECK_DISCLOSE" || e.label == "CONTINUE" ||
                     e.label == "ABORT" || e.label == "MU1" || e.label == "W1" ||
                     e.label == "U2" || e.label == "DONE" ||
                     e.label == "note:check-allocation";
        CHECK(known);
    }
}

TEST_CASE("non-identity M still yields agreeing keys") {
    SessionConfig cfg = quick_config(404);
    RngStream rng(5, "matrix");
    cfg.M = BinaryMatrix::random_invertible(3, rng);
    SessionReport report = run_session(cfg);
    REQUIRE_FALSE(report.aborted);
    CHECK(*report.key_alice == *report.key_bob);
}

TEST_CASE("abort rates over repeated seeded sessions") {
    int honest_aborts = 0, attacked_aborts = 0;
    const int sessions = 20;
    for (int i = 0; i < sessions; ++i) {
        SessionConfig cfg = quick_config(1000 + i);
        if (run_session(cfg).aborted) ++honest_aborts;
        cfg.eve = EveStrategy::intercept_fixed(Observable(kZAxis, "E"));
        if (run_session(cfg).aborted) ++attacked_aborts;
    }
    CHECK(honest_aborts == 0);
    CHECK(attacked_aborts == sessions);
}
