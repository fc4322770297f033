#include "siqkd/protocol.hpp"

#include <cmath>

#include "siqkd/transport.hpp"

namespace siqkd {

const char* frame_tag_name(FrameTag tag) {
    switch (tag) {
        case FrameTag::Hello: return "HELLO";
        case FrameTag::QState: return "QSTATE";
        case FrameTag::CheckDisclose: return "CHECK_DISCLOSE";
        case FrameTag::Abort: return "ABORT";
        case FrameTag::Continue: return "CONTINUE";
        case FrameTag::Mu1: return "MU1";
        case FrameTag::W1: return "W1";
        case FrameTag::U2: return "U2";
        case FrameTag::Done: return "DONE";
    }
    return "UNKNOWN";
}

MeasurementSettings default_settings() {
    const double s = 1.0 / std::sqrt(2.0);
    return MeasurementSettings{
        Observable(kZAxis, "A1"),
        Observable(kXAxis, "A2"),
        Observable({s, 0, s}, "B1"),
        Observable({-s, 0, s}, "B2"),
    };
}

SessionConfig normalize_config(const SessionConfig& cfg) {
    SessionConfig c = cfg;
    if (c.k < 1 || c.k >= c.n)
        throw ConfigError("require 1 <= k < n");
    if (c.shots_per_ensemble < 4 || c.shots_per_ensemble % 4 != 0)
        throw ConfigError("shots_per_ensemble must be a positive multiple of 4");
    if (!(c.threshold > 0.0) || c.threshold > kTsirelsonBound + kUnitTol)
        throw ConfigError("threshold must lie in (0, 2*sqrt(2)]");
    if (!(c.y1_complement_prob >= 0.0 && c.y1_complement_prob <= 1.0))
        throw ConfigError("y1_complement_prob must lie in [0, 1]");
    const size_t m = c.n - c.k;
    if (c.M.rows() == 0)
        c.M = BinaryMatrix::identity(m);
    if (c.M.rows() != m || c.M.cols() != m)
        throw ConfigError("M must be square of size n-k");
    if (!c.M.inverse())
        throw ConfigError("M must be invertible over GF(2)");
    if (c.hash.input_length == 0 && c.hash.output_length == 0) {
        c.hash.input_length = m;
        c.hash.output_length = m;
        if (c.hash.seed == 0) c.hash.seed = c.master_seed;
    }
    if (c.hash.input_length != m)
        throw ConfigError("hash input length must equal n-k");
    if (c.hash.output_length > c.hash.input_length)
        throw ConfigError("hash output length must not exceed n-k");
    if (c.x1 && c.x1->size() != c.n) throw ConfigError("x1 override must have length n");
    if (c.y1 && c.y1->size() != c.n) throw ConfigError("y1 override must have length n");
    if (c.x2 && c.x2->size() != c.n) throw ConfigError("x2 override must have length n");
    return c;
}

namespace {

RngStream session_root(const SessionConfig& cfg) {
    return RngStream(cfg.master_seed, "session");
}

BitString derive_x1(const SessionConfig& cfg) {
    if (cfg.x1) return *cfg.x1;
    RngStream rng = session_root(cfg).substream("x1");
    return BitString::random(cfg.n, rng);
}

BitString derive_y1(const SessionConfig& cfg, const BitString& x1) {
    if (cfg.y1) return *cfg.y1;
    RngStream rng = session_root(cfg).substream("y1");
    BitString y1(cfg.n);
    for (size_t i = 0; i < cfg.n; ++i) {
        bool complement = rng.next_unit() < cfg.y1_complement_prob;
        y1.set(i, complement ? (x1.at(i) ^ 1u) : x1.at(i));
    }
    return y1;
}

HelloMsg make_hello(const SessionConfig& cfg) {
    return HelloMsg{kProtocolVersion, cfg.n, cfg.k, cfg.shots_per_ensemble,
                    {cfg.settings.a1.axis, cfg.settings.a2.axis, cfg.settings.b1.axis,
                     cfg.settings.b2.axis}};
}

void check_hello(const SessionConfig& cfg, const HelloMsg& peer) {
    HelloMsg mine = make_hello(cfg);
    if (peer.version != mine.version) throw ProtocolError("protocol version mismatch");
    if (peer.n != mine.n || peer.k != mine.k ||
        peer.shots_per_ensemble != mine.shots_per_ensemble)
        throw ProtocolError("session parameters disagree in HELLO");
    for (size_t i = 0; i < 4; ++i)
        if (!(peer.axes[i] == mine.axes[i]))
            throw ProtocolError("measurement settings disagree in HELLO");
}

} // namespace

Observable select_observable(int bit, Side side, const MeasurementSettings& settings) {
    if (bit != 0 && bit != 1) throw ConfigError("selection bit must be 0 or 1");
    if (side == Side::Alice) return bit == 0 ? settings.a1 : settings.a2;
    return bit == 0 ? settings.b1 : settings.b2;
}

bool decide_abort(const ChshEstimate& chsh, double threshold) {
    return chsh.value < threshold;
}

const Observable& check_block_alice_axis(const MeasurementSettings& s, size_t block) {
    return block < 2 ? s.a1 : s.a2;
}

const Observable& check_block_bob_axis(const MeasurementSettings& s, size_t block) {
    return block % 2 == 0 ? s.b1 : s.b2;
}

// ---- Alice -------------------------------------------------------------------

AliceEndpoint::AliceEndpoint(const SessionConfig& cfg)
    : cfg_(normalize_config(cfg)), rng_(session_root(cfg_).substream("alice")) {
    x1_ = derive_x1(cfg_);
    if (cfg_.x2) {
        x2_ = *cfg_.x2;
    } else {
        RngStream x2_rng = session_root(cfg_).substream("x2");
        x2_ = BitString::random(cfg_.n, x2_rng);
    }
    u1_ = x1_ ^ x2_;
    check_outcomes_.resize(cfg_.k);
}

HelloMsg AliceEndpoint::hello() const { return make_hello(cfg_); }

void AliceEndpoint::on_hello(const HelloMsg& peer) { check_hello(cfg_, peer); }

QStatePayload AliceEndpoint::measure_ensemble(uint32_t index) {
    if (index >= cfg_.n) throw ProtocolError("ensemble index out of range");
    QStatePayload payload;
    payload.ensemble_index = index;
    RngStream ensemble_rng = rng_.split(index);
    if (index < cfg_.k) {
        // Check ensemble: four equal blocks, one per CHSH term.
        const uint32_t block_shots = cfg_.shots_per_ensemble / kCheckBlocks;
        for (size_t b = 0; b < kCheckBlocks; ++b) {
            const Observable& obs = check_block_alice_axis(cfg_.settings, b);
            ShotBlock block;
            block.axis = obs.axis;
            block.outcomes.resize(block_shots);
            RngStream block_rng = ensemble_rng.split(b);
            for (uint32_t s = 0; s < block_shots; ++s) {
                RngStream shot_rng = block_rng.split(s);
                block.outcomes[s] = static_cast<int8_t>(
                    shot_rng.next_sign(outcome_probability(cfg_.initial_state, obs, +1)));
            }
            check_outcomes_[index][b] = block.outcomes;
            payload.blocks.push_back(std::move(block));
        }
    } else {
        const Observable obs = select_observable(u1_.at(index), Side::Alice, cfg_.settings);
        ShotBlock block;
        block.axis = obs.axis;
        block.outcomes.resize(cfg_.shots_per_ensemble);
        RngStream block_rng = ensemble_rng.split(0);
        for (uint32_t s = 0; s < cfg_.shots_per_ensemble; ++s) {
            RngStream shot_rng = block_rng.split(s);
            block.outcomes[s] = static_cast<int8_t>(
                shot_rng.next_sign(outcome_probability(cfg_.initial_state, obs, +1)));
        }
        payload.blocks.push_back(std::move(block));
    }
    return payload;
}

VerdictMsg AliceEndpoint::evaluate_checks(const CheckDisclosure& disclosure) {
    if (disclosure.ensembles.size() != cfg_.k)
        throw ProtocolError("check disclosure must cover exactly k ensembles");
    for (size_t t = 0; t < kCheckBlocks; ++t) {
        std::vector<int> products;
        for (size_t e = 0; e < cfg_.k; ++e) {
            const auto& blocks = disclosure.ensembles[e];
            if (blocks.size() != kCheckBlocks)
                throw ProtocolError("check ensemble must have four blocks");
            const auto& bob = blocks[t];
            const auto& alice = check_outcomes_[e][t];
            if (bob.outcomes.size() != alice.size())
                throw ProtocolError("shot counts disagree in check disclosure");
            for (size_t s = 0; s < alice.size(); ++s)
                products.push_back(alice[s] * bob.outcomes[s]);
        }
        chsh_.per_term[t] = summarize_products(products);
    }
    chsh_.value = std::abs(chsh_.per_term[0].mean + chsh_.per_term[1].mean +
                           chsh_.per_term[2].mean - chsh_.per_term[3].mean);
    double var = 0.0;
    for (const auto& term : chsh_.per_term) var += term.std_error * term.std_error;
    chsh_.std_error = std::sqrt(var);
    aborted_ = decide_abort(chsh_, cfg_.threshold);
    return VerdictMsg{aborted_, chsh_.value, chsh_.std_error};
}

BitsMsg AliceEndpoint::mu1_message() const {
    const size_t m = cfg_.n - cfg_.k;
    return BitsMsg{matvec(cfg_.M, u1_.tail(m))};
}

void AliceEndpoint::on_w1(const BitsMsg& w1) {
    const size_t m = cfg_.n - cfg_.k;
    u2_ = alice_reply(x1_.tail(m), w1.bits, cfg_.M);
}

BitsMsg AliceEndpoint::u2_message() const {
    if (u2_.empty()) throw ProtocolError("U2 requested before W1 was received");
    return BitsMsg{u2_};
}

BitString AliceEndpoint::key() const {
    return distill_key(cfg_.hash, x2_.tail(cfg_.n - cfg_.k));
}

// ---- Bob ---------------------------------------------------------------------

BobEndpoint::BobEndpoint(const SessionConfig& cfg)
    : cfg_(normalize_config(cfg)), rng_(session_root(cfg_).substream("bob")) {
    y1_ = derive_y1(cfg_, derive_x1(cfg_));
    check_blocks_.resize(cfg_.k);
}

HelloMsg BobEndpoint::hello() const { return make_hello(cfg_); }

void BobEndpoint::on_hello(const HelloMsg& peer) { check_hello(cfg_, peer); }

void BobEndpoint::on_qstate(const QStatePayload& payload) {
    const uint32_t i = payload.ensemble_index;
    if (i >= cfg_.n) throw ProtocolError("ensemble index out of range");
    if (i < cfg_.k) {
        if (payload.blocks.size() != kCheckBlocks)
            throw ProtocolError("check ensemble payload must have four blocks");
        RngStream ensemble_rng = rng_.split(i);
        std::vector<ShotBlock> measured(kCheckBlocks);
        for (size_t b = 0; b < kCheckBlocks; ++b) {
            const Observable incoming(payload.blocks[b].axis);
            const Observable& obs = check_block_bob_axis(cfg_.settings, b);
            measured[b].axis = obs.axis;
            measured[b].outcomes.resize(payload.blocks[b].outcomes.size());
            RngStream block_rng = ensemble_rng.split(b);
            for (size_t s = 0; s < measured[b].outcomes.size(); ++s) {
                RngStream shot_rng = block_rng.split(s);
                measured[b].outcomes[s] = static_cast<int8_t>(shot_rng.next_sign(
                    conditional_probability(incoming, payload.blocks[b].outcomes[s], obs, +1)));
            }
        }
        check_blocks_[i] = std::move(measured);
    } else {
        if (payload.blocks.size() != 1)
            throw ProtocolError("key ensemble payload must have one block");
        pending_.push_back(payload); // measured only after a CONTINUE verdict
    }
}

CheckDisclosure BobEndpoint::disclose_checks() const {
    return CheckDisclosure{check_blocks_};
}

void BobEndpoint::measure_key_ensembles() {
    y2_ = BitString(cfg_.n - cfg_.k);
    for (const auto& payload : pending_) {
        const uint32_t i = payload.ensemble_index;
        const Observable incoming(payload.blocks[0].axis);
        const Observable obs = select_observable(y1_.at(i), Side::Bob, cfg_.settings);
        RngStream block_rng = rng_.split(i).split(0);
        int first_outcome = 0;
        for (size_t s = 0; s < payload.blocks[0].outcomes.size(); ++s) {
            RngStream shot_rng = block_rng.split(s);
            int l = shot_rng.next_sign(
                conditional_probability(incoming, payload.blocks[0].outcomes[s], obs, +1));
            if (s == 0) first_outcome = l;
        }
        // Ensemble-to-bit rule: the first shot's outcome, +1 -> 0, -1 -> 1.
        y2_.set(i - cfg_.k, first_outcome == +1 ? 0 : 1);
    }
}

void BobEndpoint::on_verdict(const VerdictMsg& verdict) {
    verdict_seen_ = true;
    aborted_ = verdict.abort_session;
    chsh_.value = verdict.chsh_value;
    chsh_.std_error = verdict.chsh_std_error;
    if (!aborted_) measure_key_ensembles();
}

void BobEndpoint::on_mu1(const BitsMsg& mu1) {
    if (!verdict_seen_ || aborted_)
        throw ProtocolError("MU1 outside a continuing session");
    const size_t m = cfg_.n - cfg_.k;
    BobRound round = bob_round(y1_.tail(m), y2_, mu1.bits);
    v1_ = round.v1;
    w1_ = round.w1;
}

BitsMsg BobEndpoint::w1_message() const {
    if (w1_.empty()) throw ProtocolError("W1 requested before MU1 was received");
    return BitsMsg{w1_};
}

void BobEndpoint::on_u2(const BitsMsg& u2) {
    if (v1_.empty()) throw ProtocolError("U2 received before MU1");
    x2_recovered_ = bob_recover(u2.bits, v1_);
}

BitString BobEndpoint::key() const {
    if (x2_recovered_.empty()) throw ProtocolError("key requested before U2");
    return distill_key(cfg_.hash, x2_recovered_, cfg_.M);
}

// ---- In-process session --------------------------------------------------------

SessionReport run_session(const SessionConfig& raw) {
    SessionConfig cfg = normalize_config(raw);
    AliceEndpoint alice(cfg);
    BobEndpoint bob(cfg);
    SessionReport report;
    report.ideal_key_rate = static_cast<double>(cfg.n - cfg.k) / cfg.n;

    auto log = [&report](FrameTag tag, const std::vector<uint8_t>& payload) {
        report.transcript.push_back(
            {frame_tag_name(tag), to_hex(encode_frame(Frame{tag, payload}))});
    };
    auto note = [&report](std::string label, std::string text) {
        report.transcript.push_back({"note:" + std::move(label), std::move(text)});
    };

    HelloMsg ha = alice.hello();
    HelloMsg hb = bob.hello();
    log(FrameTag::Hello, encode_hello(ha));
    log(FrameTag::Hello, encode_hello(hb));
    alice.on_hello(hb);
    bob.on_hello(ha);

    note("check-allocation",
         "each of the k check ensembles is split into four equal shot blocks, "
         "one per CHSH term (a1,b1) (a1,b2) (a2,b1) (a2,b2)");

    RngStream eve_rng = session_root(cfg).substream("eve");
    for (uint32_t i = 0; i < cfg.n; ++i) {
        QStatePayload sent = alice.measure_ensemble(i);
        log(FrameTag::QState, encode_qstate(sent));
        bob.on_qstate(eve_tap(sent, cfg.eve, eve_rng));
    }

    CheckDisclosure disclosure = bob.disclose_checks();
    log(FrameTag::CheckDisclose, encode_disclosure(disclosure));
    VerdictMsg verdict = alice.evaluate_checks(disclosure);
    log(verdict.abort_session ? FrameTag::Abort : FrameTag::Continue,
        encode_verdict(verdict));
    bob.on_verdict(verdict);

    report.chsh = alice.chsh();
    report.aborted = verdict.abort_session;

    if (!verdict.abort_session) {
        BitsMsg mu1 = alice.mu1_message();
        log(FrameTag::Mu1, encode_bits(mu1));
        bob.on_mu1(mu1);
        BitsMsg w1 = bob.w1_message();
        log(FrameTag::W1, encode_bits(w1));
        alice.on_w1(w1);
        BitsMsg u2 = alice.u2_message();
        log(FrameTag::U2, encode_bits(u2));
        bob.on_u2(u2);
        report.key_alice = alice.key();
        report.key_bob = bob.key();
    }
    log(FrameTag::Done, {});
    return report;
}

} // namespace siqkd
