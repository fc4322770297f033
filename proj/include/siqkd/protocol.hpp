#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "siqkd/bloch.hpp"
#include "siqkd/chsh.hpp"
#include "siqkd/gf2.hpp"
#include "siqkd/rng.hpp"
#include "siqkd/sampling.hpp"

namespace siqkd {

inline constexpr uint32_t kProtocolVersion = 1;

// ---- Protocol messages ----------------------------------------------------

enum class FrameTag : uint8_t {
    Hello = 1,
    QState = 2,
    CheckDisclose = 3,
    Abort = 4,
    Continue = 5,
    Mu1 = 6,
    W1 = 7,
    U2 = 8,
    Done = 9,
};

const char* frame_tag_name(FrameTag tag);

struct HelloMsg {
    uint32_t version = kProtocolVersion;
    uint32_t n = 0;
    uint32_t k = 0;
    uint32_t shots_per_ensemble = 0;
    std::array<BlochVector, 4> axes{}; // a1 a2 b1 b2
};

// One measured sub-ensemble in transit: the sender's axis plus the per-shot
// collapsed outcomes along it. The shot's state is collapse(axis, outcome).
struct ShotBlock {
    BlochVector axis{};
    std::vector<int8_t> outcomes; // +1/-1 per shot
};

struct QStatePayload {
    uint32_t ensemble_index = 0;
    std::vector<ShotBlock> blocks;
};

// Bob's t4 disclosure: for every check ensemble and block, his observable
// axis and shot-aligned outcomes, so Alice can form the joint k*l statistics.
struct CheckDisclosure {
    std::vector<std::vector<ShotBlock>> ensembles;
};

struct VerdictMsg {
    bool abort_session = false;
    double chsh_value = 0.0;
    double chsh_std_error = 0.0;
};

struct BitsMsg {
    BitString bits;
};

// ---- Session configuration -------------------------------------------------

struct EveStrategy {
    enum class Kind { None, InterceptFixed, InterceptRandom };
    Kind kind = Kind::None;
    Observable axis; // used by InterceptFixed

    static EveStrategy none() { return {}; }
    static EveStrategy intercept_fixed(Observable a) {
        return {Kind::InterceptFixed, std::move(a)};
    }
    static EveStrategy intercept_random() { return {Kind::InterceptRandom, {}}; }
};

MeasurementSettings default_settings(); // a1=z a2=x b1=(z+x)/sqrt2 b2=(z-x)/sqrt2

struct SessionConfig {
    uint32_t n = 5;
    uint32_t k = 2;
    uint32_t shots_per_ensemble = 100000; // must be divisible by 4
    MeasurementSettings settings = default_settings();
    double threshold = 2.0; // abort when the CHSH estimate falls below
    uint64_t master_seed = 1;
    EnsembleState initial_state{}; // fully mixed by default
    BinaryMatrix M;                // empty -> identity of size n-k
    HashSpec hash;                 // zero lengths -> Toeplitz, n-k -> n-k
    EveStrategy eve = EveStrategy::none();

    // Overrides for the shared correlated strings and Alice's secret.
    std::optional<BitString> x1, y1, x2;
    // P(y1_i = complement of x1_i); 1.0 reproduces the toy distribution.
    double y1_complement_prob = 1.0;
};

// Validates and fills defaulted fields (M, hash).
SessionConfig normalize_config(const SessionConfig& cfg);

struct TranscriptEntry {
    std::string label;
    std::string data; // frame bytes in hex, or plain text for local notes
};

struct SessionReport {
    ChshEstimate chsh{};
    bool aborted = false;
    std::vector<TranscriptEntry> transcript;
    std::optional<BitString> key_alice, key_bob;
    double ideal_key_rate = 0.0;
};

// ---- Operations -------------------------------------------------------------

enum class Side { Alice, Bob };

// Observable selection scheme: 0 -> A1/B1, 1 -> A2/B2.
Observable select_observable(int bit, Side side, const MeasurementSettings& settings);

bool decide_abort(const ChshEstimate& chsh, double threshold);

// Check-ensemble block layout: four equal blocks per check ensemble, one per
// CHSH term, in the order (a1,b1) (a1,b2) (a2,b1) (a2,b2).
inline constexpr size_t kCheckBlocks = 4;
const Observable& check_block_alice_axis(const MeasurementSettings& s, size_t block);
const Observable& check_block_bob_axis(const MeasurementSettings& s, size_t block);

// ---- Endpoints ---------------------------------------------------------------
// Both endpoints are driven by the same message sequence whether the peer is
// in-process or across a byte stream, so the two modes produce identical
// sessions for a given master seed.

class AliceEndpoint {
  public:
    explicit AliceEndpoint(const SessionConfig& cfg);

    HelloMsg hello() const;
    void on_hello(const HelloMsg& peer);
    QStatePayload measure_ensemble(uint32_t index);
    VerdictMsg evaluate_checks(const CheckDisclosure& disclosure);
    BitsMsg mu1_message() const;
    void on_w1(const BitsMsg& w1);
    BitsMsg u2_message() const;

    const ChshEstimate& chsh() const { return chsh_; }
    bool aborted() const { return aborted_; }
    BitString key() const;
    const BitString& x1() const { return x1_; }
    const BitString& u1() const { return u1_; }

  private:
    SessionConfig cfg_;
    RngStream rng_;
    BitString x1_, x2_, u1_;
    // Alice's own check outcomes, [ensemble][block][shot].
    std::vector<std::array<std::vector<int8_t>, kCheckBlocks>> check_outcomes_;
    ChshEstimate chsh_{};
    bool aborted_ = false;
    BitString u2_;
};

class BobEndpoint {
  public:
    explicit BobEndpoint(const SessionConfig& cfg);

    HelloMsg hello() const;
    void on_hello(const HelloMsg& peer);
    void on_qstate(const QStatePayload& payload);
    CheckDisclosure disclose_checks() const;
    void on_verdict(const VerdictMsg& verdict);
    void on_mu1(const BitsMsg& mu1);
    BitsMsg w1_message() const;
    void on_u2(const BitsMsg& u2);

    const ChshEstimate& chsh() const { return chsh_; }
    bool aborted() const { return aborted_; }
    BitString key() const;
    const BitString& y1() const { return y1_; }
    const BitString& y2() const { return y2_; }

  private:
    void measure_key_ensembles();

    SessionConfig cfg_;
    RngStream rng_;
    BitString y1_;
    std::vector<QStatePayload> pending_; // key ensembles, measured after CONTINUE
    std::vector<std::vector<ShotBlock>> check_blocks_;
    BitString y2_, v1_, w1_, x2_recovered_;
    ChshEstimate chsh_{};
    bool aborted_ = false;
    bool verdict_seen_ = false;
};

// Full session with both roles in one process; Eve's tap sits between the
// endpoints exactly where the transport would apply it.
SessionReport run_session(const SessionConfig& cfg);

} // namespace siqkd
