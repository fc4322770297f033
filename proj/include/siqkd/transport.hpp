#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "siqkd/protocol.hpp"

namespace siqkd {

// ---- Framing ----------------------------------------------------------------
// [tag u8][length u32 LE][payload bytes]. Integers little-endian, floats as
// 64-bit IEEE-754 bit patterns.

struct Frame {
    FrameTag tag;
    std::vector<uint8_t> payload;

    friend bool operator==(const Frame& a, const Frame& b) = default;
};

std::vector<uint8_t> encode_frame(const Frame& frame);
// Consumes exactly one frame from the buffer; truncated input -> FramingError,
// unknown tag -> ProtocolError.
Frame decode_frame(std::span<const uint8_t> bytes);

// ---- Payload codecs -----------------------------------------------------------

std::vector<uint8_t> encode_hello(const HelloMsg& msg);
HelloMsg decode_hello(std::span<const uint8_t> payload);

std::vector<uint8_t> encode_qstate(const QStatePayload& payload);
QStatePayload decode_qstate(std::span<const uint8_t> payload);

std::vector<uint8_t> encode_disclosure(const CheckDisclosure& d);
CheckDisclosure decode_disclosure(std::span<const uint8_t> payload);

std::vector<uint8_t> encode_verdict(const VerdictMsg& v); // tag carries abort/continue
VerdictMsg decode_verdict(FrameTag tag, std::span<const uint8_t> payload);

std::vector<uint8_t> encode_bits(const BitsMsg& msg);
BitsMsg decode_bits(std::span<const uint8_t> payload);

std::string to_hex(std::span<const uint8_t> bytes);

// ---- Eve's tap -----------------------------------------------------------------
// Intercept-resend on the simulated quantum channel: every shot is measured
// along Eve's axis and replaced by the collapsed result. `eve_rng` is the
// session's "eve" substream; draws are keyed by (ensemble, block, shot).
QStatePayload eve_tap(const QStatePayload& payload, const EveStrategy& strategy,
                      const RngStream& eve_rng);

// ---- Byte streams ----------------------------------------------------------------

class ByteStream {
  public:
    virtual ~ByteStream() = default;
    virtual void write_all(std::span<const uint8_t> bytes) = 0;
    virtual void read_exact(uint8_t* dst, size_t count) = 0;
};

// Stream over a connected file descriptor (socket or pipe); owns the fd.
class FdStream : public ByteStream {
  public:
    explicit FdStream(int fd) : fd_(fd) {}
    ~FdStream() override;
    FdStream(const FdStream&) = delete;
    FdStream& operator=(const FdStream&) = delete;

    void write_all(std::span<const uint8_t> bytes) override;
    void read_exact(uint8_t* dst, size_t count) override;

  private:
    int fd_;
};

// Local bidirectional pair, for single-machine two-endpoint tests.
std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> local_stream_pair();

// TCP helpers for two-process runs.
std::unique_ptr<ByteStream> listen_accept(uint16_t port);
std::unique_ptr<ByteStream> connect_to(const std::string& host, uint16_t port);

void send_frame(ByteStream& stream, const Frame& frame);
Frame recv_frame(ByteStream& stream);

// ---- Two-process session runners ------------------------------------------------
// Same message sequence as run_session; Bob's side applies Eve's tap on
// received QSTATE payloads (the tap point of the simulated channel).
SessionReport run_alice_over_stream(const SessionConfig& cfg, ByteStream& stream);
SessionReport run_bob_over_stream(const SessionConfig& cfg, ByteStream& stream);

} // namespace siqkd
