#include "siqkd/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include "siqkd/toner_bacon.hpp"

namespace siqkd {

namespace {

constexpr size_t kMaxFramePayload = 1u << 28;

struct Writer {
    std::vector<uint8_t> bytes;

    void u8(uint8_t v) { bytes.push_back(v); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
    void vec(BlochVector v) {
        f64(v.x);
        f64(v.y);
        f64(v.z);
    }
    void raw(const std::vector<uint8_t>& v) {
        bytes.insert(bytes.end(), v.begin(), v.end());
    }
};

struct Reader {
    std::span<const uint8_t> bytes;
    size_t pos = 0;

    void need(size_t count) const {
        if (pos + count > bytes.size()) throw FramingError("payload truncated");
    }
    uint8_t u8() {
        need(1);
        return bytes[pos++];
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    BlochVector vec() {
        double x = f64(), y = f64(), z = f64();
        return {x, y, z};
    }
    std::vector<uint8_t> raw(size_t count) {
        need(count);
        auto first = bytes.begin() + pos;
        pos += count;
        return {first, first + count};
    }
    void done() const {
        if (pos != bytes.size()) throw FramingError("trailing bytes in payload");
    }
};

bool valid_tag(uint8_t t) {
    return t >= static_cast<uint8_t>(FrameTag::Hello) &&
           t <= static_cast<uint8_t>(FrameTag::Done);
}

// Outcomes packed as bits, 1 = +1, MSB-first within each byte.
void put_outcomes(Writer& w, const std::vector<int8_t>& outcomes) {
    w.u32(static_cast<uint32_t>(outcomes.size()));
    std::vector<uint8_t> packed((outcomes.size() + 7) / 8, 0);
    for (size_t i = 0; i < outcomes.size(); ++i)
        if (outcomes[i] > 0) packed[i / 8] |= static_cast<uint8_t>(0x80u >> (i % 8));
    w.raw(packed);
}

std::vector<int8_t> get_outcomes(Reader& r) {
    uint32_t count = r.u32();
    auto packed = r.raw((count + 7) / 8);
    std::vector<int8_t> outcomes(count);
    for (uint32_t i = 0; i < count; ++i)
        outcomes[i] = (packed[i / 8] >> (7 - i % 8)) & 1u ? +1 : -1;
    return outcomes;
}

void put_block(Writer& w, const ShotBlock& block) {
    w.vec(block.axis);
    put_outcomes(w, block.outcomes);
}

ShotBlock get_block(Reader& r) {
    ShotBlock block;
    block.axis = r.vec();
    block.outcomes = get_outcomes(r);
    return block;
}

} // namespace

std::vector<uint8_t> encode_frame(const Frame& frame) {
    Writer w;
    w.u8(static_cast<uint8_t>(frame.tag));
    w.u32(static_cast<uint32_t>(frame.payload.size()));
    w.raw(frame.payload);
    return w.bytes;
}

Frame decode_frame(std::span<const uint8_t> bytes) {
    Reader r{bytes};
    uint8_t tag = r.u8();
    if (!valid_tag(tag)) throw ProtocolError("unknown frame tag");
    uint32_t length = r.u32();
    if (length > kMaxFramePayload) throw FramingError("frame payload too large");
    Frame frame{static_cast<FrameTag>(tag), r.raw(length)};
    r.done();
    return frame;
}

std::vector<uint8_t> encode_hello(const HelloMsg& msg) {
    Writer w;
    w.u32(msg.version);
    w.u32(msg.n);
    w.u32(msg.k);
    w.u32(msg.shots_per_ensemble);
    for (const auto& axis : msg.axes) w.vec(axis);
    return w.bytes;
}

HelloMsg decode_hello(std::span<const uint8_t> payload) {
    Reader r{payload};
    HelloMsg msg;
    msg.version = r.u32();
    msg.n = r.u32();
    msg.k = r.u32();
    msg.shots_per_ensemble = r.u32();
    for (auto& axis : msg.axes) axis = r.vec();
    r.done();
    return msg;
}

std::vector<uint8_t> encode_qstate(const QStatePayload& payload) {
    Writer w;
    w.u32(payload.ensemble_index);
    w.u32(static_cast<uint32_t>(payload.blocks.size()));
    for (const auto& block : payload.blocks) put_block(w, block);
    return w.bytes;
}

QStatePayload decode_qstate(std::span<const uint8_t> bytes) {
    Reader r{bytes};
    QStatePayload payload;
    payload.ensemble_index = r.u32();
    uint32_t blocks = r.u32();
    for (uint32_t b = 0; b < blocks; ++b) payload.blocks.push_back(get_block(r));
    r.done();
    return payload;
}

std::vector<uint8_t> encode_disclosure(const CheckDisclosure& d) {
    Writer w;
    w.u32(static_cast<uint32_t>(d.ensembles.size()));
    for (const auto& blocks : d.ensembles) {
        w.u32(static_cast<uint32_t>(blocks.size()));
        for (const auto& block : blocks) put_block(w, block);
    }
    return w.bytes;
}

CheckDisclosure decode_disclosure(std::span<const uint8_t> bytes) {
    Reader r{bytes};
    CheckDisclosure d;
    uint32_t ensembles = r.u32();
    for (uint32_t e = 0; e < ensembles; ++e) {
        uint32_t blocks = r.u32();
        std::vector<ShotBlock> list;
        for (uint32_t b = 0; b < blocks; ++b) list.push_back(get_block(r));
        d.ensembles.push_back(std::move(list));
    }
    r.done();
    return d;
}

std::vector<uint8_t> encode_verdict(const VerdictMsg& v) {
    Writer w;
    w.f64(v.chsh_value);
    w.f64(v.chsh_std_error);
    return w.bytes;
}

VerdictMsg decode_verdict(FrameTag tag, std::span<const uint8_t> bytes) {
    if (tag != FrameTag::Abort && tag != FrameTag::Continue)
        throw ProtocolError("verdict frame must be ABORT or CONTINUE");
    Reader r{bytes};
    VerdictMsg v;
    v.abort_session = tag == FrameTag::Abort;
    v.chsh_value = r.f64();
    v.chsh_std_error = r.f64();
    r.done();
    return v;
}

std::vector<uint8_t> encode_bits(const BitsMsg& msg) {
    Writer w;
    w.u32(static_cast<uint32_t>(msg.bits.size()));
    w.raw(msg.bits.packed());
    return w.bytes;
}

BitsMsg decode_bits(std::span<const uint8_t> bytes) {
    Reader r{bytes};
    uint32_t length = r.u32();
    auto packed = r.raw((length + 7) / 8);
    r.done();
    return BitsMsg{BitString::from_packed(packed, length)};
}

std::string to_hex(std::span<const uint8_t> bytes) {
    static const char digits[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        hex.push_back(digits[b >> 4]);
        hex.push_back(digits[b & 0xF]);
    }
    return hex;
}

QStatePayload eve_tap(const QStatePayload& payload, const EveStrategy& strategy,
                      const RngStream& eve_rng) {
    if (strategy.kind == EveStrategy::Kind::None) return payload;
    RngStream ensemble_rng = eve_rng.split(payload.ensemble_index);
    Observable axis = strategy.axis;
    if (strategy.kind == EveStrategy::Kind::InterceptRandom) {
        RngStream axis_rng = ensemble_rng.substream("axis");
        axis = Observable(random_unit_vector(axis_rng), "E");
    }
    QStatePayload out;
    out.ensemble_index = payload.ensemble_index;
    for (size_t b = 0; b < payload.blocks.size(); ++b) {
        const Observable incoming(payload.blocks[b].axis);
        ShotBlock block;
        block.axis = axis.axis;
        block.outcomes.resize(payload.blocks[b].outcomes.size());
        RngStream block_rng = ensemble_rng.split(b);
        for (size_t s = 0; s < block.outcomes.size(); ++s) {
            RngStream shot_rng = block_rng.split(s);
            block.outcomes[s] = static_cast<int8_t>(shot_rng.next_sign(
                conditional_probability(incoming, payload.blocks[b].outcomes[s], axis, +1)));
        }
        out.blocks.push_back(std::move(block));
    }
    return out;
}

// ---- Streams --------------------------------------------------------------

FdStream::~FdStream() {
    if (fd_ >= 0) ::close(fd_);
}

void FdStream::write_all(std::span<const uint8_t> bytes) {
    size_t off = 0;
    while (off < bytes.size()) {
        ssize_t w = ::write(fd_, bytes.data() + off, bytes.size() - off);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("write failed: ") + std::strerror(errno));
        }
        off += static_cast<size_t>(w);
    }
}

void FdStream::read_exact(uint8_t* dst, size_t count) {
    size_t off = 0;
    while (off < count) {
        ssize_t r = ::read(fd_, dst + off, count - off);
        if (r < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("read failed: ") + std::strerror(errno));
        }
        if (r == 0) throw TransportError("peer closed the stream");
        off += static_cast<size_t>(r);
    }
}

std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> local_stream_pair() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0)
        throw TransportError(std::string("socketpair failed: ") + std::strerror(errno));
    return {std::make_unique<FdStream>(fds[0]), std::make_unique<FdStream>(fds[1])};
}

std::unique_ptr<ByteStream> listen_accept(uint16_t port) {
    int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) throw TransportError("socket failed");
    int one = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(listener);
        throw TransportError(std::string("bind failed: ") + std::strerror(errno));
    }
    if (::listen(listener, 1) != 0) {
        ::close(listener);
        throw TransportError("listen failed");
    }
    int conn = ::accept(listener, nullptr, nullptr);
    ::close(listener);
    if (conn < 0) throw TransportError("accept failed");
    return std::make_unique<FdStream>(conn);
}

std::unique_ptr<ByteStream> connect_to(const std::string& host, uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &result) != 0)
        throw TransportError("cannot resolve host: " + host);
    int fd = -1;
    for (int attempt = 0; attempt < 50 && fd < 0; ++attempt) {
        fd = ::socket(result->ai_family, result->ai_socktype, result->ai_protocol);
        if (fd < 0) break;
        if (::connect(fd, result->ai_addr, result->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    ::freeaddrinfo(result);
    if (fd < 0) throw TransportError("cannot connect to " + host);
    return std::make_unique<FdStream>(fd);
}

void send_frame(ByteStream& stream, const Frame& frame) {
    stream.write_all(encode_frame(frame));
}

Frame recv_frame(ByteStream& stream) {
    uint8_t header[5];
    stream.read_exact(header, sizeof(header));
    if (!valid_tag(header[0])) throw ProtocolError("unknown frame tag");
    uint32_t length = 0;
    for (int i = 0; i < 4; ++i) length |= static_cast<uint32_t>(header[1 + i]) << (8 * i);
    if (length > kMaxFramePayload) throw FramingError("frame payload too large");
    Frame frame{static_cast<FrameTag>(header[0]), std::vector<uint8_t>(length)};
    if (length > 0) stream.read_exact(frame.payload.data(), length);
    return frame;
}

// ---- Two-process runners ----------------------------------------------------

namespace {

Frame expect_frame(ByteStream& stream, FrameTag expected) {
    Frame frame = recv_frame(stream);
    if (frame.tag != expected)
        throw ProtocolError(std::string("expected ") + frame_tag_name(expected) +
                            ", received " + frame_tag_name(frame.tag));
    return frame;
}

Frame expect_verdict(ByteStream& stream) {
    Frame frame = recv_frame(stream);
    if (frame.tag != FrameTag::Abort && frame.tag != FrameTag::Continue)
        throw ProtocolError("expected a verdict frame");
    return frame;
}

} // namespace

SessionReport run_alice_over_stream(const SessionConfig& raw, ByteStream& stream) {
    SessionConfig cfg = normalize_config(raw);
    AliceEndpoint alice(cfg);
    SessionReport report;
    report.ideal_key_rate = static_cast<double>(cfg.n - cfg.k) / cfg.n;

    auto send = [&](FrameTag tag, std::vector<uint8_t> payload) {
        Frame frame{tag, std::move(payload)};
        report.transcript.push_back({frame_tag_name(tag), to_hex(encode_frame(frame))});
        send_frame(stream, frame);
    };
    auto log_recv = [&](const Frame& frame) {
        report.transcript.push_back(
            {frame_tag_name(frame.tag), to_hex(encode_frame(frame))});
    };

    send(FrameTag::Hello, encode_hello(alice.hello()));
    Frame peer_hello = expect_frame(stream, FrameTag::Hello);
    log_recv(peer_hello);
    alice.on_hello(decode_hello(peer_hello.payload));

    for (uint32_t i = 0; i < cfg.n; ++i)
        send(FrameTag::QState, encode_qstate(alice.measure_ensemble(i)));

    Frame disclosure_frame = expect_frame(stream, FrameTag::CheckDisclose);
    log_recv(disclosure_frame);
    VerdictMsg verdict = alice.evaluate_checks(decode_disclosure(disclosure_frame.payload));
    send(verdict.abort_session ? FrameTag::Abort : FrameTag::Continue,
         encode_verdict(verdict));

    report.chsh = alice.chsh();
    report.aborted = verdict.abort_session;

    if (!verdict.abort_session) {
        send(FrameTag::Mu1, encode_bits(alice.mu1_message()));
        Frame w1 = expect_frame(stream, FrameTag::W1);
        log_recv(w1);
        alice.on_w1(decode_bits(w1.payload));
        send(FrameTag::U2, encode_bits(alice.u2_message()));
        report.key_alice = alice.key();
    }
    Frame done = expect_frame(stream, FrameTag::Done);
    log_recv(done);
    return report;
}

SessionReport run_bob_over_stream(const SessionConfig& raw, ByteStream& stream) {
    SessionConfig cfg = normalize_config(raw);
    BobEndpoint bob(cfg);
    SessionReport report;
    report.ideal_key_rate = static_cast<double>(cfg.n - cfg.k) / cfg.n;

    auto send = [&](FrameTag tag, std::vector<uint8_t> payload) {
        Frame frame{tag, std::move(payload)};
        report.transcript.push_back({frame_tag_name(tag), to_hex(encode_frame(frame))});
        send_frame(stream, frame);
    };
    auto log_recv = [&](const Frame& frame) {
        report.transcript.push_back(
            {frame_tag_name(frame.tag), to_hex(encode_frame(frame))});
    };

    Frame peer_hello = expect_frame(stream, FrameTag::Hello);
    log_recv(peer_hello);
    bob.on_hello(decode_hello(peer_hello.payload));
    send(FrameTag::Hello, encode_hello(bob.hello()));

    // The tap point of the simulated quantum channel sits on the receive path.
    RngStream eve_rng = RngStream(cfg.master_seed, "session").substream("eve");
    for (uint32_t i = 0; i < cfg.n; ++i) {
        Frame qstate = expect_frame(stream, FrameTag::QState);
        log_recv(qstate);
        bob.on_qstate(eve_tap(decode_qstate(qstate.payload), cfg.eve, eve_rng));
    }

    send(FrameTag::CheckDisclose, encode_disclosure(bob.disclose_checks()));
    Frame verdict_frame = expect_verdict(stream);
    log_recv(verdict_frame);
    VerdictMsg verdict = decode_verdict(verdict_frame.tag, verdict_frame.payload);
    bob.on_verdict(verdict);

    report.chsh = bob.chsh();
    report.aborted = verdict.abort_session;

    if (!verdict.abort_session) {
        Frame mu1 = expect_frame(stream, FrameTag::Mu1);
        log_recv(mu1);
        bob.on_mu1(decode_bits(mu1.payload));
        send(FrameTag::W1, encode_bits(bob.w1_message()));
        Frame u2 = expect_frame(stream, FrameTag::U2);
        log_recv(u2);
        bob.on_u2(decode_bits(u2.payload));
        report.key_bob = bob.key();
    }
    send(FrameTag::Done, {});
    return report;
}

} // namespace siqkd
