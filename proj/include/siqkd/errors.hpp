#pragma once

#include <stdexcept>
#include <string>

namespace siqkd {

struct InvalidObservable : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidRotation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidState : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SettingsDegenerate : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Wire-level: payload shorter than its declared length, bad magic, etc.
struct FramingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Session-level: unknown tag, out-of-order message, mismatched HELLO.
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace siqkd
