#pragma once

#include <string>

#include "siqkd/protocol.hpp"

namespace siqkd {

// Single ndjson line with the fixed report schema:
// chsh_value, chsh_stderr, aborted, key_alice_hex, key_bob_hex, key_rate,
// transcript (list of {label, data}), plus session identifiers.
std::string report_to_json(const SessionReport& report, uint64_t master_seed,
                           bool include_transcript = true);

} // namespace siqkd
