#include "siqkd/report.hpp"

#include <json.hpp>

namespace siqkd {

std::string report_to_json(const SessionReport& report, uint64_t master_seed,
                           bool include_transcript) {
    nlohmann::ordered_json j;
    j["seed"] = master_seed;
    j["chsh_value"] = report.chsh.value;
    j["chsh_stderr"] = report.chsh.std_error;
    j["aborted"] = report.aborted;
    j["key_alice_hex"] = report.key_alice ? report.key_alice->to_hex() : "";
    j["key_bob_hex"] = report.key_bob ? report.key_bob->to_hex() : "";
    j["key_alice_bits"] = report.key_alice ? report.key_alice->to_string() : "";
    j["key_bob_bits"] = report.key_bob ? report.key_bob->to_string() : "";
    j["key_rate"] = report.ideal_key_rate;
    if (include_transcript) {
        nlohmann::ordered_json transcript = nlohmann::ordered_json::array();
        for (const auto& entry : report.transcript)
            transcript.push_back({{"label", entry.label}, {"data", entry.data}});
        j["transcript"] = std::move(transcript);
    }
    return j.dump();
}

} // namespace siqkd
