#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "siqkd/report.hpp"
#include "siqkd/toner_bacon.hpp"
#include "siqkd/toy.hpp"
#include "siqkd/transport.hpp"

namespace {

using namespace siqkd;

// Axis spec: a named direction (x, y, z, zpx, zmx) or "theta,phi" in radians.
BlochVector parse_axis(const std::string& spec) {
    const double s = 1.0 / std::sqrt(2.0);
    if (spec == "x") return kXAxis;
    if (spec == "y") return kYAxis;
    if (spec == "z") return kZAxis;
    if (spec == "zpx") return {s, 0, s};
    if (spec == "zmx") return {-s, 0, s};
    auto comma = spec.find(',');
    if (comma == std::string::npos)
        throw ConfigError("axis must be x|y|z|zpx|zmx or 'theta,phi': " + spec);
    double theta = std::stod(spec.substr(0, comma));
    double phi = std::stod(spec.substr(comma + 1));
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
            std::cos(theta)};
}

EnsembleState parse_state(const std::string& spec) {
    if (spec == "mixed") return EnsembleState{};
    auto first = spec.find(',');
    auto second = spec.find(',', first + 1);
    if (first != std::string::npos && second != std::string::npos) {
        double x = std::stod(spec.substr(0, first));
        double y = std::stod(spec.substr(first + 1, second - first - 1));
        double z = std::stod(spec.substr(second + 1));
        return EnsembleState({x, y, z});
    }
    return EnsembleState(parse_axis(spec));
}

EveStrategy parse_eve(const std::string& spec) {
    if (spec == "none") return EveStrategy::none();
    if (spec == "random" || spec == "intercept-random")
        return EveStrategy::intercept_random();
    const std::string prefix = "intercept:";
    if (spec.rfind(prefix, 0) == 0)
        return EveStrategy::intercept_fixed(
            Observable(parse_axis(spec.substr(prefix.size())), "E"));
    throw ConfigError("eve must be none|random|intercept:<axis>: " + spec);
}

uint64_t default_seed() {
    if (const char* env = std::getenv("SIQKD_SEED")) return std::stoull(env);
    return 1;
}

struct SettingsFlags {
    std::string a1 = "z", a2 = "x", b1 = "zpx", b2 = "zmx";

    void add_to(CLI::App& app) {
        app.add_option("--a1", a1, "Alice's first axis");
        app.add_option("--a2", a2, "Alice's second axis");
        app.add_option("--b1", b1, "Bob's first axis");
        app.add_option("--b2", b2, "Bob's second axis");
    }
    MeasurementSettings settings() const {
        return {Observable(parse_axis(a1), "A1"), Observable(parse_axis(a2), "A2"),
                Observable(parse_axis(b1), "B1"), Observable(parse_axis(b2), "B2")};
    }
};

void write_report_line(const std::string& line, const std::string& path) {
    if (path.empty()) {
        std::cout << line << '\n';
        return;
    }
    std::ofstream out(path, std::ios::app);
    if (!out) throw ConfigError("cannot open report file: " + path);
    out << line << '\n';
}

int cmd_toy(const std::string& x2_override, const std::string& matrix_file) {
    ToyInputs in;
    bool defaults = x2_override.empty() && matrix_file.empty();
    if (!x2_override.empty()) in.x2 = BitString(x2_override);
    if (!matrix_file.empty()) {
        in.M = BinaryMatrix::load(matrix_file);
        if (!in.M.inverse()) throw ConfigError("M must be invertible");
    }
    ToyResult r = run_toy_pipeline(in);

    int failures = 0;
    auto check = [&failures](const char* name, const std::string& got,
                             const std::string& want) {
        bool ok = got == want;
        std::cout << name << " = " << got;
        if (!ok) {
            std::cout << "   MISMATCH (expected " << want << ")";
            ++failures;
        }
        std::cout << '\n';
    };

    std::cout << "X1 = " << in.x1.to_string() << "   Y1 = " << in.y1.to_string()
              << "   X2 = " << in.x2.to_string() << "   Y2 = " << in.y2.to_string()
              << '\n';
    if (defaults) {
        check("U1 ", r.u1.to_string(), "00011");
        check("V1 ", r.v1.to_string(), "110");
        check("W1 ", r.w1.to_string(), "101");
        check("U2 ", r.u2.to_string(), "000");
        check("X'2", r.x2_recovered.to_string(), "110");
    } else {
        check("U1 ", r.u1.to_string(), (in.x1 ^ in.x2).to_string());
        check("X'2", r.x2_recovered.to_string(),
              matvec(in.M, in.x2.tail(in.x2.size() - in.k)).to_string());
    }
    check("K_A", r.key_alice.to_string(), r.key_bob.to_string());
    std::cout << "ideal key rate = " << (in.x2.size() - in.k) << "/" << in.x2.size()
              << " = " << r.ideal_key_rate << '\n';
    if (defaults && std::abs(r.ideal_key_rate - 0.6) > 1e-15) ++failures;
    return failures == 0 ? 0 : 1;
}

struct RunFlags {
    uint32_t n = 5, k = 2;
    uint32_t shots = 100000;
    uint64_t seed = default_seed();
    std::string eve = "none";
    double threshold = 2.0;
    std::string state = "mixed";
    std::string matrix_file;
    std::string role = "both";
    std::string connect;
    uint16_t listen = 0;
    std::string report_path;
    bool omit_transcript = false;
    SettingsFlags settings;
};

SessionConfig make_config(const RunFlags& f) {
    SessionConfig cfg;
    cfg.n = f.n;
    cfg.k = f.k;
    cfg.shots_per_ensemble = f.shots;
    cfg.master_seed = f.seed;
    cfg.eve = parse_eve(f.eve);
    cfg.threshold = f.threshold;
    cfg.initial_state = parse_state(f.state);
    cfg.settings = f.settings.settings();
    if (!f.matrix_file.empty()) cfg.M = BinaryMatrix::load(f.matrix_file);
    return cfg;
}

int cmd_run(const RunFlags& f) {
    SessionConfig cfg = make_config(f);
    SessionReport report;
    if (f.role == "both") {
        report = run_session(cfg);
    } else if (f.role == "alice" || f.role == "bob") {
        std::unique_ptr<ByteStream> stream;
        if (f.listen != 0)
            stream = listen_accept(f.listen);
        else if (!f.connect.empty()) {
            auto colon = f.connect.find(':');
            if (colon == std::string::npos)
                throw ConfigError("--connect expects host:port");
            stream = connect_to(f.connect.substr(0, colon),
                                static_cast<uint16_t>(
                                    std::stoi(f.connect.substr(colon + 1))));
        } else {
            throw ConfigError("role " + f.role + " requires --listen or --connect");
        }
        report = f.role == "alice" ? run_alice_over_stream(cfg, *stream)
                                   : run_bob_over_stream(cfg, *stream);
    } else {
        throw ConfigError("role must be both|alice|bob");
    }
    write_report_line(report_to_json(report, cfg.master_seed, !f.omit_transcript),
                      f.report_path);
    return 0;
}

int cmd_sweep(const RunFlags& f, uint32_t sessions, uint32_t jobs) {
    RngStream seeds(f.seed, "sweep");
    std::vector<std::string> lines(sessions);
    std::vector<std::thread> workers;
    std::atomic<uint32_t> next{0};
    jobs = std::max(1u, jobs);
    for (uint32_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (uint32_t i = next.fetch_add(1); i < sessions; i = next.fetch_add(1)) {
                RunFlags rf = f;
                rf.seed = seeds.at(i);
                SessionConfig cfg = make_config(rf);
                SessionReport report = run_session(cfg);
                lines[i] = report_to_json(report, cfg.master_seed, !f.omit_transcript);
            }
        });
    }
    for (auto& t : workers) t.join();
    for (const auto& line : lines) write_report_line(line, f.report_path);
    return 0;
}

int cmd_chsh(const SettingsFlags& sf, uint64_t shots, uint64_t seed,
             const std::string& state, const std::string& intercept, int sweep_b2) {
    std::cout << "a1,a2,b1,b2,analytic,sampled,stderr\n";
    auto emit = [&](const MeasurementSettings& s, const std::string& b2_name) {
        std::optional<Observable> eve;
        double analytic;
        if (!intercept.empty()) {
            eve = Observable(parse_axis(intercept), "E");
            analytic = chsh_with_intercept(s, *eve);
        } else {
            analytic = chsh_value(s).value;
        }
        ChshEstimate est = estimate_chsh(parse_state(state), s, shots,
                                         RngStream(seed, "chsh"), eve);
        std::cout << sf.a1 << ',' << sf.a2 << ',' << sf.b1 << ',' << b2_name << ','
                  << analytic << ',' << est.value << ',' << est.std_error << '\n';
    };
    if (sweep_b2 > 0) {
        for (int i = 0; i <= sweep_b2; ++i) {
            double theta = M_PI * i / sweep_b2;
            MeasurementSettings s = sf.settings();
            s.b2 = Observable({std::sin(theta), 0, std::cos(theta)}, "B2");
            emit(s, std::to_string(theta) + ",0");
        }
    } else {
        emit(sf.settings(), sf.b2);
    }
    return 0;
}

int cmd_tb(const SettingsFlags& sf, uint64_t rounds, uint64_t seed) {
    MeasurementSettings s = sf.settings();
    TbChsh tb = tb_chsh(s, rounds, RngStream(seed, "tb"));
    std::cout << "a1,a2,b1,b2,analytic,tb_value,stderr,comm_bits\n";
    std::cout << sf.a1 << ',' << sf.a2 << ',' << sf.b1 << ',' << sf.b2 << ','
              << chsh_value(s).value << ',' << tb.value << ',' << tb.std_error << ','
              << tb.comm_bits << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"State-independent QKD simulator: temporal CHSH statistics, "
                 "intercept detection, and classical key distillation"};
    app.require_subcommand(1);

    // toy
    auto* toy = app.add_subcommand("toy", "Run the worked 5-bit example and verify it");
    std::string toy_x2, toy_matrix;
    toy->add_option("--x2", toy_x2, "override X2 (5 bits)");
    toy->add_option("--matrix-file", toy_matrix, "override M (3x3, invertible)");

    // run / sweep
    RunFlags rf;
    uint32_t sessions = 10, jobs = 1;
    auto add_run_flags = [&rf](CLI::App* cmd) {
        cmd->add_option("--n", rf.n, "total qubit ensembles");
        cmd->add_option("--k", rf.k, "check ensembles");
        cmd->add_option("--shots", rf.shots, "shots per ensemble (multiple of 4)");
        cmd->add_option("--seed", rf.seed, "master seed (env SIQKD_SEED)");
        cmd->add_option("--eve", rf.eve, "none|random|intercept:<axis>");
        cmd->add_option("--threshold", rf.threshold, "abort threshold on the CHSH estimate");
        cmd->add_option("--state", rf.state, "initial state: mixed|<axis>|rx,ry,rz");
        cmd->add_option("--matrix-file", rf.matrix_file, "parity matrix file");
        cmd->add_option("--report-path", rf.report_path, "append ndjson here (default stdout)");
        cmd->add_flag("--omit-transcript", rf.omit_transcript, "drop transcript from reports");
        rf.settings.add_to(*cmd);
    };
    auto* run = app.add_subcommand("run", "Run one full session");
    add_run_flags(run);
    run->add_option("--role", rf.role, "both|alice|bob");
    run->add_option("--listen", rf.listen, "listen on localhost port (two-process mode)");
    run->add_option("--connect", rf.connect, "connect to host:port (two-process mode)");

    auto* sweep = app.add_subcommand("sweep", "Run many sessions with derived seeds");
    add_run_flags(sweep);
    sweep->add_option("--sessions", sessions, "session count");
    sweep->add_option("--jobs", jobs, "parallel workers");

    // chsh
    auto* chsh = app.add_subcommand("chsh", "Analytic vs sampled CHSH table");
    SettingsFlags chsh_settings;
    chsh_settings.add_to(*chsh);
    uint64_t chsh_shots = 1000000, chsh_seed = default_seed();
    std::string chsh_state = "mixed", chsh_intercept;
    int sweep_b2 = 0;
    chsh->add_option("--shots", chsh_shots, "shots per term");
    chsh->add_option("--seed", chsh_seed, "seed");
    chsh->add_option("--state", chsh_state, "initial state");
    chsh->add_option("--intercept", chsh_intercept, "Eve axis between measurements");
    chsh->add_option("--sweep-b2", sweep_b2, "sweep b2 polar angle over [0,pi] in N steps");

    // tb
    auto* tb = app.add_subcommand("tb", "Classical 1-bit simulation of the CHSH terms");
    SettingsFlags tb_settings;
    tb_settings.add_to(*tb);
    uint64_t tb_rounds = 1000000, tb_seed = default_seed();
    tb->add_option("--rounds", tb_rounds, "rounds per term");
    tb->add_option("--seed", tb_seed, "seed");

    try {
        app.parse(argc, argv);
        if (toy->parsed()) return cmd_toy(toy_x2, toy_matrix);
        if (run->parsed()) return cmd_run(rf);
        if (sweep->parsed()) return cmd_sweep(rf, sessions, jobs);
        if (chsh->parsed())
            return cmd_chsh(chsh_settings, chsh_shots, chsh_seed, chsh_state,
                            chsh_intercept, sweep_b2);
        if (tb->parsed()) return cmd_tb(tb_settings, tb_rounds, tb_seed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0; // --help
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
