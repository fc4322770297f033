#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <optional>

#include "siqkd/protocol.hpp"
#include "siqkd/toner_bacon.hpp"
#include "siqkd/toy.hpp"

namespace py = pybind11;
using namespace siqkd;

namespace {

using Vec3 = std::array<double, 3>;

BlochVector to_bloch(const Vec3& v) { return {v[0], v[1], v[2]}; }
Vec3 from_bloch(BlochVector v) { return {v.x, v.y, v.z}; }

Observable to_obs(const Vec3& v, const char* label) {
    return Observable(to_bloch(v), label);
}

MeasurementSettings to_settings(const Vec3& a1, const Vec3& a2, const Vec3& b1,
                                const Vec3& b2) {
    return {to_obs(a1, "a1"), to_obs(a2, "a2"), to_obs(b1, "b1"), to_obs(b2, "b2")};
}

py::dict estimate_to_dict(const ChshEstimate& est) {
    py::dict d;
    d["value"] = est.value;
    d["std_error"] = est.std_error;
    py::list terms;
    for (const auto& t : est.per_term) {
        py::dict td;
        td["mean"] = t.mean;
        td["std_error"] = t.std_error;
        td["shots"] = t.shots;
        terms.append(td);
    }
    d["per_term"] = terms;
    return d;
}

EveStrategy parse_eve(const std::string& kind, const std::optional<Vec3>& axis) {
    if (kind == "none") return EveStrategy::none();
    if (kind == "intercept-random") return EveStrategy::intercept_random();
    if (kind == "intercept") {
        if (!axis) throw ConfigError("eve='intercept' requires an axis");
        return EveStrategy::intercept_fixed(to_obs(*axis, "e"));
    }
    throw ConfigError("unknown eve strategy: " + kind);
}

} // namespace

PYBIND11_MODULE(_siqkd, m) {
    m.doc() = "Temporal-CHSH key distribution simulator core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def(
        "correlator",
        [](const Vec3& a, const Vec3& b) {
            return correlator(to_obs(a, "a"), to_obs(b, "b"));
        },
        py::arg("a"), py::arg("b"), "Analytic two-time correlator a.b");

    m.def(
        "correlator_from_state",
        [](const Vec3& r, const Vec3& a, const Vec3& b) {
            return correlator_from_state(EnsembleState(to_bloch(r)), to_obs(a, "a"),
                                         to_obs(b, "b"));
        },
        py::arg("r"), py::arg("a"), py::arg("b"),
        "Two-time correlator via the explicit four-term sum over outcomes");

    m.def(
        "correlator_three",
        [](const Vec3& a, const Vec3& b, const Vec3& c) {
            return correlator_three(to_obs(a, "a"), to_obs(b, "b"), to_obs(c, "c"));
        },
        py::arg("a"), py::arg("b"), py::arg("c"),
        "First-to-third correlator of a three-measurement sequence: (a.b)(b.c)");

    m.def(
        "chsh_value",
        [](const Vec3& a1, const Vec3& a2, const Vec3& b1, const Vec3& b2) {
            return chsh_value(to_settings(a1, a2, b1, b2)).value;
        },
        py::arg("a1"), py::arg("a2"), py::arg("b1"), py::arg("b2"));

    m.def(
        "optimal_settings",
        [](const Vec3& b1, const Vec3& b2) {
            MeasurementSettings s = optimal_settings(to_obs(b1, "b1"), to_obs(b2, "b2"));
            return py::make_tuple(from_bloch(s.a1.axis), from_bloch(s.a2.axis),
                                  from_bloch(s.b1.axis), from_bloch(s.b2.axis));
        },
        py::arg("b1"), py::arg("b2"),
        "Tsirelson-saturating settings for perpendicular b1, b2");

    m.def(
        "chsh_with_intercept",
        [](const Vec3& a1, const Vec3& a2, const Vec3& b1, const Vec3& b2, const Vec3& e) {
            return chsh_with_intercept(to_settings(a1, a2, b1, b2), to_obs(e, "e"));
        },
        py::arg("a1"), py::arg("a2"), py::arg("b1"), py::arg("b2"), py::arg("e"));

    m.def("pseudo_projection_trace",
          [](const Vec3& p, const Vec3& b, const Vec3& c) {
              return pseudo_projection_trace(to_bloch(p), to_bloch(b), to_bloch(c));
          },
          py::arg("p"), py::arg("b"), py::arg("c"));

    m.def(
        "estimate_correlator",
        [](const Vec3& r, const Vec3& a, const Vec3& b, uint64_t shots, uint64_t seed) {
            auto est = estimate_correlator(EnsembleState(to_bloch(r)), to_obs(a, "a"),
                                           to_obs(b, "b"), shots, RngStream(seed, "py"));
            return py::make_tuple(est.mean, est.std_error);
        },
        py::arg("r"), py::arg("a"), py::arg("b"), py::arg("shots"), py::arg("seed") = 1,
        "Monte-Carlo two-time correlator; returns (mean, std_error)");

    m.def(
        "estimate_chsh",
        [](const Vec3& a1, const Vec3& a2, const Vec3& b1, const Vec3& b2,
           uint64_t shots_per_term, uint64_t seed, const std::optional<Vec3>& intercept,
           const Vec3& r) {
            std::optional<Observable> e;
            if (intercept) e = to_obs(*intercept, "e");
            auto est = estimate_chsh(EnsembleState(to_bloch(r)), to_settings(a1, a2, b1, b2),
                                     shots_per_term, RngStream(seed, "py"), e);
            return estimate_to_dict(est);
        },
        py::arg("a1"), py::arg("a2"), py::arg("b1"), py::arg("b2"),
        py::arg("shots_per_term") = 100000, py::arg("seed") = 1,
        py::arg("intercept") = std::nullopt, py::arg("r") = Vec3{0, 0, 0});

    m.def(
        "run_session",
        [](uint32_t n, uint32_t k, uint32_t shots_per_ensemble, uint64_t seed,
           const std::string& eve, const std::optional<Vec3>& eve_axis, double threshold) {
            SessionConfig cfg;
            cfg.n = n;
            cfg.k = k;
            cfg.shots_per_ensemble = shots_per_ensemble;
            cfg.master_seed = seed;
            cfg.threshold = threshold;
            cfg.eve = parse_eve(eve, eve_axis);
            SessionReport rep = run_session(cfg);
            py::dict d;
            d["chsh_value"] = rep.chsh.value;
            d["chsh_std_error"] = rep.chsh.std_error;
            d["aborted"] = rep.aborted;
            d["ideal_key_rate"] = rep.ideal_key_rate;
            d["key_alice"] = rep.key_alice ? py::object(py::str(rep.key_alice->to_string()))
                                           : py::object(py::none());
            d["key_bob"] = rep.key_bob ? py::object(py::str(rep.key_bob->to_string()))
                                       : py::object(py::none());
            return d;
        },
        py::arg("n") = 5, py::arg("k") = 2, py::arg("shots_per_ensemble") = 100000,
        py::arg("seed") = 1, py::arg("eve") = "none", py::arg("eve_axis") = std::nullopt,
        py::arg("threshold") = 2.0,
        "Full in-process session: quantum checks, reconciliation, key distillation");

    m.def("run_toy", [] {
        ToyResult r = run_toy_pipeline(ToyInputs{});
        py::dict d;
        d["u1"] = r.u1.to_string();
        d["mu1"] = r.mu1.to_string();
        d["v1"] = r.v1.to_string();
        d["w1"] = r.w1.to_string();
        d["u2"] = r.u2.to_string();
        d["x2_recovered"] = r.x2_recovered.to_string();
        d["key_alice"] = r.key_alice.to_string();
        d["key_bob"] = r.key_bob.to_string();
        d["ideal_key_rate"] = r.ideal_key_rate;
        return d;
    });

    m.def(
        "tb_correlator",
        [](const Vec3& a, const Vec3& b, uint64_t rounds, uint64_t seed) {
            auto est = tb_correlator(to_obs(a, "a"), to_obs(b, "b"), rounds,
                                     RngStream(seed, "py-tb"));
            return py::make_tuple(est.mean, est.std_error, est.comm_bits);
        },
        py::arg("a"), py::arg("b"), py::arg("rounds") = 100000, py::arg("seed") = 1,
        "Classical 1-bit simulation; returns (mean, std_error, comm_bits)");

    m.def(
        "tb_chsh",
        [](const Vec3& a1, const Vec3& a2, const Vec3& b1, const Vec3& b2, uint64_t rounds,
           uint64_t seed) {
            auto est = tb_chsh(to_settings(a1, a2, b1, b2), rounds, RngStream(seed, "py-tb"));
            return py::make_tuple(est.value, est.std_error, est.comm_bits);
        },
        py::arg("a1"), py::arg("a2"), py::arg("b1"), py::arg("b2"),
        py::arg("rounds") = 100000, py::arg("seed") = 1);

    m.attr("CLASSICAL_BOUND") = kClassicalBound;
    m.attr("TSIRELSON_BOUND") = kTsirelsonBound;
}
