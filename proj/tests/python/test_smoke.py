import math

try:
    import siqkd
except ImportError:
    import _siqkd as siqkd

S = 1 / math.sqrt(2)
A1, A2 = (0, 0, 1), (1, 0, 0)
B1, B2 = (S, 0, S), (-S, 0, S)


def test_analytic_correlators():
    assert siqkd.correlator(A1, A1) == 1.0
    assert abs(siqkd.correlator(A1, B1) - S) < 1e-12
    assert abs(siqkd.correlator_from_state((0, 0, 0), A1, B1) - S) < 1e-12
    assert abs(siqkd.correlator_three(A1, B1, A2) - S * S) < 1e-12


def test_chsh_tsirelson():
    assert abs(siqkd.chsh_value(A1, A2, B1, B2) - siqkd.TSIRELSON_BOUND) < 1e-9
    a1, a2, b1, b2 = siqkd.optimal_settings((0, 0, 1), (1, 0, 0))
    assert abs(siqkd.chsh_value(a1, a2, b1, b2) - siqkd.TSIRELSON_BOUND) < 1e-9
    assert siqkd.chsh_with_intercept(A1, A2, B1, B2, (0, 0, 1)) <= math.sqrt(2) + 1e-12


def test_sampling():
    mean, err = siqkd.estimate_correlator((0, 0, 0), A1, B1, shots=50000, seed=3)
    assert abs(mean - S) < 5 * err
    est = siqkd.estimate_chsh(A1, A2, B1, B2, shots_per_term=50000, seed=3)
    assert abs(est["value"] - siqkd.TSIRELSON_BOUND) < 5 * est["std_error"]
    tapped = siqkd.estimate_chsh(
        A1, A2, B1, B2, shots_per_term=50000, seed=3, intercept=(0, 0, 1)
    )
    assert tapped["value"] < 2.0


def test_toy_pipeline():
    r = siqkd.run_toy()
    assert r["u1"] == "00011"
    assert r["v1"] == "110"
    assert r["w1"] == "101"
    assert r["u2"] == "000"
    assert r["x2_recovered"] == "110"
    assert r["key_alice"] == r["key_bob"]
    assert abs(r["ideal_key_rate"] - 0.6) < 1e-15


def test_session_honest_and_intercepted():
    honest = siqkd.run_session(shots_per_ensemble=20000, seed=11)
    assert not honest["aborted"]
    assert honest["key_alice"] == honest["key_bob"]
    tapped = siqkd.run_session(
        shots_per_ensemble=20000, seed=11, eve="intercept", eve_axis=(0, 0, 1)
    )
    assert tapped["aborted"]
    assert tapped["key_alice"] is None


def test_toner_bacon():
    mean, err, comm = siqkd.tb_correlator(A1, B1, rounds=100000, seed=5)
    assert comm == 100000
    assert abs(mean - S) < 5 * err


def test_validation_errors():
    try:
        siqkd.run_session(n=5, k=5)
    except ValueError:
        pass
    else:
        raise AssertionError("k >= n should be rejected")
