import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from onestep import frames, selection, signals
from onestep.exceptions import InvalidArgumentError, OverSelectionError

from conftest import crandn

T = (math.sqrt(2) - 1) / math.sqrt(2)


def brute_threshold(f, lam):
    return [i for i in range(f.size) if abs(f[i]) > lam]


def brute_top_k(f, k):
    # k largest magnitudes, lower index first among equals
    ranked = sorted(range(f.size), key=lambda i: (-abs(f[i]), i))
    return sorted(ranked[:k])


def test_ost_threshold_hand_arithmetic():
    n = 997
    spec = selection.ost_threshold(1 / math.sqrt(n), n, n * n, 2.0, 1e-2, t=T, c=2 * T)
    # max{2 sqrt(2), 2} * sqrt(0.02 ln 997^2)
    expected = 2 * math.sqrt(2) * math.sqrt(0.02 * math.log(n * n))
    assert spec.lam == pytest.approx(expected, rel=1e-12)
    assert abs(spec.lam - 1.486) < 1e-3
    assert spec.scaled(0.6).lam == pytest.approx(0.6 * spec.lam)
    big = selection.ost_threshold(1 / math.sqrt(n), n, n * n, 2.0, 1e-2, t=T)
    assert abs(big.lam - 25.4) < 0.1


def test_ost_threshold_noise_branch():
    # with mu = 0 only the noise term remains
    spec = selection.ost_threshold(0.0, 100, 1000, 1.0, 1.0, t=0.5)
    assert spec.lam == pytest.approx(2 * math.sqrt(2) * math.sqrt(2 * math.log(1000)))


def test_threshold_errors():
    for t in (0.0, 1.0, -0.1):
        with pytest.raises(InvalidArgumentError):
            selection.ost_threshold(0.1, 10, 100, 1.0, 1.0, t=t)
    with pytest.raises(InvalidArgumentError):
        selection.ost_threshold(0.1, 10, 100, 1.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        selection.recovery_threshold(0.1, -1.0, 100)


def test_recovery_threshold_and_critical_c():
    mu, p = 1 / math.sqrt(127), 127 ** 2
    spec = selection.recovery_threshold(mu, 3.0, p, c=10)
    root = math.sqrt(2 * math.log(p) / (1 - math.exp(-0.5)))
    assert spec.lam == pytest.approx(10 * mu * 3.0 * root)
    assert spec.critical_c == pytest.approx(1 / (mu * root))
    assert spec.lam > 3.0


def test_selectors_match_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        p = int(rng.integers(1, 30))
        # quantized magnitudes produce ties
        f = rng.integers(0, 5, p) * (1j ** rng.integers(0, 4, p))
        lam = float(rng.integers(0, 5))
        k = int(rng.integers(0, p + 1))
        assert selection.threshold_proxy(f, lam).tolist() == brute_threshold(f, lam)
        assert selection.top_k(f, k).tolist() == brute_top_k(f, k)


def test_threshold_is_strict_and_ties_go_low():
    f = np.array([1.0, 2.0, 2.0, 1.0])
    assert selection.threshold_proxy(f, 2.0).size == 0
    assert selection.top_k(f, 1).tolist() == [1]
    assert selection.top_k(f, 3).tolist() == [0, 1, 2]
    with pytest.raises(InvalidArgumentError):
        selection.top_k(f, 5)


def test_ost_select_orthonormal_exact():
    X = frames.identity_frame(8)
    beta = signals.SparseSignal(8, [1, 5], [1.0, -1j])
    y = signals.measure(X, beta).y
    res = selection.ost_select(X, y, 0.5)
    assert res.selected.tolist() == [1, 5]
    assert selection.sost_select(X, y, 2).selected.tolist() == [1, 5]
    d = json.loads(res.to_json())
    assert d["index_base"] == 0 and d["selected"] == [1, 5] and d["lambda"] == 0.5
    with pytest.raises(InvalidArgumentError):
        selection.ost_select(X, y, -1)


def test_ost_recover_noiseless_exact():
    X = frames.build_gabor_frame(frames.alltop_seed(31))
    beta = signals.make_signal(X.p, [5, 100, 700], 1.0, 3.0, seed=1)
    y = signals.measure(X, beta).y
    res = selection.ost_recover(X, y, k=3)
    np.testing.assert_allclose(res.beta_hat, beta.dense(), atol=1e-10)
    assert res.residual < 1e-10
    d = res.to_dict()
    assert d["selected"] == [5, 100, 700] and len(d["values"]) == 3


def test_ost_recover_empty_selection_returns_zero():
    X = frames.build_gabor_frame(frames.alltop_seed(31))
    beta = signals.make_signal(X.p, [5, 100], 1.0, 2.0, seed=1)
    y = signals.measure(X, beta).y
    spec = selection.recovery_threshold(1 / math.sqrt(31), np.linalg.norm(y), X.p, c=10)
    res = selection.ost_recover(X, y, lam=spec.lam)
    assert res.selected.size == 0
    assert np.all(res.beta_hat == 0)
    assert res.residual == pytest.approx(np.linalg.norm(y))


def test_ost_recover_over_selection():
    X = frames.build_gabor_frame(frames.alltop_seed(5))
    y = np.ones(5, dtype=complex)
    with pytest.raises(OverSelectionError) as err:
        selection.ost_recover(X, y, lam=0.0)
    assert err.value.selected.size > 5
    with pytest.raises(InvalidArgumentError):
        selection.ost_recover(X, y)
    with pytest.raises(InvalidArgumentError):
        selection.ost_recover(X, y, lam=1.0, k=2)


@given(st.integers(0, 2**31))
def test_ost_recover_matches_least_squares_oracle(seed):
    rng = np.random.default_rng(seed)
    X = frames.gaussian_design(12, 30, seed)
    y = crandn(rng, 12)
    res = selection.ost_recover(X, y, k=4)
    A = X.columns(res.selected)
    AH = A.conj().T
    np.testing.assert_allclose(res.beta_hat[res.selected], np.linalg.solve(AH @ A, AH @ y), atol=1e-8)


def required_oracle(k, p, snr, mar, c2, gamma, t):
    base = 2 * k * math.log(p)
    return max(base, 8 * base / ((1 - t) ** 2 * snr * mar), (c2 * base / (t ** 2 * mar)) ** (gamma / 2))


def test_required_measurements_formula():
    params = selection.GuaranteeParams(c1=0.5, gamma=2)
    assert params.c2 == 100
    for t in (0.1, 0.5, 0.9):
        got = selection.required_measurements(5, 10_000, 3.0, 0.8, params, t)
        assert got == pytest.approx(required_oracle(5, 10_000, 3.0, 0.8, 100, 2, t))
    g0 = selection.GuaranteeParams(gamma=0)
    got = selection.required_measurements(5, 10_000, 100.0, 1.0, g0, 0.5)
    assert got == pytest.approx(max(2 * 5 * math.log(1e4), 8 * 4 * 2 * 5 * math.log(1e4) / 100))
    with pytest.raises(InvalidArgumentError):
        selection.GuaranteeParams(gamma=1)


@pytest.mark.parametrize("snr,mar", [(1.0, 1.0), (100.0, 0.5), (0.01, 0.2), (1e4, 1.0)])
def test_optimal_t_beats_grid(snr, mar):
    c2, gamma, k, p = 400.0, 2.0, 3, 5000
    t = selection.optimal_t(snr, mar, k, p, c2, gamma)
    grid = np.linspace(1e-3, 0.999, 4001)
    best = min(required_oracle(k, p, snr, mar, c2, gamma, s) for s in grid)
    assert required_oracle(k, p, snr, mar, c2, gamma, t) <= best * (1 + 1e-6)
    sost = selection.required_measurements_sost(k, p, snr, mar, selection.GuaranteeParams(c1=1))
    assert sost <= best * (1 + 1e-6)


def test_mar_floor_formula_and_flag():
    n, p, k, snr, mu, t = 1000, 10**6, 3, 10.0, 0.01, 0.4
    fl = selection.mar_floor(n, p, k, snr, mu, t)
    base = 2 * k * math.log(p)
    assert fl.value == pytest.approx(max(8 * base / ((1 - t) ** 2 * n * snr), 400 * base * mu ** 2 / t ** 2))
    assert fl.sparsity_ok
    assert not selection.mar_floor(n, p, 40, snr, mu, t).sparsity_ok
    sfl = selection.mar_floor_sost(n, p, k, snr, mu)
    grid = np.linspace(1e-3, 0.999, 4001)
    best = min(selection.mar_floor(n, p, k, snr, mu, s).value for s in grid)
    assert sfl.value <= best * (1 + 1e-6)


def test_guaranteed_detections():
    beta = signals.SparseSignal(10, [0, 1, 2, 3], [2.0, 1.0, 1.0, 0.1])
    st_ = signals.signal_stats(beta, 5)
    assert selection.guaranteed_detections(st_, 0.5) == 3
    assert selection.guaranteed_detections(st_, 10.0) == 0
    assert selection.guaranteed_detections(st_, 0.0) == 4


def test_recovery_sparsity_cap():
    p, snorm, mu, mar = 127 ** 2, math.sqrt(127), 1 / math.sqrt(127), 1.0
    cap = selection.recovery_sparsity_cap(p, snorm, mu, mar)
    logp = math.log(p)
    expected = min(p / ((37 * math.e) ** 2 * 127 * logp), 127 / (43 ** 2 * logp))
    assert cap == pytest.approx(expected)
    assert cap < 1  # the constants certify nothing at this size
    sost = selection.recovery_sparsity_cap(p, snorm, mu, mar, sost=True)
    assert sost >= cap


def test_small_p_warning():
    with pytest.warns(UserWarning):
        selection.mar_floor(10, 100, 1, 1.0, 0.1, 0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        selection.mar_floor(10, 1000, 1, 1.0, 0.1, 0.5)
        selection.ost_threshold(0.1, 10, 100, 1.0, 1.0)
