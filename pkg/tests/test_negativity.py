import math

import numpy as np
import pytest

import oracles
from distillery import (
    LossChannelParams,
    NotHermitianError,
    SubtractionParams,
    TruncationConfig,
    auto_n_max,
    detect_phonons,
    log_negativity,
    loss_event,
    partial_transpose,
    state_from_coeffs,
    swap_modes,
    tmss,
    trace_distance,
    trace_norm,
    vacuum,
)


def _product_state(dim, seed):
    rng = np.random.default_rng(seed)
    ga = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    gb = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    a = ga @ ga.conj().T
    b = gb @ gb.conj().T
    a /= np.trace(a).real
    b /= np.trace(b).real
    return np.einsum("nk,ml->nmkl", a, b)


def test_partial_transpose_is_involution():
    st = tmss(0.2, TruncationConfig(10))
    pt = partial_transpose(st)
    back = pt.transpose(2, 1, 0, 3)
    assert np.abs(back - st.coeffs).max() == 0.0
    assert abs(np.einsum("nmnm->", pt).real - 1.0) < 1e-13


def test_partial_transpose_stays_hermitian():
    cfg = TruncationConfig(3)
    rng = np.random.default_rng(3)
    st = state_from_coeffs(oracles.random_state_coeffs(4, rng), cfg)
    pt = partial_transpose(st)
    m = pt.reshape(16, 16)
    assert np.abs(m - m.conj().T).max() < 1e-14


def test_product_states_are_ppt():
    cfg = TruncationConfig(3)
    for seed in range(12):
        st = state_from_coeffs(_product_state(4, seed), cfg)
        res = log_negativity(st)
        assert res.value == 0.0
        assert res.min_eig > -1e-10


def test_tmss_pt_negative_weight_identity():
    # absolute sum of negative eigenvalues determines the trace norm excess
    st = tmss(0.1, TruncationConfig(8), allow_truncation=True)
    evals = np.linalg.eigvalsh(partial_transpose(st).reshape(81, 81))
    neg_sum = -evals[evals < 0].sum()
    tn = trace_norm(partial_transpose(st))
    assert neg_sum > 1e-3
    assert neg_sum == pytest.approx((tn - 1.0) / 2.0, rel=1e-10)


def test_trace_norm_of_density_matrices_is_one():
    assert trace_norm(vacuum(TruncationConfig(4)).coeffs) == pytest.approx(1.0, rel=1e-13)
    assert trace_norm(tmss(0.1, TruncationConfig(7)).coeffs) == pytest.approx(1.0, rel=1e-13)


def test_trace_norm_sums_absolute_eigenvalues():
    c = np.zeros((3, 3, 3, 3), dtype=complex)
    c[0, 0, 0, 0] = 0.5
    c[1, 0, 1, 0] = -0.5
    assert trace_norm(c) == pytest.approx(1.0, rel=1e-14)


def test_trace_norm_agrees_with_svd_oracle():
    st = tmss(0.2, TruncationConfig(10))
    pt = partial_transpose(st)
    want = oracles.trace_norm_oracle(pt.reshape(121, 121))
    assert trace_norm(pt) == pytest.approx(want, rel=1e-12)
    assert trace_norm(pt) == pytest.approx((1 + 0.2) / (1 - 0.2), abs=2e-6)


def test_trace_norm_rejects_non_hermitian():
    c = np.zeros((3, 3, 3, 3), dtype=complex)
    c[0, 0, 1, 1] = 1.0
    with pytest.raises(NotHermitianError):
        trace_norm(c)


def test_log_negativity_vacuum_is_zero():
    res = log_negativity(vacuum(TruncationConfig(5)))
    assert res.value == 0.0
    assert not res.trunc_warning


def test_log_negativity_tmss_closed_form():
    for lam in (0.1, 0.2, 0.3, 0.4):
        cfg = TruncationConfig(auto_n_max(lam))
        got = log_negativity(tmss(lam, cfg)).value
        want = math.log2((1 + lam) / (1 - lam))
        tol = max(1e-6, 4 * lam ** (2 * (cfg.n_max + 1)))
        assert abs(got - want) < tol


def test_log_negativity_never_negative():
    for seed in range(10):
        rng = np.random.default_rng(seed + 40)
        st = state_from_coeffs(oracles.random_state_coeffs(4, rng), TruncationConfig(3))
        st = state_from_coeffs(st.coeffs / st.trace, TruncationConfig(3))
        assert log_negativity(st).value >= 0.0


def test_log_negativity_swap_invariant():
    cfg = TruncationConfig(7)
    st = tmss(0.1, cfg)
    # asymmetric state: subtraction on one arm only, then renormalized
    raw = detect_phonons(st, SubtractionParams(0.9), 1, 0)
    asym = state_from_coeffs(raw.coeffs / raw.trace, cfg)
    for s in (st, asym):
        a = log_negativity(s).value
        b = log_negativity(swap_modes(s)).value
        assert abs(a - b) < 1e-12


def test_trunc_warning_flags_lost_weight():
    cfg = TruncationConfig(7)
    raw = detect_phonons(tmss(0.1, cfg), SubtractionParams(0.99), 1, 1)
    res = log_negativity(raw)  # trace far below one
    assert res.trunc_warning
    assert res.value == 0.0
    assert not log_negativity(tmss(0.1, cfg)).trunc_warning


def test_negativity_monotone_under_loss():
    # entanglement monotone: no local channel may increase it
    params = [LossChannelParams.from_tau(tau) for tau in (10, 20, 40, 50, 80, 100, 1000)]
    cfg = TruncationConfig(4)
    rng = np.random.default_rng(77)
    states = [tmss(0.1, TruncationConfig(7))]
    for _ in range(6):
        c = oracles.random_state_coeffs(5, rng)
        states.append(state_from_coeffs(c / np.einsum("nmnm->", c).real, cfg))
    for st in states:
        before = log_negativity(st).value
        for p in params:
            after = log_negativity(loss_event(st, p)).value
            assert after <= before + 1e-9


def test_trace_distance_basics():
    cfg = TruncationConfig(2)
    a = vacuum(cfg)
    c = np.zeros((3, 3, 3, 3), dtype=complex)
    c[1, 1, 1, 1] = 1.0
    b = state_from_coeffs(c, cfg)
    assert trace_distance(a, a) == pytest.approx(0.0, abs=1e-15)
    assert trace_distance(a, b) == pytest.approx(1.0, rel=1e-13)
    assert trace_distance(a, b) == pytest.approx(trace_distance(b, a), rel=1e-13)
