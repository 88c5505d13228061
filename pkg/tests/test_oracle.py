import math

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.sparse import diags
from scipy.sparse.linalg import expm_multiply

from cavitycat.dynamics import ExperimentConfig, evolve_at
from cavitycat.exceptions import OracleBudgetError, TruncationError
from cavitycat.oracle import (
    OracleConfig,
    build_cat,
    build_coherent,
    build_squeezed,
    evolve_lindblad,
    evolve_oracle,
    evolve_unitary,
    hermite_functions,
    initial_state,
    marginal_P,
    marginal_Q,
    required_nmax,
    wigner_fourier,
    wigner_grid,
    wigner_parity,
)


def lowering(d):
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)


def moments(rho):
    d = rho.shape[0]
    a = lowering(d)
    q = (a + a.T) / 2
    p = (a - a.T) / 2j
    ev = lambda op: np.trace(rho @ op).real  # noqa: E731
    mq, mp = ev(q), ev(p)
    return mq, mp, ev(q @ q) - mq**2, ev(p @ p) - mp**2


# ----------------------------------------------------------- preparation


def test_cat_normalisation_and_parity():
    plus, minus = build_cat(2.0, 1, 40), build_cat(2.0, -1, 40)
    assert np.linalg.norm(plus) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(minus) == pytest.approx(1.0, abs=1e-12)
    assert np.all(plus[1::2] == 0) and np.all(minus[0::2] == 0)
    assert np.vdot(plus, minus) == 0


def test_cat_truncation_error():
    with pytest.raises(TruncationError):
        build_cat(2.0, 1, 8, tol=1e-10)


def test_squeezed_vacuum():
    vac = build_squeezed(0.0, 10)
    assert vac[0] == 1 and np.all(vac[1:] == 0)
    sq = build_squeezed(1.0, 120)
    assert np.all(sq[1::2] == 0)
    _, _, vq, vp = moments(np.outer(sq, sq.conj()))
    assert vq == pytest.approx(0.25 * math.exp(-2), rel=1e-10)
    assert vp == pytest.approx(0.25 * math.exp(2), rel=1e-10)


@pytest.mark.parametrize("r", [-0.8, 0.5, 1.0])
def test_squeezed_matches_operator_exponential(r):
    big, d = 400, 120
    a = diags(np.sqrt(np.arange(1, big, dtype=float)), 1, format="csr")
    gen = 0.5 * r * (a @ a - a.T @ a.T)
    vac = np.zeros(big)
    vac[0] = 1.0
    ref = expm_multiply(gen, vac)[:d]
    np.testing.assert_allclose(build_squeezed(r, d), ref, atol=1e-12)


def test_coherent_conventions():
    # alpha = i: <P> = 1 and the P marginal peaks there
    coh = build_coherent(1j, 60)
    rho = np.outer(coh, coh.conj())
    mq, mp, vq, vp = moments(rho)
    assert (mq, mp, vq, vp) == pytest.approx((0.0, 1.0, 0.25, 0.25), abs=1e-10)
    xs = np.linspace(-3, 3, 13)
    gauss = lambda x, m: np.exp(-((x - m) ** 2) / 0.5) / math.sqrt(0.5 * math.pi)  # noqa: E731
    np.testing.assert_allclose(marginal_P(rho, xs), gauss(xs, 1.0), atol=1e-12)
    np.testing.assert_allclose(marginal_Q(rho, xs), gauss(xs, 0.0), atol=1e-12)


def test_hermite_functions_orthonormal():
    xs = np.linspace(-12, 12, 6001)
    psi = hermite_functions(60, xs)
    gram = psi @ psi.T * (xs[1] - xs[0])
    np.testing.assert_allclose(gram, np.eye(61), atol=1e-10)


def test_required_nmax_floor_and_tail():
    assert required_nmax(1.5, 1, 1.0) >= math.ceil(1.5**2 + 9 + 10)
    with pytest.raises(TruncationError):
        initial_state(ExperimentConfig(xi0=2.0, r=1.0), 10, tol=1e-10)


# ------------------------------------------------------------- evolution


def dense_reference(cfg, nmax, t):
    d = nmax + 1
    allowed = [(k, m) for k in range(d) for m in range(d) if k + m <= nmax]
    idx = {s: i for i, s in enumerate(allowed)}
    D = len(allowed)
    a_s = np.zeros((D, D))
    a_e = np.zeros((D, D))
    for (k, m), i in idx.items():
        if k:
            a_s[idx[(k - 1, m)], i] = math.sqrt(k)
        if m:
            a_e[idx[(k, m - 1)], i] = math.sqrt(m)
    H = cfg.kappa * (a_s.T @ a_e + a_e.T @ a_s)
    eye = np.eye(D)

    def dissipator(c):
        cdc = c.conj().T @ c
        return np.kron(c.conj(), c) - 0.5 * np.kron(eye, cdc) - 0.5 * np.kron(cdc.T, eye)

    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for c, g, n in ((a_s, cfg.gamma_s, cfg.n_s), (a_e, cfg.gamma_e, cfg.n_e)):
        L = L + 2 * g * (n + 1) * dissipator(c) + 2 * g * n * dissipator(c.T.copy())
    psi = initial_state(cfg, nmax)
    v = np.array([psi.amp[k, m] for k, m in allowed])
    rho_t = (expm(L * t) @ np.outer(v, v.conj()).reshape(-1, order="F")).reshape(D, D, order="F")
    sel = [k * d + m for k, m in allowed]
    return psi, rho_t, sel


@pytest.mark.parametrize("n_th", [0.0, 0.3])
def test_lindblad_matches_dense_liouvillian(n_th):
    cfg = ExperimentConfig(xi0=0.8, r=0.3, gamma_s=0.13, gamma_e=0.07, n_s=n_th, n_e=n_th / 2)
    nmax, t = 6, 1.3
    psi, ref, sel = dense_reference(cfg, nmax, t)
    got = evolve_lindblad(psi, cfg, [t], dt=0.01)[0].to_dense()
    np.testing.assert_allclose(got[np.ix_(sel, sel)], ref, atol=1e-11)


def test_unitary_matches_dense():
    cfg = ExperimentConfig(xi0=0.8, r=0.3)
    psi, ref, sel = dense_reference(cfg, 6, 2.1)
    got = evolve_unitary(psi, 1.0, [2.1])[0].to_dense()
    np.testing.assert_allclose(got[np.ix_(sel, sel)], ref, atol=1e-12)


def test_damped_path_reduces_to_unitary():
    cfg = ExperimentConfig(xi0=1.0, r=0.4)
    psi = initial_state(cfg, 16)
    a = evolve_lindblad(psi, cfg, [0.9], dt=0.1)[0]
    b = evolve_unitary(psi, 1.0, [0.9])[0]
    np.testing.assert_allclose(a.to_dense(), b.to_dense(), atol=1e-13)


def test_trajectory_invariants():
    cfg = ExperimentConfig(xi0=1.2, r=0.5, gamma_s=0.1, gamma_e=0.04, n_s=0.2)
    states = evolve_oracle(cfg, np.linspace(0, 2, 5), OracleConfig(nmax=30, tol=1e-6, dt=0.05))
    for st in states:
        rho = st.to_dense()
        assert st.trace() == pytest.approx(1.0, abs=1e-9)
        assert np.abs(rho - rho.conj().T).max() < 1e-12
        assert np.linalg.eigvalsh(rho).min() > -1e-10
        for mode in "SE":
            red = st.reduced(mode)
            assert np.trace(red).real == pytest.approx(1.0, abs=1e-9)


def test_unitary_purity_drift():
    cfg = ExperimentConfig(xi0=2.0, r=1.0)
    for st in evolve_oracle(cfg, np.linspace(0, math.pi, 7)):
        assert st.global_purity() == pytest.approx(1.0, abs=1e-10)


def test_recurrence_global_fidelity():
    cfg = ExperimentConfig(xi0=2.0, r=1.0)
    s0, s1 = evolve_oracle(cfg, [0.0, math.pi])
    assert s0.overlap(s1) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("r", [0.0, 1.0])
def test_half_period_swap(r):
    """At G = pi/2 each mode holds the other's initial state turned by a quarter phase."""
    cfg = ExperimentConfig(xi0=1.5, r=r)
    s0, s1 = evolve_oracle(cfg, [0.0, math.pi / 2])
    d = s0.nmax + 1
    turn = np.diag((-1j) ** np.arange(d))
    for a, b in (("S", "E"), ("E", "S")):
        target = turn @ s0.reduced(b) @ turn.conj().T
        assert np.trace(s1.reduced(a) @ target).real == pytest.approx(1.0, abs=1e-8)
    if r == 0.0:
        # the vacuum is phase invariant, so S literally becomes the initial E state
        assert np.abs(s1.reduced("S") - s0.reduced("E")).max() < 1e-10


def test_zero_temperature_fixed_point():
    cfg = ExperimentConfig(xi0=1.0, r=0.0, gamma_s=0.05)
    t = 30.0 / 0.05
    st = evolve_oracle(cfg, [t], OracleConfig(tol=1e-8, dt=0.5))[0]
    assert st.reduced("S")[0, 0].real >= 1 - 1e-6
    assert st.reduced("E")[0, 0].real >= 1 - 1e-6


def test_budget_guard():
    cfg = ExperimentConfig(xi0=2.0, r=2.0, gamma_s=0.05)
    with pytest.raises(OracleBudgetError):
        evolve_oracle(cfg, [0.1])


# ----------------------------------------------- moments against closed form


@pytest.mark.parametrize("r", [-0.5, 0.0, 0.5])
@pytest.mark.parametrize("damping", [(0.0, 0.0), (0.05, 0.02)])
def test_moments_match_closed_form(r, damping):
    cfg = ExperimentConfig(xi0=1.0, r=r, gamma_s=damping[0], gamma_e=damping[1])
    grid = np.linspace(0, math.pi, 5)
    states = evolve_oracle(cfg, grid, OracleConfig(tol=1e-12), system="coherent", keep="reduced")
    for G, st in zip(grid, states):
        s, e = evolve_at(cfg, G)
        mq, mp, vq, vp = moments(st.reduced("S"))
        assert (mq, mp, vq, vp) == pytest.approx((s.xi, 0.0, s.var_q, s.var_p), abs=1e-6)
        mq, mp, vq, vp = moments(st.reduced("E"))
        # the transferred amplitude sits on -P of mode E
        assert (mq, mp, vq, vp) == pytest.approx((0.0, -e.xi, e.var_q, e.var_p), abs=1e-6)


# ------------------------------------------------------------ Wigner paths


def test_wigner_parity_and_fourier_agree():
    cfg = ExperimentConfig(xi0=1.5, r=1.0)
    st = evolve_oracle(cfg, [0.6])[0]
    for mode in "SE":
        rho = st.reduced(mode)
        assert wigner_parity(rho, 0, 0) == pytest.approx(wigner_fourier(rho, 0, 0), abs=1e-9)
        assert wigner_parity(rho, 0.7, -0.4) == pytest.approx(wigner_fourier(rho, 0.7, -0.4), abs=1e-9)


def test_wigner_of_coherent_state():
    coh = build_coherent(1.0 + 0.5j, 60)
    rho = np.outer(coh, coh.conj())
    for q, p in ((0, 0), (1, 0.5), (0.3, -1)):
        expected = 2 / math.pi * math.exp(-2 * ((q - 1) ** 2 + (p - 0.5) ** 2))
        assert wigner_parity(rho, q, p) == pytest.approx(expected, abs=1e-12)


def test_wigner_grid_matches_parity():
    cfg = ExperimentConfig(xi0=1.5, r=1.0, gamma_s=0.05)
    st = evolve_oracle(cfg, [0.6], OracleConfig(nmax=40, tol=1e-3, dt=0.1))[0]
    qs, ps = np.linspace(-3, 3, 4), np.linspace(-2, 2.5, 3)
    for mode in "SE":
        rho = st.reduced(mode)
        ref = np.array([[wigner_parity(rho, q, p) for p in ps] for q in qs])
        np.testing.assert_allclose(wigner_grid(rho, qs, ps), ref, atol=1e-12)
