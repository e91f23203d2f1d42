import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualschur import (Baumgarte, DContinuity, Diverged, IllPosedForwardEuler, Mesh1D,
                       ModifiedDContinuity, TrapezoidalConfig, VContinuity, assemble_1d,
                       from_matrices, initial_state, method_from_name, partition_1d, simulate,
                       simulate_monolithic, split_dof_problem, step)
from dualschur.steppers import (CouplingState, build_schur, interpolate_integer_levels,
                                step_monolithic, weighted_level)

import oracles

METHODS = [DContinuity(), ModifiedDContinuity(), VContinuity(), Baumgarte(1.0)]


def zero_state(problem):
    z = tuple(np.zeros(s.n_dof) for s in problem.subdomains)
    return CouplingState(0.0, z, z, np.zeros(problem.n_constraints))


def bar(n=20, **kw):
    return partition_1d(assemble_1d(Mesh1D(n, 2.0), initial=lambda x: np.cos(np.pi * x / 2), **kw), 2)


def test_config_validation():
    with pytest.raises(ValueError):
        TrapezoidalConfig(1.5, 0.1)
    with pytest.raises(ValueError):
        TrapezoidalConfig(0.5, 0.0)
    with pytest.raises(ValueError):
        Baumgarte(0.0)


def test_method_names():
    assert isinstance(method_from_name("modified-d"), ModifiedDContinuity)
    assert method_from_name("baumgarte", 2.0).alpha == 2.0
    with pytest.raises(ValueError):
        method_from_name("baumgarte")
    with pytest.raises(ValueError):
        method_from_name("x")


@pytest.mark.parametrize("method", [DContinuity(), ModifiedDContinuity()])
def test_forward_euler_rejected_for_d_type(method):
    with pytest.raises(IllPosedForwardEuler):
        build_schur(split_dof_problem(), TrapezoidalConfig(0.0, 0.01), method)


@pytest.mark.parametrize("method", [VContinuity(), Baumgarte(0.5)])
def test_forward_euler_allowed_for_v_type(method):
    p = split_dof_problem()
    cfg = TrapezoidalConfig(0.0, 0.01)
    s = step(initial_state(p, method, cfg), p, cfg, method)
    assert np.isfinite(s.max_abs())


@pytest.mark.parametrize("method", METHODS)
def test_zero_data_stays_zero(method):
    p = bar(8)
    cfg = TrapezoidalConfig(0.5, 0.01)
    s = zero_state(p)
    for _ in range(3):
        s = step(s, p, cfg, method)
    assert s.max_abs() == 0.0


@pytest.mark.parametrize("method", METHODS)
def test_symmetric_split_dof_has_no_flux(method):
    p = split_dof_problem(k_a=4.0, k_b=4.0)
    cfg = TrapezoidalConfig(0.6, 0.01)
    for lvl in simulate(p, method, cfg, 5):
        assert np.allclose(lvl.lam, 0.0, atol=1e-14)
        assert lvl.v[0][0] == pytest.approx(lvl.v[1][0], abs=1e-14)


def test_schur_split_dof_value():
    schur = build_schur(split_dof_problem(), TrapezoidalConfig(1.0, 0.01))
    assert schur.G[0, 0] == pytest.approx(1 / 1.1 + 1 / 1.01)


def test_split_dof_one_step_against_five_unknowns():
    p = split_dof_problem()
    cfg = TrapezoidalConfig(1.0, 0.01)
    s0 = initial_state(p, DContinuity(), cfg)
    s1 = step(s0, p, cfg, DContinuity())
    d, v, lam = oracles.full_step(p, s0.d, s0.v, 0.0, 1.0, 0.01, "d")
    assert np.allclose(np.concatenate(s1.d), np.concatenate(d), rtol=1e-13)
    assert np.allclose(lam, s1.lam, rtol=1e-12)


def test_v_continuity_forward_euler_against_oracle():
    p = split_dof_problem()
    cfg = TrapezoidalConfig(0.0, 0.01)
    s0 = initial_state(p, VContinuity(), cfg)
    s1 = step(s0, p, cfg, VContinuity())
    d, v, lam = oracles.full_step(p, s0.d, s0.v, 0.0, 0.0, 0.01, "v")
    assert np.allclose(np.concatenate(s1.v), np.concatenate(v), rtol=1e-12)
    assert np.allclose(lam, s1.lam, rtol=1e-12)


def test_initial_state_is_consistent():
    p = split_dof_problem()
    s = initial_state(p)
    assert s.v[0][0] == pytest.approx(-5.5) and s.v[1][0] == pytest.approx(-5.5)
    assert s.lam[0] == pytest.approx(4.5)
    for sub, d, v in zip(p.subdomains, s.d, s.v):
        assert np.allclose(sub.M @ v + sub.K @ d, sub.C.T @ s.lam)


def test_modified_equals_d_continuity_at_backward_euler():
    p = bar(10)
    cfg = TrapezoidalConfig(1.0, 0.01)
    a = list(simulate(p, DContinuity(), cfg, 10))
    b = list(simulate(p, ModifiedDContinuity(), cfg, 10))
    for la, lb in zip(a[1:], b[1:]):
        for x, y in zip(la.d, lb.d):
            assert np.allclose(x, y, rtol=1e-12, atol=1e-14)
        assert np.allclose(la.lam, lb.lam, rtol=1e-10, atol=1e-12)


def test_baumgarte_small_alpha_approaches_v_continuity():
    p = bar(8)
    cfg = TrapezoidalConfig(0.5, 0.01)
    s0 = initial_state(p, VContinuity(), cfg)
    a = step(s0, p, cfg, VContinuity())
    b = step(s0, p, cfg, Baumgarte(1e-10))
    assert np.allclose(np.concatenate(a.v), np.concatenate(b.v), rtol=1e-8, atol=1e-9)


def test_level_helpers():
    assert interpolate_integer_levels(2.0, 4.0, 0.5) == 3.0
    assert interpolate_integer_levels(7.0, 1.0, 1.0) == 7.0
    assert interpolate_integer_levels(5.0, 5.0, 0.3) == pytest.approx(5.0)
    assert weighted_level(0.0, 1.0, 0.25) == 0.25
    out = interpolate_integer_levels((np.ones(2),), (np.zeros(2),), 0.25)
    assert isinstance(out, tuple) and np.allclose(out[0], 0.25)


def test_monolithic_scalar_backward_euler():
    s = assemble_1d(Mesh1D(1, 1.0))
    # reduce to a scalar by hand: m = 2, k = 11 expressed as 1x1 arrays
    from dualschur.fem import SemiDiscreteSystem
    from scipy import sparse
    sc = SemiDiscreteSystem(s.mesh, 1.0, 1.0, sparse.csr_array([[2.0]]), sparse.csr_array([[11.0]]),
                            np.array([1.0]), np.array([0]))
    d, v = step_monolithic(sc, np.array([1.0]), np.array([-5.5]), 0.0, TrapezoidalConfig(1.0, 0.01))
    assert d[0] == pytest.approx(1 / 1.055, rel=1e-12)
    d, _ = step_monolithic(sc, np.array([1.0]), np.array([-5.5]), 0.0, TrapezoidalConfig(0.0, 0.01))
    assert d[0] == pytest.approx(1 - 0.055)


def test_monolithic_midpoint_energy_non_increasing():
    rng = np.random.default_rng(4)
    sys = assemble_1d(Mesh1D(6, 1.0), initial=rng.standard_normal(7))
    e = [d @ sys.M @ d for _, d, _ in simulate_monolithic(sys, TrapezoidalConfig(0.5, 0.3), 30)]
    assert np.all(np.diff(e) <= 1e-14)


def test_blowup_guard():
    p = split_dof_problem()
    cfg = TrapezoidalConfig(0.25, 0.01)
    big = CouplingState(0.0, (np.array([1e99]), np.array([1e99])),
                        (np.array([1e101]), np.array([0.0])), np.zeros(1))
    with pytest.raises(Diverged) as info:
        step(big, p, cfg, DContinuity())
    assert info.value.state is not None


@pytest.mark.parametrize("method", METHODS)
def test_trapezoidal_relation_and_constraints(method):
    p = bar(10)
    cfg = TrapezoidalConfig(0.75, 0.01)
    levels = list(simulate(p, method, cfg, 8))
    for a, b in zip(levels, levels[1:]):
        for d0, d1, v0, v1, vw in zip(a.d, b.d, a.v, b.v, a.v_weighted):
            if isinstance(method, ModifiedDContinuity):
                assert np.allclose(d1 - d0, cfg.dt * vw, atol=1e-14)
            else:
                rel = d1 - d0 - cfg.dt * ((1 - cfg.gamma) * v0 + cfg.gamma * v1)
                assert np.max(np.abs(rel)) <= 1e-13
    for lvl in levels:
        scale = max(1.0, max(np.max(np.abs(x)) for x in (*lvl.d, *lvl.v)))
        if isinstance(method, (DContinuity, ModifiedDContinuity)):
            r = p.constraint_residual(lvl.d)
        elif isinstance(method, VContinuity):
            r = p.constraint_residual(lvl.v)
        else:
            r = p.constraint_residual([v + method.alpha / cfg.dt * d for d, v in zip(lvl.d, lvl.v)])
        assert np.max(np.abs(r)) <= 1e-10 * scale


# ---- brute-force equivalence on random small systems ----------------------

def random_problem(rng, with_load):
    n_sub = int(rng.integers(2, 4))
    total = int(rng.integers(n_sub, 7))
    sizes = np.ones(n_sub, dtype=int)
    for _ in range(total - n_sub):
        sizes[rng.integers(n_sub)] += 1
    # disjoint pairs of dofs from different subdomains -> independent rows
    dofs = [(i, j) for i in range(n_sub) for j in range(sizes[i])]
    rng.shuffle(dofs)
    rows = []
    used = set()
    for a in dofs:
        for b in dofs:
            if a[0] < b[0] and a not in used and b not in used:
                rows.append((a, b))
                used |= {a, b}
                break
    if not rows:
        rows = [((0, 0), (1, 0))]
    blocks, u0, loads = [], [], []
    for i, n in enumerate(sizes):
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        m = q @ np.diag(rng.uniform(0.5, 2.0, n)) @ q.T
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        k = q @ np.diag(rng.uniform(0.0, 5.0, n)) @ q.T
        c = np.zeros((len(rows), n))
        for r, (a, b) in enumerate(rows):
            if a[0] == i:
                c[r, a[1]] = 1
            if b[0] == i:
                c[r, b[1]] = -1
        blocks.append((m, k, c))
        u0.append(rng.standard_normal(n))
        amp = rng.standard_normal(n)
        loads.append((lambda t, amp=amp: amp * np.cos(3.0 * t)) if with_load else None)
    return from_matrices(blocks, u0, loads if with_load else None)


def _close(a, b):
    a, b = np.concatenate(a), np.concatenate(b)
    scale = max(1.0, np.max(np.abs(b)))
    return np.max(np.abs(a - b)) <= 1e-10 * scale


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), gamma=st.floats(0.05, 1.0), dt=st.floats(1e-3, 0.5),
       alpha=st.floats(0.1, 3.0), with_load=st.booleans())
def test_steppers_match_full_system(seed, gamma, dt, alpha, with_load):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, with_load)
    assert sum(s.n_dof for s in p.subdomains) <= 6
    cfg = TrapezoidalConfig(gamma, dt)
    d0 = [s.initial for s in p.subdomains]
    v0 = [rng.standard_normal(s.n_dof) for s in p.subdomains]
    t0 = float(rng.uniform(0, 1))
    state = CouplingState(t0, tuple(d0), tuple(v0), np.zeros(p.n_constraints))
    for method, kind in ((DContinuity(), "d"), (VContinuity(), "v"), (Baumgarte(alpha), "baumgarte")):
        got = step(state, p, cfg, method)
        d, v, lam = oracles.full_step(p, d0, v0, t0, gamma, dt, kind, alpha)
        assert _close(got.d, d) and _close(got.v, v) and _close([got.lam], [lam])
    got = step(state, p, cfg, ModifiedDContinuity())
    d, vw, lw = oracles.full_modified_step(p, d0, t0, gamma, dt)
    assert _close(got.d, d) and _close(got.v, vw) and _close([got.lam], [lw])


def test_oracle_backward_euler_equivalence():
    sys = assemble_1d(Mesh1D(20, 2.0), initial=lambda x: np.cos(np.pi * x / 2))
    p = partition_1d(sys, 2)
    cfg = TrapezoidalConfig(1.0, 0.01)
    mono = list(simulate_monolithic(sys, cfg, 100))
    dd = list(simulate(p, DContinuity(), cfg, 100))
    for (t, d, _), lvl in zip(mono, dd):
        got = p.gather(lvl.d)
        assert np.max(np.abs(got - d)) <= 1e-9 * np.max(np.abs(d))
