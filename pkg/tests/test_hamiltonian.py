import numpy as np
import pytest

from contacthj.hamiltonian import (
    ContactHamiltonian,
    EquilibriumData,
    QuadraticHamiltonian,
    QuarticHamiltonian,
    SaturatingHamiltonian,
    audit_assumptions,
    build_hamiltonian,
    find_equilibrium_c,
    frequency_omega,
    legendre_L,
    min_velocity_cost,
)


class _ShiftedQuadratic(ContactHamiltonian):
    """H = |p|^2 - a*u + b, for hand-checkable equilibrium roots."""

    def __init__(self, a, b, n=1):
        super().__init__(n, kappa=a, delta=a)
        self.a, self.b = a, b

    def evaluate(self, p, u):
        p = np.asarray(p, dtype=float)
        return np.sum(p * p, axis=-1) - self.a * np.asarray(u) + self.b


class _NotDecreasing(ContactHamiltonian):
    """H = |p|^2 + p; dH/du = 0 violates the monotonicity band."""

    def __init__(self):
        super().__init__(1, kappa=1.0, delta=1.0)

    def evaluate(self, p, u):
        p = np.asarray(p, dtype=float)
        return np.sum(p * p, axis=-1) + np.sum(p, axis=-1)


def grid_search_L(H, v, u, box=6.0, m=200001):
    v = np.atleast_1d(v)
    if H.n == 1:
        pg = np.linspace(-box, box, m)[:, None]
    else:
        side = int(np.sqrt(m))
        axes = [np.linspace(-box, box, side)] * H.n
        pg = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, H.n)
    return float(np.max(pg @ v - H.evaluate(pg, u)))


def test_audit_quadratic_passes_with_hessian_eig_two():
    H = QuadraticHamiltonian(1.0, [1.0])
    rep = audit_assumptions(H, samples=100, seed=1)
    assert rep.ok
    assert rep.convexity.worst_value == pytest.approx(2.0, rel=1e-5)


def test_audit_flags_non_decreasing_hamiltonian():
    rep = audit_assumptions(_NotDecreasing(), samples=50, seed=2)
    assert not rep.u_monotonicity.ok
    assert rep.u_monotonicity.witness is not None
    assert len(rep.failures()) == 1


def test_audit_quadratic_2d():
    H = QuadraticHamiltonian(2.0, [1.0, np.sqrt(2.0)])
    rep = audit_assumptions(H, samples=100, seed=3)
    assert rep.ok
    assert rep.u_monotonicity.worst_value == pytest.approx(-2.0, rel=1e-6)


def test_equilibrium_examples():
    assert find_equilibrium_c(QuadraticHamiltonian(1.0, [0.7])) == pytest.approx(0.0, abs=1e-12)
    assert find_equilibrium_c(_ShiftedQuadratic(1.0, 3.0)) == pytest.approx(3.0, abs=1e-10)
    assert find_equilibrium_c(_ShiftedQuadratic(2.0, 1.0)) == pytest.approx(0.5, abs=1e-10)


def test_frequency_examples():
    H = QuadraticHamiltonian(1.0, [1.0, np.sqrt(2.0)])
    om = frequency_omega(H, 0.0)
    assert np.allclose(om, [1.0, np.sqrt(2.0)], atol=1e-12)
    assert np.allclose(frequency_omega(_ShiftedQuadratic(1.0, 0.0, n=2), 0.0),
                       [0.0, 0.0], atol=1e-6)
    assert np.allclose(frequency_omega(QuadraticHamiltonian(3.0, [2.0]), 0.0), [2.0])


def test_equilibrium_data_saturating():
    H = SaturatingHamiltonian(kappa=2.0, delta=1.0, omega=[1.0], offset=1.5)
    eq = EquilibriumData.of(H)
    assert abs(H.evaluate(np.zeros(1), eq.c)) < 1e-10
    assert eq.c != 0.0
    assert np.allclose(eq.omega, [1.0])


def test_legendre_quadratic_against_grid_search():
    H = QuadraticHamiltonian(1.0, [1.0])
    assert legendre_L(H, [1.0], 0.0) == pytest.approx(0.0, abs=1e-10)
    assert legendre_L(H, [3.0], 2.0) == pytest.approx(3.0, abs=1e-10)
    assert legendre_L(H, [3.0], 2.0) == pytest.approx(
        grid_search_L(H, [3.0], 2.0), abs=1e-6)


def test_legendre_quartic_against_grid_search():
    H = QuarticHamiltonian(1.0, [1.0], beta=0.1, offset=0.5)
    for v, u in [(0.0, 0.0), (2.0, 1.0), (-1.5, 0.25)]:
        assert legendre_L(H, [v], u) == pytest.approx(
            grid_search_L(H, [v], u), abs=1e-6)


def test_fenchel_young_inequality():
    H = QuarticHamiltonian(1.0, [1.0], beta=0.05)
    rng = np.random.default_rng(4)
    for _ in range(100):
        v = rng.uniform(-3, 3, size=1)
        p = rng.uniform(-3, 3, size=1)
        u = rng.uniform(-2, 2)
        L = legendre_L(H, v, u)
        assert L + float(H.evaluate(p, u)) >= float(v @ p) - 1e-9


def test_biconjugacy_quadratic():
    # sup_v <p,v> - L(v,u) must reproduce H(p,u); L is exactly quadratic in v,
    # so a coarse grid argmax plus one exact Newton step on the dual resolves
    # the supremum to rounding.
    H = QuadraticHamiltonian(1.0, [1.0, np.sqrt(2.0)])
    rng = np.random.default_rng(5)

    def dual_value(p, u, v):
        return v @ p - (np.sum((v - H.omega) ** 2) / 4.0 + H.lam * u)

    vg = np.linspace(-8, 8, 81)
    vgrid = np.stack(np.meshgrid(vg, vg, indexing="ij"), axis=-1).reshape(-1, 2)
    for _ in range(50):
        p = rng.uniform(-2, 2, size=2)
        u = rng.uniform(-2, 2)
        Lv = np.sum((vgrid - H.omega) ** 2, axis=1) / 4.0 + H.lam * u
        v0 = vgrid[np.argmax(vgrid @ p - Lv)]
        # gradient p - (v - omega)/2, Hessian -1/2: one Newton step is exact
        vstar = v0 + 2.0 * (p - (v0 - H.omega) / 2.0)
        sup = dual_value(p, u, vstar)
        assert sup == pytest.approx(float(H.evaluate(p, u)), abs=1e-8)


def test_lagrangian_u_monotonicity_rates():
    # dual of the u-monotonicity band: L grows in u at rate within [delta, kappa]
    H = SaturatingHamiltonian(kappa=2.0, delta=0.5, omega=[1.0])
    rng = np.random.default_rng(6)
    for _ in range(25):
        v = rng.uniform(-2, 2, size=1)
        u = rng.uniform(-2, 2)
        s = rng.uniform(0.05, 0.5)
        L0 = legendre_L(H, v, u)
        L1 = legendre_L(H, v, u + s)
        rate = (L1 - L0) / s
        assert H.delta - 1e-6 <= rate <= H.kappa + 1e-6
        assert abs(L1 - L0) <= H.kappa * s + 1e-6


def test_min_velocity_cost():
    H = QuadraticHamiltonian(1.0, [1.0])
    v, L = min_velocity_cost(H, 0.0)
    assert np.allclose(v, [1.0]) and L == pytest.approx(0.0)
    v, L = min_velocity_cost(H, 1.0)
    assert np.allclose(v, [1.0]) and L == pytest.approx(1.0)
    Hs = SaturatingHamiltonian(kappa=2.0, delta=1.0, omega=[0.3], offset=0.7)
    c = find_equilibrium_c(Hs)
    _, Lc = min_velocity_cost(Hs, c)
    assert Lc == pytest.approx(0.0, abs=1e-9)
    # cheapest cost is the lower envelope of L over v
    for dv in (-0.5, 0.5):
        assert legendre_L(H, [1.0 + dv], 1.0) >= 1.0 - 1e-12


def test_lagrangian_batch_matches_scalar():
    H = QuarticHamiltonian(1.0, [1.0], beta=0.1)
    us = np.linspace(-1.0, 2.0, 7)
    vals, pstar = H.lagrangian_batch(np.array([1.7]), us)
    for u, val in zip(us, vals):
        assert val == pytest.approx(legendre_L(H, [1.7], float(u)), abs=1e-9)
    assert pstar.shape == (7, 1)


def test_separable_components_sum_to_whole():
    H = QuadraticHamiltonian(1.0, [1.0, np.sqrt(2.0)])
    comps = H.separable_components()
    rng = np.random.default_rng(7)
    p = rng.normal(size=2)
    u = 0.37
    total = sum(float(ci.evaluate(p[i : i + 1], u)) for i, ci in enumerate(comps))
    assert total == pytest.approx(float(H.evaluate(p, u)), abs=1e-12)


def test_registry_round_trip():
    H = build_hamiltonian("quadratic", {"lambda": 2.0, "omega": [1.0, np.sqrt(2.0)]})
    assert isinstance(H, QuadraticHamiltonian)
    assert H.kappa == 2.0
    with pytest.raises(ValueError):
        build_hamiltonian("nope", {})
