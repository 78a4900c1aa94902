"""Contact Hamiltonians H(p, u) and their Legendre duals.

The evolution equation is dt w + H(dx w, w) = 0 on the torus, with H convex
and superlinear in p and strictly decreasing in u:

    -kappa <= dH/du <= -delta < 0.

Strict decrease gives a unique equilibrium level c with H(0, c) = 0, and the
frequency vector omega = dH/dp(0, c) drives the linear flow on the torus.
The Lagrangian is the convex conjugate L(v, u) = sup_p <v,p> - H(p, u); it is
nondecreasing in u at rate between delta and kappa, with min_v L(v, u) =
-H(0, u) attained at v = dH/dp(0, u).

Evaluation is numpy-batched: `evaluate(p, u)` accepts p of shape (..., n) and
u of shape (...).  Purity matters; instances hold no mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EPS = np.finfo(float).eps


class LegendreConvergenceError(RuntimeError):
    """Newton ascent for the convex conjugate failed; carries the last iterate."""

    def __init__(self, msg, p_last, value_last):
        super().__init__(msg)
        self.p_last = p_last
        self.value_last = value_last


class ContactHamiltonian:
    """Base class: subclasses implement `evaluate` and declare the bounds.

    Attributes:
        n: spatial dimension.
        kappa, delta: declared global bounds -kappa <= dH/du <= -delta.
        p_box: radius of the momentum box used by numeric searches.
        u_box: radius of the u sampling box used by audits.
    """

    name = "custom"

    def __init__(self, n, kappa, delta, p_box=8.0, u_box=5.0):
        if not (0 < delta <= kappa):
            raise ValueError(f"need 0 < delta <= kappa, got delta={delta}, kappa={kappa}")
        self.n = int(n)
        self.kappa = float(kappa)
        self.delta = float(delta)
        self.p_box = float(p_box)
        self.u_box = float(u_box)

    def evaluate(self, p, u):
        raise NotImplementedError

    def grad_p(self, p, u):
        """Analytic dH/dp if available, else None (finite differences used)."""
        return None

    def lagrangian_batch(self, v, u, p0=None):
        """L(v, u) for a single velocity v and a batch of u values.

        Returns (L values, maximizer momenta).  Default: warm-started Newton
        ascent; closed-form subclasses override.
        """
        return _legendre_newton_batch(self, np.asarray(v, dtype=float),
                                      np.asarray(u, dtype=float), p0)

    def separable_components(self):
        """Per-axis 1-D Hamiltonians summing to H, or None if not separable."""
        return None

    # -- finite-difference helpers -------------------------------------------

    def fd_grad_p(self, p, u):
        p = np.asarray(p, dtype=float)
        step = _EPS ** (1 / 3) * max(1.0, self.p_box)
        g = np.empty_like(p)
        for ax in range(self.n):
            e = np.zeros(self.n)
            e[ax] = step
            g[..., ax] = (self.evaluate(p + e, u) - self.evaluate(p - e, u)) / (2 * step)
        return g

    def any_grad_p(self, p, u):
        g = self.grad_p(p, u)
        return self.fd_grad_p(p, u) if g is None else np.asarray(g, dtype=float)

    def fd_hess_p(self, p, u):
        """Symmetric finite-difference Hessian in p at a single (p, u)."""
        p = np.asarray(p, dtype=float)
        step = _EPS**0.25 * max(1.0, self.p_box)
        H = np.empty((self.n, self.n))
        for i in range(self.n):
            ei = np.zeros(self.n)
            ei[i] = step
            for j in range(i, self.n):
                ej = np.zeros(self.n)
                ej[j] = step
                val = (
                    self.evaluate(p + ei + ej, u)
                    - self.evaluate(p + ei - ej, u)
                    - self.evaluate(p - ei + ej, u)
                    + self.evaluate(p - ei - ej, u)
                ) / (4 * step * step)
                H[i, j] = H[j, i] = val
        return H

    def fd_du(self, p, u):
        step = _EPS ** (1 / 3) * max(1.0, abs(u))
        return (self.evaluate(p, u + step) - self.evaluate(p, u - step)) / (2 * step)


class QuadraticHamiltonian(ContactHamiltonian):
    """H(p, u) = <p,p> + <omega,p> - lam*u; the closed-form benchmark family.

    Equilibrium level c = 0, frequency omega, kappa = delta = lam, and
    L(v, u) = |v - omega|^2/4 + lam*u.
    """

    name = "quadratic"

    def __init__(self, lam, omega, p_box=8.0, u_box=5.0):
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        if lam <= 0:
            raise ValueError("lam must be positive")
        super().__init__(len(omega), lam, lam, p_box, u_box)
        self.lam = float(lam)
        self.omega = omega

    def evaluate(self, p, u):
        p = np.asarray(p, dtype=float)
        return np.sum(p * p, axis=-1) + p @ self.omega - self.lam * np.asarray(u)

    def grad_p(self, p, u):
        return 2.0 * np.asarray(p, dtype=float) + self.omega

    def lagrangian_batch(self, v, u, p0=None):
        v = np.asarray(v, dtype=float)
        d = v - self.omega
        pstar = d / 2.0
        L = float(d @ d) / 4.0 + self.lam * np.asarray(u, dtype=float)
        return L, np.broadcast_to(pstar, np.shape(u) + (self.n,))

    def separable_components(self):
        # axis components q^2 + omega_i q - (lam/n) u keep H = sum H_i exact
        return [_AxisQuadratic(self.lam, self.n, float(self.omega[i]),
                               self.p_box, self.u_box) for i in range(self.n)]


class _AxisQuadratic(ContactHamiltonian):
    """One axis of a separable quadratic: H_i(q, u) = q^2 + omega_i q - (lam/n) u."""

    name = "quadratic-axis"

    def __init__(self, lam_total, n_axes, omega_i, p_box, u_box):
        super().__init__(1, lam_total / n_axes, lam_total / n_axes, p_box, u_box)
        self.lam_total = float(lam_total)
        self.n_axes = int(n_axes)
        self.omega = np.array([omega_i])

    def evaluate(self, p, u):
        p = np.asarray(p, dtype=float)
        return (np.sum(p * p, axis=-1) + p @ self.omega
                - (self.lam_total / self.n_axes) * np.asarray(u))

    def grad_p(self, p, u):
        return 2.0 * np.asarray(p, dtype=float) + self.omega

    def lagrangian_batch(self, v, u, p0=None):
        d = float(np.asarray(v).reshape(-1)[0] - self.omega[0])
        L = d * d / 4.0 + (self.lam_total / self.n_axes) * np.asarray(u, dtype=float)
        return L, np.broadcast_to(np.array([d / 2.0]), np.shape(u) + (1,))


class QuarticHamiltonian(ContactHamiltonian):
    """H(p, u) = sum_i (p_i^2 + beta p_i^4 + omega_i p_i) - lam*u + offset.

    Superlinear faster than quadratic; the Legendre transform has no closed
    form, so this family exercises the numeric conjugate end to end.
    Equilibrium level c = offset / lam.
    """

    name = "quartic"

    def __init__(self, lam, omega, beta=0.1, offset=0.0, p_box=8.0, u_box=5.0):
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        if lam <= 0 or beta < 0:
            raise ValueError("need lam > 0 and beta >= 0")
        super().__init__(len(omega), lam, lam, p_box, u_box)
        self.lam = float(lam)
        self.beta = float(beta)
        self.offset = float(offset)
        self.omega = omega

    def evaluate(self, p, u):
        p = np.asarray(p, dtype=float)
        return (np.sum(p * p + self.beta * p**4, axis=-1) + p @ self.omega
                - self.lam * np.asarray(u) + self.offset)

    def grad_p(self, p, u):
        p = np.asarray(p, dtype=float)
        return 2.0 * p + 4.0 * self.beta * p**3 + self.omega

    def separable_components(self):
        return [_AxisQuartic(self.lam, self.n, float(self.omega[i]), self.beta,
                             self.offset, self.p_box, self.u_box)
                for i in range(self.n)]


class _AxisQuartic(ContactHamiltonian):
    name = "quartic-axis"

    def __init__(self, lam_total, n_axes, omega_i, beta, offset_total, p_box, u_box):
        super().__init__(1, lam_total / n_axes, lam_total / n_axes, p_box, u_box)
        self.lam_total = float(lam_total)
        self.n_axes = int(n_axes)
        self.beta = float(beta)
        self.offset = float(offset_total) / n_axes
        self.omega = np.array([omega_i])

    def evaluate(self, p, u):
        p = np.asarray(p, dtype=float)
        return (np.sum(p * p + self.beta * p**4, axis=-1) + p @ self.omega
                - (self.lam_total / self.n_axes) * np.asarray(u) + self.offset)

    def grad_p(self, p, u):
        p = np.asarray(p, dtype=float)
        return 2.0 * p + 4.0 * self.beta * p**3 + self.omega


class SaturatingHamiltonian(ContactHamiltonian):
    """H(p, u) = |p|^2 + <omega,p> - delta*u - (kappa-delta)*arctan(u) + offset.

    dH/du = -delta - (kappa-delta)/(1+u^2) stays in (-kappa, -delta]; used to
    test the kappa != delta regime with a non-trivial equilibrium level.
    """

    name = "saturating"

    def __init__(self, kappa, delta, omega, offset=0.0, p_box=8.0, u_box=5.0):
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        super().__init__(len(omega), kappa, delta, p_box, u_box)
        self.offset = float(offset)
        self.omega = omega

    def evaluate(self, p, u):
        p = np.asarray(p, dtype=float)
        u = np.asarray(u, dtype=float)
        return (np.sum(p * p, axis=-1) + p @ self.omega - self.delta * u
                - (self.kappa - self.delta) * np.arctan(u) + self.offset)

    def grad_p(self, p, u):
        return 2.0 * np.asarray(p, dtype=float) + self.omega


_REGISTRY = {
    "quadratic": lambda params: QuadraticHamiltonian(
        lam=params["lambda"], omega=params["omega"],
        p_box=params.get("p_box", 8.0), u_box=params.get("u_box", 5.0)),
    "quartic": lambda params: QuarticHamiltonian(
        lam=params["lambda"], omega=params["omega"], beta=params.get("beta", 0.1),
        offset=params.get("offset", 0.0),
        p_box=params.get("p_box", 8.0), u_box=params.get("u_box", 5.0)),
    "saturating": lambda params: SaturatingHamiltonian(
        kappa=params["kappa"], delta=params["delta"], omega=params["omega"],
        offset=params.get("offset", 0.0),
        p_box=params.get("p_box", 8.0), u_box=params.get("u_box", 5.0)),
}


def build_hamiltonian(kind: str, params: dict) -> ContactHamiltonian:
    """Construct a builtin Hamiltonian from a config block."""
    if kind not in _REGISTRY:
        raise ValueError(f"unknown hamiltonian kind {kind!r}; have {sorted(_REGISTRY)}")
    return _REGISTRY[kind](params)


# ---------------------------------------------------------------------------
# assumption audit
# ---------------------------------------------------------------------------

@dataclass
class AssumptionResult:
    name: str
    ok: bool
    worst_value: float
    witness: tuple


@dataclass
class AuditReport:
    convexity: AssumptionResult
    superlinearity: AssumptionResult
    u_monotonicity: AssumptionResult

    @property
    def ok(self) -> bool:
        return self.convexity.ok and self.superlinearity.ok and self.u_monotonicity.ok

    def failures(self):
        return [r for r in (self.convexity, self.superlinearity, self.u_monotonicity)
                if not r.ok]


def audit_assumptions(H: ContactHamiltonian, samples: int = 200,
                      seed: int = 0, tol: float = 1e-6) -> AuditReport:
    """Sample-based audit of convexity, superlinearity and u-monotonicity.

    Convexity: smallest eigenvalue of the finite-difference p-Hessian must be
    positive at every sample.  Superlinearity: H(R p_hat, u)/R must grow over
    three radii along unit directions.  Monotonicity: finite-difference dH/du
    must stay within [-kappa - tol, -delta + tol].

    Failures are reported, not raised; callers decide whether to proceed.
    """
    rng = np.random.default_rng(seed)
    ps = rng.uniform(-H.p_box, H.p_box, size=(samples, H.n))
    us = rng.uniform(-H.u_box, H.u_box, size=samples)

    worst_eig, eig_wit = np.inf, None
    for i in range(samples):
        eig = float(np.linalg.eigvalsh(H.fd_hess_p(ps[i], us[i])).min())
        if eig < worst_eig:
            worst_eig, eig_wit = eig, (tuple(ps[i]), float(us[i]))
    convexity = AssumptionResult("convexity", worst_eig > 0.0, worst_eig, eig_wit)

    radii = H.p_box * np.array([0.5, 1.0, 2.0])
    worst_growth, growth_wit = np.inf, None
    for i in range(min(samples, 64)):
        direction = rng.normal(size=H.n)
        direction /= np.linalg.norm(direction)
        u = float(us[i % samples])
        vals = np.array([H.evaluate(r * direction, u) / r for r in radii])
        growth = float(np.min(np.diff(vals)))
        if growth < worst_growth:
            worst_growth, growth_wit = growth, (tuple(direction), u)
    superlinearity = AssumptionResult("superlinearity", worst_growth > 0.0,
                                      worst_growth, growth_wit)

    worst_lo, worst_hi, mono_wit = np.inf, -np.inf, None
    mono_ok = True
    for i in range(samples):
        du = float(H.fd_du(ps[i], us[i]))
        if du < worst_lo:
            worst_lo = du
        if du > worst_hi:
            worst_hi = du
        if not (-H.kappa - tol <= du <= -H.delta + tol):
            mono_ok = False
            mono_wit = (tuple(ps[i]), float(us[i]), du)
    u_monotonicity = AssumptionResult(
        "u-monotonicity", mono_ok, worst_hi if worst_hi > -H.delta else worst_lo,
        mono_wit)
    return AuditReport(convexity, superlinearity, u_monotonicity)


# ---------------------------------------------------------------------------
# equilibrium level and frequency
# ---------------------------------------------------------------------------

def find_equilibrium_c(H: ContactHamiltonian, tol: float | None = None) -> float:
    """Unique root of u -> H(0, u), via the slope bracket plus bisection.

    H(0, u) decreases at rate between delta and kappa, so with H0 = H(0, 0)
    the root lies in [H0/kappa, H0/delta] (interval ordered by sign of H0);
    the bracket is expanded if a misdeclared slope leaves the root outside.
    """
    p0 = np.zeros(H.n)
    H0 = float(H.evaluate(p0, 0.0))
    if not np.isfinite(H0):
        raise ValueError("H(0, 0) is not finite")
    if tol is None:
        tol = 1e-12 * max(1.0, abs(H0))
    if abs(H0) <= tol:
        return 0.0
    lo, hi = sorted((H0 / H.kappa, H0 / H.delta))
    lo, hi = lo - tol, hi + tol
    for _ in range(200):
        if H.evaluate(p0, lo) > 0.0 > H.evaluate(p0, hi):
            break
        lo -= (hi - lo) + 1.0
        hi += (hi - lo) + 1.0
    else:
        raise ValueError("failed to bracket the equilibrium level")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        val = float(H.evaluate(p0, mid))
        if not np.isfinite(val):
            raise ValueError("non-finite H evaluation during bisection")
        if abs(val) <= tol:
            return mid
        if val > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def frequency_omega(H: ContactHamiltonian, c: float) -> np.ndarray:
    """dH/dp at (0, c): analytic gradient when declared, else central differences."""
    return np.atleast_1d(H.any_grad_p(np.zeros(H.n), c)).astype(float)


@dataclass
class EquilibriumData:
    """Equilibrium level c with H(0, c) = 0 and frequency omega = dH/dp(0, c)."""

    c: float
    omega: np.ndarray

    @staticmethod
    def of(H: ContactHamiltonian, tol: float | None = None) -> "EquilibriumData":
        c = find_equilibrium_c(H, tol)
        return EquilibriumData(c=c, omega=frequency_omega(H, c))


# ---------------------------------------------------------------------------
# Legendre transform
# ---------------------------------------------------------------------------

def _newton_ascent(H, v, u, box, tol, max_iter):
    """Damped Newton maximization of p -> <v,p> - H(p,u) inside a box."""
    p = np.zeros(H.n)
    val = float(v @ p - H.evaluate(p, u))
    hit_boundary = False
    grad_scale = 1.0 + np.linalg.norm(v) + abs(val)
    for _ in range(max_iter):
        g = v - H.any_grad_p(p, u)
        if np.linalg.norm(g) <= tol * grad_scale:
            return p, val, True, hit_boundary
        hess = H.fd_hess_p(p, u)
        try:
            step = np.linalg.solve(hess, g)
        except np.linalg.LinAlgError:
            step = g
        t = 1.0
        base = val
        improved = False
        for _ in range(50):
            cand = np.clip(p + t * step, -box, box)
            cval = float(v @ cand - H.evaluate(cand, u))
            if cval > base:
                improved = True
                break
            t *= 0.5
        if not improved:
            # strictly concave objective: value stagnation at machine
            # precision means the maximizer is resolved
            stalled = np.linalg.norm(g) <= np.sqrt(tol) * grad_scale
            return p, val, stalled, hit_boundary
        p, val = cand, cval
        if np.any(np.abs(p) >= box - 1e-12):
            hit_boundary = True
    return p, val, np.linalg.norm(v - H.any_grad_p(p, u)) <= np.sqrt(tol) * grad_scale, hit_boundary


def legendre_L(H: ContactHamiltonian, v, u: float, tol: float = 1e-10,
               max_iter: int = 100) -> float:
    """Convex conjugate L(v, u) = sup_p <v,p> - H(p,u), by damped Newton ascent.

    Starts at p = 0 inside the declared momentum box; if the maximizer lands
    on the box boundary the box is grown and the ascent retried, so declared
    boxes that are too small only cost time, not correctness.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (H.n,):
        raise ValueError(f"velocity has shape {v.shape}, expected ({H.n},)")
    box = H.p_box
    last = (np.zeros(H.n), float(-H.evaluate(np.zeros(H.n), u)))
    for _ in range(8):
        p, val, converged, hit = _newton_ascent(H, v, u, box, tol, max_iter)
        last = (p, val)
        if converged and not np.any(np.abs(p) >= box - 1e-12):
            return val
        box *= 2.0
    raise LegendreConvergenceError(
        f"Legendre ascent did not converge for v={v}, u={u}", *last)


def min_velocity_cost(H: ContactHamiltonian, u: float):
    """The cheapest velocity and its cost: v* = dH/dp(0,u), L(v*,u) = -H(0,u)."""
    p0 = np.zeros(H.n)
    vstar = np.atleast_1d(H.any_grad_p(p0, u)).astype(float)
    return vstar, float(-H.evaluate(p0, u))


def _legendre_newton_batch(H, v, u, p0=None, tol=1e-12, max_iter=30):
    """Vectorized Newton ascent of <v,p> - H(p,u) over a batch of u values.

    Warm starts from p0 (e.g. the previous fixed-point iterate's maximizers).
    Falls back to the scalar damped path for any element that fails.
    """
    u = np.asarray(u, dtype=float)
    m = u.size
    shape = u.shape
    uf = u.reshape(m)
    p = (np.zeros((m, H.n)) if p0 is None
         else np.array(p0, dtype=float).reshape(m, H.n).copy())
    step_scale = max(1.0, H.p_box)
    ok = np.zeros(m, dtype=bool)
    for _ in range(max_iter):
        g = v[None, :] - np.asarray(H.any_grad_p(p, uf), dtype=float).reshape(m, H.n)
        ok = np.linalg.norm(g, axis=1) <= tol * (1.0 + np.linalg.norm(v)) * step_scale
        if ok.all():
            break
        hess = _batch_hess(H, p, uf)
        try:
            delta = np.linalg.solve(hess, g[..., None])[..., 0]
        except np.linalg.LinAlgError:
            delta = g
        # plain Newton with a trust cap; convex problems converge from warm starts
        norms = np.linalg.norm(delta, axis=1, keepdims=True)
        cap = 2.0 * step_scale
        delta = np.where(norms > cap, delta * (cap / np.maximum(norms, 1e-300)), delta)
        p = p + np.where(ok[:, None], 0.0, delta)
    vals = p @ v - H.evaluate(p, uf)
    if not ok.all():
        bad = np.flatnonzero(~ok)
        for i in bad:
            pi, vi, conv, _ = _newton_ascent(H, v, float(uf[i]), H.p_box * 4,
                                             1e-10, 100)
            if not conv:
                raise LegendreConvergenceError(
                    f"batched Legendre failed at u={uf[i]}", pi, vi)
            p[i] = pi
            vals[i] = vi
    return vals.reshape(shape), p.reshape(shape + (H.n,))


def _batch_hess(H, p, u):
    """Finite-difference p-Hessians for a batch, shape (m, n, n)."""
    m, n = p.shape
    step = _EPS**0.25 * max(1.0, H.p_box)
    out = np.empty((m, n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step
        for j in range(i, n):
            ej = np.zeros(n)
            ej[j] = step
            val = (H.evaluate(p + ei + ej, u) - H.evaluate(p + ei - ej, u)
                   - H.evaluate(p - ei + ej, u) + H.evaluate(p - ei - ej, u)
                   ) / (4 * step * step)
            out[:, i, j] = out[:, j, i] = val
    return out
