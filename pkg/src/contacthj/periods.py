"""Admissible periods of the torus flow and their integer certificates.

A period T > 0 is admissible when (k1*w1 + ... + kn*wn) T = k_{n+1} for some
integer vector with k_{n+1} != 0; the witness (k1, ..., k_{n+1}) is a
certificate.  Restricting to k_{n+1} = 1 singles out fundamental periods.
Certificates are found by exhaustive height-bounded search, which is exact,
reproducible and cheap at n <= 3; absence of a certificate below a height is
a semi-decision and never proves non-membership.

A normalized certificate yields the invariant set S: the torus projection of
the rational hyperplane family {x : k . x in Z}, carried to itself by the
time-T flow and disjoint from itself at intermediate times.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .geometry import TorusPoint, linear_flow, wrap


@dataclass(frozen=True)
class PeriodCertificate:
    """Integer witness that (k . omega) * T = k_last != 0.

    coefficient_ring is "integer" when the relation uses k_last = 1 after
    normalization (fundamental-period form), else "rational-scaled".
    """

    k: tuple
    T: float
    residual: float
    coefficient_ring: str = "rational-scaled"

    def __post_init__(self):
        k = tuple(int(v) for v in self.k)
        object.__setattr__(self, "k", k)
        if k[-1] == 0 or not any(k[:-1]):
            raise ValueError(f"degenerate certificate {k}")

    @property
    def k_space(self) -> tuple:
        return self.k[:-1]

    @property
    def k_last(self) -> int:
        return self.k[-1]

    def recheck(self, omega, tol: float) -> bool:
        """Re-verify the relation with a fresh high-precision dot product."""
        A = float(np.dot(np.asarray(self.k_space, dtype=np.longdouble),
                         np.asarray(omega, dtype=np.longdouble)))
        return abs(A * self.T - self.k_last) <= tol

    def to_dict(self) -> dict:
        return {"k": list(self.k), "T": self.T, "residual": self.residual,
                "coefficient_ring": self.coefficient_ring}


def _normalize(kvec: np.ndarray) -> tuple:
    g = 0
    for v in kvec:
        g = gcd(g, abs(int(v)))
    g = max(g, 1)
    k = tuple(int(v) // g for v in kvec)
    if k[-1] < 0:
        k = tuple(-v for v in k)
    return k


def _integer_boxes(n: int, height: int):
    """All integer vectors with coordinates in [-height, height], nonzero."""
    rng = np.arange(-height, height + 1)
    grids = np.meshgrid(*([rng] * n), indexing="ij")
    K = np.stack([g.reshape(-1) for g in grids], axis=1)
    return K[np.any(K != 0, axis=1)]


def check_period_in_D(T: float, omega, height: int = 50,
                      tol: float = 1e-9) -> PeriodCertificate | None:
    """Search for a certificate (k . omega) T = k_last within the height bound.

    Returns the minimal-residual certificate (ties broken lexicographically),
    normalized to gcd 1 with k_last > 0, or None when nothing lands within
    tol.  None means "no certificate below this height", not T outside D.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if T <= 0:
        raise ValueError("T must be positive")
    if np.all(omega == 0.0):
        raise ValueError("omega = 0 admits no periods")
    K = _integer_boxes(len(omega), height)
    A = K @ omega
    mask = A != 0.0
    K, A = K[mask], A[mask]
    prod = A * T
    klast = np.round(prod)
    ok = klast != 0
    K, A, prod, klast = K[ok], A[ok], prod[ok], klast[ok]
    if K.size == 0:
        return None
    residuals = np.abs(prod - klast)
    hit = residuals <= tol
    if not np.any(hit):
        return None
    idx = np.flatnonzero(hit)
    cand = sorted(
        ((residuals[i], _normalize(np.append(K[i], klast[i]))) for i in idx),
        key=lambda rc: (rc[0], rc[1]),
    )
    res, k = cand[0]
    ring = "integer" if abs(k[-1]) == 1 else "rational-scaled"
    return PeriodCertificate(k=k, T=float(T), residual=float(res),
                             coefficient_ring=ring)


def check_period_in_scriptD(T: float, omega, height: int = 50,
                            tol: float = 1e-9) -> PeriodCertificate | None:
    """Like check_period_in_D but requiring k_last = 1 after normalization,
    i.e. T = 1/|k . omega| with integer coefficients (fundamental form)."""
    cert = None
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.all(omega == 0.0):
        raise ValueError("omega = 0 admits no periods")
    K = _integer_boxes(len(omega), height)
    A = K @ omega
    mask = A != 0.0
    K, A = K[mask], A[mask]
    residuals = np.abs(A * T - np.sign(A))
    hit = residuals <= tol
    if not np.any(hit):
        return None
    idx = np.flatnonzero(hit)
    cand = sorted(
        ((residuals[i], _normalize(np.append(K[i], np.sign(A[i])))) for i in idx),
        key=lambda rc: (rc[0], rc[1]),
    )
    res, k = cand[0]
    if abs(k[-1]) != 1:
        return None
    cert = PeriodCertificate(k=k, T=float(T), residual=float(res),
                             coefficient_ring="integer")
    return cert


def enumerate_periods(omega, height: int = 5, dedup_rtol: float = 1e-12):
    """All admissible periods |k_last| / |k . omega| up to the height bound.

    Returns a sorted list of (T, certificate) pairs, deduplicated within
    relative tolerance.  Denser with increasing height; admissible periods
    are dense in (0, inf) whenever omega != 0.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.all(omega == 0.0):
        raise ValueError("omega = 0 admits no periods")
    K = _integer_boxes(len(omega), height)
    A = K @ omega
    mask = A != 0.0
    K, A = K[mask], A[mask]
    out = []
    for klast in range(1, height + 1):
        for i in range(len(K)):
            T = klast / abs(A[i])
            sign = 1 if A[i] > 0 else -1
            k = _normalize(np.append(K[i], sign * klast))
            ring = "integer" if abs(k[-1]) == 1 else "rational-scaled"
            out.append((T, PeriodCertificate(k=k, T=float(T), residual=0.0,
                                             coefficient_ring=ring)))
    out.sort(key=lambda tc: tc[0])
    dedup = []
    for T, cert in out:
        if dedup and abs(T - dedup[-1][0]) <= dedup_rtol * max(1.0, abs(T)):
            continue
        dedup.append((T, cert))
    return dedup


def rationally_independent(omega, height: int = 50, tol: float = 1e-9):
    """True when no integer vector below the height nearly annihilates omega.

    Returns (flag, witness): witness is the offending k when dependent.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    K = _integer_boxes(len(omega), height)
    vals = np.abs(K @ omega)
    i = int(np.argmin(vals))
    if vals[i] <= tol:
        hits = K[vals <= tol]
        reduced = set()
        for kv in hits:
            g = np.gcd.reduce(np.abs(kv.astype(int)))
            kv = tuple(int(v) // max(g, 1) for v in kv)
            first = next(v for v in kv if v != 0)
            if first < 0:
                kv = tuple(-v for v in kv)
            reduced.add(kv)
        return False, min(reduced)
    return True, None


@dataclass(frozen=True)
class RationalHyperplaneSet:
    """S = torus projection of {x in R^n : k . x in Z} for an integer k != 0."""

    k: tuple

    def __post_init__(self):
        k = tuple(int(v) for v in self.k)
        object.__setattr__(self, "k", k)
        if not any(k):
            raise ValueError("k must be nonzero")

    @property
    def n(self) -> int:
        return len(self.k)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.k))

    @property
    def sheet_spacing(self) -> float:
        """Distance between adjacent hyperplanes of the lifted family."""
        return 1.0 / self.norm

    @staticmethod
    def from_certificate(cert: PeriodCertificate) -> "RationalHyperplaneSet":
        return RationalHyperplaneSet(cert.k_space)

    def distance_many(self, pts) -> np.ndarray:
        """Euclidean distance from each point to the nearest hyperplane sheet."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        k = np.asarray(self.k, dtype=float)
        s = pts @ k
        return np.abs(s - np.round(s)) / self.norm

    def sample_points(self, count: int, rng=None) -> np.ndarray:
        """Points on S: random lifts projected onto the nearest sheet."""
        rng = np.random.default_rng(rng)
        k = np.asarray(self.k, dtype=float)
        y = rng.random((count, self.n))
        s = y @ k
        y = y - ((s - np.round(s)) / (k @ k))[:, None] * k[None, :]
        return y - np.floor(y)


def distance_to_S(S: RationalHyperplaneSet, x: TorusPoint) -> float:
    """|k . x - round(k . x)| / |k|: exact torus distance to S."""
    c = np.atleast_1d(x.coords)
    if c.shape[0] != S.n:
        raise ValueError(f"point dim {c.shape[0]} != set dim {S.n}")
    return float(S.distance_many(c[None, :])[0])


@dataclass
class InvarianceReport:
    return_defect: float
    min_gap_defect: float
    ok: bool
    details: list


def s_invariance_check(S: RationalHyperplaneSet, T: float, omega,
                       samples: int = 100, t_probes=(0.25, 0.5, 0.75),
                       tol: float = 1e-9, seed: int = 0) -> InvarianceReport:
    """Verify the flow returns S to itself at time T and clears it in between.

    The certificate normalization k_last = 1 makes k . (omega T) = 1, so a
    point of S lands back on S after time T, while at t in (0, T) every point
    sits at exact distance |t/T - round(t/T)| / |k| from S.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    A = float(np.dot(S.k, omega))
    if abs(A * T - 1.0) > max(tol, 1e-9) * max(1.0, abs(A * T)):
        raise ValueError(
            f"S and period inconsistent: k.omega*T = {A * T}, expected 1")
    pts = S.sample_points(samples, rng=seed)
    moved = pts + omega * T
    return_defect = float(np.max(S.distance_many(moved)))
    details = []
    min_gap_defect = np.inf
    for t in t_probes:
        if not 0.0 < t < T:
            t = t * T
        predicted = abs(t / T - round(t / T)) / S.norm
        moved_t = pts + omega * t
        measured = float(np.min(S.distance_many(moved_t)))
        details.append({"t": t, "predicted_gap": predicted, "measured_gap": measured})
        min_gap_defect = min(min_gap_defect, measured - predicted + tol)
    ok = return_defect <= tol and min_gap_defect >= 0.0
    return InvarianceReport(return_defect, float(min_gap_defect), ok, details)


def orbit_density_gap(x0: TorusPoint, T: float, omega, iterations: int = 1000,
                      mesh: int = 2048) -> float:
    """How well the time-T strobe fills the continuous orbit through x0.

    Returns the one-sided Hausdorff gap: the worst distance from a point of
    the continuous orbit (sampled on a mesh over several wind-arounds) to the
    discrete orbit {x0 + m*omega*T}.  Small gaps at large iteration counts
    are evidence the strobe is dense in the orbit closure, the regime where
    no certificate exists for T.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    c = np.atleast_1d(x0.coords)
    discrete = c[None, :] + np.arange(iterations + 1)[:, None] * (omega * T)[None, :]
    discrete -= np.floor(discrete)
    speed = float(np.linalg.norm(omega))
    t_max = max(4.0, 4.0 / max(speed, 1e-12))
    ts = np.linspace(0.0, t_max, mesh, endpoint=False)
    cont = c[None, :] + ts[:, None] * omega[None, :]
    cont -= np.floor(cont)
    gap = 0.0
    chunk = max(1, 10**6 // max(1, iterations))
    for start in range(0, mesh, chunk):
        block = cont[start : start + chunk]
        d = block[:, None, :] - discrete[None, :, :]
        d -= np.round(d)
        dist = np.sqrt(np.sum(d * d, axis=2)).min(axis=1)
        gap = max(gap, float(dist.max()))
    return gap
