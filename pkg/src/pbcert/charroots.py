"""Characteristic matrices of linear delay systems and half-plane root counts.

A linear delay system with discrete delays x'(t) = sum_k A_k x(t - tau_k) has
the characteristic matrix D(p) = sum_k A_k exp(-p tau_k) - p I.  Roots of
det D(p) = 0 located right of a vertical line Re p = c are counted with the
argument principle along a rectangle that provably contains them all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numutil import refine_extrema, sweep_grid

#: relative scale applied to the on-line determinant floor
ON_AXIS_FLOOR_REL = 1e-10


class OnAxisRoot(Exception):
    """A characteristic root (numerically) sits on the dichotomy line."""


class NoConvergence(Exception):
    """The winding number failed to stabilize under contour refinement."""


def _as_matrix(m, n: int | None = None) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if n is not None and a.shape[0] != n:
        raise ValueError(f"matrix dimension {a.shape[0]} != state dimension {n}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DelayLinearPart:
    """Discrete-delay linear operator: terms (tau_k, A_k), all tau_k distinct >= 0."""

    terms: tuple[tuple[float, np.ndarray], ...]
    n: int

    def __init__(self, terms: Sequence[tuple[float, Sequence]], n: int | None = None):
        if not terms:
            raise ValueError("at least one term is required")
        first = np.array(terms[0][1], dtype=float)
        dim = first.shape[0] if n is None else n
        fixed = []
        delays = []
        for tau, mat in terms:
            tau = float(tau)
            if tau < 0:
                raise ValueError("delays must be >= 0")
            delays.append(tau)
            fixed.append((tau, _as_matrix(mat, dim)))
        if len(set(delays)) != len(delays):
            raise ValueError("delays must be distinct")
        object.__setattr__(self, "terms", tuple(fixed))
        object.__setattr__(self, "n", dim)

    @property
    def tau_max(self) -> float:
        return max(tau for tau, _ in self.terms)

    def alpha(self, p: complex) -> np.ndarray:
        """sum_k A_k exp(-p tau_k) at a single point."""
        return self.alpha_many(np.array([p]))[0]

    def alpha_many(self, ps: np.ndarray) -> np.ndarray:
        """Batched alpha over an array of complex points, shape (K, n, n)."""
        ps = np.asarray(ps, dtype=complex)
        out = np.zeros(ps.shape + (self.n, self.n), dtype=complex)
        for tau, mat in self.terms:
            if tau == 0.0:
                out += mat
            else:
                out += np.exp(-ps * tau)[..., None, None] * mat
        return out

    def norm_bound(self, c: float) -> float:
        """Upper bound sum_k ||A_k|| e^(-c tau_k) for ||alpha(p)|| on Re p >= c.

        May overflow to inf for strongly negative c and long delays; callers
        treat a non-finite bound as "no usable contour".
        """
        with np.errstate(over="ignore"):
            return float(sum(np.linalg.norm(mat, 2) * np.exp(-c * tau)
                             for tau, mat in self.terms))


@dataclass(frozen=True)
class QuasiPolynomial:
    """Characteristic matrix D(p) = alpha(p) - p I of a delay linear part."""

    linear: DelayLinearPart

    @property
    def n(self) -> int:
        return self.linear.n

    def char_matrix_many(self, ps: np.ndarray) -> np.ndarray:
        ps = np.asarray(ps, dtype=complex)
        eye = np.eye(self.n)
        return self.linear.alpha_many(ps) - ps[..., None, None] * eye

    def det_many(self, ps: np.ndarray) -> np.ndarray:
        """det D(p) over an array of points."""
        mats = self.char_matrix_many(ps)
        return _dets(mats)

    def det(self, p: complex) -> complex:
        return complex(self.det_many(np.array([p]))[0])


def _dets(mats: np.ndarray) -> np.ndarray:
    """Determinants of a (K, n, n) stack; closed form for n <= 3."""
    n = mats.shape[-1]
    if n == 1:
        return mats[..., 0, 0]
    if n == 2:
        return mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    if n == 3:
        a, b, c = mats[..., 0, 0], mats[..., 0, 1], mats[..., 0, 2]
        d, e, f = mats[..., 1, 0], mats[..., 1, 1], mats[..., 1, 2]
        g, h, i = mats[..., 2, 0], mats[..., 2, 1], mats[..., 2, 2]
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    return np.linalg.det(mats)


def eval_char_matrix(qp: QuasiPolynomial, p: complex) -> np.ndarray:
    """Characteristic matrix alpha(p) - p I at a point (total function)."""
    return qp.char_matrix_many(np.array([p]))[0]


@dataclass(frozen=True)
class ContourSpec:
    """Counting rectangle [c, r_right] x [-omega_imag, omega_imag]."""

    c: float
    r_right: float
    omega_imag: float
    samples_per_side: int


@dataclass(frozen=True)
class RootCount:
    """Number of characteristic roots with Re p > half_plane_abscissa."""

    half_plane_abscissa: float
    count: int
    margin: float
    contour: ContourSpec
    method: str = "argument-principle"


def on_axis_floor(qp: QuasiPolynomial, c: float) -> float:
    """Scale-aware degeneracy floor for |det D| on the line Re p = c."""
    return ON_AXIS_FLOOR_REL * (1.0 + abs(qp.det(complex(c, 0.0))))


def verify_dichotomy_line(qp: QuasiPolynomial, c: float,
                          omega_max: float | None = None,
                          n_initial: int = 256) -> float:
    """Smallest sampled |det D(c + i w)| over |w| <= omega_max.

    A positive return means no root was detected on the line at the sweep
    resolution; 0 indicates failure.  By conjugate symmetry only w >= 0 is
    swept.  The default omega_max comes from the a priori root modulus bound,
    beyond which |det| is dominated by the |p|^n term.
    """
    if omega_max is None:
        omega_max = qp.linear.norm_bound(c) + 1.0
    omegas = sweep_grid(omega_max, n_initial)
    vals = np.abs(qp.det_many(c + 1j * omegas))

    def f_batch(ws):
        return np.abs(qp.det_many(c + 1j * np.asarray(ws)))

    _, vmin = refine_extrema(f_batch, omegas, vals, mode="min", k=3)
    return float(vmin)


def _rect_points(corners: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Map contour parameters t in [0, 4) to points on the closed rectangle."""
    side = np.minimum(np.floor(ts).astype(int), 3)
    frac = ts - side
    start = corners[side]
    end = corners[(side + 1) % 4]
    return start + frac * (end - start)


def _winding_number(qp: QuasiPolynomial, corners: np.ndarray,
                    n_per_side: int, max_points: int = 400_000) -> int:
    """Winding number of det D along the closed rectangle (counterclockwise).

    Phase increments are accumulated stepwise; any step with an increment of
    pi/2 or more (or a vanishing determinant) is split at its midpoint until
    all steps are tame.
    """
    ts = np.concatenate([np.linspace(s, s + 1.0, n_per_side, endpoint=False)
                         for s in range(4)])
    vals = qp.det_many(_rect_points(corners, ts))
    for _ in range(64):
        nxt = np.roll(vals, -1)
        with np.errstate(divide="ignore", invalid="ignore"):
            dphi = np.angle(nxt / vals)
        bad = (~np.isfinite(dphi)) | (np.abs(dphi) >= 0.5 * np.pi) \
            | (vals == 0) | (nxt == 0)
        if not bad.any():
            total = float(dphi.sum())
            w = total / (2.0 * np.pi)
            if abs(w - round(w)) > 0.05:
                raise NoConvergence(
                    f"winding {w:.6f} is not close to an integer")
            return int(round(w))
        if ts.size + int(bad.sum()) > max_points:
            raise NoConvergence("contour refinement exceeded the point budget")
        t_hi = np.roll(ts, -1).copy()
        t_hi[-1] = 4.0  # closing step wraps to the first parameter
        mid = 0.5 * (ts[bad] + t_hi[bad])
        mid_vals = qp.det_many(_rect_points(corners, np.mod(mid, 4.0)))
        ts = np.concatenate([ts, np.mod(mid, 4.0)])
        vals = np.concatenate([vals, mid_vals])
        order = np.argsort(ts, kind="stable")
        ts, vals = ts[order], vals[order]
    raise NoConvergence("contour refinement did not settle")


def count_roots_right_of(qp: QuasiPolynomial, c: float,
                         n_initial: int = 96,
                         max_doublings: int = 6,
                         r_right: float | None = None,
                         omega: float | None = None) -> RootCount:
    """Count roots of det D (with multiplicity) in the half-plane Re p > c.

    Any root there satisfies |p| <= sum_k ||A_k|| e^(-c tau_k), so the winding
    number of det D around [c, R] x [-Omega, Omega] with R = Omega = bound + 1
    equals the count (r_right/omega may enlarge the rectangle, never shrink
    it below the bound).  The contour sampling is doubled until the integer
    is stable; a root detected on the line Re p = c raises OnAxisRoot.
    """
    bound = qp.linear.norm_bound(c)
    if not np.isfinite(bound):
        raise NoConvergence("a priori root modulus bound overflows")
    right = bound + 1.0 if r_right is None else max(r_right, bound + 1.0)
    omega = bound + 1.0 if omega is None else max(omega, bound + 1.0)
    floor = on_axis_floor(qp, c)
    margin = verify_dichotomy_line(qp, c, omega_max=omega)
    if margin <= floor:
        raise OnAxisRoot(
            f"min |det D| = {margin:.3e} on Re p = {c} is below the floor "
            f"{floor:.3e}")

    corners = np.array([complex(c, -omega), complex(right, -omega),
                        complex(right, omega), complex(c, omega)])
    n = n_initial
    prev = _winding_number(qp, corners, n)
    for _ in range(max_doublings):
        n *= 2
        cur = _winding_number(qp, corners, n)
        if cur == prev:
            if cur < 0:
                raise NoConvergence(f"negative winding number {cur}")
            return RootCount(half_plane_abscissa=c, count=cur, margin=margin,
                             contour=ContourSpec(c, right, omega, n))
        prev = cur
    raise NoConvergence("winding number kept changing under sample doubling")
