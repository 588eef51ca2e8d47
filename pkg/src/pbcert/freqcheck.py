"""Transfer functions of Lur'e-form delay systems and frequency-domain checks.

A Lur'e system x'(t) = A x_t + B F(C x_t) splits into a linear delay part and
a Lipschitz nonlinearity routed through control (B) and measurement (C)
channels.  Its transfer function W(p) = gamma(p) (alpha(p) - pI)^{-1} B is
swept along vertical lines Re p = -nu; the checks certify two inequalities:

* gain condition:   sup_w |W(-nu + iw)| < 1/Lambda   (weighted operator norm)
* circle condition: inf_w Re[(1 + a W)^* (1 + b W)] > 0

Finite sweeps are closed with an analytic tail bound; strictness is enforced
through a configurable safety margin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .charroots import QuasiPolynomial, DelayLinearPart, on_axis_floor, verify_dichotomy_line
from .numutil import refine_extrema, sweep_grid

DEFAULT_SAFETY = 1e-6


class SingularAtP(Exception):
    """The characteristic matrix is singular at the requested point (a pole)."""


class PoleOnLine(Exception):
    """A pole of the transfer function sits on the sweep line."""


class TailBoundUnavailable(Exception):
    """No finite cutoff closes the sweep; the check is inconclusive."""


def _chol_upper(m: np.ndarray) -> np.ndarray:
    """Upper-triangular Cholesky factor with positive diagonal, M = U^T U."""
    return scipy.linalg.cholesky(np.asarray(m, dtype=float), lower=False)


@dataclass(frozen=True)
class LurjeDelaySystem:
    """Lur'e-form delay system with weighted input/output norms.

    a: linear delay part (n states); b: n x m control matrix; c_terms:
    measurement terms (delay, r x n matrix) acting as C phi = sum C_k
    phi(-tau_k); lipschitz: Lipschitz constant of the nonlinearity from the
    |.|_2 to the |.|_1 norm; m1/m2: SPD weights defining those norms.
    """

    a: DelayLinearPart
    b: np.ndarray
    c_terms: tuple[tuple[float, np.ndarray], ...]
    lipschitz: float
    m1: np.ndarray
    m2: np.ndarray

    def __init__(self, a: DelayLinearPart, b, c_terms, lipschitz: float,
                 m1=None, m2=None):
        b = np.array(b, dtype=float)
        if b.ndim != 2 or b.shape[0] != a.n:
            raise ValueError(f"B must be {a.n} x m, got {b.shape}")
        fixed = []
        for tau, mat in c_terms:
            mat = np.array(mat, dtype=float)
            if mat.ndim != 2 or mat.shape[1] != a.n:
                raise ValueError(f"C terms must be r x {a.n}, got {mat.shape}")
            if float(tau) < 0:
                raise ValueError("measurement delays must be >= 0")
            mat.setflags(write=False)
            fixed.append((float(tau), mat))
        if not fixed:
            raise ValueError("at least one measurement term is required")
        r = fixed[0][1].shape[0]
        if any(mat.shape[0] != r for _, mat in fixed):
            raise ValueError("all C terms must share the output dimension")
        if lipschitz <= 0:
            raise ValueError("the Lipschitz constant must be positive")
        m = b.shape[1]
        m1 = np.eye(m) if m1 is None else np.array(m1, dtype=float)
        m2 = np.eye(r) if m2 is None else np.array(m2, dtype=float)
        _chol_upper(m1)  # raises LinAlgError if not SPD
        _chol_upper(m2)
        b.setflags(write=False)
        m1.setflags(write=False)
        m2.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c_terms", tuple(fixed))
        object.__setattr__(self, "lipschitz", float(lipschitz))
        object.__setattr__(self, "m1", m1)
        object.__setattr__(self, "m2", m2)

    @property
    def n(self) -> int:
        return self.a.n

    @property
    def m(self) -> int:
        return self.b.shape[1]

    @property
    def r(self) -> int:
        return self.c_terms[0][1].shape[0]

    def quasi_polynomial(self) -> QuasiPolynomial:
        return QuasiPolynomial(self.a)

    def gamma_many(self, ps: np.ndarray) -> np.ndarray:
        """Batched measurement symbol gamma(p) = sum_k C_k exp(-p tau_k)."""
        ps = np.asarray(ps, dtype=complex)
        out = np.zeros(ps.shape + (self.r, self.n), dtype=complex)
        for tau, mat in self.c_terms:
            if tau == 0.0:
                out += mat
            else:
                out += np.exp(-ps * tau)[..., None, None] * mat
        return out

    def gamma_norm_bound(self, c: float) -> float:
        return float(sum(np.linalg.norm(mat, 2) * np.exp(-c * tau)
                         for tau, mat in self.c_terms))


@dataclass(frozen=True)
class FrequencySweepReport:
    """Outcome of a frequency sweep closed by an analytic tail bound.

    For kind="gain", sup_norm is the swept supremum of the weighted transfer
    norm and margin = threshold - sup_norm.  For kind="circle", sup_norm holds
    the swept infimum of the circle expression, threshold is 0 and
    margin = sup_norm.  In both cases: passed iff margin exceeds the safety
    factor and the tail bound at the cutoff stays on the feasible side.
    """

    nu: float
    sup_norm: float
    threshold: float
    margin: float
    cutoff: float
    samples: int
    passed: bool
    omega_at: float
    safety: float
    tail_value: float
    kind: str

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "nu": self.nu, "value": self.sup_norm,
            "threshold": self.threshold, "margin": self.margin,
            "cutoff": self.cutoff, "samples": self.samples,
            "passed": self.passed, "omega_at": self.omega_at,
            "safety": self.safety, "tail_value": self.tail_value,
        }


def eval_transfer_many(sys: LurjeDelaySystem, ps: np.ndarray,
                       check_singular: bool = True) -> np.ndarray:
    """Transfer matrices gamma(p) (alpha(p) - pI)^{-1} B, batched over ps.

    Solves the linear system instead of forming the inverse.  Raises
    SingularAtP when some p is (numerically) a characteristic root.
    """
    ps = np.asarray(ps, dtype=complex)
    qp = sys.quasi_polynomial()
    mats = qp.char_matrix_many(ps)
    if check_singular:
        dets = np.abs(np.linalg.det(mats))
        scale = (sys.a.norm_bound(float(np.min(ps.real)))
                 + np.abs(ps) + 1.0) ** sys.n
        bad = ~(dets > 1e-12 * scale)
        if bad.any():
            p_bad = ps[bad].ravel()[0]
            raise SingularAtP(f"characteristic matrix is singular at p = {p_bad}")
    rhs = np.broadcast_to(sys.b.astype(complex), mats.shape[:-2] + sys.b.shape)
    x = np.linalg.solve(mats, rhs)
    return sys.gamma_many(ps) @ x


def eval_transfer(sys: LurjeDelaySystem, p: complex) -> np.ndarray:
    """Transfer matrix at a single point; raises SingularAtP at a pole."""
    return eval_transfer_many(sys, np.array([p]))[0]


def weighted_norm(w: np.ndarray, m1: np.ndarray, m2: np.ndarray) -> float:
    """Operator norm of W from (C^m, |.|_1) to (C^r, |.|_2).

    With upper-triangular Cholesky factors M_i = U_i^T U_i this is the largest
    singular value of U_2 W U_1^{-1}.
    """
    return float(weighted_norms(np.asarray(w)[None, ...], m1, m2)[0])


def weighted_norms(ws: np.ndarray, m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    """Batched weighted operator norms of a (K, r, m) stack."""
    u1 = _chol_upper(m1)
    u2 = _chol_upper(m2)
    t = u2 @ ws @ np.linalg.inv(u1)
    return np.linalg.svd(t, compute_uv=False)[..., 0]


def _weight_factor(sys: LurjeDelaySystem) -> float:
    u1 = _chol_upper(sys.m1)
    u2 = _chol_upper(sys.m2)
    return float(np.linalg.norm(u2, 2) * np.linalg.norm(np.linalg.inv(u1), 2))


def transfer_tail_coefficients(sys: LurjeDelaySystem, nu: float) -> tuple[float, float]:
    """(a_nu, k_nu) with ||W(-nu+iw)||_weighted <= k_nu / (|w| - a_nu) for |w| > a_nu.

    a_nu bounds ||alpha|| on the line, so the resolvent norm is at most
    1/(|p| - a_nu) there; k_nu collects the measurement, control and weight
    factors.  Raises TailBoundUnavailable on overflow.
    """
    a_nu = sys.a.norm_bound(-nu)
    k_nu = (sys.gamma_norm_bound(-nu) * np.linalg.norm(sys.b, 2)
            * _weight_factor(sys))
    if not (np.isfinite(a_nu) and np.isfinite(k_nu)):
        raise TailBoundUnavailable(
            "delay growth overflows the dominance bound on this line")
    return float(a_nu), float(k_nu)


OMEGA_CAP = 1e9


def gain_cutoff(sys: LurjeDelaySystem, nu: float) -> tuple[float, float]:
    """Cutoff Omega* with the tail bound at half the gain threshold beyond it."""
    a_nu, k_nu = transfer_tail_coefficients(sys, nu)
    threshold = 1.0 / sys.lipschitz
    omega_star = a_nu + 2.0 * k_nu / threshold
    if not np.isfinite(omega_star) or omega_star > OMEGA_CAP:
        raise TailBoundUnavailable(
            f"tail closure would require a cutoff beyond {OMEGA_CAP:.0e}")
    tail = k_nu / (omega_star - a_nu) if k_nu > 0 else 0.0
    return max(omega_star, a_nu + 1.0), tail


def circle_cutoff(sys: LurjeDelaySystem, nu: float, a: float, b: float,
                  safety: float = DEFAULT_SAFETY) -> tuple[float, float]:
    """Cutoff and |W| tail bound making the circle expression > 1/2 beyond it.

    Beyond the cutoff the expression deviates from its limit 1 by at most
    (|a|+|b|) w + |ab| w^2 with w the transfer tail bound, so it stays
    positive once w is small enough.
    """
    s = abs(a) + abs(b)
    q = abs(a * b)
    if s == 0.0 and q == 0.0:
        return 1.0, 0.0
    budget = 1.0 - 2.0 * safety
    if q > 0:
        w_req = (-s + np.sqrt(s * s + 4.0 * q * budget)) / (2.0 * q)
    else:
        w_req = budget / s
    a_nu, k_nu = transfer_tail_coefficients(sys, nu)
    omega_star = a_nu + 2.0 * k_nu / w_req if k_nu > 0 else a_nu + 1.0
    if not np.isfinite(omega_star) or omega_star > OMEGA_CAP:
        raise TailBoundUnavailable(
            f"tail closure would require a cutoff beyond {OMEGA_CAP:.0e}")
    return float(omega_star), float(w_req / 2.0)


def check_gain_condition(sys: LurjeDelaySystem, nu: float, *,
                         safety: float = DEFAULT_SAFETY,
                         n_initial: int = 512) -> FrequencySweepReport:
    """Certify sup_w ||W(-nu + iw)|| < 1/Lambda by adaptive sweep + tail bound.

    Conjugate symmetry reduces the sweep to w >= 0.  The three largest sampled
    peaks are refined by golden-section search.  Requires the dichotomy check
    to pass on the line (no pole there).
    """
    qp = sys.quasi_polynomial()
    line_margin = verify_dichotomy_line(qp, -nu)
    if line_margin <= on_axis_floor(qp, -nu):
        raise PoleOnLine(f"characteristic root detected on Re p = {-nu}")

    threshold = 1.0 / sys.lipschitz
    omega_star, tail = gain_cutoff(sys, nu)
    omegas = sweep_grid(omega_star, n_initial)

    def f_batch(ws):
        w = eval_transfer_many(sys, -nu + 1j * np.asarray(ws, dtype=float))
        return weighted_norms(w, sys.m1, sys.m2)

    try:
        vals = f_batch(omegas)
        omega_at, sup = refine_extrema(f_batch, omegas, vals, mode="max", k=3)
    except SingularAtP as exc:
        raise PoleOnLine(str(exc)) from exc
    margin = threshold - sup
    tail_ok = tail < threshold
    return FrequencySweepReport(
        nu=nu, sup_norm=float(sup), threshold=threshold, margin=float(margin),
        cutoff=float(omega_star), samples=int(omegas.size),
        passed=bool(margin > safety and tail_ok), omega_at=float(omega_at),
        safety=safety, tail_value=float(tail), kind="gain")


def check_circle_condition(w_line: Callable[[np.ndarray], np.ndarray],
                           a: float, b: float, *,
                           omega_star: float, tail_w_bound: float,
                           nu: float = 0.0,
                           safety: float = DEFAULT_SAFETY,
                           n_initial: int = 512,
                           skip_refine_on_fail: bool = True) -> FrequencySweepReport:
    """Certify inf_w Re[(1 + a W)^* (1 + b W)] > 0 along a vertical line.

    w_line maps an array of frequencies to transfer values W(iw - nu) and must
    have no pole on the line (SingularAtP is converted to PoleOnLine).  Beyond
    omega_star the expression is pinned near its limit 1 by |W| <= tail_w_bound.
    Refinement around the three smallest samples is skipped when the sampled
    infimum already fails, since refining can only lower it further.
    """
    def expr(ws):
        w = np.asarray(w_line(np.asarray(ws, dtype=float)))
        return np.real(np.conj(1.0 + a * w) * (1.0 + b * w))

    omegas = sweep_grid(omega_star, n_initial)
    try:
        vals = expr(omegas)
        i_min = int(np.argmin(vals))
        omega_at, inf_val = float(omegas[i_min]), float(vals[i_min])
        if not (skip_refine_on_fail and inf_val <= safety):
            omega_at, inf_val = refine_extrema(expr, omegas, vals, mode="min", k=3)
    except SingularAtP as exc:
        raise PoleOnLine(str(exc)) from exc
    s = abs(a) + abs(b)
    q = abs(a * b)
    tail_min = 1.0 - s * tail_w_bound - q * tail_w_bound ** 2
    tail_ok = tail_min > safety
    return FrequencySweepReport(
        nu=nu, sup_norm=float(inf_val), threshold=0.0, margin=float(inf_val),
        cutoff=float(omega_star), samples=int(omegas.size),
        passed=bool(inf_val > safety and tail_ok), omega_at=float(omega_at),
        safety=safety, tail_value=float(tail_min), kind="circle")
