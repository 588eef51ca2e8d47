"""Certification pipeline for the three-species Goodwin delay oscillator.

The system is

    x1' = g(x3(t - tau)) - lam*x1,   x2' = x1 - lam*x2,   x3' = x2 - lam*x3,

with g(s) = 1/(1 + |s|^3).  Shifting the nonlinearity by rho*s produces a
Lur'e form whose linear part carries the delayed coupling -rho*x3(t - tau).
A parameter point (tau, lam) is certified when, for some truncation box
parameter beta > 1 and shift rho in the admissible interval, three checks
pass: the product bound rho*tau^3*e^(lam*tau) < 84.2, a circle-type
frequency inequality along Re p = -lam, and the exact-two-roots dichotomy of
the shifted linear part right of that line.  Certified points are then
labelled by the number of unstable roots of the linearization at the unique
positive stationary point: 0 gives a stable point, 2 guarantees an orbitally
stable periodic orbit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .charroots import (DelayLinearPart, NoConvergence, OnAxisRoot,
                        QuasiPolynomial, count_roots_right_of)
from .freqcheck import (LurjeDelaySystem, PoleOnLine, TailBoundUnavailable,
                        check_circle_condition, circle_cutoff,
                        eval_transfer_many)
from .numutil import golden_max

#: global steepness bound sup(-g') = (4/3) * 2^(-2/3), attained at s = 2^(-1/3)
KAPPA0 = (4.0 / 3.0) * 2.0 ** (-2.0 / 3.0)

#: threshold for rho * tau^3 * e^(lam*tau); numerically this equals
#: min_{u in (pi, 2pi)} u^3 / (-sin u) rounded to one decimal, the sharp
#: constant in the scalar gain bound for this transfer function family
GAIN_PRODUCT_LIMIT = 84.2

#: classification labels
STABLE_POINT = "StablePoint"
STABLE_PERIODIC_ORBIT = "StablePeriodicOrbit"
UNCERTIFIED = "Uncertified"

#: minimum distance of g'(eta0) from the stability threshold to classify
HYPERBOLICITY_MARGIN = 1e-8


class DegenerateRange(Exception):
    """The measurement range of the invariant box is empty."""


def g(sigma):
    """Repression nonlinearity 1 / (1 + |s|^3)."""
    s = np.asarray(sigma, dtype=float)
    out = 1.0 / (1.0 + np.abs(s) ** 3)
    return float(out) if out.ndim == 0 else out


def g_prime(sigma):
    """dg/ds for s > 0: -3 s^2 / (1 + s^3)^2."""
    s = np.asarray(sigma, dtype=float)
    out = -3.0 * s ** 2 / (1.0 + s ** 3) ** 2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GoodwinParams:
    """Point and truncation parameters: tau, lam > 0, beta > 1, optional rho."""

    tau: float
    lam: float
    beta: float = 1.5
    rho: float | None = None

    def __post_init__(self):
        if self.tau <= 0 or self.lam <= 0:
            raise ValueError("tau and lam must be positive")
        if self.beta <= 1:
            raise ValueError("beta must exceed 1")
        if self.rho is not None and not (0.0 < self.rho <= KAPPA0 + 1e-12):
            raise ValueError(f"rho must lie in (0, {KAPPA0:.6f}]")


@dataclass(frozen=True)
class GoodwinConstants:
    """Model constants at a parameter point (and one truncation box)."""

    tau: float
    lam: float
    beta: float
    kappa0: float
    eta0: float
    sigma_beta: float
    delta_beta: float
    theta1: float
    terminal_threshold: float  # -(lam * sec(theta1))^3

    def to_dict(self) -> dict:
        return {
            "tau": self.tau, "lam": self.lam, "beta": self.beta,
            "kappa0": self.kappa0, "eta0": self.eta0,
            "sigma_beta": self.sigma_beta, "delta_beta": self.delta_beta,
            "theta1": self.theta1,
            "terminal_threshold": self.terminal_threshold,
        }


def compute_kappa0(verify: bool = True) -> float:
    """Global bound sup_{s>0} (-g'(s)) = (4/3) 2^(-2/3), maximizer s = 2^(-1/3).

    The closed form follows from d/ds [3 s^2 (1+s^3)^(-2)] = 0, which forces
    1 + s^3 = 3 s^3.  When verify is set, a golden-section search over the
    unimodal -g' cross-checks the closed form.
    """
    value = (4.0 / 3.0) * 2.0 ** (-2.0 / 3.0)
    if verify:
        _, peak = golden_max(lambda s: -g_prime(s), 1e-8, 10.0, tol=1e-14)
        if abs(peak - value) > 1e-10:
            raise ArithmeticError(
                f"golden-section check of kappa0 failed: {peak} vs {value}")
    return value


def solve_eta0(lam: float) -> float:
    """Unique positive solution of g(eta) = lam^3 * eta.

    g <= 1 forces eta0 <= lam^(-3), and the residual is strictly decreasing,
    so bisection on [0, lam^(-3)] is safe.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    hi = lam ** -3
    f = lambda e: g(e) - lam ** 3 * e
    eta = brentq(f, 0.0, hi, xtol=1e-15 * max(1.0, hi), rtol=8.9e-16)
    return float(eta)


def solve_theta1(tau: float, lam: float) -> float:
    """Unique angle in (0, pi/3) with tau*lam*tan(theta) = pi - 3*theta.

    The residual tau*lam*tan(theta) - pi + 3*theta increases strictly from
    -pi to tau*lam*sqrt(3) on (0, pi/3), so the root is unique there.
    """
    if tau * lam <= 0:
        raise ValueError("tau*lam must be positive")
    h = lambda th: tau * lam * math.tan(th) - math.pi + 3.0 * th
    theta = brentq(h, 1e-18, math.pi / 3.0 - 1e-15, xtol=1e-16, rtol=8.9e-16)
    return float(theta)


def measurement_range(beta: float, lam: float) -> tuple[float, float]:
    """Range of the delayed x3 measurement over the closed invariant box.

    The box bounds component j between (beta*lam)^(-j) g(sigma_beta) and
    (beta/lam)^j g(0); the measurement reads component 3.
    """
    if beta < 1:
        raise ValueError("beta must be >= 1")
    sigma_beta = (beta / lam) ** 3 * g(0.0)
    lo = (beta * lam) ** -3 * g(sigma_beta)
    hi = (beta / lam) ** 3 * g(0.0)
    if lo >= hi:
        raise DegenerateRange(f"measurement range [{lo}, {hi}] is empty")
    return float(lo), float(hi)


def sup_gprime_on(lo: float, hi: float, n_grid: int = 1024) -> float:
    """Supremum of g' over [lo, hi] via endpoints, a grid, and refinement.

    g' is continuous, negative and unimodal on (0, inf), so the sup sits at
    an endpoint; the grid plus golden-section refinement guards the claim.
    """
    if hi < lo:
        raise DegenerateRange(f"range [{lo}, {hi}] is empty")
    if hi == lo:
        return float(g_prime(lo))
    grid = np.linspace(lo, hi, n_grid)
    vals = g_prime(grid)
    i = int(np.argmax(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, n_grid - 1)]
    _, refined = golden_max(lambda s: g_prime(s), a, b, tol=1e-13)
    return float(max(vals[i], refined, g_prime(lo), g_prime(hi)))


def compute_delta_beta(params: GoodwinParams) -> float:
    """Supremum of g' over the measurement range of the invariant box.

    Strictly negative for every valid box; it tightens the usable sector of
    the shifted nonlinearity from [-kappa0, 0) to [-kappa0, delta_beta].
    """
    lo, hi = measurement_range(params.beta, params.lam)
    value = sup_gprime_on(lo, hi)
    if value >= 0.0:
        raise ArithmeticError("delta_beta must be strictly negative")
    return value


def compute_constants(tau: float, lam: float, beta: float) -> GoodwinConstants:
    theta1 = solve_theta1(tau, lam)
    return GoodwinConstants(
        tau=tau, lam=lam, beta=beta,
        kappa0=KAPPA0,
        eta0=solve_eta0(lam),
        sigma_beta=(beta / lam) ** 3 * g(0.0),
        delta_beta=compute_delta_beta(GoodwinParams(tau, lam, beta)),
        theta1=theta1,
        terminal_threshold=-(lam / math.cos(theta1)) ** 3,
    )


def stationary_point(lam: float) -> np.ndarray:
    """Unique non-negative stationary state (lam^2 eta0, lam eta0, eta0)."""
    eta0 = solve_eta0(lam)
    return np.array([lam ** 2 * eta0, lam * eta0, eta0])


def wbeta_bounds(beta: float, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Componentwise open bounds of the invariant box for beta >= 1."""
    sigma_beta = (beta / lam) ** 3 * g(0.0)
    j = np.arange(1, 4)
    lo = (beta * lam) ** (-j.astype(float)) * g(sigma_beta)
    hi = (beta / lam) ** j.astype(float) * g(0.0)
    return lo, hi


def shifted_driving_matrix(lam: float) -> np.ndarray:
    """Instantaneous part: diagonal decay plus the chain coupling."""
    return np.array([[-lam, 0.0, 0.0],
                     [1.0, -lam, 0.0],
                     [0.0, 1.0, -lam]])


def lurje_system(tau: float, lam: float, rho: float,
                 delta_beta: float) -> LurjeDelaySystem:
    """Lur'e form with shifted nonlinearity F(s) = g_beta(s) + rho*s.

    The delayed feedback -rho*x3(t-tau) moves into the linear part; the input
    enters the first component and the measurement reads x3(t-tau).  F' lies
    in [rho - kappa0, rho + delta_beta], so max(kappa0 - rho, rho + delta_beta)
    is the sharp Lipschitz constant of F over the box.
    """
    a0 = shifted_driving_matrix(lam)
    a1 = np.zeros((3, 3))
    a1[0, 2] = -rho
    lipschitz = max(KAPPA0 - rho, rho + delta_beta)
    if lipschitz <= 0:  # rho == kappa0 with delta_beta <= -rho cannot occur
        raise ValueError("empty sector: no positive Lipschitz constant")
    return LurjeDelaySystem(
        a=DelayLinearPart([(0.0, a0), (tau, a1)]),
        b=[[1.0], [0.0], [0.0]],
        c_terms=[(tau, [[0.0, 0.0, 1.0]])],
        lipschitz=lipschitz,
    )


def transfer_closed_form(tau: float, lam: float, rho: float, p) -> np.ndarray:
    """Closed-form scalar transfer -1 / ((lam + p)^3 e^(p tau) + rho)."""
    p = np.asarray(p, dtype=complex)
    return -1.0 / ((lam + p) ** 3 * np.exp(p * tau) + rho)


def linearization_part(tau: float, lam: float, gprime_eta0: float) -> DelayLinearPart:
    """Linearization at the stationary point: chain part plus g'(eta0) feedback."""
    a1 = np.zeros((3, 3))
    a1[0, 2] = gprime_eta0
    return DelayLinearPart([(0.0, shifted_driving_matrix(lam)), (tau, a1)])


def smith_rho() -> float:
    """Half the steepness bound plus a small offset, the classical shift choice."""
    return 0.5 * KAPPA0 + 1e-3


def default_beta_set() -> tuple[float, ...]:
    return (1.05, 1.5, 3.0)


def margin_tuned_rho(delta_beta: float, safety: float) -> float:
    """Shift whose circle margin at frequency zero is 100x the safety factor.

    At frequency zero the transfer value is -1/rho and the circle expression
    evaluates to (kappa0/rho) * (-delta_beta/rho); when the sector edge
    delta_beta sits very close to 0 that margin caps at kappa0*|delta_beta|/
    rho^2, so only shifts below sqrt(kappa0*|delta_beta|/(100*safety)) can
    clear the safety factor there.
    """
    return min(float(np.sqrt(KAPPA0 * (-delta_beta) / (100.0 * safety))),
               KAPPA0)


def default_rho_set(delta_beta: float,
                    safety: float = 1e-6) -> tuple[float, ...]:
    """Classical shift, a margin-tuned one, then 8 log-spaced candidates.

    The log-spaced family spans the admissible interval (-delta_beta, kappa0];
    the margin-tuned candidate guarantees a certifiable shift exists whenever
    the interval admits one at the given safety factor.
    """
    lo = -delta_beta * (1.0 + 1e-3) + 1e-300
    rhos = [smith_rho(), margin_tuned_rho(delta_beta, safety)]
    if lo < KAPPA0:
        rhos.extend(np.geomspace(lo, KAPPA0, 8).tolist())
    out: list[float] = []
    for r in rhos:
        if -delta_beta < r <= KAPPA0 + 1e-12 and not any(
                abs(r - s) <= 1e-12 * abs(r) for s in out):
            out.append(float(r))
    return tuple(out)


@dataclass(frozen=True)
class PointClassification:
    """Certification outcome at one (tau, lam) point."""

    label: str
    tau: float
    lam: float
    witness_rho: float | None = None
    witness_beta: float | None = None
    root_count_at_phi0: int | None = None
    margin: float = 0.0
    reason: str | None = None
    reports: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "label": self.label, "tau": self.tau, "lam": self.lam,
            "witness_rho": self.witness_rho, "witness_beta": self.witness_beta,
            "root_count_at_phi0": self.root_count_at_phi0,
            "margin": self.margin, "reason": self.reason,
            "reports": self.reports,
        }


#: reasons that mean "could not decide" rather than "conditions failed"
INCONCLUSIVE_REASONS = frozenset({"NonHyperbolic", "NoConvergence",
                                  "TailBoundUnavailable", "UnexpectedRootCount"})


def gain_product(tau: float, lam: float, rho: float) -> float:
    """The product rho * tau^3 * e^(lam*tau) bounded by GAIN_PRODUCT_LIMIT."""
    return rho * tau ** 3 * math.exp(lam * tau)


def _try_candidate(tau: float, lam: float, rho: float, delta_beta: float,
                   safety: float, n_sweep: int):
    """Run the three candidate checks; returns (ok, detail dict)."""
    detail = {"rho": rho, "gain_product": gain_product(tau, lam, rho)}
    if detail["gain_product"] >= GAIN_PRODUCT_LIMIT:
        detail["failed"] = "gain-product"
        return False, detail

    sys = lurje_system(tau, lam, rho, delta_beta)
    a = rho - KAPPA0
    b = rho + delta_beta
    try:
        omega_star, w_tail = circle_cutoff(sys, lam, a, b, safety)

        def w_line(ws):
            ps = -lam + 1j * np.asarray(ws, dtype=float)
            return eval_transfer_many(sys, ps)[..., 0, 0]

        circle = check_circle_condition(
            w_line, a, b, nu=lam, omega_star=omega_star,
            tail_w_bound=w_tail, safety=safety, n_initial=n_sweep)
        detail["circle"] = circle.to_dict()
        if not circle.passed:
            detail["failed"] = "circle"
            return False, detail

        rc = count_roots_right_of(QuasiPolynomial(sys.a), -lam,
                                  n_initial=max(n_sweep // 2, 64))
        detail["dichotomy"] = {"count": rc.count, "margin": rc.margin,
                               "method": rc.method}
        if rc.count != 2:
            detail["failed"] = "dichotomy-count"
            return False, detail
    except (OnAxisRoot, PoleOnLine) as exc:
        detail["failed"] = f"on-line-root: {exc}"
        return False, detail
    except NoConvergence as exc:
        detail["failed"] = f"no-convergence: {exc}"
        return False, detail
    except TailBoundUnavailable as exc:
        detail["failed"] = f"tail-unavailable: {exc}"
        return False, detail
    detail["failed"] = None
    return True, detail


def classify_point(tau: float, lam: float,
                   rho_set: Sequence[float] | None = None,
                   beta_set: Sequence[float] | None = None, *,
                   safety: float = 1e-6, n_sweep: int = 192,
                   include_reports: bool = True) -> PointClassification:
    """Classify one parameter point.

    Scans (beta, rho) candidates until one passes the product bound, the
    circle inequality and the two-root dichotomy.  A certified point is then
    labelled by the unstable root count of the linearization at the
    stationary point: 0 -> StablePoint, 2 -> StablePeriodicOrbit.  Failures
    to decide (near-degenerate hyperbolicity, non-converging counts) yield
    Uncertified with the reason recorded.
    """
    if tau <= 0 or lam <= 0:
        raise ValueError("tau and lam must be positive")
    betas = tuple(beta_set) if beta_set else default_beta_set()
    if not betas:
        raise ValueError("beta candidate set must be non-empty")

    eta0 = solve_eta0(lam)
    theta1 = solve_theta1(tau, lam)
    terminal = -(lam / math.cos(theta1)) ** 3
    gp0 = g_prime(eta0)
    reports: dict = {"constants": {"kappa0": KAPPA0, "eta0": eta0,
                                   "theta1": theta1,
                                   "terminal_threshold": terminal,
                                   "gprime_eta0": gp0},
                     "safety": safety,
                     "candidates": []}

    witness = None
    witness_margin = 0.0
    inconclusive_seen = False
    for beta in betas:
        try:
            delta_beta = compute_delta_beta(GoodwinParams(tau, lam, beta))
        except DegenerateRange as exc:
            reports["candidates"].append({"beta": beta,
                                          "failed": f"degenerate-range: {exc}"})
            continue
        rhos = tuple(rho_set) if rho_set else default_rho_set(delta_beta, safety)
        for rho in rhos:
            if not (-delta_beta < rho <= KAPPA0 + 1e-12):
                continue
            ok, detail = _try_candidate(tau, lam, rho, delta_beta,
                                        safety, n_sweep)
            detail["beta"] = beta
            detail["delta_beta"] = delta_beta
            if include_reports:
                reports["candidates"].append(detail)
            failed = detail.get("failed") or ""
            if failed.startswith(("no-convergence", "tail-unavailable")):
                inconclusive_seen = True
            if ok:
                witness = (rho, beta)
                witness_margin = detail["circle"]["margin"]
                break
        if witness:
            break

    if witness is None:
        reason = "NoCandidatePassed"
        if inconclusive_seen:
            reason = "NoConvergence"
        return PointClassification(UNCERTIFIED, tau, lam, reason=reason,
                                   reports=reports if include_reports else {})

    rho_w, beta_w = witness
    if abs(gp0 - terminal) <= HYPERBOLICITY_MARGIN:
        return PointClassification(
            UNCERTIFIED, tau, lam, witness_rho=rho_w, witness_beta=beta_w,
            margin=witness_margin, reason="NonHyperbolic",
            reports=reports if include_reports else {})

    try:
        rc = count_roots_right_of(
            QuasiPolynomial(linearization_part(tau, lam, gp0)), 0.0)
    except OnAxisRoot:
        return PointClassification(
            UNCERTIFIED, tau, lam, witness_rho=rho_w, witness_beta=beta_w,
            margin=witness_margin, reason="NonHyperbolic",
            reports=reports if include_reports else {})
    except NoConvergence:
        return PointClassification(
            UNCERTIFIED, tau, lam, witness_rho=rho_w, witness_beta=beta_w,
            margin=witness_margin, reason="NoConvergence",
            reports=reports if include_reports else {})
    if include_reports:
        reports["root_count_at_phi0"] = {"count": rc.count,
                                         "margin": rc.margin,
                                         "method": rc.method}
    if rc.count == 2:
        label = STABLE_PERIODIC_ORBIT
    elif rc.count == 0:
        label = STABLE_POINT
    else:
        return PointClassification(
            UNCERTIFIED, tau, lam, witness_rho=rho_w, witness_beta=beta_w,
            root_count_at_phi0=rc.count, margin=witness_margin,
            reason="UnexpectedRootCount",
            reports=reports if include_reports else {})
    return PointClassification(
        label, tau, lam, witness_rho=rho_w, witness_beta=beta_w,
        root_count_at_phi0=rc.count, margin=witness_margin,
        reports=reports if include_reports else {})


# --------------------------------------------------------------------------
# parameter-plane sweep

@dataclass
class RegionGrid:
    """Classification lattice over a (tau, lam) rectangle."""

    taus: np.ndarray
    lams: np.ndarray
    labels: np.ndarray        # (n_lam, n_tau) unicode labels
    witness_rho: np.ndarray   # (n_lam, n_tau) float, nan when absent
    witness_beta: np.ndarray
    margins: np.ndarray
    config: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        """Delimited dump: tau,lambda,label,witness_rho,witness_beta,margin."""
        lines = ["tau,lambda,label,witness_rho,witness_beta,margin"]
        for j, lam in enumerate(self.lams):
            for i, tau in enumerate(self.taus):
                wr = self.witness_rho[j, i]
                wb = self.witness_beta[j, i]
                mg = self.margins[j, i]
                lines.append(",".join([
                    repr(float(tau)), repr(float(lam)),
                    str(self.labels[j, i]),
                    "" if np.isnan(wr) else repr(float(wr)),
                    "" if np.isnan(wb) else repr(float(wb)),
                    "" if np.isnan(mg) else repr(float(mg)),
                ]))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())

    def label_counts(self) -> dict:
        uniq, counts = np.unique(self.labels, return_counts=True)
        return {str(u): int(c) for u, c in zip(uniq, counts)}


def _sweep_cell(payload):
    (j, i, tau, lam, rho_set, beta_set, safety, n_sweep) = payload
    cls = classify_point(tau, lam, rho_set, beta_set, safety=safety,
                         n_sweep=n_sweep, include_reports=False)
    return (j, i, cls.label,
            np.nan if cls.witness_rho is None else cls.witness_rho,
            np.nan if cls.witness_beta is None else cls.witness_beta,
            cls.margin if cls.witness_rho is not None else np.nan)


def sweep_region(tau_range: tuple[float, float], lam_range: tuple[float, float],
                 resolution: int | tuple[int, int],
                 rho_set: Sequence[float] | None = None,
                 beta_set: Sequence[float] | None = None, *,
                 workers: int = 1, safety: float = 1e-6,
                 n_sweep: int = 192) -> RegionGrid:
    """Classify every cell of a (tau, lam) lattice.

    Cells are independent, so the sweep distributes over a process pool and
    merges by index; results are identical for any worker count.  Per-cell
    failures are absorbed into the Uncertified label.
    """
    if isinstance(resolution, int):
        n_tau = n_lam = resolution
    else:
        n_tau, n_lam = resolution
    if n_tau < 1 or n_lam < 1 or workers < 1:
        raise ValueError("resolution and worker count must be >= 1")
    taus = np.linspace(tau_range[0], tau_range[1], n_tau)
    lams = np.linspace(lam_range[0], lam_range[1], n_lam)

    rho_tuple = tuple(rho_set) if rho_set else None
    beta_tuple = tuple(beta_set) if beta_set else None
    jobs = [(j, i, float(taus[i]), float(lams[j]), rho_tuple, beta_tuple,
             safety, n_sweep)
            for j in range(n_lam) for i in range(n_tau)]

    labels = np.full((n_lam, n_tau), UNCERTIFIED, dtype=object)
    wr = np.full((n_lam, n_tau), np.nan)
    wb = np.full((n_lam, n_tau), np.nan)
    mg = np.full((n_lam, n_tau), np.nan)

    if workers == 1:
        results = map(_sweep_cell, jobs)
    else:
        chunk = max(1, len(jobs) // (workers * 8))
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_sweep_cell, jobs, chunksize=chunk)
    for j, i, label, rho_v, beta_v, margin_v in results:
        labels[j, i] = label
        wr[j, i] = rho_v
        wb[j, i] = beta_v
        mg[j, i] = margin_v
    if workers > 1:
        pool.shutdown()

    return RegionGrid(
        taus=taus, lams=lams, labels=labels.astype(str),
        witness_rho=wr, witness_beta=wb, margins=mg,
        config={
            "tau_range": [float(tau_range[0]), float(tau_range[1]), n_tau],
            "lam_range": [float(lam_range[0]), float(lam_range[1]), n_lam],
            "rho_set": list(rho_tuple) if rho_tuple else "default",
            "beta_set": list(beta_tuple) if beta_tuple else list(default_beta_set()),
            "safety": safety,
        })


# --------------------------------------------------------------------------
# closed-form reference curves for the region boundaries

def smith_curve_tau(lam: float, tau_hi: float = 50.0) -> float:
    """tau solving kappa0 * tau^3 * e^(lam*tau) = GAIN_PRODUCT_LIMIT."""
    f = lambda t: KAPPA0 * t ** 3 * math.exp(lam * t) - GAIN_PRODUCT_LIMIT
    return float(brentq(f, 1e-6, tau_hi, xtol=1e-12))


def hopf_curve_tau(lam: float, tau_hi: float = 1e3) -> float | None:
    """tau where g'(eta0(lam)) = -(lam sec theta1(tau, lam))^3, if it exists.

    The right side increases strictly with tau from -(2 lam)^3 toward -lam^3,
    so a crossing exists iff |g'(eta0)| lies strictly between lam^3 and
    (2 lam)^3.  Returns None when the row has no transition.
    """
    gp0 = g_prime(solve_eta0(lam))
    f = lambda t: gp0 + (lam / math.cos(solve_theta1(t, lam))) ** 3
    if not (lam ** 3 < -gp0 < (2.0 * lam) ** 3):
        return None
    return float(brentq(f, 1e-9, tau_hi, xtol=1e-12))
