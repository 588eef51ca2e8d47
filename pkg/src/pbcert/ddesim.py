"""Method-of-steps integration of single-delay systems and limit detection.

The integrator advances x'(t) = f(x(t), x(t - tau)) with classical RK4 on a
mesh aligned to the delay (h = tau/k), so delayed stage values always fall in
already-computed history and the propagated derivative discontinuities stay
on mesh nodes.  Cubic Hermite dense output serves the delayed argument and
the limit detection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .goodwin import g, stationary_point, solve_eta0, wbeta_bounds


class NonfiniteState(Exception):
    """State blew up; carries the first bad time."""

    def __init__(self, time: float):
        super().__init__(f"non-finite state at t = {time}")
        self.time = time


class History:
    """Continuous initial segment on [-tau, 0]: uniform samples + interpolation."""

    def __init__(self, values, tau: float, rule: str = "cubic"):
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.shape[0] < 2:
            raise ValueError("history needs at least 2 samples")
        if tau <= 0:
            raise ValueError("tau must be positive")
        if rule not in ("linear", "cubic"):
            raise ValueError("rule must be 'linear' or 'cubic'")
        self.values = values
        self.tau = float(tau)
        self.rule = rule
        self.times = np.linspace(-tau, 0.0, values.shape[0])
        if rule == "cubic" and values.shape[0] >= 4:
            from scipy.interpolate import CubicSpline
            self._spline = CubicSpline(self.times, values, axis=0)
        else:
            self._spline = None

    @classmethod
    def constant(cls, state, tau: float) -> "History":
        state = np.atleast_1d(np.asarray(state, dtype=float))
        return cls(np.tile(state, (2, 1)), tau, rule="linear")

    @classmethod
    def from_callable(cls, fn: Callable[[float], np.ndarray], tau: float,
                      samples: int = 33, rule: str = "cubic") -> "History":
        ts = np.linspace(-tau, 0.0, samples)
        return cls(np.array([np.atleast_1d(fn(t)) for t in ts]), tau, rule)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __call__(self, t: float) -> np.ndarray:
        t = min(max(t, -self.tau), 0.0)
        if self._spline is not None:
            return self._spline(t)
        out = np.empty(self.dim)
        for c in range(self.dim):
            out[c] = np.interp(t, self.times, self.values[:, c])
        return out


@dataclass(frozen=True)
class DdeProblem:
    """x'(t) = f(x(t), x(t - tau)) with a single discrete delay tau > 0."""

    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    tau: float
    history: History

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if abs(self.history.tau - self.tau) > 1e-12 * max(1.0, self.tau):
            raise ValueError("history segment length must equal the delay")


@dataclass
class DdeTrajectory:
    """Mesh solution with per-step cubic Hermite dense output."""

    t: np.ndarray        # (N+1,)
    x: np.ndarray        # (N+1, n)
    xdot: np.ndarray     # (N+1, n) derivatives at nodes
    h: float
    tau: float
    horizon: float
    problem: DdeProblem = field(repr=False)

    @property
    def n_steps(self) -> int:
        return len(self.t) - 1

    def eval(self, times) -> np.ndarray:
        """Dense output at arbitrary times in [0, horizon] (vectorized).

        Each step carries the cubic Hermite interpolant through its endpoint
        states and derivatives; values at mesh nodes are exact.
        """
        ts = np.atleast_1d(np.asarray(times, dtype=float))
        idx = np.clip((ts / self.h).astype(int), 0, self.n_steps - 1)
        th = ts / self.h - idx
        th = th[:, None]
        x0, x1 = self.x[idx], self.x[idx + 1]
        d0, d1 = self.xdot[idx] * self.h, self.xdot[idx + 1] * self.h
        h00 = (1 + 2 * th) * (1 - th) ** 2
        h10 = th * (1 - th) ** 2
        h01 = th ** 2 * (3 - 2 * th)
        h11 = th ** 2 * (th - 1)
        out = h00 * x0 + h10 * d0 + h01 * x1 + h11 * d1
        return out[0] if np.isscalar(times) else out

    def to_csv(self) -> str:
        n = self.x.shape[1]
        header = "t," + ",".join(f"x{i+1}" for i in range(n))
        lines = [header]
        for ti, xi in zip(self.t, self.x):
            lines.append(",".join([repr(float(ti))] +
                                  [repr(float(v)) for v in xi]))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())


def integrate(prob: DdeProblem, h: float, horizon: float) -> DdeTrajectory:
    """RK4 method of steps; h is snapped to tau/ceil(tau/h).

    Delayed stage values come from the initial history (first interval) or
    the Hermite interpolant of an earlier, fully-computed step, which keeps
    the delayed argument consistent with fourth order.
    """
    if h <= 0 or horizon <= 0:
        raise ValueError("step and horizon must be positive")
    tau = prob.tau
    k = max(1, int(np.ceil(tau / h - 1e-12)))
    h = tau / k
    n_steps = int(np.ceil(horizon / h - 1e-9))
    f = prob.f

    x0 = np.atleast_1d(np.asarray(prob.history(0.0), dtype=float))
    dim = x0.size
    xs = np.empty((n_steps + 1, dim))
    ds = np.empty((n_steps + 1, dim))
    xs[0] = x0
    ds[0] = f(x0, prob.history(-tau))

    def hermite_mid(i):
        # interpolant of step i at its midpoint; both endpoint slopes known
        x_a, x_b = xs[i], xs[i + 1]
        m_a, m_b = ds[i] * h, ds[i + 1] * h
        return 0.5 * (x_a + x_b) + 0.125 * (m_a - m_b)

    for i in range(n_steps):
        j = i - k
        if j < 0:
            d_lo = prob.history(j * h)
            d_mid = prob.history((j + 0.5) * h)
            d_hi = xs[0] if j + 1 == 0 else prob.history((j + 1) * h)
        else:
            d_lo = xs[j]
            d_mid = hermite_mid(j)
            d_hi = xs[j + 1]

        xi = xs[i]
        k1 = f(xi, d_lo)
        k2 = f(xi + 0.5 * h * k1, d_mid)
        k3 = f(xi + 0.5 * h * k2, d_mid)
        k4 = f(xi + h * k3, d_hi)
        x_next = xi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x_next)):
            raise NonfiniteState((i + 1) * h)
        xs[i + 1] = x_next
        ds[i + 1] = f(x_next, d_hi)

    ts = np.arange(n_steps + 1) * h
    return DdeTrajectory(t=ts, x=xs, xdot=ds, h=h, tau=tau,
                         horizon=n_steps * h, problem=prob)


@dataclass(frozen=True)
class Section:
    """Poincare section: crossing of coordinate `coord` through `value`.

    direction +1 detects upward crossings (derivative positive), -1 downward.
    """

    coord: int
    value: float
    direction: int = 1


@dataclass(frozen=True)
class OrbitVerdict:
    kind: str  # ConvergedToPoint | ConvergedToPeriodicOrbit | Inconclusive
    period: float | None = None
    contraction_ratio: float | None = None
    section: Section | None = None
    limit_state: np.ndarray | None = None
    final_distance: float | None = None
    n_returns: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "period": self.period,
            "contraction_ratio": self.contraction_ratio,
            "section": None if self.section is None else {
                "coord": self.section.coord, "value": self.section.value,
                "direction": self.section.direction},
            "limit_state": None if self.limit_state is None
            else [float(v) for v in self.limit_state],
            "final_distance": self.final_distance,
            "n_returns": self.n_returns,
        }


CONVERGED_POINT = "ConvergedToPoint"
CONVERGED_ORBIT = "ConvergedToPeriodicOrbit"
INCONCLUSIVE = "Inconclusive"


def section_crossings(traj: DdeTrajectory, section: Section,
                      t_start: float = 0.0, oversample: int = 4):
    """Crossing times and states, located by linear interpolation.

    The dense output is sampled `oversample` times per step and each sign
    change in the crossing direction is linearly interpolated; halving the
    sampling interval sharpens crossings quadratically.
    """
    n_sub = traj.n_steps * oversample
    ts = np.linspace(0.0, traj.horizon, n_sub + 1)
    ys = traj.eval(ts)[:, section.coord] - section.value
    if section.direction >= 0:
        hit = (ys[:-1] < 0.0) & (ys[1:] >= 0.0)
    else:
        hit = (ys[:-1] > 0.0) & (ys[1:] <= 0.0)
    idx = np.nonzero(hit & (ts[:-1] >= t_start))[0]
    t_cross = []
    for i in idx:
        frac = ys[i] / (ys[i] - ys[i + 1])
        t_cross.append(ts[i] + frac * (ts[i + 1] - ts[i]))
    t_cross = np.array(t_cross)
    states = traj.eval(t_cross) if t_cross.size else np.empty((0, traj.x.shape[1]))
    return t_cross, states


def detect_limit(traj: DdeTrajectory, phi0: np.ndarray,
                 section: Section | None = None, *,
                 transient_fraction: float = 0.25,
                 point_tol: float = 1e-6,
                 min_returns: int = 5,
                 contraction_threshold: float = 0.98,
                 distance_floor: float = 1e-6,
                 oversample: int = 4) -> OrbitVerdict:
    """Decide whether the trajectory settled on the stationary point or an orbit.

    Point convergence: the distance to phi0 stays below point_tol over the
    last tenth of the horizon and its envelope does not grow.  Otherwise the
    return map on the section (default: coordinate x3 upward through the
    stationary value) must show at least `min_returns` successive return
    distances shrinking geometrically; the period is the mean of the last
    return intervals.  Return gaps below distance_floor count as converged
    outright: once gaps reach the crossing-interpolation noise their ratios
    carry no signal, so the floor must sit above that noise level.
    """
    phi0 = np.asarray(phi0, dtype=float)
    dists = np.linalg.norm(traj.x - phi0, axis=1)
    t = traj.t
    w2 = t >= 0.9 * traj.horizon
    w1 = (t >= 0.8 * traj.horizon) & ~w2
    if not w1.any():
        w1 = ~w2
    final_distance = float(dists[-1])
    if (dists[w2].max() < point_tol
            and dists[w2].max() <= dists[w1].max() * (1.0 + 1e-9) + 1e-15):
        return OrbitVerdict(CONVERGED_POINT, limit_state=phi0,
                            final_distance=final_distance)

    if section is None:
        section = Section(coord=len(phi0) - 1, value=float(phi0[-1]), direction=1)
    t_skip = transient_fraction * traj.horizon
    t_cross, states = section_crossings(traj, section, t_start=t_skip,
                                        oversample=oversample)
    if len(t_cross) < min_returns + 1:
        return OrbitVerdict(INCONCLUSIVE, section=section,
                            final_distance=final_distance)

    gaps = np.linalg.norm(np.diff(states, axis=0), axis=1)
    tail = gaps[-min_returns:]
    ratios = []
    contracted = True
    for a, b in zip(tail[:-1], tail[1:]):
        if a < distance_floor and b < distance_floor:
            continue
        if a <= 0:
            contracted = False
            break
        r = b / a
        ratios.append(r)
        if r >= contraction_threshold:
            contracted = False
            break
    if not contracted:
        return OrbitVerdict(INCONCLUSIVE, section=section,
                            n_returns=len(t_cross),
                            final_distance=final_distance)
    intervals = np.diff(t_cross)[-min_returns:]
    return OrbitVerdict(
        CONVERGED_ORBIT,
        period=float(np.mean(intervals)),
        contraction_ratio=float(max(ratios)) if ratios else 0.0,
        section=section, n_returns=len(t_cross),
        final_distance=final_distance)


def check_invariance(traj: DdeTrajectory, beta: float, lam: float) -> bool:
    """True iff every mesh state stays strictly inside the invariant box.

    The box bounds component j between (beta*lam)^(-j) g(sigma_beta) and
    (beta/lam)^j g(0); positivity of all components is checked as well.
    The initial history must itself lie inside the box.
    """
    lo, hi = wbeta_bounds(beta, lam)
    hist = traj.problem.history.values
    if np.any(hist <= lo) or np.any(hist >= hi):
        raise ValueError("initial history is not inside the invariant box")
    x = traj.x
    inside = np.all(x > lo) and np.all(x < hi)
    positive = bool(np.all(x > 0.0))
    return bool(inside and positive)


def goodwin_problem(tau: float, lam: float,
                    history: History | None = None) -> DdeProblem:
    """Goodwin oscillator as a DdeProblem; default history is a nudged
    stationary state (5 percent above it, inside every invariant box)."""
    def f(x, xd):
        return np.array([g(xd[2]) - lam * x[0],
                         x[0] - lam * x[1],
                         x[1] - lam * x[2]])

    if history is None:
        history = History.constant(stationary_point(lam) * 1.05, tau)
    return DdeProblem(f=f, tau=tau, history=history)


def goodwin_section(lam: float) -> Section:
    """Default section: x3 upward through the stationary value eta0."""
    return Section(coord=2, value=solve_eta0(lam), direction=1)
