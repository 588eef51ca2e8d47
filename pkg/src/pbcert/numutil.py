"""Shared scalar-search and sweep-grid helpers."""

from __future__ import annotations

from typing import Callable

import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def golden_max(f: Callable[[float], float], a: float, b: float,
               tol: float = 1e-11, maxiter: int = 200) -> tuple[float, float]:
    """Golden-section search for a local maximum of f on [a, b].

    Returns (x, f(x)).  The bracket endpoints are included in the final
    comparison so a boundary maximum is never missed.
    """
    if b < a:
        a, b = b, a
    fa, fb = f(a), f(b)
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(maxiter):
        if b - a <= tol * (1.0 + abs(a) + abs(b)):
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
    candidates = [(x1, f1), (x2, f2), (a, fa), (b, fb)]
    return max(candidates, key=lambda c: c[1])


def golden_min(f: Callable[[float], float], a: float, b: float,
               tol: float = 1e-11, maxiter: int = 200) -> tuple[float, float]:
    """Golden-section search for a local minimum of f on [a, b]."""
    x, negfx = golden_max(lambda t: -f(t), a, b, tol=tol, maxiter=maxiter)
    return x, -negfx


def geom_nested(lo: float, hi: float, n: int) -> np.ndarray:
    """n+1 log-spaced points on [lo, hi] that are nested under doubling of n.

    Points sit at lo*(hi/lo)**(k/n); doubling n keeps every existing point.
    """
    if lo <= 0 or hi <= lo:
        raise ValueError("geom_nested needs 0 < lo < hi")
    k = np.arange(n + 1, dtype=float) / n
    return lo * (hi / lo) ** k


def sweep_grid(omega_max: float, n: int, omega_min: float = 1e-4) -> np.ndarray:
    """Frequency grid on [0, omega_max]: linear plus nested log spacing.

    The linear family resolves oscillatory structure at moderate frequencies;
    the log family reaches a large cutoff cheaply.  Doubling n refines both
    without dropping existing samples, so sampled extrema move monotonically.
    """
    if omega_max <= 0:
        return np.array([0.0])
    lin = np.linspace(0.0, omega_max, n + 1)
    if omega_max > omega_min * 10:
        log = geom_nested(omega_min, omega_max, n)
        grid = np.unique(np.concatenate(([0.0], lin, log)))
    else:
        grid = np.unique(np.concatenate(([0.0], lin)))
    return grid


def local_extrema_indices(values: np.ndarray, mode: str) -> np.ndarray:
    """Indices of interior local maxima ("max") or minima ("min"), plus ends."""
    v = values
    if v.size <= 2:
        return np.arange(v.size)
    if mode == "max":
        interior = np.nonzero((v[1:-1] >= v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
    else:
        interior = np.nonzero((v[1:-1] <= v[:-2]) & (v[1:-1] <= v[2:]))[0] + 1
    return np.unique(np.concatenate(([0], interior, [v.size - 1])))


def refine_extrema(f_batch: Callable[[np.ndarray], np.ndarray],
                   omegas: np.ndarray, values: np.ndarray, mode: str,
                   k: int = 3, tol: float = 1e-9,
                   maxiter: int = 80) -> tuple[float, float]:
    """Golden-section refinement around the k most extreme sampled values.

    All k brackets advance in lockstep, one batched evaluation per iteration.
    Returns (omega, value) of the refined extremum merged with the sampled one.
    """
    sign = 1.0 if mode == "max" else -1.0
    cand = local_extrema_indices(values, mode)
    order = np.argsort(sign * values[cand])[::-1]
    picked = cand[order[:k]]

    a = omegas[np.maximum(picked - 1, 0)].astype(float)
    b = omegas[np.minimum(picked + 1, len(omegas) - 1)].astype(float)
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1 = sign * np.asarray(f_batch(x1), dtype=float)
    f2 = sign * np.asarray(f_batch(x2), dtype=float)
    for _ in range(maxiter):
        if np.all(b - a <= tol * (1.0 + np.abs(b))):
            break
        right = f1 < f2
        a = np.where(right, x1, a)
        b = np.where(right, b, x2)
        width = b - a
        x1n = b - GOLDEN * width
        x2n = a + GOLDEN * width
        # moving right reuses the old x2 as the new x1; otherwise mirrored
        probe = np.where(right, x2n, x1n)
        fp = sign * np.asarray(f_batch(probe), dtype=float)
        f1, f2 = np.where(right, f2, fp), np.where(right, fp, f1)
        x1, x2 = x1n, x2n
    xs = np.concatenate([x1, x2])
    fs = np.concatenate([f1, f2])
    i_ref = int(np.argmax(fs))
    i_base = int(np.argmax(sign * values))
    if fs[i_ref] > sign * values[i_base]:
        return float(xs[i_ref]), float(sign * fs[i_ref])
    return float(omegas[i_base]), float(values[i_base])
