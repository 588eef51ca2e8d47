"""Independent oracles used by the test suite.

These deliberately avoid the library's argument-principle and SVD paths:
root counts come from Newton iteration over a seed grid, operator norms from
power iteration, and scalar extrema from dense grids.
"""

from __future__ import annotations

import numpy as np


def _adjugates(mats: np.ndarray) -> np.ndarray:
    """Batched adjugate for stacks of 1x1, 2x2 or 3x3 matrices."""
    n = mats.shape[-1]
    if n == 1:
        return np.ones_like(mats)
    if n == 2:
        adj = np.empty_like(mats)
        adj[..., 0, 0] = mats[..., 1, 1]
        adj[..., 1, 1] = mats[..., 0, 0]
        adj[..., 0, 1] = -mats[..., 0, 1]
        adj[..., 1, 0] = -mats[..., 1, 0]
        return adj
    if n == 3:
        a = mats
        adj = np.empty_like(a)
        for i in range(3):
            for j in range(3):
                r = [k for k in range(3) if k != j]
                c = [k for k in range(3) if k != i]
                minor = (a[..., r[0], c[0]] * a[..., r[1], c[1]]
                         - a[..., r[0], c[1]] * a[..., r[1], c[0]])
                adj[..., i, j] = (-1) ** (i + j) * minor
        return adj
    raise ValueError("adjugate oracle supports n <= 3 only")


def _char_dets(terms, ps: np.ndarray):
    """Batched (det D(p), d/dp det D(p)) via the adjugate trace formula."""
    n = terms[0][1].shape[0]
    ps = np.asarray(ps, dtype=complex)
    d = -ps[:, None, None] * np.eye(n)
    dp = np.broadcast_to(-np.eye(n, dtype=complex), d.shape).copy()
    for tau, mat in terms:
        e = np.exp(-ps * tau)[:, None, None]
        d = d + mat * e
        dp = dp - tau * mat * e
    dets = np.linalg.det(d)
    adj = _adjugates(d)
    ddets = np.einsum("kij,kji->k", adj, dp)
    return dets, ddets


def newton_root_count(terms, c: float, box=None, grid: int = 40,
                      maxiter: int = 100, dedupe: float = 1e-6):
    """Count characteristic roots with Re p > c by Newton multistart.

    Seeds a grid over the a priori box, polishes every seed simultaneously,
    dedupes the converged roots and counts those strictly right of the line.
    Also returns the smallest |det| over a dense sample of the line, which
    gauges whether the count is trustworthy near Re p = c.
    """
    terms = [(float(t), np.asarray(m, dtype=float)) for t, m in terms]
    bound = sum(np.linalg.norm(m, 2) * np.exp(-c * t) for t, m in terms)
    if box is None:
        box = (c - 0.5, bound + 1.0, -(bound + 1.0), bound + 1.0)
    re_lo, re_hi, im_lo, im_hi = box

    res, ims = np.meshgrid(np.linspace(re_lo, re_hi, grid),
                           np.linspace(im_lo, im_hi, grid))
    ps = (res + 1j * ims).ravel()
    alive = np.ones(ps.size, dtype=bool)
    escape = 10.0 * (abs(re_lo) + re_hi + im_hi + 2.0)
    converged = np.zeros(ps.size, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(maxiter):
            if not alive.any():
                break
            dets, ddets = _char_dets(terms, ps[alive])
            steps = dets / ddets
            ok = np.isfinite(steps)
            idx = np.nonzero(alive)[0]
            ps[idx[ok]] -= steps[ok]
            small = ok & (np.abs(steps) < 1e-13 * (1.0 + np.abs(ps[idx])))
            converged[idx[small]] = True
            escaped = ~ok | (np.abs(ps[idx]) > escape)
            alive[idx[small | escaped]] = False

    n = terms[0][1].shape[0]
    cands = ps[converged]
    if cands.size:
        dets, _ = _char_dets(terms, cands)
        cands = cands[np.abs(dets) < 1e-9 * (1.0 + np.abs(cands)) ** n]
    roots: list[complex] = []
    for p in cands:
        if not any(abs(p - r) < dedupe for r in roots):
            roots.append(complex(p))

    count = sum(1 for r in roots if r.real > c)
    omegas = np.linspace(0.0, im_hi, 4001)
    line_dets, _ = _char_dets(terms, c + 1j * omegas)
    return count, float(np.min(np.abs(line_dets))), roots


def power_iteration_norm(w: np.ndarray, iters: int = 2000,
                         seed: int = 7) -> float:
    """Largest singular value via power iteration on W^H W."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(w.shape[1]) + 1j * rng.standard_normal(w.shape[1])
    v /= np.linalg.norm(v)
    s_prev = 0.0
    for _ in range(iters):
        u = w @ v
        v = w.conj().T @ u
        s = np.linalg.norm(v) ** 0.5
        if s == 0:
            return 0.0
        v /= np.linalg.norm(v)
        if abs(s - s_prev) < 1e-15 * max(1.0, s):
            break
        s_prev = s
    return float(np.linalg.norm(w @ v) / np.linalg.norm(v))


def random_delay_terms(rng: np.random.Generator):
    """Random system: n <= 3, up to 2 delayed terms, entries uniform in [-2, 2]."""
    n = int(rng.integers(1, 4))
    n_delays = int(rng.integers(1, 3))
    terms = [(0.0, rng.uniform(-2.0, 2.0, (n, n)))]
    delays = rng.uniform(0.1, 2.0, n_delays)
    while len(set(np.round(delays, 6))) != n_delays:
        delays = rng.uniform(0.1, 2.0, n_delays)
    for tau in delays:
        terms.append((float(tau), rng.uniform(-2.0, 2.0, (n, n))))
    return terms
