"""Vectorized fuzzing of the prox comparison inequality.

Draws random weakly convex quadratics f, feasible points x, and feasible
candidates p, solves every prox subproblem in one batched projected-gradient
sweep, and reports the minimum slack of

    [2 f(p) - 2 f(p_x) - (1 - rho) ||p - p_x||^2] - [||x - p_x||^2 - ||x - p||^2]

which is non-negative for exact proxes. Batching keeps 10^4 samples well
under the ten-second budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .comparators import projected_gradient_prox_rows
from .geometry import ball, box, simplex

FUZZ_TOL = 1e-12
FUZZ_MAX_ITER = 200_000


@dataclass
class FuzzReport:
    samples: int
    min_gap: float
    mean_gap: float
    worst: dict = field(default_factory=dict)

    def ok(self, threshold=-1e-8):
        return self.min_gap >= threshold


def _canonical_set(kind, dim):
    if kind == "box":
        return box(-np.ones(dim), np.ones(dim))
    if kind == "ball":
        return ball(np.zeros(dim), 1.0)
    if kind == "simplex":
        return simplex(dim)
    raise ValueError(f"unknown fuzz set kind {kind!r}")


def _random_quadratics(count, dim, rho_max, rng):
    """Symmetric matrices with eigenvalues in [-rho_i, 1], rho_i ~ U[0, rho_max]."""
    rhos = rng.uniform(0.0, rho_max, size=count)
    eigs = rng.uniform(-1.0, 1.0, size=(count, dim))
    eigs = np.where(eigs < 0, eigs * rhos[:, None], eigs)
    eigs[:, 0] = -rhos  # pin one eigenvalue at the weak-convexity floor
    w = rng.normal(size=(count, dim, dim))
    basis = np.linalg.qr(w)[0]
    quads = np.einsum("nik,nk,njk->nij", basis, eigs, basis)
    quads = 0.5 * (quads + np.transpose(quads, (0, 2, 1)))
    lins = 0.5 * rng.normal(size=(count, dim))
    # Recorded moduli come from the realized spectra.
    spectra = np.linalg.eigvalsh(quads)
    rhos = np.maximum(0.0, -spectra[:, 0])
    lips = np.max(np.abs(spectra), axis=1)
    return quads, lins, rhos, lips


def key_inequality_fuzz(samples=10_000, seed=0, dims=(2, 3, 5, 8),
                        kinds=("box", "ball", "simplex"), rho_max=0.95,
                        tol=FUZZ_TOL, max_iter=FUZZ_MAX_ITER):
    """Minimum inequality slack over random (f, x, p) triples per set kind."""
    if rho_max >= 1.0:
        raise ValueError("rho_max must be below 1")
    rng = np.random.default_rng(seed)
    groups = [(k, d) for k in kinds for d in dims]
    per_group = max(1, samples // len(groups))
    total = 0
    min_gap, mean_acc = np.inf, 0.0
    worst = {}
    for kind, dim in groups:
        count = per_group
        s = _canonical_set(kind, dim)
        quads, lins, rhos, lips = _random_quadratics(count, dim, rho_max, rng)
        xs = s.sample(rng, count)
        ps = s.sample(rng, count)
        steps = 1.0 / (1.0 + lips)
        pxs, _ = projected_gradient_prox_rows(
            quads, lins, xs, s.project, steps, tol=tol, max_iter=max_iter
        )
        f_p = 0.5 * np.einsum("ni,nij,nj->n", ps, quads, ps) + np.sum(lins * ps, axis=1)
        f_px = 0.5 * np.einsum("ni,nij,nj->n", pxs, quads, pxs) + np.sum(lins * pxs, axis=1)
        lhs = np.sum((xs - pxs) ** 2, axis=1) - np.sum((xs - ps) ** 2, axis=1)
        rhs = 2.0 * f_p - 2.0 * f_px - (1.0 - rhos) * np.sum((ps - pxs) ** 2, axis=1)
        gaps = rhs - lhs
        total += count
        mean_acc += float(gaps.sum())
        idx = int(np.argmin(gaps))
        if gaps[idx] < min_gap:
            min_gap = float(gaps[idx])
            worst = {"kind": kind, "dim": dim, "rho": float(rhos[idx]), "gap": float(gaps[idx])}
    return FuzzReport(total, min_gap, mean_acc / total, worst)
