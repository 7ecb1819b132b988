"""Seeded test models used by the test-suite, the acceptance run and the CLI."""
from __future__ import annotations

import numpy as np

from .contour import Cycle, rectangle
from .operators import DenseMatrix, Diagonal, PointMassMultiplication


def tangent_disc_curve() -> Cycle:
    """Rectangle [0, 2.5] x [-1.5, 1.5]: contains [-i, i], meets the two discs only at 0."""
    return Cycle([rectangle(0.0, 2.5, -1.5, 1.5)])


def tangent_discs(n: int = 10_000, seed: int = 0, min_gap: float = 1e-3,
                  curve: Cycle | None = None) -> PointMassMultiplication:
    """Point-mass model of z on the closed discs D(-1, 1) and D(1, 1).

    Nodes are uniform in area, rejected when closer than ``min_gap`` to the
    curve; every node carries weight (total area) / n.
    """
    curve = curve or tangent_disc_curve()
    rng = np.random.default_rng(seed)
    nodes = []
    have = 0
    while have < n:
        m = 2 * (n - have) + 64
        r = np.sqrt(rng.random(m))
        th = 2 * np.pi * rng.random(m)
        c = np.where(rng.random(m) < 0.5, -1.0, 1.0)
        z = c + r * np.exp(1j * th)
        z = z[curve.distance(z) >= min_gap]
        nodes.append(z)
        have += z.size
    z = np.concatenate(nodes)[:n]
    return PointMassMultiplication(z, np.full(n, 2 * np.pi / n))


def random_dense(n: int, seed: int, scale: float = 1.0) -> DenseMatrix:
    rng = np.random.default_rng(seed)
    return DenseMatrix(scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2 * n))


def clustered_dense(centers, per_cluster: int, seed: int, spread: float = 0.1) -> DenseMatrix:
    """Non-normal matrix whose eigenvalues sit in small clusters around ``centers``."""
    rng = np.random.default_rng(seed)
    lam = np.concatenate([c + spread * (rng.random(per_cluster) - 0.5 + 1j * (rng.random(per_cluster) - 0.5))
                          for c in centers])
    n = lam.size
    S = np.eye(n) + 0.3 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(n)
    return DenseMatrix(S @ np.diag(lam) @ np.linalg.inv(S))


def random_diagonal(n: int, seed: int, box=(-2.0, 2.0, -2.0, 2.0)) -> Diagonal:
    rng = np.random.default_rng(seed)
    x0, x1, y0, y1 = box
    return Diagonal(x0 + (x1 - x0) * rng.random(n) + 1j * (y0 + (y1 - y0) * rng.random(n)))


def perturbed_fixture(n: int = 12, k: int = 2, seed: int = 0, coeff: float = 0.08):
    """T = D + sum_k u_k (x) v_k with separated eigenvalues and decaying coefficients."""
    from .perturbation import PerturbedDiagonal

    rng = np.random.default_rng(seed)
    side = int(np.ceil(np.sqrt(n)))
    grid = np.array([complex(i, j) for i in range(side) for j in range(side)])[:n]
    lam = grid + 0.2 * (rng.random(n) - 0.5) + 0.2j * (rng.random(n) - 0.5)
    decay = 1.0 / (1.0 + np.arange(n))[:, None]
    alpha = coeff * decay * (rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k)))
    beta = coeff * decay * (rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k)))
    return PerturbedDiagonal(lam, alpha, beta)
