"""Independent reference computations used by the tests.

Nothing here goes through the package's quadrature or geometry code: the
projections come from eigendecompositions, windings from dense sampling of
the argument, and the series quantities from plain loops.
"""
import numpy as np


def eig_projection(A, inside):
    """V diag(chi) V^{-1} for a diagonalisable matrix; ``inside`` is a predicate on eigenvalues."""
    A = np.asarray(A, dtype=complex)
    w, V = np.linalg.eig(A)
    chi = np.asarray(inside(w), dtype=bool).astype(complex)
    return V @ np.diag(chi) @ np.linalg.inv(V)


def eig_function(A, f, inside=None):
    """V diag(f(lambda) chi) V^{-1}."""
    A = np.asarray(A, dtype=complex)
    w, V = np.linalg.eig(A)
    vals = f(w)
    if inside is not None:
        vals = np.where(inside(w), vals, 0)
    return V @ np.diag(vals) @ np.linalg.inv(V)


def sampled_winding(cycle, p, m=4000):
    """Winding number from the accumulated argument along a dense sampling."""
    total = 0.0
    for seg in cycle.traversal():
        t = np.linspace(0, 1, m)
        z = np.array([seg.point(s) for s in t]) - p
        total += np.sum(np.angle(z[1:] / z[:-1]))
    return int(round(total / (2 * np.pi)))


def in_disc(c, r):
    return lambda w: np.abs(np.asarray(w) - c) < r


def flood_components(mark):
    """Number of 4-connected components of a boolean cell array."""
    mark = np.asarray(mark, dtype=bool)
    seen = np.zeros_like(mark)
    n = 0
    for i, j in zip(*np.nonzero(mark)):
        if seen[i, j]:
            continue
        n += 1
        stack = [(i, j)]
        while stack:
            a, b = stack.pop()
            if not (0 <= a < mark.shape[0] and 0 <= b < mark.shape[1]) or seen[a, b] or not mark[a, b]:
                continue
            seen[a, b] = True
            stack += [(a + 1, b), (a - 1, b), (a, b + 1), (a, b - 1)]
    return n


def naive_summability(alpha, beta):
    s = 0.0
    for c in (alpha, beta):
        for v in np.ravel(c):
            a = abs(v)
            if a > 0:
                s += a * a * np.log(1 + 1 / a)
    return s


def naive_delta(lam, alpha, beta, x):
    s = 0.0
    for n in range(len(lam)):
        w = sum(abs(alpha[n, k]) ** 2 + abs(beta[n, k]) ** 2 for k in range(alpha.shape[1]))
        s += w * (1 / abs(lam[n].real - x) + 1 / abs(lam[n].imag - x))
    return s


def naive_kernel(lam, alpha, beta, i, j, z):
    return sum(alpha[n, i] * np.conj(beta[n, j]) / (lam[n] - z) for n in range(len(lam)))


def hausdorff(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    d = np.abs(a[:, None] - b[None, :])
    return max(d.min(axis=1).max(), d.min(axis=0).max())
