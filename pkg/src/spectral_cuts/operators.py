"""Concrete operator models.

Four finite models are provided: dense matrices, diagonal operators, diagonal
operators plus a finite-rank series ``D + sum_k u_k (x) v_k`` and
multiplication by ``z`` on a discrete measure.  Each exposes matrix-free
application, batched resolvent solves and its spectrum, and the module offers
an independent Schur-based oracle for spectral subspaces and eigenprojections.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np
import scipy.linalg

from .contour import Cycle, Region, classify_many
from .errors import BoundaryEigenvalue, DimensionMismatch, GeometryError, ParseError, SingularResolvent

SINGULAR_REL = 1e-13
BOUNDARY_REL = 1e-9
_CHUNK = 4_000_000


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise ParseError(f"{what} contains non-finite entries")


class OperatorModel:
    """Common interface of the finite operator models."""

    kind = "abstract"

    @property
    def n(self) -> int:
        raise NotImplementedError

    def dense(self) -> np.ndarray:
        raise NotImplementedError

    def apply(self, x) -> np.ndarray:
        raise NotImplementedError

    def _resolvent_unchecked(self, zs, X) -> np.ndarray:
        raise NotImplementedError

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.dense())

    @cached_property
    def norm(self) -> float:
        return float(np.linalg.norm(self.dense(), 2))

    @cached_property
    def scale(self) -> float:
        """max(1, induced 1-norm), used to make thresholds relative."""
        return max(1.0, float(np.abs(self.dense()).sum(axis=0).max()))

    @property
    def is_diagonal(self) -> bool:
        return False

    def _check_vec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape[0] != self.n:
            raise DimensionMismatch(f"vector has length {x.shape[0]}, operator has dimension {self.n}")
        return x

    def resolvent(self, z: complex, x) -> np.ndarray:
        """Solve (zI - T) y = x."""
        x = self._check_vec(x)
        return self.resolvent_many(np.array([z]), x)[0]

    def resolvent_many(self, zs, X) -> np.ndarray:
        """Solve (z I - T) Y = X for every z in ``zs``.

        ``X`` is a vector or an n x m block; the result has shape
        ``(len(zs),) + X.shape``.
        """
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        X = self._check_vec(X)
        self.check_off_spectrum(zs)
        return self._resolvent_unchecked(zs, X)

    def check_off_spectrum(self, zs) -> None:
        """Raise SingularResolvent if any z is within SINGULAR_REL * scale of an eigenvalue."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        if not zs.size:
            return
        dist = np.abs(zs[:, None] - self.eigenvalues[None, :]).min(axis=1)
        bad = dist <= SINGULAR_REL * self.scale
        if np.any(bad):
            z0 = zs[np.argmax(bad)]
            raise SingularResolvent(f"z = {z0} is within {SINGULAR_REL:g}*scale of the spectrum")

    def resolvent_norm(self, z: complex) -> float:
        """Operator norm of (zI - T)^{-1}."""
        R = self.resolvent_many(np.array([z]), np.eye(self.n, dtype=complex))[0]
        return float(np.linalg.norm(R, 2))

    def vector_norm(self, x) -> float:
        return float(np.linalg.norm(x))


@dataclass(frozen=True, eq=False)
class DenseMatrix(OperatorModel):
    data: np.ndarray
    kind = "dense"

    def __post_init__(self):
        a = np.array(self.data, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DimensionMismatch(f"dense operator must be square, got shape {a.shape}")
        _check_finite(a, "matrix")
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @property
    def n(self):
        return self.data.shape[0]

    def dense(self):
        return self.data

    def apply(self, x):
        return self.data @ self._check_vec(x)

    def _resolvent_unchecked(self, zs, X):
        n = self.n
        out = np.empty((zs.size,) + X.shape, dtype=complex)
        step = max(1, _CHUNK // (n * n))
        I = np.eye(n)
        rhs = X if X.ndim == 2 else X[:, None]
        for s in range(0, zs.size, step):
            Z = zs[s:s + step, None, None] * I - self.data
            sol = np.linalg.solve(Z, np.broadcast_to(rhs, (Z.shape[0],) + rhs.shape))
            out[s:s + step] = sol if X.ndim == 2 else sol[..., 0]
        return out

    def adjoint(self):
        return DenseMatrix(self.data.conj().T)

    def transpose(self):
        return DenseMatrix(self.data.T)


@dataclass(frozen=True, eq=False)
class Diagonal(OperatorModel):
    lam: np.ndarray
    kind = "diagonal"

    def __post_init__(self):
        lam = np.array(self.lam, dtype=complex).ravel()
        if lam.size < 1:
            raise DimensionMismatch("diagonal operator needs at least one eigenvalue")
        _check_finite(lam, "eigenvalue list")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    @property
    def n(self):
        return self.lam.size

    @property
    def is_diagonal(self):
        return True

    @cached_property
    def eigenvalues(self):
        return self.lam

    @cached_property
    def norm(self):
        return float(np.abs(self.lam).max())

    @cached_property
    def scale(self):
        return max(1.0, float(np.abs(self.lam).max()))

    def dense(self):
        return np.diag(self.lam)

    def apply(self, x):
        x = self._check_vec(x)
        return (self.lam * x.T).T

    def _resolvent_unchecked(self, zs, X):
        r = 1.0 / (zs[:, None] - self.lam[None, :])
        return r[:, :, None] * X[None] if X.ndim == 2 else r * X[None]

    def adjoint(self):
        return Diagonal(self.lam.conj())

    def transpose(self):
        return self


@dataclass(frozen=True, eq=False)
class PointMassMultiplication(Diagonal):
    """Multiplication by z on L^2 of a finite, positively weighted point measure."""

    weights: np.ndarray = None
    kind = "point_mass"

    def __post_init__(self):
        super().__post_init__()
        w = np.array(self.weights if self.weights is not None else np.ones(self.n), dtype=float).ravel()
        if w.shape != (self.n,):
            raise DimensionMismatch("need one weight per node")
        if not np.all(w > 0) or not np.all(np.isfinite(w)):
            raise ParseError("weights must be finite and strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def nodes(self):
        return self.lam

    def vector_norm(self, x) -> float:
        x = np.asarray(x)
        return float(np.sqrt(np.sum(self.weights * np.abs(x) ** 2)))

    def adjoint(self):
        return PointMassMultiplication(self.lam.conj(), self.weights)

    def transpose(self):
        return self


@dataclass(frozen=True, eq=False)
class DiagonalPlusSeries(OperatorModel):
    """T = D_lambda + sum_k u_k (x) v_k with (u (x) v) x = <x, v> u.

    ``alpha`` and ``beta`` hold the coordinates of u_k and v_k as the columns
    of N x K arrays, so that T = diag(lambda) + alpha @ beta^H.
    """

    lam: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    kind = "diag_plus_series"

    def __post_init__(self):
        lam = np.array(self.lam, dtype=complex).ravel()
        a = np.array(self.alpha, dtype=complex)
        b = np.array(self.beta, dtype=complex)
        if a.ndim == 1:
            a = a[:, None]
        if b.ndim == 1:
            b = b[:, None]
        if lam.size < 1:
            raise DimensionMismatch("need at least one eigenvalue")
        if a.shape != b.shape or a.shape[0] != lam.size:
            raise DimensionMismatch(f"alpha {a.shape} and beta {b.shape} must both be N x K with N = {lam.size}")
        for arr, what in ((lam, "lambda"), (a, "alpha"), (b, "beta")):
            _check_finite(arr, what)
            arr.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def n(self):
        return self.lam.size

    @property
    def rank_terms(self) -> int:
        return self.alpha.shape[1]

    @property
    def trace_norm_bound(self) -> float:
        """sum_k ||u_k|| ||v_k||, recorded as the size of the perturbation."""
        return float(np.sum(np.linalg.norm(self.alpha, axis=0) * np.linalg.norm(self.beta, axis=0)))

    @cached_property
    def _dense(self):
        d = np.diag(self.lam) + self.alpha @ self.beta.conj().T
        d.setflags(write=False)
        return d

    def dense(self):
        return self._dense

    def apply(self, x):
        x = self._check_vec(x)
        return (self.lam * x.T).T + self.alpha @ (self.beta.conj().T @ x)

    def _resolvent_unchecked(self, zs, X):
        vec = X.ndim == 1
        Xm = X[:, None] if vec else X
        K = self.rank_terms
        out = np.empty((zs.size,) + Xm.shape, dtype=complex)
        near_diag = np.abs(zs[:, None] - self.lam[None, :]).min(axis=1) <= 1e-8 * self.scale
        step = max(1, _CHUNK // (self.n * max(K, Xm.shape[1])))
        bH = self.beta.conj().T
        for s in range(0, zs.size, step):
            z = zs[s:s + step]
            r = 1.0 / (z[:, None] - self.lam[None, :])
            RX = r[:, :, None] * Xm[None]
            RU = r[:, :, None] * self.alpha[None]
            S = np.eye(K) - bH @ RU
            W = bH @ RX
            out[s:s + step] = RX + RU @ np.linalg.solve(S, W)
        for idx in np.nonzero(near_diag)[0]:
            # the low-rank formula needs z off the diagonal; fall back to a dense solve
            out[idx] = np.linalg.solve(zs[idx] * np.eye(self.n) - self._dense, Xm)
        return out[..., 0] if vec else out

    def adjoint(self):
        return DiagonalPlusSeries(self.lam.conj(), self.beta, self.alpha)

    def transpose(self):
        return DiagonalPlusSeries(self.lam, self.beta.conj(), self.alpha.conj())


Operator = Union[DenseMatrix, Diagonal, PointMassMultiplication, DiagonalPlusSeries]


# ---------------------------------------------------------------------------
# module-level operations


def apply(T: OperatorModel, x) -> np.ndarray:
    return T.apply(x)


def resolvent_apply(T: OperatorModel, z: complex, x) -> np.ndarray:
    return T.resolvent(z, x)


def spectrum(T: OperatorModel) -> np.ndarray:
    """Eigenvalues with algebraic multiplicity (verbatim for diagonal models)."""
    return np.array(T.eigenvalues)


def adjoint(T: OperatorModel) -> OperatorModel:
    """Conjugate-transpose (Hilbert space adjoint)."""
    return T.adjoint()


def _membership(T: OperatorModel, where, boundary: str):
    eig = T.eigenvalues
    eps = BOUNDARY_REL * T.scale
    if isinstance(where, Cycle):
        cls = classify_many(where, eig, tol=eps)
        on = cls == -1
        inside = cls == 1
    elif isinstance(where, Region):
        inside = where.contains(eig, closed=True)
        on = where.contains(eig, closed=True, tol=eps) & ~where.contains(eig, closed=True, tol=-eps)
    elif callable(where):
        inside = np.asarray(where(eig), dtype=bool)
        on = np.zeros_like(inside)
    else:
        raise TypeError("expected a Cycle, a Region or a predicate")
    if np.any(on):
        if boundary == "raise":
            raise BoundaryEigenvalue(f"eigenvalue {eig[np.argmax(on)]} lies on the region boundary")
        inside = inside | on if boundary == "include" else inside & ~on
    return inside


def _schur_basis(A: np.ndarray, eig: np.ndarray, mask: np.ndarray) -> np.ndarray:
    if not mask.any():
        return np.zeros((A.shape[0], 0), dtype=complex)
    if mask.all():
        return np.eye(A.shape[0], dtype=complex)
    chosen = eig[mask]
    rest = eig[~mask]

    def select(x):
        return np.abs(chosen - x).min() < np.abs(rest - x).min()

    _, Z, sdim = scipy.linalg.schur(A, output="complex", sort=select)
    if sdim != mask.sum():
        raise BoundaryEigenvalue("eigenvalues could not be separated reliably (clustered across the boundary)")
    return Z[:, :sdim]


def spectral_subspace_oracle(T: OperatorModel, where, boundary: str = "raise") -> np.ndarray:
    """Basis (columns) of the span of generalized eigenvectors with eigenvalues in ``where``.

    ``where`` is a Region, the interior of a Cycle or a vectorised predicate.
    """
    mask = _membership(T, where, boundary)
    if T.is_diagonal:
        return np.eye(T.n, dtype=complex)[:, mask]
    return _schur_basis(np.asarray(T.dense()), T.eigenvalues, mask)


def eigenprojection_oracle(T: OperatorModel, where, boundary: str = "raise") -> np.ndarray:
    """Spectral projection onto the generalized eigenspaces selected by ``where``."""
    mask = _membership(T, where, boundary)
    if T.is_diagonal:
        return np.diag(mask.astype(complex))
    A = np.asarray(T.dense())
    eig = T.eigenvalues
    Vin = _schur_basis(A, eig, mask)
    Vout = _schur_basis(A, eig, ~mask)
    k = Vin.shape[1]
    if k == 0:
        return np.zeros_like(A)
    if k == T.n:
        return np.eye(T.n, dtype=complex)
    W = np.hstack([Vin, Vout])
    return Vin @ np.linalg.solve(W, np.eye(T.n))[:k]


# ---------------------------------------------------------------------------
# JSON


def _cplx_list(obj, what) -> np.ndarray:
    try:
        out = []
        for v in obj:
            if isinstance(v, (list, tuple)):
                if len(v) != 2:
                    raise ValueError(f"complex entry {v!r} must be [re, im]")
                out.append(complex(float(v[0]), float(v[1])))
            else:
                out.append(complex(float(v)))
        return np.array(out, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field {what!r}: {exc}") from None


def _cplx_json(a):
    a = np.asarray(a)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_cplx_json(v) for v in a]


def operator_from_json(obj) -> OperatorModel:
    if not isinstance(obj, dict):
        raise ParseError("operator JSON must be an object")
    kind = obj.get("kind")
    try:
        if kind == "dense":
            rows = obj["data"]
            if not isinstance(rows, list) or not rows:
                raise ParseError("field 'data' must be a non-empty list of rows")
            return DenseMatrix(np.array([_cplx_list(r, "data") for r in rows]))
        if kind == "diagonal":
            return Diagonal(_cplx_list(obj["lambda"], "lambda"))
        if kind == "diag_plus_series":
            lam = _cplx_list(obj["lambda"], "lambda")
            alpha = np.array([_cplx_list(r, "alpha") for r in obj["alpha"]]).reshape(-1, lam.size).T
            beta = np.array([_cplx_list(r, "beta") for r in obj["beta"]]).reshape(-1, lam.size).T
            from .perturbation import PerturbedDiagonal

            try:
                return PerturbedDiagonal(lam, alpha, beta)
            except GeometryError:
                # eigenvalues on one axis-parallel line: no appropriate grid, plain model
                return DiagonalPlusSeries(lam, alpha, beta)
        if kind == "point_mass":
            nodes = _cplx_list(obj["nodes"], "nodes")
            w = np.asarray(obj.get("weights", np.ones(nodes.size)), dtype=float)
            return PointMassMultiplication(nodes, w)
    except KeyError as exc:
        raise ParseError(f"operator of kind {kind!r} is missing field {exc.args[0]!r}") from None
    except (ValueError, TypeError, DimensionMismatch) as exc:
        raise ParseError(f"invalid operator: {exc}") from None
    raise ParseError(f"field 'kind' has unknown value {kind!r}")


def operator_to_json(T: OperatorModel) -> dict:
    if isinstance(T, DenseMatrix):
        return {"kind": "dense", "data": _cplx_json(T.data)}
    if isinstance(T, PointMassMultiplication):
        return {"kind": "point_mass", "nodes": _cplx_json(T.lam), "weights": [float(w) for w in T.weights]}
    if isinstance(T, Diagonal):
        return {"kind": "diagonal", "lambda": _cplx_json(T.lam)}
    if isinstance(T, DiagonalPlusSeries):
        return {"kind": "diag_plus_series", "lambda": _cplx_json(T.lam),
                "alpha": _cplx_json(T.alpha.T), "beta": _cplx_json(T.beta.T)}
    raise TypeError(f"cannot serialise {type(T).__name__}")
