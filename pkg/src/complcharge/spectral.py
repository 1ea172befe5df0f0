"""Weighted-L2 eigensystem of a discrete pair-interaction operator.

The generalized problem ``K W v = lambda v`` is made symmetric through
``B = W^(1/2) K W^(1/2)``; eigenvectors ``u`` of ``B`` map back to
``v = W^(-1/2) u``, which are orthonormal in ``sum_a w_a v_i[a] v_j[a]``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NumericalFailureError
from .operator import DiscreteOperator

logger = logging.getLogger(__name__)

SOLVERS = ("auto", "jacobi", "lapack")
JACOBI_AUTO_LIMIT = 512


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs sorted by ascending eigenvalue (most negative first).

    ``eigenvectors[:, i]`` is the nodal vector of the i-th eigenfunction.
    ``residual_norm`` is ``max_i ||R v_i - lambda_i v_i||_W / |lambda_i|``;
    ``scaled_residual`` divides by ``max |lambda|`` instead, which stays
    meaningful when the spectrum reaches round-off level.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    weights: np.ndarray
    residual_norm: float
    scaled_residual: float
    solver: str = "jacobi"
    sweeps: int = 0

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def orthonormality_error(self) -> float:
        V = self.eigenvectors
        G = V.T @ (self.weights[:, None] * V)
        return float(np.max(np.abs(G - np.eye(self.n))))


@dataclass(frozen=True)
class DefinitenessReport:
    negative_count: int
    nonnegative_count: int
    max_eigenvalue: float
    min_eigenvalue: float
    certified: bool

    def as_dict(self) -> dict:
        return {"negative_count": self.negative_count,
                "nonnegative_count": self.nonnegative_count,
                "max_eigenvalue": self.max_eigenvalue,
                "min_eigenvalue": self.min_eigenvalue,
                "certified": self.certified}


def _round_robin(n):
    """Pairings (p, q) covering all index pairs in n-1 rounds of disjoint rotations."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p, q = [], []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a < n and b < n:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=np.intp), np.array(q, dtype=np.intp)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _off_norm(A):
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def jacobi_eigh(B, tol=1e-12, max_sweeps=100):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Each sweep visits every off-diagonal pair once in round-robin order, so
    the rotations of one round act on disjoint index pairs and are applied
    together. Iteration stops once the off-diagonal Frobenius norm drops
    below ``tol * ||B||_F``.

    Eigenvalues are returned as Rayleigh quotients of the accumulated
    rotation columns, which removes the rounding drift of the rotated
    diagonal. Returns ``(eigenvalues, eigenvectors, sweeps)`` unsorted.
    """
    B = np.asarray(B, dtype=np.float64)
    A = B.copy()
    n = A.shape[0]
    if A.shape != (n, n):
        raise InvalidArgumentError(f"expected a square matrix, got {A.shape}")
    V = np.eye(n)
    # unit max entry keeps the Frobenius norms clear of under- and overflow
    peak = float(np.max(np.abs(A))) if A.size else 0.0
    if n == 1 or peak == 0.0:
        return np.diag(A).copy(), V, 0
    A /= peak
    target = tol * float(np.linalg.norm(A))
    rounds = _round_robin(n)

    off = _off_norm(A)
    sweeps = 0
    while off > target:
        if sweeps >= max_sweeps:
            raise NumericalFailureError(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off * peak:.3e}, target {target * peak:.3e})",
                off_norm=off * peak)
        for p, q in rounds:
            apq = A[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            app, aqq = A[p, p], A[q, q]
            # tiny apq overflows tau to inf, which correctly yields t = 0
            with np.errstate(over="ignore"):
                tau = (aqq - app) / (2.0 * apq)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c

            rp, rq = A[p, :], A[q, :]
            A[p, :] = c[:, None] * rp - s[:, None] * rq
            A[q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = A[:, p], A[:, q]
            A[:, p] = cp * c - cq * s
            A[:, q] = cp * s + cq * c
            A[p, q] = 0.0
            A[q, p] = 0.0

            vp, vq = V[:, p], V[:, q]
            V[:, p] = vp * c - vq * s
            V[:, q] = vp * s + vq * c
        A = (A + A.T) / 2.0
        sweeps += 1
        off = _off_norm(A)
    # normalized: the accumulated rotations drift from orthonormal at round-off level
    return np.einsum("ai,ai->i", V, B @ V) / np.einsum("ai,ai->i", V, V), V, sweeps


def _canonical_signs(V):
    # largest-magnitude component of each column made positive
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def decompose(op: DiscreteOperator, solver: str = "auto", tol: float = 1e-12,
              max_sweeps: int = 100) -> EigenSystem:
    """Full weighted eigendecomposition of ``op``.

    ``solver='jacobi'`` uses :func:`jacobi_eigh`; ``'lapack'`` defers to
    :func:`numpy.linalg.eigh`; ``'auto'`` picks Jacobi up to
    ``JACOBI_AUTO_LIMIT`` nodes.
    """
    if solver not in SOLVERS:
        raise InvalidArgumentError(f"unknown eigensolver {solver!r}; expected one of {SOLVERS}")
    w = op.weights
    if not np.all(w > 0):
        raise InvalidArgumentError("all quadrature weights must be positive")
    n = op.n_nodes
    if solver == "auto":
        solver = "jacobi" if n <= JACOBI_AUTO_LIMIT else "lapack"

    root = np.sqrt(w)
    B = root[:, None] * op.kernel_matrix * root[None, :]
    B = (B + B.T) / 2.0
    sweeps = 0
    if solver == "jacobi":
        lam, U, sweeps = jacobi_eigh(B, tol=tol, max_sweeps=max_sweeps)
    else:
        lam, U = np.linalg.eigh(B)

    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    V = U[:, order] / root[:, None]
    V = V / np.sqrt(np.einsum("a,ai,ai->i", w, V, V))
    V = _canonical_signs(V)

    resid = op.kernel_matrix @ (w[:, None] * V) - V * lam
    resid_w = np.sqrt(np.einsum("a,ai,ai->i", w, resid, resid))
    abs_lam = np.abs(lam)
    with np.errstate(divide="ignore"):
        per_mode = np.where(abs_lam > 0, resid_w / abs_lam, np.inf)
    top = abs_lam.max()
    scaled = float(resid_w.max() / top) if top > 0 else 0.0

    lam.setflags(write=False)
    V.setflags(write=False)
    logger.debug("decomposed N=%d with %s (%d sweeps)", n, solver, sweeps)
    return EigenSystem(lam, V, op.weights, float(per_mode.max()), scaled, solver, sweeps)


def check_definiteness(es: EigenSystem, tol: float = 0.0) -> DefinitenessReport:
    """Certify negative-definiteness: ``max lambda < -tol * |min lambda|``."""
    lam = es.eigenvalues
    lo, hi = float(lam.min()), float(lam.max())
    neg = int(np.count_nonzero(lam < 0))
    return DefinitenessReport(neg, int(lam.size - neg), hi, lo, hi < -tol * abs(lo))


def reconstruct(es: EigenSystem, psi) -> np.ndarray:
    """Spectral synthesis of ``R psi`` as ``sum_i lambda_i v_i (v_i, psi)_W``."""
    V = es.eigenvectors
    coeffs = V.T @ (es.weights * np.asarray(psi, dtype=np.float64))
    return V @ (es.eigenvalues * coeffs)
