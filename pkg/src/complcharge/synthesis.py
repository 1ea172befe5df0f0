"""Complementary quadruples built from eigenfunctions of the interaction operator.

A quadruple holds two complementary pairs: ``(first, first_partner)`` and
``(second, second_partner)``.

*Weak* quadruples use two eigenfunctions and their negatives. Each pair
attracts and all cross-pair forces vanish by orthogonality.

*Strong* quadruples add ``alpha * v_k`` to all four members, using a third
eigenfunction. Every cross-pair force then becomes
``alpha^2 * lambda_k < 0``. Both in-pair forces stay positive while
``alpha < alpha_max``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InadmissibleAlphaError, IndefiniteModeError, InvalidPairError
from .spectral import EigenSystem

MEMBER_NAMES = ("phi", "Phi", "psi", "Psi")


@dataclass(frozen=True)
class Quadruple:
    first: np.ndarray
    first_partner: np.ndarray
    second: np.ndarray
    second_partner: np.ndarray
    meta: dict = field(default_factory=dict)

    def members(self):
        """The four distributions in the fixed order (phi, Phi, psi, Psi)."""
        return (self.first, self.first_partner, self.second, self.second_partner)

    def as_array(self) -> np.ndarray:
        return np.vstack(self.members())

    @property
    def mode(self) -> str:
        return self.meta.get("mode", "weak")

    def scaled(self, factor: float) -> "Quadruple":
        return Quadruple(*(factor * m for m in self.members()), meta=dict(self.meta))


def _eigenvalues(es: EigenSystem, *indices):
    n = es.n
    for idx in indices:
        if not (isinstance(idx, (int, np.integer)) and 0 <= idx < n):
            raise InvalidPairError(f"eigen index {idx!r} outside [0, {n})")
    if len(set(int(i) for i in indices)) != len(indices):
        raise InvalidPairError(f"eigen indices must be distinct, got {tuple(indices)}")
    lams = [float(es.eigenvalues[i]) for i in indices]
    for idx, lam in zip(indices, lams):
        if not lam < 0:
            raise IndefiniteModeError(
                f"eigenvalue {idx} is {lam:.6g}; the construction needs a strictly negative mode")
    return lams


def weak_quadruple(es: EigenSystem, i: int, j: int) -> Quadruple:
    """``(v_i, -v_i, v_j, -v_j)`` for two distinct negative modes."""
    lam_i, lam_j = _eigenvalues(es, i, j)
    vi = np.array(es.eigenvectors[:, i])
    vj = np.array(es.eigenvectors[:, j])
    meta = {"mode": "weak", "i": int(i), "j": int(j), "k": None, "alpha": None,
            "lambda_i": lam_i, "lambda_j": lam_j, "lambda_k": None}
    return Quadruple(vi, -vi, vj, -vj, meta)


def alpha_bound(lam_i: float, lam_j: float, lam_k: float) -> float:
    """Largest perturbation keeping ``-lambda_i + alpha^2 lambda_k > 0`` and the j analogue."""
    return math.sqrt(min(abs(lam_i), abs(lam_j)) / abs(lam_k))


def alpha_max(es: EigenSystem, i: int, j: int, k: int) -> float:
    lam_i, lam_j, lam_k = _eigenvalues(es, i, j, k)
    return alpha_bound(lam_i, lam_j, lam_k)


def strong_quadruple(es: EigenSystem, i: int, j: int, k: int,
                     alpha: float | None = None) -> Quadruple:
    """Perturb the weak quadruple of modes ``i, j`` by ``alpha * v_k`` on every member.

    ``alpha`` defaults to ``alpha_max / 2`` and must lie in ``(0, alpha_max)``.
    """
    lam_i, lam_j, lam_k = _eigenvalues(es, i, j, k)
    bound = alpha_bound(lam_i, lam_j, lam_k)
    if alpha is None:
        alpha = bound / 2.0
    alpha = float(alpha)
    if not (0.0 < alpha < bound):
        raise InadmissibleAlphaError(
            f"alpha = {alpha:.6g} outside the admissible interval (0, {bound:.6g})")
    q = _perturbed(es, i, j, k, alpha)
    q.meta["alpha_max"] = bound
    return q


def _perturbed(es, i, j, k, alpha):
    # no admissibility checks: alpha = 0 must reproduce the weak construction
    vi = es.eigenvectors[:, i]
    vj = es.eigenvectors[:, j]
    bump = alpha * es.eigenvectors[:, k]
    lam = es.eigenvalues
    meta = {"mode": "strong", "i": int(i), "j": int(j), "k": int(k), "alpha": float(alpha),
            "lambda_i": float(lam[i]), "lambda_j": float(lam[j]), "lambda_k": float(lam[k])}
    return Quadruple(vi + bump, -vi + bump, vj + bump, -vj + bump, meta)


def closed_form_matrix(lam_i: float, lam_j: float, lam_k: float = 0.0,
                       alpha: float = 0.0) -> np.ndarray:
    """Interaction matrix over (phi, Phi, psi, Psi) implied by orthonormal eigenmodes.

    With ``alpha = 0`` this is the weak-quadruple matrix.
    """
    c = alpha * alpha * lam_k
    return np.array([
        [lam_i + c, -lam_i + c, c, c],
        [-lam_i + c, lam_i + c, c, c],
        [c, c, lam_j + c, -lam_j + c],
        [c, c, -lam_j + c, lam_j + c],
    ])


def expected_matrix(q: Quadruple) -> np.ndarray:
    m = q.meta
    if m.get("mode") == "strong":
        return closed_form_matrix(m["lambda_i"], m["lambda_j"], m["lambda_k"], m["alpha"])
    return closed_form_matrix(m["lambda_i"], m["lambda_j"])
