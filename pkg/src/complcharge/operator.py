"""Nystrom discretization of the pair-interaction operator.

The operator acts as ``(R psi)_a = sum_b K[a, b] w_b psi_b`` and the pair
interaction force is the bilinear form ``I<phi, psi> = (W phi) . K (W psi)``.
Quadrature weights are kept outside the kernel matrix so the spectral step
can work in the weighted L2 inner product.

The raw node-pair matrix is not symmetric once the right body is displaced,
so every assembled matrix is symmetrized:

* ``coulomb_z``: arithmetic mean ``(K_raw + K_raw.T) / 2``.
* ``smooth_gaussian``: geometric mean of the kernel at ``u - r`` and
  ``-u - r``, where ``u = x_a - S x_b`` and the pose is ``y -> r + S y``.
  That is ``-exp(-(|x_a - S x_b|^2 + |r|^2) / (2 sigma^2))``. Without rotation
  it equals ``-sqrt(K_raw * K_raw.T)``. A displaced Gaussian matrix is a
  diagonal similarity transform of an unshifted one, and the geometric mean
  keeps that negative spectrum. The arithmetic mean does not.

``asymmetry_norm`` records ``max |K_raw - K_raw.T| / 2`` before symmetrization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cubature import Cubature
from .errors import InvalidArgumentError
from .kernel import KernelSpec, Pose, kernel_block, limit_pose, posed_squared_distance

_ROW_BLOCK = 256


@dataclass(frozen=True)
class DiscreteOperator:
    kernel_matrix: np.ndarray
    weights: np.ndarray
    asymmetry_norm: float
    spec: KernelSpec
    cubature_meta: dict
    pose: Pose | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.weights)


def as_distribution(values, n: int, name: str = "distribution") -> np.ndarray:
    """Validate nodal charge densities: one finite value per node."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or len(v) != n:
        raise InvalidArgumentError(f"{name} must have {n} nodal values, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidArgumentError(f"{name} contains non-finite values")
    return v


def _raw_matrix(spec, nodes, posed):
    n = len(nodes)
    raw = np.empty((n, n))
    for start in range(0, n, _ROW_BLOCK):
        rows = slice(start, min(start + _ROW_BLOCK, n))
        raw[rows] = kernel_block(spec, nodes[rows], posed)
    return raw


def _gaussian_posed(spec, X, Y, pose):
    # geometric mean of k(u - r) and k(-u - r) with u = x - S y: a function of |u| and |r|
    rotated = Pose(axis=pose.axis, angle=pose.angle).apply(Y)
    shift2 = float(np.dot(pose.translation, pose.translation))
    out = np.empty((len(X), len(Y)))
    for start in range(0, len(X), _ROW_BLOCK):
        rows = slice(start, min(start + _ROW_BLOCK, len(X)))
        s2 = posed_squared_distance(X[rows], rotated)
        out[rows] = -np.exp(-(s2 + shift2) / (2.0 * spec.sigma**2))
    return out


def assemble_posed(cubature: Cubature, spec: KernelSpec, pose: Pose) -> DiscreteOperator:
    """Assemble with the right body placed by ``pose``; ``spec.d`` is ignored.

    The result is exactly symmetric whenever ``pose`` has no rotation.
    """
    nodes = cubature.nodes
    raw = _raw_matrix(spec, nodes, pose.apply(nodes))
    asymmetry = float(np.max(np.abs(raw - raw.T)) / 2.0)
    if spec.kind == "smooth_gaussian":
        K = _gaussian_posed(spec, nodes, nodes, pose)
    else:
        K = (raw + raw.T) / 2.0
    K.setflags(write=False)
    return DiscreteOperator(K, cubature.weights, asymmetry, spec,
                            dict(cubature.shape_meta), pose)


def cross_kernel(spec: KernelSpec, X, Y, pose: Pose | None = None) -> np.ndarray:
    """Symmetrized kernel between arbitrary field points ``X`` and body points ``Y``.

    Uses the same rule as assembly, so ``cross_kernel(spec, nodes, nodes)``
    reproduces the assembled matrix. ``pose`` defaults to the reference position.
    """
    pose = pose or limit_pose(spec)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if spec.kind == "smooth_gaussian":
        return _gaussian_posed(spec, X, Y, pose)
    return (kernel_block(spec, X, pose.apply(Y)) + kernel_block(spec, Y, pose.apply(X)).T) / 2.0


def assemble(cubature: Cubature, spec: KernelSpec) -> DiscreteOperator:
    """Assemble the operator at the reference position (right body at ``d * e3``)."""
    if cubature.n_nodes == 0:
        raise InvalidArgumentError("cannot assemble on an empty cubature")
    return assemble_posed(cubature, spec, limit_pose(spec))


def from_matrix(kernel_matrix, weights, spec: KernelSpec | None = None,
                asymmetry_norm: float = 0.0, cubature_meta: dict | None = None) -> DiscreteOperator:
    """Wrap a precomputed symmetric kernel matrix (cache reload, synthetic tests)."""
    K = np.array(kernel_matrix, dtype=np.float64, ndmin=2)
    w = np.array(weights, dtype=np.float64).ravel()
    if K.shape != (len(w), len(w)):
        raise InvalidArgumentError(f"kernel matrix {K.shape} does not match {len(w)} weights")
    if not np.array_equal(K, K.T):
        raise InvalidArgumentError("kernel matrix must be exactly symmetric")
    if not np.all(w > 0):
        raise InvalidArgumentError("weights must be positive")
    K.setflags(write=False)
    w.setflags(write=False)
    return DiscreteOperator(K, w, float(asymmetry_norm), spec or KernelSpec(),
                            dict(cubature_meta or {}))


def apply(op: DiscreteOperator, psi) -> np.ndarray:
    """Operator action ``(R psi)_a = sum_b K[a, b] w_b psi_b``."""
    psi = as_distribution(psi, op.n_nodes, "psi")
    return op.kernel_matrix @ (op.weights * psi)


def weighted_inner(weights, u, v) -> float:
    """Discrete L2(Q) inner product ``sum_a w_a u_a v_a``."""
    return float(np.dot(weights * u, v))


def pair_force(op: DiscreteOperator, phi, psi) -> float:
    """Pair interaction force ``I<phi, psi> = sum_ab w_a phi_a K[a, b] w_b psi_b``.

    Evaluated as the mean of both orderings so that swapping the arguments
    gives a bit-identical result.
    """
    phi = as_distribution(phi, op.n_nodes, "phi")
    psi = as_distribution(psi, op.n_nodes, "psi")
    u = op.weights * phi
    v = op.weights * psi
    K = op.kernel_matrix
    return float((np.dot(u, K @ v) + np.dot(v, K @ u)) / 2.0)
