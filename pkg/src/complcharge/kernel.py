"""Pair-interaction kernels between a point of the left body and a point of the right body.

Sign convention: positive values attract the two bodies along Ox3, negative
values repel. Charges and the Coulomb constant are set to one.

Two kinds are supported:

``smooth_gaussian``
    ``-exp(-s^2 / (2 sigma^2))`` with ``s = |x - y'|`` and ``y'`` the source
    point carried to its posed position.
``coulomb_z``
    ``(x3 - y'3) / (|x - y'|^2 + epsilon^2)^(3/2)``, the Ox3 projection of the
    softened Coulomb force on the left body.

At the reference (limit) position the right body is translated by ``d * e3``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import InvalidArgumentError, SingularKernelError

KINDS = ("smooth_gaussian", "coulomb_z")
E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "smooth_gaussian"
    sigma: float = 1.0
    epsilon: float = 0.0
    d: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "smooth_gaussian" and not (math.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidArgumentError(f"smooth_gaussian needs sigma > 0, got {self.sigma!r}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise InvalidArgumentError(f"epsilon must be >= 0, got {self.epsilon!r}")
        if not (math.isfinite(self.d) and self.d > 0):
            raise InvalidArgumentError(f"separation d must be > 0, got {self.d!r}")

    def as_dict(self) -> dict:
        return {"kind": self.kind, "sigma": float(self.sigma),
                "epsilon": float(self.epsilon), "d": float(self.d)}


@dataclass(frozen=True)
class Pose:
    """Rigid placement ``y -> translation + S y`` of the right body.

    ``S`` rotates by ``angle`` radians about the unit vector ``axis``.
    """

    translation: tuple = (0.0, 0.0, 0.0)
    axis: tuple = (0.0, 0.0, 1.0)
    angle: float = 0.0

    def __post_init__(self):
        t = tuple(float(c) for c in np.asarray(self.translation, dtype=float).ravel())
        a = tuple(float(c) for c in np.asarray(self.axis, dtype=float).ravel())
        if len(t) != 3 or len(a) != 3:
            raise InvalidArgumentError("translation and axis must be 3-vectors")
        if not all(math.isfinite(c) for c in t + a) or not math.isfinite(self.angle):
            raise InvalidArgumentError("pose components must be finite")
        if abs(math.sqrt(sum(c * c for c in a)) - 1.0) > 1e-12:
            raise InvalidArgumentError(f"rotation axis must be a unit vector, got {a}")
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "axis", a)
        object.__setattr__(self, "angle", float(self.angle))

    @property
    def is_pure_translation(self) -> bool:
        return self.angle == 0.0

    def rotation_matrix(self) -> np.ndarray:
        if self.is_pure_translation:
            return np.eye(3)
        return Rotation.from_rotvec(np.asarray(self.axis) * self.angle).as_matrix()

    def apply(self, points) -> np.ndarray:
        """Carry body points ``(M, 3)`` to their posed positions."""
        y = np.asarray(points, dtype=np.float64)
        if not self.is_pure_translation:
            y = y @ self.rotation_matrix().T
        return np.asarray(self.translation) + y

    def as_dict(self) -> dict:
        return {"translation": list(self.translation), "axis": list(self.axis),
                "angle": self.angle}


def limit_pose(spec: KernelSpec) -> Pose:
    """The reference placement: right body shifted by ``d`` along Ox3, no rotation."""
    return Pose(translation=(0.0, 0.0, spec.d))


def _squared_distance(X, Yp):
    diff = X[:, None, :] - Yp[None, :, :]
    return diff, np.einsum("abk,abk->ab", diff, diff)


def posed_squared_distance(X, Yp) -> np.ndarray:
    """Matrix of ``|x_a - y'_b|^2`` for field points X and posed source points Yp."""
    return _squared_distance(np.asarray(X, float), np.asarray(Yp, float))[1]


def kernel_block(spec: KernelSpec, X, Yp) -> np.ndarray:
    """Raw kernel ``R[a, b]`` between field points ``X`` and already-posed sources ``Yp``.

    The separation ``spec.d`` is not applied here; the caller's pose carries it.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Yp = np.atleast_2d(np.asarray(Yp, dtype=np.float64))
    diff, s2 = _squared_distance(X, Yp)
    if spec.kind == "smooth_gaussian":
        return -np.exp(-s2 / (2.0 * spec.sigma**2))
    denom2 = s2 + spec.epsilon**2
    if np.any(denom2 == 0.0):
        a, b = np.argwhere(denom2 == 0.0)[0]
        raise SingularKernelError(
            f"coulomb_z kernel is singular between field point {X[a].tolist()} "
            f"and posed source {Yp[b].tolist()} (epsilon = 0)")
    return diff[..., 2] / (denom2 * np.sqrt(denom2))


def evaluate_posed(spec: KernelSpec, x, y, pose: Pose) -> float:
    """Kernel between field point ``x`` and source ``y`` placed by ``pose``."""
    yp = pose.apply(np.asarray(y, dtype=np.float64).reshape(1, 3))
    return float(kernel_block(spec, np.asarray(x, dtype=np.float64).reshape(1, 3), yp)[0, 0])


def evaluate(spec: KernelSpec, x, y) -> float:
    """Kernel at the reference position, ``y`` shifted by ``d * e3``."""
    return evaluate_posed(spec, x, y, limit_pose(spec))
