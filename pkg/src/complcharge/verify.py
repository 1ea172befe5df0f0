"""Complementarity inequality systems and pose scans.

Conditions are evaluated on the symmetric 4x4 interaction matrix over
``(phi, Phi, psi, Psi)``. There are ten distinct conditions. The two in-pair
forces must be strictly positive. The eight remaining entries are self
forces and cross-pair forces. They must be strictly negative in ``strong``
mode and non-positive in ``weak`` mode, both up to a tolerance band ``tol``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .cubature import Cubature
from .errors import InvalidArgumentError
from .kernel import KernelSpec, Pose
from .operator import DiscreteOperator, as_distribution, assemble_posed, pair_force
from .spectral import EigenSystem
from .synthesis import MEMBER_NAMES, Quadruple

MODES = ("weak", "strong")

# (name, row, col, sign): sign +1 requires a positive force, -1 a negative one
CONDITIONS = (
    ("I<phi,Phi> > 0", 0, 1, +1),
    ("I<psi,Psi> > 0", 2, 3, +1),
    ("I<phi,phi> < 0", 0, 0, -1),
    ("I<Phi,Phi> < 0", 1, 1, -1),
    ("I<psi,psi> < 0", 2, 2, -1),
    ("I<Psi,Psi> < 0", 3, 3, -1),
    ("I<phi,psi> < 0", 0, 2, -1),
    ("I<phi,Psi> < 0", 0, 3, -1),
    ("I<Phi,psi> < 0", 1, 2, -1),
    ("I<Phi,Psi> < 0", 1, 3, -1),
)


@dataclass(frozen=True)
class Condition:
    name: str
    value: float
    required_relation: str
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value,
                "required_relation": self.required_relation, "passed": self.passed}


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one inequality system.

    ``margin`` is the smallest signed slack over the strict conditions: the
    value itself for ``> 0`` conditions, its negative for strict ``< 0``
    ones. Positive margin means every strict condition holds with room.
    """

    matrix: np.ndarray
    mode: str
    tol: float
    conditions: list
    overall_pass: bool
    margin: float

    def failures(self):
        return [c for c in self.conditions if not c.passed]

    def as_dict(self) -> dict:
        return {"mode": self.mode, "tol": self.tol,
                "labels": list(MEMBER_NAMES),
                "matrix": self.matrix.tolist(),
                "conditions": [c.as_dict() for c in self.conditions],
                "overall_pass": self.overall_pass, "margin": self.margin}


def interaction_matrix(op: DiscreteOperator, q: Quadruple) -> np.ndarray:
    """Pair forces between all members of ``q``, exactly symmetric."""
    members = [as_distribution(m, op.n_nodes, name)
               for m, name in zip(q.members(), MEMBER_NAMES)]
    M = np.empty((4, 4))
    for a, b in itertools.combinations_with_replacement(range(4), 2):
        M[a, b] = M[b, a] = pair_force(op, members[a], members[b])
    return M


def default_tolerance(matrix=None, es: EigenSystem | None = None) -> float:
    """``1e-10 * max|lambda|`` with eigen data, else ``1e-12 * max|entry|``."""
    if es is not None:
        return 1e-10 * float(np.max(np.abs(es.eigenvalues)))
    return 1e-12 * float(np.max(np.abs(matrix)))


def check_system(matrix, mode: str = "strong", tol: float | None = None) -> VerificationReport:
    """Evaluate the ten distinct complementarity conditions on ``matrix``."""
    if mode not in MODES:
        raise InvalidArgumentError(f"mode must be one of {MODES}, got {mode!r}")
    M = np.asarray(matrix, dtype=np.float64)
    if M.shape != (4, 4) or not np.all(np.isfinite(M)):
        raise InvalidArgumentError("interaction matrix must be a finite 4x4 array")
    if tol is None:
        tol = default_tolerance(M)
    tol = float(tol)

    conditions = []
    slacks = []
    for name, a, b, sign in CONDITIONS:
        value = float(M[a, b])
        if sign > 0:
            relation, passed = f"> {tol:.3e}", value > tol
            slacks.append(value)
        elif mode == "strong":
            relation, passed = f"< {-tol:.3e}", value < -tol
            slacks.append(-value)
        else:
            relation, passed = f"<= {tol:.3e}", value <= tol
        conditions.append(Condition(name, value, relation, bool(passed)))
    overall = all(c.passed for c in conditions)
    return VerificationReport(M, mode, tol, conditions, overall, float(min(slacks)))


@dataclass(frozen=True)
class PoseScanResult:
    grid_spec: dict
    values: np.ndarray = field(repr=False)
    min_I: float
    max_I: float
    argmin_pose: Pose
    argmax_pose: Pose
    contact_max_I: float
    contact_all_negative: bool
    attracting_pose_exists: bool

    def as_dict(self) -> dict:
        return {"grid_spec": self.grid_spec, "min_I": self.min_I, "max_I": self.max_I,
                "argmin_pose": self.argmin_pose.as_dict(),
                "argmax_pose": self.argmax_pose.as_dict(),
                "contact_max_I": self.contact_max_I,
                "contact_all_negative": self.contact_all_negative,
                "attracting_pose_exists": self.attracting_pose_exists}


def posed_pair_force(cubature: Cubature, spec: KernelSpec, phi, psi, pose: Pose) -> float:
    """Pair force with the right body placed by ``pose`` instead of the ``d * e3`` shift."""
    return pair_force(assemble_posed(cubature, spec, pose), phi, psi)


def _grid_axis(values, name):
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgumentError(f"{name} grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} grid values must be finite")
    return arr


def pose_scan(cubature: Cubature, spec: KernelSpec, phi, psi, r_grid, angle_grid,
              contact_r3: float | None = None, axis=(0.0, 0.0, 1.0)) -> PoseScanResult:
    """Exhaustive scan of the pair force over translations and rotations.

    ``r_grid`` is a triple of 1-D value lists for (r1, r2, r3); ``angle_grid``
    lists rotation angles about ``axis``. Poses with ``r3 == contact_r3``
    form the contact set (``contact_r3`` defaults to the smallest r3).
    """
    n = cubature.n_nodes
    phi = as_distribution(phi, n, "phi")
    psi = as_distribution(psi, n, "psi")
    if len(r_grid) != 3:
        raise InvalidArgumentError("r_grid needs value lists for r1, r2 and r3")
    r1, r2, r3 = (_grid_axis(g, name) for g, name in zip(r_grid, ("r1", "r2", "r3")))
    angles = _grid_axis(angle_grid, "angle")
    if contact_r3 is None:
        contact_r3 = float(r3.min())
    contact_r3 = float(contact_r3)
    slack = 1e-12 * max(1.0, abs(contact_r3))
    if np.any(r3 < contact_r3 - slack):
        raise InvalidArgumentError(
            f"r3 grid goes below the contact separation {contact_r3} (bodies would overlap)")

    values = np.empty((r1.size, r2.size, r3.size, angles.size))
    for idx in itertools.product(*(range(s) for s in values.shape)):
        a, b, c, t = idx
        pose = Pose((r1[a], r2[b], r3[c]), axis, angles[t])
        values[idx] = posed_pair_force(cubature, spec, phi, psi, pose)

    def pose_at(flat):
        a, b, c, t = np.unravel_index(flat, values.shape)
        return Pose((r1[a], r2[b], r3[c]), axis, angles[t])

    contact = np.abs(r3 - contact_r3) <= slack
    contact_max = float(values[:, :, contact, :].max()) if contact.any() else math.nan
    grid_spec = {"r1": r1.tolist(), "r2": r2.tolist(), "r3": r3.tolist(),
                 "angles": angles.tolist(), "axis": [float(x) for x in axis],
                 "contact_r3": contact_r3}
    return PoseScanResult(
        grid_spec=grid_spec,
        values=values,
        min_I=float(values.min()),
        max_I=float(values.max()),
        argmin_pose=pose_at(int(np.argmin(values))),
        argmax_pose=pose_at(int(np.argmax(values))),
        contact_max_I=contact_max,
        contact_all_negative=bool(contact.any() and contact_max < 0),
        attracting_pose_exists=bool(values.max() > 0),
    )
