"""Midpoint cubatures of the body domain and the axisymmetric projection.

Both bodies share one cubature. Nodes sit at cell centroids and every weight
is the exact volume of its cell, so the weights partition the body volume.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, UnsupportedDomainError


@dataclass(frozen=True)
class Cubature:
    """Quadrature nodes ``(N, 3)`` and positive weights ``(N,)`` on a body.

    ``ring_ids`` is set for cylinder cubatures only: nodes that share a radial
    and an axial cell carry the same id.
    """

    nodes: np.ndarray
    weights: np.ndarray
    shape_meta: dict = field(default_factory=dict)
    ring_ids: np.ndarray | None = None

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=np.float64).reshape(-1, 3)
        weights = np.array(self.weights, dtype=np.float64).ravel()
        if len(nodes) == 0:
            raise InvalidArgumentError("a cubature needs at least one node")
        if len(nodes) != len(weights):
            raise InvalidArgumentError(
                f"{len(nodes)} nodes but {len(weights)} weights")
        if not np.all(np.isfinite(nodes)):
            raise InvalidArgumentError("node coordinates must be finite")
        if not np.all(weights > 0):
            raise InvalidArgumentError("cubature weights must be positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if self.ring_ids is not None:
            ring_ids = np.array(self.ring_ids, dtype=np.int64).ravel()
            if len(ring_ids) != len(nodes):
                raise InvalidArgumentError("one ring id per node required")
            ring_ids.setflags(write=False)
            object.__setattr__(self, "ring_ids", ring_ids)

    @property
    def n_nodes(self) -> int:
        return len(self.weights)

    @property
    def volume(self) -> float:
        return math.fsum(self.weights)

    def __len__(self):
        return self.n_nodes


def _check_positive(**values):
    for name, value in values.items():
        if not (np.isfinite(value) and value > 0):
            raise InvalidArgumentError(f"{name} must be positive, got {value!r}")


def _check_count(**values):
    for name, value in values.items():
        if int(value) != value or value < 1:
            raise InvalidArgumentError(f"{name} must be an integer >= 1, got {value!r}")


def build_cylinder(radius: float, height: float, nr: int, ntheta: int, nz: int) -> Cubature:
    """Annular-sector cells of the cylinder ``x1^2 + x2^2 <= radius^2, 0 <= x3 <= height``.

    Nodes are ordered z-major, then ring, then angle. Angle index ``t`` sits
    at ``(2t + 1) * pi / ntheta`` so that a rotation by ``2 pi / ntheta``
    about Ox3 permutes the nodes of every ring.
    """
    _check_positive(radius=radius, height=height)
    _check_count(nr=nr, ntheta=ntheta, nz=nz)
    nr, ntheta, nz = int(nr), int(ntheta), int(nz)

    dtheta = 2.0 * math.pi / ntheta
    dz = height / nz
    # centroid of an annular sector: 2/3 (r1^3 - r0^3)/(r1^2 - r0^2) * sinc(dtheta / 2)
    half = dtheta / 2.0
    sinc = math.sin(half) / half

    nodes, weights, ring_ids = [], [], []
    for iz in range(nz):
        z = (iz + 0.5) * dz
        for ir in range(nr):
            r0 = radius * ir / nr
            r1 = radius * (ir + 1) / nr
            rc = 2.0 / 3.0 * (r1**3 - r0**3) / (r1**2 - r0**2) * sinc
            if ntheta == 1:
                rc = 0.0
            w = 0.5 * (r1**2 - r0**2) * dtheta * dz
            for it in range(ntheta):
                theta = (2 * it + 1) * math.pi / ntheta
                nodes.append((rc * math.cos(theta), rc * math.sin(theta), z))
                weights.append(w)
                ring_ids.append(iz * nr + ir)

    meta = {"shape": "cylinder", "radius": float(radius), "height": float(height),
            "nr": nr, "ntheta": ntheta, "nz": nz}
    return Cubature(np.array(nodes), np.array(weights), meta, np.array(ring_ids))


def build_box(lx: float, ly: float, lz: float, nx: int, ny: int, nz: int) -> Cubature:
    """Midpoint grid on ``[-lx/2, lx/2] x [-ly/2, ly/2] x [0, lz]``."""
    _check_positive(lx=lx, ly=ly, lz=lz)
    _check_count(nx=nx, ny=ny, nz=nz)
    nx, ny, nz = int(nx), int(ny), int(nz)

    xs = (np.arange(nx) + 0.5) * (lx / nx) - lx / 2.0
    ys = (np.arange(ny) + 0.5) * (ly / ny) - ly / 2.0
    zs = (np.arange(nz) + 0.5) * (lz / nz)
    Z, Y, X = np.meshgrid(zs, ys, xs, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    weights = np.full(len(nodes), (lx / nx) * (ly / ny) * (lz / nz))

    meta = {"shape": "box", "lx": float(lx), "ly": float(ly), "lz": float(lz),
            "nx": nx, "ny": ny, "nz": nz}
    return Cubature(nodes, weights, meta)


def build(shape: str, dimensions: dict, resolutions: dict) -> Cubature:
    """Dispatch on a shape name with keyword dictionaries (the config layout)."""
    if shape == "cylinder":
        return build_cylinder(dimensions["radius"], dimensions["height"],
                              resolutions["nr"], resolutions["ntheta"], resolutions["nz"])
    if shape == "box":
        return build_box(dimensions["lx"], dimensions["ly"], dimensions["lz"],
                         resolutions["nx"], resolutions["ny"], resolutions["nz"])
    raise InvalidArgumentError(f"unknown shape {shape!r}; expected 'cylinder' or 'box'")


def axisym_project(cubature: Cubature, values) -> np.ndarray:
    """Replace every nodal value by the weighted mean over its ring.

    Total charge ``sum(w * v)`` is conserved and the projection is idempotent.
    """
    if cubature.ring_ids is None:
        raise UnsupportedDomainError(
            f"{cubature.shape_meta.get('shape', 'this')} cubature has no ring structure")
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (cubature.n_nodes,):
        raise InvalidArgumentError(
            f"expected {cubature.n_nodes} nodal values, got shape {v.shape}")

    ids = cubature.ring_ids
    w = cubature.weights
    n_rings = int(ids.max()) + 1
    mean = np.bincount(ids, weights=w * v, minlength=n_rings) / \
        np.bincount(ids, weights=w, minlength=n_rings)
    lo = np.full(n_rings, np.inf)
    hi = np.full(n_rings, -np.inf)
    np.minimum.at(lo, ids, v)
    np.maximum.at(hi, ids, v)
    # rings that are already constant keep their value bit-for-bit
    mean = np.where(lo == hi, lo, mean)
    return mean[ids]
