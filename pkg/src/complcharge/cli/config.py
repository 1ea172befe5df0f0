"""Run configuration: TOML file -> validated nested dictionaries."""
from __future__ import annotations

import copy
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import InvalidArgumentError
from ..kernel import KernelSpec
from ..spectral import SOLVERS

MAX_NODES = 4096
CACHE_ENV = "COMPLCHARGE_CACHE_DIR"

DEFAULTS = {
    "domain": {"shape": "cylinder",
               "dimensions": {"radius": 1.0, "height": 1.0},
               "resolutions": {"nr": 3, "ntheta": 8, "nz": 6}},
    "kernel": {"kind": "smooth_gaussian", "sigma": 0.5, "epsilon": 0.0, "d": 1.2},
    "spectral": {"solver": "auto"},
    "synthesis": {"mode": "strong", "i": 0, "j": 1, "k": 2},
    "verify": {},
    "output": {"report_path": "report.json", "export_path": "quadruple.csv",
               "cache_dir": ".complcharge-cache"},
}

_DIMENSIONS = {"cylinder": ("radius", "height"), "box": ("lx", "ly", "lz")}
_RESOLUTIONS = {"cylinder": ("nr", "ntheta", "nz"), "box": ("nx", "ny", "nz")}
_PAIR_NAMES = ("phi", "Phi", "psi", "Psi")


class ConfigError(InvalidArgumentError):
    pass


def _merge(base, extra):
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _number(section, key, value, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"[{section}] {key} must be an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"[{section}] {key} must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _unknown(section, table, allowed):
    extra = set(table) - set(allowed)
    if extra:
        raise ConfigError(f"[{section}] unknown keys: {sorted(extra)}")


@dataclass
class RunConfig:
    domain: dict
    kernel: dict
    spectral: dict
    synthesis: dict
    verify: dict
    output: dict
    base_dir: Path

    @property
    def n_nodes(self) -> int:
        n = 1
        for v in self.domain["resolutions"].values():
            n *= v
        return n

    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(**self.kernel)

    def path(self, key) -> Path | None:
        value = self.output.get(key)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def cache_dir(self) -> Path:
        override = os.environ.get(CACHE_ENV)
        if override:
            return Path(override)
        return self.path("cache_dir")

    def section(self, *names) -> dict:
        return {name: getattr(self, name) for name in names}

    def fingerprint(self, *names) -> str:
        canon = json.dumps(self.section(*names), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def validate(raw: dict, base_dir: Path | str = ".") -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a table")
    _unknown("top level", raw, DEFAULTS)
    cfg = _merge(DEFAULTS, raw)

    dom = cfg["domain"]
    _unknown("domain", dom, ("shape", "dimensions", "resolutions"))
    shape = dom["shape"]
    if shape not in _DIMENSIONS:
        raise ConfigError(f"[domain] shape must be 'cylinder' or 'box', got {shape!r}")
    if "shape" in raw.get("domain", {}) and shape != DEFAULTS["domain"]["shape"]:
        # switching shapes drops the cylinder defaults
        dom["dimensions"] = dict(raw["domain"].get("dimensions", {}))
        dom["resolutions"] = dict(raw["domain"].get("resolutions", {}))
    dims, res = {}, {}
    for key in _DIMENSIONS[shape]:
        if key not in dom["dimensions"]:
            raise ConfigError(f"[domain.dimensions] missing {key!r} for shape {shape!r}")
        dims[key] = _number("domain.dimensions", key, dom["dimensions"][key], positive=True)
    _unknown("domain.dimensions", dom["dimensions"], _DIMENSIONS[shape])
    for key in _RESOLUTIONS[shape]:
        if key not in dom["resolutions"]:
            raise ConfigError(f"[domain.resolutions] missing {key!r} for shape {shape!r}")
        res[key] = _number("domain.resolutions", key, dom["resolutions"][key],
                           positive=True, integer=True)
    _unknown("domain.resolutions", dom["resolutions"], _RESOLUTIONS[shape])
    domain = {"shape": shape, "dimensions": dims, "resolutions": res}

    ker = cfg["kernel"]
    _unknown("kernel", ker, ("kind", "sigma", "epsilon", "d"))
    kernel = {"kind": ker["kind"]}
    for key in ("sigma", "epsilon", "d"):
        kernel[key] = _number("kernel", key, ker[key])
    try:
        KernelSpec(**kernel)
    except InvalidArgumentError as exc:
        raise ConfigError(f"[kernel] {exc}") from None

    spec = cfg["spectral"]
    _unknown("spectral", spec, ("solver",))
    if spec["solver"] not in SOLVERS:
        raise ConfigError(f"[spectral] solver must be one of {SOLVERS}, got {spec['solver']!r}")
    spectral = {"solver": spec["solver"]}

    syn = cfg["synthesis"]
    _unknown("synthesis", syn, ("mode", "i", "j", "k", "alpha"))
    if syn["mode"] not in ("weak", "strong"):
        raise ConfigError(f"[synthesis] mode must be 'weak' or 'strong', got {syn['mode']!r}")
    synthesis = {"mode": syn["mode"]}
    for key in ("i", "j", "k"):
        synthesis[key] = _number("synthesis", key, syn[key], integer=True)
        if synthesis[key] < 0:
            raise ConfigError(f"[synthesis] {key} must be >= 0")
    if synthesis["i"] == synthesis["j"]:
        raise ConfigError("[synthesis] invalid pair: eigen indices i and j must differ")
    if synthesis["mode"] == "strong" and synthesis["k"] in (synthesis["i"], synthesis["j"]):
        raise ConfigError("[synthesis] invalid pair: perturbation index k must differ from i and j")
    if syn.get("alpha") is not None:
        synthesis["alpha"] = _number("synthesis", "alpha", syn["alpha"], positive=True)

    ver = cfg["verify"]
    _unknown("verify", ver, ("tol", "pose_scan"))
    verify = {}
    if ver.get("tol") is not None:
        verify["tol"] = _number("verify", "tol", ver["tol"])
        if verify["tol"] < 0:
            raise ConfigError("[verify] tol must be >= 0")
    if ver.get("pose_scan") is not None:
        verify["pose_scan"] = _validate_scan(ver["pose_scan"], kernel["d"])

    out = cfg["output"]
    _unknown("output", out, ("report_path", "export_path", "cache_dir"))
    output = {k: (str(v) if v is not None else None) for k, v in out.items()}

    rc = RunConfig(domain, kernel, spectral, synthesis, verify, output, Path(base_dir))
    if rc.n_nodes > MAX_NODES:
        raise ConfigError(f"[domain] {rc.n_nodes} nodes exceed the cap of {MAX_NODES}")
    return rc


def _range(section, key, value):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value), float(value), 1]
    if not (isinstance(value, list) and len(value) == 3):
        raise ConfigError(f"[{section}] {key} must be [start, stop, count] or a number")
    start = _number(section, key, value[0])
    stop = _number(section, key, value[1])
    count = _number(section, key, value[2], positive=True, integer=True)
    return [start, stop, count]


def _validate_scan(scan, d):
    section = "verify.pose_scan"
    _unknown(section, scan, ("r1", "r2", "r3", "angle_count", "axis", "contact_r3", "pairs"))
    out = {"r1": _range(section, "r1", scan.get("r1", 0.0)),
           "r2": _range(section, "r2", scan.get("r2", 0.0)),
           "r3": _range(section, "r3", scan.get("r3", d)),
           "angle_count": _number(section, "angle_count", scan.get("angle_count", 1),
                                  positive=True, integer=True)}
    axis = scan.get("axis", [0.0, 0.0, 1.0])
    if not (isinstance(axis, list) and len(axis) == 3):
        raise ConfigError(f"[{section}] axis must be a 3-vector")
    out["axis"] = [_number(section, "axis", a) for a in axis]
    if abs(sum(a * a for a in out["axis"]) ** 0.5 - 1.0) > 1e-12:
        raise ConfigError(f"[{section}] axis must be a unit vector")
    r3_lo = min(out["r3"][0], out["r3"][1])
    contact = scan.get("contact_r3", r3_lo)
    out["contact_r3"] = _number(section, "contact_r3", contact)
    if r3_lo < out["contact_r3"]:
        raise ConfigError(f"[{section}] r3 range starts below contact_r3")
    pairs = scan.get("pairs", [["phi", "Phi"], ["psi", "Psi"], ["phi", "psi"]])
    for pair in pairs:
        if not (isinstance(pair, list) and len(pair) == 2 and all(p in _PAIR_NAMES for p in pair)):
            raise ConfigError(f"[{section}] pairs entries must name two of {_PAIR_NAMES}")
    out["pairs"] = [list(p) for p in pairs]
    return out


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from None
    return validate(raw, path.resolve().parent)
