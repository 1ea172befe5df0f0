"""``complcharge`` command line: config-driven pipeline with per-stage caching.

Stages run in the order domain -> assemble -> eig -> synth -> verify [-> scan].
``run`` executes the whole chain and computes any stage whose cache entry is
missing or stale. A stage subcommand runs one stage. It reads its
prerequisites from the cache and exits with code 4 if one is missing.

Exit codes: 0 success / all conditions hold, 1 verification failed,
2 invalid configuration or parameters, 3 numerical failure, 4 missing
prerequisite stage.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .. import __version__
from ..cubature import Cubature, build
from ..errors import (InadmissibleAlphaError, IndefiniteModeError, InvalidArgumentError,
                      InvalidPairError, NumericalFailureError, SingularKernelError)
from ..operator import assemble, from_matrix
from ..spectral import EigenSystem, check_definiteness, decompose
from ..synthesis import MEMBER_NAMES, Quadruple, expected_matrix, strong_quadruple, weak_quadruple
from ..verify import check_system, default_tolerance, interaction_matrix, pose_scan
from . import cache
from .config import ConfigError, load_config
from .export import export_quadruple

logger = logging.getLogger("complcharge")

STAGES = ("domain", "assemble", "eig", "synth", "verify", "scan")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_MISSING = 0, 1, 2, 3, 4


class MissingPrerequisite(Exception):
    def __init__(self, stage):
        super().__init__(f"missing prerequisite: run the '{stage}' stage first")
        self.stage = stage


def _clean(obj):
    """JSON-safe copy: NaN/inf become null, numpy scalars become Python floats."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_json(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(data), indent=2, sort_keys=True) + "\n")


class Pipeline:
    """Stage runner bound to one configuration and cache directory.

    With ``cascade=True`` a stale or missing prerequisite is recomputed;
    otherwise :class:`MissingPrerequisite` is raised.
    """

    def __init__(self, config, force=False, cascade=True):
        self.cfg = config
        self.force = force
        self.cascade = cascade
        self.cache_dir = Path(config.cache_dir)
        self._memo = {}
        self.hits = {}

    # -- cache helpers -------------------------------------------------
    _SECTIONS = {
        "domain": ("domain",),
        "assemble": ("domain", "kernel"),
        "eig": ("domain", "kernel", "spectral"),
        "synth": ("domain", "kernel", "spectral", "synthesis"),
    }

    def fingerprint(self, stage):
        return self.cfg.fingerprint(*self._SECTIONS[stage])

    def _entry(self, stage):
        return self.cache_dir / f"{stage}.bin"

    def get(self, stage):
        """Result of ``stage``: memoized, cached, or (cascade) computed."""
        if stage in self._memo:
            return self._memo[stage]
        hit = None if self.force else cache.read(self._entry(stage), self.fingerprint(stage))
        if hit is not None:
            logger.info("%s: cache hit (%s)", stage, self._entry(stage).name)
            self.hits[stage] = True
            result = getattr(self, f"_decode_{stage}")(*hit)
        else:
            if not self.cascade:
                raise MissingPrerequisite(stage)
            result = self.compute(stage)
        self._memo[stage] = result
        return result

    def compute(self, stage):
        logger.info("%s: computing", stage)
        self.hits[stage] = False
        result, layout, payload, meta = getattr(self, f"_build_{stage}")()
        n = self.cfg.n_nodes
        cache.write(self._entry(stage), stage, self.fingerprint(stage), n, layout, payload, meta)
        self._memo[stage] = result
        return result

    def run_stage(self, stage):
        """Produce ``stage`` itself; prerequisites follow the cascade rule."""
        hit = None if self.force else cache.read(self._entry(stage), self.fingerprint(stage))
        if hit is None:
            return self.compute(stage)
        logger.info("%s: cache hit (%s)", stage, self._entry(stage).name)
        self.hits[stage] = True
        self._memo[stage] = getattr(self, f"_decode_{stage}")(*hit)
        return self._memo[stage]

    # -- domain ----------------------------------------------------------
    def _build_domain(self):
        d = self.cfg.domain
        c = build(d["shape"], d["dimensions"], d["resolutions"])
        payload = np.concatenate([c.nodes.ravel(), c.weights])
        meta = {"shape_meta": c.shape_meta,
                "ring_ids": None if c.ring_ids is None else c.ring_ids.tolist()}
        return c, "nodes_xyz_rowmajor,weights", payload, meta

    def _decode_domain(self, header, payload):
        n = header["n"]
        meta = header["meta"]
        return Cubature(payload[:3 * n].reshape(n, 3), payload[3 * n:],
                        meta["shape_meta"], meta["ring_ids"])

    # -- assemble --------------------------------------------------------
    def _build_assemble(self):
        c = self.get("domain")
        op = assemble(c, self.cfg.kernel_spec())
        return op, "kernel_matrix_rowmajor", op.kernel_matrix, {"asymmetry_norm": op.asymmetry_norm}

    def _decode_assemble(self, header, payload):
        c = self.get("domain")
        n = header["n"]
        return from_matrix(payload.reshape(n, n), c.weights, self.cfg.kernel_spec(),
                           header["meta"]["asymmetry_norm"], c.shape_meta)

    # -- eig -------------------------------------------------------------
    def _build_eig(self):
        op = self.get("assemble")
        es = decompose(op, solver=self.cfg.spectral["solver"])
        payload = np.concatenate([es.eigenvalues, es.eigenvectors.T.ravel()])
        meta = {"residual_norm": es.residual_norm, "scaled_residual": es.scaled_residual,
                "solver": es.solver, "sweeps": es.sweeps}
        return es, "eigenvalues,eigenvector_columns", payload, _clean(meta)

    def _decode_eig(self, header, payload):
        c = self.get("domain")
        n = header["n"]
        m = header["meta"]
        lam = payload[:n]
        V = payload[n:].reshape(n, n).T.copy()
        residual = m["residual_norm"] if m["residual_norm"] is not None else math.inf
        return EigenSystem(lam, V, c.weights, residual, m["scaled_residual"],
                           m["solver"], m["sweeps"])

    # -- synth -----------------------------------------------------------
    def _build_synth(self):
        es = self.get("eig")
        s = self.cfg.synthesis
        if s["mode"] == "weak":
            q = weak_quadruple(es, s["i"], s["j"])
        else:
            q = strong_quadruple(es, s["i"], s["j"], s["k"], s.get("alpha"))
        export = self.cfg.path("export_path")
        if export is not None:
            export_quadruple(q, self.get("domain"), export)
            logger.info("synth: wrote %s", export)
        return q, "phi,Phi,psi,Psi rows", q.as_array(), q.meta

    def _decode_synth(self, header, payload):
        n = header["n"]
        rows = payload.reshape(4, n)
        q = Quadruple(*(rows[a].copy() for a in range(4)), meta=dict(header["meta"]))
        export = self.cfg.path("export_path")
        if export is not None and not export.exists():
            export_quadruple(q, self.get("domain"), export)
        return q

    # -- verify / scan ---------------------------------------------------
    def verify(self, mode=None):
        op = self.get("assemble")
        es = self.get("eig")
        q = self.get("synth")
        mode = mode or self.cfg.synthesis["mode"]
        tol = self.cfg.verify.get("tol")
        if tol is None:
            tol = default_tolerance(es=es)
        M = interaction_matrix(op, q)
        report = check_system(M, mode, tol)
        expected = expected_matrix(q)
        rel_err = float(np.max(np.abs(M - expected)) / np.max(np.abs(expected)))
        definite = check_definiteness(es)
        return {
            "eigenvalues": {"count": es.n, "first": es.eigenvalues[:10].tolist(),
                            "solver": es.solver, "sweeps": es.sweeps,
                            "residual_norm": es.residual_norm,
                            "scaled_residual": es.scaled_residual,
                            "orthonormality_error": es.orthonormality_error()},
            "definiteness": definite.as_dict(),
            "operator": {"asymmetry_norm": op.asymmetry_norm, "n_nodes": op.n_nodes},
            "quadruple": q.meta,
            "interaction_matrix": M.tolist(),
            "closed_form_matrix": expected.tolist(),
            "closed_form_max_rel_error": rel_err,
            "verification": report.as_dict(),
        }, report.overall_pass

    def scan(self):
        scan_cfg = self.cfg.verify.get("pose_scan")
        if scan_cfg is None:
            raise ConfigError("[verify.pose_scan] is not configured")
        c = self.get("domain")
        q = self.get("synth")
        members = dict(zip(MEMBER_NAMES, q.members()))
        grid = [np.linspace(*scan_cfg[k][:2], int(scan_cfg[k][2])) for k in ("r1", "r2", "r3")]
        count = scan_cfg["angle_count"]
        angles = 2.0 * np.pi * np.arange(count) / count
        results = []
        for a, b in scan_cfg["pairs"]:
            res = pose_scan(c, self.cfg.kernel_spec(), members[a], members[b], grid, angles,
                            contact_r3=scan_cfg["contact_r3"], axis=scan_cfg["axis"])
            results.append({"pair": [a, b], **res.as_dict()})
        return results


def _base_report(cfg):
    return {"tool": "complcharge", "version": __version__,
            "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "config": cfg.section("domain", "kernel", "spectral", "synthesis", "verify"),
            "config_fingerprint": cfg.fingerprint("domain", "kernel", "spectral",
                                                  "synthesis", "verify")}


def _execute(args):
    cfg = load_config(args.config)
    if getattr(args, "mode", None):
        cfg.synthesis["mode"] = args.mode
        if args.mode == "strong" and cfg.synthesis["k"] in (cfg.synthesis["i"], cfg.synthesis["j"]):
            raise ConfigError("invalid pair: perturbation index k must differ from i and j")
    stage = args.stage or "run"

    with cache.locked(cfg.cache_dir):
        if stage == "run":
            pipe = Pipeline(cfg, force=args.force, cascade=True)
            body, passed = pipe.verify()
            report = _base_report(cfg)
            report.update(body)
            report["pose_scan"] = pipe.scan() if "pose_scan" in cfg.verify else None
            report["overall_pass"] = passed
            _write_json(cfg.path("report_path"), report)
            logger.info("report written to %s (overall_pass=%s)", cfg.path("report_path"), passed)
            return EXIT_OK if passed else EXIT_FAIL

        pipe = Pipeline(cfg, force=args.force, cascade=False)
        stage_report = {"stage": stage, "config_fingerprint": None}
        if stage in Pipeline._SECTIONS:
            result = pipe.run_stage(stage)
            stage_report["config_fingerprint"] = pipe.fingerprint(stage)
            stage_report["cache_hit"] = pipe.hits.get(stage, False)
            stage_report.update(_stage_summary(stage, result))
            _write_json(pipe.cache_dir / f"{stage}.json", stage_report)
            return EXIT_OK
        if stage == "verify":
            body, passed = pipe.verify(getattr(args, "mode", None))
            report = _base_report(cfg)
            report.update(body)
            report["pose_scan"] = None
            report["overall_pass"] = passed
            _write_json(cfg.path("report_path"), report)
            return EXIT_OK if passed else EXIT_FAIL
        if stage == "scan":
            stage_report["pose_scan"] = pipe.scan()
            _write_json(pipe.cache_dir / "scan.json", stage_report)
            return EXIT_OK
    raise ConfigError(f"unknown stage {stage!r}")


def _stage_summary(stage, result):
    if stage == "domain":
        return {"n_nodes": result.n_nodes, "volume": result.volume,
                "shape_meta": result.shape_meta}
    if stage == "assemble":
        return {"n_nodes": result.n_nodes, "asymmetry_norm": result.asymmetry_norm}
    if stage == "eig":
        return {"first": result.eigenvalues[:10].tolist(),
                "definiteness": check_definiteness(result).as_dict()}
    return {"quadruple": result.meta}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="TOML run configuration")
    common.add_argument("--force", action="store_true", help="ignore cached stage results")
    common.add_argument("--quiet", action="store_true", help="only report warnings and errors")

    parser = argparse.ArgumentParser(
        prog="complcharge",
        description="Construct and verify complementary charge distributions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="full pipeline (or one --stage)")
    run.add_argument("--stage", choices=STAGES, help="run only this stage against the cache")
    for name in STAGES:
        p = sub.add_parser(name, parents=[common], help=f"run the {name} stage alone")
        if name in ("synth", "verify"):
            p.add_argument("--mode", choices=("weak", "strong"),
                           help="override [synthesis] mode")
        p.set_defaults(stage=name)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr, force=True)
    if args.command == "run" and getattr(args, "stage", None) is None:
        args.stage = None
    try:
        return _execute(args)
    except MissingPrerequisite as exc:
        logger.error("%s", exc)
        return EXIT_MISSING
    except (ConfigError, InvalidPairError, InadmissibleAlphaError, IndefiniteModeError) as exc:
        logger.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    except (NumericalFailureError, SingularKernelError) as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except InvalidArgumentError as exc:
        logger.error("invalid argument: %s", exc)
        return EXIT_CONFIG
    except cache.CacheFormatError as exc:
        logger.error("corrupt cache: %s (rerun with --force)", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
