"""Acceptance criteria, one test each.

Every test prints a single ``Cnn PASS|FAIL`` line with the measured numbers
(shown with ``pytest -s`` and repeated in the terminal summary).
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from complcharge.cli import main
from complcharge.cubature import axisym_project, build_box, build_cylinder
from complcharge.errors import InadmissibleAlphaError
from complcharge.kernel import KernelSpec
from complcharge.operator import assemble, pair_force
from complcharge.spectral import check_definiteness, decompose
from complcharge.synthesis import alpha_max, expected_matrix, strong_quadruple, weak_quadruple
from complcharge.verify import check_system, default_tolerance, interaction_matrix, pose_scan

from test_operator import oracle_pair_force

SEED = 424242
DEFAULT_CONFIG = Path(__file__).parents[1] / "configs" / "default.toml"


@pytest.fixture
def report(acceptance_log):
    def emit(number, title, passed, detail):
        line = f"C{number:02d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        print(line)
        acceptance_log.append(line)
        assert passed, line
    return emit


def max_rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.abs(b)))


def test_c01_negative_definiteness(report):
    start = time.perf_counter()
    cyl = build_cylinder(1.0, 1.0, 3, 8, 6)
    es = decompose(assemble(cyl, KernelSpec("smooth_gaussian", sigma=0.5, d=1.2)))
    elapsed = time.perf_counter() - start
    lam = es.eigenvalues
    strict = check_definiteness(es, tol=1e-12)
    ratio = lam.max() / abs(lam.min())
    ok = es.n == 144 and bool(np.all(lam < 0)) and strict.certified and elapsed < 10.0
    report(1, "negative-definiteness N=144", ok,
           f"negative={strict.negative_count}/144, max/|min|={ratio:.3e} (need < -1e-12), "
           f"runtime={elapsed:.2f}s")


def test_c02_weak_solution(report, gauss_op, gauss_es):
    lam0 = gauss_es.eigenvalues[0]
    M = interaction_matrix(gauss_op, weak_quadruple(gauss_es, 0, 1))
    verdict = check_system(M, "weak", default_tolerance(es=gauss_es))
    cross = float(np.max(np.abs(M[:2, 2:])))
    rel = abs(M[0, 1] - (-lam0)) / abs(lam0)
    ok = verdict.overall_pass and cross < 1e-10 * abs(lam0) and rel < 1e-12
    report(2, "weak quadruple (0,1)", ok,
           f"weak pass={verdict.overall_pass}, max|cross|/|l0|={cross / abs(lam0):.2e}, "
           f"I<phi,Phi> rel err={rel:.2e}")


def test_c03_strong_solution(report, gauss_op, gauss_es):
    alpha = alpha_max(gauss_es, 0, 1, 2) / 2
    q = strong_quadruple(gauss_es, 0, 1, 2, alpha)
    M = interaction_matrix(gauss_op, q)
    verdict = check_system(M, "strong", default_tolerance(es=gauss_es))
    rel = max_rel(M, expected_matrix(q))
    ok = verdict.overall_pass and rel < 1e-10
    report(3, "strong quadruple (0,1,2)", ok,
           f"strong pass={verdict.overall_pass}, margin={verdict.margin:.3e}, "
           f"max entry rel err vs closed form={rel:.2e}")


def test_c04_alpha_boundary(report, gauss_op, gauss_es):
    lam = gauss_es.eigenvalues
    bound = alpha_max(gauss_es, 0, 1, 2)
    M = interaction_matrix(gauss_op, strong_quadruple(gauss_es, 0, 1, 2, 0.99 * bound))
    limits = {"phi,Phi": -lam[0], "psi,Psi": -lam[1]}
    values = {"phi,Phi": M[0, 1], "psi,Psi": M[2, 3]}
    smaller = min(values, key=values.get)
    fraction = values[smaller] / limits[smaller]
    try:
        strong_quadruple(gauss_es, 0, 1, 2, 1.01 * bound)
        raised = False
    except InadmissibleAlphaError:
        raised = True
    ok = 0 < fraction < 0.03 and raised
    report(4, "alpha boundary", ok,
           f"I<{smaller}> at 0.99*alpha_max = {fraction:.4f} of its alpha->0 value, "
           f"1.01*alpha_max raises={raised}")


@pytest.mark.parametrize("kind", ["smooth_gaussian", "coulomb_z"])
def test_c05_oracle_equivalence(report, kind):
    rng = np.random.default_rng(SEED)
    spec = KernelSpec(kind, sigma=0.5, epsilon=0.1, d=1.2)
    worst = 0.0
    for cub in (build_cylinder(1.0, 1.0, 2, 8, 4), build_box(1.0, 1.0, 1.0, 4, 4, 4)):
        op = assemble(cub, spec)
        for _ in range(20):
            phi, psi = rng.normal(size=(2, cub.n_nodes))
            expected = oracle_pair_force(cub, spec, phi.tolist(), psi.tolist())
            worst = max(worst, abs(pair_force(op, phi, psi) - expected) / abs(expected))
    report(5, f"double-loop oracle ({kind}, N=64)", worst < 1e-12,
           f"max rel err over 2x20 random pairs={worst:.2e}")


def test_c06_self_adjointness(report, gauss_op, gauss_es, coulomb_op, coulomb_es):
    rng = np.random.default_rng(SEED)
    matrices = [interaction_matrix(gauss_op, strong_quadruple(gauss_es, 0, 1, 2)),
                interaction_matrix(coulomb_op, strong_quadruple(coulomb_es, 0, 1, 3))]
    symmetric = all(np.array_equal(M, M.T) for M in matrices)
    swaps = 0
    for op in (gauss_op, coulomb_op):
        for _ in range(50):
            phi, psi = rng.normal(size=(2, op.n_nodes))
            swaps += pair_force(op, phi, psi) == pair_force(op, psi, phi)
    ok = symmetric and swaps == 100
    report(6, "self-adjointness", ok,
           f"interaction matrices exactly symmetric={symmetric}, bitwise swaps {swaps}/100")


def test_c07_axisymmetric_invariance(report, cylinder, coulomb_spec):
    rng = np.random.default_rng(SEED)
    phi = axisym_project(cylinder, rng.normal(size=cylinder.n_nodes))
    psi = axisym_project(cylinder, rng.normal(size=cylinder.n_nodes))
    angles = 2 * math.pi * np.arange(8) / 8
    res = pose_scan(cylinder, coulomb_spec, phi, psi, ([0.0], [0.0], [coulomb_spec.d]), angles)
    v = res.values.ravel()
    spread = float(np.max(np.abs(v - v[0])) / abs(v[0]))
    report(7, "rotation invariance (coulomb_z, 8 ring angles)", spread < 1e-12,
           f"I={v[0]:.6e}, max rel spread={spread:.2e}")


def test_c08_point_charges(report):
    one = build_box(1.0, 1.0, 1.0, 1, 1, 1)
    op = assemble(one, KernelSpec("coulomb_z", epsilon=0.0, d=2.0))
    value = pair_force(op, [1.0], [1.0])
    report(8, "point charges at d=2", value == -0.25, f"I={value!r} (expect -0.25 exactly)")


def test_c09_single_pose_consistency(report, cylinder, gauss_spec, coulomb_spec):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for spec in (gauss_spec, coulomb_spec):
        op = assemble(cylinder, spec)
        es = decompose(op)
        q = weak_quadruple(es, 0, 1)
        pairs = [rng.normal(size=(2, cylinder.n_nodes)) for _ in range(3)]
        pairs.append((q.first, q.first_partner))
        for phi, psi in pairs:
            fixed = pair_force(op, phi, psi)
            scanned = pose_scan(cylinder, spec, phi, psi, ([0.0], [0.0], [spec.d]), [0.0]).max_I
            worst = max(worst, abs(scanned - fixed) / abs(fixed))
    report(9, "single-pose scan vs fixed operator", worst < 1e-12,
           f"max rel diff over both kernels={worst:.2e}")


def _run_default(workdir):
    text = DEFAULT_CONFIG.read_text().replace('"../out/', '"out/')
    cfg = workdir / "default.toml"
    workdir.mkdir()
    cfg.write_text(text)
    code = main(["run", "--config", str(cfg), "--quiet"])
    report = json.loads((workdir / "out" / "report.json").read_text())
    report.pop("generated_at")
    blobs = {p.name: p.read_bytes() for p in sorted((workdir / "out" / "cache").glob("*.bin"))}
    return code, report, blobs


def test_c10_determinism(report, tmp_path):
    code_a, report_a, blobs_a = _run_default(tmp_path / "a")
    code_b, report_b, blobs_b = _run_default(tmp_path / "b")
    same_cache = blobs_a == blobs_b and len(blobs_a) == 4
    ok = code_a == code_b == 0 and same_cache and report_a == report_b
    report(10, "CLI determinism", ok,
           f"exit codes {code_a}/{code_b}, {len(blobs_a)} cache files byte-identical={same_cache}, "
           f"reports equal modulo timestamp={report_a == report_b}")
