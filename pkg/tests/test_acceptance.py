"""Acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line with the measured
quantity, its tolerance and the runtime against its budget.  The lines are
repeated in the pytest terminal summary.  Failing criteria are left failing.
"""

import time
from collections import defaultdict

import numpy as np
import pytest

from caqer.bounds import init_block_sdp_duals, iterated_block_dual, iterative_dual, pauli_certificate
from caqer.channels import (amplitude_damping, depolarizing, depolarizing_spec,
                            pure_state_rotation)
from caqer.codes import five_qubit_code, pauli_error_coefficients, shor_code, steane_code
from caqer.experiments import ExperimentSpec, emit_csv, run_sweep
from caqer.fidelity import Ensemble, entanglement_fidelity_kraus
from caqer.opalg import (closest_isometry, dket, haar_isometry, hs_inner, kron_conj_apply,
                         ptrace_left, ptrace_right, undket)
from caqer.recovery import block_eig_qer, eig_qer, optimal_recovery, standard_qec_recovery
from caqer.sdp import QerSdpProblem, solve_qer_sdp

from conftest import ACCEPTANCE_LINES, data_matrix

pytestmark = pytest.mark.slow

AMP_GRID = tuple(round(0.025 * i, 10) for i in range(17))  # gamma in [0, 0.4]
THETA = 5 * np.pi / 12
# every recovery fidelity and feasible dual bound produced here, keyed by
# (code, channel, parameter); criterion 8 checks them against each other
PRODUCED = defaultdict(lambda: {"fidelity": [], "bound": []})


def record(key, fidelity=None, bound=None, point=None):
    if fidelity is not None:
        PRODUCED[key]["fidelity"].append(float(fidelity))
    if point is not None and point.feasible:
        PRODUCED[key]["bound"].append(float(point.bound))
    if bound is not None:
        PRODUCED[key]["bound"].append(float(bound))


def report(n, ok, detail, t0, budget):
    dt = time.perf_counter() - t0
    ok = ok and dt < budget
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}  [{dt:.1f} s, budget {budget:g} s]"
    print(line)
    ACCEPTANCE_LINES[n] = line
    assert ok, line


class _AmpPoint:
    """Five-qubit code under amplitude damping, shared by criteria 6, 9 and 11."""

    cache = {}

    @classmethod
    def get(cls, g):
        if g not in cls.cache:
            code = five_qubit_code()
            C = data_matrix(code, amplitude_damping(g))
            cls.cache[g] = {"C": C, "code": code}
        return cls.cache[g]

    @classmethod
    def item(cls, g, name):
        pt = cls.get(g)
        if name not in pt:
            C = pt["C"]
            if name == "eig":
                pt[name] = eig_qer(C)
            elif name == "qec":
                pt[name] = standard_qec_recovery(pt["code"])
            elif name == "block2":
                pt[name] = block_eig_qer(C, 2)
            elif name == "opt":
                pt[name] = optimal_recovery(C)
            elif name == "iter_block_sdp":
                pairs = cls.item(g, "block2").dual_pairs()
                pt[name] = iterative_dual(C, init_block_sdp_duals(pairs, C.d_C, C))
            elif name == "iterated":
                pt[name] = iterated_block_dual(C, cls.item(g, "block2").dual_pairs())
        return pt[name]


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_criterion_01_double_ket_algebra():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        m, n, p, q = rng.integers(1, 6, size=4)
        A, B = crandn(rng, m, n), crandn(rng, m, n)
        worst = max(worst, np.max(np.abs(undket(dket(A), m, n) - A)))
        worst = max(worst, abs(hs_inner(A, B) - np.trace(A.conj().T @ B)))
        A2, B2, X = crandn(rng, m, p), crandn(rng, n, q), crandn(rng, p, q)
        worst = max(worst, np.max(np.abs(kron_conj_apply(A2, B2, dket(X), (p, q))
                                          - dket(A2 @ X @ B2.conj().T))))
        v = dket(A)
        M = np.outer(v, v.conj())
        worst = max(worst, np.max(np.abs(ptrace_right(M, (m, n)) - A @ A.conj().T)))
        worst = max(worst, np.max(np.abs(ptrace_left(M, (m, n)) - (A.conj().T @ A).T)))
    report(1, worst <= 1e-12, f"max error {worst:.2e} (tol 1e-12, 100 instances)", t0, 5)


def test_criterion_02_closest_isometry():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst_identity, beaten = 0.0, 0
    trials = 0
    for cols in (8, 32):
        for _ in range(50):
            X = crandn(rng, 2, cols)
            R = closest_isometry(X, 2)
            s = np.linalg.svd(X, compute_uv=False)
            best = 2 * np.real(np.trace(X.conj().T @ R))
            worst_identity = max(worst_identity, abs(best - 2 * s.sum()))
            for _ in range(1000):
                W = haar_isometry(cols, 2, rng).conj().T
                beaten += 2 * np.real(np.trace(X.conj().T @ W)) > best + 1e-12
            trials += 1
    ok = worst_identity <= 1e-10 and beaten == 0
    report(2, ok, f"2Re tr(X^+R) - 2 sum(s) max {worst_identity:.2e} (tol 1e-10), "
                  f"{beaten} of {trials * 1000} random isometries did better", t0, 30)


DEPOL_GRID = (0.01, 0.05, 0.1, 0.2)


def test_criterion_03_sdp_vs_pauli_oracle():
    t0 = time.perf_counter()
    code = five_qubit_code()
    worst, worst_gap = 0.0, 0.0
    for p in DEPOL_GRID:
        C = data_matrix(code, depolarizing(p))
        oracle = pauli_error_coefficients(code, depolarizing_spec(p, 5)).optimal_fidelity()
        sol = solve_qer_sdp(QerSdpProblem(C))
        worst = max(worst, abs(sol.primal_value - oracle))
        worst_gap = max(worst_gap, sol.gap)
        record(("five_qubit", "depolarizing", p), fidelity=sol.primal_value,
               bound=sol.dual_value if sol.dual_margin >= -1e-8 else None)
    ok = worst <= 1e-6 and worst_gap <= 1e-7
    report(3, ok, f"max |SDP - oracle| {worst:.2e} (tol 1e-6), max gap {worst_gap:.2e} "
                  f"(tol 1e-7)", t0, 300)


def test_criterion_04_eigqer_pauli_optimal():
    t0 = time.perf_counter()
    code = five_qubit_code()
    worst = 0.0
    for p in DEPOL_GRID:
        C = data_matrix(code, depolarizing(p))
        f = eig_qer(C, early_stop_contribution=0.0).fidelity_on(C)
        _, point, _ = pauli_certificate(code, depolarizing_spec(p, 5), C)
        worst = max(worst, abs(f - point.bound) if point.feasible else np.inf)
        record(("five_qubit", "depolarizing", p), fidelity=f, point=point)
    report(4, worst <= 1e-8, f"max |EigQER - certificate| {worst:.2e} (tol 1e-8)", t0, 120)


def test_criterion_05_steane_element_count():
    t0 = time.perf_counter()
    code = steane_code()
    C = data_matrix(code, amplitude_damping(0.09))
    rec = eig_qer(C, early_stop_contribution=0.0)
    cum = rec.cumulative()
    qec = standard_qec_recovery(code).fidelity_on(C)
    tail = float(np.sum(rec.contributions[30:]))
    record(("steane", "ampdamp", 0.09), fidelity=qec)
    record(("steane", "ampdamp", 0.09), fidelity=cum[-1])
    ok = cum[7] >= qec and tail < 1e-3
    report(5, ok, f"after 8 elements {cum[7]:.6f} vs QEC {qec:.6f} (need >=), "
                  f"beyond 30th {tail:.2e} (tol 1e-3)", t0, 600)


def test_criterion_06_amp_damping_orderings():
    t0 = time.perf_counter()
    bad, worst_gap = [], 0.0
    for g in AMP_GRID:
        C = _AmpPoint.get(g)["C"]
        q = _AmpPoint.item(g, "qec").fidelity_on(C)
        e = _AmpPoint.item(g, "eig").fidelity_on(C)
        o = _AmpPoint.item(g, "opt").fidelity_on(C)
        for f in (q, e, o):
            record(("five_qubit", "ampdamp", g), fidelity=f)
        if not (q <= e + 1e-6 and e <= o + 1e-6):
            bad.append(g)
        if g <= 0.3:
            worst_gap = max(worst_gap, o - e)
    ok = not bad and worst_gap <= 0.01
    report(6, ok, f"ordering violated at {bad}, max optimal - EigQER for gamma <= 0.3 "
                  f"{worst_gap:.4f} (tol 0.01)", t0, 600)


def test_criterion_07_block_eigqer_pure_states():
    t0 = time.perf_counter()
    code = five_qubit_code()
    ens = Ensemble.maximally_mixed(2)
    worst_up, worst_down, used = 0.0, 0.0, []
    failures = []
    for k in range(21):
        phi = THETA * k / 20
        ch = pure_state_rotation(THETA, phi)
        C = data_matrix(code, ch)
        e = eig_qer(C).fidelity_on(C)
        # sub-crossover: encoding with EigQER still beats leaving the qubit unprotected
        if phi > 0 and e <= entanglement_fidelity_kraus(ens, ch.elements):
            break
        used.append(phi)
        record(("five_qubit", "purestates", phi), fidelity=e)
        for M in (2, 4, 8):
            b = block_eig_qer(C, M).fidelity_on(C)
            record(("five_qubit", "purestates", phi), fidelity=b)
            worst_up = max(worst_up, (b - e) / e)
            worst_down = min(worst_down, b - e)
            if not (b - e >= -1e-9 and (b - e) / e <= 0.04):
                failures.append((round(phi, 4), M, f"{b - e:.1e}"))
    ok = not failures and len(used) > 1
    report(7, ok, f"{len(used)} phi points up to {used[-1]:.4f}, max gain {100 * worst_up:.2f}% "
                  f"(tol 4%), min BlockEigQER - EigQER {worst_down:.1e} (tol -1e-9), "
                  f"failures (phi, M, diff) {failures}", t0, 900)


def test_criterion_09_iterative_from_block_duals():
    t0 = time.perf_counter()
    worst, bad = 0.0, []
    for g in AMP_GRID:
        C = _AmpPoint.get(g)["C"]
        d = _AmpPoint.item(g, "iter_block_sdp")
        o = _AmpPoint.item(g, "opt").fidelity_on(C)
        record(("five_qubit", "ampdamp", g), fidelity=_AmpPoint.item(g, "block2").fidelity_on(C),
               point=d)
        gap = d.bound - o if d.feasible else np.inf
        worst = max(worst, gap)
        if gap > 1e-3:
            bad.append((g, f"{gap:.2e}"))
    report(9, not bad, f"max bound - optimum {worst:.2e} (tol 1e-3), over tolerance at {bad}",
           t0, 900)


def test_criterion_10_shor_iterated_dual():
    t0 = time.perf_counter()
    code = shor_code()
    worst, bad = 0.0, []
    for i in range(9):
        g = round(0.025 * i, 10)
        C = data_matrix(code, amplitude_damping(g))
        e = eig_qer(C).fidelity_on(C)
        blk = block_eig_qer(C, 2)
        d = iterated_block_dual(C, blk.dual_pairs())
        record(("shor", "ampdamp", g), fidelity=e, point=d)
        record(("shor", "ampdamp", g), fidelity=blk.fidelity_on(C))
        gap = d.bound - e if d.feasible else np.inf
        worst = max(worst, gap)
        if gap > 5e-3:
            bad.append((g, f"{gap:.2e}"))
    report(10, not bad, f"max iterated bound - EigQER {worst:.2e} (tol 5e-3), "
                        f"over tolerance at {bad}", t0, 3600)


def test_criterion_11_iterated_vs_direct():
    t0 = time.perf_counter()
    worst, bad = 0.0, []
    for g in AMP_GRID:
        direct = _AmpPoint.item(g, "iter_block_sdp")
        it = _AmpPoint.item(g, "iterated")
        record(("five_qubit", "ampdamp", g), point=it)
        diff = abs(it.bound - direct.bound)
        worst = max(worst, diff)
        if diff > 1e-4:
            bad.append((g, f"{diff:.2e}"))
    report(11, not bad, f"max |iterated - direct| {worst:.2e} (tol 1e-4), "
                        f"over tolerance at {bad}", t0, 1200)


def test_criterion_12_determinism(tmp_path):
    t0 = time.perf_counter()
    specs = [
        ExperimentSpec(values=(0.05, 0.2), methods=("qec", "eigqer", "blockeig:2"),
                       bounds=("gersgorin", "iterated_block:2"), workers=1),
        ExperimentSpec(code="random", code_n=4, code_k=1, seed=7, values=(0.1, 0.2),
                       methods=("eigqer", "optimal"), bounds=("svd", "sdp_dual"), workers=2),
    ]
    same = True
    for i, spec in enumerate(specs):
        blobs = []
        for rep in range(2):
            path = tmp_path / f"s{i}_{rep}.csv"
            emit_csv(run_sweep(spec), path)
            blobs.append(path.read_bytes())
        same &= blobs[0] == blobs[1]
    report(12, same, "repeated sweeps byte-identical" if same else "CSV differs between runs",
           t0, 120)


def test_criterion_08_dual_soundness():
    # runs last: consumes everything the other criteria produced, plus a full
    # five-qubit sweep with every recovery and bound
    t0 = time.perf_counter()
    spec = ExperimentSpec(values=AMP_GRID, methods=("baseline", "qec", "eigqer", "blockeig:2",
                                                    "blockeig:4", "orderqer:1", "optimal"),
                          bounds=("gersgorin", "svd", "iterative:lambda_max",
                                  "iterative:block_sdp:2", "iterated_block:2", "sdp_dual"),
                          workers=1)
    for row in run_sweep(spec):
        key = ("five_qubit", "ampdamp", row.param_value)
        if not row.ok or row.method == "baseline":
            continue
        if row.is_bound:
            record(key, bound=row.value)
        else:
            record(key, fidelity=row.value)
    violations, pairs = [], 0
    for key, v in PRODUCED.items():
        if not v["fidelity"] or not v["bound"]:
            continue
        pairs += len(v["fidelity"]) * len(v["bound"])
        gap = min(v["bound"]) - max(v["fidelity"])
        if gap < -1e-6:
            violations.append((key, f"{gap:.2e}"))
    ok = not violations and pairs > 0
    report(8, ok, f"{pairs} bound/fidelity pairs over {len(PRODUCED)} points, "
                  f"violations {violations}", t0, 1800)
