"""Parameter sweeps over codes and channels, with CSV and SVG output."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import bounds as bd
from . import recovery as rc
from .channels import (amplitude_damping, compose_encoding, depolarizing, depolarizing_spec,
                       pure_state_rotation, tensor_pow)
from .codes import StabilizerCode, code_by_name
from .fidelity import Ensemble, avg_ent_fidelity, build_data_matrix, entanglement_fidelity_kraus

__all__ = [
    "SpecError",
    "ExperimentSpec",
    "Row",
    "CSV_HEADER",
    "default_grid",
    "run_sweep",
    "emit_csv",
    "read_csv",
    "emit_chart",
    "soundness_violations",
]

log = logging.getLogger(__name__)

CSV_HEADER = ("code", "channel", "param_name", "param_value", "method", "value", "margin",
              "elements", "seconds")
CHANNELS = {"ampdamp": "gamma", "purestates": "phi", "depolarizing": "p"}
RECOVERY_METHODS = ("baseline", "qec", "eigqer", "blockeig", "orderqer", "optimal")
BOUND_METHODS = ("gersgorin", "svd", "iterative", "iterated_block", "pauli_cert", "sdp_dual")
# full-space SDP is refused from this many physical qubits on
LARGE_SDP_QUBITS = 7
MAX_KRAUS = 1 << 16
SOUNDNESS_SLACK = 1e-6
DEFAULT_THETA = 5 * math.pi / 12


class SpecError(ValueError):
    """The experiment specification is invalid."""


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: a code, a channel family, a parameter grid, methods and bounds.

    Method strings: ``baseline``, ``qec``, ``eigqer``, ``blockeig:M``,
    ``orderqer:1+2``, ``optimal``.  Bound strings: ``gersgorin``, ``svd``,
    ``iterative:lambda_max``, ``iterative:block_sdp:M``,
    ``iterated_block:M``, ``pauli_cert``, ``sdp_dual``.
    """

    code: str = "five_qubit"
    channel: str = "ampdamp"
    values: tuple = ()
    methods: tuple = ("baseline", "qec", "eigqer", "optimal")
    bounds: tuple = ()
    theta: float = DEFAULT_THETA
    code_n: int = 6
    code_k: int = 2
    seed: int = 0
    early_stop_contribution: float = rc.EARLY_STOP_CONTRIBUTION
    force_large_sdp: bool = False
    record_timings: bool = False
    workers: int = 1
    tol: float = bd.FEAS_TOL

    @property
    def param_name(self) -> str:
        return CHANNELS[self.channel]

    def grid(self) -> tuple:
        return tuple(self.values) if self.values else default_grid(self.channel, self.theta)

    def make_code(self):
        kw = {"n": self.code_n, "k": self.code_k, "seed": self.seed} if self.code == "random" else {}
        return code_by_name(self.code, **kw)

    def code_label(self) -> str:
        if self.code == "random":
            return f"random[{self.code_n},{self.code_k}]s{self.seed}"
        return self.code

    def validate(self) -> "ExperimentSpec":
        if self.channel not in CHANNELS:
            raise SpecError(f"unknown channel {self.channel!r}")
        try:
            code = self.make_code()
        except ValueError as exc:
            raise SpecError(str(exc)) from exc
        for v in self.grid():
            _check_param(self.channel, v, self.theta)
        for m in self.methods:
            name, arg = _split(m)
            if name not in RECOVERY_METHODS:
                raise SpecError(f"unknown method {m!r}")
            if name in ("blockeig",) and (not arg.isdigit() or int(arg) < 1):
                raise SpecError(f"{m!r}: block size must be a positive integer")
            if name == "orderqer":
                try:
                    orders = [int(o) for o in arg.split("+")]
                except ValueError as exc:
                    raise SpecError(f"{m!r}: orders look like 1+2") from exc
                if self.channel != "ampdamp" or not orders:
                    raise SpecError("orderqer needs the amplitude damping channel")
            if name == "qec" and not isinstance(code, StabilizerCode):
                raise SpecError("qec needs a stabilizer code")
            if name == "optimal" and code.n >= LARGE_SDP_QUBITS and not self.force_large_sdp:
                raise SpecError(f"full-space SDP on {code.n} qubits refused; "
                                "pass --force-large-sdp to run it anyway")
        for b in self.bounds:
            name, arg = _split(b)
            if name not in BOUND_METHODS:
                raise SpecError(f"unknown bound {b!r}")
            if name == "pauli_cert" and (self.channel != "depolarizing"
                                         or not isinstance(code, StabilizerCode)):
                raise SpecError("pauli_cert needs a stabilizer code and the depolarizing channel")
            if name == "sdp_dual" and code.n >= LARGE_SDP_QUBITS and not self.force_large_sdp:
                raise SpecError("sdp_dual needs the full-space SDP; pass --force-large-sdp")
            if name == "iterative" and arg.split(":")[0] not in ("lambda_max", "block_sdp"):
                raise SpecError(f"{b!r}: init must be lambda_max or block_sdp:M")
        if self.channel == "depolarizing" and 4 ** code.n > MAX_KRAUS:
            raise SpecError(f"depolarizing on {code.n} qubits needs {4 ** code.n} Kraus elements")
        if self.workers < 1:
            raise SpecError("workers must be at least 1")
        return self


@dataclass(frozen=True)
class Row:
    code: str
    channel: str
    param_name: str
    param_value: float
    method: str
    value: float
    margin: float | None = None
    elements: int | None = None
    seconds: float | None = None
    error: str = field(default="", compare=False)

    @property
    def ok(self) -> bool:
        return not self.error

    @property
    def is_bound(self) -> bool:
        return _split(self.method)[0] in BOUND_METHODS


def _split(name: str):
    head, _, arg = name.partition(":")
    return head, arg


def _check_param(channel, v, theta):
    v = float(v)
    if channel == "ampdamp" and not 0 <= v <= 1:
        raise SpecError(f"gamma {v} outside [0, 1]")
    if channel == "depolarizing" and not 0 <= v <= 1:
        raise SpecError(f"p {v} outside [0, 1]")
    if channel == "purestates" and not (0 < theta < math.pi and 0 <= v <= theta):
        raise SpecError(f"phi {v} outside [0, theta]")


def default_grid(channel: str, theta: float = DEFAULT_THETA) -> tuple:
    """``gamma`` in [0, 0.5] step 0.025; ``phi`` in [0, theta] step theta/20; ``p`` in [0, 0.3]."""
    if channel == "ampdamp":
        return tuple(round(0.025 * i, 10) for i in range(21))
    if channel == "purestates":
        return tuple(theta * i / 20 for i in range(21))
    if channel == "depolarizing":
        return tuple(round(0.025 * i, 10) for i in range(13))
    raise SpecError(f"unknown channel {channel!r}")


def _single_channel(spec: ExperimentSpec, v: float):
    if spec.channel == "ampdamp":
        return amplitude_damping(v)
    if spec.channel == "purestates":
        return pure_state_rotation(spec.theta, v)
    return depolarizing(v)


class _Point:
    """Lazily computed objects for one grid point, shared across methods."""

    def __init__(self, spec: ExperimentSpec, v: float):
        self.spec = spec
        self.v = v
        self.code = spec.make_code()
        self.single = _single_channel(spec, v)
        ens = Ensemble.maximally_mixed(self.code.d_S)
        self.C = build_data_matrix(ens, compose_encoding(tensor_pow(self.single, self.code.n),
                                                         self.code.U_C))
        self.cache = {}

    def get(self, key, fn):
        if key not in self.cache:
            self.cache[key] = fn()
        return self.cache[key]

    def eigqer(self):
        return self.get("eigqer", lambda: rc.eig_qer(
            self.C, early_stop_contribution=self.spec.early_stop_contribution))

    def blockeig(self, M):
        return self.get(("blockeig", M), lambda: rc.block_eig_qer(self.C, M))

    def optimal(self):
        return self.get("optimal", lambda: rc.optimal_recovery(self.C))


def _recovery_row(pt: _Point, method: str):
    name, arg = _split(method)
    if name == "baseline":
        ens = Ensemble.maximally_mixed(pt.single.dim_in)
        return entanglement_fidelity_kraus(ens, pt.single.elements), None, 1
    if name == "qec":
        rec = rc.standard_qec_recovery(pt.code)
        return avg_ent_fidelity(rec, pt.C), None, len(rec)
    if name == "eigqer":
        rec = pt.eigqer()
        return avg_ent_fidelity(rec, pt.C), None, len(rec)
    if name == "blockeig":
        rec = pt.blockeig(int(arg))
        return avg_ent_fidelity(rec, pt.C), None, len(rec.blocks)
    if name == "orderqer":
        orders = [int(o) for o in arg.split("+")]
        rec = rc.order_qer(pt.code, pt.single, pt.C, orders)
        count = len(rec.blocks) + (len(rec.residual) if rec.residual is not None else 0)
        return avg_ent_fidelity(rec, pt.C), None, count
    if name == "optimal":
        return avg_ent_fidelity(pt.optimal(), pt.C), None, 1
    raise SpecError(f"unknown method {method!r}")


def _bound_row(pt: _Point, method: str):
    name, arg = _split(method)
    tol = pt.spec.tol
    if name == "gersgorin":
        d = bd.gersgorin_dual(pt.C, pt.eigqer().partition())
    elif name == "svd":
        d = bd.svd_dual(pt.C, pt.eigqer().partition())
        if not d.feasible:
            # an infeasible SVD point is only an initializer
            d = bd.iterative_dual(pt.C, d.Y, tol=tol, provenance="svd+iterative")
    elif name == "iterative":
        init, _, M = arg.partition(":")
        if init == "lambda_max":
            Y0 = bd.init_block_lambda_max(pt.C, pt.eigqer().partition())
        else:
            rec = pt.blockeig(int(M or 2))
            Y0 = bd.init_block_sdp_duals(rec.dual_pairs(), pt.C.d_C, pt.C)
        d = bd.iterative_dual(pt.C, Y0, tol=tol, provenance=method)
    elif name == "iterated_block":
        rec = pt.blockeig(int(arg or 2))
        d = bd.iterated_block_dual(pt.C, rec.dual_pairs(), tol=tol)
    elif name == "pauli_cert":
        spec = depolarizing_spec(pt.v, pt.code.n)
        _, d, _ = bd.pauli_certificate(pt.code, spec, pt.C)
    elif name == "sdp_dual":
        blk = pt.optimal().blocks[0]
        d = bd._make_point(blk.full_dual(), pt.C, "sdp_dual")
    else:
        raise SpecError(f"unknown bound {method!r}")
    value = d.bound if d.feasible else float("nan")
    return value, d.feasibility_margin, d.iterations


def evaluate_point(spec: ExperimentSpec, v: float) -> list:
    """All rows for one grid point; errors are recorded per row."""
    label = spec.code_label()
    try:
        pt = _Point(spec, float(v))
    except Exception as exc:  # noqa: BLE001 - reported in the table
        log.error("setup failed at %s=%s: %s", spec.param_name, v, exc)
        return [Row(label, spec.channel, spec.param_name, float(v), m, float("nan"),
                    error=f"{type(exc).__name__}: {exc}")
                for m in tuple(spec.methods) + tuple(spec.bounds)]
    rows = []
    for m in tuple(spec.methods) + tuple(spec.bounds):
        t0 = time.perf_counter()
        try:
            fn = _bound_row if _split(m)[0] in BOUND_METHODS else _recovery_row
            value, margin, count = fn(pt, m)
            err = ""
        except Exception as exc:  # noqa: BLE001 - reported in the table
            log.error("%s failed at %s=%s: %s", m, spec.param_name, v, exc)
            value, margin, count, err = float("nan"), None, None, f"{type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0 if spec.record_timings else None
        rows.append(Row(label, spec.channel, spec.param_name, float(v), m, float(value),
                        margin, count, dt, err))
    return rows


def _evaluate(args):
    return evaluate_point(*args)


def run_sweep(spec: ExperimentSpec) -> list:
    """Evaluate every grid point; rows come back sorted by grid value then method order."""
    spec.validate()
    grid = spec.grid()
    jobs = [(spec, v) for v in grid]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_evaluate, jobs))
    else:
        chunks = [_evaluate(j) for j in jobs]
    order = {m: i for i, m in enumerate(tuple(spec.methods) + tuple(spec.bounds))}
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r.param_value, order[r.method]))
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def emit_csv(rows, path) -> None:
    """Write rows with 17 significant digits; ``seconds`` stays empty unless timings were recorded."""
    if not rows:
        raise ValueError("nothing to write")
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.code, r.channel, r.param_name, _fmt(r.param_value), r.method,
                    _fmt(r.value), _fmt(r.margin), _fmt(r.elements), _fmt(r.seconds)])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path) -> list:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        rows = []
        for rec in reader:
            code, ch, pname, pv, m, val, margin, elems, secs = rec
            rows.append(Row(code, ch, pname, float(pv), m, float(val),
                            float(margin) if margin else None,
                            int(elems) if elems else None,
                            float(secs) if secs else None))
    return rows


def emit_chart(rows, path, title: str | None = None) -> None:
    """Line plot of every method/bound against the noise parameter, as SVG."""
    if not rows:
        raise ValueError("nothing to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "caqer"
    methods = list(dict.fromkeys(r.method for r in rows))
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for m in methods:
        pts = [(r.param_value, r.value) for r in rows if r.method == m and r.ok]
        if not pts:
            continue
        x, y = zip(*pts)
        ax.plot(x, y, marker=".", linestyle="--" if _split(m)[0] in BOUND_METHODS else "-",
                label=m)
    ax.set_xlabel(rows[0].param_name)
    ax.set_ylabel("fidelity / bound")
    ax.set_title(title or f"{rows[0].code}, {rows[0].channel}")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def soundness_violations(rows, slack: float = SOUNDNESS_SLACK) -> list:
    """Grid points where a feasible bound sits below a recovery, or optimal below another method."""
    out = []
    by_point = {}
    for r in rows:
        if r.ok and np.isfinite(r.value):
            by_point.setdefault(r.param_value, []).append(r)
    for v, group in sorted(by_point.items()):
        recs = [r for r in group if not r.is_bound and r.method != "baseline"]
        bnds = [r for r in group if r.is_bound]
        for b in bnds:
            for r in recs:
                if b.value + slack < r.value:
                    out.append((v, b.method, r.method, b.value, r.value))
        opt = [r for r in recs if r.method == "optimal"]
        for o in opt:
            for r in recs:
                if o.value + slack < r.value:
                    out.append((v, "optimal", r.method, o.value, r.value))
    return out


def with_defaults(spec: ExperimentSpec, **kw) -> ExperimentSpec:
    return replace(spec, **kw)


def available_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1
