from dataclasses import replace

import numpy as np
import pytest

from caqer.cli import main
from caqer.experiments import (CSV_HEADER, ExperimentSpec, SpecError, read_csv, run_sweep,
                               soundness_violations)


def test_sweep_writes_csv_and_chart(tmp_path):
    out, svg = tmp_path / "s.csv", tmp_path / "s.svg"
    code = main(["sweep", "--grid", "0.05,0.1", "--methods", "baseline,qec,eigqer",
                 "--bounds", "gersgorin,iterative:lambda_max", "--csv", str(out),
                 "--chart", str(svg), "--workers", "1"])
    assert code == 0
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert "\r" not in text
    rows = read_csv(out)
    assert len(rows) == 10
    assert svg.read_text().lstrip().startswith("<?xml")


def test_repeat_is_byte_identical(tmp_path):
    args = ["sweep", "--grid", "0:0.1:0.05", "--methods", "eigqer,blockeig:2",
            "--bounds", "iterated_block:2", "--workers", "1"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--csv", str(a)]) == 0
    assert main(args + ["--csv", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [
    ["sweep", "--methods", "blockeig:0"],
    ["sweep", "--grid", "1.5", "--channel", "ampdamp"],
    ["sweep", "--bounds", "magic"],
    ["sweep", "--code", "shor", "--methods", "optimal"],
])
def test_spec_errors_exit_2(tmp_path, argv):
    assert main(argv + ["--csv", str(tmp_path / "x.csv")]) == 2


def test_large_sdp_needs_flag():
    with pytest.raises(SpecError):
        ExperimentSpec(code="steane", methods=("optimal",)).validate()
    ExperimentSpec(code="steane", methods=("optimal",), force_large_sdp=True).validate()


def test_soundness_detects_violation():
    spec = ExperimentSpec(values=(0.1,), methods=("eigqer",), bounds=("gersgorin",), workers=1)
    rows = run_sweep(spec)
    assert soundness_violations(rows) == []
    rows[1] = replace(rows[1], value=rows[0].value - 1e-3)
    assert len(soundness_violations(rows)) == 1
    assert np.isfinite(rows[0].value)
