#!/usr/bin/env python3
"""End-to-end checks of the displab CLI: exit codes, output files, schema."""

import csv
import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

DISPLAB = str(Path(sys.argv[1]).resolve())
SCHEMA = json.loads(Path(sys.argv[2]).read_text())
failures = []


def expect(cond, msg):
    print(("ok    " if cond else "FAIL  ") + msg)
    if not cond:
        failures.append(msg)


def run(args, cwd, env=None):
    e = dict(os.environ)
    e.pop("DISPLAB_OUTPUT_DIR", None)
    if env:
        e.update(env)
    return subprocess.run([DISPLAB, "-q", *args], cwd=cwd, env=e, capture_output=True, text=True)


def load(outdir, name):
    report = json.loads((outdir / f"{name}.json").read_text())
    jsonschema.validate(report, SCHEMA)
    with open(outdir / f"{name}.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    return report, rows


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)

    # verify with defaults
    out = tmp / "verify"
    r = run(["verify", "--output", str(out)], tmp)
    expect(r.returncode == 0, f"verify exits 0 (got {r.returncode}: {r.stderr.strip()[-200:]})")
    rep, rows = load(out, "verify")
    expect(rep["passed"] >= 20 and rep["failed"] == 0, f"verify lists >= 20 passed checks ({rep['passed']})")
    expect(rows[0] == ["check", "pass", "value", "threshold"], "verify CSV header")
    expect(all(c["name"] for c in rep["checks"]), "every check is named")

    # env var default and byte-identical reruns
    r1 = run(["verify"], tmp, {"DISPLAB_OUTPUT_DIR": str(tmp / "env1")})
    r2 = run(["verify"], tmp, {"DISPLAB_OUTPUT_DIR": str(tmp / "env2")})
    expect(r1.returncode == 0 and (tmp / "env1" / "verify.json").exists(), "DISPLAB_OUTPUT_DIR sets the output directory")
    expect((tmp / "env1" / "verify.csv").read_bytes() == (tmp / "env2" / "verify.csv").read_bytes(),
           "identical config and seed give identical CSV bytes")

    # quick experiments: schema, headers, exit status consistent with the report
    headers = {
        "kernel-decay": ["experiment", "phase", "a", "dim", "t", "z", "kernel_abs", "panels"],
        "lp-summation": ["experiment", "phase", "a", "s", "eps", "exponent", "k", "ratio", "log2_ratio", "N", "L"],
        "convergence": ["experiment", "phase", "dim", "width", "delta", "value", "relative", "nodes"],
    }
    for name, header in headers.items():
        out = tmp / name
        r = run([name, "--output", str(out)], tmp)
        rep, rows = load(out, name)
        expect(r.returncode == (0 if rep["all_pass"] else 1), f"{name}: exit status follows the checks")
        expect(rows[0] == header, f"{name}: CSV header")
        expect(len(rows) > 1, f"{name}: CSV has data rows")

    # small scaling sweep
    out = tmp / "scaling"
    r = run(["scaling", "--R", "2,4,8", "--restarts", "1", "--rounds", "1", "--output", str(out)], tmp)
    rep, rows = load(out, "scaling")
    expect(rows[0] == ["experiment", "phase", "a", "dim", "mode", "R", "norm", "slope_running", "seed"],
           "scaling CSV columns")
    expect(len(rows) == 4, "scaling CSV has one row per R")
    expect(rows[1][7] == "nan" and rows[2][7] != "nan", "slope_running starts at the second R")
    expect("slope" in rep["summary"], "scaling summary has the fitted slope")
    expect(rep["config"]["Nt"] == "auto" and rep["summary"]["local"]["points"][0]["Nt"] >= 1,
           "auto fields are echoed with their resolved values")

    # config files
    cfg = tmp / "kd.json"
    cfg.write_text(json.dumps({"experiment": "kernel-decay", "phase": "wave", "T_max": 1.0}))
    out = tmp / "kd"
    r = run(["kernel-decay", "--config", str(cfg), "--output", str(out)], tmp)
    rep, _ = load(out, "kernel-decay")
    expect(r.returncode == 0 and rep["config"]["phase"] == "wave", "config file values are used")
    r = run(["kernel-decay", "--config", str(cfg), "--phase", "schrodinger", "--output", str(out)], tmp)
    rep, _ = load(out, "kernel-decay")
    expect(rep["config"]["phase"] == "schrodinger", "flags override the config file")

    def no_files(d):
        return not d.exists() or not any(d.iterdir())

    bad = [
        ({"experiment": "kernel-decay"}, "missing phase"),
        ({"experiment": "kernel-decay", "phase": "wave", "colour": 1}, "unknown key"),
        ({"experiment": "kernel-decay", "phase": "wave", "dim": "one"}, "wrong type"),
        ({"experiment": "kernel-decay", "phase": "wave", "dim": 3}, "out-of-range value"),
        ({"experiment": "scaling", "phase": "wave"}, "experiment mismatch"),
        ({"experiment": "kernel-decay", "phase": "quartic"}, "unknown phase"),
    ]
    for i, (body, what) in enumerate(bad):
        cfg = tmp / f"bad{i}.json"
        cfg.write_text(json.dumps(body))
        out = tmp / f"bad{i}"
        r = run(["kernel-decay", "--config", str(cfg), "--output", str(out)], tmp)
        expect(r.returncode == 2 and no_files(out), f"malformed config ({what}): exit 2, no output files")
    cfg = tmp / "notjson.json"
    cfg.write_text("{phase: ")
    r = run(["kernel-decay", "--config", str(cfg), "--output", str(tmp / "nj")], tmp)
    expect(r.returncode == 2 and no_files(tmp / "nj"), "unparsable config: exit 2")
    r = run(["scaling", "--R", "3,6", "--output", str(tmp / "r3")], tmp)
    expect(r.returncode == 2 and no_files(tmp / "r3"), "non-dyadic R: exit 2")

    # aliasing budget
    out = tmp / "alias"
    r = run(["scaling", "--R", "2,4", "--L", "10", "--output", str(out)], tmp)
    expect(r.returncode == 3 and no_files(out), "override below the aliasing budget: exit 3, no files")
    r = run(["scaling", "--R", "2,4", "--N", "16", "--output", str(out)], tmp)
    expect(r.returncode == 3 and no_files(out), "N too small for 2R: exit 3")
    r = run(["scaling", "--R", "2,4", "--L", "10", "--restarts", "1", "--rounds", "0", "--force", "--output", str(out)],
            tmp)
    expect(r.returncode in (0, 1) and (out / "scaling.csv").exists(), "--force accepts the override")

    # i/o failure
    blocker = tmp / "file"
    blocker.write_text("x")
    r = run(["kernel-decay", "--output", str(blocker / "sub")], tmp)
    expect(r.returncode == 4, "unwritable output directory: exit 4")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
