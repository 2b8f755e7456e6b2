"""
Command-line runs
=================

The same computations are driven by JSON configs.  Outputs are CSV/JSON
files plus a manifest with the config hash and per-check results; reruns
of a config are byte-identical.
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

config = {
    "model": {"family": "flat", "gamma": 1.0, "Lambda": 10.0},
    "E_a": 1.0,
    "lambda": 0.1,
    "method": "decomposed",
    "grid": {"t_min": 0.0, "t_max": 5.0, "nodes": 11, "unit": "tau_E"},
}

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "evolve.json"
    path.write_text(json.dumps(config))
    out = Path(tmp) / "out"
    subprocess.run([sys.executable, "-m", "decaykit", "evolve", "--config", str(path), "--out", str(out)], check=True)
    print((out / "evolve.csv").read_text().splitlines()[0])
    print((out / "evolve.csv").read_text().splitlines()[1])
    print(json.loads((out / "manifest.json").read_text()))

    # a closed channel is a configuration error: exit status 2 and a one-line reason
    path.write_text(json.dumps({"relativistic": {"M": 1.0, "m": 0.6, "mu": 1.0, "lambda": 0.1}}))
    proc = subprocess.run([sys.executable, "-m", "decaykit", "relativistic", "--config", str(path), "--out", str(out)],
                          capture_output=True, text=True)
    print("exit", proc.returncode, proc.stderr.strip())
