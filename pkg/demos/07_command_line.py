"""
Driving the simulator from a config file
========================================

Every pipeline is also reachable from the ``eitcascade`` command.  This
script runs each command on a shipped config into a temporary directory and
shows what lands on disk.
"""

import json
import tempfile
from pathlib import Path

from eitcascade import example_path, run_command

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp)
    for command in ("validate", "budget", "simulate", "cascade"):
        code = run_command(command, example_path("few_photon_8"), out / command)
        print(f"eitcascade {command}: exit {code}")

    summary = json.loads((out / "cascade" / "summary.json").read_text())
    print(f"format {summary['format']}: etaT {summary['etaT']:.5f}, "
          f"measured SBRs {summary['sbr1_measured']:.2f} / {summary['sbr_cascaded_measured']:.3f}")
    print((out / "cascade" / "histogram_spcm2.csv").read_text().splitlines()[0])

    # a malformed config is reported with its location and a nonzero exit
    bad = out / "bad.json"
    bad.write_text('{"memory1": {"gamma31": -1.0}}')
    print(f"invalid config: exit {run_command('validate', bad, out / 'bad')}")
