"""
Calibrating the cell
====================

The cell's optical depth and ground-state dephasing are not known a priori.
They are fitted so that the few-photon setting (short dark time) stores 17.5%
and the classical setting (longer dark time) stores 12%; the atomic
background coefficient then sets the first-stage SBR to 13.  This takes
about a minute.
"""

import logging

from eitcascade import load_example
from eitcascade.calibration import calibrate, report, with_cell

logging.basicConfig(level=logging.INFO, format="%(message)s")

few, classical = load_example("few_photon_8"), load_example("classical")
cal = calibrate(few, classical)
print(f"optical depth {cal.optical_depth:.5f}, gamma12 {cal.gamma12:.5f} rad/us, "
      f"atomic background {cal.atomic_background_rate:.4f} counts/us")
print(f"{cal.rounds} rounds, converged: {cal.converged}")

fitted = with_cell(few, cal.optical_depth, cal.gamma12).with_value(
    "background.atomic_background_rate", cal.atomic_background_rate)
for k, v in report(fitted).items():
    print(f"  {k:14s} {v:.4f}")
