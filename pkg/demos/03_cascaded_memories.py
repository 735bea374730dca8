"""
Two memories in series
======================

The retrieved pulse from memory 1 crosses a lossy link and is stored again in
memory 2.  Detector 2 sees three peaks: A, light that leaked through both
cells; B, memory 1's retrieval leaking through memory 2; and C, the doubly
stored signal, released when control 2 reads out.
"""

import numpy as np

from eitcascade import Experiment, load_example

exp = Experiment(load_example("few_photon_8"))
res = exp.cascade()

print(f"link transmission T = {res.link.transmission:.4f}")
print(f"eta1 = {res.eta1:.4f}, eta2 = {res.eta2:.4f}, etaT = {res.eta_T:.5f}")
print(f"etaT - eta1 * T * eta2 = {res.eta_T - res.eta1 * res.link.transmission * res.eta2:.1e}")

# the three peaks at the output of memory 2, per input photon
for p in res.peaks:
    print(f"peak {p.label}: window [{p.roi[0]:.2f}, {p.roi[1]:.2f}) us, "
          f"{p.energy / res.input_energy:.4f} of the input")

# a coarse text trace of the detector-2 power
power = np.abs(res.output2) ** 2
t = exp.tgrid.times
edges = np.arange(0.0, 5.01, 0.25)
scale = max(power.max(), 1e-300)
for a, b in zip(edges[:-1], edges[1:]):
    m = (t >= a) & (t < b)
    bar = "#" * int(round(40 * power[m].max() / scale))
    print(f"{a:4.2f} us |{bar}")

# blocking the second read removes peak C
blocked = Experiment(exp.config.with_value("control2.read.amplitude", 0.0)).cascade()
print(f"peak C with control-2 read blocked: {blocked.peak('C').energy / res.input_energy:.1e}")
