"""
Scanning the read-out control
=============================

Stronger read-out empties memory 1 faster but also raises the
control-induced background.  A grid scan over the read amplitude shows that
the first-stage SBR and the cascaded efficiency peak at different powers,
while memory 2 acts as a frequency filter so the cascaded SBR tracks the
cascaded efficiency.
"""

from scipy.stats import spearmanr

from eitcascade import load_example, optimize, scan
from eitcascade.optimize import config_axes

cfg = load_example("power_scan")
axes = config_axes(cfg)
result = scan(cfg, axes, workers=4)

path, values = result.axes[0]
print(f"{path:>24s}  {'eta1':>7s} {'etaT':>8s} {'sbr1':>6s} {'sbr_c':>6s}")
for idx, params, m in result.points():
    print(f"{params[path]:24.0f}  {m['eta1']:7.4f} {m['etaT']:8.5f} "
          f"{m['sbr1']:6.2f} {m['sbr_cascaded']:6.3f}")

for metric in ("sbr1", "etaT", "sbr_cascaded"):
    (i,) = result.argmax(metric)
    print(f"argmax {metric:12s} at {values[i]:g}")
rho = spearmanr(result.metrics["sbr_cascaded"], result.metrics["etaT"]).statistic
print(f"rank correlation between cascaded SBR and etaT: {rho:.3f}")

# exhaustive optimization of the read duration in the few-photon setting
base = load_example("few_photon_8")
best, value, grid = optimize(base, ("control1.read.duration", [0.1, 0.2, 0.25, 0.3, 0.4, 0.5]),
                             objective="etaT", workers=3)
print(f"best read duration {best['control1.read.duration']} us, etaT {value:.5f}")
