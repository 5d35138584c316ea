"""Phase transition of the smoothed Fisher information.

A Gaussian with half its mass rearranged into a comb of narrow triangular
teeth (width 0.05) looks smooth at coarse scales but has steep local
structure. Sweeping the smoothing bandwidth r shows the information
jumping by orders of magnitude once r drops below the tooth width: a
bandwidth-limited observer suddenly gains precision when it can resolve
the teeth.

Run:  python3 demos/phase_transition.py
"""

import numpy as np

from fisher_mean import GaussianSawtooth, fisher_sweep, variance

spec = GaussianSawtooth(0.0, 1.0, 0.05, 0.5, 41)
grid = np.geomspace(0.005, 0.5, 13)

print("smoothed Fisher information of the sawtooth comb (tooth width 0.05)")
print()
print(f"{'r':>10} {'I_r':>12} {'r^2 * I_r':>12}")
for row in fisher_sweep(spec, grid):
    r, info = row["r"], row["fisher"]
    print(f"{r:>10.4f} {info:>12.4f} {r * r * info:>12.4f}")

var = variance(spec)
print()
print(f"coarse-scale reference 1/(sigma^2 + r^2) at r=0.5: {1.0 / (var + 0.25):.4f}")
print(f"fine-scale ceiling 1/r^2 at r=0.005: {1.0 / 0.005**2:.0f}")
print()
print("the jump near r = tooth width is the phase transition: below it the")
print("teeth are resolved and I_r climbs toward the 1/r^2 ceiling.")
