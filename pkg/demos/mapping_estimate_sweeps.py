"""Probe the mapping estimates behind the solver's admissibility ranges.

Three empirical sweeps:

* boundedness of the Neumann-to-Dirichlet multiplier from L^p into H^s on
  either side of the critical line s = 1 - (d-1)(1/p - 1/2);
* the weighted bound ||alpha|^t phi||_2 <= C ||phi||_{H^{t(d-1)/p}};
* the gradient-absorption inequality with its closed per-mode envelope.

Run:  python demos/mapping_estimate_sweeps.py
"""

from robinlap.estimates import (
    absorption_mode_bound,
    coefficient_power_bound,
    smoothing_admissible,
    sobolev_absorption_constant,
    weyl_smoothing_sweep,
)

print("== multiplier smoothing: sup ||M phi||_{H^s} / ||phi||_{L^p} ==")
for p, s in ((1.5, 0.5), (1.5, 0.83), (1.1, 0.95), (1.1, 1.5)):
    rep = weyl_smoothing_sweep(p, s, grids=(32, 64, 128, 256), samples=80, seed=0)
    admissible = smoothing_admissible(p, s, 2)
    ratios = ", ".join(f"{r:.3g}" for r in rep.ratios)
    print(f"p={p:4}, s={s:5}: inequality holds: {str(admissible):5}  "
          f"sup ratios [{ratios}] -> {rep.verdict}")

print("\n== coefficient power bound for |x|^(-1/4) truncated to the unit ball ==")
rep = coefficient_power_bound("r**(-0.25) * ball(1.0)", p=3.0, t=2.0 / 3.0,
                              grids=(64, 128, 256), samples=80, seed=0)
print(f"sup ratios across grids: {[f'{r:.3f}' for r in rep.ratios]} -> {rep.verdict}")
print(f"L^{rep.extras['q']:.1f} norms of the singular part of the power: "
      f"{[f'{v:.3f}' for v in rep.extras['singular_part_lq_norms']]}")

print("\n== gradient absorption of the fractional norm ==")
s, eps = 0.5, 0.1
rep = sobolev_absorption_constant(s, eps, grids=((64, 64), (128, 128)), trials=80, seed=0)
print(f"s={s}, eps={eps}: reported constants {[f'{c:.4f}' for c in rep.ratios]}")
print(f"closed-form per-mode envelope: {absorption_mode_bound(s, eps):.4f}")
