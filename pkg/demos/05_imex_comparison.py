"""Fully implicit schemes vs their IMEX (single Picard sweep) variants.

A single Picard iteration per timestep linearizes the reaction terms,
which is exactly an IMEX scheme.  At tau = 0.01 the CN-based IMEX
variants lose convergence and oscillate wildly, while the fully implicit
counterparts settle into the steady pattern; the BE-based variant only
misbehaves at much larger timesteps.  Desk scale (16x16) keeps every run
a few seconds.
"""

from rdfem.harness import IMEX_NAMES, RunConfig, run_imex_comparison
from rdfem.stepping import SchemeConfig

base = RunConfig(
    mesh_n=16,
    scheme=SchemeConfig("fsts", tau=0.01),  # tau shared by every variant
    t_end=30.0,
    seed=5,
)

comparison = run_imex_comparison(
    base,
    schemes=("be", "cn", "cnb5", "fsts"),
    variants=("imex", "newton1"),
)

print(f"{'scheme':>6} {'variant':>8} {'name':>7} {'stopped':>8} "
      f"{'end time':>9} {'max|u|':>8} {'iters':>7}")
for (scheme, variant), s in comparison.results.items():
    name = IMEX_NAMES[scheme] if variant == "imex" else f"{scheme.upper()}-N1"
    print(f"{scheme:>6} {variant:>8} {name:>7} {s['stopped_by']:>8} "
          f"{s['end_time']:>9.2f} {s['max_u_inf']:>8.2f} "
          f"{s['total_iterations']:>7}")

print()
print("CIMEX/C5IMEX never meet the steady criterion and their histories")
print("oscillate over orders of magnitude; the single-Newton variants all")
print("behave like their adaptive counterparts.")
