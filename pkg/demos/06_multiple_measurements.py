# More current patterns on the same noise level.
#
# Each measurement uses the piecewise constant current with magnitudes
# (A, B, C, D) taken from permutations of (1, 2, 3, 4).
from kveit.experiments import NoiseSpec, measurement_currents, run_ladder

levels = (4, 8, 16)
for n in (1, 6, 16):
    print(n, measurement_currents(n)[:3], "...")
    run = run_ladder(levels, NoiseSpec("fixed", 0.1, seed=0), n_measurements=n, method="direct")
    last = run.reports[-1]
    print(f"  level {last.level}: L2_q={last.L2_q:.4f} L2_N={last.L2_N:.4f} iterations={last.iterations}")
