# Coarse-to-fine reconstruction with level-coupled noise, as in the first
# reference experiment, written out as CSV and VTK files.
#
# The full ladder (to level 64) takes a few minutes; pass a shorter one on the
# command line, e.g. ``python 05_level_ladder.py 4 8 16``.
import sys

from kveit.config import RunConfig
from kveit.cli import emit_outputs
from kveit.experiments import NoiseSpec, run_ladder, ExampleResult

levels = tuple(int(a) for a in sys.argv[1:]) or (4, 8, 16, 32, 64)
run = run_ladder(levels, NoiseSpec("level", seed=0), method="direct")

print(" level        h    delta   iter   L2_q    L2_N    L2_D   EOC_q")
for r in run.reports:
    eoc = "" if r.EOC_q is None else f"{r.EOC_q:7.3f}"
    print(f"{r.level:6d} {r.h:8.4f} {r.delta:8.2e} {r.iterations:6d} {r.L2_q:7.4f} {r.L2_N:7.4f} {r.L2_D:7.4f} {eoc}")

cfg = RunConfig().replace("run", command="example", levels=levels, solver="direct")
cfg = cfg.replace("output", directory="ladder_output")
for path in emit_outputs(ExampleResult(1, run.reports, {"ladder": run}), cfg):
    print("wrote", path)
