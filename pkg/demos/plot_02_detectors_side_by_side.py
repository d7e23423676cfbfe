"""
Five detectors on one received vector
=====================================

Runs Babai, sphere decoding, QRD-M, both ULBC QRD-M modes and exhaustive
ML on the same 4x4 16-QAM instance and prints metric and visited nodes.
"""

import numpy as np

from mimodet import (MSchedule, babai_point, complexity_bounds, ml_bruteforce,
                     qrd_m, sphere_decode, ulbc_qrd_m)
from mimodet.sim import SimConfig, run_trial

config = SimConfig(snr_grid=(12,), trials_per_snr=1, master_seed=3,
                   detector_set=('babai', 'ml', 'qrdm', 'sd', 'ulbc_paper',
                                 'ulbc_strict'))
out = run_trial(config, 12.0, 0)

print("bounds (f_lb, f_qrdm, f_ub):", config.bounds())
print("{0:<12} {1:>10} {2:>8} {3:>6}  correct".format(
    'detector', 'metric', 'nodes', 'early'))
for name, res in sorted(out.results.items()):
    ok = np.array_equal(res.solution.indices, out.truth.indices)
    print("{0:<12} {1:>10.5f} {2:>8} {3:>6}  {4}".format(
        name, res.metric, res.nodes_visited, str(res.terminated_early), ok))

###############################################################################
# The functions can also be called directly on (R, y).  A narrow beam
# shows how QRD-M trades accuracy for a fixed budget.

r, y = out.r_upper, out.y
alphabet = config.alphabet
for widths in ((1,) * 8, (4, 4, 4, 4, 4, 4, 4, 4), (4, 16, 64, 64, 64, 64, 64, 64)):
    sched = MSchedule(widths)
    res = qrd_m(r, y, alphabet, sched)
    print("M =", sched, "metric {0:.5f} nodes {1} bound {2}".format(
        res.metric, res.nodes_visited,
        complexity_bounds(sched, 8, alphabet)))

print("babai", babai_point(r, y, alphabet).metric,
      "sd", sphere_decode(r, y, alphabet).metric,
      "ml", ml_bruteforce(r, y, alphabet).metric,
      "ulbc", ulbc_qrd_m(r, y, alphabet, config.schedule, 'strict').metric)
