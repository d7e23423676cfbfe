"""
Why sphere decoding has a heavy complexity tail
===============================================

At low SNR a few channel realizations make the sphere decoder explore a
large part of the tree.  Sorting trials by condition number shows that
badly conditioned channels are the expensive ones.
"""

import numpy as np

from mimodet import condition_number, full_tree_nodes
from mimodet.sim import SimConfig, run_trial

config = SimConfig(snr_grid=(0,), trials_per_snr=1, master_seed=4,
                   detector_set=('sd',))
full = full_tree_nodes(config.n_s, config.alphabet.q)

nodes, conds = [], []
for t in range(2000):
    out = run_trial(config, 0.0, t)
    nodes.append(out.results['sd'].nodes_visited)
    conds.append(condition_number(out.r_upper))
nodes = np.array(nodes)
conds = np.array(conds)

print("full tree: {0} nodes".format(full))
print("mean {0:.0f}  median {1:.0f}  max {2} ({3:.1%} of full tree)".format(
    nodes.mean(), np.median(nodes), nodes.max(), nodes.max() / full))

###############################################################################
# Mean node count per condition-number quartile.

edges = np.quantile(conds, [0, .25, .5, .75, 1])
for lo, hi in zip(edges[:-1], edges[1:]):
    sel = (conds >= lo) & (conds <= hi)
    print("cond in [{0:7.1f}, {1:7.1f}]: mean SD nodes {2:8.0f}".format(
        lo, hi, nodes[sel].mean()))
