"""Tree-search MIMO detection on the real-valued lattice model.

Detectors: Babai point (SIC), Schnorr-Euchner sphere decoding,
conventional QRD-M, ULBC QRD-M, and exhaustive ML as a reference.
"""

__version__ = '0.1.0'

from .constellation import (PamAlphabet, SymbolVector, make_alphabet,
                            random_symbol_vector, se_children, slice_index,
                            slice_indices)
from .lattice import (ComplexChannel, QRFactorization, RealSystem,
                      SingularChannelError, apply_qt, complex_to_real,
                      complex_to_real_system, condition_number, qr_decompose,
                      sorted_qr_decompose)
from .detectors import (Branch, DetectionResult, MSchedule, NoPointInSphere,
                        NodeCounter, babai_point, branch_metric,
                        complexity_bounds, full_tree_nodes, metric,
                        ml_bruteforce, qrd_m, sphere_decode, ulbc_qrd_m)
from .sim import (SimConfig, TrialStats, add_noise, gen_channel, run_experiment,
                  run_trial)
