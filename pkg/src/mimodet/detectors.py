"""Tree-search detectors on the QR-reduced model ``y = R x + n``.

Detection runs from the last row of ``R`` (stage ``N_s``) up to the first.
A branch fixed on rows ``i..N_s-1`` carries the accumulative metric

    sum_k (y_k - sum_{j >= k} R[k, j] x_j)^2,   k = i..N_s-1

Complexity is counted in visited nodes: one node is one evaluation of a
single-stage squared term for one candidate symbol.  Under this
convention the Babai point costs ``N_s`` nodes and a QRD-M beam costs
``sum_k parents_k * q`` nodes.

Every detector keeps a per-branch residual vector ``z = y - R x_fixed`` and
updates it with the same elementwise operations, so the metric of a given
branch is bit-identical no matter which detector produced it.  The
equality checks between QRD-M and ULBC QRD-M rely on this.
"""

from dataclasses import dataclass
import math

import numpy as np

from .constellation import SymbolVector, slice_index

__all__ = ['MSchedule', 'DetectionResult', 'Branch', 'NodeCounter',
           'NoPointInSphere', 'branch_metric', 'metric', 'babai_point',
           'sphere_decode', 'qrd_m', 'ulbc_qrd_m', 'ml_bruteforce',
           'complexity_bounds', 'full_tree_nodes', 'ML_CAP']

#: Largest number of candidate vectors ``ml_bruteforce`` will enumerate.
ML_CAP = 10 ** 7


class NoPointInSphere(Exception):
    """Sphere decoding with a finite radius found no lattice point."""

    def __init__(self, nodes_visited):
        super().__init__(
            "no lattice point inside the initial sphere "
            "({0} nodes visited)".format(nodes_visited))
        self.nodes_visited = nodes_visited


@dataclass(frozen=True)
class MSchedule:
    """
    Per-stage beam widths in detection order (first detection stage first).

    ``limits[0]`` is ``M_{N_s}``, ``limits[-1]`` is ``M_1``.
    """
    limits: tuple

    def __post_init__(self):
        limits = tuple(int(m) for m in self.limits)
        if not limits:
            raise ValueError("schedule must not be empty")
        if any(m < 1 for m in limits):
            raise ValueError("every beam width must be >= 1")
        object.__setattr__(self, 'limits', limits)

    @classmethod
    def default(cls, n_s, q):
        """``[q, q^2, q^3, q^3, ...]`` truncated or padded to ``n_s`` stages."""
        return cls(tuple(q ** min(k, 3) for k in range(1, n_s + 1)))

    @classmethod
    def uniform(cls, n_s, m):
        return cls((m,) * n_s)

    def __len__(self):
        return len(self.limits)

    def __iter__(self):
        return iter(self.limits)

    def __getitem__(self, k):
        return self.limits[k]

    def __str__(self):
        return ','.join(str(m) for m in self.limits)


@dataclass(frozen=True)
class DetectionResult:
    """
    Outcome of one detector call.

    Attributes
    ----------
    solution : SymbolVector
        Detected vector in the ordering of the ``R`` it was detected on.
    metric : float
        ``||R x - y||^2`` of the solution.
    nodes_visited : int
        Visited-node count under the single-term convention.
    terminated_early : bool
        ULBC QRD-M only: the Babai point was returned before the last stage.
    """
    solution: SymbolVector
    metric: float
    nodes_visited: int
    terminated_early: bool = False


@dataclass(frozen=True)
class Branch:
    """
    Partial hypothesis covering the last ``len(indices)`` rows.

    ``indices[k]`` is the alphabet index for row ``n_s - len(indices) + k``.
    ``residual`` holds ``y - R x_fixed`` restricted to the rows not yet
    fixed, which is all that later stages need.
    """
    indices: tuple
    metric: float
    residual: np.ndarray

    @classmethod
    def root(cls, y):
        return cls((), 0.0, np.array(y, dtype=float))

    @property
    def depth(self):
        return len(self.indices)

    def child(self, candidate, r_upper, alphabet, counter=None):
        """Extended branch with ``candidate`` fixed on the next row up."""
        m = branch_metric(self, candidate, r_upper, alphabet, counter)
        i = r_upper.shape[0] - self.depth - 1
        lev = alphabet.levels[candidate]
        return Branch((int(candidate),) + self.indices, m,
                      self.residual[:i] - r_upper[:i, i] * lev)


class NodeCounter:
    """Mutable visited-node tally owned by a single detector call."""

    def __init__(self):
        self.count = 0

    def add(self, n=1):
        self.count += n


def branch_metric(branch, candidate, r_upper, alphabet, counter=None):
    """
    Accumulative metric of ``branch`` extended by alphabet index ``candidate``.

    The stage is the row just above the rows ``branch`` already fixes, so
    the result is ``branch.metric + (z_i - R[i, i] * level)^2`` where ``z``
    is the interference-cancelled observation.  Counts one node.
    """
    i = r_upper.shape[0] - branch.depth - 1
    if i < 0:
        raise ValueError("branch is already a full-length hypothesis")
    d = branch.residual[i] - r_upper[i, i] * alphabet.levels[candidate]
    if counter is not None:
        counter.add()
    return branch.metric + d * d


def metric(r_upper, y, values):
    """Direct ``||R x - y||^2``."""
    e = r_upper @ np.asarray(values, dtype=float) - y
    return float(e @ e)


def babai_point(r_upper, y, alphabet):
    """
    Successive interference cancellation (Babai nearest plane).

    For ``i = N_s .. 1`` the interference-cancelled observation is divided
    by ``R[i, i]`` and sliced.  Costs exactly ``N_s`` nodes.
    """
    n = r_upper.shape[0]
    levels = alphabet.levels
    z = np.array(y, dtype=float)
    idx = np.empty(n, dtype=np.int64)
    acc = 0.0
    for i in range(n - 1, -1, -1):
        k = slice_index(z[i] / r_upper[i, i], alphabet)
        d = z[i] - r_upper[i, i] * levels[k]
        acc = acc + d * d
        z[:i] = z[:i] - r_upper[:i, i] * levels[k]
        idx[i] = k
    return DetectionResult(SymbolVector(idx, levels[idx]), float(acc), n)


def sphere_decode(r_upper, y, alphabet, initial_radius_sq=math.inf):
    """
    Depth-first Schnorr-Euchner sphere decoder.

    Children of a node are visited in order of distance from the
    interference-cancelled center.  A child whose accumulative metric
    exceeds the current squared radius is pruned together with all its
    remaining siblings.  Each leaf that improves on the best metric so far
    becomes the new radius.  With an infinite initial radius the result is
    the maximum-likelihood point.

    Raises
    ------
    NoPointInSphere
        With a finite radius, when no leaf lies inside the sphere.
    """
    n = r_upper.shape[0]
    R = r_upper.tolist()
    levels = alphabet.levels.tolist()
    mids = alphabet.midpoints.tolist()
    q = alphabet.q
    radius = float(initial_radius_sq)

    cols = [[R[k][i] for k in range(i)] for i in range(n)]
    nodes = 0
    best = None
    best_metric = math.inf

    # Per-depth enumeration state, indexed by row i.
    x = [0] * n
    resid = [None] * (n + 1)
    metrics = [0.0] * (n + 1)
    center = [0.0] * n
    lo = [0] * n
    hi = [0] * n
    resid[n] = [float(v) for v in y]

    def first_child(i):
        # Nearest level; ties at a midpoint go to the lower index.
        c = resid[i + 1][i] / R[i][i]
        k = 0
        while k < q - 1 and c > mids[k]:
            k += 1
        center[i] = c
        lo[i] = k - 1
        hi[i] = k + 1
        return k

    def next_child(i):
        c = center[i]
        a, b = lo[i], hi[i]
        if b >= q:
            if a < 0:
                return -1
            lo[i] = a - 1
            return a
        if a < 0 or abs(c - levels[a]) > abs(c - levels[b]):
            hi[i] = b + 1
            return b
        lo[i] = a - 1
        return a

    i = n - 1
    k = first_child(i)
    while True:
        if k < 0:
            # Level exhausted: backtrack.
            i += 1
            if i >= n:
                break
            k = next_child(i)
            continue
        z = resid[i + 1]
        lev = levels[k]
        d = z[i] - R[i][i] * lev
        m = metrics[i + 1] + d * d
        nodes += 1
        if m > radius:
            # Remaining siblings are farther from the center.
            i += 1
            if i >= n:
                break
            k = next_child(i)
            continue
        x[i] = k
        if i == 0:
            if m < best_metric:
                best_metric = m
                best = list(x)
                radius = m
            k = next_child(0)
            continue
        col = cols[i]
        resid[i] = [z[j] - col[j] * lev for j in range(i)]
        metrics[i] = m
        i -= 1
        k = first_child(i)

    if best is None:
        raise NoPointInSphere(nodes)
    idx = np.array(best, dtype=np.int64)
    return DetectionResult(SymbolVector(idx, alphabet.levels[idx]),
                           float(best_metric), nodes)


class _Beam:
    """Vectorized set of branches sharing the same depth."""

    def __init__(self, y, n):
        self.idx = np.zeros((1, n), dtype=np.int64)
        self.resid = np.array(y, dtype=float)[None, :]
        self.metric = np.zeros(1)

    def __len__(self):
        return self.metric.shape[0]

    def extend(self, i, r_upper, levels, width):
        """Expand every branch to all children at row ``i``, keep the best ``width``.

        Candidates are ranked by metric; ties go to the lower child index,
        then to the earlier parent.
        """
        d = self.resid[:, i][None, :] - r_upper[i, i] * levels[:, None]
        m = (self.metric[None, :] + d * d).ravel()
        nparent = len(self)
        order = np.argsort(m, kind='stable')[:width]
        child, parent = np.divmod(order, nparent)
        lev = levels[child]
        self.resid = self.resid[parent, :i] - r_upper[:i, i][None, :] * lev[:, None]
        self.idx = self.idx[parent]
        self.idx[:, i] = child
        self.metric = m[order]
        return nparent * len(levels)

    def snapshot(self, i):
        return self.idx[:, i:].copy(), self.metric.copy()

    def keep(self, mask):
        self.resid = self.resid[mask]
        self.idx = self.idx[mask]
        self.metric = self.metric[mask]


def _check_schedule(schedule, n):
    if not isinstance(schedule, MSchedule):
        schedule = MSchedule(tuple(schedule))
    if len(schedule) != n:
        raise ValueError(
            "schedule has {0} stages, system has {1}".format(len(schedule), n))
    return schedule


def qrd_m(r_upper, y, alphabet, schedule, trace=None):
    """
    Conventional QRD-M (K-best) breadth-first search.

    At every stage all retained branches are extended to all ``q``
    children and the best ``M_i`` are kept.  The node count depends only
    on ``(n_s, q, schedule)``.

    If ``trace`` is a list, one ``(indices, metrics)`` pair per stage is
    appended with the survivors after selection.
    """
    n = r_upper.shape[0]
    schedule = _check_schedule(schedule, n)
    levels = alphabet.levels
    beam = _Beam(y, n)
    nodes = 0
    for step, i in enumerate(range(n - 1, -1, -1)):
        nodes += beam.extend(i, r_upper, levels, schedule[step])
        if trace is not None:
            trace.append(beam.snapshot(i))
    idx = beam.idx[0].copy()
    return DetectionResult(SymbolVector(idx, levels[idx]),
                           float(beam.metric[0]), nodes)


def ulbc_qrd_m(r_upper, y, alphabet, schedule, mode='paper', trace=None):
    """
    Upper-lower bounded-complexity QRD-M.

    The Babai point is computed first and its metric ``BabaiDist`` becomes
    a pruning threshold.  The QRD-M beam then runs as usual, except that
    after each stage's selection every survivor whose metric strictly
    exceeds ``BabaiDist`` is dropped.

    Parameters
    ----------
    mode : {'paper', 'strict'}
        ``'paper'`` stops after the first stage when a single branch
        survives and returns the Babai point.  ``'strict'`` drops that
        shortcut, which makes the result provably equal to
        ``min(QRD-M, Babai)`` in metric.
    trace : list, optional
        Receives ``(indices, metrics)`` of the survivors after each stage's
        cancellation step.

    Notes
    -----
    When the survivor set empties, or at the end when no survivor beats
    ``BabaiDist``, the Babai point is returned.  Node counts lie between
    ``N_s + q`` and ``f_QRD-M + N_s``.
    """
    if mode not in ('paper', 'strict'):
        raise ValueError("mode must be 'paper' or 'strict', got "
                         "{0!r}".format(mode))
    n = r_upper.shape[0]
    schedule = _check_schedule(schedule, n)
    levels = alphabet.levels
    babai = babai_point(r_upper, y, alphabet)
    threshold = babai.metric
    nodes = babai.nodes_visited

    def fallback():
        return DetectionResult(babai.solution, babai.metric, nodes, True)

    beam = _Beam(y, n)
    for step, i in enumerate(range(n - 1, -1, -1)):
        nodes += beam.extend(i, r_upper, levels, schedule[step])
        beam.keep(beam.metric <= threshold)
        if trace is not None:
            trace.append(beam.snapshot(i))
        if len(beam) == 0:
            return fallback()
        if step == 0 and mode == 'paper' and len(beam) == 1 and n > 1:
            return fallback()
    if beam.metric[0] < threshold:
        idx = beam.idx[0].copy()
        return DetectionResult(SymbolVector(idx, levels[idx]),
                               float(beam.metric[0]), nodes)
    return DetectionResult(babai.solution, babai.metric, nodes)


def full_tree_nodes(n_s, q):
    """Node count of the complete search tree, ``sum_{d=1}^{n_s} q^d``."""
    return sum(q ** d for d in range(1, n_s + 1))


def ml_bruteforce(r_upper, y, alphabet, cap=ML_CAP, chunk=1 << 16):
    """
    Exhaustive maximum-likelihood search.

    Candidates are scanned in lexicographic index order (row 0 most
    significant) and the first minimizer wins.  ``nodes_visited`` reports
    the full-tree count ``sum_d q^d``, the reference ML complexity.

    Raises
    ------
    ValueError
        If ``q ** n_s`` exceeds ``cap``.
    """
    n = r_upper.shape[0]
    q = alphabet.q
    total = q ** n
    if total > cap:
        raise ValueError(
            "exhaustive search over {0} candidates exceeds the cap of "
            "{1}".format(total, cap))
    y = np.asarray(y, dtype=float)
    weights = q ** np.arange(n - 1, -1, -1)
    best_metric = math.inf
    best_code = -1
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))
        digits = (codes[:, None] // weights[None, :]) % q
        e = alphabet.levels[digits] @ r_upper.T - y[None, :]
        d2 = np.einsum('ij,ij->i', e, e)
        k = int(np.argmin(d2))
        if d2[k] < best_metric:
            best_metric = float(d2[k])
            best_code = int(codes[k])
    idx = (best_code // weights) % q
    return DetectionResult(SymbolVector(idx, alphabet.levels[idx]),
                           best_metric, full_tree_nodes(n, q))


def complexity_bounds(schedule, n_s, alphabet):
    """
    Visited-node bounds for a given schedule.

    Returns
    -------
    f_lb : int
        ``n_s + q``: the Babai point plus one expansion of the root.
    f_qrdm : int
        Fixed count of conventional QRD-M.
    f_ub : int
        ``f_qrdm + n_s``.
    """
    schedule = _check_schedule(schedule, n_s)
    q = alphabet.q
    parents = 1
    f_qrdm = 0
    for m in schedule:
        f_qrdm += parents * q
        parents = min(m, parents * q)
    return n_s + q, f_qrdm, f_qrdm + n_s
