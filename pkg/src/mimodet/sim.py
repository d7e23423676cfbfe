"""Monte Carlo link simulation over flat i.i.d. Rayleigh MIMO channels.

Each trial draws its own random stream from ``(master_seed, snr_db,
trial_index)``, so results do not depend on how trials are scheduled
across workers.  Aggregated statistics are integer sums, which keeps the
merge step exact and order independent.

SNR convention: total received signal power per receive antenna over
noise power per receive antenna.  With unit-energy symbols and
unit-variance channel gains the signal power is ``n_tx``, so the noise
variance per complex entry is ``n_tx / 10**(snr_db / 10)``.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import math
import struct

import numpy as np

from .constellation import SymbolVector, make_alphabet, random_symbol_vector
from .detectors import (ML_CAP, DetectionResult, MSchedule, babai_point,
                        complexity_bounds, ml_bruteforce, qrd_m, sphere_decode,
                        ulbc_qrd_m)
from .lattice import (ComplexChannel, SingularChannelError, apply_qt,
                      complex_to_real_system, qr_decompose,
                      sorted_qr_decompose)

__all__ = ['DETECTORS', 'SNR_CONVENTION', 'SimConfig', 'DetectorStats',
           'TrialStats', 'TrialOutcome', 'gen_channel', 'add_noise',
           'noise_variance', 'trial_rng', 'run_trial', 'run_experiment']

DETECTORS = ('babai', 'ml', 'qrdm', 'sd', 'ulbc_paper', 'ulbc_strict')
ULBC_DETECTORS = ('ulbc_paper', 'ulbc_strict')
SNR_CONVENTION = ('total received signal power per receive antenna / '
                  'noise power per receive antenna')

#: Histogram resolution between the ULBC lower and upper bound.
HIST_BINS = 32
#: Give up on a trial after this many rank-deficient channel draws.
MAX_REDRAWS = 100


@dataclass(frozen=True)
class SimConfig:
    """Experiment configuration; ``schedule=None`` means the default."""
    n_tx: int = 4
    n_rx: int = 4
    constellation_size: int = 16
    schedule: MSchedule = None
    snr_grid: tuple = (0.0, 4.0, 8.0, 12.0, 16.0, 20.0, 24.0)
    trials_per_snr: int = 10_000
    master_seed: int = 0
    detector_set: tuple = ('babai', 'qrdm', 'sd', 'ulbc_paper', 'ulbc_strict')
    ordering: str = 'plain_qr'
    ml_cap: int = ML_CAP

    def __post_init__(self):
        if self.n_tx < 1 or self.n_rx < self.n_tx:
            raise ValueError("need n_rx >= n_tx >= 1")
        if self.n_rx != self.n_tx:
            raise ValueError("detectors need a square system (n_rx == n_tx)")
        alphabet = make_alphabet(self.constellation_size)
        n_s = 2 * self.n_tx
        sched = self.schedule
        if sched is None:
            sched = MSchedule.default(n_s, alphabet.q)
        elif not isinstance(sched, MSchedule):
            sched = MSchedule(tuple(sched))
        if len(sched) != n_s:
            raise ValueError(
                "schedule has {0} stages, expected n_s = {1}".format(
                    len(sched), n_s))
        object.__setattr__(self, 'schedule', sched)
        grid = tuple(float(s) for s in self.snr_grid)
        if not grid:
            raise ValueError("snr_grid must not be empty")
        if any(math.isnan(s) for s in grid):
            raise ValueError("snr_grid contains NaN")
        object.__setattr__(self, 'snr_grid', grid)
        if self.trials_per_snr < 1:
            raise ValueError("trials_per_snr must be >= 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        dets = tuple(sorted(set(self.detector_set)))
        unknown = set(dets) - set(DETECTORS)
        if unknown:
            raise ValueError("unknown detectors: {0}".format(
                ', '.join(sorted(unknown))))
        if not dets:
            raise ValueError("detector_set must not be empty")
        if 'ml' in dets and alphabet.q ** n_s > self.ml_cap:
            raise ValueError(
                "ml needs q**n_s = {0} candidates, above the cap {1}".format(
                    alphabet.q ** n_s, self.ml_cap))
        object.__setattr__(self, 'detector_set', dets)
        if self.ordering not in ('plain_qr', 'sorted_qr'):
            raise ValueError("ordering must be 'plain_qr' or 'sorted_qr'")

    @property
    def n_s(self):
        return 2 * self.n_tx

    @property
    def alphabet(self):
        return make_alphabet(self.constellation_size)

    def bounds(self):
        return complexity_bounds(self.schedule, self.n_s, self.alphabet)


def gen_channel(n_rx, n_tx, rng):
    """I.i.d. CN(0, 1) channel matrix (variance 1/2 per real component)."""
    if n_rx < 1 or n_tx < 1:
        raise ValueError("antenna counts must be >= 1")
    h = (rng.standard_normal((n_rx, n_tx))
         + 1j * rng.standard_normal((n_rx, n_tx))) * math.sqrt(0.5)
    return ComplexChannel(h)


def noise_variance(snr_db, n_tx):
    """Per-entry complex noise variance for the configured SNR convention."""
    return n_tx / 10.0 ** (snr_db / 10.0)


def add_noise(clean, snr_db, n_tx, rng):
    """Add circularly-symmetric Gaussian noise; ``snr_db=inf`` is noiseless."""
    clean = np.asarray(clean, dtype=complex)
    if not np.all(np.isfinite(clean)):
        raise ValueError("clean signal has non-finite entries")
    if snr_db == math.inf:
        return clean.copy()
    sigma = math.sqrt(noise_variance(snr_db, n_tx) / 2.0)
    noise = rng.standard_normal(clean.shape) + 1j * rng.standard_normal(
        clean.shape)
    return clean + sigma * noise


def _snr_key(snr_db):
    return struct.unpack('<Q', struct.pack('<d', float(snr_db)))[0]


def trial_rng(master_seed, snr_db, trial_index):
    """Independent generator for one ``(seed, snr, trial)`` triple."""
    ss = np.random.SeedSequence(
        master_seed, spawn_key=(_snr_key(snr_db), int(trial_index)))
    return np.random.default_rng(ss)


@dataclass
class TrialOutcome:
    """Ground truth and per-detector results of one trial.

    Solutions in ``results`` are already mapped back to the transmit
    ordering, so they compare directly with ``truth``.
    """
    truth: object
    results: dict
    babai_dist: float
    redraws: int
    r_upper: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    perm: np.ndarray = field(repr=False)


def _detect(name, r_upper, y, alphabet, config):
    if name == 'babai':
        return babai_point(r_upper, y, alphabet)
    if name == 'sd':
        return sphere_decode(r_upper, y, alphabet)
    if name == 'qrdm':
        return qrd_m(r_upper, y, alphabet, config.schedule)
    if name == 'ulbc_paper':
        return ulbc_qrd_m(r_upper, y, alphabet, config.schedule, 'paper')
    if name == 'ulbc_strict':
        return ulbc_qrd_m(r_upper, y, alphabet, config.schedule, 'strict')
    if name == 'ml':
        return ml_bruteforce(r_upper, y, alphabet, cap=config.ml_cap)
    raise ValueError("unknown detector {0!r}".format(name))


def run_trial(config, snr_db, trial_index, detectors=None):
    """
    One Monte Carlo realization.

    Draws ``H``, ``x`` and the noise from the trial's own stream, reduces
    the system once, and runs every requested detector on the same
    ``(R, y)``.  Rank-deficient channels are redrawn and counted.
    """
    rng = trial_rng(config.master_seed, snr_db, trial_index)
    alphabet = config.alphabet
    decompose = (sorted_qr_decompose if config.ordering == 'sorted_qr'
                 else qr_decompose)
    for redraws in range(MAX_REDRAWS):
        channel = gen_channel(config.n_rx, config.n_tx, rng)
        x = random_symbol_vector(config.n_s, alphabet, rng)
        received = add_noise(channel.entries @ x.to_complex(), snr_db,
                             config.n_tx, rng)
        system = complex_to_real_system(channel, received)
        try:
            factors = decompose(system)
        except SingularChannelError:
            continue
        break
    else:
        raise SingularChannelError(
            "{0} consecutive singular channel draws".format(MAX_REDRAWS))
    y = apply_qt(factors, system.r_real)
    r_upper = factors.r_upper
    names = config.detector_set if detectors is None else detectors
    results = {}
    for name in names:
        res = _detect(name, r_upper, y, alphabet, config)
        idx = factors.unpermute(res.solution.indices)
        results[name] = DetectionResult(
            SymbolVector(idx, alphabet.levels[idx]), res.metric,
            res.nodes_visited, res.terminated_early)
    if 'babai' in results:
        babai_dist = results['babai'].metric
    else:
        babai_dist = babai_point(r_upper, y, alphabet).metric
    return TrialOutcome(x, results, babai_dist, redraws, r_upper, y,
                        factors.perm)


@dataclass
class DetectorStats:
    """Integer aggregates for one (SNR, detector) cell."""
    f_lb: int
    f_ub: int
    trials: int = 0
    vector_errors: int = 0
    symbol_errors: int = 0
    node_sum: int = 0
    node_min: int = None
    node_max: int = None
    histogram: np.ndarray = None
    ulbc_equals_qrdm: int = 0
    early_terminations: int = 0

    def __post_init__(self):
        if self.histogram is None:
            # [below f_lb, HIST_BINS bins over [f_lb, f_ub], above f_ub]
            self.histogram = np.zeros(HIST_BINS + 2, dtype=np.int64)

    @property
    def bin_edges(self):
        return np.linspace(self.f_lb, self.f_ub + 1, HIST_BINS + 1)

    def record(self, nodes, vector_error, symbol_errors, early=False,
               equals_qrdm=False):
        self.trials += 1
        self.vector_errors += int(vector_error)
        self.symbol_errors += int(symbol_errors)
        self.node_sum += int(nodes)
        self.node_min = nodes if self.node_min is None else min(
            self.node_min, nodes)
        self.node_max = nodes if self.node_max is None else max(
            self.node_max, nodes)
        if nodes < self.f_lb:
            b = 0
        elif nodes > self.f_ub:
            b = HIST_BINS + 1
        else:
            b = 1 + min(int(np.searchsorted(self.bin_edges, nodes,
                                            side='right')) - 1, HIST_BINS - 1)
        self.histogram[b] += 1
        self.early_terminations += int(early)
        self.ulbc_equals_qrdm += int(equals_qrdm)

    def merge(self, other):
        if other.trials == 0:
            return
        self.trials += other.trials
        self.vector_errors += other.vector_errors
        self.symbol_errors += other.symbol_errors
        self.node_sum += other.node_sum
        self.node_min = other.node_min if self.node_min is None else min(
            self.node_min, other.node_min)
        self.node_max = other.node_max if self.node_max is None else max(
            self.node_max, other.node_max)
        self.histogram += other.histogram
        self.ulbc_equals_qrdm += other.ulbc_equals_qrdm
        self.early_terminations += other.early_terminations

    @property
    def node_mean(self):
        return self.node_sum / self.trials if self.trials else math.nan


@dataclass
class TrialStats:
    """Aggregates keyed by ``(snr_db, detector)``, plus redraw counts per SNR."""
    config: SimConfig
    cells: dict = field(default_factory=dict)
    redraws: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, config):
        f_lb, _, f_ub = config.bounds()
        stats = cls(config)
        for snr in config.snr_grid:
            stats.redraws[snr] = 0
            for name in config.detector_set:
                stats.cells[snr, name] = DetectorStats(f_lb, f_ub)
        return stats

    def __getitem__(self, key):
        return self.cells[key]

    def record(self, snr_db, outcome):
        self.redraws[snr_db] += outcome.redraws
        truth = outcome.truth.indices
        qrdm = outcome.results.get('qrdm')
        for name, res in outcome.results.items():
            diff = res.solution.indices != truth
            half = len(diff) // 2
            wrong = np.count_nonzero(diff[:half] | diff[half:])
            same = (name in ULBC_DETECTORS and qrdm is not None
                    and np.array_equal(res.solution.indices,
                                       qrdm.solution.indices))
            self.cells[snr_db, name].record(
                res.nodes_visited, wrong > 0, wrong, res.terminated_early,
                same)

    def merge(self, other):
        for key, cell in other.cells.items():
            self.cells[key].merge(cell)
        for snr, n in other.redraws.items():
            self.redraws[snr] += n
        return self


def _run_chunk(args):
    config, snr_db, start, stop = args
    stats = TrialStats.empty(config)
    for t in range(start, stop):
        stats.record(snr_db, run_trial(config, snr_db, t))
    return stats


def _chunks(config, chunk_size):
    for snr in config.snr_grid:
        for start in range(0, config.trials_per_snr, chunk_size):
            yield (config, snr,
                   start, min(start + chunk_size, config.trials_per_snr))


def run_experiment(config, workers=1, chunk_size=500):
    """
    Run ``trials_per_snr`` trials at every SNR and aggregate.

    Parameters
    ----------
    workers : int
        Number of worker processes; ``1`` runs in-process.  The result is
        identical for any worker count.
    """
    stats = TrialStats.empty(config)
    jobs = list(_chunks(config, chunk_size))
    if workers <= 1:
        for job in jobs:
            stats.merge(_run_chunk(job))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_run_chunk, jobs):
                stats.merge(part)
    return stats
