"""Real PAM alphabets for lattice search over square QAM constellations.

A square ``C``-QAM symbol is the sum of two independent ``q``-PAM symbols
(``q = sqrt(C)``), one per real dimension.  All detectors operate on the
real-valued model, so the alphabet here is the per-dimension PAM set.
"""

from dataclasses import dataclass, field
import math

import numpy as np

__all__ = ['PamAlphabet', 'SymbolVector', 'make_alphabet', 'slice_index',
           'slice_indices', 'se_children', 'random_symbol_vector']


@dataclass(frozen=True)
class PamAlphabet:
    """
    Per-dimension PAM alphabet.

    Attributes
    ----------
    levels : 1D numpy array
        Ascending real levels ``(2k - (q - 1)) * scale`` for ``k = 0..q-1``.
    q : int
        Number of levels per real dimension.
    constellation_size : int
        Size ``C = q**2`` of the complex constellation.
    scale : float
        Normalization giving unit average complex-symbol energy.
    """
    levels: np.ndarray
    q: int
    constellation_size: int
    scale: float
    # Decision boundaries between consecutive levels.
    midpoints: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        self.levels.setflags(write=False)
        self.midpoints.setflags(write=False)


@dataclass(frozen=True)
class SymbolVector:
    """Alphabet indices and the matching real levels of a real-domain vector."""
    indices: np.ndarray
    values: np.ndarray

    @classmethod
    def from_indices(cls, indices, alphabet):
        indices = np.asarray(indices, dtype=np.int64)
        if indices.ndim != 1:
            raise ValueError("indices must be one-dimensional")
        if np.any(indices < 0) or np.any(indices >= alphabet.q):
            raise ValueError(
                "indices must lie in [0, {0})".format(alphabet.q))
        return cls(indices, alphabet.levels[indices])

    def __len__(self):
        return len(self.indices)

    def to_complex(self):
        """Return the complex symbols, assuming ``[real parts; imag parts]``."""
        n = len(self.values)
        if n % 2:
            raise ValueError("real dimension must be even")
        return self.values[:n // 2] + 1j * self.values[n // 2:]


def make_alphabet(constellation_size):
    """
    Build the PAM alphabet for a square QAM constellation.

    Parameters
    ----------
    constellation_size : int
        ``C``; must be an even power of two (4, 16, 64, ...).

    Returns
    -------
    PamAlphabet
        Levels are the odd-integer grid scaled by ``sqrt(3 / (2 (C - 1)))``,
        which gives ``E[|s|^2] = 1`` for the complex symbol.
    """
    c = int(constellation_size)
    if c != constellation_size or c < 4 or c & (c - 1):
        raise ValueError(
            "constellation size must be a power of two >= 4, got "
            "{0!r}".format(constellation_size))
    q = math.isqrt(c)
    if q * q != c:
        raise ValueError(
            "constellation size {0} is not a perfect square".format(c))
    scale = math.sqrt(3.0 / (2.0 * (c - 1)))
    levels = (2.0 * np.arange(q) - (q - 1)) * scale
    midpoints = 0.5 * (levels[:-1] + levels[1:])
    return PamAlphabet(levels, q, c, scale, midpoints)


def slice_indices(values, alphabet):
    """Vectorized nearest-level decision; exact midpoints go to the lower index."""
    return np.searchsorted(alphabet.midpoints, values, side='left')


def slice_index(value, alphabet):
    """Index of the level nearest to ``value`` (saturating at the edges)."""
    return int(np.searchsorted(alphabet.midpoints, value, side='left'))


def se_children(center, alphabet):
    """
    Schnorr-Euchner ordering of the alphabet around ``center``.

    Returns all ``q`` indices ordered by nondecreasing distance
    ``|center - level|``, ties resolved toward the lower index.  The first
    entry is always ``slice_index(center)``.
    """
    levels = alphabet.levels
    q = alphabet.q
    k = slice_index(center, alphabet)
    order = [k]
    lo, hi = k - 1, k + 1
    while lo >= 0 or hi < q:
        if hi >= q:
            order.append(lo)
            lo -= 1
        elif lo < 0:
            order.append(hi)
            hi += 1
        elif abs(center - levels[lo]) <= abs(center - levels[hi]):
            order.append(lo)
            lo -= 1
        else:
            order.append(hi)
            hi += 1
    return order


def random_symbol_vector(n_s, alphabet, rng):
    """Draw ``n_s`` i.i.d. uniform alphabet indices from ``rng``."""
    if n_s < 1:
        raise ValueError("n_s must be >= 1, got {0}".format(n_s))
    return SymbolVector.from_indices(
        rng.integers(0, alphabet.q, size=n_s), alphabet)
