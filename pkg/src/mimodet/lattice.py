"""Real-valued lattice model of a complex MIMO channel and its QR reduction.

The complex model ``r = H x + v`` is stacked into the real model
``r_r = H_r x_r + v_r`` with ``x_r = [Re(x); Im(x)]`` and

    H_r = [[Re(H), -Im(H)],
           [Im(H),  Re(H)]]

After ``H_r = Q R`` the detectors work on ``y = Q^T r_r = R x_r + n``.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ['SingularChannelError', 'ComplexChannel', 'RealSystem',
           'QRFactorization', 'complex_to_real', 'complex_to_real_system',
           'qr_decompose', 'sorted_qr_decompose', 'apply_qt',
           'condition_number', 'RANK_TOL']

#: Relative singular-value threshold below which a channel is rejected.
RANK_TOL = 1e-12


class SingularChannelError(ValueError):
    """Raised when a channel matrix is numerically rank deficient."""


@dataclass(frozen=True)
class ComplexChannel:
    """Complex channel matrix of shape ``(n_rx, n_tx)``."""
    entries: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.entries, dtype=complex)
        if h.ndim != 2:
            raise ValueError("channel must be a 2D matrix")
        n_rx, n_tx = h.shape
        if n_tx < 1 or n_rx < n_tx:
            raise ValueError(
                "need n_rx >= n_tx >= 1, got n_rx={0}, n_tx={1}".format(
                    n_rx, n_tx))
        if not np.all(np.isfinite(h)):
            raise ValueError("channel has non-finite entries")
        h.setflags(write=False)
        object.__setattr__(self, 'entries', h)

    @property
    def n_rx(self):
        return self.entries.shape[0]

    @property
    def n_tx(self):
        return self.entries.shape[1]


@dataclass(frozen=True)
class RealSystem:
    """Real-domain system ``(H_r, r_r)``; ``n_s = 2 n_tx``."""
    h_real: np.ndarray
    r_real: np.ndarray

    @property
    def n_s(self):
        return self.h_real.shape[1]


@dataclass(frozen=True)
class QRFactorization:
    """
    ``q @ r_upper == h_real[:, perm]``.

    ``r_upper`` is upper triangular with a strictly positive diagonal.  A
    vector ``z`` detected on the reduced model is mapped back to the
    original ordering with ``x[perm] = z`` (see :meth:`unpermute`).
    """
    q: np.ndarray
    r_upper: np.ndarray
    perm: np.ndarray

    def unpermute(self, z):
        z = np.asarray(z)
        x = np.empty_like(z)
        x[self.perm] = z
        return x


def complex_to_real(v):
    """Stack a complex vector as ``[Re(v); Im(v)]``."""
    v = np.asarray(v)
    return np.concatenate([v.real, v.imag])


def complex_to_real_system(channel, received):
    """
    Map ``(H, r)`` to the real-domain system.

    Parameters
    ----------
    channel : ComplexChannel or 2D array
        Complex channel of shape ``(n_rx, n_tx)``.
    received : 1D complex array
        Received vector of length ``n_rx``.

    Returns
    -------
    RealSystem
    """
    if not isinstance(channel, ComplexChannel):
        channel = ComplexChannel(channel)
    r = np.asarray(received, dtype=complex)
    if r.ndim != 1 or r.shape[0] != channel.n_rx:
        raise ValueError(
            "received vector has shape {0}, expected ({1},)".format(
                r.shape, channel.n_rx))
    if not np.all(np.isfinite(r)):
        raise ValueError("received vector has non-finite entries")
    h = channel.entries
    h_real = np.block([[h.real, -h.imag], [h.imag, h.real]])
    return RealSystem(h_real, complex_to_real(r))


def _check_rank(h):
    sv = np.linalg.svd(h, compute_uv=False)
    if not np.all(np.isfinite(sv)) or sv[-1] <= RANK_TOL * sv[0]:
        raise SingularChannelError("singular channel")


def _as_matrix(system):
    return system.h_real if isinstance(system, RealSystem) else np.asarray(
        system, dtype=float)


def qr_decompose(system):
    """
    Householder QR of ``H_r`` with the diagonal of ``R`` made positive.

    Raises
    ------
    SingularChannelError
        If the smallest singular value is below ``RANK_TOL`` times the
        largest.
    """
    h = _as_matrix(system)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("QR reduction needs a square real matrix")
    _check_rank(h)
    q, r = np.linalg.qr(h)
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    q = q * signs
    r = np.triu(r * signs[:, None])
    return QRFactorization(q, r, np.arange(h.shape[1]))


def sorted_qr_decompose(system):
    """
    Sorted QR decomposition (modified Gram-Schmidt with column pivoting).

    At every step the not-yet-processed column with the smallest residual
    norm is taken next, so the layers detected first (the last columns)
    get the largest diagonal entries of ``R``.
    """
    h = _as_matrix(system)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("QR reduction needs a square real matrix")
    _check_rank(h)
    n = h.shape[1]
    q = h.astype(float)
    r = np.zeros((n, n))
    perm = np.arange(n)
    for i in range(n):
        norms = np.einsum('ij,ij->j', q[:, i:], q[:, i:])
        k = i + int(np.argmin(norms))
        if k != i:
            q[:, [i, k]] = q[:, [k, i]]
            r[:i, [i, k]] = r[:i, [k, i]]
            perm[[i, k]] = perm[[k, i]]
        # Second projection pass keeps Q orthonormal for poorly conditioned H.
        for j in range(i):
            c = q[:, j] @ q[:, i]
            r[j, i] += c
            q[:, i] -= c * q[:, j]
        r[i, i] = np.linalg.norm(q[:, i])
        q[:, i] /= r[i, i]
        if i + 1 < n:
            proj = q[:, i] @ q[:, i + 1:]
            r[i, i + 1:] = proj
            q[:, i + 1:] -= np.outer(q[:, i], proj)
    return QRFactorization(q, r, perm)


def apply_qt(factors, received):
    """Return ``y = Q^T r_r``."""
    received = np.asarray(received, dtype=float)
    if received.shape != (factors.q.shape[0],):
        raise ValueError(
            "received vector has shape {0}, expected ({1},)".format(
                received.shape, factors.q.shape[0]))
    return factors.q.T @ received


def condition_number(system):
    """Ratio of extreme singular values of ``H_r`` (``inf`` if singular)."""
    h = _as_matrix(system)
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    sv = np.linalg.svd(h, compute_uv=False)
    if sv[-1] <= RANK_TOL * sv[0] or sv[-1] == 0.0:
        return np.inf
    return float(sv[0] / sv[-1])
