"""Seeded generation of Gaussian matrices, Haar Stiefel frames, chi variates
and uniform permutations.

Every random object is drawn from an explicit :class:`numpy.random.Generator`.
Streams come from :func:`derive_substream`, which keys a Philox counter-based
bit generator with the pair ``(master_seed, stream_index)``. Distinct keys give
independent streams, and a given key reproduces the same variates on every
platform, so Monte Carlo loops can hand sample ``i`` its own stream and stay
reproducible no matter how the loop is scheduled.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import DimensionError, check_positive_int

__all__ = [
    "Dims",
    "derive_substream",
    "sample_standard_gaussian",
    "sample_normalized_gaussian",
    "sample_haar_stiefel",
    "sample_chi",
    "sample_chis",
    "sample_uniform_permutation",
]

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class Dims:
    """Matrix shape: ``n`` rows (ambient dimension), ``k`` columns (frame size)."""

    n: int
    k: int

    def __post_init__(self):
        check_positive_int(self.n, "n")
        check_positive_int(self.k, "k")
        if self.k > self.n:
            raise DimensionError(f"k={self.k} exceeds n={self.n}")

    @property
    def rho(self):
        """Aspect ratio ``k / n`` in ``(0, 1]``."""
        return self.k / self.n

    @property
    def shape(self):
        return (self.n, self.k)


def derive_substream(master_seed, stream_index):
    """Return the generator for substream ``stream_index`` of ``master_seed``.

    Both arguments are unsigned 64-bit integers and together form the Philox
    key, so no two ``(seed, index)`` pairs share a stream.
    """
    for name, value in (("master_seed", master_seed), ("stream_index", stream_index)):
        if not 0 <= int(value) <= _UINT64_MAX:
            raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
    return _substream(int(master_seed), int(stream_index))


def _substream(master_seed, stream_index):
    # unchecked fast path for sample loops that validated their index range
    key = np.array((master_seed, stream_index), dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_standard_gaussian(dims, stream):
    """Draw an ``n x k`` matrix with i.i.d. N(0, 1) entries."""
    return stream.standard_normal(dims.shape)


def sample_normalized_gaussian(dims, stream):
    """Draw an ``n x k`` matrix with i.i.d. N(0, 1/n) entries.

    Consumes the stream exactly like :func:`sample_standard_gaussian`, so on
    identical streams the result is that matrix scaled by ``n**-0.5``.
    """
    return sample_standard_gaussian(dims, stream) / np.sqrt(dims.n)


def sample_haar_stiefel(dims, stream, validate=True):
    """Draw a uniformly random ``k``-frame in ``R^n``.

    The frame is the orthonormal factor of a standard Gaussian matrix under
    the QR convention ``diag(R) > 0``. Without the sign fix the output of a
    Householder QR is not Haar distributed.

    Parameters
    ----------
    dims : Dims
    stream : numpy.random.Generator
    validate : bool, default True
        Check ``max |Q^T Q - I| <= 1e-10`` before returning.

    Returns
    -------
    ndarray of shape (n, k)
    """
    from .factorizations import qr_positive_diagonal

    Q, _ = qr_positive_diagonal(sample_standard_gaussian(dims, stream), validate=validate)
    return Q


def sample_chis(dofs, stream):
    """Vectorized chi variates, one per entry of ``dofs``.

    Uses ``sqrt(2 * Gamma(dof / 2, 1))``, which costs O(1) per variate for any
    number of degrees of freedom.
    """
    dofs = np.asarray(dofs)
    if np.any(dofs < 1):
        raise ValueError("degrees of freedom must be >= 1")
    return np.sqrt(2.0 * stream.standard_gamma(dofs / 2.0))


def sample_chi(dof, stream):
    """Draw one chi variate (square root of a chi-square with ``dof`` dof)."""
    dof = check_positive_int(dof, "dof")
    return float(np.sqrt(2.0 * stream.standard_gamma(dof / 2.0)))


def sample_uniform_permutation(k, stream):
    """Uniform random permutation of ``0, ..., k-1`` by Fisher-Yates."""
    k = check_positive_int(k, "k")
    perm = np.arange(k)
    for i in range(k - 1, 0, -1):
        j = int(stream.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm
