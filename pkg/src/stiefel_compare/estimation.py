"""Monte Carlo estimation with per-sample substreams and z-policy verdicts.

Sample ``i`` of an estimate is drawn from ``derive_substream(seed, offset +
stride * i)``. Values are gathered in index order before reduction, so the
estimate is bit-identical for any number of worker processes.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .factorizations import polar_factorize, sample_bartlett_R
from .sampling import (
    Dims,
    _substream,
    derive_substream,
    sample_haar_stiefel,
    sample_normalized_gaussian,
    sample_standard_gaussian,
)

__all__ = [
    "McEstimate",
    "Verdict",
    "CONSISTENT",
    "VIOLATED",
    "INCONCLUSIVE",
    "compare",
    "estimate_expectation",
    "sample_values",
    "resolve_workers",
    "HaarSampler",
    "GaussianSampler",
    "OrthogonalSumSampler",
    "TriangularSampler",
    "MultiFunctional",
]

CONSISTENT = "CONSISTENT"
VIOLATED = "VIOLATED"
INCONCLUSIVE = "INCONCLUSIVE"

WORKERS_ENV = "STIEFEL_COMPARE_WORKERS"


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error ``std(ddof=1) / sqrt(n_samples)``."""

    mean: float
    stderr: float
    n_samples: int
    master_seed: int

    @classmethod
    def from_values(cls, values, master_seed):
        values = np.ascontiguousarray(values, dtype=np.float64)
        n = values.shape[0]
        if n < 2:
            raise ValueError("need at least two samples for a standard error")
        return cls(
            mean=float(np.mean(values)),
            stderr=float(np.std(values, ddof=1) / math.sqrt(n)),
            n_samples=int(n),
            master_seed=int(master_seed),
        )

    def scaled(self, c):
        return McEstimate(self.mean * c, self.stderr * abs(c), self.n_samples, self.master_seed)


@dataclass(frozen=True)
class Verdict:
    status: str
    z_margin: float


def compare(lhs, rhs, z=3.0):
    """Verdict on the claim ``E lhs <= E rhs``.

    VIOLATED when the claim fails even after giving each side ``z`` standard
    errors of slack; INCONCLUSIVE when only the point estimates disagree with
    it; CONSISTENT otherwise. ``z_margin`` is the normalized gap
    ``(rhs - lhs) / sqrt(se_lhs^2 + se_rhs^2)``.
    """
    if z <= 0:
        raise ValueError("z must be positive")
    gap = rhs.mean - lhs.mean
    denom = math.hypot(lhs.stderr, rhs.stderr)
    if denom > 0:
        margin = gap / denom
    else:
        margin = math.copysign(math.inf, gap) if gap != 0 else 0.0
    if lhs.mean - z * lhs.stderr > rhs.mean + z * rhs.stderr:
        status = VIOLATED
    elif lhs.mean > rhs.mean:
        status = INCONCLUSIVE
    else:
        status = CONSISTENT
    return Verdict(status, margin)


# Samplers: picklable callables ``stream -> object``.


@dataclass(frozen=True)
class HaarSampler:
    dims: Dims

    def __call__(self, stream):
        return sample_haar_stiefel(self.dims, stream)


@dataclass(frozen=True)
class GaussianSampler:
    """Standard (``normalized=False``) or N(0, 1/n) Gaussian, times ``scale``."""

    dims: Dims
    normalized: bool = True
    scale: float = 1.0

    def __call__(self, stream):
        if self.normalized:
            M = sample_normalized_gaussian(self.dims, stream)
        else:
            M = sample_standard_gaussian(self.dims, stream)
        return M if self.scale == 1.0 else self.scale * M


@dataclass(frozen=True, eq=False)
class OrthogonalSumSampler:
    """``sum_j X_j A_j`` with ``X_j`` i.i.d. Haar orthogonal (``kind="haar"``)
    or normalized Gaussian (``kind="gaussian"``), drawn in order from one stream."""

    A_list: tuple
    kind: str = "haar"

    def __call__(self, stream):
        n = self.A_list[0].shape[0]
        dims = Dims(n, n)
        draw = sample_haar_stiefel if self.kind == "haar" else sample_normalized_gaussian
        total = np.zeros((n, n))
        for A in self.A_list:
            total += draw(dims, stream) @ A
        return total


@dataclass(frozen=True)
class TriangularSampler:
    """The ``k x k`` factor ``T``: Bartlett ``R`` or the Wishart root ``W``."""

    dims: Dims
    choice: str = "bartlett_R"

    def __call__(self, stream):
        if self.choice == "bartlett_R":
            return sample_bartlett_R(self.dims, stream)
        if self.choice == "wishart_W":
            return polar_factorize(sample_standard_gaussian(self.dims, stream))[1]
        raise ValueError(f"unknown T choice {self.choice!r}")


@dataclass(frozen=True, eq=False)
class MultiFunctional:
    """Evaluate several scalar functionals on one draw."""

    functionals: tuple

    def __call__(self, M):
        return np.array([f(M) for f in self.functionals], dtype=np.float64)


def resolve_workers(workers=None):
    """Worker count: the request (default: CPU count) capped by ``$STIEFEL_COMPARE_WORKERS``."""
    n = (os.cpu_count() or 1) if workers is None else int(workers)
    cap = os.environ.get(WORKERS_ENV)
    if cap:
        n = min(n, int(cap))
    return max(n, 1)


def _eval_chunk(sampler, functional, master_seed, indices):
    return [functional(sampler(_substream(master_seed, i))) for i in indices]


def sample_values(sampler, functional, n_samples, master_seed, offset=0, stride=1, workers=None):
    """Evaluate ``functional(sampler(stream_i))`` for ``i = 0..n_samples-1``.

    Returns an array of shape ``(n_samples,)`` for scalar functionals or
    ``(n_samples, m)`` for vector-valued ones, always in index order.
    """
    last = offset + stride * (n_samples - 1)
    derive_substream(master_seed, offset)
    derive_substream(master_seed, last)  # range check for the whole loop
    indices = range(offset, last + 1, stride)
    workers = resolve_workers(workers)
    if workers == 1 or n_samples < 2 * workers:
        out = _eval_chunk(sampler, functional, master_seed, indices)
    else:
        bounds = np.linspace(0, n_samples, 4 * workers + 1).astype(int)
        chunks = [indices[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
        out = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_eval_chunk, sampler, functional, master_seed, c) for c in chunks]
            for fut in futures:
                out.extend(fut.result())
    return np.asarray(out, dtype=np.float64)


def estimate_expectation(
    sampler, functional, n_samples, master_seed, offset=0, stride=1, workers=None
):
    """Monte Carlo estimate of ``E functional(sampler())``.

    Parameters
    ----------
    sampler : callable
        ``stream -> draw``; must be picklable when ``workers > 1``.
    functional : callable
        ``draw -> float``.
    n_samples : int
        At least 2.
    master_seed : int
    offset, stride : int
        Sample ``i`` uses substream ``offset + stride * i``.
    workers : int, optional

    Returns
    -------
    McEstimate
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    values = sample_values(sampler, functional, n_samples, master_seed, offset, stride, workers)
    return McEstimate.from_values(values, master_seed)
