"""Norms, convex post-compositions and the auxiliary matrix maps.

Everything here is deterministic. A :class:`NormSpec` names a nonnegative
sublinear function on matrices, a :class:`PhiSpec` a weakly increasing convex
scalar function, and :class:`ConvexFunctional` combines them with an affine
part to give concrete convex (or, negated, concave) matrix functions.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import DimensionError, check_matrix, check_positive_int, check_square
from .factorizations import jacobi_eigh

__all__ = [
    "NormSpec",
    "PhiSpec",
    "ConvexFunctional",
    "eval_norm",
    "eval_phi",
    "spectral_norm",
    "spectral_norm_power",
    "spectral_norm_jacobi",
    "op_norm_linf_l1_bruteforce",
    "restrict_scale",
    "assemble_sum",
    "parse_norm",
    "parse_phi",
]

NORM_KINDS = ("spectral", "frobenius", "max_entry", "op_norm")
VECTOR_NORMS = ("l1", "l2", "linf")
_DUAL = {"l1": "linf", "l2": "l2", "linf": "l1"}
_VEC_ORD = {"l1": 1, "l2": 2, "linf": np.inf}


def _computable_pair(domain, codomain):
    return domain == "l1" or codomain == "linf" or (domain, codomain) == ("l2", "l2")


@dataclass(frozen=True)
class NormSpec:
    """A nonnegative sublinear matrix function.

    ``op_norm`` is the induced norm ``||M||_{Y->Z} = max_{||x||_Y <= 1} ||M x||_Z``;
    only pairs with a closed form are accepted: ``l1 -> any``, ``any -> linf``
    and ``l2 -> l2``.
    """

    kind: str
    domain_norm: str | None = None
    codomain_norm: str | None = None

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}; expected one of {NORM_KINDS}")
        if self.kind == "op_norm":
            for v in (self.domain_norm, self.codomain_norm):
                if v not in VECTOR_NORMS:
                    raise ValueError(f"op_norm needs vector norms from {VECTOR_NORMS}, got {v!r}")
            if not _computable_pair(self.domain_norm, self.codomain_norm):
                raise ValueError(
                    f"op_norm {self.domain_norm}->{self.codomain_norm} has no closed form"
                )
        elif self.domain_norm is not None or self.codomain_norm is not None:
            raise ValueError(f"{self.kind} takes no vector norms")

    @classmethod
    def op(cls, domain, codomain):
        return cls("op_norm", domain, codomain)

    @property
    def label(self):
        if self.kind == "op_norm":
            return f"{self.domain_norm}->{self.codomain_norm}"
        return self.kind

    @property
    def right_ideal(self):
        """Whether ``|AB| <= |A| * ||B||_2`` holds for every ``A``, ``B``."""
        return self.kind in ("spectral", "frobenius") or self.label == "l2->l2"


@dataclass(frozen=True)
class PhiSpec:
    """A weakly increasing convex function ``R -> R``.

    ``identity``: t; ``hinge``: ``max(0, max(0, t) - c)``; ``power``:
    ``max(0, t)**m``; ``exp_scale``: ``exp(theta * t)``.
    """

    kind: str = "identity"
    c: float = 1.0
    m: float = 2.0
    theta: float = 1.0

    def __post_init__(self):
        if self.kind not in ("identity", "hinge", "power", "exp_scale"):
            raise ValueError(f"unknown phi kind {self.kind!r}")
        if self.c < 0:
            raise ValueError("hinge threshold c must be >= 0")
        if self.m < 1:
            raise ValueError("power m must be >= 1")
        if self.theta <= 0:
            raise ValueError("exp_scale theta must be > 0")

    @property
    def label(self):
        return {
            "identity": "identity",
            "hinge": f"hinge({self.c:g})",
            "power": f"power({self.m:g})",
            "exp_scale": f"exp({self.theta:g})",
        }[self.kind]

    def __call__(self, t):
        return eval_phi(self, t)


def eval_phi(spec, t):
    """Evaluate a :class:`PhiSpec` on a scalar or array."""
    if spec.kind == "identity":
        return t
    tp = np.maximum(t, 0.0)
    if spec.kind == "hinge":
        return np.maximum(tp - spec.c, 0.0)
    if spec.kind == "power":
        return tp**spec.m
    return np.exp(spec.theta * t)


def spectral_norm(M):
    """Largest singular value via LAPACK."""
    return float(np.linalg.norm(M, 2))


def spectral_norm_power(M, tol=1e-12, restarts=2, max_iter=10_000, seed=0):
    """Largest singular value by power iteration on ``M^T M``.

    Runs ``restarts`` independent random starts; if they disagree by more than
    1e-9 relative (a near-degenerate top pair), falls back to the Jacobi
    eigensolver.
    """
    M = check_matrix(M)
    G = M.T @ M
    k = G.shape[0]
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
    estimates = []
    for _ in range(max(restarts, 2)):
        v = rng.standard_normal(k)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(max_iter):
            w = G @ v
            new = float(v @ w)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                new = 0.0
                break
            v = w / nw
            if abs(new - lam) <= tol * abs(new):
                lam = new
                break
            lam = new
        estimates.append(lam)
    lo, hi = min(estimates), max(estimates)
    if hi - lo > 1e-9 * max(hi, np.finfo(float).tiny):
        return spectral_norm_jacobi(M)
    return math.sqrt(max(hi, 0.0))


def spectral_norm_jacobi(M):
    """Largest singular value from a cyclic-Jacobi eigensolve of ``M^T M``."""
    M = check_matrix(M)
    w, _ = jacobi_eigh(M.T @ M)
    return math.sqrt(max(w[-1], 0.0))


def _op_norm(M, domain, codomain):
    if domain == "l1":
        # extreme points of the l1 ball are +-e_j
        return float(np.max(np.linalg.norm(M, ord=_VEC_ORD[codomain], axis=0)))
    if codomain == "linf":
        # max_i sup_x <m_i, x> is the dual norm of row i
        return float(np.max(np.linalg.norm(M, ord=_VEC_ORD[_DUAL[domain]], axis=1)))
    return spectral_norm(M)


def eval_norm(spec, M):
    """Evaluate a :class:`NormSpec` on a matrix."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {M.shape}")
    if spec.kind == "spectral":
        return spectral_norm(M)
    if spec.kind == "frobenius":
        return float(np.linalg.norm(M))
    if spec.kind == "max_entry":
        return float(np.max(np.abs(M)))
    return _op_norm(M, spec.domain_norm, spec.codomain_norm)


def op_norm_linf_l1_bruteforce(M):
    """``||M||_{linf -> l1}`` by enumerating sign vectors; experimental.

    The maximum of a convex function over the cube is attained at a vertex,
    so ``2**k`` evaluations suffice. Limited to ``k <= 12`` columns.
    """
    M = check_matrix(M)
    k = M.shape[1]
    if k > 12:
        raise ValueError(f"brute force limited to 12 columns, got {k}")
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=k)))
    return float(np.max(np.sum(np.abs(signs @ M.T), axis=1)))


def restrict_scale(M, j):
    """First ``j`` rows of ``M`` scaled by ``sqrt(n / j)``."""
    M = check_matrix(M)
    n = M.shape[0]
    j = check_positive_int(j, "j")
    if j > n:
        raise DimensionError(f"j={j} exceeds the row count {n}")
    return math.sqrt(n / j) * M[:j]


def assemble_sum(Q_list, A_list):
    """``sum_j Q_j @ A_j`` over equal-length lists of ``n x n`` matrices."""
    if len(Q_list) != len(A_list):
        raise DimensionError(f"got {len(Q_list)} Q matrices but {len(A_list)} A matrices")
    if not Q_list:
        raise DimensionError("need at least one term")
    n = np.shape(Q_list[0])[0]
    total = np.zeros((n, n))
    for Q, A in zip(Q_list, A_list):
        Q = check_square(Q, "Q")
        A = check_square(A, "A")
        if Q.shape != (n, n) or A.shape != (n, n):
            raise DimensionError("all matrices must share one n x n shape")
        total += Q @ A
    return total


@dataclass(frozen=True, eq=False)
class ConvexFunctional:
    """``f(M) = sign * (phi(scale * |L(M)|) + <linear, M> + offset)``.

    ``L`` is :func:`restrict_scale` when ``restrict_rows`` is set and the
    identity otherwise. The norm term is dropped when ``norm`` is None, which
    leaves an affine function. ``negate=True`` flips the sign, turning the
    convex function into a concave one.
    """

    norm: NormSpec | None = None
    phi: PhiSpec = field(default_factory=PhiSpec)
    scale: float = 1.0
    linear: np.ndarray | None = None
    offset: float = 0.0
    negate: bool = False
    restrict_rows: int | None = None

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError("scale must be nonnegative")
        if self.norm is None and self.linear is None:
            raise ValueError("need a norm, a linear part, or both")

    @property
    def is_convex(self):
        return not self.negate or self.norm is None

    @property
    def is_concave(self):
        return self.negate or self.norm is None

    @property
    def label(self):
        parts = []
        if self.norm is not None:
            inner = self.norm.label
            if self.restrict_rows is not None:
                inner += f"[rows={self.restrict_rows}]"
            parts.append(inner if self.phi.kind == "identity" else f"{self.phi.label}o{inner}")
        if self.linear is not None:
            parts.append("linear")
        body = "+".join(parts)
        return f"-({body})" if self.negate else body

    def __call__(self, M):
        value = self.offset
        if self.norm is not None:
            X = M if self.restrict_rows is None else restrict_scale(M, self.restrict_rows)
            value += float(eval_phi(self.phi, self.scale * eval_norm(self.norm, X)))
        if self.linear is not None:
            value += float(np.sum(self.linear * M))
        return -value if self.negate else value


def parse_norm(text):
    """Parse ``spectral``, ``frobenius``, ``max_entry`` or ``op:Y->Z``."""
    text = text.strip()
    if text.startswith("op:"):
        domain, _, codomain = text[3:].partition("->")
        return NormSpec.op(domain.strip(), codomain.strip())
    if text == "abs":
        return NormSpec("frobenius")
    return NormSpec(text)


def parse_phi(text):
    """Parse ``identity``, ``hinge(c)``, ``power(m)`` or ``exp(theta)``."""
    text = text.strip()
    if text == "identity":
        return PhiSpec()
    name, _, rest = text.partition("(")
    if not rest.endswith(")"):
        raise ValueError(f"cannot parse phi {text!r}")
    value = float(rest[:-1])
    if name == "hinge":
        return PhiSpec("hinge", c=value)
    if name == "power":
        return PhiSpec("power", m=value)
    if name in ("exp", "exp_scale"):
        return PhiSpec("exp_scale", theta=value)
    raise ValueError(f"unknown phi {name!r}")
