"""Truncated multipole/local expansions for the 2D logarithmic kernel.

Everything here works with the complex potential F(z) = a0*log(w) + sum_k a_k*w^-k
(multipole) or F(z) = sum_k b_k*w^k (local), w = z - center, whose real part is
2*pi times the summed-kernel field sum_j q_j * V(|z - xi_j|).  Coefficients keep
the total-charge convention (a0 = sum of strengths); the attractive/repulsive
sign flip is applied only when field samples are assembled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .tree import Box

TWO_PI = 2.0 * math.pi
MIN_ORDER = 3


def fundamental_solution(r):
    """Free-space kernel V(r) = log(r) / (2*pi); r must be positive."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("fundamental solution requires r > 0; evaluation at a "
                         "source point must be excluded by the caller")
    out = np.log(r) / TWO_PI
    return float(out) if out.ndim == 0 else out


def expansion_order(epsilon: float) -> int:
    """Truncation order for a requested accuracy: max(ceil(log2(1/eps)), 3)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    return max(math.ceil(math.log2(1.0 / epsilon)), MIN_ORDER)


@dataclass(frozen=True)
class Expansion:
    """Truncated series about a center: p+1 complex coefficients a0..ap."""

    center: np.ndarray
    order: int
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex))
        if self.order < 1:
            raise ValueError(f"expansion order must be positive, got {self.order}")
        if self.coeffs.shape != (self.order + 1,):
            raise ValueError(
                f"expected {self.order + 1} coefficients, got shape {self.coeffs.shape}"
            )

    @property
    def total_charge(self) -> complex:
        return complex(self.coeffs[0])


def _as_complex(pts: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    return pts[:, 0] + 1j * pts[:, 1]


@lru_cache(maxsize=8)
def _pascal(n: int) -> np.ndarray:
    """Binomial table C[i, j] = C(i, j) for 0 <= i, j <= n."""
    c = np.zeros((n + 1, n + 1))
    c[:, 0] = 1.0
    for i in range(1, n + 1):
        c[i, 1 : i + 1] = c[i - 1, : i] + c[i - 1, 1 : i + 1]
    return c


@lru_cache(maxsize=8)
def _m2m_matrix(p: int) -> np.ndarray:
    """L[l-1, k-1] = C(l-1, k-1) for 1 <= k <= l <= p (lower triangular)."""
    c = _pascal(p)
    out = np.zeros((p, p))
    for l in range(1, p + 1):
        out[l - 1, :l] = c[l - 1, :l]
    return out


@lru_cache(maxsize=8)
def _m2l_matrix(p: int) -> np.ndarray:
    """B[l-1, k-1] = C(l+k-1, k-1) for 1 <= l, k <= p."""
    c = _pascal(2 * p)
    out = np.empty((p, p))
    for l in range(1, p + 1):
        for k in range(1, p + 1):
            out[l - 1, k - 1] = c[l + k - 1, k - 1]
    return out


@lru_cache(maxsize=8)
def _l2l_matrix(p: int) -> np.ndarray:
    """U[l, k] = C(k, l) for 0 <= l <= k <= p (upper triangular)."""
    return _pascal(p).T.copy()


def _powers(t: np.ndarray, p: int) -> np.ndarray:
    """pw[..., k] = t**(k+1) for k = 0..p-1, via cumulative products."""
    t = np.asarray(t, dtype=complex)
    pw = np.repeat(t[..., None], p, axis=-1)
    np.cumprod(pw, axis=-1, out=pw)
    return pw


def _powers1(t: complex, p: int) -> np.ndarray:
    """[t, t^2, ..., t^p] for a scalar shift."""
    return _powers(np.array([t]), p)[0]


def multipole_coeffs(rel: np.ndarray, q: np.ndarray, p: int) -> np.ndarray:
    """Multipole coefficients of charges at complex offsets ``rel`` from the center."""
    coeffs = np.zeros(p + 1, dtype=complex)
    coeffs[0] = q.sum()
    if len(rel):
        pw = _powers(rel, p)  # (n, p)
        ks = np.arange(1, p + 1)
        coeffs[1:] = -(q[:, None] * pw).sum(axis=0) / ks
    return coeffs


def shift_multipole(coeffs: np.ndarray, t: complex) -> np.ndarray:
    """Re-center a multipole expansion by shift t = old_center - new_center."""
    p = len(coeffs) - 1
    out = np.empty_like(coeffs)
    out[0] = coeffs[0]
    if p == 0:
        return out
    tp = _powers1(t, p)
    scaled = coeffs[1:] / tp
    out[1:] = tp * (_m2m_matrix(p) @ scaled) - coeffs[0] * tp / np.arange(1, p + 1)
    return out


def multipole_to_local(coeffs: np.ndarray, t: complex) -> np.ndarray:
    """Convert a multipole about ``t`` (relative to the local center) to a local series."""
    p = len(coeffs) - 1
    tp = _powers1(t, p)
    signs = np.where(np.arange(1, p + 1) % 2 == 0, 1.0, -1.0)
    u = signs * coeffs[1:] / tp
    out = np.empty_like(coeffs)
    out[0] = coeffs[0] * np.log(-t) + u.sum()
    out[1:] = (_m2l_matrix(p) @ u - coeffs[0] / np.arange(1, p + 1)) / tp
    return out


def multipole_to_local_batch(A: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Vectorized multipole->local over K translations: A is (K, p+1), t is (K,)."""
    p = A.shape[1] - 1
    tp = _powers(t, p)  # (K, p)
    signs = np.where(np.arange(1, p + 1) % 2 == 0, 1.0, -1.0)
    u = signs * A[:, 1:] / tp
    out = np.empty_like(A)
    out[:, 0] = A[:, 0] * np.log(-t) + u.sum(axis=1)
    out[:, 1:] = (u @ _m2l_matrix(p).T - A[:, :1] / np.arange(1, p + 1)) / tp
    return out


def shift_local(coeffs: np.ndarray, t: complex) -> np.ndarray:
    """Re-center a local expansion by shift t = new_center - old_center."""
    p = len(coeffs) - 1
    tk = np.empty(p + 1, dtype=complex)
    tk[0] = 1.0
    tk[1:] = _powers1(t, p)
    out = _l2l_matrix(p) @ (coeffs * tk)
    out[1:] /= tk[1:]
    return out


def eval_multipole_raw(coeffs: np.ndarray, w: np.ndarray):
    """Potential/gradient of the summed-kernel field outside the cluster.

    Returns (phi, grad) where grad is the complex derivative conjugated into
    a gradient: grad = (Re F', -Im F').
    """
    p = len(coeffs) - 1
    iw = 1.0 / w
    pw = _powers(iw, p + 1)  # w^-1 .. w^-(p+1)
    f = coeffs[0] * np.log(w) + pw[..., :p] @ coeffs[1:]
    df = coeffs[0] * iw - pw[..., 1:] @ (np.arange(1, p + 1) * coeffs[1:])
    return f.real / TWO_PI, _grad_from_complex(df)


def eval_local_raw(coeffs: np.ndarray, w: np.ndarray):
    """Potential/gradient of a local (Taylor) series inside its disk."""
    p = len(coeffs) - 1
    f = np.full_like(w, coeffs[p])
    df = np.zeros_like(w)
    for k in range(p - 1, -1, -1):  # Horner for the series and its derivative
        df = df * w + f
        f = f * w + coeffs[k]
    return f.real / TWO_PI, _grad_from_complex(df)


def _grad_from_complex(df: np.ndarray) -> np.ndarray:
    g = np.empty(df.shape + (2,))
    g[..., 0] = df.real / TWO_PI
    g[..., 1] = -df.imag / TWO_PI
    return g


def _require_well_separated(source_box: Box | None, target_box: Box | None) -> None:
    if source_box is not None and target_box is not None:
        if not source_box.well_separated_from(target_box):
            raise ValueError(
                "multipole-to-local translation between boxes that are not "
                "well separated (interaction-list violation)"
            )


def p2m(charges, center, p: int) -> Expansion:
    """Multipole expansion of point charges about ``center``."""
    center = np.asarray(center, dtype=float)
    if len(charges):
        pos = np.array([c.position for c in charges], dtype=float)
        q = np.array([c.strength for c in charges], dtype=float)
        rel = _as_complex(pos) - complex(center[0], center[1])
    else:
        rel = np.zeros(0, dtype=complex)
        q = np.zeros(0)
    return Expansion(center, p, multipole_coeffs(rel, q, p))


def m2m(child: Expansion, parent_center) -> Expansion:
    """Shift a child multipole to a parent center; total charge is preserved."""
    parent_center = np.asarray(parent_center, dtype=float)
    t = complex(*(child.center - parent_center))
    return Expansion(parent_center, child.order, shift_multipole(child.coeffs, t))


def m2l(source: Expansion, target_center, source_box: Box | None = None,
        target_box: Box | None = None) -> Expansion:
    """Convert a source multipole into a local expansion about ``target_center``.

    When boxes are supplied the well-separation precondition is enforced.
    """
    _require_well_separated(source_box, target_box)
    target_center = np.asarray(target_center, dtype=float)
    t = complex(*(source.center - target_center))
    if t == 0:
        raise ValueError("source and target centers coincide; boxes cannot be well separated")
    return Expansion(target_center, source.order, multipole_to_local(source.coeffs, t))


def l2l(parent: Expansion, child_center) -> Expansion:
    """Shift a local expansion to a child center (exact for the truncated series)."""
    child_center = np.asarray(child_center, dtype=float)
    t = complex(*(child_center - parent.center))
    return Expansion(child_center, parent.order, shift_local(parent.coeffs, t))


def evaluate_multipole(e: Expansion, targets):
    """(potential, gradient) of the raw summed-kernel field at far targets."""
    w = _as_complex(targets) - complex(e.center[0], e.center[1])
    return eval_multipole_raw(e.coeffs, w)


def evaluate_local(e: Expansion, targets):
    """(potential, gradient) of the raw summed-kernel field at interior targets."""
    w = _as_complex(targets) - complex(e.center[0], e.center[1])
    return eval_local_raw(e.coeffs, w)
