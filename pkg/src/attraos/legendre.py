"""Legendre machinery for polynomial-projection state memory.

The working basis is the shifted, normalized Legendre family on the unit
window, phi_n(s) = sqrt(2n+1) * P_n(2s - 1) for s in [0, 1], orthonormal under
the plain Lebesgue measure.  On top of it sit the translated-measure state
matrices (full sliding-window form, its "normal" parameterization, and the two
diagonal approximations) and the discretization rules: zero-order hold for the
transition, forward Euler (or exact hold, for error studies) for the input map.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ShapeMismatchError

VARIANTS = ("legt_full", "legs_diag", "diag_neg1")

DELTA_MIN = 1e-4
DELTA_MAX = 10.0


def legendre_eval(n: int, x) -> np.ndarray:
    """Canonical P_n(x) via the three-term recurrence (P_n(1) = 1)."""
    if n < 0:
        raise ValueError("order must be >= 0")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev
    p = x.copy()
    for k in range(1, n):
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
    return p


class LegendreBasis:
    """Orthonormal shifted Legendre basis with Gauss quadrature on [0, 1].

    ``num_nodes`` Gauss-Legendre nodes integrate polynomials up to degree
    2*num_nodes - 1 exactly; the default never drops below the basis order.
    """

    def __init__(self, order: int, num_nodes: int | None = None):
        if order < 1:
            raise ValueError("basis order must be >= 1")
        self.order = order
        q = num_nodes if num_nodes is not None else max(order, 16)
        x, w = np.polynomial.legendre.leggauss(q)
        self.nodes = 0.5 * (x + 1.0)
        self.weights = 0.5 * w
        self._phi_nodes = np.stack([self.phi(n, self.nodes) for n in range(order)])

    def phi(self, n: int, s) -> np.ndarray:
        """phi_n(s) = sqrt(2n+1) P_n(2s - 1)."""
        return math.sqrt(2 * n + 1) * legendre_eval(n, 2.0 * np.asarray(s, dtype=float) - 1.0)

    @property
    def phi_at_nodes(self) -> np.ndarray:
        """(order, num_nodes) matrix of basis values at the quadrature nodes."""
        return self._phi_nodes

    def phi_right_endpoint(self) -> np.ndarray:
        """phi_n(1) = sqrt(2n+1), the window's most recent point."""
        return np.sqrt(2.0 * np.arange(self.order) + 1.0)


def project_window(u, basis: LegendreBasis) -> np.ndarray:
    """Quadrature coefficients <u, phi_n> over the unit window.

    ``u`` may be a callable on [0, 1], samples at the quadrature nodes (length
    equal to the node count), or uniform samples on [0, 1] inclusive, which are
    linearly interpolated onto the nodes.
    """
    if callable(u):
        vals = np.asarray(u(basis.nodes), dtype=float)
    else:
        u = np.asarray(u, dtype=float)
        if u.ndim != 1 or u.size < 1:
            raise ValueError("samples must be a non-empty 1-D array")
        if u.size == basis.nodes.size:
            vals = u
        elif u.size == 1:
            vals = np.full_like(basis.nodes, u[0])
        else:
            grid = np.linspace(0.0, 1.0, u.size)
            vals = np.interp(basis.nodes, grid, u)
    return basis.phi_at_nodes @ (basis.weights * vals)


def eval_window(coeffs, basis: LegendreBasis, s) -> np.ndarray:
    """g(s) = sum_n c_n phi_n(s)."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[-1] != basis.order:
        raise ShapeMismatchError("coefficient count does not match basis order")
    s = np.asarray(s, dtype=float)
    phi = np.stack([basis.phi(n, s) for n in range(basis.order)])
    return coeffs @ phi


def reconstruct_window(coeffs, basis: LegendreBasis, num_points: int) -> np.ndarray:
    """Evaluate the coefficient expansion on a uniform inclusive grid."""
    if num_points < 1:
        raise ValueError("num_points must be >= 1")
    return eval_window(coeffs, basis, np.linspace(0.0, 1.0, num_points))


def piecewise_projection_error(f, order: int, refinement: int, num_nodes: int = 64) -> float:
    """L2 error of projecting f onto piecewise degree-<order polynomials.

    [0, 1] is split into 2**refinement equal cells; on each the projection is
    taken against the local orthonormal basis, and the squared residual is
    integrated with the same dense quadrature.
    """
    basis = LegendreBasis(order, num_nodes=num_nodes)
    cells = 2 ** refinement
    width = 1.0 / cells
    err2 = 0.0
    for c in range(cells):
        lo = c * width
        x = lo + width * basis.nodes
        vals = np.asarray(f(x), dtype=float)
        coeffs = basis.phi_at_nodes @ (basis.weights * vals)
        resid = vals - coeffs @ basis.phi_at_nodes
        err2 += width * float(np.sum(basis.weights * resid**2))
    return math.sqrt(err2)


def approximation_error_bound(order: int, refinement: int, sup_deriv: float) -> float:
    """2^{-r N} * 2 / (4^N N!) * sup|f^(N)| for order N and refinement r."""
    n = order
    return 2.0 ** (-refinement * n) * 2.0 / (4.0**n * math.factorial(n)) * sup_deriv


# ---------------------------------------------------------------------------
# translated-measure state matrices


def build_hippo_legt(n: int):
    """Sliding-window (translated-measure) matrices in normalized form.

    Returns ``(a_normal, correction, b)`` with ``a_normal`` following the
    sparse odd-index parameterization (nonzero only where n<k with k odd, or
    n>k with n odd), ``correction = a_normal - a_full`` against the full
    sliding-window matrix, and ``b_n = sqrt(2n+1)``.  Sign convention: the
    window is oriented so B is entrywise positive; the reversed orientation
    flips B's odd entries and transposes the off-diagonal pattern.
    """
    if n < 1:
        raise ValueError("order must be >= 1")
    s = np.sqrt(2.0 * np.arange(n) + 1.0)
    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    upper = (rows < cols) & (cols % 2 == 1)
    lower = (rows > cols) & (rows % 2 == 1)
    a_normal = np.where(upper | lower, -np.outer(s, s), 0.0)
    correction = a_normal - legt_full_matrix(n)
    return a_normal, correction, s.copy()


def legt_full_matrix(n: int) -> np.ndarray:
    """Full sliding-window matrix: A_{nk} = -s_n s_k (1 if n>=k else (-1)^{n-k})."""
    s = np.sqrt(2.0 * np.arange(n) + 1.0)
    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    signs = np.where(rows >= cols, 1.0, (-1.0) ** (cols - rows))
    return -np.outer(s, s) * signs


def build_hippo_legs_diag(n: int) -> np.ndarray:
    """Diagonal scale-invariant approximation: diag{-1, -2, ..., -n}."""
    if n < 1:
        raise ValueError("order must be >= 1")
    return -np.arange(1.0, n + 1.0)


def build_diag_neg1(n: int) -> np.ndarray:
    """Diagonal unit-decay approximation of the sliding-window matrix."""
    if n < 1:
        raise ValueError("order must be >= 1")
    return -np.ones(n)


@dataclass(frozen=True)
class SsmParams:
    """Continuous-time parameters: transition a (diagonal vector or full
    matrix), input map b, per-step measure window delta, order n."""

    a: np.ndarray
    b: np.ndarray
    delta: float
    n: int
    variant: str

    @property
    def is_diagonal(self) -> bool:
        return self.a.ndim == 1


@dataclass(frozen=True)
class DiscretizedSsm:
    a_bar: np.ndarray
    b_bar: np.ndarray


def make_ssm_params(variant: str, n: int, delta: float) -> SsmParams:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    b = np.sqrt(2.0 * np.arange(n) + 1.0)
    if variant == "legt_full":
        a = legt_full_matrix(n)
    elif variant == "legs_diag":
        a = build_hippo_legs_diag(n)
    else:
        a = build_diag_neg1(n)
    return SsmParams(a=a, b=b, delta=float(delta), n=n, variant=variant)


def discretize(params: SsmParams, b_method: str = "euler") -> DiscretizedSsm:
    """Zero-order hold for the transition; Euler or exact hold for the input.

    a_bar = exp(delta * a) (elementwise for diagonal a, matrix exponential for
    full a).  b_bar is delta * b under ``euler``; under ``zoh`` it is the exact
    constant-input solution a^{-1}(exp(delta a) - I) b.
    """
    if params.delta <= 0:
        raise ValueError("delta must be positive")
    d = params.delta
    if params.is_diagonal:
        a_bar = np.exp(d * params.a)
        if b_method == "euler":
            b_bar = d * params.b
        elif b_method == "zoh":
            b_bar = _zoh_input_factor(params.a, d) * params.b
        else:
            raise ValueError("b_method must be 'euler' or 'zoh'")
    else:
        a_bar = expm(d * params.a)
        if b_method == "euler":
            b_bar = d * params.b
        elif b_method == "zoh":
            b_bar = np.linalg.solve(params.a, (a_bar - np.eye(params.n)) @ params.b)
        else:
            raise ValueError("b_method must be 'euler' or 'zoh'")
    return DiscretizedSsm(a_bar=a_bar, b_bar=b_bar)


def _zoh_input_factor(a: np.ndarray, delta: float) -> np.ndarray:
    # (exp(delta a) - 1) / a, with the delta limit at a = 0
    out = np.full_like(a, delta, dtype=float)
    nz = a != 0
    out[nz] = np.expm1(delta * a[nz]) / a[nz]
    return out


def softplus_clamp(raw) -> np.ndarray:
    """softplus then clamp to [1e-4, 10]; turns raw reals into usable steps."""
    raw = np.asarray(raw, dtype=float)
    return np.clip(np.logaddexp(0.0, raw), DELTA_MIN, DELTA_MAX)


def discretize_sequence(
    params: SsmParams,
    deltas,
    b_seq=None,
    raw_delta: bool = False,
):
    """Per-step discretization for selective-scan style inputs.

    ``deltas`` has shape (L,) or (L, D); ``b_seq`` optionally supplies a
    per-step input map (L, N).  Returns (a_bar_seq, b_bar_seq) with a trailing
    state axis of size N, ready to combine with per-step drive values.
    Requires a diagonal transition.
    """
    if not params.is_diagonal:
        raise ShapeMismatchError("per-step discretization needs a diagonal transition")
    deltas = np.asarray(deltas, dtype=float)
    if raw_delta:
        deltas = softplus_clamp(deltas)
    if np.any(deltas <= 0):
        raise ValueError("per-step deltas must be positive")
    a_bar = np.exp(deltas[..., None] * params.a)
    if b_seq is None:
        b_bar = deltas[..., None] * params.b
    else:
        b_seq = np.asarray(b_seq, dtype=float)
        if b_seq.shape != (deltas.shape[0], params.n):
            raise ShapeMismatchError("b_seq must have shape (L, N)")
        if deltas.ndim == 1:
            b_bar = deltas[:, None] * b_seq
        else:
            b_bar = deltas[..., None] * b_seq[:, None, :]
    return a_bar, b_bar


# ---------------------------------------------------------------------------
# JSON round trip


def ssm_params_to_json(params: SsmParams) -> str:
    doc = {
        "variant": params.variant,
        "n": params.n,
        "delta": params.delta,
        "a": params.a.tolist(),
        "b": params.b.tolist(),
    }
    return json.dumps(doc)


def ssm_params_from_json(text: str) -> SsmParams:
    doc = json.loads(text)
    variant = doc["variant"]
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    n = int(doc["n"])
    delta = float(doc["delta"])
    if "a" in doc and doc["a"] is not None:
        a = np.asarray(doc["a"], dtype=float)
        b = np.asarray(doc["b"], dtype=float)
        return SsmParams(a=a, b=b, delta=delta, n=n, variant=variant)
    return make_ssm_params(variant, n, delta)
