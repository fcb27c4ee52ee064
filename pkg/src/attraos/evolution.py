"""Single-step evolution of dynamical representations.

Three interchangeable strategies: frequency-domain (per-mode complex linear
operators on the lowest DFT modes), direct (k-means partition of the
trajectory with one local linear operator per cluster), and retrieval (a
softmax associative memory whose stored patterns act as attractor prototypes).
All operators are fit in closed form by ridge regression.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyInputError,
    ShapeMismatchError,
    SingularSystemError,
    TooManyModesError,
)


def fft_modes(x: np.ndarray, m_modes: int) -> np.ndarray:
    """Real-input DFT along axis 0, truncated to the m_modes lowest bins."""
    x = np.asarray(x, dtype=float)
    full = x.shape[0] // 2 + 1
    if m_modes < 1 or m_modes > full:
        raise TooManyModesError(f"m_modes must lie in [1, {full}] for length {x.shape[0]}")
    return np.fft.rfft(x, axis=0)[:m_modes]


def ifft_modes(spectrum: np.ndarray, seq_len: int) -> np.ndarray:
    """Zero-pad a truncated spectrum and invert (numpy convention: the
    inverse transform carries the 1/L factor)."""
    spectrum = np.asarray(spectrum, dtype=complex)
    full = seq_len // 2 + 1
    if spectrum.shape[0] > full:
        raise TooManyModesError("spectrum has more modes than the target length")
    if spectrum.shape[0] < full:
        pad = np.zeros((full - spectrum.shape[0],) + spectrum.shape[1:], dtype=complex)
        spectrum = np.concatenate([spectrum, pad], axis=0)
    return np.fft.irfft(spectrum, n=seq_len, axis=0)


def ridge_fit(a: np.ndarray, b: np.ndarray, ridge_lambda: float) -> np.ndarray:
    """W minimizing sum ||W a_s - b_s||^2 + lambda ||W||^2 over rows of a, b."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ShapeMismatchError("need matching (samples, features) arrays")
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be >= 0")
    gram = a.conj().T @ a
    n = gram.shape[0]
    if ridge_lambda == 0.0 and np.linalg.matrix_rank(gram) < n:
        raise SingularSystemError("rank-deficient Gram matrix with lambda = 0")
    gram = gram + ridge_lambda * np.eye(n)
    cross = a.conj().T @ b
    return np.linalg.solve(gram, cross).T


@dataclass(frozen=True)
class SpectralEvolutionModel:
    """Per-mode complex operators W_i (m_modes, N, N) over length-L sequences."""

    mode_ops: np.ndarray
    m_modes: int
    seq_len: int
    ridge_lambda: float


def fit_spectral_operators(
    a_spec: np.ndarray,
    b_spec: np.ndarray,
    seq_len: int,
    ridge_lambda: float = 1e-3,
) -> SpectralEvolutionModel:
    """Per-mode ridge fit from spectra (S, M, N) to next-step spectra."""
    a_spec = np.asarray(a_spec, dtype=complex)
    b_spec = np.asarray(b_spec, dtype=complex)
    if a_spec.shape != b_spec.shape or a_spec.ndim != 3:
        raise ShapeMismatchError("spectra must share a (samples, modes, N) shape")
    if a_spec.shape[0] < 1:
        raise EmptyInputError("need at least one training pair")
    m_modes, n = a_spec.shape[1], a_spec.shape[2]
    ops = np.empty((m_modes, n, n), dtype=complex)
    for i in range(m_modes):
        ops[i] = ridge_fit(a_spec[:, i, :], b_spec[:, i, :], ridge_lambda)
    return SpectralEvolutionModel(
        mode_ops=ops, m_modes=m_modes, seq_len=seq_len, ridge_lambda=ridge_lambda
    )


def apply_spectral_evolution(x: np.ndarray, model: SpectralEvolutionModel) -> np.ndarray:
    """Low modes in, W_i per mode, back to the original scale."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != model.seq_len:
        raise ShapeMismatchError(
            f"model was fit for length {model.seq_len}, got {x.shape[0]}"
        )
    spec = fft_modes(x, model.m_modes)
    out = np.einsum("mij,m...j->m...i", model.mode_ops, spec)
    return ifft_modes(out, model.seq_len)


def spectral_model_to_json(model: SpectralEvolutionModel) -> str:
    doc = {
        "m_modes": model.m_modes,
        "seq_len": model.seq_len,
        "ridge_lambda": model.ridge_lambda,
        "mode_ops": [[op.real.tolist(), op.imag.tolist()] for op in model.mode_ops],
    }
    return json.dumps(doc)


def spectral_model_from_json(text: str) -> SpectralEvolutionModel:
    doc = json.loads(text)
    ops = np.stack(
        [np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float) for re, im in doc["mode_ops"]]
    )
    return SpectralEvolutionModel(
        mode_ops=ops,
        m_modes=int(doc["m_modes"]),
        seq_len=int(doc["seq_len"]),
        ridge_lambda=float(doc["ridge_lambda"]),
    )


# ---------------------------------------------------------------------------
# direct evolution: k-means partition + per-cluster local operator


@dataclass(frozen=True)
class AttractorPartition:
    labels: np.ndarray
    centroids: np.ndarray
    k: int
    inertia_history: np.ndarray = field(default_factory=lambda: np.zeros(0))


def kmeans_partition(
    points: np.ndarray, k: int, seed: int = 0, max_iters: int = 100
) -> AttractorPartition:
    """Lloyd's algorithm with k-means++ seeding (deterministic per seed)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise EmptyInputError("need a non-empty (points, features) array")
    n = points.shape[0]
    if k < 1 or k > n:
        raise ValueError("need 1 <= k <= number of points")
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(points, k, rng)
    labels = np.zeros(n, dtype=int)
    inertia = []
    for _ in range(max_iters):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        inertia.append(float(d2[np.arange(n), new_labels].sum()))
        moved = np.any(new_labels != labels) or len(inertia) == 1
        labels = new_labels
        for c in range(k):
            members = points[labels == c]
            if members.shape[0]:
                centroids[c] = members.mean(axis=0)
            else:
                # re-seed an empty cluster at the point farthest from its centroid
                far = int(d2[np.arange(n), labels].argmax())
                centroids[c] = points[far]
                labels[far] = c
        if not moved:
            break
    return AttractorPartition(
        labels=labels, centroids=centroids, k=k, inertia_history=np.asarray(inertia)
    )


def _kmeanspp_init(points: np.ndarray, k: int, rng) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            centroids[c:] = centroids[0]
            break
        probs = d2 / total
        centroids[c] = points[rng.choice(n, p=probs)]
        d2 = np.minimum(d2, ((points - centroids[c]) ** 2).sum(axis=1))
    return centroids


@dataclass(frozen=True)
class DirectEvolutionModel:
    """One ridge-fit linear map per cluster; queries go to the nearest centroid."""

    centroids: np.ndarray
    operators: np.ndarray  # (k, F, F)
    ridge_lambda: float


def fit_direct_operators(
    reps: np.ndarray,
    partition: AttractorPartition,
    ridge_lambda: float = 1e-3,
    targets: np.ndarray | None = None,
) -> DirectEvolutionModel:
    """Per-cluster map from each point to its successor.

    ``reps`` is the (T, F) trajectory; transitions (x_t, x_{t+1}) belong to the
    cluster of x_t.  Explicit ``targets`` (same shape as reps) replace the
    shifted successors.  Clusters with no transitions fall back to identity.
    """
    reps = np.asarray(reps, dtype=float)
    if reps.ndim != 2 or reps.shape[0] == 0:
        raise EmptyInputError("need a non-empty (time, features) array")
    if targets is None:
        sources, outs = reps[:-1], reps[1:]
        if partition.labels.shape[0] == reps.shape[0]:
            labels = partition.labels[:-1]
        elif partition.labels.shape[0] == reps.shape[0] - 1:
            labels = partition.labels
        else:
            raise ShapeMismatchError("partition labels do not align with reps")
    else:
        targets = np.asarray(targets, dtype=float)
        if targets.shape != reps.shape:
            raise ShapeMismatchError("targets must match reps in shape")
        sources, outs = reps, targets
        labels = partition.labels
    f = reps.shape[1]
    ops = np.empty((partition.k, f, f))
    for c in range(partition.k):
        mask = labels == c
        if not np.any(mask):
            ops[c] = np.eye(f)
        else:
            ops[c] = ridge_fit(sources[mask], outs[mask], ridge_lambda)
    return DirectEvolutionModel(
        centroids=partition.centroids, operators=ops, ridge_lambda=ridge_lambda
    )


def apply_direct_evolution(x: np.ndarray, model: DirectEvolutionModel) -> np.ndarray:
    """Advance each row by its nearest-centroid cluster operator."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    d2 = ((pts[:, None, :] - model.centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    out = np.einsum("tij,tj->ti", model.operators[labels], pts)
    return out[0] if single else out


def attractor_separation(partition: AttractorPartition) -> np.ndarray:
    """Per-cluster margin: min_{j != i} (c_i . c_i - c_i . c_j)."""
    c = partition.centroids
    gram = c @ c.T
    k = c.shape[0]
    if k == 1:
        return np.array([np.inf])
    out = np.empty(k)
    for i in range(k):
        others = np.delete(gram[i], i)
        out[i] = gram[i, i] - others.max()
    return out


# ---------------------------------------------------------------------------
# retrieval evolution: softmax associative memory


@dataclass(frozen=True)
class HopfieldConfig:
    patterns: np.ndarray  # (P, d), rows are stored patterns
    beta: float
    max_iters: int = 50

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if not np.all(np.isfinite(self.patterns)):
            raise ValueError("patterns must be finite")


def hopfield_update(query: np.ndarray, config: HopfieldConfig) -> np.ndarray:
    """One retrieval step: xi <- X softmax(beta X^T xi)."""
    xi = np.asarray(query, dtype=float)
    logits = config.beta * (config.patterns @ xi)
    logits -= logits.max()
    p = np.exp(logits)
    p /= p.sum()
    return config.patterns.T @ p


def hopfield_retrieve(query: np.ndarray, config: HopfieldConfig, tol: float = 1e-8):
    """Iterate the update rule to a fixed point; returns (xi, iterations)."""
    xi = np.asarray(query, dtype=float)
    for it in range(1, config.max_iters + 1):
        nxt = hopfield_update(xi, config)
        if np.linalg.norm(nxt - xi) < tol:
            return nxt, it
        xi = nxt
    return xi, config.max_iters


def hopfield_energy(xi: np.ndarray, config: HopfieldConfig) -> float:
    """-lse(beta, X^T xi) + ||xi||^2/2 + log(P)/beta + M^2/2."""
    xi = np.asarray(xi, dtype=float)
    logits = config.beta * (config.patterns @ xi)
    lse = (np.log(np.sum(np.exp(logits - logits.max()))) + logits.max()) / config.beta
    m2 = float((config.patterns**2).sum(axis=1).max())
    p = config.patterns.shape[0]
    return float(-lse + 0.5 * xi @ xi + np.log(p) / config.beta + 0.5 * m2)


@dataclass(frozen=True)
class HopfieldEvolutionModel:
    """Hetero-associative retrieval: keys are attractor prototypes of the
    current state, values the matching next-state prototypes."""

    keys: np.ndarray
    values: np.ndarray
    beta: float


def fit_hopfield_evolution(
    reps: np.ndarray,
    k: int,
    beta: float,
    seed: int = 0,
    targets: np.ndarray | None = None,
) -> HopfieldEvolutionModel:
    """Cluster the trajectory; store (centroid, mean successor) pairs."""
    reps = np.asarray(reps, dtype=float)
    if targets is None:
        sources, outs = reps[:-1], reps[1:]
    else:
        targets = np.asarray(targets, dtype=float)
        if targets.shape != reps.shape:
            raise ShapeMismatchError("targets must match reps in shape")
        sources, outs = reps, targets
    if sources.shape[0] == 0:
        raise EmptyInputError("need at least one transition")
    k = min(k, sources.shape[0])
    part = kmeans_partition(sources, k, seed=seed)
    values = np.empty_like(part.centroids)
    for c in range(k):
        mask = part.labels == c
        values[c] = outs[mask].mean(axis=0) if np.any(mask) else part.centroids[c]
    return HopfieldEvolutionModel(keys=part.centroids, values=values, beta=beta)


def apply_hopfield_evolution(x: np.ndarray, model: HopfieldEvolutionModel) -> np.ndarray:
    """x' = V^T softmax(beta K x) per row."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    logits = model.beta * (pts @ model.keys.T)
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    w /= w.sum(axis=1, keepdims=True)
    out = w @ model.values
    return out[0] if single else out
