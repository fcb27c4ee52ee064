"""Linear-recurrence evaluation: sequential, Blelloch tree, and gated tree.

All three compute x_k = a_k * x_{k-1} + bu_k.  The tree scans run the binary
operator

    (a_i, b_i) . (a_j, b_j) = (a_j * a_i, a_j * b_i + b_j)

over a fixed up-sweep/down-sweep schedule on an identity-padded power-of-two
grid.  That schedule is normative for the gated variant: the gate h multiplies
the composed input part exactly once per composition, at the write position,
so results depend on the composition order and any reimplementation must
replay the same (src, dst) pairs.  The down sweep includes the leading
identity composition (identity at virtual position -1 into position 0), which
is a no-op for the plain scan but applies the gate of the first position in
the gated one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError


@dataclass(frozen=True)
class ScanElement:
    """One (a, b) operator element; identity is (ones/I, zeros)."""

    a: np.ndarray
    b: np.ndarray
    matrix: bool = False


@dataclass(frozen=True)
class ScanInput:
    """Stacked per-step elements: a_seq (L, ...), bu_seq (L, ...)."""

    a_seq: np.ndarray
    bu_seq: np.ndarray
    matrix: bool = False

    def __post_init__(self):
        a = np.asarray(self.a_seq, dtype=float)
        b = np.asarray(self.bu_seq, dtype=float)
        if a.shape[0] != b.shape[0]:
            raise ShapeMismatchError("a_seq and bu_seq must have equal length")
        object.__setattr__(self, "a_seq", a)
        object.__setattr__(self, "bu_seq", b)

    @property
    def length(self) -> int:
        return self.a_seq.shape[0]


def operator_compose(qi: ScanElement, qj: ScanElement) -> ScanElement:
    """Compose the earlier element qi with the later qj."""
    if qi.matrix != qj.matrix:
        raise ShapeMismatchError("cannot mix matrix and diagonal elements")
    ai, bi = np.asarray(qi.a, dtype=float), np.asarray(qi.b, dtype=float)
    aj, bj = np.asarray(qj.a, dtype=float), np.asarray(qj.b, dtype=float)
    try:
        if qi.matrix:
            a = aj @ ai
            b = aj @ bi + bj
        else:
            a = aj * ai
            b = aj * bi + bj
    except ValueError as exc:
        raise ShapeMismatchError(str(exc)) from exc
    return ScanElement(a=a, b=b, matrix=qi.matrix)


def identity_element(like: ScanElement) -> ScanElement:
    if like.matrix:
        a = np.eye(like.a.shape[-1])
    else:
        a = np.ones_like(np.asarray(like.a, dtype=float))
    return ScanElement(a=a, b=np.zeros_like(np.asarray(like.b, dtype=float)), matrix=like.matrix)


def sequential_scan(inp: ScanInput, x0=None) -> np.ndarray:
    """x_k = a_k * x_{k-1} + bu_k for k = 1..L, O(L) sequential."""
    b = inp.bu_seq
    x = np.zeros_like(b[0]) if x0 is None else np.asarray(x0, dtype=float)
    out = np.empty_like(b)
    for k in range(inp.length):
        if inp.matrix:
            x = np.einsum("ij,...j->...i", inp.a_seq[k], x) + b[k]
        else:
            x = inp.a_seq[k] * x + b[k]
        out[k] = x
    return out


def _padded_length(length: int) -> int:
    lp = 1
    while lp < length:
        lp *= 2
    return lp


def tree_schedule(l_padded: int) -> list[tuple[int, int]]:
    """Composition order (src, dst) for a power-of-two grid.

    Up sweep merges pairs bottom-up; the down sweep starts with the identity
    composition (-1, 0) and then fills the remaining positions top-down.
    After executing every pair, position i holds the inclusive prefix over
    elements 0..i.
    """
    if l_padded < 1 or (l_padded & (l_padded - 1)) != 0:
        raise ValueError("schedule length must be a positive power of two")
    pairs = []
    levels = l_padded.bit_length() - 1
    for d in range(levels):
        step = 1 << (d + 1)
        half = 1 << d
        for dst in range(step - 1, l_padded, step):
            pairs.append((dst - half, dst))
    pairs.append((-1, 0))
    for d in range(levels - 2, -1, -1):
        step = 1 << (d + 1)
        half = 1 << d
        for dst in range(step + half - 1, l_padded, step):
            pairs.append((dst - half, dst))
    return pairs


def _level_plan(l_padded: int):
    """tree_schedule grouped by level for vectorized execution."""
    levels = l_padded.bit_length() - 1
    plan = []
    for d in range(levels):
        step = 1 << (d + 1)
        half = 1 << d
        dst = np.arange(step - 1, l_padded, step)
        plan.append(("up", dst, half))
    plan.append(("identity", np.array([0]), 0))
    for d in range(levels - 2, -1, -1):
        step = 1 << (d + 1)
        half = 1 << d
        dst = np.arange(step + half - 1, l_padded, step)
        plan.append(("down", dst, half))
    return plan


def _pad_left(inp: ScanInput, l_padded: int):
    pad = l_padded - inp.length
    if pad == 0:
        return inp.a_seq.copy(), inp.bu_seq.copy(), 0
    if inp.matrix:
        eye = np.eye(inp.a_seq.shape[-1])
        a_pad = np.broadcast_to(eye, (pad,) + inp.a_seq.shape[1:]).copy()
    else:
        a_pad = np.ones((pad,) + inp.a_seq.shape[1:])
    b_pad = np.zeros((pad,) + inp.bu_seq.shape[1:])
    return (
        np.concatenate([a_pad, inp.a_seq], axis=0),
        np.concatenate([b_pad, inp.bu_seq], axis=0),
        pad,
    )


def _compose_at(a, b, dst, half, matrix: bool, gate=None):
    src = dst - half
    if matrix:
        a_new = np.einsum("lij,ljk->lik", a[dst], a[src])
        b_new = np.einsum("lij,l...j->l...i", a[dst], b[src]) + b[dst]
    else:
        a_new = a[dst] * a[src]
        b_new = a[dst] * b[src] + b[dst]
    if gate is not None:
        b_new = gate[dst] * b_new
    a[dst] = a_new
    b[dst] = b_new


def blelloch_scan(inp: ScanInput) -> np.ndarray:
    """Tree-scheduled scan; equals sequential_scan up to float tolerance.

    Non-power-of-two lengths are left-padded with identity elements and the
    padded outputs dropped.  Compositions whose source segment lies entirely
    in the identity padding are exact no-ops and are skipped, which keeps the
    composition count at most 2L - 1 for input length L.
    """
    if inp.length == 0:
        return inp.bu_seq.copy()
    lp = _padded_length(inp.length)
    a, b, pad = _pad_left(inp, lp)
    for kind, dst, half in _level_plan(lp):
        if kind == "identity":
            continue  # no-op without a gate
        keep = dst[(dst - half) >= pad]
        if keep.size:
            _compose_at(a, b, keep, half, inp.matrix)
    return b[pad:]


def scan_composition_count(length: int) -> int:
    """Number of operator compositions blelloch_scan performs for length L."""
    if length == 0:
        return 0
    lp = _padded_length(length)
    pad = lp - length
    count = 0
    for kind, dst, half in _level_plan(lp):
        if kind == "identity":
            continue
        count += int(np.sum((dst - half) >= pad))
    return count


def scale_of(i: int, l_total: int) -> int:
    """Projection-scale label of position i among l_total outputs.

    0 at the origin; odd positions sit one level above their predecessor;
    even powers of two carry log2(i); other even positions stay at 1.
    """
    if not 0 <= i < l_total:
        raise ValueError("position out of range")
    if i == 0:
        return 0
    if i % 2 == 1:
        return scale_of(i - 1, l_total) + 1
    if i & (i - 1) == 0:
        return int(i).bit_length() - 1
    return 1


def hierarchical_scan(inp: ScanInput, h_seq=None):
    """Gated tree scan: the per-position gate folds the coarse-space
    projection into the composition itself.

    ``h_seq`` is (L, ...) broadcastable against the input parts; missing gates
    default to ones (plain scan).  Every schedule pair is executed, including
    identity-source ones, with the gate applied once at the write position.
    Returns (states, scales) where scales[i] = scale_of(i, L).
    """
    if inp.length == 0:
        return inp.bu_seq.copy(), np.zeros(0, dtype=int)
    lp = _padded_length(inp.length)
    a, b, pad = _pad_left(inp, lp)
    if h_seq is None:
        gate = np.ones_like(b)
    else:
        h_seq = np.asarray(h_seq, dtype=float)
        if h_seq.shape[0] != inp.length:
            raise ShapeMismatchError("h_seq length must match the input length")
        try:
            gate = np.ones_like(b)
            gate[pad:] = h_seq
        except ValueError as exc:
            raise ShapeMismatchError(str(exc)) from exc
    for kind, dst, half in _level_plan(lp):
        if kind == "identity":
            # identity . q = (a, gate * b): source is the virtual prefix
            b[0] = gate[0] * b[0]
            continue
        _compose_at(a, b, dst, half, inp.matrix, gate=gate)
    scales = np.array([scale_of(i, inp.length) for i in range(inp.length)], dtype=int)
    return b[pad:], scales
