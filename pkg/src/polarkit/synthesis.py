"""Channel combining and splitting on explicit tables.

Split channels ``W_N^{(i)}`` are stored as ``(2, Y^N * 2^(i-1))`` arrays whose
column index encodes the composite output ``(y_1..y_N, u_1..u_{i-1})``
mixed-radix, y-major: ``col = y_index * 2^(i-1) + prefix`` with ``y_1`` and
``u_1`` the most significant digits.  Both the recursive construction and the
brute-force oracle use this encoding so their tables compare element-wise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .channels import (
    ChannelDescriptor,
    ChannelValidationError,
    DmcTable,
    symmetry_permutation,
)
from .gf2 import encode_array

MAX_EXACT_LEVEL = 3
MAX_EXACT_Y = 4
MAX_PROFILE_LEVEL = 25


class ResourceLimitError(ValueError):
    pass


class UnsupportedChannelError(ValueError):
    pass


def capacity_of_rows(rows: np.ndarray) -> float:
    """``I`` of a ``(2, M)`` transition array, 0 log 0 terms dropped."""
    mix = 0.5 * (rows[0] + rows[1])
    total = 0.0
    for x in range(2):
        p = rows[x]
        nz = p > 0.0
        total += 0.5 * float(np.sum(p[nz] * np.log2(p[nz] / mix[nz])))
    return total


def z_of_rows(rows: np.ndarray) -> float:
    return float(np.sqrt(rows[0] * rows[1]).sum())


@dataclass(frozen=True, eq=False)
class SplitChannel:
    """Explicit table of ``W_N^{(i)}``; ``index`` is 1-based."""

    rows: np.ndarray
    n: int
    index: int
    y_count: int

    def __post_init__(self):
        sums = self.rows.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-10):
            raise ChannelValidationError(f"split channel rows sum to {sums}")
        expected = self.y_count ** (1 << self.n) * 2 ** (self.index - 1)
        if self.rows.shape != (2, expected):
            raise ChannelValidationError(
                f"split channel has {self.rows.shape[1]} outputs, expected {expected}"
            )

    @property
    def length(self) -> int:
        return 1 << self.n

    def bhattacharyya(self) -> float:
        return z_of_rows(self.rows)

    def capacity(self) -> float:
        return capacity_of_rows(self.rows)

    def decision_llr(self, y: np.ndarray, prefix: np.ndarray) -> float:
        """``ln(W(y, prefix | 0) / W(y, prefix | 1))`` for one composite output."""
        col = _composite_index(y, prefix, self.y_count)
        return float(np.log(self.rows[0, col]) - np.log(self.rows[1, col]))

    def as_table(self) -> DmcTable:
        return DmcTable(self.rows[0] / self.rows[0].sum(), self.rows[1] / self.rows[1].sum())


def _composite_index(y, prefix, y_count: int) -> int:
    col = 0
    for s in y:
        col = col * y_count + int(s)
    for b in prefix:
        col = col * 2 + int(b)
    return col


# --- single step -----------------------------------------------------------------


def _minus_rows(rows: np.ndarray) -> np.ndarray:
    """``W'(y1, y2 | u1) = 1/2 sum_u2 W(y1 | u1^u2) W(y2 | u2)`` as ``(2, M, M)``."""
    out = np.empty((2, rows.shape[1], rows.shape[1]))
    for u1 in range(2):
        out[u1] = 0.5 * (
            np.outer(rows[u1], rows[0]) + np.outer(rows[u1 ^ 1], rows[1])
        )
    return out


def _plus_rows(rows: np.ndarray) -> np.ndarray:
    """``W''(y1, y2, u1 | u2) = 1/2 W(y1 | u1^u2) W(y2 | u2)`` as ``(2, M, M, 2)``."""
    m = rows.shape[1]
    out = np.empty((2, m, m, 2))
    for u2 in range(2):
        for u1 in range(2):
            out[u2, :, :, u1] = 0.5 * np.outer(rows[u1 ^ u2], rows[u2])
    return out


def single_step(w: DmcTable) -> tuple[DmcTable, DmcTable]:
    """``(W, W) -> (W', W'')``.

    ``W'`` has output id ``y1 * |Y| + y2``; ``W''`` has
    ``(y1 * |Y| + y2) * 2 + u1``.
    """
    rows = w.rows
    minus = _minus_rows(rows).reshape(2, -1)
    plus = _plus_rows(rows).reshape(2, -1)
    return DmcTable.from_rows(minus), DmcTable.from_rows(plus)


# --- recursive synthesis ---------------------------------------------------------


def _prefix_maps(k: int) -> tuple[np.ndarray, np.ndarray]:
    """For every ``2k``-bit prefix ``u_1..u_2k`` return the integer codes of
    ``u_odd ^ u_even`` and ``u_even`` (``k`` bits each, first bit most significant)."""
    r = np.arange(1 << (2 * k))
    odd = np.zeros_like(r)
    even = np.zeros_like(r)
    for j in range(k):
        # u_{2j+1} and u_{2j+2} sit at bit offsets 2k-1-2j and 2k-2-2j
        uo = (r >> (2 * k - 1 - 2 * j)) & 1
        ue = (r >> (2 * k - 2 - 2 * j)) & 1
        odd = (odd << 1) | uo
        even = (even << 1) | ue
    return odd ^ even, even


def _check_exact_limits(w: DmcTable, n: int, index: int) -> None:
    if n < 0 or n > MAX_EXACT_LEVEL:
        raise ResourceLimitError(f"exact synthesis limited to n <= {MAX_EXACT_LEVEL}, got {n}")
    if w.y_count > MAX_EXACT_Y:
        raise ResourceLimitError(f"exact synthesis limited to |Y| <= {MAX_EXACT_Y}")
    if not 1 <= index <= (1 << n):
        raise ValueError(f"index {index} outside 1..{1 << n}")


def synthesize_exact(w: DmcTable, n: int, index: int) -> SplitChannel:
    """Build ``W_N^{(i)}`` by applying the single step along the path bits of ``i - 1``.

    After each step the composite outputs are relabelled so that
    ``((y_a, u_odd ^ u_even), (y_b, u_even))`` becomes ``(y_a, y_b, u_1..u_2k)``.
    """
    _check_exact_limits(w, n, index)
    path = [((index - 1) >> (n - 1 - j)) & 1 for j in range(n)]
    t = w.rows.reshape(2, w.y_count, 1)  # (u, y block, prefix)
    k = 0
    for bit in path:
        m, p = t.shape[1], t.shape[2]
        flat = t.reshape(2, m * p)
        pmap, qmap = _prefix_maps(k)
        if bit == 0:
            full = _minus_rows(flat).reshape(2, m, p, m, p)
            full = full.transpose(0, 1, 3, 2, 4)  # (u, ya, yb, p, q)
            t = full[:, :, :, pmap, qmap].reshape(2, m * m, len(pmap))
            k = 2 * k
        else:
            full = _plus_rows(flat).reshape(2, m, p, m, p, 2)
            full = full.transpose(0, 1, 3, 2, 4, 5)  # (u2, ya, yb, p, q, u1)
            t = full[:, :, :, pmap, qmap, :].reshape(2, m * m, 2 * len(pmap))
            k = 2 * k + 1
    return SplitChannel(t.reshape(2, -1), n, index, w.y_count)


def _product_rows(rows: np.ndarray, x_bits: np.ndarray) -> np.ndarray:
    """``W^N(y | x)`` over all ``y`` for each row of ``x_bits`` (shape ``(B, N)``)."""
    out = np.ones((x_bits.shape[0], 1))
    for k in range(x_bits.shape[1]):
        out = (out[:, :, None] * rows[x_bits[:, k]][:, None, :]).reshape(len(out), -1)
    return out


def _all_words(length: int) -> np.ndarray:
    r = np.arange(1 << length)
    return ((r[:, None] >> np.arange(length - 1, -1, -1)) & 1).astype(np.uint8)


def brute_force_split(w: DmcTable, n: int, index: int) -> SplitChannel:
    """``W_N^{(i)}`` straight from its definition: sum ``2^{1-N} W^N(y | u G_N)``
    over all ``u_{i+1}..u_N``.  Small sizes only."""
    _check_exact_limits(w, n, index)
    length = 1 << n
    u_all = _all_words(length)  # row r is u with u_1 the MSB of r
    x_all = encode_array(u_all)
    joint = _product_rows(w.rows, x_all)  # (2^N, Y^N)
    tail = length - index
    # rows grouped by (u_1..u_i) then summed over the tail
    grouped = joint.reshape(1 << index, 1 << tail, -1).sum(axis=1) / 2.0 ** (length - 1)
    # (prefix u_1..u_{i-1}, u_i, y) -> (u_i, y, prefix)
    grouped = grouped.reshape(1 << (index - 1), 2, -1).transpose(1, 2, 0)
    return SplitChannel(grouped.reshape(2, -1).copy(), n, index, w.y_count)


# --- BEC recursion -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BecProfile:
    n: int
    eps: float
    z: np.ndarray
    i: np.ndarray

    @property
    def length(self) -> int:
        return 1 << self.n

    def write_csv(self, fh: TextIO) -> None:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["index", "z", "i"])
        for k, (zk, ik) in enumerate(zip(self.z, self.i), 1):
            out.writerow([k, repr(float(zk)), repr(float(ik))])


def bec_z_values(eps: float, n: int) -> np.ndarray:
    z = np.array([float(eps)])
    for _ in range(n):
        nxt = np.empty(2 * len(z))
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def bec_profile(eps: float, n: int) -> BecProfile:
    """Erasure probabilities of all ``W_N^{(i)}`` for a BEC, ``O(N)`` work."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability {eps} outside [0, 1]")
    if not 0 <= n <= MAX_PROFILE_LEVEL:
        raise ValueError(f"level {n} outside 0..{MAX_PROFILE_LEVEL}")
    z = bec_z_values(eps, n)
    z.setflags(write=False)
    i = 1.0 - z
    i.setflags(write=False)
    return BecProfile(n, float(eps), z, i)


def bec_path_capacity(eps: float, bits) -> float:
    """``I(W_{b_1...b_n})`` for a BEC by following the path bits from the root."""
    cap = 1.0 - eps
    for b in bits:
        cap = 2.0 * cap - cap * cap if b else cap * cap
    return cap


# --- symmetric shortcut ---------------------------------------------------------


def _orbit_data(perm: np.ndarray, y_count: int, n: int, index: int):
    """Orbit representative and size of every ``y`` under ``{a G_N . y : a_1..a_i = 0}``."""
    length = 1 << n
    tail = length - index
    a = np.zeros((1 << tail, length), dtype=np.uint8)
    a[:, index:] = _all_words(tail)
    c = encode_array(a)  # (G, N)
    y_all = np.arange(y_count**length)
    digits = np.stack(
        [(y_all // y_count ** (length - 1 - k)) % y_count for k in range(length)], axis=1
    )
    images = np.zeros((len(y_all), len(c)), dtype=np.int64)
    for k in range(length):
        moved = np.where(c[None, :, k] == 1, perm[digits[:, k]][:, None], digits[:, k][:, None])
        images = images * y_count + moved
    rep = images.min(axis=1)
    images.sort(axis=1)
    size = 1 + np.count_nonzero(np.diff(images, axis=1), axis=1)
    return rep, size


def symmetric_z(
    w: DmcTable | ChannelDescriptor, n: int, index: int, perm: np.ndarray | None = None
) -> float:
    """``Z(W_N^{(i)})`` from orbit representatives of a symmetric channel.

    ``Z = 2^{i-1} sum_{reps} |orbit| sqrt(W(y, 0 | 0) W(y, 0 | 1))`` where the
    orbits are those of ``y -> (a G_N) . y`` with ``a_1..a_i = 0``.  Needs the
    output involution ``perm``; built-in BEC/BSC descriptors supply it.
    """
    if isinstance(w, ChannelDescriptor):
        if not w.symmetric:
            raise UnsupportedChannelError("channel is not known to be symmetric")
        perm = symmetry_permutation(w)
        w = w.materialize()
    if perm is None:
        raise UnsupportedChannelError("symmetric_z needs the output involution")
    perm = np.asarray(perm)
    rows = w.rows
    if (
        perm.shape != (w.y_count,)
        or not np.array_equal(perm[perm], np.arange(w.y_count))
        or not np.allclose(rows[1], rows[0][perm], rtol=0, atol=1e-15)
    ):
        raise UnsupportedChannelError("permutation is not a symmetry of the channel")
    _check_exact_limits(w, n, index)
    length = 1 << n
    tail = length - index
    # W(y, 0^{i-1} | u) for u in {0, 1}: sum over u_{i+1}..u_N
    u = np.zeros((2, 1 << tail, length), dtype=np.uint8)
    u[1, :, index - 1] = 1
    u[:, :, index:] = _all_words(tail)
    x = encode_array(u.reshape(-1, length))
    joint = _product_rows(rows, x).reshape(2, 1 << tail, -1).sum(axis=1) / 2.0 ** (length - 1)
    rep, size = _orbit_data(perm, w.y_count, n, index)
    reps, first = np.unique(rep, return_index=True)
    terms = size[first] * np.sqrt(joint[0, reps] * joint[1, reps])
    return float(2 ** (index - 1) * terms.sum())
