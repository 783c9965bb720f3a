"""Successive-cancellation decoding in the log-likelihood domain.

Because ``G_N = F^{(x)n} B_N``, the codeword seen in bit-reversed order is
``u F^{(x)n}``.  The decoder therefore permutes the channel LLRs once and then
runs the usual left-to-right tree schedule on ``F^{(x)n}``: at a node holding
LLRs ``(a, b)`` for its two halves the left child gets the check-node combine
``a [+] b`` and, once the left child's partial sums ``s`` are known, the right
child gets ``b + (1 - 2 s) a``.  Decisions come out in natural index order.

The tree is walked with an explicit loop over leaves: leaf ``i`` recomputes the
levels below its lowest set bit, so every level holds exactly one live array.
Everything is vectorized over a leading batch axis so many blocks share one
schedule; rows never interact, so results do not depend on how blocks are
batched.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

import numpy as np

from .channels import ChannelDescriptor, DmcTable
from .gf2 import BitVector, bit_reversal_indices, encode_array, log2_exact

if TYPE_CHECKING:
    from .construction import CodeSpec


class ObservationError(ValueError):
    pass


def boxplus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact check-node combine ``2 atanh(tanh(a/2) tanh(b/2))``.

    Evaluated as ``sign(a) sign(b) [min(|a|,|b|) + log1p(e^-(|a|+|b|)) - log1p(e^-||a|-|b||)]``,
    which stays finite-precision accurate and handles infinities by sign algebra.
    """
    s = np.sign(a) * np.sign(b)
    aa = np.abs(a)
    bb = np.abs(b)
    with np.errstate(invalid="ignore"):
        d = np.abs(aa - bb)
    d[d != d] = np.inf  # inf - inf: both certain
    return s * (np.minimum(aa, bb) + np.log1p(np.exp(-(aa + bb))) - np.log1p(np.exp(-d)))


def _llr_table(w: DmcTable) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        table = np.log(w.p0) - np.log(w.p1)
    # a symbol impossible under both inputs carries no information
    table[np.isnan(table)] = 0.0
    return table


def llr_from_output(w: ChannelDescriptor | DmcTable, y: Sequence[int] | np.ndarray) -> np.ndarray:
    """Per-symbol ``ln(W(y|0) / W(y|1))``; works on any array shape of symbol ids."""
    table = w.materialize() if isinstance(w, ChannelDescriptor) else w
    y = np.asarray(y)
    if y.size and (y.min() < 0 or y.max() >= table.y_count):
        raise ObservationError(f"output symbol outside 0..{table.y_count - 1}")
    return _llr_table(table)[y.astype(np.int64)]


class LlrWorkspace:
    """Per-level scratch for one batch shape.

    ``llr[k]`` has ``2**k`` columns (level ``n`` is the channel), ``psum[k]``
    holds the partial sums of the most recent left subtree at level ``k``.
    ``evaluations`` counts LLR values written during the last decode.
    """

    def __init__(self, n: int, batch: int = 1):
        self.n = n
        self.batch = batch
        self.llr = [np.empty((batch, 1 << k)) for k in range(n + 1)]
        self.psum = [np.empty((batch, 1 << k), dtype=np.uint8) for k in range(n)]
        self.evaluations = 0

    @property
    def slots(self) -> int:
        return sum(a.shape[1] for a in self.llr)

    def fits(self, n: int, batch: int) -> bool:
        return self.n == n and self.batch == batch


def _validate_obs(obs: np.ndarray, length: int) -> np.ndarray:
    obs = np.asarray(obs, dtype=float)
    if obs.shape[-1] != length:
        raise ObservationError(f"observation length {obs.shape[-1]} != code length {length}")
    if np.isnan(obs).any():
        raise ObservationError("NaN in channel observation")
    return obs


def sc_kernel(
    ws: LlrWorkspace,
    channel_llr: np.ndarray,
    fixed: np.ndarray,
    fixed_values: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Run one SC pass over a batch.

    Parameters
    ----------
    channel_llr : (B, N) float
        LLRs in natural (channel) order.
    fixed : (N,) bool
        Positions whose decision is forced to ``fixed_values`` instead of
        being taken from the LLR.
    fixed_values : (B, N) or (N,) uint8

    Returns
    -------
    u_hat : (B, N) uint8
    decision_llr : (B, N) float, the statistic seen at each position.
    """
    n = ws.n
    length = 1 << n
    batch = channel_llr.shape[0]
    fixed_values = np.broadcast_to(np.asarray(fixed_values, dtype=np.uint8), (batch, length))
    llr, psum = ws.llr, ws.psum
    llr[n][:] = channel_llr[:, bit_reversal_indices(length)]
    guard_nan = not np.isfinite(channel_llr).all()
    count = length
    u_hat = np.empty((batch, length), dtype=np.uint8)
    decision = np.empty((batch, length))
    with np.errstate(invalid="ignore", over="ignore"):
        for i in range(length):
            if i == 0:
                top = n - 1
            else:
                t = (i & -i).bit_length() - 1
                h = 1 << t
                parent = llr[t + 1]
                sign = 1.0 - 2.0 * psum[t]
                out = llr[t]
                np.multiply(sign, parent[:, :h], out=out)
                out += parent[:, h:]
                if guard_nan:
                    # +inf meeting -inf: the prefix is impossible, report no preference
                    out[out != out] = 0.0
                count += h
                top = t - 1
            for lev in range(top, -1, -1):
                h = 1 << lev
                parent = llr[lev + 1]
                llr[lev][:] = boxplus(parent[:, :h], parent[:, h:])
                count += h
            lam = llr[0][:, 0]
            decision[:, i] = lam
            if fixed[i]:
                bit = fixed_values[:, i]
            else:
                bit = (lam < 0).astype(np.uint8)
            u_hat[:, i] = bit
            beta = bit[:, None]
            lev = 0
            while (i >> lev) & 1:
                beta = np.concatenate([psum[lev] ^ beta, beta], axis=1)
                lev += 1
            if lev < n:
                psum[lev][:] = beta
    ws.evaluations = count
    return u_hat, decision


class SCDecoder:
    """Successive-cancellation decoder bound to one code.

    ``decode`` takes a single observation; ``decode_batch`` a ``(B, N)`` array.
    A decoder instance keeps mutable scratch and must not be shared between
    threads; make one per worker.
    """

    def __init__(self, code: "CodeSpec"):
        self.code = code
        self.n = log2_exact(code.N)
        self._ws: LlrWorkspace | None = None
        self._frozen_mask = code.frozen_mask()
        self._frozen_word = code.frozen_word()

    def workspace(self, batch: int) -> LlrWorkspace:
        if self._ws is None or not self._ws.fits(self.n, batch):
            self._ws = LlrWorkspace(self.n, batch)
        return self._ws

    @property
    def evaluations(self) -> int:
        return 0 if self._ws is None else self._ws.evaluations

    def decode_batch(self, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(u_hat, x_hat, decision_llr)`` for a ``(B, N)`` batch."""
        obs = _validate_obs(np.atleast_2d(obs), self.code.N)
        ws = self.workspace(obs.shape[0])
        u_hat, lam = sc_kernel(ws, obs, self._frozen_mask, self._frozen_word)
        return u_hat, encode_array(u_hat), lam

    def decode(self, obs) -> tuple[BitVector, BitVector]:
        u_hat, x_hat, _ = self.decode_batch(np.asarray(obs, dtype=float)[None, :])
        return BitVector(u_hat[0]), BitVector(x_hat[0])

    def genie_batch(self, obs: np.ndarray, true_u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Genie-aided pass: every decision is replaced by the true bit.

        Returns ``(decision_llr, wrong)`` where ``wrong[b, i]`` flags
        ``W(y, u_1^{i-1} | u_i) <= W(y, u_1^{i-1} | u_i ^ 1)``, for all ``i``.
        """
        obs = _validate_obs(np.atleast_2d(obs), self.code.N)
        true_u = np.atleast_2d(np.asarray(true_u, dtype=np.uint8))
        ws = self.workspace(obs.shape[0])
        everything = np.ones(self.code.N, dtype=bool)
        _, lam = sc_kernel(ws, obs, everything, true_u)
        wrong = (1.0 - 2.0 * true_u) * lam <= 0.0
        return lam, wrong


def sc_decode(code: "CodeSpec", obs) -> tuple[BitVector, BitVector]:
    """Decode one block; frozen positions take the code's frozen values."""
    return SCDecoder(code).decode(obs)


def genie_trace(code: "CodeSpec", obs, true_u) -> np.ndarray:
    """Per-index flags of the event that the split-channel statistic favours the
    wrong bit, computed with all earlier bits supplied correctly.  Only
    information positions can be flagged."""
    true_bits = true_u.bits if isinstance(true_u, BitVector) else np.asarray(true_u, np.uint8)
    _, wrong = SCDecoder(code).genie_batch(np.asarray(obs, dtype=float)[None, :], true_bits[None, :])
    return wrong[0] & ~code.frozen_mask()


def first_errors(lam: np.ndarray, true_u: np.ndarray, info: np.ndarray) -> np.ndarray:
    """Index of the first information position where the genie-aided decision
    rule (``0`` iff LLR >= 0) disagrees with the truth, or ``-1``.

    That is where an unaided SC decoder makes its first mistake.
    """
    decided = (lam < 0).astype(np.uint8)
    bad = (decided != true_u) & info[None, :]
    return np.where(bad.any(axis=1), bad.argmax(axis=1), -1)
