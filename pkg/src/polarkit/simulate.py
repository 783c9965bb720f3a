"""Seeded Monte-Carlo experiments and the tables behind them.

Every trial ``t`` draws its message bits from stream ``(seed, t, 0)`` and its
channel uniforms from ``(seed, t, 1)``.  Trials are processed in fixed chunks
and reduced in chunk order, so reports do not depend on ``threads``.  Two
codes run with the same seed see the same channel noise.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .channels import ChannelDescriptor
from .construction import (
    CodeSpec,
    ReliabilityProfile,
    _channel_sampler,
    chunks,
    construct_polar,
    construct_rm,
    draw_trials,
    run_chunks,
)
from .decoder import SCDecoder, _llr_table, first_errors
from .gf2 import encode_array
from .synthesis import bec_profile

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TrialReport:
    trials: int
    block_errors: int
    bound_sum: float | None
    first_error_hist: np.ndarray
    event_hist: np.ndarray
    seed: int
    wall_time: float

    @property
    def bler(self) -> float:
        return self.block_errors / self.trials

    @property
    def stderr(self) -> float:
        b = self.bler
        return math.sqrt(b * (1.0 - b) / self.trials)

    def same_outcome(self, other: "TrialReport") -> bool:
        """Equal in everything but wall time."""
        return (
            self.trials == other.trials
            and self.block_errors == other.block_errors
            and self.bound_sum == other.bound_sum
            and np.array_equal(self.first_error_hist, other.first_error_hist)
            and np.array_equal(self.event_hist, other.event_hist)
        )

    def csv_row(self) -> list[str]:
        bound = "" if self.bound_sum is None else repr(self.bound_sum)
        return [str(self.trials), str(self.block_errors), repr(self.bler), repr(self.stderr), bound]


BLER_HEADER = ["trials", "errors", "bler", "stderr", "bound_sum"]


def write_bler_csv(reports: Iterable[TrialReport], fh: TextIO, labels: Sequence[str] | None = None):
    out = csv.writer(fh, lineterminator="\n")
    out.writerow((["code"] if labels else []) + BLER_HEADER)
    for k, r in enumerate(reports):
        out.writerow(([labels[k]] if labels else []) + r.csv_row())


def run_bler(code: CodeSpec, trials: int, seed: int, threads: int = 1) -> TrialReport:
    """Block-error rate of SC decoding on the code's channel.

    Besides counting block errors, a genie-aided pass over the same draws
    records the first information index the decoder gets wrong and, per index,
    how often the split-channel statistic favoured the wrong bit.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if code.channel is None:
        raise ValueError("code has no channel to simulate")
    N = code.N
    started = time.perf_counter()
    if code.K == 0:
        log.info("K=0: no information bits, block error rate is 0 by convention")
        zeros = np.zeros(N, np.int64)
        return TrialReport(trials, 0, code.bound_sum(), zeros, zeros.copy(), seed,
                           time.perf_counter() - started)
    table = code.channel.materialize()
    llr_tab = _llr_table(table)
    sample_y = _channel_sampler(table)
    info = code.info_mask()
    frozen = code.frozen_mask()
    word = code.frozen_word()

    def work(span):
        start, stop = span
        u, unif = draw_trials(seed, start, stop, N)
        u[:, frozen] = word[frozen]
        obs = llr_tab[sample_y(encode_array(u), unif)]
        dec = SCDecoder(code)
        u_hat, _, _ = dec.decode_batch(obs)
        errors = int(np.any(u_hat[:, info] != u[:, info], axis=1).sum())
        lam, wrong = dec.genie_batch(obs, u)
        first = first_errors(lam, u, info)
        hist = np.bincount(first[first >= 0], minlength=N)
        events = (wrong & info).sum(axis=0)
        return errors, hist, events

    errors = 0
    hist = np.zeros(N, np.int64)
    events = np.zeros(N, np.int64)
    for e, h, ev in run_chunks(work, chunks(trials), threads):
        errors += e
        hist += h
        events += ev
    return TrialReport(trials, errors, code.bound_sum(), hist, events, seed,
                       time.perf_counter() - started)


# --- polarization -------------------------------------------------------------


def polarization_stats(eps: float, n: int, delta: float) -> tuple[float, float]:
    """Fractions of indices with ``I > 1 - delta`` and with ``I < delta``."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    i = bec_profile(eps, n).i
    return float(np.mean(i > 1.0 - delta)), float(np.mean(i < delta))


# --- rate versus reliability --------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    eta: float
    R: float
    B: float
    L: float


@dataclass(frozen=True)
class RateReliabilityCurve:
    points: tuple[CurvePoint, ...]

    def write_csv(self, fh: TextIO) -> None:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["eta", "R", "B", "L"])
        for p in self.points:
            out.writerow([repr(p.eta), repr(p.R), repr(p.B), repr(p.L)])


def _z_of(profile) -> np.ndarray:
    return profile.z_hat if isinstance(profile, ReliabilityProfile) else np.asarray(profile, float)


def rate_reliability_curve(profile: ReliabilityProfile | np.ndarray, eta_grid) -> RateReliabilityCurve:
    """For each ``eta``: rate, sum and max of ``z`` over ``{i : z_i < eta}``."""
    z = np.sort(_z_of(profile))
    partial = np.concatenate([[0.0], np.cumsum(z)])
    points = []
    for eta in np.asarray(eta_grid, dtype=float):
        k = int(np.searchsorted(z, eta, side="left"))
        points.append(CurvePoint(float(eta), k / z.size, float(partial[k]), float(z[k - 1]) if k else 0.0))
    return RateReliabilityCurve(tuple(points))


def bound_at_rate(profile: ReliabilityProfile | np.ndarray, rate: float) -> float:
    """Sum of the ``floor(rate N)`` smallest ``z`` values."""
    z = np.sort(_z_of(profile))
    return float(np.sum(z[: int(math.floor(rate * z.size))]))


# --- code comparison ----------------------------------------------------------


def rm_vs_polar(
    eps: float, n: int, K: int, trials: int, seed: int, threads: int = 1
) -> tuple[TrialReport, TrialReport, CodeSpec, CodeSpec]:
    """Polar and RM codes of the same size on BEC(eps) under identical noise."""
    ch = ChannelDescriptor.parse(f"bec:{eps!r}")
    N = 1 << n
    polar = construct_polar(ch, N, K, "exact-bec")
    rm = construct_rm(N, K, ch)
    return (run_bler(polar, trials, seed, threads), run_bler(rm, trials, seed, threads), polar, rm)


# --- complexity ---------------------------------------------------------------


@dataclass(frozen=True)
class ScalingRow:
    N: int
    encode_ns_per_block: float
    decode_ns_per_block: float
    evaluations: int


def scaling_probe(
    ch: ChannelDescriptor, n_list: Sequence[int], trials_per_n: int, seed: int
) -> list[ScalingRow]:
    """Median single-block encode and decode times per block length.

    Rates are one half.  The code is the polar code for erasure channels and
    the RM code otherwise; the choice does not change the work done.
    """
    if list(n_list) != sorted(n_list):
        raise ValueError("n_list must be ascending")
    table = ch.materialize()
    llr_tab = _llr_table(table)
    sample_y = _channel_sampler(table)
    rows = []
    for n in n_list:
        N = 1 << n
        code = construct_polar(ch, N, N // 2) if ch.is_bec else construct_rm(N, N // 2, ch)
        dec = SCDecoder(code)
        enc_t, dec_t = [], []
        for t in range(trials_per_n):
            u, unif = draw_trials(seed, t, t + 1, N)
            u[:, code.frozen_mask()] = 0
            t0 = time.perf_counter_ns()
            x = encode_array(u)
            t1 = time.perf_counter_ns()
            obs = llr_tab[sample_y(x, unif)]
            t2 = time.perf_counter_ns()
            dec.decode_batch(obs)
            t3 = time.perf_counter_ns()
            enc_t.append(t1 - t0)
            dec_t.append(t3 - t2)
        rows.append(ScalingRow(N, float(np.median(enc_t)), float(np.median(dec_t)), dec.evaluations))
    return rows


def write_scaling_csv(rows: Iterable[ScalingRow], fh: TextIO) -> None:
    out = csv.writer(fh, lineterminator="\n")
    out.writerow(["N", "encode_ns_per_block", "decode_ns_per_block", "evaluations"])
    for r in rows:
        out.writerow([r.N, repr(r.encode_ns_per_block), repr(r.decode_ns_per_block), r.evaluations])
