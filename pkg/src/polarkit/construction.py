"""Choosing the information set.

Polar rule: keep the ``K`` indices with the smallest (estimated) Bhattacharyya
parameters, ties to the smaller index.  Reliability profiles come from the
exact erasure recursion, exact split-channel tables (``N <= 8``) or a
Monte-Carlo estimate driven by a genie-aided SC decoder.

RM rule: keep indices by the weight of their bit label.

Indices are 0-based in memory and 1-based in JSON.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .channels import ChannelDescriptor, ChannelValidationError, bhattacharyya
from .decoder import SCDecoder, _llr_table
from .gf2 import bit_reversal_indices, encode_array, log2_exact
from .synthesis import bec_path_capacity, bec_z_values, synthesize_exact

log = logging.getLogger(__name__)

METHODS = ("exact-bec", "exact-table", "monte-carlo")
MAX_EXACT_TABLE_N = 8
MC_CHUNK = 1024  # trials per reduction unit; fixed so results ignore the thread count
SPEC_VERSION = 1


class ConstructionError(ValueError):
    """Infeasible method or size combination."""


@dataclass(frozen=True, eq=False)
class ReliabilityProfile:
    z_hat: np.ndarray
    method: str
    stderr: np.ndarray | None = None
    samples: int | None = None
    seed: int | None = None

    def __post_init__(self):
        z = np.array(self.z_hat, dtype=float)
        if z.ndim != 1 or np.any(z < 0) or np.any(z > 1):
            raise ValueError("z_hat must be a vector in [0, 1]")
        z.setflags(write=False)
        object.__setattr__(self, "z_hat", z)

    @property
    def N(self) -> int:
        return self.z_hat.size


@dataclass(frozen=True, eq=False)
class CodeSpec:
    """Parameters ``(N, K, A, u_{A^c})`` of a polar coset code.

    ``info_set`` holds sorted 0-based indices; ``frozen_values`` one bit per
    frozen position in increasing index order.
    """

    N: int
    info_set: np.ndarray
    frozen_values: np.ndarray
    channel: ChannelDescriptor | None
    method: str
    profile: ReliabilityProfile | None = field(default=None)

    def __post_init__(self):
        log2_exact(self.N)
        a = np.array(sorted(int(i) for i in self.info_set), dtype=np.int64)
        if a.size and (a[0] < 0 or a[-1] >= self.N or np.any(np.diff(a) == 0)):
            raise ValueError("info_set must be distinct indices in range")
        f = np.array(self.frozen_values, dtype=np.uint8).reshape(-1)
        if f.size != self.N - a.size or np.any(f > 1):
            raise ValueError(f"need {self.N - a.size} frozen bits")
        if self.profile is not None and self.profile.N != self.N:
            raise ValueError("profile length differs from N")
        a.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "info_set", a)
        object.__setattr__(self, "frozen_values", f)

    @property
    def K(self) -> int:
        return self.info_set.size

    @property
    def rate(self) -> float:
        return self.K / self.N

    def info_mask(self) -> np.ndarray:
        m = np.zeros(self.N, dtype=bool)
        m[self.info_set] = True
        return m

    def frozen_mask(self) -> np.ndarray:
        return ~self.info_mask()

    def frozen_word(self) -> np.ndarray:
        """Length-``N`` word with the frozen bits in place and zeros elsewhere."""
        w = np.zeros(self.N, dtype=np.uint8)
        w[self.frozen_mask()] = self.frozen_values
        return w

    def assemble(self, messages: np.ndarray) -> np.ndarray:
        """Place ``(B, K)`` message bits into full ``(B, N)`` input words."""
        messages = np.atleast_2d(np.asarray(messages, dtype=np.uint8))
        if messages.shape[1] != self.K:
            raise ValueError(f"message length {messages.shape[1]} != K={self.K}")
        u = np.broadcast_to(self.frozen_word(), (messages.shape[0], self.N)).copy()
        u[:, self.info_set] = messages
        return u

    def bound_sum(self) -> float | None:
        if self.profile is None:
            return None
        return float(np.sum(self.profile.z_hat[self.info_set]))

    # --- JSON --------------------------------------------------------------

    def to_json(self) -> str:
        p = self.profile
        obj = {
            "version": SPEC_VERSION,
            "N": self.N,
            "K": self.K,
            "channel": None if self.channel is None else str(self.channel),
            "method": self.method,
            "info_set": [int(i) + 1 for i in self.info_set],
            "frozen_values": "".join(str(int(b)) for b in self.frozen_values),
            "z_hat": None if p is None else [_Real(z) for z in p.z_hat],
            "samples": None if p is None else p.samples,
            "seed": None if p is None else p.seed,
        }
        return _dumps(obj) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CodeSpec":
        try:
            obj = json.loads(text)
            if obj.get("version") != SPEC_VERSION:
                raise ValueError(f"unsupported code version {obj.get('version')!r}")
            n_len = int(obj["N"])
            info = [int(i) - 1 for i in obj["info_set"]]
            if len(info) != int(obj["K"]):
                raise ValueError("K does not match info_set")
            frozen = [int(c) for c in obj["frozen_values"]]
            channel = ChannelDescriptor.parse(obj["channel"]) if obj["channel"] else None
            profile = None
            if obj["z_hat"] is not None:
                method = obj["method"] if obj["method"] in METHODS else "exact-bec"
                profile = ReliabilityProfile(
                    np.array(obj["z_hat"], dtype=float), method, None, obj["samples"], obj["seed"]
                )
            return cls(n_len, np.array(info, dtype=np.int64), np.array(frozen, dtype=np.uint8),
                       channel, obj["method"], profile)
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValueError(f"malformed code file: {exc}") from exc

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "CodeSpec":
        return cls.from_json(Path(path).read_text())


class _Real(float):
    pass


def _dumps(obj) -> str:
    # reals go out with 17 significant digits; json cannot be told that directly
    def enc(v):
        if isinstance(v, _Real):
            return format(float(v), ".17g")
        if isinstance(v, list):
            return "[" + ",".join(enc(x) for x in v) + "]"
        if isinstance(v, dict):
            return "{" + ",".join(f"{json.dumps(k)}:{enc(x)}" for k, x in v.items()) + "}"
        return json.dumps(v)

    return enc(obj)


# --- reliability profiles -----------------------------------------------------


def exact_bec_profile(ch: ChannelDescriptor, N: int) -> ReliabilityProfile:
    if not ch.is_bec:
        raise ConstructionError("exact-bec needs a bec:<eps> channel")
    return ReliabilityProfile(bec_z_values(ch.param, log2_exact(N)), "exact-bec")


def exact_table_profile(ch: ChannelDescriptor, N: int) -> ReliabilityProfile:
    if N > MAX_EXACT_TABLE_N:
        raise ConstructionError(f"exact-table is limited to N <= {MAX_EXACT_TABLE_N}")
    n = log2_exact(N)
    w = ch.materialize()
    if n == 0:
        return ReliabilityProfile([bhattacharyya(w)], "exact-table")
    z = [synthesize_exact(w, n, i).bhattacharyya() for i in range(1, N + 1)]
    return ReliabilityProfile(np.clip(z, 0.0, 1.0), "exact-table")


def _channel_sampler(table):
    """Inverse-CDF lookup: uniforms and input bits to output symbol ids."""
    cdf = np.cumsum(table.rows, axis=1)
    cdf[:, -1] = 1.0

    def sample(x: np.ndarray, unif: np.ndarray) -> np.ndarray:
        y = np.empty(x.shape, dtype=np.int64)
        for bit in (0, 1):
            sel = x == bit
            y[sel] = np.searchsorted(cdf[bit], unif[sel], side="right")
        return np.minimum(y, table.y_count - 1)

    return sample


def draw_trials(seed: int, start: int, stop: int, N: int):
    """Uniform input words and channel uniforms for trials ``start..stop-1``."""
    u = np.stack([rng.bits(seed, t, rng.MESSAGE, N) for t in range(start, stop)])
    unif = np.stack([rng.uniforms(seed, t, rng.CHANNEL, N) for t in range(start, stop)])
    return u, unif


def chunks(total: int, size: int = MC_CHUNK) -> list[tuple[int, int]]:
    return [(s, min(s + size, total)) for s in range(0, total, size)]


def run_chunks(fn, spans, threads: int):
    """Map ``fn`` over spans, results in span order whatever the thread count."""
    if threads <= 1 or len(spans) <= 1:
        return [fn(s) for s in spans]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, spans))


def monte_carlo_profile(
    ch: ChannelDescriptor, N: int, samples: int, seed: int, threads: int = 1
) -> ReliabilityProfile:
    """Estimate every ``Z(W_N^(i))`` as the mean of ``sqrt(W(.|u_i^1)/W(.|u_i))``.

    Each trial draws a uniform ``u``, sends ``u G_N`` through the channel and
    runs SC with every bit supplied by a genie.  With decision LLR ``L`` at
    index ``i`` the sample is ``exp(-(1 - 2 u_i) L / 2)``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    log2_exact(N)
    table = ch.materialize()
    llr_tab = _llr_table(table)
    sample_y = _channel_sampler(table)
    null_code = CodeSpec(N, np.arange(N), np.zeros(0, np.uint8), ch, "monte-carlo")

    def work(span):
        start, stop = span
        u, unif = draw_trials(seed, start, stop, N)
        obs = llr_tab[sample_y(encode_array(u), unif)]
        lam, _ = SCDecoder(null_code).genie_batch(obs, u)
        with np.errstate(over="ignore", invalid="ignore"):
            s = np.exp(-(1.0 - 2.0 * u) * lam / 2.0)
        # an infinite sample would need a true bit the channel ruled out
        s[~np.isfinite(s)] = 1.0
        mean = s.mean(axis=0)
        return stop - start, mean, ((s - mean) ** 2).sum(axis=0)

    count, mean, m2 = 0, np.zeros(N), np.zeros(N)
    for c, mu, sq in run_chunks(work, chunks(samples), threads):
        # pairwise merge of running moments
        delta = mu - mean
        total = count + c
        mean = mean + delta * (c / total)
        m2 = m2 + sq + delta**2 * (count * c / total)
        count = total

    var = m2 / (count - 1) if count > 1 else np.zeros(N)
    stderr = np.sqrt(var / count)
    # no spread observed: fall back to the rule-of-three scale 1/n
    stderr = np.where(var > 0, stderr, 1.0 / count)
    clamped = np.clip(mean, 0.0, 1.0)
    if np.any(clamped != mean):
        log.info("clamped %d Monte-Carlo estimates into [0, 1]", int(np.sum(clamped != mean)))
    return ReliabilityProfile(clamped, "monte-carlo", stderr, samples, seed)


def reliability_profile(
    ch: ChannelDescriptor,
    N: int,
    method: str,
    samples: int | None = None,
    seed: int | None = None,
    threads: int = 1,
) -> ReliabilityProfile:
    if method == "exact-bec":
        return exact_bec_profile(ch, N)
    if method == "exact-table":
        return exact_table_profile(ch, N)
    if method == "monte-carlo":
        if samples is None or seed is None:
            raise ConstructionError("monte-carlo needs samples and seed")
        return monte_carlo_profile(ch, N, samples, seed, threads)
    raise ConstructionError(f"unknown method {method!r}")


# --- selection ----------------------------------------------------------------


def select_best(z: np.ndarray, K: int) -> np.ndarray:
    """Indices of the ``K`` smallest values, ties to the smaller index, sorted."""
    order = np.argsort(z, kind="stable")
    return np.sort(order[:K])


def random_frozen(N: int, K: int, seed: int) -> np.ndarray:
    return rng.bits(seed, 0, rng.FROZEN, N - K)


def construct_polar(
    ch: ChannelDescriptor,
    N: int,
    K: int,
    method: str = "exact-bec",
    *,
    samples: int | None = None,
    seed: int | None = None,
    frozen_seed: int | None = None,
    profile: ReliabilityProfile | None = None,
    threads: int = 1,
) -> CodeSpec:
    """Polar code of length ``N`` and dimension ``K`` on channel ``ch``."""
    log2_exact(N)
    if not 0 <= K <= N:
        raise ConstructionError(f"K={K} outside 0..{N}")
    if profile is None:
        profile = reliability_profile(ch, N, method, samples, seed, threads)
    elif profile.N != N:
        raise ConstructionError("profile length differs from N")
    info = select_best(profile.z_hat, K)
    frozen = np.zeros(N - K, np.uint8) if frozen_seed is None else random_frozen(N, K, frozen_seed)
    return CodeSpec(N, info, frozen, ch, profile.method, profile)


def threshold_set(profile: ReliabilityProfile | np.ndarray, gamma: float) -> np.ndarray:
    """``{i : z_i < gamma}`` as sorted 0-based indices."""
    z = profile.z_hat if isinstance(profile, ReliabilityProfile) else np.asarray(profile)
    return np.flatnonzero(z < gamma)


def rm_order(n: int, K: int) -> int:
    """Smallest ``r`` with ``sum_{k >= r} C(n, k) <= K``."""
    if not 0 <= K <= 1 << n:
        raise ConstructionError(f"K={K} outside 0..{1 << n}")
    r = 0
    while sum(math.comb(n, k) for k in range(r, n + 1)) > K:
        r += 1
    return r


def construct_rm(
    N: int, K: int, channel: ChannelDescriptor | None = None
) -> CodeSpec:
    """Reed-Muller rule: every label of weight ``>= r`` plus a completion.

    The remaining ``K - |{w >= r}|`` indices come from weight ``r - 1`` in
    descending order of the bit-reversed label.  Frozen bits are zero.  When the
    channel is an erasure channel the exact profile is attached so bound sums
    can be reported.
    """
    n = log2_exact(N)
    r = rm_order(n, K)
    idx = np.arange(N)
    weight = np.array([bin(i).count("1") for i in range(N)])
    chosen = list(idx[weight >= r])
    if len(chosen) < K:
        rev = bit_reversal_indices(N)
        pool = idx[weight == r - 1]
        pool = pool[np.argsort(-rev[pool], kind="stable")]
        chosen += list(pool[: K - len(chosen)])
    profile = exact_bec_profile(channel, N) if channel is not None and channel.is_bec else None
    return CodeSpec(N, np.array(chosen, np.int64), np.zeros(N - K, np.uint8), channel, "rm", profile)


def rm_pathology_bound(eps: float, n: int, r: int) -> float:
    """``2^r (1 - eps)^(2^(n - r))``, an upper bound on ``I(W_{0^(n-r) 1^r})``."""
    if not 0 <= r <= n:
        raise ValueError("need 0 <= r <= n")
    return (2.0**r) * (1.0 - eps) ** (2.0 ** (n - r))


def rm_pathology_check(eps: float, n: int, r: int) -> tuple[float, float]:
    """Return ``(exact, bound)`` for the path ``0^(n-r) 1^r`` and assert the order."""
    exact = bec_path_capacity(eps, [0] * (n - r) + [1] * r)
    bound = rm_pathology_bound(eps, n, r)
    if exact > bound * (1 + 1e-12) + 1e-300:
        raise AssertionError(f"I={exact!r} exceeds bound {bound!r} at eps={eps}, n={n}, r={r}")
    return exact, bound


def require_channel(code: CodeSpec) -> ChannelDescriptor:
    if code.channel is None:
        raise ChannelValidationError("code file carries no channel")
    return code.channel
