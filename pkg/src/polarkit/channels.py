"""Finite binary-input channels and their scalar parameters.

A channel is a 2 x |Y| table of transition probabilities.  Output symbols are
integer ids ``0..y_count-1``.  For the built-in BEC the ids are
``0 -> '0'``, ``1 -> erasure``, ``2 -> '1'``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

ROW_SUM_TOL = 1e-12
BOUND_TOL = 1e-9
BEC_ERASURE = 1


class ChannelValidationError(ValueError):
    pass


class BoundViolation(AssertionError):
    """A bound that must hold for every channel did not."""


@dataclass(frozen=True, eq=False)
class DmcTable:
    """Transition table ``W(y|x)`` of a binary-input DMC.

    Rows are validated, never renormalized.
    """

    p0: np.ndarray
    p1: np.ndarray

    def __post_init__(self):
        p0 = np.array(self.p0, dtype=float)
        p1 = np.array(self.p1, dtype=float)
        if p0.ndim != 1 or p1.ndim != 1 or p0.shape != p1.shape or p0.size < 1:
            raise ChannelValidationError("p0 and p1 must be equal-length non-empty rows")
        for name, row in (("p0", p0), ("p1", p1)):
            if not np.all(np.isfinite(row)) or np.any(row < 0):
                raise ChannelValidationError(f"{name} has negative or non-finite entries")
            if abs(row.sum() - 1.0) > ROW_SUM_TOL:
                raise ChannelValidationError(f"{name} sums to {row.sum():.17g}, not 1")
        p0.setflags(write=False)
        p1.setflags(write=False)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "p1", p1)

    @property
    def y_count(self) -> int:
        return self.p0.size

    @property
    def rows(self) -> np.ndarray:
        """``(2, y_count)`` array, row ``x`` is ``W(.|x)``."""
        return np.vstack([self.p0, self.p1])

    @classmethod
    def from_rows(cls, rows) -> "DmcTable":
        rows = np.asarray(rows, dtype=float)
        return cls(rows[0], rows[1])

    def allclose(self, other: "DmcTable", atol: float = 1e-12) -> bool:
        return self.y_count == other.y_count and bool(
            np.allclose(self.rows, other.rows, rtol=0, atol=atol)
        )

    def __repr__(self) -> str:
        return f"DmcTable(y_count={self.y_count})"


def bec(eps: float) -> DmcTable:
    if not 0.0 <= eps <= 1.0:
        raise ChannelValidationError(f"erasure probability {eps} outside [0, 1]")
    return DmcTable([1.0 - eps, eps, 0.0], [0.0, eps, 1.0 - eps])


def bsc(p: float) -> DmcTable:
    if not 0.0 <= p <= 1.0:
        raise ChannelValidationError(f"crossover probability {p} outside [0, 1]")
    return DmcTable([1.0 - p, p], [p, 1.0 - p])


def perfect() -> DmcTable:
    return DmcTable([1.0, 0.0], [0.0, 1.0])


@dataclass(frozen=True)
class ChannelDescriptor:
    """Parsed channel spec: ``bec:<eps>``, ``bsc:<p>`` or ``table:<path>``."""

    kind: str
    param: float | None = None
    path: str | None = None
    table: DmcTable | None = field(default=None, compare=False, repr=False)

    @classmethod
    def parse(cls, text: str) -> "ChannelDescriptor":
        kind, sep, rest = text.partition(":")
        if not sep or not rest:
            raise ChannelValidationError(f"bad channel spec {text!r}")
        if kind in ("bec", "bsc"):
            try:
                value = float(rest)
            except ValueError:
                raise ChannelValidationError(f"bad channel parameter in {text!r}") from None
            desc = cls(kind, param=value)
            desc.materialize()
            return desc
        if kind == "table":
            return cls("table", path=rest, table=load_table(rest))
        raise ChannelValidationError(f"unknown channel kind {kind!r}")

    def materialize(self) -> DmcTable:
        if self.kind == "bec":
            return bec(self.param)
        if self.kind == "bsc":
            return bsc(self.param)
        if self.table is None:
            raise ChannelValidationError("table channel without a loaded table")
        return self.table

    @property
    def symmetric(self) -> bool:
        """Known-symmetric kinds only; arbitrary tables count as unverified."""
        return self.kind in ("bec", "bsc")

    @property
    def is_bec(self) -> bool:
        return self.kind == "bec"

    def __str__(self) -> str:
        if self.kind == "table":
            return f"table:{self.path}"
        return f"{self.kind}:{self.param!r}"


def load_table(path: str | Path) -> DmcTable:
    with open(path) as fh:
        obj = json.load(fh)
    try:
        return DmcTable(obj["p0"], obj["p1"])
    except (KeyError, TypeError) as exc:
        raise ChannelValidationError(f"{path}: expected an object with p0 and p1") from exc


def symmetry_permutation(desc: ChannelDescriptor) -> np.ndarray:
    """The involution ``pi`` with ``W(y|1) = W(pi(y)|0)`` for a built-in symmetric kind."""
    if desc.kind == "bsc":
        return np.array([1, 0])
    if desc.kind == "bec":
        return np.array([2, 1, 0])
    raise ChannelValidationError(f"no known symmetry for channel kind {desc.kind!r}")


# --- parameters ------------------------------------------------------------------


def symmetric_capacity(w: DmcTable) -> float:
    """``I(W)`` in bits under uniform inputs."""
    total = 0.0
    mix = 0.5 * w.p0 + 0.5 * w.p1
    for row in (w.p0, w.p1):
        for p, q in zip(row, mix):
            if p > 0.0:
                total += 0.5 * p * math.log2(p / q)
    return min(max(total, 0.0), 1.0)


def bhattacharyya(w: DmcTable) -> float:
    """``Z(W) = sum_y sqrt(W(y|0) W(y|1))``."""
    return float(np.sqrt(w.p0 * w.p1).sum())


def variational_distance(w: DmcTable) -> float:
    return float(0.5 * np.abs(w.p0 - w.p1).sum())


def is_bec_table(w: DmcTable, tol: float = 1e-12) -> bool:
    """Every symbol is either one-sided or an erasure (``W(y|0) == W(y|1)``)."""
    one_sided = (w.p0 <= tol) | (w.p1 <= tol)
    erasure = np.abs(w.p0 - w.p1) <= tol
    return bool(np.all(one_sided | erasure))


@dataclass(frozen=True)
class ChannelParams:
    i: float
    z: float
    d: float


def check_bounds(w: DmcTable, tol: float = BOUND_TOL) -> ChannelParams:
    """Compute ``(I, Z, d)`` and assert the bound chain that ties them together.

    Checked: ``log2(2/(1+Z)) <= I <= sqrt(1-Z^2)``, ``I + Z >= 1``,
    ``I <= d <= sqrt(1-Z^2)``, and ``I + Z == 1`` for erasure channels.
    Raises :class:`BoundViolation` on the first failure.
    """
    i = symmetric_capacity(w)
    z = bhattacharyya(w)
    d = variational_distance(w)
    upper = math.sqrt(max(0.0, 1.0 - z * z))
    checks = [
        ("I >= log2(2/(1+Z))", math.log2(2.0 / (1.0 + z)) <= i + tol),
        ("I <= sqrt(1-Z^2)", i <= upper + tol),
        ("I + Z >= 1", i + z >= 1.0 - tol),
        ("I <= d", i <= d + tol),
        ("d <= sqrt(1-Z^2)", d <= upper + tol),
    ]
    if is_bec_table(w):
        checks.append(("I + Z == 1 (erasure channel)", abs(i + z - 1.0) <= tol))
    for name, ok in checks:
        if not ok:
            raise BoundViolation(f"{name} violated: I={i!r} Z={z!r} d={d!r}")
    return ChannelParams(i, z, d)


def z_convexity_probe(ws: Sequence[DmcTable], q: Sequence[float]) -> tuple[float, float]:
    """Return ``(sum_j q_j Z(W_j), Z(sum_j q_j W_j))``; the first never exceeds the second."""
    if len(ws) != len(q) or not ws:
        raise ValueError("need one weight per channel")
    y = ws[0].y_count
    if any(w.y_count != y for w in ws):
        raise ChannelValidationError("channels must share an output alphabet")
    q = np.asarray(q, dtype=float)
    if np.any(q < 0) or abs(q.sum() - 1.0) > ROW_SUM_TOL:
        raise ValueError("weights must be a probability vector")
    lhs = float(sum(qj * bhattacharyya(w) for qj, w in zip(q, ws)))
    rows = sum(qj * w.rows for qj, w in zip(q, ws))
    rhs = float(np.sqrt(rows[0] * rows[1]).sum())
    return lhs, rhs


def random_table(rng: np.random.Generator, y_count: int, sparsity: float = 0.0) -> DmcTable:
    """Dirichlet rows, optionally with some entries zeroed; used by property tests."""
    rows = rng.dirichlet(np.ones(y_count), size=2)
    if sparsity > 0.0:
        mask = rng.random((2, y_count)) < sparsity
        for x in range(2):
            if mask[x].all():
                mask[x, rng.integers(y_count)] = False
        rows = np.where(mask, 0.0, rows)
    rows /= rows.sum(axis=1, keepdims=True)
    # row sums are exact to a few ulps after one division
    return DmcTable(rows[0], rows[1])
