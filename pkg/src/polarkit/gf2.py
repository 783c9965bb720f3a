"""GF(2) row vectors and the polar transform.

Bit vectors are packed little-endian into ``uint64`` words: element ``k`` lives
in word ``k // 64`` at bit position ``k % 64``.  The butterfly stages of
``F^{(x)n}`` operate word-wise; for strides below 64 they use shift-and-mask on
whole words, above that they XOR word slices.

Indices are 0-based internally.  Row ``i`` (0-based) of ``G_N`` has the bit
label ``b_1...b_n`` = binary expansion of ``i`` with ``b_1`` most significant.
"""

from __future__ import annotations

import io
import struct
from typing import BinaryIO, Iterable, Iterator, TextIO

import numpy as np

WORD = 64

# _LOW_MASKS[s]: ones at bit positions p (within a word) where bit s of p is 0.
_LOW_MASKS = {}
for _s in range(6):
    _h = 1 << _s
    _m = 0
    for _p in range(WORD):
        if not (_p >> _s) & 1:
            _m |= 1 << _p
    _LOW_MASKS[_h] = np.uint64(_m)
del _s, _h, _m, _p


class InvalidLengthError(ValueError):
    """Block length is not a positive power of two (or lengths disagree)."""


def log2_exact(length: int) -> int:
    """Return ``n`` with ``2**n == length`` or raise :class:`InvalidLengthError`."""
    if length < 1 or length & (length - 1):
        raise InvalidLengthError(f"length must be a power of two, got {length}")
    return length.bit_length() - 1


def _pack(bits: np.ndarray) -> np.ndarray:
    n_words = (len(bits) + WORD - 1) // WORD
    padded = np.zeros(n_words * WORD, dtype=np.uint8)
    padded[: len(bits)] = bits
    return np.packbits(padded, bitorder="little").view("<u8").astype(np.uint64)


def _unpack(words: np.ndarray, length: int) -> np.ndarray:
    raw = words.astype("<u8").view(np.uint8)
    return np.unpackbits(raw, bitorder="little")[:length]


class BitVector:
    """Immutable packed vector over GF(2)."""

    __slots__ = ("_words", "_length")

    def __init__(self, bits: Iterable[int] | np.ndarray | str):
        if isinstance(bits, str):
            bits = [int(c) for c in bits.strip()]
        arr = np.asarray(bits)
        if arr.ndim != 1:
            raise ValueError("BitVector needs a one-dimensional sequence")
        if len(arr) == 0:
            raise ValueError("BitVector length must be positive")
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("BitVector entries must be 0 or 1")
        self._length = int(len(arr))
        self._words = _pack(arr.astype(np.uint8))
        self._words.setflags(write=False)

    @classmethod
    def _from_words(cls, words: np.ndarray, length: int) -> "BitVector":
        obj = cls.__new__(cls)
        obj._length = length
        obj._words = words
        obj._words.setflags(write=False)
        return obj

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        if length < 1:
            raise ValueError("BitVector length must be positive")
        return cls._from_words(np.zeros((length + WORD - 1) // WORD, np.uint64), length)

    @property
    def words(self) -> np.ndarray:
        return self._words

    @property
    def bits(self) -> np.ndarray:
        """Unpacked ``uint8`` copy of the bits."""
        return _unpack(self._words, self._length)

    def __len__(self) -> int:
        return self._length

    def __getitem__(self, k: int) -> int:
        if k < 0:
            k += self._length
        if not 0 <= k < self._length:
            raise IndexError(k)
        return int((int(self._words[k // WORD]) >> (k % WORD)) & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits.tolist())

    def __xor__(self, other: "BitVector") -> "BitVector":
        if not isinstance(other, BitVector):
            return NotImplemented
        if len(other) != self._length:
            raise InvalidLengthError(f"XOR of lengths {self._length} and {len(other)}")
        return BitVector._from_words(self._words ^ other._words, self._length)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self._length == other._length and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self._length, self._words.tobytes()))

    def weight(self) -> int:
        return int(self.bits.sum())

    def to_str(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def __repr__(self) -> str:
        s = self.to_str()
        if len(s) > 64:
            s = s[:61] + "..."
        return f"BitVector('{s}')"


def _as_bitvector(u) -> BitVector:
    return u if isinstance(u, BitVector) else BitVector(u)


def bit_reversal_indices(length: int) -> np.ndarray:
    """Permutation ``p`` with ``p[k]`` = bit-reversal of ``k`` over ``log2(length)`` bits."""
    n = log2_exact(length)
    idx = np.arange(length, dtype=np.int64)
    rev = np.zeros(length, dtype=np.int64)
    for j in range(n):
        rev |= ((idx >> j) & 1) << (n - 1 - j)
    return rev


def bit_reverse_permute(u) -> BitVector:
    """Apply ``B_N``: output position ``b_1...b_n`` takes input ``b_n...b_1``."""
    u = _as_bitvector(u)
    perm = bit_reversal_indices(len(u))
    return BitVector(u.bits[perm])


def _butterfly_words(words: np.ndarray, length: int) -> np.ndarray:
    """In-place ``u F^{(x)n}`` on packed words; returns the XOR count."""
    xors = 0
    h = 1
    while h < length:
        if h < WORD:
            mask = _LOW_MASKS[h]
            # positions with bit h clear receive the element h places above
            words ^= (words >> np.uint64(h)) & mask
        else:
            wh = h // WORD
            blocks = words.reshape(-1, 2, wh)
            blocks[:, 0, :] ^= blocks[:, 1, :]
        xors += length // 2
        h <<= 1
    return xors


def apply_fn(u) -> BitVector:
    """Return ``u F^{(x)n}`` with ``F = [[1, 0], [1, 1]]``.

    Uses the ``n``-stage butterfly network, ``(N/2) n`` XORs in total.
    """
    u = _as_bitvector(u)
    log2_exact(len(u))
    words = u.words.copy()
    # padding above the vector is zero and shifts only pull from higher positions
    _butterfly_words(words, len(u))
    return BitVector._from_words(words, len(u))


def fn_xor_count(length: int) -> int:
    """XOR operations performed by :func:`apply_fn` at this length."""
    return (length // 2) * log2_exact(length)


def encode(u) -> BitVector:
    """``x = u G_N`` with ``G_N = B_N F^{(x)n}``."""
    return apply_fn(bit_reverse_permute(u))


def encode_array(u: np.ndarray) -> np.ndarray:
    """Batch encoder over the last axis of a ``uint8`` array of shape ``(..., N)``."""
    u = np.asarray(u, dtype=np.uint8)
    length = u.shape[-1]
    log2_exact(length)
    x = u[..., bit_reversal_indices(length)].copy()
    lead = x.shape[:-1]
    h = 1
    while h < length:
        view = x.reshape(*lead, length // (2 * h), 2, h)
        view[..., 0, :] ^= view[..., 1, :]
        h <<= 1
    return x


def row_weight(b: Iterable[int] | int, n: int | None = None) -> int:
    """Hamming weight ``2**w_H(b)`` of row ``b_1...b_n`` of ``G_N``.

    ``b`` is either a bit sequence or a 0-based row index (then ``n`` is not
    needed, the weight does not depend on leading zeros).
    """
    if isinstance(b, (int, np.integer)):
        if b < 0:
            raise ValueError("row index must be non-negative")
        return 1 << bin(int(b)).count("1")
    return 1 << sum(int(x) for x in b)


def generator_row(i: int, length: int) -> BitVector:
    """Row ``i`` (0-based) of ``G_N`` from the bit-indexed element formula."""
    n = log2_exact(length)
    if not 0 <= i < length:
        raise IndexError(i)
    b = [(i >> (n - 1 - k)) & 1 for k in range(n)]
    cols = np.arange(length)
    row = np.ones(length, dtype=np.uint8)
    for k in range(n):
        # (G_N)_{b, b'} = prod_k (1 + b'_k + b_{n+1-k} b'_k) over GF(2)
        bp = (cols >> (n - 1 - k)) & 1
        row &= (1 ^ bp ^ (b[n - 1 - k] & bp)).astype(np.uint8)
    return BitVector(row)


def kron_power_row(i: int, length: int) -> BitVector:
    """Row ``i`` of ``F^{(x)n}`` from its element formula."""
    n = log2_exact(length)
    cols = np.arange(length)
    row = np.ones(length, dtype=np.uint8)
    for k in range(n):
        b = (i >> (n - 1 - k)) & 1
        bp = (cols >> (n - 1 - k)) & 1
        row &= (1 ^ bp ^ (b & bp)).astype(np.uint8)
    return BitVector(row)


# --- bit I/O -------------------------------------------------------------------


def write_bits_text(vectors: Iterable[BitVector], fh: TextIO) -> None:
    for v in vectors:
        fh.write(v.to_str() + "\n")


def read_bits_text(fh: TextIO) -> list[BitVector]:
    out = []
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line:
            continue
        if set(line) - {"0", "1"}:
            raise ValueError(f"line {lineno}: expected only '0'/'1' characters")
        out.append(BitVector(line))
    return out


def write_bits_binary(vectors: Iterable[BitVector], fh: BinaryIO) -> None:
    """Records of ``<u8 bit length>`` followed by MSB-first packed bytes."""
    for v in vectors:
        fh.write(struct.pack("<Q", len(v)))
        fh.write(np.packbits(v.bits, bitorder="big").tobytes())


def read_bits_binary(fh: BinaryIO) -> list[BitVector]:
    out = []
    while True:
        head = fh.read(8)
        if not head:
            break
        if len(head) != 8:
            raise ValueError("truncated length header")
        (length,) = struct.unpack("<Q", head)
        if length == 0:
            raise ValueError("zero-length record")
        nbytes = (length + 7) // 8
        body = fh.read(nbytes)
        if len(body) != nbytes:
            raise ValueError("truncated bit record")
        bits = np.unpackbits(np.frombuffer(body, np.uint8), bitorder="big")[:length]
        out.append(BitVector(bits))
    return out


def bits_to_bytes(vectors: Iterable[BitVector]) -> bytes:
    buf = io.BytesIO()
    write_bits_binary(vectors, buf)
    return buf.getvalue()
