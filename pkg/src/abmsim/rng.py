"""Counter-based random streams (Philox4x64-10).

Every stream is the Philox4x64-10 block cipher keyed by the pair
``(master_seed, stream_id)``.  Block ``i`` of a stream is the cipher applied
to the 256-bit counter ``(i, 0, 0, 0)``; each block yields four 64-bit words,
consumed in order.  The stream position is therefore just the number of words
drawn so far, which makes state serialization trivial and lets any replicate
be regenerated without touching the others.

Derived draws:

* ``uniform01``: one word ``w``, returns ``(w >> 11) * 2**-53``.
* ``uniform_int(lo, hi)``: rejection sampling over ``span = hi - lo + 1``.
  A word ``w`` is rejected while ``w < 2**64 mod span``; the result is
  ``lo + w % span``.  No modulo bias.

The same algorithms are compiled with numba for the simulation kernels
(``next_word``/``uniform01_jit``/``uniform_int_jit`` operate on a small state
array) and must agree bit for bit with :class:`RngStream`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numba
import numpy as np

MASK64 = (1 << 64) - 1

PHILOX_M0 = 0xD2E7470EE14C6C93
PHILOX_M1 = 0xCA5A826395121157
PHILOX_W0 = 0x9E3779B97F4A7C15
PHILOX_W1 = 0xBB67AE8584CAA73B
PHILOX_ROUNDS = 10


class InvalidRangeError(ValueError):
    pass


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one random stream: a master seed plus a replicate index."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise TypeError(f"{name} must be an integer, got {type(v).__name__}")
            if not 0 <= int(v) <= MASK64:
                raise ValueError(f"{name} must fit in 64 unsigned bits, got {v}")

    @classmethod
    def from_clock(cls, stream_id: int = 0) -> "SeedSpec":
        """Fallback seeding from the wall clock when no seed was supplied."""
        return cls(time.time_ns() & MASK64, stream_id)

    def with_stream(self, stream_id: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, stream_id)


def philox4x64_block(key0: int, key1: int, counter: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
    """Pure-Python Philox4x64-10 on one 256-bit counter (reference version)."""
    c0, c1, c2, c3 = counter
    for r in range(PHILOX_ROUNDS):
        if r:
            key0 = (key0 + PHILOX_W0) & MASK64
            key1 = (key1 + PHILOX_W1) & MASK64
        p0 = PHILOX_M0 * c0
        p1 = PHILOX_M1 * c2
        c0, c1, c2, c3 = (p1 >> 64) ^ c1 ^ key0, p1 & MASK64, (p0 >> 64) ^ c3 ^ key1, p0 & MASK64
    return c0, c1, c2, c3


# --- numba kernels -------------------------------------------------------
# Every constant is a np.uint64: mixing uint64 with int64 literals promotes to
# float64 under numba's typing rules.

_U32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_JM0 = np.uint64(PHILOX_M0)
_JM1 = np.uint64(PHILOX_M1)
_JW0 = np.uint64(PHILOX_W0)
_JW1 = np.uint64(PHILOX_W1)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_TWO = np.uint64(2)
_THREE = np.uint64(3)
_INV53 = 1.0 / 9007199254740992.0

# State array layout (uint64[8]):
#   0, 1  key words (master_seed, stream_id)
#   2     words consumed so far
#   3     cached block index + 1 (0 = empty cache)
#   4..7  cached block
STATE_SIZE = 8


@numba.njit(cache=True, inline="always")
def _mulhilo(a, b):
    a_lo = a & _U32
    a_hi = a >> _S32
    b_lo = b & _U32
    b_hi = b >> _S32
    t = a_lo * b_lo
    k = t >> _S32
    t = a_hi * b_lo + k
    w1 = t & _U32
    w2 = t >> _S32
    t = a_lo * b_hi + w1
    k = t >> _S32
    hi = a_hi * b_hi + w2 + k
    return hi, a * b


@numba.njit(cache=True)
def philox4x64_block_jit(key0, key1, c0, c1, c2, c3, out):
    k0 = key0
    k1 = key1
    for r in range(PHILOX_ROUNDS):
        if r > 0:
            k0 = k0 + _JW0
            k1 = k1 + _JW1
        hi0, lo0 = _mulhilo(_JM0, c0)
        hi1, lo1 = _mulhilo(_JM1, c2)
        n0 = hi1 ^ c1 ^ k0
        n2 = hi0 ^ c3 ^ k1
        c0 = n0
        c1 = lo1
        c2 = n2
        c3 = lo0
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


@numba.njit(cache=True)
def next_word(st):
    pos = st[2]
    blk = pos >> _TWO
    if st[3] != blk + _ONE:
        philox4x64_block_jit(st[0], st[1], blk, _ZERO, _ZERO, _ZERO, st[4:8])
        st[3] = blk + _ONE
    st[2] = pos + _ONE
    return st[4 + np.int64(pos & _THREE)]


@numba.njit(cache=True)
def uniform01_jit(st):
    return np.float64(next_word(st) >> _S11) * _INV53


@numba.njit(cache=True)
def uniform_int_jit(st, lo, hi):
    """Inclusive integer draw for int64 bounds with ``hi - lo < 2**63``."""
    span = np.uint64(hi - lo) + _ONE
    # 2**64 mod span, computed without 128-bit arithmetic
    threshold = (_ZERO - span) % span
    while True:
        w = next_word(st)
        if w >= threshold:
            return lo + np.int64(w % span)


@numba.njit(cache=True)
def fill_words(key0, key1, start, out):
    """Write words ``start .. start+len(out)-1`` of a stream into ``out``."""
    buf = np.empty(4, np.uint64)
    n = out.shape[0]
    i = 0
    pos = start
    while i < n:
        blk = pos >> _TWO
        philox4x64_block_jit(key0, key1, blk, _ZERO, _ZERO, _ZERO, buf)
        j = np.int64(pos & _THREE)
        while j < 4 and i < n:
            out[i] = buf[j]
            i += 1
            j += 1
            pos += _ONE


def new_state(spec: SeedSpec, position: int = 0) -> np.ndarray:
    st = np.zeros(STATE_SIZE, dtype=np.uint64)
    st[0] = spec.master_seed
    st[1] = spec.stream_id
    st[2] = position
    return st


class RngStream:
    """A stateful, single-owner view onto one Philox stream.

    Words are produced in blocks of 256 and cached; the observable state is
    only ``(master_seed, stream_id, position)``.
    """

    _CHUNK = 256

    def __init__(self, spec: SeedSpec, position: int = 0):
        self.spec = spec
        self._key0 = np.uint64(spec.master_seed)
        self._key1 = np.uint64(spec.stream_id)
        self._pos = int(position)
        self._buf = np.empty(self._CHUNK, dtype=np.uint64)
        self._buf_start = -1

    @property
    def position(self) -> int:
        """Number of 64-bit words consumed so far."""
        return self._pos

    def next_u64(self) -> int:
        off = self._pos - self._buf_start
        if self._buf_start < 0 or not 0 <= off < self._CHUNK:
            # chunk-align so cache contents do not depend on access history
            self._buf_start = self._pos - self._pos % self._CHUNK
            fill_words(self._key0, self._key1, np.uint64(self._buf_start), self._buf)
            off = self._pos - self._buf_start
        self._pos += 1
        return int(self._buf[off])

    def uniform01(self) -> float:
        return (self.next_u64() >> 11) * _INV53

    def uniform_int(self, lo: int, hi: int) -> int:
        if lo > hi:
            raise InvalidRangeError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        if span > MASK64:
            return lo + self.next_u64()
        threshold = (1 << 64) % span
        while True:
            w = self.next_u64()
            if w >= threshold:
                return lo + w % span

    def permutation(self, n: int) -> list[int]:
        """Fisher-Yates shuffle of ``range(n)``; consumes ``n - 1`` draws."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.uniform_int(0, i)
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def getstate(self) -> dict:
        return {
            "master_seed": self.spec.master_seed,
            "stream_id": self.spec.stream_id,
            "position": self._pos,
        }

    @classmethod
    def from_state(cls, state: dict) -> "RngStream":
        return cls(SeedSpec(int(state["master_seed"]), int(state["stream_id"])), int(state["position"]))

    def kernel_state(self) -> np.ndarray:
        """State array for the numba kernels, positioned where this stream is."""
        return new_state(self.spec, self._pos)

    def sync_from_kernel(self, st: np.ndarray) -> None:
        self._pos = int(st[2])

    def __repr__(self):
        return f"RngStream({self.spec.master_seed}, {self.spec.stream_id}, position={self._pos})"


def create_stream(spec: SeedSpec) -> RngStream:
    return RngStream(spec)


@numba.njit(cache=True)
def permutation_jit(st, n, out):
    for i in range(n):
        out[i] = i
    for i in range(n - 1, 0, -1):
        j = uniform_int_jit(st, 0, i)
        tmp = out[i]
        out[i] = out[j]
        out[j] = tmp
