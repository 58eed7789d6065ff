"""Counter-based random number generation for reproducible Monte-Carlo runs.

Every draw is addressed by (master_seed, stream_id, index, draw slot) through
a 10-round Philox-4x32 block cipher, so the value of any draw is independent
of execution order: generating indices [0, N) in one call, in chunks, or in
parallel yields bit-identical results. Streams derived with :func:`substream`
are statistically independent of each other and of the parent.

Draw-slot convention used by the shot generators (see ``chain``):
slot 0 feeds state-switching decisions, slots 1-2 feed the Box-Muller pair
for IQ noise, slot 3 is an auxiliary uniform (state preparation sampling).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_PHILOX_M0 = np.uint64(0xD2511F53)
_PHILOX_M1 = np.uint64(0xCD9E8D57)
_PHILOX_W0 = np.uint64(0x9E3779B9)
_PHILOX_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_U64 = np.uint64

# default number of draw slots reserved per index by the simulators
DRAWS_PER_INDEX = 4


def _splitmix64(x: int | np.uint64) -> np.uint64:
    """64-bit finalizer used to whiten seeds and derive stream keys."""
    with np.errstate(over="ignore"):
        z = _U64(x) + _U64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
        return z ^ (z >> _U64(31))


@dataclass(frozen=True)
class SeedSpec:
    """Addressable seed: (master_seed, stream_id) selects one random stream."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "master_seed", int(self.master_seed) & 0xFFFFFFFFFFFFFFFF)
        object.__setattr__(self, "stream_id", int(self.stream_id) & 0xFFFFFFFFFFFFFFFF)

    def substream(self, tag: int | str) -> "SeedSpec":
        """Derive an independent child stream keyed by an integer or label."""
        if isinstance(tag, str):
            digest = hashlib.blake2s(tag.encode("utf-8"), digest_size=8).digest()
            tag = int.from_bytes(digest, "little")
        child = _splitmix64(_U64(self.stream_id) ^ _splitmix64(tag))
        return SeedSpec(self.master_seed, int(child))


def _philox_rounds(c0, c1, c2, c3, k0, k1):
    """Apply 10 Philox-4x32 rounds; counters are uint32 arrays."""
    c0 = c0.astype(np.uint64)
    c2 = c2.astype(np.uint64)
    with np.errstate(over="ignore"):
        for _ in range(10):
            p0 = _PHILOX_M0 * c0
            p1 = _PHILOX_M1 * c2
            hi0 = (p0 >> _U64(32)).astype(np.uint32)
            lo0 = (p0 & _MASK32).astype(np.uint32)
            hi1 = (p1 >> _U64(32)).astype(np.uint32)
            lo1 = (p1 & _MASK32).astype(np.uint32)
            c0 = (hi1 ^ c1 ^ np.uint32(k0)).astype(np.uint64)
            c1 = lo1
            c2 = (hi0 ^ c3 ^ np.uint32(k1)).astype(np.uint64)
            c3 = lo0
            k0 = _U64(k0) + _PHILOX_W0
            k1 = _U64(k1) + _PHILOX_W1
    return c0.astype(np.uint32), c1, c2.astype(np.uint32), c3


def uniforms(seed: SeedSpec, start_index: int, count: int, draws: int = DRAWS_PER_INDEX) -> np.ndarray:
    """Uniform doubles in (0, 1), shape (count, draws).

    Row i holds the draws for index ``start_index + i``; column j is draw
    slot j of that index. Any partitioning of the index range reproduces
    the same rows.
    """
    if count < 0 or draws < 1:
        raise ValueError("count must be >= 0 and draws >= 1")
    key = _splitmix64(_U64(seed.master_seed) ^ _splitmix64(seed.stream_id))
    k0 = np.uint32(key & _MASK32)
    k1 = np.uint32(key >> _U64(32))
    c3_stream = np.uint32(_splitmix64(seed.stream_id) & _MASK32)

    idx = np.arange(start_index, start_index + count, dtype=np.uint64)
    c1 = (idx & _MASK32).astype(np.uint32)
    c2 = (idx >> _U64(32)).astype(np.uint32)
    c3 = np.full(count, c3_stream, dtype=np.uint32)

    n_blocks = (draws + 1) // 2
    out = np.empty((count, 2 * n_blocks))
    for block in range(n_blocks):
        c0 = np.full(count, block, dtype=np.uint32)
        r0, r1, r2, r3 = _philox_rounds(c0, c1, c2, c3, k0, k1)
        word_a = (r0.astype(np.uint64) << _U64(32)) | r1.astype(np.uint64)
        word_b = (r2.astype(np.uint64) << _U64(32)) | r3.astype(np.uint64)
        # 53-bit mantissas, offset by half a ulp to keep values strictly in (0, 1)
        out[:, 2 * block] = ((word_a >> _U64(11)).astype(np.float64) + 0.5) / 9007199254740992.0
        out[:, 2 * block + 1] = ((word_b >> _U64(11)).astype(np.float64) + 0.5) / 9007199254740992.0
    return out[:, :draws]


def normal_pair(u1: np.ndarray, u2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Box-Muller transform: two standard normals from two uniforms in (0, 1).

    Rejection-free, so the draw count per index is fixed and the counter
    addressing stays aligned.
    """
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    return radius * np.cos(angle), radius * np.sin(angle)


def normals(seed: SeedSpec, start_index: int, count: int) -> np.ndarray:
    """One standard normal per index, shape (count,), from draw slots 1-2."""
    u = uniforms(seed, start_index, count, draws=3)
    z, _ = normal_pair(u[:, 1], u[:, 2])
    return z
