"""Counter-based deterministic randomness.

The process consumes three independent families of uniform variables: one
per-vertex coin deciding the initial role (car vs. spot), one walk stream
per origin vertex, and one tie-breaking stream per origin vertex.
``RandomnessSource`` realizes all of them as a pure function of
``(seed, purpose, origin, time)`` so that replays, couplings between runs
sharing walk/tie streams, and parallel replicas are all bit-reproducible.

The construction is a chained splitmix64-style finalizer: no generator
state is ever advanced, so the value of a draw cannot depend on how many
other draws happened before it.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

_MASK = (1 << 64) - 1

# splitmix64 increment / finalizer constants plus two extra odd mixers used
# to fold purpose, origin and time into the counter.
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_ORIGIN_MUL = 0xD1B54A32D192ED03
_TIME_MUL = 0x2545F4914F6CDD1D
_PURPOSE_MUL = 0xA24BAED4963EE407

_U64_GOLDEN = np.uint64(_GOLDEN)
_U64_MIX1 = np.uint64(_MIX1)
_U64_MIX2 = np.uint64(_MIX2)
_U64_ORIGIN_MUL = np.uint64(_ORIGIN_MUL)
_U64_TIME_MUL = np.uint64(_TIME_MUL)
_SHIFT_30 = np.uint64(30)
_SHIFT_27 = np.uint64(27)
_SHIFT_31 = np.uint64(31)
_SHIFT_11 = np.uint64(11)

_INV_2_53 = 1.0 / float(1 << 53)


class Purpose(IntEnum):
    """The three coordinates of the per-vertex randomness triple."""

    ROLE = 1
    WALK = 2
    TIE = 3


def _mix64(x: int) -> int:
    """splitmix64 output function on a 64-bit integer counter."""
    z = (x + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _mix64_np(x: np.ndarray) -> np.ndarray:
    """Vectorized twin of :func:`_mix64`; uint64 wrap-around matches Python."""
    z = x + _U64_GOLDEN
    z = (z ^ (z >> _SHIFT_30)) * _U64_MIX1
    z = (z ^ (z >> _SHIFT_27)) * _U64_MIX2
    return z ^ (z >> _SHIFT_31)


class RandomnessSource:
    """Pure map (seed, purpose, origin, time) -> uniform in [0, 1).

    Identical arguments give identical output on every platform and under
    any thread schedule.  Distinct (purpose, origin) pairs index distinct
    counter streams.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK
        # One sub-key per purpose; origin and time are folded in per draw.
        self._purpose_key = {
            purpose: _mix64(self.seed ^ ((int(purpose) * _PURPOSE_MUL) & _MASK))
            for purpose in Purpose
        }

    def stream_key(self, purpose: Purpose, origin: int) -> int:
        """64-bit key of the (purpose, origin) stream."""
        folded = (self._purpose_key[purpose] + ((origin + 1) * _ORIGIN_MUL)) & _MASK
        return _mix64(folded)

    def stream_keys(self, purpose: Purpose, origins: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`stream_key` for an int array of origins."""
        base = np.uint64(self._purpose_key[purpose])
        folded = base + (origins.astype(np.uint64) + np.uint64(1)) * _U64_ORIGIN_MUL
        return _mix64_np(folded)

    def draw(self, purpose: Purpose, origin: int, time: int) -> float:
        """Uniform [0, 1) value of stream (purpose, origin) at index ``time``."""
        key = self.stream_key(purpose, origin)
        word = _mix64((key + ((time + 1) * _TIME_MUL)) & _MASK)
        return (word >> 11) * _INV_2_53

    def draw_array(self, purpose: Purpose, origins: np.ndarray, time: int) -> np.ndarray:
        """Vectorized :meth:`draw`; elementwise identical to the scalar path."""
        keys = self.stream_keys(purpose, origins)
        return self.uniform_from_keys(keys, time)

    @staticmethod
    def uniform_from_keys(keys: np.ndarray, time: int) -> np.ndarray:
        """Uniforms at index ``time`` for precomputed stream keys.

        Engines cache ``stream_keys`` once per run; this is the per-step
        hot path (one finalizer pass over the active cars).
        """
        word = _mix64_np(keys + np.uint64((time + 1) * _TIME_MUL & _MASK))
        return (word >> _SHIFT_11) * _INV_2_53


def derive_seed(seed: int, index: int) -> int:
    """Derive the replica seed ``index`` from a base seed, reproducibly."""
    return _mix64((int(seed) & _MASK) ^ ((index + 1) * _TIME_MUL & _MASK))
