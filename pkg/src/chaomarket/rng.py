"""Seedable uniform random stream for trade fractions.

The simulator needs a generator that is (a) deterministic across runs and
platforms, (b) cheap enough to sit inside a hot loop compiled with numba,
and (c) easy to mirror in pure Python so reference implementations can
reproduce the exact same draws.  A 64-bit splitmix-style counter generator
satisfies all three: the state is a single unsigned integer advanced by a
fixed odd constant, and each output is a stateless bit-mix of the counter.

Every draw maps the top 53 bits of the mixed state onto [0, 1), so the
stream of floats is identical between the compiled path (`advance`) and the
pure-Python mirror (`UniformStream`).
"""

from __future__ import annotations

import numba
import numpy as np

_MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

# 2**-53, exactly representable; scales a 53-bit integer into [0, 1).
_TO_UNIT = 1.0 / 9007199254740992.0

_U_GAMMA = np.uint64(_GAMMA)
_U_MIX_A = np.uint64(_MIX_A)
_U_MIX_B = np.uint64(_MIX_B)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


@numba.njit(cache=True)
def advance(state):
    """Advance the generator one step.

    Returns (new_state, u) where u is uniform on [0, 1).  `state` must be
    an unsigned 64-bit integer; arithmetic wraps modulo 2**64.
    """
    state = state + _U_GAMMA
    z = state
    z = (z ^ (z >> _S30)) * _U_MIX_A
    z = (z ^ (z >> _S27)) * _U_MIX_B
    z = z ^ (z >> _S31)
    return state, (z >> _S11) * _TO_UNIT


class UniformStream:
    """Pure-Python mirror of `advance`, bit-identical draw for draw."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        if not 0 <= seed < 1 << 64:
            raise ValueError(f"seed must be in [0, 2**64): got {seed}")
        self.state = seed

    def next_float(self) -> float:
        """Return the next uniform draw from [0, 1)."""
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
        z = z ^ (z >> 31)
        return (z >> 11) * _TO_UNIT
