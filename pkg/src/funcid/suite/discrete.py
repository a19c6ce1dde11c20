"""Base pseudo-Boolean benchmark functions on bitstrings.

Six untransformed functions: OneMax, LeadingOnes, Linear, LABS, IsingRing
and IsingTriangular.  Inputs are 0/1 vectors; values follow the usual
maximization-style conventions (higher = more structure), which is all the
identification task needs.
"""

from __future__ import annotations

import math

import numpy as np

#: index -> display name, in suite order
FUNCTION_TABLE: dict[int, str] = {
    1: "OneMax",
    2: "LeadingOnes",
    3: "Linear",
    4: "LABS",
    5: "IsingRing",
    6: "IsingTriangular",
}


def one_max(x: np.ndarray) -> float:
    return float(np.sum(x))


def leading_ones(x: np.ndarray) -> float:
    zeros = np.flatnonzero(x == 0)
    return float(zeros[0]) if zeros.size else float(x.size)


def linear(x: np.ndarray) -> float:
    """Weighted counting with weights 1..d."""
    return float(np.arange(1, x.size + 1) @ x)


def labs(x: np.ndarray) -> float:
    """Merit factor d^2 / (2E) of the +/-1 sequence, E the sidelobe energy."""
    d = x.size
    if d < 2:
        return 0.0
    s = 2.0 * x - 1.0
    energy = 0.0
    for k in range(1, d):
        c_k = float(s[: d - k] @ s[k:])
        energy += c_k * c_k
    return d * d / (2.0 * energy)


def ising_ring(x: np.ndarray) -> float:
    """Number of agreeing neighbor pairs around the ring."""
    neighbor = np.roll(x, -1)
    return float(np.sum(x * neighbor + (1 - x) * (1 - neighbor)))


def ising_triangular(x: np.ndarray) -> float:
    """Agreeing pairs on a periodic triangular lattice; d must be square."""
    side = math.isqrt(x.size)
    grid = x.reshape(side, side)
    total = 0.0
    for shift in ((1, 0), (0, 1), (1, 1)):
        rolled = np.roll(grid, shift=(-shift[0], -shift[1]), axis=(0, 1))
        total += float(np.sum(grid * rolled + (1 - grid) * (1 - rolled)))
    return total


EVALUATORS = {
    1: one_max,
    2: leading_ones,
    3: linear,
    4: labs,
    5: ising_ring,
    6: ising_triangular,
}


def validate_dim(k: int, d: int) -> None:
    if d < 1 or d > 64:
        raise ValueError(f"bitstring length {d} outside supported range 1..64")
    if k == 6 and math.isqrt(d) ** 2 != d:
        raise ValueError(f"IsingTriangular needs a square lattice; d={d} is not a perfect square")
