"""Extended-precision oracles and small utilities shared across tests."""

from __future__ import annotations

from mpmath import mp, mpf


def k1_oracle(p: float, n: int, dps: int = 50) -> float:
    """50-digit evaluation of the first absorption constant."""
    with mp.workdps(dps):
        pp = mpf(p)
        nn = mpf(n)
        val = (
            pp / (pp + 1)
            * (8 * (4 * pp**2 + nn) / (pp * (pp + 1))) ** (1 / pp)
            * (pp * (pp - 1) / 2) ** ((pp + 1) / pp)
        )
        return float(val)


def k2_oracle(p: float, n: int, eta: float, dps: int = 50) -> float:
    """50-digit evaluation of the second absorption constant."""
    with mp.workdps(dps):
        pp = mpf(p)
        nn = mpf(n)
        ee = mpf(eta)
        val = (
            2 * pp ** ((pp + 1) / 2) * (pp + nn + ee - 1) ** ((pp + 1) / 2)
            / (pp + 1)
            * (8 * (4 * pp**2 + nn) * (pp - 1) / (pp * (pp + 1)))
            ** ((pp - 1) / 2)
        )
        return float(val)


def rel_err(value: float, reference: float) -> float:
    return abs(value - reference) / max(abs(reference), 1e-300)
