"""Dimensional constants of the pinching estimates."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class ConstantsTable:
    n: int
    C_n: float
    E_n: float | None
    E_5_coefficient: float | None
    thm11_factor: float
    thm12_factor_high: float
    thm12_factor_low: float
    okumura_factor: float
    thm11_lambda_coefficient: float
    thm12_lambda_coefficient: float

    def to_json(self) -> dict:
        return asdict(self)


def c_n(n: int) -> float:
    """Weyl cubic-term constant of the Einstein Laplacian estimate."""
    if n < 4:
        raise ValueError(f"C_n is defined for n >= 4, got {n}")
    if n == 4:
        return math.sqrt(6) / 4
    if n == 5:
        return 4 * math.sqrt(10) / 15
    return (n - 2) / math.sqrt(n * (n - 1)) + (n * n - n - 4) / (
        2 * math.sqrt((n - 2) * (n - 1) * n * (n + 1))
    )


def e_n(n: int) -> float:
    """Integral pinching constant; n = 5 uses its own coefficient instead."""
    if n < 4 or n == 5:
        raise ValueError(f"E_n is defined for n = 4 and n >= 6, got {n}")
    if n == 4:
        return math.sqrt(6)
    return 4 * (n - 1) / (n * (n - 2)) / c_n(n)


E5_COEFFICIENT = (2 * math.sqrt(15) - 4) / math.sqrt(10)


def constants(n: int) -> ConstantsTable:
    n = int(n)
    if n < 4:
        raise ValueError(f"constants need n >= 4, got {n}")
    return ConstantsTable(
        n=n,
        C_n=c_n(n),
        E_n=None if n == 5 else e_n(n),
        E_5_coefficient=E5_COEFFICIENT if n == 5 else None,
        thm11_factor=1 / math.sqrt(2 * (n - 1) * (n - 2)),
        thm12_factor_high=2 / (n - 2) * math.sqrt(2 * (n - 1) / (n - 2)),
        thm12_factor_low=math.sqrt((n - 1) / (2 * (n - 2))),
        okumura_factor=math.sqrt((n - 2) / (2 * (n - 1))),
        thm11_lambda_coefficient=n / (math.sqrt(8 * n) * (n - 2)),
        thm12_lambda_coefficient=math.sqrt(n) / (math.sqrt(8) * (n - 2)),
    )
