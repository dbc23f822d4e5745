"""Signed-dyadic expansion of rotation angles.

An angle is written as ``p*pi + sum_m a_m * pi / 2**m`` with ``a_m`` in
``{-1, 0, 1}`` for ``m = 1..M``.  Every nonzero digit is one exactly
decryptable ``Rz(+-pi/2**m)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameter

MAX_DYADIC_EXPONENT = 52
DYADIC_RTOL = 1e-12


@dataclass(frozen=True)
class SignedDyadicExpansion:
    p: int
    digits: tuple[int, ...]  # digits[m - 1] is a_m
    epsilon: float

    @property
    def num_digits(self) -> int:
        return len(self.digits)

    def nonzero_terms(self) -> list[tuple[int, int]]:
        """``(sign, m)`` for each nonzero digit, in increasing ``m``."""
        return [(a, m) for m, a in enumerate(self.digits, start=1) if a]

    def round_cost(self) -> int:
        """Server rounds needed to decrypt every term exactly."""
        return sum(m for _, m in self.nonzero_terms())


def num_digits_for(epsilon: float) -> int:
    return max(1, math.ceil(math.log2(math.pi / epsilon)))


def dyadic_exponent(theta: float) -> tuple[int, int] | None:
    """``(sign, m)`` when ``theta == sign * pi / 2**m`` for some ``m >= 1``."""
    if not math.isfinite(theta) or theta == 0:
        return None
    m = round(math.log2(math.pi / abs(theta)))
    if not 1 <= m <= MAX_DYADIC_EXPONENT:
        return None
    target = math.pi / 2**m
    if abs(abs(theta) - target) > DYADIC_RTOL * target:
        return None
    return (1 if theta > 0 else -1), m


def expand(theta: float, epsilon: float) -> SignedDyadicExpansion:
    """Greedy signed-digit expansion with ``|theta - reconstruct| <= epsilon``.

    ``p`` is the nearest integer to ``theta/pi`` so the residual starts in
    ``[-pi/2, pi/2]``; each digit then rounds the residual to the nearest
    multiple of ``pi/2**m`` (ties go to zero).  After step ``m`` the residual
    is at most ``pi/2**(m+1)``, so the final error is below ``epsilon/2``.
    """
    if not math.isfinite(theta):
        raise InvalidParameter(f"theta must be finite, got {theta!r}")
    if not (math.isfinite(epsilon) and 0 < epsilon <= math.pi / 2):
        raise InvalidParameter(f"epsilon must lie in (0, pi/2], got {epsilon!r}")
    big_m = num_digits_for(epsilon)
    p = round(theta / math.pi)
    residual = theta - p * math.pi
    digits = []
    for m in range(1, big_m + 1):
        step = math.pi / 2**m
        a = max(-1, min(1, round(residual / step)))
        digits.append(a)
        residual -= a * step
    return SignedDyadicExpansion(p, tuple(digits), epsilon)


def reconstruct(e: SignedDyadicExpansion) -> float:
    return e.p * math.pi + sum(a * math.pi / 2**m for m, a in enumerate(e.digits, start=1))
