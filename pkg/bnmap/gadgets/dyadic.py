"""Dyadic rationals and correctly rounded powers of two for gadget parameters."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import mpmath

from ..config import GADGET_GUARD_BITS, GADGET_INTEGER_MARGIN_BITS
from ..errors import GadgetInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DyadicRational:
    """numerator / 2^frac_bits."""

    numerator: int
    frac_bits: int

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.frac_bits)

    def __float__(self) -> float:
        return float(self.to_fraction())


def integer_root_floor(x: int, q: int) -> int:
    """Largest r with r^q <= x (Newton iteration on integers)."""
    if x < 0 or q < 1:
        raise ValueError("integer_root_floor needs x >= 0 and q >= 1")
    if x < 2 or q == 1:
        return x
    guess = 1 << (-(-x.bit_length() // q))
    while True:
        nxt = ((q - 1) * guess + x // guess ** (q - 1)) // q
        if nxt >= guess:
            break
        guess = nxt
    while guess ** q > x:
        guess -= 1
    while (guess + 1) ** q <= x:
        guess += 1
    return guess


def integer_root_ceil(x: int, q: int) -> int:
    """Smallest r with r^q >= x."""
    r = integer_root_floor(x, q)
    return r if r ** q == x else r + 1


def dyadic_pow2_up(v: Union[Fraction, int], frac_bits: int) -> DyadicRational:
    """
    Smallest multiple of 2^-k that is >= 2^-v, computed exactly.

    With v = p/q: 2^-v * 2^k = (2^(kq - p))^(1/q), so the numerator is an
    integer q-th root rounded up.

    Args:
        v: rational exponent in [0, 2]
        frac_bits: k >= 1

    Returns:
        t with 2^-v <= t < 2^-v + 2^-k

    Raises:
        GadgetInputError: v out of range or k < 1
    """
    v = Fraction(v)
    if not 0 <= v <= 2:
        raise GadgetInputError(f"exponent {v} outside [0, 2]")
    if frac_bits < 1:
        raise GadgetInputError(f"need at least one fractional bit, got {frac_bits}")
    p, q = v.numerator, v.denominator
    exponent = frac_bits * q - p
    if exponent <= 0:
        return DyadicRational(1, frac_bits)
    return DyadicRational(integer_root_ceil(1 << exponent, q), frac_bits)


def mp_scaled_ceil(value: Callable[[], "mpmath.mpf"], frac_bits: int) -> DyadicRational:
    """Round a high-precision constant up to ``frac_bits`` fractional bits.

    ``value`` is evaluated under mpmath at frac_bits + guard bits; when the
    scaled value sits too close to an integer the precision is doubled.
    """
    prec = frac_bits + GADGET_GUARD_BITS
    for _ in range(4):
        with mpmath.workprec(prec):
            scaled = value() * mpmath.mpf(2) ** frac_bits
            nearest = mpmath.nint(scaled)
            if abs(scaled - nearest) > mpmath.mpf(2) ** (-GADGET_INTEGER_MARGIN_BITS):
                return DyadicRational(int(mpmath.ceil(scaled)), frac_bits)
        prec *= 2
        logger.debug(f"Scaled constant near an integer, retrying at {prec} bits")
    # still within the margin: only an exact integer is its own ceiling
    if scaled > nearest:
        return DyadicRational(int(nearest) + 1, frac_bits)
    return DyadicRational(int(nearest), frac_bits)


def pow2_of_pow2_up(outer_shift: int, inner_exponent: int, frac_bits: int) -> DyadicRational:
    """Round 2^(outer_shift + 2^-inner_exponent) up to ``frac_bits`` bits."""
    return mp_scaled_ceil(
        lambda: mpmath.mpf(2) ** (outer_shift + mpmath.mpf(2) ** (-inner_exponent)), frac_bits
    )


def rounding_up_window_holds(v: Union[Fraction, float], k: int) -> bool:
    """2^-v + 2^-(k+3) < 2^(-v + 2^-k)."""
    with mpmath.workprec(4 * k + 128):
        v = mpmath.mpf(Fraction(v).numerator) / Fraction(v).denominator
        two = mpmath.mpf(2)
        return bool(two ** (-v) + two ** (-(k + 3)) < two ** (-v + two ** (-k)))


def rounding_down_window_holds(v: Union[Fraction, float], k: int) -> bool:
    """2^-v - 2^-(k+4) > 2^(-v - 2^-k)."""
    with mpmath.workprec(4 * k + 128):
        v = mpmath.mpf(Fraction(v).numerator) / Fraction(v).denominator
        two = mpmath.mpf(2)
        return bool(two ** (-v) - two ** (-(k + 4)) > two ** (-v - two ** (-k)))


def log_square_margin(x: Union[Fraction, float]) -> "mpmath.mpf":
    """log2(1 + 2^(2x)) - x^4 - x - 1, non-negative on [0, 1/2]."""
    with mpmath.workprec(256):
        x = mpmath.mpf(Fraction(x).numerator) / Fraction(x).denominator
        return mpmath.log(1 + mpmath.mpf(2) ** (2 * x), 2) - x ** 4 - x - 1


def log_square_bound_holds(x: Union[Fraction, float], tolerance: float = 1e-60) -> bool:
    return bool(log_square_margin(x) >= -tolerance)


def bit_length_sum(values) -> int:
    """b = sum of ceil(log2(s + 1)) over positive integers."""
    return sum(int(s).bit_length() for s in values)
