"""Literal evaluation of the plotting formulas in exact dyadic arithmetic.

Nothing here takes the bit-test shortcut used by :mod:`tupperk.codec`: each
formula is computed term by term (floor, real-valued mod, multiplication by a
power of two) so the two paths can be checked against each other.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .codec import EncodedNumber, GridParams, ParamError
from .dyadic import Dyadic, floor_dyadic, mod_real

CLASSIC_WIDTH = 106
CLASSIC_HEIGHT = 17

HALF = Dyadic(1, -1)


class InvariantViolation(AssertionError):
    """An identity that must hold for encoded numbers was observed to fail."""


def is_painted(value: Dyadic) -> bool:
    return HALF < value


def _floor_mod2(t: Dyadic) -> Dyadic:
    return Dyadic(floor_dyadic(mod_real(t, 2)))


def bit_extract(exponents: Sequence[int]) -> bool:
    """Form the sum of ``2**e`` over distinct exponents and test ``1/2 < floor(alpha mod 2)``.

    True exactly when 0 is one of the exponents.
    """
    exponents = [int(e) for e in exponents]
    if len(set(exponents)) != len(exponents):
        raise ValueError("exponents must be pairwise distinct")
    alpha = Dyadic(0)
    for e in exponents:
        alpha = alpha + Dyadic.power_of_two(e)
    return is_painted(_floor_mod2(alpha))


def _as_point(point, n: int) -> list[Dyadic]:
    coords = [Dyadic.from_value(x) for x in point]
    if len(coords) != n:
        raise ParamError(f"point has {len(coords)} coordinates, expected {n}")
    return coords


def check_window_split(enc: EncodedNumber, xn: Dyadic, quotient: int, remainder: int) -> None:
    """Assert the quotient/remainder split of the last coordinate inside the window.

    ``quotient`` and ``remainder`` are ``floor(x_n / R)`` and ``mod(floor(x_n), R)``.
    Applies only when R divides k and ``0 <= x_n - k < A_n``.
    """
    if enc.residue:
        return
    offset = floor_dyadic(xn) - enc.k
    if not 0 <= offset < enc.params.dims[-1]:
        return
    if quotient != enc.quotient:
        raise InvariantViolation(f"floor(x_n / R) != k / R at x_n={xn}")
    if remainder != offset:
        raise InvariantViolation(f"mod(floor(x_n), R) != floor(x_n - k) at x_n={xn}")


def eval_f(params: GridParams, enc: EncodedNumber | int, point, color: int) -> Dyadic:
    """Value of the colour-``color`` formula at ``point``; always exactly 0 or 1.

    ``point`` holds absolute coordinates, so the window of interest for the
    last axis is ``k <= x_n < k + A_n``.  Points outside it are evaluated as
    written.  ``enc`` is used only to assert the window identities.
    """
    params.check_color(color)
    if not isinstance(enc, EncodedNumber):
        enc = EncodedNumber(enc, params)
    coords = _as_point(point, params.n)
    R = params.radix
    xn = coords[-1]
    # floor(x / R) == floor(floor(x) / R) for integer R, so one divmod serves both terms
    quotient, remainder = divmod(floor_dyadic(xn), R)
    check_window_split(enc, xn, quotient, remainder)

    exponent = -color - R * remainder
    for w, x in zip(params.weights, coords[:-1]):
        exponent -= w * floor_dyadic(x)
    return _floor_mod2(Dyadic(quotient).scale2(exponent))


def eval_classic(k: int, point) -> Dyadic:
    """Value of the original 106x17 monochrome formula at absolute ``point = (x, y)``.

    ``k`` plays no part in the formula itself; when it is a multiple of 17 and
    ``y`` lies in ``[k, k + 17)`` the quotient ``floor(y / 17)`` is asserted to
    equal ``k / 17``.
    """
    x, y = (Dyadic.from_value(c) for c in point)
    head = y.floordiv_int(CLASSIC_HEIGHT)
    if k % CLASSIC_HEIGHT == 0 and Dyadic(0) <= y - k < CLASSIC_HEIGHT and head != k // CLASSIC_HEIGHT:
        raise InvariantViolation(f"floor(y / 17) != k / 17 at y={y}")
    exponent = -CLASSIC_HEIGHT * floor_dyadic(x) - floor_dyadic(mod_real(Dyadic(floor_dyadic(y)), CLASSIC_HEIGHT))
    return _floor_mod2(Dyadic(head).scale2(exponent))


def classic_encode(bitmap) -> int:
    """k for a 106x17 bitmap indexed ``bitmap[x][y]`` with y counted upward."""
    bits = np.asarray(bitmap, dtype=bool)
    if bits.shape != (CLASSIC_WIDTH, CLASSIC_HEIGHT):
        raise ParamError(f"classic bitmap must be {CLASSIC_WIDTH}x{CLASSIC_HEIGHT}, got {bits.shape}")
    # bit 17*x + y; x slowest matches C order of a (106, 17) array
    flat = np.packbits(bits.reshape(-1), bitorder="little")
    return CLASSIC_HEIGHT * int.from_bytes(flat.tobytes(), "little")
