"""Error-free transforms: exact rounding errors of float operations.

TwoSum and TwoProd recover the exact error of an addition or multiplication,
so enclosure radii can carry the true rounding instead of a blanket per-op
allowance.  Array versions mirror the scalar ones.  A small double-double
layer (value split across two floats, ~106 bits) backs the coefficient
recursion, where catastrophic cancellation otherwise sets a 1e-16 absolute
noise floor.
"""

from __future__ import annotations

import math

import numpy as np

_SPLITTER = 134217729.0  # 2^27 + 1

_HAVE_FMA = hasattr(math, "fma")


def two_sum(a: float, b: float):
    """s = fl(a+b) and the exact error e with a + b = s + e."""
    s = a + b
    bv = s - a
    e = (a - (s - bv)) + (b - bv)
    return s, e


def quick_two_sum(a: float, b: float):
    """TwoSum requiring |a| >= |b|."""
    s = a + b
    e = b - (s - a)
    return s, e


def _split(a: float):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a: float, b: float):
    """p = fl(a*b) and the exact error e with a*b = p + e."""
    p = a * b
    if _HAVE_FMA:
        return p, math.fma(a, b, -p)
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def two_sum_arr(a, b):
    s = a + b
    bv = s - a
    e = (a - (s - bv)) + (b - bv)
    return s, e


def two_prod_arr(a, b):
    p = a * b
    c = _SPLITTER * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLITTER * b
    bh = c - (c - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


# ---------------------------------------------------------------------------
# Double-double reals (unevaluated hi + lo sums).
# ---------------------------------------------------------------------------

def dd_add(xh: float, xl: float, yh: float, yl: float):
    s, e = two_sum(xh, yh)
    e += xl + yl
    return quick_two_sum(s, e)


def dd_mul(xh: float, xl: float, yh: float, yl: float):
    p, e = two_prod(xh, yh)
    e += xh * yl + xl * yh
    return quick_two_sum(p, e)


def dd_scale(xh: float, xl: float, s: float):
    p, e = two_prod(xh, s)
    e += xl * s
    return quick_two_sum(p, e)


class DDComplex:
    """Complex number with double-double components (recursion workhorse)."""

    __slots__ = ("rh", "rl", "ih", "il")

    def __init__(self, rh=0.0, rl=0.0, ih=0.0, il=0.0):
        self.rh, self.rl, self.ih, self.il = rh, rl, ih, il

    @staticmethod
    def from_complex(z: complex) -> "DDComplex":
        return DDComplex(z.real, 0.0, z.imag, 0.0)

    def to_complex(self) -> complex:
        return complex(self.rh + self.rl, self.ih + self.il)

    def add(self, o: "DDComplex") -> "DDComplex":
        rh, rl = dd_add(self.rh, self.rl, o.rh, o.rl)
        ih, il = dd_add(self.ih, self.il, o.ih, o.il)
        return DDComplex(rh, rl, ih, il)

    def mul(self, o: "DDComplex") -> "DDComplex":
        ac = dd_mul(self.rh, self.rl, o.rh, o.rl)
        bd = dd_mul(self.ih, self.il, o.ih, o.il)
        ad = dd_mul(self.rh, self.rl, o.ih, o.il)
        bc = dd_mul(self.ih, self.il, o.rh, o.rl)
        rh, rl = dd_add(ac[0], ac[1], -bd[0], -bd[1])
        ih, il = dd_add(ad[0], ad[1], bc[0], bc[1])
        return DDComplex(rh, rl, ih, il)

    def scale(self, s: float) -> "DDComplex":
        rh, rl = dd_scale(self.rh, self.rl, s)
        ih, il = dd_scale(self.ih, self.il, s)
        return DDComplex(rh, rl, ih, il)

    def abs_up(self) -> float:
        return math.hypot(abs(self.rh) + abs(self.rl), abs(self.ih) + abs(self.il)) * (
            1.0 + 1e-15
        )
