"""Complex circular (center-radius) arithmetic.

A ``Cdisk`` is a closed disk {z : |z - c| <= r} used as a rigorous enclosure.
Addition, multiplication, reciprocal and friends return disks that provably
contain the exact image set; float rounding of the center is folded into the
radius.  Reciprocals of disks excluding 0 are exact set images (Moebius maps
send disks to disks), up to the rounding slack.

The ``v*`` functions are the same operations on numpy arrays of centers and
radii; they are the hot path of the trace computation, where one disk per
symbolic word is processed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rounding import SLACK, TINY, abs_up, fdown, fup
from .errors import EnclosureFailureError

# Relative center-rounding allowance per composite operation (a few ulps,
# with a margin factor).
CERR = 2.0 ** -48


def _rad(raw: float, center_mag: float) -> float:
    return fup(raw * SLACK + center_mag * CERR + TINY)


@dataclass(frozen=True)
class Cdisk:
    """Closed complex disk with certified radius."""

    c: complex
    r: float = 0.0

    def __post_init__(self):
        if self.r < 0.0 or math.isnan(self.r):
            raise ValueError(f"invalid disk radius {self.r}")

    @staticmethod
    def exact(z) -> "Cdisk":
        return Cdisk(complex(z), 0.0)

    @property
    def mag_hi(self) -> float:
        return fup(abs_up(self.c) + self.r)

    @property
    def mag_lo(self) -> float:
        lo = fdown(abs(self.c) / SLACK - self.r)
        return lo if lo > 0.0 else 0.0

    def widen(self, extra: float) -> "Cdisk":
        return Cdisk(self.c, fup(self.r + extra))

    def __add__(self, other) -> "Cdisk":
        o = other if isinstance(other, Cdisk) else Cdisk.exact(other)
        c = self.c + o.c
        return Cdisk(c, _rad(self.r + o.r, abs(c)))

    __radd__ = __add__

    def __neg__(self) -> "Cdisk":
        return Cdisk(-self.c, self.r)

    def __sub__(self, other) -> "Cdisk":
        o = other if isinstance(other, Cdisk) else Cdisk.exact(other)
        return self + (-o)

    def __rsub__(self, other) -> "Cdisk":
        return Cdisk.exact(other) + (-self)

    def __mul__(self, other) -> "Cdisk":
        o = other if isinstance(other, Cdisk) else Cdisk.exact(other)
        m1 = abs(self.c) * SLACK
        m2 = abs(o.c) * SLACK
        c = self.c * o.c
        raw = m1 * o.r + m2 * self.r + self.r * o.r + m1 * m2 * CERR
        return Cdisk(c, _rad(raw, abs(c)))

    __rmul__ = __mul__

    def recip(self) -> "Cdisk":
        """Exact set image of the disk under z -> 1/z; requires 0 outside."""
        lo = self.mag_lo
        if lo <= 0.0:
            raise EnclosureFailureError(
                f"reciprocal of disk enclosing 0 (|c|={abs(self.c):.3g}, r={self.r:.3g})"
            )
        # radius uses the down-rounded denominator; the centre keeps the
        # nearest-rounded one (its drift is folded into the radius slack)
        den_lo = fdown((abs(self.c) / SLACK) ** 2 - (self.r * SLACK) ** 2)
        if den_lo <= 0.0:
            raise EnclosureFailureError("reciprocal denominator not positive")
        den = abs(self.c) ** 2 - self.r**2
        c = self.c.conjugate() / den
        raw = self.r / den_lo + abs(c) * (den / den_lo - 1.0)
        return Cdisk(c, _rad(raw, abs(c)))

    def __truediv__(self, other) -> "Cdisk":
        o = other if isinstance(other, Cdisk) else Cdisk.exact(other)
        return self * o.recip()

    def __rtruediv__(self, other) -> "Cdisk":
        return Cdisk.exact(other) * self.recip()

    def pow_int(self, k: int) -> "Cdisk":
        if k < 0:
            return self.recip().pow_int(-k)
        out = Cdisk.exact(1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def contains_point(self, z: complex) -> bool:
        return abs_up(z - self.c) <= self.r

    def contains_disk(self, other: "Cdisk") -> bool:
        return fup(abs_up(other.c - self.c) * SLACK + other.r) <= self.r


# ---------------------------------------------------------------------------
# Vectorized kit: centers are complex ndarrays, radii float ndarrays.
# Radii carry the EXACT rounding errors of the centre arithmetic (error-free
# transforms), so long word chains do not inflate enclosures artificially.
# ---------------------------------------------------------------------------

# slack for the (positive) radius arithmetic itself
_RS = 1.0 + 2.0 ** -48
# one-rounding allowance for a real division
_DIVERR = 2.0 ** -50


def _is_pow2_real(a: complex) -> bool:
    if a.imag != 0.0 or a.real == 0.0:
        return False
    mant, _ = math.frexp(abs(a.real))
    return mant == 0.5


def vexact(c: np.ndarray):
    return np.asarray(c, dtype=complex), np.zeros(np.shape(c), dtype=float)


def vadd(c1, r1, c2, r2):
    from ._eft import two_sum_arr

    s_re, e_re = two_sum_arr(np.real(c1), np.real(c2))
    s_im, e_im = two_sum_arr(np.imag(c1), np.imag(c2))
    c = s_re + 1j * s_im
    r = (r1 + r2 + np.abs(e_re) + np.abs(e_im)) * _RS + TINY
    return c, r


def vsub(c1, r1, c2, r2):
    return vadd(c1, r1, -np.asarray(c2), r2)


def vmul(c1, r1, c2, r2):
    from ._eft import two_prod_arr, two_sum_arr

    a, b = np.real(c1), np.imag(c1)
    x, y = np.real(c2), np.imag(c2)
    p_ax, e_ax = two_prod_arr(a, x)
    p_by, e_by = two_prod_arr(b, y)
    p_ay, e_ay = two_prod_arr(a, y)
    p_bx, e_bx = two_prod_arr(b, x)
    s_re, e_re = two_sum_arr(p_ax, -p_by)
    s_im, e_im = two_sum_arr(p_ay, p_bx)
    c = s_re + 1j * s_im
    exact_err = (
        np.abs(e_ax) + np.abs(e_by) + np.abs(e_re) + np.abs(e_ay) + np.abs(e_bx) + np.abs(e_im)
    )
    m1 = np.abs(c1)
    m2 = np.abs(c2)
    r = (m1 * r2 + m2 * r1 + r1 * r2 + exact_err) * _RS + TINY
    return c, r


def vscale(a: complex, c, r):
    """Multiply by an exact complex constant (power-of-two reals are free)."""
    a = complex(a)
    if _is_pow2_real(a):
        return a.real * c, np.abs(a.real) * r
    from ._eft import two_prod_arr, two_sum_arr

    if a.imag == 0.0:
        s_re, e_re = two_prod_arr(np.real(c), a.real)
        s_im, e_im = two_prod_arr(np.imag(c), a.real)
        cc = s_re + 1j * s_im
        return cc, (abs(a.real) * r + np.abs(e_re) + np.abs(e_im)) * _RS + TINY
    p_ax, e1 = two_prod_arr(np.real(c), a.real)
    p_by, e2 = two_prod_arr(np.imag(c), a.imag)
    p_ay, e3 = two_prod_arr(np.real(c), a.imag)
    p_bx, e4 = two_prod_arr(np.imag(c), a.real)
    s_re, e5 = two_sum_arr(p_ax, -p_by)
    s_im, e6 = two_sum_arr(p_ay, p_bx)
    cc = s_re + 1j * s_im
    err = np.abs(e1) + np.abs(e2) + np.abs(e3) + np.abs(e4) + np.abs(e5) + np.abs(e6)
    return cc, (abs(a) * r + err) * _RS + TINY


def vshift(b: complex, c, r):
    from ._eft import two_sum_arr

    b = complex(b)
    s_re, e_re = two_sum_arr(np.real(c), b.real)
    s_im, e_im = two_sum_arr(np.imag(c), b.imag)
    cc = s_re + 1j * s_im
    return cc, (r + np.abs(e_re) + np.abs(e_im)) * _RS + TINY


def vrecip(c, r):
    """Reciprocal disks; entries where 0 cannot be excluded come back NaN."""
    from ._eft import two_prod_arr, two_sum_arr

    a, b = np.real(c), np.imag(c)
    p_aa, e_aa = two_prod_arr(a, a)
    p_bb, e_bb = two_prod_arr(b, b)
    mag_sq, e_mag = two_sum_arr(p_aa, p_bb)
    p_rr, e_rr = two_prod_arr(r, r)
    den, e_den = two_sum_arr(mag_sq, -p_rr)
    # |fl - exact| of the denominator, from the exact per-op errors
    slop = (np.abs(e_aa) + np.abs(e_bb) + np.abs(e_mag) + np.abs(e_rr) + np.abs(e_den)) * _RS + TINY
    den_lo = den - slop
    bad = ~(den_lo > 0.0)
    den_safe = np.where(bad, 1.0, den)
    den_lo = np.where(bad, 1.0, den_lo)
    cc = np.conj(c) / den_safe
    mag_cc = np.abs(cc)
    rr = (
        r / den_lo + mag_cc * (2.0 * slop / den_lo) + mag_cc * _DIVERR
    ) * _RS + TINY
    cc = np.where(bad, np.nan + 0j, cc)
    rr = np.where(bad, np.nan, rr)
    return cc, rr


def vdiv(c1, r1, c2, r2):
    ic, ir = vrecip(c2, r2)
    return vmul(c1, r1, ic, ir)


def vmag_hi(c, r):
    return (np.abs(c) + r) * _RS + TINY


def vmag_lo(c, r):
    lo = np.abs(c) * (1.0 - 2.0 ** -50) - r
    return np.maximum(lo, 0.0)
