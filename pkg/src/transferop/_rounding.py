"""Directed-rounding helpers.

Certified quantities are computed in double precision and then nudged in the
safe direction.  IEEE basic operations are correctly rounded, so one
``nextafter`` step past the computed value brackets the exact result; libm
transcendentals (exp, log, pow) are not always correctly rounded, so they get
two steps.  Array variants mirror the scalar ones via ``np.nextafter``.
"""

import math

import numpy as np

_INF = math.inf

# Multiplicative slack absorbing a dozen rounding steps in one go.
# Used where per-operation nudging would be noisy; 2^-48 is ~16 ulps.
SLACK = 1.0 + 2.0 ** -48
# Additive floor guarding against underflow of tiny radii.
TINY = 1e-300


def fup(x: float) -> float:
    return math.nextafter(x, _INF)


def fdown(x: float) -> float:
    return math.nextafter(x, -_INF)


def add_up(a: float, b: float) -> float:
    return fup(a + b)


def add_down(a: float, b: float) -> float:
    return fdown(a + b)


def sub_up(a: float, b: float) -> float:
    return fup(a - b)


def sub_down(a: float, b: float) -> float:
    return fdown(a - b)


def mul_up(a: float, b: float) -> float:
    return fup(a * b)


def mul_down(a: float, b: float) -> float:
    return fdown(a * b)


def div_up(a: float, b: float) -> float:
    return fup(a / b)


def div_down(a: float, b: float) -> float:
    return fdown(a / b)


def sqrt_up(x: float) -> float:
    return fup(math.sqrt(x))


def sqrt_down(x: float) -> float:
    if x <= 0.0:
        return 0.0
    return fdown(math.sqrt(x))


def log_up(x: float) -> float:
    return fup(fup(math.log(x)))


def log_down(x: float) -> float:
    return fdown(fdown(math.log(x)))


def exp_up(x: float) -> float:
    return fup(fup(math.exp(x)))


def exp_down(x: float) -> float:
    return fdown(fdown(math.exp(x)))


def pow_up(x: float, y: float) -> float:
    return fup(fup(math.pow(x, y)))


def pow_down(x: float, y: float) -> float:
    return fdown(fdown(math.pow(x, y)))


def sum_up(values) -> float:
    """Upper bound on a sum of reals, nudging after every addition."""
    total = 0.0
    for v in values:
        total = fup(total + v)
    return total


def sum_down(values) -> float:
    total = 0.0
    for v in values:
        total = fdown(total + v)
    return total


def abs_up(z: complex) -> float:
    # |z| via hypot is within 1 ulp; two steps certify the upper bound.
    return fup(fup(math.hypot(z.real, z.imag)))


def abs_down(z: complex) -> float:
    d = fdown(fdown(math.hypot(z.real, z.imag)))
    return d if d > 0.0 else 0.0


def arr_up(x: np.ndarray) -> np.ndarray:
    return np.nextafter(x, _INF)


def arr_abs_up(z: np.ndarray) -> np.ndarray:
    return np.nextafter(np.nextafter(np.abs(z), _INF), _INF)
