"""Certified traces via the fixed-point trace formula and determinant
Taylor coefficients with tail control.

tr(L^n) is a sum over length-n branch words: each word's composition has a
unique fixed point, and the term is the cyclic weight product divided by
det(I - phi'(z*)).  Words are enumerated lexicographically and processed as
numpy arrays of disk enclosures; words whose vectorized contraction
certificate fails are redone through the scalar ``fixed_point`` path.

Coefficients alpha_n come from the O(N^2) recursion
n alpha_n = -sum_{m<=n} tr(L^m) alpha_{n-m}, cross-checked for small n
against the exponential-series expansion over compositions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ._eft import DDComplex
from ._rounding import SLACK, TINY, exp_up, fup, log_up, mul_up
from .apriori import ExpClassBound, taylor_coeff_bound, taylor_coeff_log_bound
from .disks import Cdisk, _is_pow2_real, vadd, vmul, vrecip, vscale, vshift
from .errors import (
    BudgetExceededError,
    DivergentTailError,
    SingularMultiplierError,
    TransferOpError,
)
from .systems import (
    Affine1D,
    MapWeightSystem,
    Mobius,
    coordinate_chains,
    fixed_point,
    image_enclosure,
)

DEFAULT_WORD_BUDGET = 10**6


@dataclass(frozen=True)
class TraceValue:
    """a_n = tr(L^n)/n with a certified error radius."""

    n: int
    value: complex
    error_radius: float

    def cdisk(self) -> Cdisk:
        return Cdisk(self.value, self.error_radius)


@dataclass(frozen=True)
class DeterminantExpansion:
    """Certified Taylor data of det(I - zeta L): alpha_1..alpha_N plus a
    tail-bound function for n > N derived from the source class bound."""

    order: int
    alphas: tuple  # of Cdisk
    source_class: ExpClassBound
    traces: tuple = ()

    def __post_init__(self):
        if len(self.alphas) != self.order:
            raise ValueError("expansion needs exactly `order` coefficients")

    @property
    def d(self) -> int:
        return self.source_class.d

    def tail_bound(self, n: int) -> float:
        return taylor_coeff_bound(self.source_class, n)


# ---------------------------------------------------------------------------
# Vectorized word machinery.
# ---------------------------------------------------------------------------

def _branch_chain_matrices(system: MapWeightSystem):
    """Per-branch, per-coordinate composed Moebius matrices (floats)."""
    d = system.dim
    out = []
    for phi, _ in system.branches:
        per_coord = []
        for chain in coordinate_chains(phi, d):
            a, b, c, e = 1 + 0j, 0j, 0j, 1 + 0j
            for f in chain:
                if isinstance(f, Affine1D):
                    fa, fb, fc, fe = f.a, f.b, 0j, 1 + 0j
                else:
                    fa, fb, fc, fe = f.a, f.b, f.c, f.e
                a, b, c, e = (
                    fa * a + fb * c,
                    fa * b + fb * e,
                    fc * a + fe * c,
                    fc * b + fe * e,
                )
            per_coord.append((a, b, c, e))
        out.append(per_coord)
    return out


def _word_digits(n_branches: int, n: int):
    """Digit arrays of all length-n words in lexicographic order."""
    count = n_branches**n
    words = np.arange(count)
    return [
        (words // n_branches ** (n - 1 - p)) % n_branches for p in range(n)
    ]


def _candidate_fixed_points(system: MapWeightSystem, digits, j: int):
    """Float fixed points of every word's coordinate-j composition."""
    mats = _branch_chain_matrices(system)
    count = digits[0].shape[0]
    a = np.ones(count, dtype=complex)
    b = np.zeros(count, dtype=complex)
    c = np.zeros(count, dtype=complex)
    e = np.ones(count, dtype=complex)
    branch_mats = [m[j] for m in mats]
    A = np.array([m[0] for m in branch_mats])
    B = np.array([m[1] for m in branch_mats])
    C = np.array([m[2] for m in branch_mats])
    E = np.array([m[3] for m in branch_mats])
    for idx in digits:
        fa, fb, fc, fe = A[idx], B[idx], C[idx], E[idx]
        a, b, c, e = fa * a + fb * c, fa * b + fb * e, fc * a + fe * c, fc * b + fe * e
        scale = np.maximum.reduce([np.abs(a), np.abs(b), np.abs(c), np.abs(e)])
        scale = np.where(scale > 0, scale, 1.0)
        a, b, c, e = a / scale, b / scale, c / scale, e / scale
    det = a * e - b * c
    affine = np.abs(c) < 1e-14 * np.maximum(np.abs(a), np.abs(e))
    with np.errstate(divide="ignore", invalid="ignore"):
        z_aff = b / (e - a)
        disc = np.sqrt((e - a) ** 2 + 4.0 * c * b)
        z1 = ((a - e) + disc) / (2.0 * c)
        z2 = ((a - e) - disc) / (2.0 * c)
        d1 = np.abs(det / (c * z1 + e) ** 2)
        d2 = np.abs(det / (c * z2 + e) ** 2)
        z_mob = np.where(d1 <= d2, z1, z2)
    return np.where(affine, z_aff, z_mob)


def _apply_chain_vec(chain, cur, deriv):
    """Apply a 1-D chain to disk arrays, accumulating the derivative product."""
    c, r = cur
    dc, dr = deriv
    for f in chain:
        if isinstance(f, Affine1D):
            dc, dr = vscale(f.a, dc, dr)
            c, r = vshift(f.b, *vscale(f.a, c, r))
        else:
            det = f.a * f.e - f.b * f.c
            den_c, den_r = vshift(f.e, *vscale(f.c, c, r))
            sq_c, sq_r = vmul(den_c, den_r, den_c, den_r)
            inv_c, inv_r = vrecip(sq_c, sq_r)
            step_c, step_r = vscale(det, inv_c, inv_r)
            dc, dr = vmul(dc, dr, step_c, step_r)
            if f.c == 0:
                c, r = vshift(f.b / f.e, *vscale(f.a / f.e, c, r))
            else:
                shift = f.e / f.c
                k0 = f.a / f.c
                k1 = (f.b * f.c - f.a * f.e) / (f.c * f.c)
                ic, ir = vrecip(*vshift(shift, c, r))
                c, r = vshift(k0, *vscale(k1, ic, ir))
    return (c, r), (dc, dr)


def _poly_eval_vec(poly, disks):
    """Polynomial on per-coordinate disk arrays; Horner in one variable,
    direct monomial sum otherwise."""
    count = disks[0][0].shape[0]
    if poly.dim == 1:
        deg = max((m[0] for m in poly.coeffs), default=0)
        coeffs = [poly.coeffs.get((k,), 0j) for k in range(deg + 1)]
        acc_c = np.full(count, coeffs[-1], dtype=complex)
        acc_r = np.full(count, abs(coeffs[-1]) * 2.0 ** -52, dtype=float)
        zc, zr = disks[0]
        for coeff in reversed(coeffs[:-1]):
            acc_c, acc_r = vmul(acc_c, acc_r, zc, zr)
            acc_c, acc_r = vadd(acc_c, acc_r, np.full(count, coeff), np.zeros(count))
        return acc_c, acc_r
    acc_c = np.zeros(count, dtype=complex)
    acc_r = np.zeros(count, dtype=float)
    for mono, coeff in sorted(poly.coeffs.items()):
        t_c = np.full(count, coeff, dtype=complex)
        t_r = np.full(count, abs(coeff) * 2.0 ** -52, dtype=float)
        for (zc, zr), k in zip(disks, mono):
            for _ in range(k):
                t_c, t_r = vmul(t_c, t_r, zc, zr)
        acc_c, acc_r = vadd(acc_c, acc_r, t_c, t_r)
    return acc_c, acc_r


def _weight_eval_vec(weight, disks):
    p_c, p_r = _poly_eval_vec(weight.num, disks)
    q_c, q_r = _poly_eval_vec(weight.den, disks)
    inv_c, inv_r = vrecip(q_c, q_r)
    return vmul(p_c, p_r, inv_c, inv_r)


def _masked_chain_step(system, digits_p, coords, derivs):
    """Advance all words one branch application (position digit digits_p)."""
    d = system.dim
    for b_idx, (phi, _) in enumerate(system.branches):
        mask = digits_p == b_idx
        if not mask.any():
            continue
        chains = coordinate_chains(phi, d)
        for j in range(d):
            sub_cur = (coords[j][0][mask], coords[j][1][mask])
            sub_der = (derivs[j][0][mask], derivs[j][1][mask])
            (cc, cr), (dc, dr) = _apply_chain_vec(chains[j], sub_cur, sub_der)
            coords[j][0][mask] = cc
            coords[j][1][mask] = cr
            derivs[j][0][mask] = dc
            derivs[j][1][mask] = dr


def _masked_weight_factor(system, digits_p, coords, wprod):
    for b_idx, (_, weight) in enumerate(system.branches):
        mask = digits_p == b_idx
        if not mask.any():
            continue
        if weight.num.is_constant() and weight.den.is_constant():
            num_c = weight.num.constant_value()
            den_c = weight.den.constant_value()
            w = num_c / den_c
            if den_c == 1.0 or _is_pow2_real(den_c):
                pc, pr = vscale(w, wprod[0][mask], wprod[1][mask])
            else:
                k = int(mask.sum())
                pc, pr = vmul(
                    wprod[0][mask],
                    wprod[1][mask],
                    np.full(k, w, dtype=complex),
                    np.full(k, abs(w) * 2.0 ** -51),
                )
        else:
            disks = [
                (coords[j][0][mask], coords[j][1][mask]) for j in range(system.dim)
            ]
            wc, wr = _weight_eval_vec(weight, disks)
            pc, pr = vmul(wprod[0][mask], wprod[1][mask], wc, wr)
        wprod[0][mask] = pc
        wprod[1][mask] = pr


def _scalar_word_term(system: MapWeightSystem, word) -> Cdisk:
    """Robust per-word term through the certified scalar fixed point."""
    fp = fixed_point(word, system)
    weight_prod = Cdisk.exact(1.0)
    enc = fp.enclosure
    for idx in word:
        weight_prod = weight_prod * system.branches[idx][1].eval_disk(enc)
        enc = image_enclosure(system.branches[idx][0], enc)
    return weight_prod / fp.det_factor


def max_feasible_order(n_branches: int, word_budget: int = DEFAULT_WORD_BUDGET) -> int:
    n = 0
    while n_branches ** (n + 1) <= word_budget:
        n += 1
    return n


def ruelle_trace(
    system: MapWeightSystem, n: int, word_budget: int = DEFAULT_WORD_BUDGET
) -> TraceValue:
    """Certified a_n = tr(L^n)/n by summation over all length-n words."""
    if n < 1:
        raise ValueError("trace order must be >= 1")
    n_br = system.n_branches
    if n_br**n > word_budget:
        raise BudgetExceededError(
            f"{n_br}^{n} words exceed the budget of {word_budget}",
            max_feasible=max_feasible_order(n_br, word_budget),
        )
    count = n_br**n
    d = system.dim
    digits = _word_digits(n_br, n)

    # float candidates, then one vectorized contraction certificate
    cand = [_candidate_fixed_points(system, digits, j) for j in range(d)]
    delta = [1e-13 * np.maximum(1.0, np.abs(z)) for z in cand]
    ok = np.zeros(count, dtype=bool)
    term_c = np.zeros(count, dtype=complex)
    term_r = np.zeros(count, dtype=float)

    for attempt_scale in (1.0, 300.0):
        todo = ~ok
        if not todo.any():
            break
        coords = [
            [cand[j].copy(), delta[j] * attempt_scale] for j in range(d)
        ]
        derivs = [
            [np.ones(count, dtype=complex), np.zeros(count, dtype=float)]
            for _ in range(d)
        ]
        wprod = [np.ones(count, dtype=complex), np.zeros(count, dtype=float)]
        for p in range(n):
            _masked_weight_factor(system, digits[p], coords, wprod)
            _masked_chain_step(system, digits[p], coords, derivs)
        good = todo.copy()
        det_c = np.ones(count, dtype=complex)
        det_r = np.zeros(count, dtype=float)
        for j in range(d):
            drift = np.abs(coords[j][0] - cand[j]) + coords[j][1]
            contained = drift <= delta[j] * attempt_scale
            deriv_hi = (np.abs(derivs[j][0]) + derivs[j][1]) * SLACK
            good &= contained & (deriv_hi < 1.0) & np.isfinite(drift)
            one_minus_c, one_minus_r = vadd(
                np.ones(count, dtype=complex), np.zeros(count), -derivs[j][0], derivs[j][1]
            )
            det_c, det_r = vmul(det_c, det_r, one_minus_c, one_minus_r)
        det_lo = np.abs(det_c) / SLACK - det_r
        good &= det_lo > 0.0
        inv_c, inv_r = vrecip(det_c, det_r)
        tc, tr = vmul(wprod[0], wprod[1], inv_c, inv_r)
        newly = good & np.isfinite(tr)
        term_c[newly] = tc[newly]
        term_r[newly] = tr[newly]
        ok |= newly

    for w_idx in np.nonzero(~ok)[0]:
        word = tuple(int(digits[p][w_idx]) for p in range(n))
        try:
            term = _scalar_word_term(system, word)
        except TransferOpError as exc:
            raise type(exc)(f"word {word}: {exc}") from exc
        term_c[w_idx] = term.c
        term_r[w_idx] = term.r

    # exact (correctly rounded) summation in the fixed lexicographic order
    total_c = complex(math.fsum(term_c.real), math.fsum(term_c.imag))
    total_r = math.fsum(term_r) * SLACK + abs(total_c) * 2.0 ** -51
    value = total_c / n
    radius = fup(total_r / n * SLACK + abs(value) * 2.0 ** -51 + TINY)
    return TraceValue(n, value, radius)


# ---------------------------------------------------------------------------
# Coefficients, tails, evaluation.
# ---------------------------------------------------------------------------

def det_coefficients_reference(traces: Sequence[TraceValue]):
    """Coefficients via the exponential-series expansion over ordered
    compositions of n (exponential cost; cross-check route)."""
    by_n = {t.n: t.value for t in traces}
    n_max = max(by_n)
    alphas = []
    for n in range(1, n_max + 1):
        total = 0j
        stack = [((), n)]
        parts_list = []
        while stack:
            prefix, rem = stack.pop()
            if rem == 0:
                parts_list.append(prefix)
                continue
            for piece in range(1, rem + 1):
                stack.append((prefix + (piece,), rem - piece))
        for comp in parts_list:
            j = len(comp)
            prod = 1.0 + 0j
            for piece in comp:
                prod *= by_n[piece]
            total += (-1.0) ** j / math.factorial(j) * prod
        alphas.append(total)
    return alphas


def det_coefficients(
    traces: Sequence[TraceValue], source_class: ExpClassBound
) -> DeterminantExpansion:
    """Determinant coefficients alpha_1..alpha_N from traces a_1..a_N.

    The quadratic recursion cancels catastrophically (terms of size tr(L^m)
    produce coefficients that decay superexponentially), so centres are
    carried in double-double precision; radii propagate first-order interval
    errors plus the double-double truncation residue.  The composition
    expansion re-derives the first few coefficients as a self-check.
    """
    traces = sorted(traces, key=lambda t: t.n)
    if [t.n for t in traces] != list(range(1, len(traces) + 1)):
        raise ValueError("traces must cover n = 1..N without gaps")
    order = len(traces)
    tr_dd = [DDComplex.from_complex(t.value).scale(float(t.n)) for t in traces]
    tr_err = [t.error_radius * t.n for t in traces]
    tr_abs = [t.cdisk().mag_hi * t.n for t in traces]
    dd = [DDComplex.from_complex(1.0 + 0j)]
    radii = [0.0]
    alphas = [Cdisk.exact(1.0)]
    for n in range(1, order + 1):
        acc = DDComplex()
        err = 0.0
        residue = 0.0
        for m in range(1, n + 1):
            term = tr_dd[m - 1].mul(dd[n - m])
            acc = acc.add(term)
            err += (
                tr_abs[m - 1] * radii[n - m]
                + tr_err[m - 1] * (dd[n - m].abs_up() + radii[n - m])
            )
            residue += term.abs_up()
        acc = acc.scale(-1.0 / n)
        err = (err / n) * (1.0 + 2.0 ** -48)
        # double-double truncation plus the final rounding to a single complex
        err += (residue / n) * 2.0 ** -96 + acc.abs_up() * 2.0 ** -51 + TINY
        centre = acc.to_complex()
        dd.append(acc)
        radii.append(err)
        alphas.append(Cdisk(centre, fup(err)))

    for n, ref in zip(
        range(1, min(order, 8) + 1), det_coefficients_reference(traces[: min(order, 8)])
    ):
        got = alphas[n].c
        scale = max(abs(ref), abs(got), 1e-30)
        if abs(got - ref) > 1e-9 * scale + 10.0 * alphas[n].r + 1e-13:
            raise TransferOpError(
                f"coefficient self-check failed at n={n}: {got} vs {ref}"
            )
    return DeterminantExpansion(
        order=order,
        alphas=tuple(alphas[1:]),
        source_class=source_class,
        traces=tuple(traces),
    )


def tail_sum(expansion: DeterminantExpansion, R: float) -> float:
    """Certified upper bound on sum_{n>N} tail_bound(n) R^n.

    Terms are accumulated until their ratio drops below 1/2 (the log-bound is
    concave in n, so later ratios only shrink); a doubled geometric tail
    closes the sum.  Returns inf when no such drop occurs within 10^4 terms.
    """
    if not R > 0.0:
        raise ValueError("R must be positive")
    cls = expansion.source_class
    log_R = log_up(R)

    def term(n: int) -> float:
        lg = taylor_coeff_log_bound(cls, n)
        if lg == -math.inf:
            return 0.0
        lg = fup(lg + mul_up(float(n), log_R))
        return math.inf if lg > 709.0 else exp_up(lg)

    total = 0.0
    prev = None
    for i in range(10**4):
        n = expansion.order + 1 + i
        t = term(n)
        if t == 0.0:
            return fup(total)
        if prev is not None and t < 0.5 * prev:
            return fup(total + 2.0 * t)
        total = fup(total + t)
        prev = t
    return math.inf


def det_eval(expansion: DeterminantExpansion, zeta: complex) -> Cdisk:
    """Certified enclosure of det(I - zeta L) at a point."""
    R = fup(abs(zeta) * SLACK)
    tail = 0.0
    if R > 0.0:
        tail = tail_sum(expansion, R)
        if math.isinf(tail):
            raise DivergentTailError(
                f"tail bound diverges at |zeta|={R}; increase the order"
            )
    acc = Cdisk.exact(0.0)
    for alpha in reversed(expansion.alphas):
        acc = acc * zeta + alpha
    acc = acc * zeta + Cdisk.exact(1.0)
    return acc.widen(tail)
