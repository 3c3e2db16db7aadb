"""A posteriori eigenvalue certification.

Approximate zeros of the truncated determinant come from a companion-matrix
solve plus Newton polishing; small circles around zero clusters are then
certified by the classical comparison: if the truncation error (certified
tail plus coefficient error radii) stays strictly below min |Delta_N| on the
circle, the circle contains exactly as many true determinant zeros as
approximate ones, and the reciprocal disk encloses that many eigenvalues.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._rounding import SLACK, fdown, fup, log_up, mul_up, sum_up
from .disks import Cdisk
from .determinant import DeterminantExpansion, tail_sum
from .errors import ConfigurationError, EnclosureFailureError

CLUSTER_RELATIVE_GAP = 1e-6
EPSILON_FLOOR = 1e-12


@dataclass(frozen=True)
class CertifiedEigenvalue:
    """Disk certified to contain exactly `multiplicity` eigenvalues.

    ``zero_center``/``zero_radius`` describe the determinant-zero disk in the
    zeta plane; ``eigenvalue_disk`` is its rigorous inversion when available.
    On failure ``certified`` is False and ``failed_inequality`` carries the
    two sides of the comparison that fell short.
    """

    zero_center: complex
    zero_radius: float
    multiplicity: int
    eigenvalue_disk: Optional[Cdisk]
    certified: bool
    failed_inequality: Optional[Tuple[float, float]] = None

    def as_dict(self):
        out = {
            "center": [self.eigenvalue_disk.c.real, self.eigenvalue_disk.c.imag]
            if self.eigenvalue_disk
            else None,
            "radius": self.eigenvalue_disk.r if self.eigenvalue_disk else None,
            "zero_center": [self.zero_center.real, self.zero_center.imag],
            "zero_radius": self.zero_radius,
            "multiplicity": self.multiplicity,
            "certified": self.certified,
        }
        if self.failed_inequality is not None:
            out["failed_inequality"] = {
                "lhs": self.failed_inequality[0],
                "rhs": self.failed_inequality[1],
            }
        return out


@dataclass(frozen=True)
class ZeroCluster:
    center: complex
    spread: float
    members: tuple

    @property
    def multiplicity(self) -> int:
        return len(self.members)


def _poly_coefficients(expansion: DeterminantExpansion) -> List[complex]:
    """Ascending coefficients [1, alpha_1, .., alpha_N] (interval centres)."""
    return [1.0 + 0j] + [a.c for a in expansion.alphas]


def poly_roots(expansion: DeterminantExpansion) -> List[complex]:
    """Approximate zeros of Delta_N, modulus-ascending (ties by argument).

    Negligible leading coefficients are stripped first; an identically
    constant polynomial has no roots and yields an empty list.
    """
    coeffs = _poly_coefficients(expansion)
    scale = max(abs(c) for c in coeffs)
    while coeffs and abs(coeffs[-1]) <= 1e-300 * max(scale, 1.0):
        coeffs.pop()
    if len(coeffs) <= 1:
        return []
    roots = np.roots(list(reversed(coeffs)))
    poly_desc = np.array(list(reversed(coeffs)))
    deriv_desc = np.polyder(poly_desc)
    for _ in range(6):
        vals = np.polyval(poly_desc, roots)
        ders = np.polyval(deriv_desc, roots)
        step = np.where(np.abs(ders) > 1e-300, vals / ders, 0.0)
        nxt = roots - step
        ok = np.isfinite(nxt)
        roots = np.where(ok, nxt, roots)
    ordered = sorted(
        (complex(z) for z in roots), key=lambda z: (abs(z), cmath.phase(z))
    )
    return ordered


def min_modulus_on_circle(
    coeffs: Sequence[complex], center: complex, radius: float
) -> float:
    """Certified lower bound on min |p| over the circle |z - center| = radius.

    Adaptive arc subdivision with disk-arithmetic evaluation; arcs are split
    until the enclosure is slim relative to its centre value.  Returns 0 when
    the bound collapses within the subdivision budget.
    """
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    coeffs = [complex(c) for c in coeffs]

    def eval_disk(x: Cdisk) -> Cdisk:
        acc = Cdisk.exact(coeffs[-1])
        for c in reversed(coeffs[:-1]):
            acc = acc * x + Cdisk(c, abs(c) * 2.0 ** -52)
        return acc

    best = math.inf
    work = [(0.0, 2.0 * math.pi)]
    budget = 40_000
    while work:
        lo, hi = work.pop()
        mid = 0.5 * (lo + hi)
        span = hi - lo
        pt = center + radius * complex(math.cos(mid), math.sin(mid))
        arc_r = fup(radius * 2.0 * math.sin(span / 4.0) * SLACK + abs(pt) * 2.0 ** -50)
        val = eval_disk(Cdisk(pt, arc_r))
        val_lo = val.mag_lo
        if val.r <= 0.04 * abs(val.c) or span < 1e-9:
            best = min(best, val_lo)
            if best <= 0.0:
                return 0.0
            continue
        budget -= 1
        if budget <= 0:
            return 0.0
        work.append((lo, mid))
        work.append((mid, hi))
    return max(0.0, fdown(best))


def _coefficient_error_on_circle(expansion: DeterminantExpansion, R: float) -> float:
    """Upper bound on sum err(alpha_n) R^n, the interval part of Delta_N."""
    total = 0.0
    p = 1.0
    for alpha in expansion.alphas:
        p = mul_up(p, R)
        total = fup(total + mul_up(alpha.r, p))
    return total


def rouche_certify(
    expansion: DeterminantExpansion, cluster: ZeroCluster, radius: float
) -> CertifiedEigenvalue:
    """Certify that the circle around a zero cluster traps its zeros of the
    true determinant (counting multiplicity).

    The circle must isolate exactly the cluster's approximate zeros.  The
    comparison requires certified tail + coefficient errors < min |Delta_N|
    on the circle.
    """
    roots = poly_roots(expansion)
    inside = [z for z in roots if abs(z - cluster.center) <= radius]
    if len(inside) != cluster.multiplicity:
        raise ConfigurationError(
            f"circle of radius {radius} encloses {len(inside)} approximate "
            f"zeros, expected {cluster.multiplicity}"
        )
    R = fup((abs(cluster.center) + radius) * SLACK)
    lhs = fup(
        tail_sum(expansion, R) + _coefficient_error_on_circle(expansion, R)
    )
    rhs = min_modulus_on_circle(
        _poly_coefficients(expansion), cluster.center, radius
    )
    certified = math.isfinite(lhs) and lhs < rhs
    eig_disk = None
    try:
        eig_disk = Cdisk(cluster.center, radius).recip()
    except EnclosureFailureError:
        certified = False
    return CertifiedEigenvalue(
        zero_center=cluster.center,
        zero_radius=radius,
        multiplicity=cluster.multiplicity,
        eigenvalue_disk=eig_disk,
        certified=certified,
        failed_inequality=None if certified else (lhs, rhs),
    )


def cluster_roots(roots: Sequence[complex]) -> List[ZeroCluster]:
    """Group approximate zeros closer than 1e-6 relative, modulus-ascending."""
    clusters: List[List[complex]] = []
    for z in sorted(roots, key=lambda z: (abs(z), cmath.phase(z))):
        placed = False
        for group in clusters:
            ref = group[0]
            if abs(z - ref) <= CLUSTER_RELATIVE_GAP * max(abs(ref), abs(z), 1.0):
                group.append(z)
                placed = True
                break
        if not placed:
            clusters.append([z])
    out = []
    for group in clusters:
        centre = sum(group) / len(group)
        spread = max((abs(z - centre) for z in group), default=0.0)
        out.append(ZeroCluster(centre, spread, tuple(group)))
    out.sort(key=lambda cl: (abs(cl.center), cmath.phase(cl.center)))
    return out


def certify_leading(
    expansion: DeterminantExpansion, k: int, system=None
) -> List[CertifiedEigenvalue]:
    """Certify the k smallest-modulus zero clusters of Delta_N.

    Radii grow geometrically from 1e-12 until certification succeeds or the
    circle would stop isolating the cluster; uncertified clusters are
    returned with the failed inequality (partial results, not an error).
    The ``system`` argument is accepted for pipeline symmetry; certification
    uses only the expansion.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return []
    roots = poly_roots(expansion)
    clusters = cluster_roots(roots)[:k]
    results = []
    for cl in clusters:
        foreign = [z for z in roots if z not in cl.members]
        max_eps = min(
            (abs(z - cl.center) for z in foreign), default=math.inf
        ) * 0.45
        eps = max(EPSILON_FLOOR, cl.spread * 4.0 + EPSILON_FLOOR)
        attempt: Optional[CertifiedEigenvalue] = None
        while eps <= max_eps:
            try:
                attempt = rouche_certify(expansion, cl, eps)
            except ConfigurationError:
                break
            if attempt.certified:
                break
            eps *= 2.0
        if attempt is None:
            attempt = CertifiedEigenvalue(
                zero_center=cl.center,
                zero_radius=0.0,
                multiplicity=cl.multiplicity,
                eigenvalue_disk=None,
                certified=False,
                failed_inequality=(math.inf, 0.0),
            )
        results.append(attempt)
    return results
