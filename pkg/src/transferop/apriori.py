"""Explicit a priori bounds: embedding singular values, exponential-class
algebra, transfer-operator norm and class bounds, eigenvalue tails.

All emitted constants are directed-rounded in the safe direction: decay
exponents round down, gauges and norms round up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from ._rounding import (
    div_down,
    div_up,
    exp_up,
    fdown,
    fup,
    log_down,
    log_up,
    mul_down,
    mul_up,
    pow_down,
    pow_up,
    sqrt_up,
    sum_up,
)
from .errors import (
    ConfigurationError,
    DegenerateScalingError,
    DimensionMismatchError,
    NotCompactlyContainedError,
    UnsupportedDomainError,
)
from .geometry import (
    ComplexDisk,
    Domain,
    EfficiencySummary,
    FiniteUnion,
    Polydisc,
    RelativeCover,
    auto_cover,
    cover_efficiency,
    dist_lower_bound,
    is_strictly_circled,
    scale_domain,
    volume_upper,
)
from .systems import (
    Cdisk,
    DiskEnclosure,
    MapWeightSystem,
    branch_image_hull,
    domain_enclosure,
    image_enclosure,
    weight_sup_bound,
)


@dataclass(frozen=True)
class ExpClassBound:
    """Certificate s_n <= gauge * exp(-c * n^(1/d)) for all n >= 1."""

    d: int
    c: float
    gauge: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if not self.c > 0.0 or self.gauge < 0.0:
            raise ValueError(f"invalid class bound (c={self.c}, gauge={self.gauge})")

    @property
    def alpha(self) -> float:
        return 1.0 / self.d

    def singular_bound(self, n: int) -> float:
        return mul_up(self.gauge, exp_up(-mul_down(self.c, pow_down(float(n), self.alpha))))


@dataclass(frozen=True)
class EigenvalueTailBound:
    """Certificate |lambda_n| <= B * exp(-b * n^(1/d)) for all n >= 1."""

    d: int
    b: float
    B: float

    def bound(self, n: int) -> float:
        return mul_up(self.B, exp_up(-mul_down(self.b, pow_down(float(n), 1.0 / self.d))))


def embedding_singular_value(d: int, gamma: float, n: int) -> float:
    """n-th singular value of the scaling embedding: gamma^-(k+d) on the
    binomial bracket C(k+d-1, d) < n <= C(k+d, d)."""
    if gamma <= 1.0:
        raise DegenerateScalingError(f"gamma must exceed 1, got {gamma}")
    if n < 1:
        raise ValueError("n must be >= 1")
    k = 0
    while math.comb(k + d, d) < n:
        k += 1
    return gamma ** -(k + d)


def embedding_class(d: int, gamma: float) -> ExpClassBound:
    """Exponential class of the scaling embedding: c = (d!)^(1/d) log gamma,
    gauge = gamma^((1-d)/2)."""
    if gamma <= 1.0:
        raise DegenerateScalingError(f"gamma must exceed 1, got {gamma}")
    c = mul_down(pow_down(float(math.factorial(d)), 1.0 / d), log_down(gamma))
    gauge = pow_up(gamma, (1.0 - d) / 2.0) if d > 1 else 1.0
    return ExpClassBound(d, c, gauge)


def identification_class(cover: RelativeCover) -> ExpClassBound:
    """Class bound for the identification operator from a validated cover:
    c = ||Gamma||_d, gauge = N exp(-((d-1)/2) min Gamma)."""
    if not cover.validated:
        raise ConfigurationError("cover must be validated first")
    eff = cover_efficiency(cover)
    gauge = mul_up(
        float(eff.N), exp_up(-mul_down((eff.d - 1) / 2.0, eff.min_Gamma))
    )
    return ExpClassBound(eff.d, eff.c, gauge)


def _branch_distances(system: MapWeightSystem, omega_tilde: Domain):
    """Per-branch certified lower bounds r_i = dist(phi_i(Omega), bdry tilde)."""
    rs = []
    for phi, _ in system.branches:
        r = min(
            dist_lower_bound(
                image_enclosure(phi, domain_enclosure(member)).as_domain(),
                omega_tilde,
            )
            for member in system.domain_members()
        )
        rs.append(r)
    return rs


def transfer_norm_bound(
    system: MapWeightSystem, omega_tilde: Domain, quadrature: bool = False
) -> float:
    """Certified upper bound on || sum_i |w_i| r_i^{-d} ||_{L2(Omega)}.

    Default route: (sum_i sup|w_i| r_i^{-d}) * sqrt(V(Omega)).  With
    ``quadrature`` and a disk domain, a polar-cell refinement of the L2
    integral is also computed and the smaller certified bound returned.
    """
    d = system.dim
    rs = _branch_distances(system, omega_tilde)
    if any(r <= 0.0 for r in rs):
        bad = rs.index(min(rs))
        raise NotCompactlyContainedError(
            f"branch {bad} image has no certified margin inside omega_tilde"
        )
    sups = [weight_sup_bound(w, system.domain) for _, w in system.branches]
    if all(s == 0.0 for s in sups):
        return 0.0
    coarse_sup = sum_up(
        mul_up(s, div_up(1.0, pow_down(r, d))) for s, r in zip(sups, rs)
    )
    coarse = mul_up(coarse_sup, sqrt_up(volume_upper(system.domain)))
    if quadrature and isinstance(system.domain, ComplexDisk):
        refined = _quadrature_l2_bound(system, rs)
        if refined is not None and refined < coarse:
            return refined
    return coarse


def _quadrature_l2_bound(system: MapWeightSystem, rs) -> Optional[float]:
    """Certified polar-cell bound on the L2 norm over a disk domain."""
    dom: ComplexDisk = system.domain
    n_rad, n_ang = 12, 24
    total = 0.0
    for ir in range(n_rad):
        r0 = dom.radius * ir / n_rad
        r1 = dom.radius * (ir + 1) / n_rad
        for ia in range(n_ang):
            t0 = 2.0 * math.pi * ia / n_ang
            t1 = 2.0 * math.pi * (ia + 1) / n_ang
            tm = 0.5 * (t0 + t1)
            # disk covering the polar cell
            centre = dom.center + 0.5 * (r0 + r1) * complex(math.cos(tm), math.sin(tm))
            half_span = 0.5 * (r1 - r0) + r1 * (t1 - t0) / 2.0
            cell = Cdisk(centre, fup(half_span * 1.01))
            cell_enc = DiskEnclosure((cell.c,), (cell.r,))
            try:
                f_hi = sum_up(
                    mul_up(
                        w.eval_disk(cell_enc).mag_hi,
                        div_up(1.0, pow_down(r, system.dim)),
                    )
                    for (_, w), r in zip(system.branches, rs)
                )
            except Exception:
                return None
            # normalised cell measure: (t1-t0)(r1^2-r0^2)/(2 pi)
            v_cell = fup((t1 - t0) * (r1 * r1 - r0 * r0) / (2.0 * math.pi))
            total = fup(total + mul_up(mul_up(f_hi, f_hi), v_cell))
    return sqrt_up(total)


def tilde_domain(system: MapWeightSystem, t: float) -> Domain:
    """Intermediate domain Omega(t): the system domain scaled by t in (0,1)."""
    if not 0.0 < t < 1.0:
        raise ConfigurationError(f"tilde parameter must lie in (0,1), got {t}")
    if not is_strictly_circled(system.domain):
        raise UnsupportedDomainError(
            "tilde scaling needs a strictly circled system domain"
        )
    return scale_domain(system.domain, t)


def hull_scale_lower(system: MapWeightSystem) -> float:
    """Smallest scale s with the branch-image hull inside Omega(s), rounded up.

    Valid tilde parameters are (that scale, 1); below it the sandwich fails.
    """
    hull = branch_image_hull(system)
    dom = system.domain
    scales = []
    for enc in hull.enclosures:
        if isinstance(dom, ComplexDisk):
            reach = fup(fup(abs(enc.centers[0] - dom.center)) + enc.radii[0])
            scales.append(div_up(reach, dom.radius))
        elif isinstance(dom, Polydisc):
            for j in range(dom.dim):
                reach = fup(fup(abs(enc.centers[j] - dom.centers[j])) + enc.radii[j])
                scales.append(div_up(reach, dom.radii[j]))
        else:
            # ball: Euclidean reach of the per-coordinate enclosure
            s = sum_up(
                fup(fup(abs(c - oc)) + r) ** 2
                for c, r, oc in zip(enc.centers, enc.radii, dom.center)
            )
            scales.append(div_up(sqrt_up(s), dom.radius))
    return max(scales)


def transfer_class(
    system: MapWeightSystem,
    omega_tilde: Domain,
    cover: RelativeCover,
    quadrature: bool = False,
) -> ExpClassBound:
    """Exponential-class bound for the transfer operator.

    Requires the certified sandwich: branch images inside omega_tilde inside
    Omega, with the validated cover targeting (Omega, omega_tilde).
    """
    hull = branch_image_hull(system)
    if dist_lower_bound(hull.as_domain(), omega_tilde) <= 0.0:
        raise ConfigurationError(
            "sandwich violated: branch-image hull not inside omega_tilde"
        )
    if dist_lower_bound(omega_tilde, system.domain) <= 0.0:
        raise ConfigurationError(
            "sandwich violated: omega_tilde not compactly contained in the domain"
        )
    if not cover.validated:
        raise ConfigurationError("cover must be validated")
    if cover.omega1 != system.domain or cover.omega2 != omega_tilde:
        raise ConfigurationError(
            "cover targets do not match (domain, omega_tilde)"
        )
    ident = identification_class(cover)
    norm = transfer_norm_bound(system, omega_tilde, quadrature=quadrature)
    return ExpClassBound(ident.d, ident.c, mul_up(ident.gauge, norm))


def eigenvalue_bound(cls: ExpClassBound) -> EigenvalueTailBound:
    """Weyl step: |lambda_n| <= gauge exp(-(d c/(1+d)) n^(1/d))."""
    b = div_down(mul_down(float(cls.d), cls.c), float(1 + cls.d))
    return EigenvalueTailBound(cls.d, b, cls.gauge)


def class_sum(parts: Sequence[ExpClassBound]) -> ExpClassBound:
    """Class of a sum of operators: c' = (sum c_n^{-d})^{-1/d}, gauge' = N max."""
    parts = list(parts)
    if not parts:
        raise ValueError("class_sum needs at least one part")
    d = parts[0].d
    if any(p.d != d for p in parts):
        raise DimensionMismatchError("class_sum parts must share dimension")
    if len(parts) == 1:
        return parts[0]
    s_up = sum_up(div_up(1.0, pow_down(p.c, d)) for p in parts)
    c = div_down(1.0, pow_up(s_up, 1.0 / d))
    gauge = mul_up(float(len(parts)), max(p.gauge for p in parts))
    return ExpClassBound(d, c, gauge)


def class_compose(left_norm: float, cls: ExpClassBound, right_norm: float) -> ExpClassBound:
    """Class of A B C with ||A|| <= left_norm, ||C|| <= right_norm."""
    if left_norm < 0.0 or right_norm < 0.0:
        raise ValueError("operator norms must be non-negative")
    return ExpClassBound(cls.d, cls.c, mul_up(mul_up(left_norm, cls.gauge), right_norm))


def taylor_coeff_log_bound(cls: ExpClassBound, n: int) -> float:
    """log of the certified bound on |alpha_n|, rounded up."""
    d, c = cls.d, cls.c
    x = float(n)
    main = -mul_down(mul_down(d / (d + 1.0), c), pow_down(x, 1.0 + 1.0 / d))
    corr = sum_up(
        mul_up(
            math.factorial(d) / math.factorial(d - i),
            div_up(pow_up(x, 1.0 - i / d), pow_down(c, i)),
        )
        for i in range(d + 1)
    )
    if cls.gauge == 0.0:
        return -math.inf
    return fup(fup(main + corr) + mul_up(x, log_up(cls.gauge)))


def taylor_coeff_bound(cls: ExpClassBound, n: int) -> float:
    """Certified bound on the n-th determinant Taylor coefficient:
    gauge^n exp(-(d/(d+1)) c n^{1+1/d} + sum_i (d!/(d-i)!) n^{1-i/d} / c^i)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lg = taylor_coeff_log_bound(cls, n)
    if lg == -math.inf:
        return 0.0
    if lg > 709.0:
        return math.inf
    return exp_up(lg)


def zero_count_bound(K: float, d: int, r: float) -> float:
    """Zero-count bound K (1+d)^{1+d} / d^d (log r)^d, given the integrated
    count satisfies N(r) <= K (log r)^{1+d}."""
    if r <= 1.0:
        raise ValueError(f"radius must exceed 1, got {r}")
    if K < 0.0:
        raise ValueError("K must be non-negative")
    factor = mul_up((1.0 + d) ** (1 + d) / float(d**d), pow_up(log_up(r), d))
    return mul_up(K, factor)


# ---------------------------------------------------------------------------
# Pipeline helper: certified class for a system at a given tilde parameter.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineBound:
    """One certified end-to-end bound evaluation at a tilde parameter t."""

    t: float
    omega_tilde: Domain
    cover: RelativeCover
    efficiency: EfficiencySummary
    norm: float
    cls: ExpClassBound
    tail: EigenvalueTailBound


def pipeline_class(
    system: MapWeightSystem,
    t: float,
    granularity: int = 1,
    quadrature: bool = False,
) -> PipelineBound:
    """Full a priori chain: tilde domain, auto cover, class, eigenvalue tail."""
    omega_tilde = tilde_domain(system, t)
    hull = branch_image_hull(system)
    if dist_lower_bound(hull.as_domain(), omega_tilde) <= 0.0:
        raise ConfigurationError(
            f"t={t} too small: branch-image hull not inside the scaled domain"
        )
    cover = auto_cover(system.domain, omega_tilde, granularity)
    cls = transfer_class(system, omega_tilde, cover, quadrature=quadrature)
    return PipelineBound(
        t=t,
        omega_tilde=omega_tilde,
        cover=cover,
        efficiency=cover_efficiency(cover),
        norm=transfer_norm_bound(system, omega_tilde, quadrature=quadrature),
        cls=cls,
        tail=eigenvalue_bound(cls),
    )
