"""Open sets in C^d, strictly circled scalings, distances, relative covers.

Supported shapes are disks (d=1), polydiscs and Euclidean balls (any d), and
finite unions of these.  Every predicate that feeds a certificate is evaluated
with directed rounding: distance lower bounds round down, reaches and radii
round up, so emitted bounds stay valid under floating point.

Lebesgue measure is normalised so the Euclidean unit ball of C^d has unit
mass: V(ball(R)) = R^{2d}, V(polydisc(r_1..r_d)) = d! * prod r_j^2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

from ._rounding import (
    SLACK,
    div_down,
    div_up,
    fdown,
    fup,
    log_down,
    pow_down,
    pow_up,
    sum_up,
)
from .errors import (
    DegenerateScalingError,
    DimensionMismatchError,
    InvalidCoverError,
    NotCompactlyContainedError,
    SearchFailureError,
    UnsupportedDomainError,
)

# Scalings this close to 1 produce vacuous downstream bounds.
DEGENERATE_GAMMA_MARGIN = 1e-6


@dataclass(frozen=True)
class ComplexDisk:
    """Open disk {|z - center| < radius} in C."""

    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class Polydisc:
    """Product of open coordinate disks in C^d."""

    centers: tuple
    radii: tuple

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(complex(c) for c in self.centers))
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if len(self.centers) != len(self.radii) or not self.centers:
            raise ValueError("polydisc needs matching non-empty centers and radii")
        if any(not r > 0.0 for r in self.radii):
            raise ValueError("polydisc radii must be positive")

    @property
    def dim(self) -> int:
        return len(self.centers)


@dataclass(frozen=True)
class EuclideanBall:
    """Open Euclidean ball in C^d."""

    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(complex(c) for c in self.center))
        if not self.center:
            raise ValueError("ball center must be non-empty")
        if not self.radius > 0.0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class FiniteUnion:
    """Finite union of circled shapes (itself generally not circled)."""

    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("union must be non-empty")
        if any(isinstance(m, FiniteUnion) for m in members):
            members = tuple(
                itertools.chain.from_iterable(
                    m.members if isinstance(m, FiniteUnion) else (m,) for m in members
                )
            )
        d = members[0].dim
        if any(m.dim != d for m in members):
            raise DimensionMismatchError("union members must share dimension")
        object.__setattr__(self, "members", members)

    @property
    def dim(self) -> int:
        return self.members[0].dim


Domain = Union[ComplexDisk, Polydisc, EuclideanBall, FiniteUnion]


def is_strictly_circled(dom: Domain) -> bool:
    return not isinstance(dom, FiniteUnion)


def circled_center(dom: Domain) -> tuple:
    """Centre of a strictly circled shape, as a point in C^d."""
    if isinstance(dom, ComplexDisk):
        return (dom.center,)
    if isinstance(dom, Polydisc):
        return dom.centers
    if isinstance(dom, EuclideanBall):
        return dom.center
    raise UnsupportedDomainError(f"{type(dom).__name__} is not strictly circled")


def scale_domain(dom: Domain, r: float) -> Domain:
    """Return r*(D - center) + center for a strictly circled D."""
    if not r > 0.0:
        raise ValueError(f"scale factor must be positive, got {r}")
    if isinstance(dom, ComplexDisk):
        return ComplexDisk(dom.center, dom.radius * r)
    if isinstance(dom, Polydisc):
        return Polydisc(dom.centers, tuple(rr * r for rr in dom.radii))
    if isinstance(dom, EuclideanBall):
        return EuclideanBall(dom.center, dom.radius * r)
    raise UnsupportedDomainError("cannot scale a finite union (not strictly circled)")


def _coerce_1d(dom: Domain) -> Domain:
    """In d=1 polydiscs and balls are disks; normalise for pair dispatch."""
    if isinstance(dom, Polydisc) and dom.dim == 1:
        return ComplexDisk(dom.centers[0], dom.radii[0])
    if isinstance(dom, EuclideanBall) and dom.dim == 1:
        return ComplexDisk(dom.center[0], dom.radius)
    return dom


def _abs_up(z: complex) -> float:
    if z == 0:
        return 0.0
    return fup(fup(abs(z)))


def _add_up(a: float, b: float) -> float:
    # adding an exact zero is exact; do not widen in that case
    if a == 0.0 or b == 0.0:
        return a + b
    return fup(a + b)


def _eucl_up(a: Sequence[complex], b: Sequence[complex]) -> float:
    s = sum_up(_abs_up(x - y) ** 2 for x, y in zip(a, b))
    if s == 0.0:
        return 0.0
    return fup(fup(math.sqrt(s)))


def _reach_up(inner: Domain, j: int, center: complex) -> float:
    """Upper bound on sup_{z in inner} |z_j - center| for coordinate j."""
    if isinstance(inner, ComplexDisk):
        return _add_up(_abs_up(inner.center - center), inner.radius)
    if isinstance(inner, Polydisc):
        return _add_up(_abs_up(inner.centers[j] - center), inner.radii[j])
    if isinstance(inner, EuclideanBall):
        return _add_up(_abs_up(inner.center[j] - center), inner.radius)
    raise UnsupportedDomainError(type(inner).__name__)


def dist_lower_bound(inner: Domain, outer: Domain) -> float:
    """Certified lower bound on dist(inner, boundary of outer).

    Returns 0 when inner is not (provably) contained in outer, or when the
    shape pair is indeterminate for the supported closed forms.
    """
    if inner.dim != outer.dim:
        raise DimensionMismatchError(
            f"dimension mismatch: {inner.dim} vs {outer.dim}"
        )
    inner = _coerce_1d(inner)
    outer = _coerce_1d(outer)
    if isinstance(inner, FiniteUnion):
        return min(dist_lower_bound(m, outer) for m in inner.members)
    if isinstance(outer, FiniteUnion):
        # dist(z, boundary of the union) >= dist(z, boundary of any member
        # containing z, hence containing all of inner.
        return max(
            (dist_lower_bound(inner, m) for m in outer.members), default=0.0
        )

    if isinstance(outer, ComplexDisk):
        reach = _add_up(_abs_up(inner.center - outer.center), inner.radius)
        return max(0.0, fdown(outer.radius - reach))
    if isinstance(outer, Polydisc):
        margins = []
        for j in range(outer.dim):
            reach = _reach_up(inner, j, outer.centers[j])
            margins.append(fdown(outer.radii[j] - reach))
        return max(0.0, min(margins))
    if isinstance(outer, EuclideanBall):
        if isinstance(inner, EuclideanBall):
            reach = _add_up(_eucl_up(inner.center, outer.center), inner.radius)
        elif isinstance(inner, Polydisc):
            reach = fup(
                fup(
                    math.sqrt(
                        sum_up(
                            _add_up(_abs_up(c - oc), r) ** 2
                            for c, r, oc in zip(
                                inner.centers, inner.radii, outer.center
                            )
                        )
                    )
                )
            )
        else:
            return 0.0
        return max(0.0, fdown(outer.radius - reach))
    return 0.0


def contains(outer: Domain, inner: Domain, margin: float = 0.0) -> bool:
    """Certified check that inner (plus margin) lies inside outer."""
    if isinstance(inner, FiniteUnion):
        return all(contains(outer, m, margin) for m in inner.members)
    if isinstance(outer, FiniteUnion):
        if any(contains(m, inner, margin) for m in outer.members):
            return True
        return _union_covers(list(outer.members), inner, margin)
    return dist_lower_bound(inner, outer) > margin or _touch_contains(outer, inner)


def _touch_contains(outer: Domain, inner: Domain) -> bool:
    """Non-strict containment (boundary contact allowed), closed forms only."""
    inner = _coerce_1d(inner)
    outer = _coerce_1d(outer)
    if isinstance(outer, ComplexDisk) and isinstance(inner, ComplexDisk):
        reach = _add_up(_abs_up(inner.center - outer.center), inner.radius)
        return reach <= outer.radius
    if isinstance(outer, Polydisc) and isinstance(inner, (Polydisc, EuclideanBall)):
        return all(
            _reach_up(inner, j, outer.centers[j]) <= outer.radii[j]
            for j in range(outer.dim)
        )
    if isinstance(outer, EuclideanBall) and isinstance(inner, EuclideanBall):
        reach = _add_up(_eucl_up(inner.center, outer.center), inner.radius)
        return reach <= outer.radius
    return False


def volume_upper(dom: Domain) -> float:
    """Upper bound on the normalised volume (unions may overcount)."""
    if isinstance(dom, ComplexDisk):
        return fup(dom.radius * dom.radius)
    if isinstance(dom, Polydisc):
        v = float(math.factorial(dom.dim))
        for r in dom.radii:
            v = fup(v * fup(r * r))
        return v
    if isinstance(dom, EuclideanBall):
        return pow_up(dom.radius, 2 * dom.dim)
    return sum_up(volume_upper(m) for m in dom.members)


# ---------------------------------------------------------------------------
# Box subdivision: rigorous covering checks against unions of shapes.
# ---------------------------------------------------------------------------

_BOX_BUDGET = 400_000


def _bounding_box(dom: Domain):
    """Axis-aligned box (lo, hi per real axis; axes re_1, im_1, .., re_d, im_d)."""
    if isinstance(dom, ComplexDisk):
        c, r = dom.center, dom.radius
        return [(c.real - r, c.real + r), (c.imag - r, c.imag + r)]
    if isinstance(dom, Polydisc):
        out = []
        for c, r in zip(dom.centers, dom.radii):
            out += [(c.real - r, c.real + r), (c.imag - r, c.imag + r)]
        return out
    if isinstance(dom, EuclideanBall):
        out = []
        for c in dom.center:
            r = dom.radius
            out += [(c.real - r, c.real + r), (c.imag - r, c.imag + r)]
        return out
    boxes = [_bounding_box(m) for m in dom.members]
    return [
        (min(b[k][0] for b in boxes), max(b[k][1] for b in boxes))
        for k in range(len(boxes[0]))
    ]


def _axis_min_max(lo: float, hi: float, a: float):
    """Range of |x - a| for x in [lo, hi]."""
    mn = 0.0 if lo <= a <= hi else min(abs(lo - a), abs(hi - a))
    return mn, max(abs(lo - a), abs(hi - a))


def _box_coord_dist(box, j: int, center: complex):
    re = _axis_min_max(box[2 * j][0], box[2 * j][1], center.real)
    im = _axis_min_max(box[2 * j + 1][0], box[2 * j + 1][1], center.imag)
    lo_sq = max(0.0, fdown(re[0] * re[0] + im[0] * im[0]))
    lo = max(0.0, fdown(math.sqrt(lo_sq) / SLACK))
    hi = fup(math.sqrt(fup(re[1] * re[1] + im[1] * im[1])) * SLACK)
    return lo, hi


def _box_outside(box, dom: Domain) -> bool:
    """True only if the closed box provably misses the closure of dom."""
    dom = _coerce_1d(dom)
    if isinstance(dom, ComplexDisk):
        return _box_coord_dist(box, 0, dom.center)[0] > dom.radius
    if isinstance(dom, Polydisc):
        return any(
            _box_coord_dist(box, j, dom.centers[j])[0] > dom.radii[j]
            for j in range(dom.dim)
        )
    if isinstance(dom, EuclideanBall):
        s = sum_up(_box_coord_dist(box, j, dom.center[j])[0] ** 2 for j in range(dom.dim))
        return fdown(math.sqrt(s) / SLACK) > dom.radius
    return all(_box_outside(box, m) for m in dom.members)


def _box_inside(box, dom: Domain) -> bool:
    """True only if the closed box provably lies inside the open dom."""
    dom = _coerce_1d(dom)
    if isinstance(dom, ComplexDisk):
        return _box_coord_dist(box, 0, dom.center)[1] < dom.radius
    if isinstance(dom, Polydisc):
        return all(
            _box_coord_dist(box, j, dom.centers[j])[1] < dom.radii[j]
            for j in range(dom.dim)
        )
    if isinstance(dom, EuclideanBall):
        s = sum_up(_box_coord_dist(box, j, dom.center[j])[1] ** 2 for j in range(dom.dim))
        return fup(math.sqrt(s) * SLACK) < dom.radius
    return any(_box_inside(box, m) for m in dom.members)


def _split_box(box):
    k = max(range(len(box)), key=lambda i: box[i][1] - box[i][0])
    lo, hi = box[k]
    mid = 0.5 * (lo + hi)
    left = list(box)
    right = list(box)
    left[k] = (lo, mid)
    right[k] = (mid, hi)
    return left, right


def _union_covers(pieces, target: Domain, margin: float = 0.0) -> bool:
    """Verify target is covered by the union of pieces, by box subdivision.

    Conservative: returns False when the budget runs out before a proof.
    """
    if any(contains(p, target) for p in pieces if not isinstance(p, FiniteUnion)):
        return True
    work = [_bounding_box(target)]
    expanded = 0
    while work:
        box = work.pop()
        if _box_outside(box, target):
            continue
        if any(_box_inside(box, p) for p in pieces):
            continue
        expanded += 1
        if expanded > _BOX_BUDGET:
            return False
        if max(hi - lo for lo, hi in box) <= 0.0:
            return False
        work.extend(_split_box(box))
    return True


# ---------------------------------------------------------------------------
# Relative covers and their efficiency.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelativeCover:
    """Strictly circled pieces with scalings > 1 targeting a pair (O1, O2)."""

    pieces: tuple  # of (Domain, gamma)
    omega1: Optional[Domain] = None
    omega2: Optional[Domain] = None
    validated: bool = False

    def __post_init__(self):
        pieces = tuple((p, float(g)) for p, g in self.pieces)
        if not pieces:
            raise ValueError("cover needs at least one piece")
        for idx, (piece, gamma) in enumerate(pieces):
            if not is_strictly_circled(piece):
                raise UnsupportedDomainError(
                    f"cover piece {idx} is not strictly circled"
                )
            if not gamma > 1.0:
                raise DegenerateScalingError(
                    f"cover piece {idx} has scaling {gamma} <= 1"
                )
        object.__setattr__(self, "pieces", pieces)

    @property
    def size(self) -> int:
        return len(self.pieces)

    @property
    def dim(self) -> int:
        return self.pieces[0][0].dim


@dataclass(frozen=True)
class EfficiencySummary:
    """Efficiency data of a validated cover: Gamma = (log gamma_n)."""

    Gamma: tuple
    c: float
    min_Gamma: float
    N: int
    d: int

    def as_dict(self):
        return {
            "N": self.N,
            "d": self.d,
            "Gamma": list(self.Gamma),
            "c": self.c,
            "min_Gamma": self.min_Gamma,
        }


def cover_validate(cover: RelativeCover, omega1: Domain, omega2: Domain) -> RelativeCover:
    """Rigorously verify both cover conditions; returns a validated copy.

    (a) omega2 is covered by the union of the pieces;
    (b) every piece scaled by its gamma stays inside omega1.
    """
    if omega1.dim != omega2.dim or omega1.dim != cover.dim:
        raise DimensionMismatchError("cover and targets must share dimension")
    for idx, (piece, gamma) in enumerate(cover.pieces):
        # radius inflation rounds up so the containment check is sound
        scaled = scale_domain(piece, fup(gamma * SLACK))
        if not contains(omega1, scaled):
            raise InvalidCoverError(
                f"condition (b) failed: piece {idx} scaled by {gamma} "
                f"is not contained in omega1",
                condition="b",
                piece=idx,
            )
    if not _union_covers([p for p, _ in cover.pieces], omega2):
        raise InvalidCoverError(
            "condition (a) failed: omega2 not verified to be covered by the pieces",
            condition="a",
        )
    return replace(cover, omega1=omega1, omega2=omega2, validated=True)


def cover_efficiency(cover: RelativeCover) -> EfficiencySummary:
    """Efficiency c = ||Gamma||_d with downward rounding, plus min(Gamma)."""
    d = cover.dim
    gammas = [g for _, g in cover.pieces]
    for g in gammas:
        if g <= 1.0 + DEGENERATE_GAMMA_MARGIN:
            raise DegenerateScalingError(
                f"scaling {g} is degenerate (within {DEGENERATE_GAMMA_MARGIN} of 1)"
            )
    Gamma = tuple(log_down(g) for g in gammas)
    # c rounds down: each Gamma_n^{-d} rounds up, the sum rounds up.
    s_up = sum_up(div_up(1.0, pow_down(gn, d)) for gn in Gamma)
    c = div_down(1.0, pow_up(s_up, 1.0 / d))
    return EfficiencySummary(
        Gamma=Gamma, c=c, min_Gamma=min(Gamma), N=cover.size, d=d
    )


# ---------------------------------------------------------------------------
# Automatic cover construction.
# ---------------------------------------------------------------------------

def _max_scaling(piece: Domain, omega1: Domain) -> float:
    """Largest workable gamma with piece(gamma) inside omega1 (conservative)."""
    piece = _coerce_1d(piece)
    o = _coerce_1d(omega1)
    if isinstance(o, FiniteUnion):
        return max((_max_scaling(piece, m) for m in o.members), default=0.0)
    if isinstance(o, ComplexDisk) and isinstance(piece, ComplexDisk):
        g = (o.radius - abs(piece.center - o.center)) / piece.radius
    elif isinstance(o, Polydisc) and isinstance(piece, Polydisc):
        g = min(
            (orr - abs(pc - oc)) / pr
            for pc, pr, oc, orr in zip(piece.centers, piece.radii, o.centers, o.radii)
        )
    elif isinstance(o, Polydisc) and isinstance(piece, EuclideanBall):
        g = min(
            (orr - abs(pc - oc)) / piece.radius
            for pc, oc, orr in zip(piece.center, o.centers, o.radii)
        )
    elif isinstance(o, EuclideanBall) and isinstance(piece, EuclideanBall):
        g = (o.radius - _eucl_up(piece.center, o.center)) / piece.radius
    elif isinstance(o, EuclideanBall) and isinstance(piece, Polydisc):
        # solve sum (a_j + g r_j)^2 = R^2 for the positive root
        a = [abs(pc - oc) for pc, oc in zip(piece.centers, o.center)]
        A = sum(r * r for r in piece.radii)
        B = sum(ai * ri for ai, ri in zip(a, piece.radii))
        C = sum(ai * ai for ai in a) - o.radius**2
        disc = B * B - A * C
        if disc <= 0.0:
            return 0.0
        g = (-B + math.sqrt(disc)) / A
    else:
        return 0.0
    return g * (1.0 - 1e-9)


def _grid_pieces(omega2: Domain, per_axis: int):
    """Cells of a regular grid over the bounding box of omega2, as polydiscs.

    Cells that provably miss omega2 are dropped; each kept cell is covered by
    a coordinate disk of its half-diagonal with 2% slack (so neighbouring
    pieces overlap and the covering proof terminates).
    """
    box = _bounding_box(omega2)
    d = len(box) // 2
    axes = []
    for lo, hi in box:
        step = (hi - lo) / per_axis
        axes.append([(lo + i * step, lo + (i + 1) * step) for i in range(per_axis)])
    pieces = []
    for cell in itertools.product(*axes):
        if _box_outside(list(cell), omega2):
            continue
        centers = []
        radii = []
        for j in range(d):
            re, im = cell[2 * j], cell[2 * j + 1]
            centers.append(complex((re[0] + re[1]) / 2, (im[0] + im[1]) / 2))
            half_diag = math.hypot((re[1] - re[0]) / 2, (im[1] - im[0]) / 2)
            radii.append(half_diag * 1.02)
        if d == 1:
            pieces.append(ComplexDisk(centers[0], radii[0]))
        else:
            pieces.append(Polydisc(tuple(centers), tuple(radii)))
    return pieces


def auto_cover(omega1: Domain, omega2: Domain, granularity: int) -> RelativeCover:
    """Search validated covers of (omega1, omega2) maximising the efficiency c.

    Candidates: omega2 itself (when strictly circled), then regular grids with
    1..granularity cells per real axis.  Ties keep the earlier (coarser) grid.
    """
    if granularity < 1:
        raise ValueError("granularity must be >= 1")
    if omega1.dim != omega2.dim:
        raise DimensionMismatchError("auto_cover targets must share dimension")
    if not dist_lower_bound(omega2, omega1) > 0.0:
        raise NotCompactlyContainedError(
            "omega2 is not compactly contained in omega1"
        )

    candidate_pieces = []
    if is_strictly_circled(omega2):
        candidate_pieces.append([omega2])
    for per_axis in range(1, granularity + 1):
        candidate_pieces.append(_grid_pieces(omega2, per_axis))

    best = None
    best_c = -math.inf
    for pieces in candidate_pieces:
        if not pieces:
            continue
        scalings = [_max_scaling(p, omega1) for p in pieces]
        if any(g <= 1.0 + DEGENERATE_GAMMA_MARGIN for g in scalings):
            continue
        try:
            cover = cover_validate(
                RelativeCover(tuple(zip(pieces, scalings))), omega1, omega2
            )
            c = cover_efficiency(cover).c
        except (InvalidCoverError, DegenerateScalingError):
            continue
        if c > best_c:
            best, best_c = cover, c
    if best is None:
        raise SearchFailureError(
            f"no valid cover found up to granularity {granularity}"
        )
    return best
