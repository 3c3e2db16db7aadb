"""Holomorphic map-weight systems and their rigorous evaluation machinery.

Maps are affine or Moebius in one variable, coordinate products of those in
several, and compositions thereof.  Every supported map therefore acts
coordinatewise, disk images are exact (up to rounding), and derivatives are
diagonal.  Weights are rational functions with polynomial numerator and
denominator, evaluated either pointwise or on disk enclosures.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

from ._rounding import TINY, fup
from .disks import Cdisk
from .errors import (
    DimensionMismatchError,
    EnclosureFailureError,
    NotCompactlyContainedError,
    PoleError,
    PrecisionFailureError,
    SingularMultiplierError,
    UnsupportedDomainError,
)
from .geometry import (
    ComplexDisk,
    Domain,
    EuclideanBall,
    FiniteUnion,
    Polydisc,
    dist_lower_bound,
)

FIXED_POINT_DIAMETER = 1e-12


# ---------------------------------------------------------------------------
# Maps.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Affine1D:
    """z -> a z + b on C."""

    a: complex
    b: complex

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class Mobius:
    """z -> (a z + b) / (c z + e) on C, with a e - b c != 0."""

    a: complex
    b: complex
    c: complex
    e: complex

    def __post_init__(self):
        if self.a * self.e - self.b * self.c == 0:
            raise ValueError("Moebius map must have nonzero determinant")

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class ProductMap:
    """Coordinatewise product of one-dimensional maps."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors or any(f.dim != 1 for f in factors):
            raise ValueError("product map needs one-dimensional factors")
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return len(self.factors)


@dataclass(frozen=True)
class Composite:
    """Composition of maps, applied left to right (factors[0] first)."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("composite needs at least one factor")
        d = factors[0].dim
        if any(f.dim != d for f in factors):
            raise DimensionMismatchError("composite factors must share dimension")
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return self.factors[0].dim


HoloMap = Union[Affine1D, Mobius, ProductMap, Composite]


def _as_point(z) -> tuple:
    if isinstance(z, tuple):
        return z
    return (complex(z),)


def map_eval(phi: HoloMap, z):
    """Evaluate phi at a point (complex for d=1, tuple for d>1)."""
    pt = _as_point(z)
    out = _eval_pt(phi, pt)
    return out[0] if len(out) == 1 else out


def _eval_pt(phi: HoloMap, pt: tuple) -> tuple:
    if isinstance(phi, Affine1D):
        return (phi.a * pt[0] + phi.b,)
    if isinstance(phi, Mobius):
        den = phi.c * pt[0] + phi.e
        if den == 0:
            raise PoleError(f"Moebius pole hit at z={pt[0]}")
        return ((phi.a * pt[0] + phi.b) / den,)
    if isinstance(phi, ProductMap):
        return tuple(_eval_pt(f, (w,))[0] for f, w in zip(phi.factors, pt))
    out = pt
    for f in phi.factors:
        out = _eval_pt(f, out)
    return out


def map_derivative(phi: HoloMap, z):
    """Derivative of phi at z: scalar for d=1, diagonal tuple for d>1."""
    pt = _as_point(z)
    out = _deriv_pt(phi, pt)
    return out[0] if len(out) == 1 else out


def _deriv_pt(phi: HoloMap, pt: tuple) -> tuple:
    if isinstance(phi, Affine1D):
        return (phi.a,)
    if isinstance(phi, Mobius):
        den = phi.c * pt[0] + phi.e
        if den == 0:
            raise PoleError(f"Moebius pole hit at z={pt[0]}")
        return ((phi.a * phi.e - phi.b * phi.c) / (den * den),)
    if isinstance(phi, ProductMap):
        return tuple(_deriv_pt(f, (w,))[0] for f, w in zip(phi.factors, pt))
    # chain rule; factors are diagonal, so derivatives multiply coordinatewise
    deriv = (1.0 + 0.0j,) * phi.dim
    cur = pt
    for f in phi.factors:
        step = _deriv_pt(f, cur)
        deriv = tuple(d * s for d, s in zip(deriv, step))
        cur = _eval_pt(f, cur)
    return deriv


def coordinate_chains(phi: HoloMap, d: int):
    """Per-coordinate sequences of one-dimensional maps composing phi.

    Chains are applied first-to-last; the vectorized trace path consumes them.
    """
    if isinstance(phi, (Affine1D, Mobius)):
        if d != 1:
            raise DimensionMismatchError("one-dimensional map in d > 1 system")
        return [[phi]]
    if isinstance(phi, ProductMap):
        return [[f] for f in phi.factors]
    chains = [[] for _ in range(d)]
    for f in phi.factors:
        sub = coordinate_chains(f, d)
        for j in range(d):
            chains[j].extend(sub[j])
    return chains


# ---------------------------------------------------------------------------
# Disk enclosures.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiskEnclosure:
    """Per-coordinate disk enclosure of a set in C^d."""

    centers: tuple
    radii: tuple

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(complex(c) for c in self.centers))
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if len(self.centers) != len(self.radii) or not self.centers:
            raise ValueError("enclosure needs matching centers and radii")
        if any(r < 0.0 for r in self.radii):
            raise ValueError("enclosure radii must be non-negative")

    @staticmethod
    def from_cdisks(disks: Sequence[Cdisk]) -> "DiskEnclosure":
        return DiskEnclosure(tuple(x.c for x in disks), tuple(x.r for x in disks))

    @property
    def dim(self) -> int:
        return len(self.centers)

    @property
    def center(self) -> complex:
        return self.centers[0]

    @property
    def radius(self) -> float:
        return max(self.radii)

    def cdisk(self, j: int = 0) -> Cdisk:
        return Cdisk(self.centers[j], self.radii[j])

    def cdisks(self):
        return [Cdisk(c, r) for c, r in zip(self.centers, self.radii)]

    def diameter(self) -> float:
        return 2.0 * max(self.radii)

    def contains(self, other: "DiskEnclosure") -> bool:
        return all(
            self.cdisk(j).contains_disk(other.cdisk(j)) for j in range(self.dim)
        )

    def as_domain(self) -> Domain:
        radii = tuple(max(r, TINY) for r in self.radii)
        if self.dim == 1:
            return ComplexDisk(self.centers[0], radii[0])
        return Polydisc(self.centers, radii)


def domain_enclosure(dom: Domain) -> DiskEnclosure:
    """Per-coordinate disk enclosure of a strictly circled domain."""
    if isinstance(dom, ComplexDisk):
        return DiskEnclosure((dom.center,), (dom.radius,))
    if isinstance(dom, Polydisc):
        return DiskEnclosure(dom.centers, dom.radii)
    if isinstance(dom, EuclideanBall):
        return DiskEnclosure(dom.center, (dom.radius,) * dom.dim)
    raise UnsupportedDomainError("finite unions have no single disk enclosure")


def _apply_1d_disk(f, x: Cdisk) -> Cdisk:
    if isinstance(f, Affine1D):
        return x * f.a + f.b
    # Moebius: a/c + ((bc - ae)/c^2) / (z + e/c); exact disk image
    if f.c == 0:
        return x * (f.a / f.e) + (f.b / f.e)
    shift = f.e / f.c
    k0 = f.a / f.c
    k1 = (f.b * f.c - f.a * f.e) / (f.c * f.c)
    try:
        inv = (x + shift).recip()
    except EnclosureFailureError as exc:
        raise EnclosureFailureError(
            f"Moebius pole at {-shift} not excluded from disk around {x.c}"
        ) from exc
    return inv * Cdisk(k1, abs(k1) * 2.0 ** -50) + Cdisk(k0, abs(k0) * 2.0 ** -50)


def _deriv_1d_disk(f, x: Cdisk) -> Cdisk:
    if isinstance(f, Affine1D):
        return Cdisk.exact(f.a)
    det = f.a * f.e - f.b * f.c
    den = x * f.c + f.e
    return Cdisk(det, abs(det) * 2.0 ** -50) * (den * den).recip()


def image_enclosure(phi: HoloMap, enc: DiskEnclosure) -> DiskEnclosure:
    """Disk enclosure of phi(enc); exact for affine/Moebius coordinates."""
    chains = coordinate_chains(phi, enc.dim)
    out = []
    for j, chain in enumerate(chains):
        x = enc.cdisk(j)
        for f in chain:
            x = _apply_1d_disk(f, x)
        out.append(x)
    return DiskEnclosure.from_cdisks(out)


# ---------------------------------------------------------------------------
# Polynomials and rational weights.
# ---------------------------------------------------------------------------

class Polynomial:
    """Polynomial in d complex variables, stored as {exponent tuple: coeff}."""

    __slots__ = ("coeffs", "dim")

    def __init__(self, coeffs, dim: Optional[int] = None):
        if isinstance(coeffs, (list, tuple)):
            coeffs = {(k,): complex(c) for k, c in enumerate(coeffs) if c != 0}
            dim = dim or 1
        table = {}
        for mono, c in coeffs.items():
            mono = tuple(int(k) for k in mono)
            if complex(c) != 0:
                table[mono] = complex(c)
        if dim is None:
            dim = len(next(iter(table))) if table else 1
        if any(len(m) != dim for m in table):
            raise DimensionMismatchError("inconsistent monomial lengths")
        self.coeffs = table
        self.dim = dim

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self.coeffs)

    def constant_value(self) -> complex:
        return self.coeffs.get((0,) * self.dim, 0.0 + 0.0j)

    def eval_point(self, pt: tuple) -> complex:
        total = 0.0 + 0.0j
        for mono, c in self.coeffs.items():
            term = c
            for z, k in zip(pt, mono):
                term *= z**k
            total += term
        return total

    def eval_disk(self, disks: Sequence[Cdisk]) -> Cdisk:
        total = Cdisk.exact(0.0)
        for mono, c in sorted(self.coeffs.items()):
            term = Cdisk(c, abs(c) * 2.0 ** -52)
            for x, k in zip(disks, mono):
                if k:
                    term = term * x.pow_int(k)
            total = total + term
        return total


@dataclass(frozen=True)
class RationalWeight:
    """Weight w = p/q with q nonvanishing on the system domain."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if self.num.dim != self.den.dim:
            raise DimensionMismatchError("weight numerator/denominator dimensions")
        if self.den.is_zero():
            raise ValueError("weight denominator is identically zero")

    @staticmethod
    def constant(c, dim: int = 1) -> "RationalWeight":
        zero = (0,) * dim
        return RationalWeight(
            Polynomial({zero: complex(c)}, dim), Polynomial({zero: 1.0 + 0.0j}, dim)
        )

    @staticmethod
    def one(dim: int = 1) -> "RationalWeight":
        return RationalWeight.constant(1.0, dim)

    @property
    def dim(self) -> int:
        return self.num.dim

    def eval_point(self, z) -> complex:
        pt = _as_point(z)
        q = self.den.eval_point(pt)
        if q == 0:
            raise PoleError(f"weight denominator vanishes at {pt}")
        return self.num.eval_point(pt) / q

    def eval_disk(self, enc: DiskEnclosure) -> Cdisk:
        disks = enc.cdisks()
        p = self.num.eval_disk(disks)
        q = self.den.eval_disk(disks)
        if q.mag_lo <= 0.0:
            raise PoleError("weight denominator enclosure contains 0")
        return p / q


# ---------------------------------------------------------------------------
# Systems.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncationTail:
    """Annotation for a truncated countable branch family.

    ``l2_bound`` is a user-supplied upper bound on the L2 mass of the
    discarded sum of |w_i|; it is reported, never folded into certificates.
    """

    index: int
    l2_bound: float


@dataclass(frozen=True)
class MapWeightSystem:
    """Domain plus (map, weight) branches defining a transfer operator."""

    domain: Domain
    branches: tuple
    tail: Optional[TruncationTail] = None

    def __post_init__(self):
        branches = tuple((m, w) for m, w in self.branches)
        if not branches:
            raise ValueError("system needs at least one branch")
        d = self.domain.dim
        for idx, (m, w) in enumerate(branches):
            if m.dim != d or w.dim != d:
                raise DimensionMismatchError(
                    f"branch {idx} dimension does not match domain (d={d})"
                )
        object.__setattr__(self, "branches", branches)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    def domain_members(self):
        if isinstance(self.domain, FiniteUnion):
            return self.domain.members
        return (self.domain,)


@dataclass(frozen=True)
class BranchImageHull:
    """Union of branch-image enclosures with its certified margin to bdry(O)."""

    enclosures: tuple  # of DiskEnclosure, one per (branch, domain member)
    margin: float

    def as_domain(self) -> Domain:
        doms = tuple(e.as_domain() for e in self.enclosures)
        return doms[0] if len(doms) == 1 else FiniteUnion(doms)


def branch_image_hull(system: MapWeightSystem) -> BranchImageHull:
    """Enclose the union of branch images and certify its margin inside Omega."""
    enclosures = []
    for phi, _ in system.branches:
        for member in system.domain_members():
            enclosures.append(image_enclosure(phi, domain_enclosure(member)))
    margin = min(
        dist_lower_bound(e.as_domain(), system.domain) for e in enclosures
    )
    if margin <= 0.0:
        raise NotCompactlyContainedError(
            "branch images are not certifiably compactly contained in the domain"
        )
    return BranchImageHull(tuple(enclosures), margin)


# ---------------------------------------------------------------------------
# Certified fixed points.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertifiedFixedPoint:
    """Contraction certificate for the fixed point of a word composition."""

    enclosure: DiskEnclosure
    word: tuple
    multiplier: tuple  # per-coordinate Cdisk of the composition derivative
    det_factor: Cdisk  # det(I - phi'(z*)) with error radius

    @property
    def point(self):
        return (
            self.enclosure.centers[0]
            if self.enclosure.dim == 1
            else self.enclosure.centers
        )


def _word_chains(word, system: MapWeightSystem):
    d = system.dim
    chains = [[] for _ in range(d)]
    for idx in word:
        sub = coordinate_chains(system.branches[idx][0], d)
        for j in range(d):
            chains[j].extend(sub[j])
    return chains


def _mobius_matrix(chain) -> tuple:
    """Compose a 1-D chain into Moebius coefficients (a, b, c, e)."""
    a, b, c, e = 1.0 + 0j, 0.0 + 0j, 0.0 + 0j, 1.0 + 0j
    for f in chain:
        if isinstance(f, Affine1D):
            fa, fb, fc, fe = f.a, f.b, 0.0 + 0j, 1.0 + 0j
        else:
            fa, fb, fc, fe = f.a, f.b, f.c, f.e
        a, b, c, e = fa * a + fb * c, fa * b + fb * e, fc * a + fe * c, fc * b + fe * e
        scale = max(abs(a), abs(b), abs(c), abs(e))
        if scale > 1e100:
            a, b, c, e = a / scale, b / scale, c / scale, e / scale
    return a, b, c, e


def _fixed_point_candidates(chain) -> list:
    """Float fixed points of the composed chain (roots of c z^2 + (e-a) z - b)."""
    a, b, c, e = _mobius_matrix(chain)
    if abs(c) < 1e-300:
        if a == e:
            return []
        return [b / (e - a)]
    disc = (e - a) ** 2 + 4.0 * c * b
    root = disc**0.5
    return [((a - e) + root) / (2 * c), ((a - e) - root) / (2 * c)]


def _chain_derivative_on_disk(chain, x: Cdisk) -> Tuple[Cdisk, Cdisk]:
    """(derivative product, final image) of a 1-D chain on a disk."""
    deriv = Cdisk.exact(1.0)
    cur = x
    for f in chain:
        deriv = deriv * _deriv_1d_disk(f, cur)
        cur = _apply_1d_disk(f, cur)
    return deriv, cur


def fixed_point(word, system: MapWeightSystem) -> CertifiedFixedPoint:
    """Certified fixed point of phi_word = phi_{i_n} o ... o phi_{i_1}.

    The enclosure E satisfies phi_word(E) inside E with diameter below 1e-12;
    uniqueness comes from a derivative bound < 1 on E (raising the word to a
    power when the single pass does not contract).  The multiplier and
    det(I - phi') are evaluated on E in disk arithmetic.
    """
    word = tuple(int(i) for i in word)
    if not word:
        raise ValueError("word must be non-empty")
    if any(i < 0 or i >= system.n_branches for i in word):
        raise ValueError(f"word {word} has invalid branch indices")
    chains = _word_chains(word, system)
    d = system.dim

    coords = []
    for j in range(d):
        chain = chains[j]
        center_j = _domain_center(system.domain, j)
        cands = [
            z
            for z in _fixed_point_candidates(chain)
            if not (math.isnan(z.real) or math.isnan(z.imag))
        ]
        # fall back on plain iteration from the domain centre
        z = center_j
        for _ in range(200):
            z_new = z
            for f in chain:
                z_new = _eval_pt(f, (z_new,))[0]
            if abs(z_new - z) < 1e-15 * max(1.0, abs(z)):
                z = z_new
                break
            z = z_new
        cands.append(z)
        coords.append(_certify_coordinate(chain, cands))

    enclosure = DiskEnclosure.from_cdisks([c for c, _ in coords])
    multiplier = tuple(m for _, m in coords)
    det = Cdisk.exact(1.0)
    for m in multiplier:
        det = det * (Cdisk.exact(1.0) - m)
    if det.mag_lo <= 0.0:
        raise SingularMultiplierError(
            f"det(I - phi') enclosure contains 0 for word {word}"
        )
    return CertifiedFixedPoint(enclosure, word, multiplier, det)


def _domain_center(dom: Domain, j: int) -> complex:
    if isinstance(dom, FiniteUnion):
        dom = dom.members[0]
    if isinstance(dom, ComplexDisk):
        return dom.center
    if isinstance(dom, Polydisc):
        return dom.centers[j]
    return dom.center[j]


def _certify_coordinate(chain, candidates) -> Tuple[Cdisk, Cdisk]:
    """Certify one coordinate's fixed point; returns (enclosure, multiplier)."""
    for z0 in candidates:
        for power in (1, 2, 4, 8):
            reps = chain * power
            for delta_exp in range(-14, 3):
                delta = 10.0**delta_exp * max(1.0, abs(z0))
                E = Cdisk(z0, delta)
                try:
                    deriv, image = _chain_derivative_on_disk(reps, E)
                except (EnclosureFailureError, PoleError):
                    continue
                if not E.contains_disk(image) or deriv.mag_hi >= 1.0:
                    continue
                enc = _shrink_enclosure(chain, image)
                if enc is None:
                    continue
                mult, _ = _chain_derivative_on_disk(chain, enc)
                return enc, mult
    raise PrecisionFailureError(
        "could not certify a contracting enclosure for the word composition"
    )


def _shrink_enclosure(chain, E: Cdisk) -> Optional[Cdisk]:
    """Iterate the chain on E until the diameter target is met."""
    for _ in range(400):
        if 2.0 * E.r <= FIXED_POINT_DIAMETER:
            return E
        try:
            nxt = _chain_derivative_on_disk(chain, E)[1]
        except (EnclosureFailureError, PoleError):
            return None
        if nxt.r >= E.r:
            # rounding floor reached
            return E if 2.0 * E.r <= FIXED_POINT_DIAMETER else None
        E = nxt
    return E if 2.0 * E.r <= FIXED_POINT_DIAMETER else None


# ---------------------------------------------------------------------------
# Certified sup bounds for weights.
# ---------------------------------------------------------------------------

_SUP_BUDGET = 20_000


def _region_boxes(region: Domain):
    from .geometry import _bounding_box  # shared box helpers

    return _bounding_box(region)


def _point_in_domain(region: Domain, pt: tuple) -> bool:
    if isinstance(region, FiniteUnion):
        return any(_point_in_domain(m, pt) for m in region.members)
    if isinstance(region, ComplexDisk):
        return abs(pt[0] - region.center) <= region.radius
    if isinstance(region, Polydisc):
        return all(
            abs(z - c) <= r for z, c, r in zip(pt, region.centers, region.radii)
        )
    if isinstance(region, EuclideanBall):
        return (
            math.sqrt(sum(abs(z - c) ** 2 for z, c in zip(pt, region.center)))
            <= region.radius
        )
    return False


def _box_cdisks(box) -> list:
    out = []
    for j in range(len(box) // 2):
        re, im = box[2 * j], box[2 * j + 1]
        c = complex((re[0] + re[1]) / 2, (im[0] + im[1]) / 2)
        r = fup(math.hypot(re[1] - re[0], im[1] - im[0]) / 2 * 1.0000001)
        out.append(Cdisk(c, r))
    return out


def weight_sup_bound(weight: RationalWeight, region) -> float:
    """Certified upper bound on sup |w| over the region.

    Subdivides until the certified bound is within 10% of the best sample
    (max-modulus samples sit on box centres inside the region).
    """
    from .geometry import _box_outside, _split_box

    if isinstance(region, DiskEnclosure):
        region = region.as_domain()
    if isinstance(region, FiniteUnion):
        return max(weight_sup_bound(weight, m) for m in region.members)
    if weight.num.is_constant() and weight.den.is_constant():
        qc = weight.den.constant_value()
        if qc == 0:
            raise PoleError("constant weight denominator is zero")
        return fup(fup(abs(weight.num.constant_value() / qc)))

    def hi_on_box(box):
        disks = _box_cdisks(box)
        p = weight.num.eval_disk(disks)
        q = weight.den.eval_disk(disks)
        if q.mag_lo <= 0.0:
            return math.inf
        return p.mag_hi / q.mag_lo

    def sample(box) -> float:
        pt = tuple(x.c for x in _box_cdisks(box))
        if not _point_in_domain(region, pt):
            return 0.0
        try:
            return abs(weight.eval_point(pt if len(pt) > 1 else pt[0]))
        except PoleError:
            return 0.0

    root = _region_boxes(region)
    heap = [(-hi_on_box(root), 0, root)]
    best_sample = sample(root)
    count = itertools.count(1)
    processed = 0
    while heap:
        neg_hi, _, box = heapq.heappop(heap)
        hi = -neg_hi
        others = max((-h for h, _, _ in heap), default=0.0)
        if hi <= 0.0 or max(hi, others) <= 1.1 * best_sample + 1e-300:
            return fup(max(hi, others, best_sample))
        processed += 1
        if processed > _SUP_BUDGET:
            if math.isinf(hi):
                raise PoleError(
                    "weight denominator enclosure contains 0 on the region"
                )
            raise PrecisionFailureError(
                "weight sup refinement exceeded its subdivision budget"
            )
        for child in _split_box(box):
            if _box_outside(child, region):
                continue
            best_sample = max(best_sample, sample(child))
            heapq.heappush(heap, (-hi_on_box(child), next(count), child))
    return fup(best_sample)
