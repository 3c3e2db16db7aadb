"""Non-rigorous Galerkin discretization of the transfer operator.

Columns hold Taylor coefficients (about the domain centre, in the scaled
variable) of the operator applied to scaled monomials, extracted by discrete
Fourier analysis on a circle of 0.9 times the domain radius with 4x
oversampling.  Everything here is a cross-check: certified modules never
consume oracle output.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import OracleFailureError, PoleError, UnsupportedDomainError
from .geometry import ComplexDisk, Polydisc
from .systems import MapWeightSystem, map_eval

SAMPLING_FRACTION = 0.9
OVERSAMPLE = 4


@dataclass(frozen=True)
class GalerkinMatrix:
    """Dense collocation matrix with its basis descriptor."""

    matrix: np.ndarray
    basis: dict
    system: MapWeightSystem = field(repr=False, compare=False, default=None)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _weights_at(system: MapWeightSystem, zs: np.ndarray) -> np.ndarray:
    """Branch weights at sample points; vectorized rational evaluation."""
    out = np.empty((system.n_branches, zs.shape[0]), dtype=complex)
    for i, (_, w) in enumerate(system.branches):
        num = np.zeros_like(zs)
        den = np.zeros_like(zs)
        for mono, c in w.num.coeffs.items():
            num += c * zs ** mono[0]
        for mono, c in w.den.coeffs.items():
            den += c * zs ** mono[0]
        if np.any(np.abs(den) < 1e-300):
            raise OracleFailureError(
                f"assembly error: weight {i} pole on the sampling circle"
            )
        out[i] = num / den
    return out


def galerkin_matrix(system: MapWeightSystem, size: int) -> GalerkinMatrix:
    """Assemble the collocation matrix in the scaled monomial basis.

    Disk domains use a single sampling circle; polydiscs use tensor circles
    with per-coordinate degree ceil(size^(1/d)) (the matrix size is then that
    degree to the d-th power).
    """
    if size < 1:
        raise ValueError("basis size must be >= 1")
    dom = system.domain
    if isinstance(dom, ComplexDisk):
        return _galerkin_disk(system, size)
    if isinstance(dom, Polydisc):
        return _galerkin_polydisc(system, size)
    raise UnsupportedDomainError("oracle assembly needs a disk or polydisc domain")


def _galerkin_disk(system: MapWeightSystem, size: int) -> GalerkinMatrix:
    dom: ComplexDisk = system.domain
    K = OVERSAMPLE * size
    theta = 2.0 * np.pi * np.arange(K) / K
    s = SAMPLING_FRACTION
    zs = dom.center + s * dom.radius * np.exp(1j * theta)
    weights = _weights_at(system, zs)
    images = np.empty((system.n_branches, K), dtype=complex)
    for i, (phi, _) in enumerate(system.branches):
        try:
            images[i] = np.array([map_eval(phi, z) for z in zs])
        except PoleError as exc:
            raise OracleFailureError(f"assembly error: {exc}") from exc
    u = (images - dom.center) / dom.radius
    powers = np.arange(size)
    scale = s**powers
    A = np.empty((size, size), dtype=complex)
    u_pow = np.ones_like(u)
    for k in range(size):
        samples = np.sum(weights * u_pow, axis=0)
        coeffs = np.fft.fft(samples) / K
        A[:, k] = coeffs[:size] / scale
        u_pow = u_pow * u
    if not np.all(np.isfinite(A)):
        raise OracleFailureError("assembly produced non-finite entries")
    basis = {
        "type": "disk-monomials",
        "center": [dom.center.real, dom.center.imag],
        "scale": dom.radius,
        "size": size,
    }
    return GalerkinMatrix(A, basis, system)


def _galerkin_polydisc(system: MapWeightSystem, size: int) -> GalerkinMatrix:
    dom: Polydisc = system.domain
    d = dom.dim
    deg = max(1, math.ceil(size ** (1.0 / d)))
    K = OVERSAMPLE * deg
    s = SAMPLING_FRACTION
    theta = 2.0 * np.pi * np.arange(K) / K
    rings = [c + s * r * np.exp(1j * theta) for c, r in zip(dom.centers, dom.radii)]
    grid = list(itertools.product(*[range(K)] * d))
    pts = [tuple(rings[j][g[j]] for j in range(d)) for g in grid]
    multis = list(itertools.product(*[range(deg)] * d))
    M = len(multis)

    samples = np.zeros((len(pts),), dtype=complex)
    A = np.empty((M, M), dtype=complex)
    for col, kk in enumerate(multis):
        for p_idx, pt in enumerate(pts):
            total = 0j
            for phi, w in system.branches:
                img = map_eval(phi, pt)
                img = img if isinstance(img, tuple) else (img,)
                u = [
                    (img[j] - dom.centers[j]) / dom.radii[j] for j in range(d)
                ]
                mono = 1.0 + 0j
                for j in range(d):
                    mono *= u[j] ** kk[j]
                total += w.eval_point(pt) * mono
            samples[p_idx] = total
        cube = samples.reshape((K,) * d)
        coeffs = np.fft.fftn(cube) / (K**d)
        for row, mm in enumerate(multis):
            A[row, col] = coeffs[mm] / (s ** sum(mm))
    basis = {
        "type": "polydisc-monomials",
        "centers": [[c.real, c.imag] for c in dom.centers],
        "scales": list(dom.radii),
        "degree": deg,
        "size": M,
    }
    return GalerkinMatrix(A, basis, system)


def oracle_eigenvalues(gm: GalerkinMatrix) -> list:
    """Eigenvalues of the collocation matrix, modulus-descending."""
    try:
        ev = np.linalg.eigvals(gm.matrix)
    except np.linalg.LinAlgError as exc:
        raise OracleFailureError(f"eigensolver failed: {exc}") from exc
    return sorted(
        (complex(z) for z in ev),
        key=lambda z: (-abs(z), math.atan2(z.imag, z.real)),
    )


def oracle_traces(gm: GalerkinMatrix, n: int) -> complex:
    """Trace of the n-th power of the collocation matrix."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return complex(np.trace(np.linalg.matrix_power(gm.matrix, n)))


# ---------------------------------------------------------------------------
# Numerically assembled embedding matrices (singular-value cross-check).
# ---------------------------------------------------------------------------

def _radial_gram(gamma: float, degree: int) -> np.ndarray:
    """1-D quadrature inner products between the scaled monomial bases.

    Entry (l, k) is the A^2(unit disk) inner product of the k-th normalised
    monomial of A^2(D(gamma)) with the l-th normalised monomial of A^2(D).
    Radial integrals use Gauss-Legendre in t = r^2, angular ones a uniform
    trapezoidal rule (both converge to the exact values used implicitly).
    """
    n_ang = 4 * degree + 4
    nodes, weights = np.polynomial.legendre.leggauss(degree + 4)

    def radial(p: float, rho2: float) -> float:
        # int_0^{rho2} t^p dt by quadrature
        t = 0.5 * (nodes + 1.0) * rho2
        wt = 0.5 * weights * rho2
        return float(np.sum(wt * t**p))

    theta = 2.0 * np.pi * np.arange(n_ang) / n_ang
    ang = np.exp(1j * theta)
    norms_1 = np.array([radial(k, 1.0) for k in range(degree)])
    norms_g = np.array([radial(k, gamma**2) for k in range(degree)])
    G = np.zeros((degree, degree), dtype=complex)
    for k in range(degree):
        for l in range(degree):
            angular = complex(np.mean(ang ** (k - l)))
            G[l, k] = angular * radial((k + l) / 2.0, 1.0)
    return G / np.sqrt(np.outer(norms_1, norms_g))


def embedding_matrix(d: int, gamma: float, count: int) -> np.ndarray:
    """Numerically assembled matrix of the scaling embedding.

    d=1 works on the unit disk with `count` monomials; d>1 on the unit
    polydisc with all multi-indices up to the total degree needed to reach at
    least `count` basis elements (whole degree blocks, so leading singular
    values keep their multiplicities).
    """
    if gamma <= 1.0:
        raise ValueError("gamma must exceed 1")
    if d == 1:
        return _radial_gram(gamma, count)
    kmax = 0
    while math.comb(kmax + d, d) < count:
        kmax += 1
    multis = sorted(
        (
            m
            for m in itertools.product(*[range(kmax + 1)] * d)
            if sum(m) <= kmax
        ),
        key=lambda m: (sum(m), m),
    )
    base = _radial_gram(gamma, kmax + 1)
    M = len(multis)
    G = np.zeros((M, M), dtype=complex)
    for a, ma in enumerate(multis):
        for b, mb in enumerate(multis):
            entry = 1.0 + 0j
            for j in range(d):
                entry *= base[ma[j], mb[j]]
            G[a, b] = entry
    return G
