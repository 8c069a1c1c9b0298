"""Quantum bouncer on the half line: Airy eigenbasis, Gaussian packet
projection, spectral time evolution, position observables, and the
closed-form semiclassical series for <x>(t).

Eigenfunctions are psi_n(x) = (N_n / sqrt(l_g)) * Ai(x/l_g - x_n) with
N_n = 1 / |Ai'(-x_n)|, which is unit-normalized on [0, inf) because
integral of Ai(u - x_n)^2 from 0 equals Ai'(-x_n)^2 when Ai(-x_n) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classical import BounceSpec, bounce_fourier
from .errors import DomainError, InsufficientBasisError, NumericalError
from .scaling import UnitSystem
from .specfun import DEFAULT_QUAD, QuadratureSpec, airy_ai, airy_ai_prime, airy_zeros, integrate_1d

__all__ = [
    "PacketSpec",
    "Eigenbasis",
    "SpectralState",
    "build_basis",
    "project_packet",
    "project_function",
    "overlap_matrix",
    "evolve",
    "expectation_x",
    "expectation_x_evolution",
    "variance_x",
    "variance_x_evolution",
    "expectation_x_series",
    "reconstruct",
]

# Dimensionless distance past the highest turning point where the integrands
# have decayed far below any tolerance used here (Ai(12)^2 ~ 1e-25).
_TAIL_MARGIN = 12.0
_NORM_CHECK_TOL = 1e-8
_HALF_LINE_CLIP_LIMIT = 1e-6
_TRUNCATION_LIMIT = 1e-3


@dataclass(frozen=True)
class PacketSpec:
    """Gaussian packet (2/(pi sigma^2))^(1/4) exp(-(x - x0)^2 / sigma^2).

    With this convention the position variance is sigma^2/4.  sigma may be
    math.inf for the infinitely wide (classical-series) limit, which is only
    meaningful for expectation_x_series.
    """

    x0: float
    sigma: float

    def __post_init__(self):
        if not (self.x0 > 0 and math.isfinite(self.x0)):
            raise DomainError("packet x0 must be positive and finite")
        if not self.sigma > 0:
            raise DomainError("packet sigma must be positive")

    def wavefunction(self, x):
        amp = (2.0 / (math.pi * self.sigma**2)) ** 0.25
        return amp * np.exp(-((x - self.x0) ** 2) / self.sigma**2)

    def clipped_mass(self) -> float:
        """Probability mass of the full-line packet at x < 0."""
        return 0.5 * math.erfc(math.sqrt(2.0) * self.x0 / self.sigma)


@dataclass(eq=False)
class Eigenbasis:
    """Truncated Airy eigenbasis with cached position matrix elements."""

    n_max: int
    units: UnitSystem
    zeros: np.ndarray          # x_n, dimensionless, ascending
    energies: np.ndarray      # e_g * x_n
    norms: np.ndarray          # N_n = 1/|Ai'(-x_n)|
    x_matrix: np.ndarray       # <m|x|n>, length units
    _x2_matrix: np.ndarray | None = field(default=None, repr=False)

    def eigenfunction(self, n: int, x):
        """psi_n evaluated at physical heights x (n is 1-based)."""
        if not 1 <= n <= self.n_max:
            raise DomainError(f"eigenfunction index {n} outside 1..{self.n_max}")
        l_g = self.units.l_g
        return self.norms[n - 1] / math.sqrt(l_g) * airy_ai(np.asarray(x) / l_g - self.zeros[n - 1])

    def x2_matrix(self, quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
        """<m|x^2|n> in length^2 units, built on first use and cached."""
        if self._x2_matrix is None:
            self._x2_matrix = self.units.l_g**2 * _weighted_matrix(self, power=2, quad=quad)
        return self._x2_matrix


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Expansion coefficients of a state over an Eigenbasis at one time."""

    basis: Eigenbasis
    coefficients: np.ndarray
    time: float

    def __post_init__(self):
        total = float(np.sum(np.abs(self.coefficients) ** 2))
        if total > 1.0 + 1e-9:
            raise NumericalError(f"coefficient norm {total} exceeds 1")

    @property
    def truncation_loss(self) -> float:
        return 1.0 - float(np.sum(np.abs(self.coefficients) ** 2))


def _dimensionless_eigenfunction(zeros, norms, n_index, x_star):
    return norms[n_index] * airy_ai(x_star - zeros[n_index])


def _weighted_matrix(basis: Eigenbasis, power: int, quad: QuadratureSpec) -> np.ndarray:
    """Dimensionless matrix of integral psi_m psi_n (x*)^power on [0, inf)."""
    zeros, norms = basis.zeros, basis.norms
    n = basis.n_max
    upper = float(zeros[-1]) + _TAIL_MARGIN
    panels = max(8, int(math.ceil(upper / 0.6)))
    out = np.empty((n, n))
    for mi in range(n):
        for ni in range(mi, n):
            def integrand(x, mi=mi, ni=ni):
                val = _dimensionless_eigenfunction(zeros, norms, mi, x)
                val = val * _dimensionless_eigenfunction(zeros, norms, ni, x)
                return val * x**power if power else val
            try:
                v = integrate_1d(integrand, 0.0, upper, quad, initial_panels=panels)
            except NumericalError as exc:
                raise NumericalError(f"matrix element ({mi + 1}, {ni + 1}) failed: {exc}") from exc
            out[mi, ni] = out[ni, mi] = v
    return out


def build_basis(n_max: int, u: UnitSystem, quad: QuadratureSpec = DEFAULT_QUAD) -> Eigenbasis:
    """Construct the first n_max eigenstates and their position matrix.

    Each N_n is verified against the quadrature norm to 1e-8 before the
    matrix elements are filled.
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    zeros = airy_zeros(n_max)
    norms = 1.0 / np.abs(airy_ai_prime(-zeros))
    basis = Eigenbasis(
        n_max=n_max,
        units=u,
        zeros=zeros,
        energies=u.e_g * zeros,
        norms=norms,
        x_matrix=np.empty((0, 0)),
    )
    upper = float(zeros[-1]) + _TAIL_MARGIN
    panels = max(8, int(math.ceil(upper / 0.6)))
    for i in range(n_max):
        def sq(x, i=i):
            return _dimensionless_eigenfunction(zeros, norms, i, x) ** 2
        nrm = integrate_1d(sq, 0.0, upper, quad, initial_panels=panels)
        if abs(nrm - 1.0) > _NORM_CHECK_TOL:
            raise NumericalError(f"norm of eigenstate {i + 1} is {nrm}, off by >{_NORM_CHECK_TOL}")
    basis.x_matrix = u.l_g * _weighted_matrix(basis, power=1, quad=quad)
    return basis


def overlap_matrix(basis: Eigenbasis, quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """Gram matrix <m|n> by quadrature (identity up to quadrature error)."""
    return _weighted_matrix(basis, power=0, quad=quad)


def project_function(func, basis: Eigenbasis, quad: QuadratureSpec, lo: float, hi: float) -> SpectralState:
    """Project an arbitrary real wave function (physical coordinates) onto the basis.

    func must be vectorized; [lo, hi] must cover its support.
    """
    l_g = basis.units.l_g
    root = math.sqrt(l_g)
    coeffs = np.empty(basis.n_max)
    panels = max(8, int(math.ceil((hi - lo) / (0.6 * l_g))))
    for i in range(basis.n_max):
        def integrand(x, i=i):
            return _dimensionless_eigenfunction(basis.zeros, basis.norms, i, x / l_g) * func(x) / root
        coeffs[i] = integrate_1d(integrand, lo, hi, quad, initial_panels=panels)
    return SpectralState(basis=basis, coefficients=coeffs.astype(complex), time=0.0)


def project_packet(p: PacketSpec, basis: Eigenbasis, quad: QuadratureSpec = DEFAULT_QUAD) -> SpectralState:
    """Expand a Gaussian packet over the basis at t = 0.

    The full-line Gaussian is clipped to x >= 0 and renormalized; the clipped
    mass must be below 1e-6 (x0 >= 4 sigma guarantees that comfortably).
    Raises InsufficientBasisError when more than 1e-3 of the norm falls
    outside the truncated basis.
    """
    if not math.isfinite(p.sigma):
        raise DomainError("projection needs a finite packet width")
    clip = p.clipped_mass()
    if clip > _HALF_LINE_CLIP_LIMIT:
        raise DomainError(
            f"packet mass {clip:.2e} at x < 0 exceeds {_HALF_LINE_CLIP_LIMIT}; need x0 >~ 4 sigma"
        )
    rescale = 1.0 / math.sqrt(1.0 - clip)
    lo = max(0.0, p.x0 - 9.0 * p.sigma)
    hi = p.x0 + 9.0 * p.sigma
    state = project_function(lambda x: rescale * p.wavefunction(x), basis, quad, lo, hi)
    if state.truncation_loss > _TRUNCATION_LIMIT:
        raise InsufficientBasisError(
            f"truncation loss {state.truncation_loss:.2e} above {_TRUNCATION_LIMIT}; "
            f"increase n_max beyond {basis.n_max}"
        )
    return state


def evolve(s: SpectralState, t: float, u: UnitSystem | None = None) -> SpectralState:
    """Advance a state by duration t: c_n -> c_n * exp(-i E_n t / hbar)."""
    if t < 0:
        raise DomainError("evolution duration must be >= 0")
    hbar = (u or s.basis.units).hbar
    phases = np.exp(-1j * s.basis.energies * (t / hbar))
    return SpectralState(basis=s.basis, coefficients=s.coefficients * phases, time=s.time + t)


def _quadratic_form(state: SpectralState, matrix: np.ndarray, scale: float) -> float:
    c = state.coefficients
    val = complex(np.conj(c) @ (matrix @ c))
    if abs(val.imag) > 1e-10 * (abs(val.real) + scale):
        raise NumericalError(f"expectation value has imaginary residue {val.imag}")
    return val.real


def expectation_x(s: SpectralState) -> float:
    """<x> in physical length units."""
    return _quadratic_form(s, s.basis.x_matrix, s.basis.units.l_g)


def variance_x(s: SpectralState, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Var(x) = <x^2> - <x>^2 (>= 0 up to quadrature noise)."""
    mean = expectation_x(s)
    var = _quadratic_form(s, s.basis.x2_matrix(quad), s.basis.units.l_g**2) - mean * mean
    if var < -1e-10 * s.basis.units.l_g**2:
        raise NumericalError(f"variance {var} is negative beyond tolerance")
    return var


def _phase_table(s: SpectralState, times, u: UnitSystem | None):
    hbar = (u or s.basis.units).hbar
    times = np.asarray(times, dtype=float)
    return np.exp(-1j * np.outer(times / hbar, s.basis.energies)) * s.coefficients[None, :]


def expectation_x_evolution(s: SpectralState, times, u: UnitSystem | None = None) -> np.ndarray:
    """<x>(s.time + t) for an array of durations t (vectorized evolve + expectation)."""
    ph = _phase_table(s, times, u)
    return np.einsum("tm,mn,tn->t", ph.conj(), s.basis.x_matrix, ph).real


def variance_x_evolution(
    s: SpectralState, times, quad: QuadratureSpec = DEFAULT_QUAD, u: UnitSystem | None = None
) -> np.ndarray:
    ph = _phase_table(s, times, u)
    mean = np.einsum("tm,mn,tn->t", ph.conj(), s.basis.x_matrix, ph).real
    second = np.einsum("tm,mn,tn->t", ph.conj(), s.basis.x2_matrix(quad), ph).real
    return second - mean * mean


def reconstruct(s: SpectralState, x) -> np.ndarray:
    """Wave function at physical heights x from the truncated expansion."""
    l_g = s.basis.units.l_g
    x_star = np.atleast_1d(np.asarray(x, dtype=float)) / l_g
    table = s.basis.norms[None, :] * airy_ai(x_star[:, None] - s.basis.zeros[None, :])
    return (table / math.sqrt(l_g)) @ s.coefficients


def expectation_x_series(p: PacketSpec, t, n_terms: int):
    """Closed-form semiclassical <x>(t) for a Gaussian packet, in
    gravitational units (heights in l_g, times in t_g):

        (2/3) x0 + (4 x0 / pi^2) * sum_n (-1)^(n+1)/n^2
                    * exp(-pi^2 n^2 x0 / (2 sigma^2)) * cos(pi n t / T)

    with T = sqrt(x0) the drop time in these units.  The series shares the
    convention of classical.bounce_fourier and reduces to it term by term
    when the damping factors are 1 (sigma -> inf).
    """
    if n_terms < 1:
        raise DomainError("n_terms must be >= 1")
    t = np.asarray(t, dtype=float)
    if (t < 0).any():
        raise DomainError("time must be >= 0")
    x0 = p.x0
    T = math.sqrt(x0)
    damp_scale = math.pi**2 * x0 / (2.0 * p.sigma**2)
    acc = np.zeros_like(t)
    for n in range(1, n_terms + 1):
        sign = 1.0 if n % 2 else -1.0
        acc += sign / (n * n) * math.exp(-damp_scale * n * n) * np.cos((math.pi * n / T) * t)
    out = (2.0 / 3.0) * x0 + (4.0 * x0 / math.pi**2) * acc
    return float(out) if out.ndim == 0 else out


def classical_series_limit(p: PacketSpec, t, n_terms: int):
    """bounce_fourier evaluated with the gravitational-unit conventions of
    expectation_x_series (g = 2, so T = sqrt(x0))."""
    return bounce_fourier(BounceSpec(x0=p.x0, g=2.0), t, n_terms)
