"""Collective decay (b) and dispersive (g) coupling matrices, and regularized Lamb shifts.

Both matrices are dimensionless and enter the amplitude equations as
``-(3/4) Gamma (b - i g)``. Entries are indexed by flat channels
(3*atom + eta + 1); same-atom 3x3 blocks vanish.

Three routes give g:

* :func:`coupling_g_closed` contracts the closed-form dispersive dyadic;
* :func:`coupling_g_pv` with ``variant="extended"`` integrates
  w^3 tau(w x)/(w - 1) over the whole real line by principal-value quadrature;
* ``variant="full_numeric"`` integrates over positive frequencies only, adding
  the counter-rotating term with denominator (w + 1);
* ``variant="rwa_cutoff"`` keeps only the first positive-frequency term up to a
  hard cutoff, which diverges with the cutoff and is reported with it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ensemble import Ensemble
from .errors import ValidationError
from .geometry import contract, gamma_radial, tau_dyadic, tau_radial
from .pv import PVQuadratureSpec, plain_integral, pv_estimate


class Variant(str, Enum):
    RWA_CUTOFF = "rwa_cutoff"
    EXTENDED = "extended"
    FULL_NUMERIC = "full_numeric"
    CLOSED = "closed"


@dataclass(frozen=True)
class CouplingCoefficients:
    """Coupling matrices of one ensemble.

    ``b`` and ``g`` are complex Hermitian (3N, 3N) arrays: the spherical
    dipole vectors make cross-Zeeman entries complex.
    """

    b: np.ndarray
    g: np.ndarray
    variant: Variant
    cutoff: float | None = None
    residual: float = 0.0
    spec: PVQuadratureSpec | None = None

    @property
    def n_channels(self) -> int:
        return self.b.shape[0]


def _pairs(n):
    return [(l, j) for l in range(n) for j in range(l + 1, n)]


def _assemble(ensemble: Ensemble, dyadic_of_pair, workers: int = 1) -> np.ndarray:
    """Fill (l, j) and (j, l) blocks with contract(dyadic); blocks are written disjointly."""
    n = ensemble.n_atoms
    out = np.zeros((3 * n, 3 * n), dtype=complex)
    pairs = _pairs(n)
    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            dyads = list(pool.map(lambda p: dyadic_of_pair(*p), pairs))
    else:
        dyads = [dyadic_of_pair(l, j) for l, j in pairs]
    for (l, j), m in zip(pairs, dyads):
        block = contract(m)
        out[3 * l:3 * l + 3, 3 * j:3 * j + 3] = block
        out[3 * j:3 * j + 3, 3 * l:3 * l + 3] = block
    return out


def _direction(ensemble, l, j):
    r = ensemble.separation_vector(l, j)
    x = float(np.linalg.norm(r))
    return x, r / x


def coupling_b(ensemble: Ensemble, workers: int = 1) -> np.ndarray:
    """Collective decay matrix, entries (1 - delta_lj) d_{eta g}.tau(x_lj).d_{g nu}.

    Identical for every variant: only the resonant frequency contributes.
    """
    def dyad(l, j):
        x, r_hat = _direction(ensemble, l, j)
        return tau_dyadic(x, r_hat).m

    return _assemble(ensemble, dyad, workers)


def _projectors(r_hat):
    rr = np.outer(r_hat, r_hat)
    return np.eye(3) - rr, np.eye(3) - 3.0 * rr


def coupling_g_closed(ensemble: Ensemble, workers: int = 1) -> np.ndarray:
    """Dispersive matrix from the closed-form dyadic (see ``geometry.gamma_dyadic``)."""
    def dyad(l, j):
        x, r_hat = _direction(ensemble, l, j)
        p1, p2 = _projectors(r_hat)
        far, near = gamma_radial(x)
        return p1 * float(far) + p2 * float(near)

    return _assemble(ensemble, dyad, workers)


def radial_dispersive_integrals(x: float, variant: Variant | str,
                                spec: PVQuadratureSpec | None = None,
                                band: tuple[float, float] | None = None):
    """(1/pi) P int w^3 [sin(wx)/(wx), cos(wx)/(wx)^2 - sin(wx)/(wx)^3] / (w - 1) dw.

    Frequencies are in units of omega0. The range depends on ``variant``:
    [band[0], band[1]] (default [0, cutoff]) for rwa_cutoff, the whole real line
    for extended, and [0, inf) plus the (w + 1)-denominator term for full_numeric.

    Returns:
        (coefficients, residual): the two radial coefficients of the projectors
        [I - RR] and [I - 3RR], and the extrapolation residual.
    """
    variant = Variant(variant)
    spec = spec or PVQuadratureSpec()
    if not x > 0:
        raise ValidationError("separation must be positive")

    def numerator(w):
        far, near = tau_radial(w * x)
        return (w**3)[:, None] * np.stack([far, near], axis=1)

    if variant is Variant.RWA_CUTOFF:
        lower, upper = band if band is not None else (0.0, spec.cutoff)
        res = pv_estimate(numerator, 1.0, spec, lower=lower, upper=upper, frequency=x)
    elif variant is Variant.EXTENDED:
        res = pv_estimate(numerator, 1.0, spec, lower=-np.inf, upper=np.inf, frequency=x)
    elif variant is Variant.FULL_NUMERIC:
        res = pv_estimate(numerator, 1.0, spec, lower=0.0, upper=np.inf, frequency=x,
                          second_pole=1.0)
    else:
        raise ValidationError(f"variant {variant.value!r} has no quadrature route")
    return np.asarray(res.value) / np.pi, res.residual


def counter_rotating_integrals(x: float, cutoff: float, spec: PVQuadratureSpec | None = None):
    """(1/pi) int_0^cutoff w^3 [tau radial factors](w x) / (w + 1) dw (no pole)."""
    def integrand(w):
        far, near = tau_radial(w * x)
        return (w**3 / (w + 1.0))[:, None] * np.stack([far, near], axis=1)

    return np.asarray(plain_integral(integrand, 0.0, cutoff, spec, frequency=x)) / np.pi


def coupling_g_pv(ensemble: Ensemble, variant: Variant | str = Variant.EXTENDED,
                  spec: PVQuadratureSpec | None = None, *, band=None,
                  workers: int = 1) -> CouplingCoefficients:
    """Dispersive matrix by principal-value quadrature of the frequency integral.

    The result carries ``b`` as well, so it can feed ``dynamics.build_generator``
    directly. For ``rwa_cutoff`` the returned ``cutoff`` is the upper band edge.
    """
    variant = Variant(variant)
    spec = spec or PVQuadratureSpec()
    if variant is Variant.CLOSED:
        return coupling_coefficients(ensemble, variant, spec, workers=workers)
    residuals = {}

    def dyad(l, j):
        x, r_hat = _direction(ensemble, l, j)
        coeffs, residual = radial_dispersive_integrals(x, variant, spec, band)
        residuals[(l, j)] = residual
        p1, p2 = _projectors(r_hat)
        return p1 * coeffs[0] + p2 * coeffs[1]

    g = _assemble(ensemble, dyad, workers)
    cutoff = None
    if variant is Variant.RWA_CUTOFF:
        cutoff = float(band[1]) if band is not None else spec.cutoff
    residual = max((residuals[p] for p in sorted(residuals)), default=0.0)
    return CouplingCoefficients(coupling_b(ensemble, workers), g, variant, cutoff, residual, spec)


def coupling_coefficients(ensemble: Ensemble, variant: Variant | str = Variant.CLOSED,
                          spec: PVQuadratureSpec | None = None, *,
                          workers: int = 1) -> CouplingCoefficients:
    """b and g for any variant; ``closed`` uses the analytic dyadic."""
    variant = Variant(variant)
    if variant is Variant.CLOSED:
        return CouplingCoefficients(coupling_b(ensemble, workers),
                                    coupling_g_closed(ensemble, workers), variant)
    return coupling_g_pv(ensemble, variant, spec, workers=workers)


class LambVariant(str, Enum):
    RWA = "rwa"
    EXTENDED_ANSATZ = "extended_ansatz"
    FULL = "full"


@dataclass(frozen=True)
class LambShift:
    """Cutoff-regularized single-atom frequency integral, in units of omega0^3.

    Only meaningful together with ``cutoff``; it diverges as cutoff^3/3 and is
    never part of the dynamics.
    """

    value: float
    cutoff: float
    variant: LambVariant
    n_atoms: int


def lamb_shift_regularized(variant: LambVariant | str, ensemble: Ensemble,
                           cutoff: float, spec: PVQuadratureSpec | None = None) -> LambShift:
    """P int w^3/(w - 1) over [0, cutoff] (rwa) or [-cutoff, cutoff] (extended_ansatz);
    ``full`` adds 3 (N - 1) int_0^cutoff w^3/(w + 1)."""
    variant = LambVariant(variant)
    if not cutoff >= 10.0:
        raise ValidationError(f"cutoff must be >= 10 omega0, got {cutoff}")
    spec = spec or PVQuadratureSpec(cutoff=cutoff)

    def cube(w):
        return w**3

    if variant is LambVariant.EXTENDED_ANSATZ:
        value = pv_estimate(cube, 1.0, spec, lower=-cutoff, upper=cutoff).value
    else:
        value = pv_estimate(cube, 1.0, spec, lower=0.0, upper=cutoff).value
        if variant is LambVariant.FULL and ensemble.n_atoms > 1:
            value = value + 3 * (ensemble.n_atoms - 1) * ground_state_integral(cutoff, spec)
    return LambShift(float(value), float(cutoff), variant, ensemble.n_atoms)


def ground_state_integral(cutoff: float, spec: PVQuadratureSpec | None = None) -> float:
    """int_0^cutoff w^3/(w + 1) dw by quadrature."""
    return float(plain_integral(lambda w: w**3 / (w + 1.0), 0.0, cutoff, spec))
