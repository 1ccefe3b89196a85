"""Principal-value quadrature for oscillatory integrands with a simple pole.

Integrals of the form  P int f(w) / (w - p) dw  are split into a window
[p - h, p + h] around the pole, integrated with symmetric pairing
(f(p+v) - f(p-v)) / v, and outer regions covered by composite Gauss-Legendre
panels sized to the oscillation period of ``f``.

Over infinite ranges the integrand is damped by exp(-eps |w| / p) for each eps
in a decreasing sequence and the results are extrapolated to eps = 0 with the
interpolating polynomial. This assigns finite (Abel) values to integrals such
as P int k^2 sin(kR)/(k - k0) dk that do not converge in the ordinary sense.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConvergenceError, ValidationError

GL_ORDER = 8
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)

# regulated integrals are carried out to where exp(-eps w / p) < exp(-TAIL_EXPONENT)
TAIL_EXPONENT = 40.0


@dataclass(frozen=True)
class PVQuadratureSpec:
    """Numerical parameters of the principal-value engine.

    Attributes:
        cutoff: upper limit in units of the pole frequency. Hard limit for
            cutoff-dependent integrals; minimum extent for regulated ones.
        epsilon_sequence: regulator strengths, strictly decreasing.
        nodes_per_oscillation: quadrature nodes per period of the integrand.
        singularity_halfwidth: half-width of the pole window, units of the pole.
        rtol: tolerance on the extrapolation residual, relative to the
            magnitude of the regulated estimates.
    """

    cutoff: float = 40.0
    epsilon_sequence: tuple[float, ...] = (0.04, 0.02, 0.01, 0.005)
    nodes_per_oscillation: int = 16
    singularity_halfwidth: float = 0.2
    rtol: float = 1e-3

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilon_sequence)
        object.__setattr__(self, "epsilon_sequence", eps)
        if not self.cutoff >= 10.0:
            raise ValidationError(f"cutoff must be >= 10 (units of omega0), got {self.cutoff}")
        if len(eps) < 3 or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValidationError("epsilon_sequence needs >= 3 positive, strictly decreasing values")
        if self.nodes_per_oscillation < 8:
            raise ValidationError("nodes_per_oscillation must be >= 8")
        if not 0.0 < self.singularity_halfwidth < 1.0:
            raise ValidationError("singularity_halfwidth must lie in (0, 1)")

    def refined(self) -> "PVQuadratureSpec":
        """Spec with doubled cutoff and node density, for convergence checks."""
        return PVQuadratureSpec(2 * self.cutoff, self.epsilon_sequence,
                                2 * self.nodes_per_oscillation,
                                self.singularity_halfwidth, self.rtol)

    def as_dict(self) -> dict:
        return {
            "cutoff": self.cutoff,
            "epsilon_sequence": list(self.epsilon_sequence),
            "nodes_per_oscillation": self.nodes_per_oscillation,
            "singularity_halfwidth": self.singularity_halfwidth,
            "rtol": self.rtol,
        }


@dataclass(frozen=True)
class PVResult:
    value: np.ndarray | float
    residual: float
    estimates: tuple = field(default=())
    regulated: bool = True


def panel_rule(a: float, b: float, width: float) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [a, b] with panels <= ``width``."""
    if b <= a:
        return np.empty(0), np.empty(0)
    n = max(1, int(np.ceil((b - a) / width)))
    edges = np.linspace(a, b, n + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


def _integrate(fn, a, b, width):
    nodes, weights = panel_rule(a, b, width)
    if nodes.size == 0:
        return 0.0
    return np.tensordot(weights, fn(nodes), axes=(0, 0))


def _panel_width(spec, frequency, pole):
    per_osc = spec.nodes_per_oscillation / GL_ORDER
    width = 2.0 * np.pi / (max(abs(frequency), 1e-12) * per_osc)
    return min(width, 0.25 * abs(pole))


def _divide(values, denom):
    values = np.asarray(values)
    return values / denom.reshape((-1,) + (1,) * (values.ndim - 1))


def _pv_fixed(fn, pole, lower, upper, spec, frequency):
    """Plain principal value of fn(w)/(w - pole) over [lower, upper]."""
    width = _panel_width(spec, frequency, pole)

    def outer(w):
        return _divide(fn(w), w - pole)

    if not lower < pole < upper:
        return _integrate(outer, lower, upper, width)
    h = min(spec.singularity_halfwidth * abs(pole), pole - lower, upper - pole)

    def paired(v):
        return _divide(fn(pole + v) - fn(pole - v), v)

    total = _integrate(paired, 0.0, h, min(width, h / 4.0))
    total = total + _integrate(outer, lower, pole - h, width)
    total = total + _integrate(outer, pole + h, upper, width)
    return total


def extrapolate_to_zero(eps, values):
    """Polynomial extrapolation to eps = 0 and a residual from dropping the largest eps."""
    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(values)
    flat = vals.reshape(len(eps), -1)

    def at_zero(e, v):
        vander = np.vander(e / e[0], len(e), increasing=True)
        return np.linalg.solve(vander, v)[0]

    full = at_zero(eps, flat)
    reduced = at_zero(eps[1:], flat[1:])
    residual = np.abs(full - reduced)
    scale = np.max(np.abs(flat), axis=0)
    return full.reshape(vals.shape[1:]), residual.reshape(vals.shape[1:]), scale.reshape(vals.shape[1:])


def pv_estimate(f: Callable[[np.ndarray], np.ndarray], pole: float = 1.0,
                spec: PVQuadratureSpec | None = None, *, lower: float = 0.0,
                upper: float = np.inf, frequency: float = 1.0,
                second_pole: float | None = None) -> PVResult:
    """Principal value of f(w)/(w - pole) over [lower, upper].

    Args:
        f: numerator, vectorized over its first axis; may return extra
            trailing axes to integrate several functions on shared nodes.
        pole: location of the simple pole (> 0); also sets the regulator scale.
        spec: numerical parameters.
        lower, upper: integration limits; infinite limits switch on the
            exp(-eps|w|/pole) regulator and eps -> 0 extrapolation.
        frequency: angular frequency of the oscillation of ``f`` in w, used to
            size the panels.
        second_pole: if given, adds the integral of f(w)/(w + second_pole)
            over the same range (the counter-rotating denominator); must not
            lie inside the range.

    Raises:
        ConvergenceError: extrapolation residual above ``spec.rtol``.
    """
    spec = spec or PVQuadratureSpec()
    if not pole > 0:
        raise ValidationError("pole must be positive")
    if lower >= upper:
        raise ValidationError("lower limit must be below the upper limit")

    def with_counter(fn, lo, hi):
        total = _pv_fixed(fn, pole, lo, hi, spec, frequency)
        if second_pole is not None:
            if lo < -second_pole < hi:
                raise ValidationError("counter-rotating pole inside the integration range")
            width = _panel_width(spec, frequency, pole)

            def counter(w):
                return _divide(fn(w), w + second_pole)

            total = total + _integrate(counter, lo, hi, width)
        return total

    if np.isfinite(lower) and np.isfinite(upper):
        val = with_counter(f, lower, upper)
        return PVResult(val, 0.0, (val,), regulated=False)

    estimates = []
    for eps in spec.epsilon_sequence:
        extent = max(spec.cutoff, TAIL_EXPONENT / eps) * pole
        lo = lower if np.isfinite(lower) else -extent
        hi = upper if np.isfinite(upper) else extent

        def damped(w, eps=eps):
            return _divide(f(w), np.exp(eps * np.abs(w) / pole))

        estimates.append(with_counter(damped, lo, hi))
    value, residual, scale = extrapolate_to_zero(spec.epsilon_sequence, estimates)
    rel = np.max(residual / np.maximum(scale, np.finfo(float).tiny))
    if rel > spec.rtol:
        raise ConvergenceError(
            f"eps-extrapolation residual {rel:.3g} exceeds rtol {spec.rtol:.3g}", float(rel))
    return PVResult(value, float(rel), tuple(estimates))


def plain_integral(f, lower: float, upper: float, spec: PVQuadratureSpec | None = None,
                   frequency: float = 1.0, scale: float = 1.0):
    """Ordinary integral of a smooth (possibly oscillatory) f over a finite range."""
    spec = spec or PVQuadratureSpec()
    return _integrate(f, lower, upper, _panel_width(spec, frequency, scale))


def pv_integral(f, pole: float = 1.0, spec: PVQuadratureSpec | None = None, **kwargs):
    """Value of :func:`pv_estimate`."""
    return pv_estimate(f, pole, spec, **kwargs).value
