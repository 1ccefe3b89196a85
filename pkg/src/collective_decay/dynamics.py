"""Effective non-Hermitian generator, collective eigenmodes and amplitude evolution.

The amplitudes obey  d beta/dt = M beta  with

    M = -(Gamma/2) I - (3 Gamma/4) (b - i g),

in the frame rotating at the (Lamb-shift renormalized) transition frequency.
Eigenvalues are written lambda_k = -Gamma_k/2 - i Delta_k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .couplings import CouplingCoefficients, Variant
from .ensemble import Ensemble
from .errors import NumericalError, ValidationError

# RK4 step is at most STEP_FACTOR / rho, rho bounding the interaction-picture generator
STEP_FACTOR = 0.05
NORMAL_TOL = 1e-13
MAX_STEPS = 20_000_000


@dataclass(frozen=True)
class EffectiveGenerator:
    m: np.ndarray
    variant: Variant

    @property
    def n_channels(self) -> int:
        return self.m.shape[0]

    def decay_matrix(self) -> np.ndarray:
        """-(M + M^dagger): Hermitian, positive semidefinite for physical couplings."""
        return -(self.m + self.m.conj().T)


def build_generator(ensemble: Ensemble, coefficients: CouplingCoefficients) -> EffectiveGenerator:
    n = ensemble.n_channels
    if coefficients.b.shape != (n, n) or coefficients.g.shape != (n, n):
        raise ValidationError(
            f"coupling matrices have shape {coefficients.b.shape}, expected {(n, n)}")
    gam = ensemble.gamma
    m = -0.5 * gam * np.eye(n) - 0.75 * gam * (coefficients.b - 1j * coefficients.g)
    return EffectiveGenerator(m, coefficients.variant)


@dataclass(frozen=True)
class EigenmodeSet:
    """Eigenvalues sorted by decay rate (descending) and unit eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def rates(self) -> np.ndarray:
        return -2.0 * self.eigenvalues.real

    @property
    def shifts(self) -> np.ndarray:
        return -self.eigenvalues.imag

    def reconstruct(self, initial, times) -> np.ndarray:
        """sum_k c_k exp(lambda_k t) v_k for each t; rows are times."""
        coeffs = np.linalg.solve(self.eigenvectors, np.asarray(initial, dtype=complex))
        phases = np.exp(np.outer(np.asarray(times, dtype=float), self.eigenvalues))
        return (phases * coeffs) @ self.eigenvectors.T


def _fix_phase(v):
    mag = np.abs(v)
    k = int(np.flatnonzero(mag >= mag.max() * (1 - 1e-12))[0])
    return v * (abs(v[k]) / v[k])


def eigenmodes(gen: EffectiveGenerator, degeneracy_tol: float = 1e-9) -> EigenmodeSet:
    """Complete eigendecomposition with a deterministic basis.

    Modes are sorted by decay rate (descending), then by shift. Eigenvectors
    of numerically degenerate eigenvalues are orthonormalized; every vector is
    normalized with its largest-magnitude entry made real and positive.
    """
    try:
        vals, vecs = np.linalg.eig(gen.m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigen solver failed: {exc}") from None
    if not np.all(np.isfinite(vals)):
        raise NumericalError("eigen solver returned non-finite eigenvalues")
    scale = max(1.0, float(np.max(np.abs(vals))))
    rates = np.round(-2.0 * vals.real / (scale * degeneracy_tol)) * degeneracy_tol
    shifts = np.round(-vals.imag / (scale * degeneracy_tol)) * degeneracy_tol
    order = np.lexsort((shifts, -rates))
    vals, vecs = vals[order], vecs[:, order]

    out = np.empty_like(vecs)
    start = 0
    n = len(vals)
    while start < n:
        stop = start + 1
        while stop < n and abs(vals[stop] - vals[start]) <= degeneracy_tol * scale:
            stop += 1
        block = vecs[:, start:stop]
        if stop - start > 1:
            block, _ = np.linalg.qr(block)
        for k in range(block.shape[1]):
            v = block[:, k] / np.linalg.norm(block[:, k])
            out[:, start + k] = _fix_phase(v)
        start = stop
    herm, anti = _split(gen.m)
    comm = np.linalg.norm(herm @ anti - anti @ herm, np.inf)
    if comm <= NORMAL_TOL * len(vals) * np.linalg.norm(herm, np.inf) * np.linalg.norm(anti, np.inf):
        # normal generator: orthonormal eigenvectors, and the decay part alone
        # gives the real parts without the round-off of the large dispersive part
        decay = np.einsum("ik,ij,jk->k", out.conj(), herm, out).real
        vals = decay + 1j * vals.imag
    return EigenmodeSet(vals, out)


@dataclass(frozen=True)
class TrajectoryResult:
    """Sampled amplitudes; ``emission_rate`` is -d/dt of ``excited_population``."""

    times: np.ndarray
    amplitudes: np.ndarray
    excited_population: np.ndarray
    emission_rate: np.ndarray
    step: float = 0.0

    @property
    def final(self) -> np.ndarray:
        return self.amplitudes[-1]


def _split(m):
    herm = 0.5 * (m + m.conj().T)
    anti = 0.5 * (m - m.conj().T)
    return herm, anti


def step_rate_bound(gen: EffectiveGenerator) -> float:
    """Rate scale rho of the interaction-picture generator used to size RK4 steps.

    With M = K + i H (K, H Hermitian) the integration runs on
    exp(-iHt) K exp(iHt); its magnitude is bounded by ||K|| and its rate of
    change by ||[H, K]|| / ||K||. Infinity norms are used as cheap bounds.
    """
    herm, anti = _split(gen.m)
    k_norm = np.linalg.norm(herm, np.inf)
    comm = anti @ herm - herm @ anti
    return float(k_norm + np.linalg.norm(comm, np.inf) / max(k_norm, 1e-300))


def evolve(gen: EffectiveGenerator, initial, t_final: float, dt_max: float = 0.01,
           samples: int = 201) -> TrajectoryResult:
    """Integrate d beta/dt = M beta with fixed-step fourth-order Runge-Kutta.

    The dispersive (anti-Hermitian) part of M is integrated exactly as an
    integrating factor and RK4 is applied to the remaining decay part in that
    interaction picture (Lawson's method). This keeps the step independent of
    the near-field 1/x^3 growth of g whenever it commutes with b. Step:
    h <= min(dt_max, 0.05 / rho) with rho from :func:`step_rate_bound`; the
    local error is O((h rho)^5) relative.

    Args:
        gen: effective generator.
        initial: unit-norm initial amplitudes (length 3N).
        t_final: final time, units of 1/Gamma.
        dt_max: upper bound on the step.
        samples: number of equally spaced output times including 0 and t_final.

    Raises:
        NumericalError: if the step bound requires more than MAX_STEPS steps.
    """
    beta0 = np.asarray(initial, dtype=complex).ravel()
    if beta0.shape != (gen.n_channels,):
        raise ValidationError(f"initial state must have length {gen.n_channels}")
    if abs(np.linalg.norm(beta0) - 1.0) > 1e-10:
        raise ValidationError("initial state must be normalized")
    if not t_final > 0 or not dt_max > 0:
        raise ValidationError("t_final and dt_max must be positive")
    samples = max(2, int(samples))

    h_max = min(dt_max, STEP_FACTOR / step_rate_bound(gen))
    stride = int(np.ceil(t_final / h_max / (samples - 1)))
    n_steps = stride * (samples - 1)
    if n_steps > MAX_STEPS:
        raise NumericalError(
            f"step-size underflow: {n_steps} steps of {t_final / n_steps:.3g} required")
    h = t_final / n_steps

    herm, anti = _split(gen.m)
    # anti = i H with H Hermitian; exp(s * anti) = U exp(i s w) U^dagger
    w, u = np.linalg.eigh(-1j * anti)
    u_dag = u.conj().T

    def flow(s):
        return (u * np.exp(1j * s * w)) @ u_dag

    half, full = flow(0.5 * h), flow(h)
    # Lawson RK4 for v(t) = exp(-t A) beta with A = anti; stages expressed in beta
    ks = herm
    amps = np.empty((samples, gen.n_channels), dtype=complex)
    amps[0] = beta0
    beta = beta0.copy()
    for i in range(1, n_steps + 1):
        k1 = ks @ beta
        y2 = half @ (beta + 0.5 * h * k1)
        k2 = ks @ y2
        y3 = half @ beta + 0.5 * h * k2
        k3 = ks @ y3
        y4 = full @ beta + h * (half @ k3)
        k4 = ks @ y4
        beta = full @ beta + (h / 6.0) * (full @ k1 + 2.0 * half @ (k2 + k3)) + (h / 6.0) * k4
        if i % stride == 0:
            amps[i // stride] = beta
    times = np.linspace(0.0, t_final, samples)
    pop = np.einsum("ti,ti->t", amps.conj(), amps).real
    emission = -2.0 * np.einsum("ti,ij,tj->t", amps.conj(), herm, amps).real
    return TrajectoryResult(times, amps, pop, emission, h)
