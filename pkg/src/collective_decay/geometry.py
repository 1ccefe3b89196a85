"""Dipole basis vectors, polarization frames, exchange dyadics and sphere quadrature."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, ValidationError

SQRT_HALF = np.sqrt(0.5)

# rows indexed by eta + 1: d_up[eta + 1] is the excitation vector d_{eta g}
D_UP = np.array([
    [SQRT_HALF, -1j * SQRT_HALF, 0.0],
    [0.0, 0.0, 1.0],
    [SQRT_HALF, 1j * SQRT_HALF, 0.0],
], dtype=complex)
D_DOWN = D_UP.conj()

# below this argument the near-field bracket of tau is evaluated by its Taylor series
TAU_SERIES_SWITCH = 1e-2


@dataclass(frozen=True)
class DipoleBasis:
    d_up: np.ndarray = D_UP
    d_down: np.ndarray = D_DOWN

    def up(self, eta: int) -> np.ndarray:
        return self.d_up[eta + 1]

    def down(self, nu: int) -> np.ndarray:
        return self.d_down[nu + 1]


DIPOLES = DipoleBasis()


class DyadicKind(str, Enum):
    TAU = "tau"
    GAMMA = "gamma"


@dataclass(frozen=True)
class DyadicTensor:
    m: np.ndarray
    x: float
    kind: DyadicKind


def _unit(v, what="vector", tol=1e-12):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValidationError(f"{what} must be a finite 3-vector")
    n = np.linalg.norm(v)
    if abs(n - 1.0) > tol:
        raise ValidationError(f"{what} must have unit length (|v| = {n!r})")
    return v


def _projectors(r_hat):
    rr = np.outer(r_hat, r_hat)
    eye = np.eye(3)
    return eye - rr, eye - 3.0 * rr


def tau_radial(x):
    """Radial factors (sin x/x, cos x/x^2 - sin x/x^3) of the tau dyadic.

    Vectorized over ``x``; even in ``x`` and regular at the origin.
    """
    x = np.asarray(x, dtype=float)
    far = np.sinc(x / np.pi)
    near = np.empty_like(x)
    ax = np.abs(x)
    small = ax < TAU_SERIES_SWITCH
    xs = x[small] ** 2
    near[small] = -1.0 / 3.0 + xs / 30.0 - xs * xs / 840.0
    xl = x[~small]
    near[~small] = np.cos(xl) / xl**2 - np.sin(xl) / xl**3
    return far, near


def gamma_radial(x):
    """Radial factors of the dispersive dyadic: (cos x/x, -(sin x/x^2 + cos x/x^3))."""
    x = np.asarray(x, dtype=float)
    return np.cos(x) / x, -(np.sin(x) / x**2 + np.cos(x) / x**3)


def tau_dyadic(x: float, r_hat=(0.0, 0.0, 1.0)) -> DyadicTensor:
    """Transverse exchange dyadic tau(x) for separation direction ``r_hat``.

    tau = [I - RR] sin x/x + [I - 3RR] (cos x/x^2 - sin x/x^3), which tends to
    (2/3) I as x -> 0.
    """
    if not x > 0:
        raise DomainError(f"tau_dyadic requires x > 0, got {x}")
    p1, p2 = _projectors(_unit(r_hat, "r_hat"))
    far, near = tau_radial(np.array([x]))
    return DyadicTensor(p1 * far[0] + p2 * near[0], float(x), DyadicKind.TAU)


def gamma_dyadic(x: float, r_hat=(0.0, 0.0, 1.0)) -> DyadicTensor:
    """Dispersive dyadic whose contraction gives the collective level shifts.

    gamma = [I - RR] cos x/x - [I - 3RR] (sin x/x^2 + cos x/x^3).

    The relative sign and normalization are those produced by the
    principal-value frequency integral of x^3 tau(x)/(x - x0) over the whole
    real line (divided by pi); see ``couplings.coupling_g_pv``. Diverges as
    2/x^3 in the near field; no small-x treatment.
    """
    if not x > 0:
        raise DomainError(f"gamma_dyadic requires x > 0, got {x}")
    p1, p2 = _projectors(_unit(r_hat, "r_hat"))
    far, near = gamma_radial(x)
    return DyadicTensor(p1 * float(far) + p2 * float(near), float(x), DyadicKind.GAMMA)


def contract(m: np.ndarray) -> np.ndarray:
    """Zeeman-resolved contraction d_{eta g} . m . d_{g nu} as a 3x3 (eta, nu) block."""
    return D_UP @ m @ D_DOWN.T


@dataclass(frozen=True)
class PolarizationFrame:
    k_hat: np.ndarray
    eps1: np.ndarray
    eps2: np.ndarray


_POLE_TOL = 1e-9


def polarization_frame(k_hat) -> PolarizationFrame:
    """Deterministic real transverse frame (eps1, eps2, k_hat), right-handed.

    eps1 = normalize(z x k_hat), falling back to x-hat near the poles.
    """
    k = _unit(k_hat, "k_hat")
    if abs(k[2]) > 1.0 - _POLE_TOL:
        e1 = np.array([1.0, 0.0, 0.0])
        e1 = e1 - np.dot(e1, k) * k
    else:
        e1 = np.cross([0.0, 0.0, 1.0], k)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(k, e1)
    return PolarizationFrame(k, e1, e2)


def polarization_frames(k_hats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`polarization_frame` for an (M, 3) array; returns (eps1, eps2)."""
    k = np.asarray(k_hats, dtype=float)
    e1 = np.cross(np.array([0.0, 0.0, 1.0]), k)
    pole = np.abs(k[:, 2]) > 1.0 - _POLE_TOL
    if np.any(pole):
        x = np.array([1.0, 0.0, 0.0])
        e1[pole] = x - k[pole, :1] * k[pole]
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(k, e1)
    return e1, e2


def polarization_sum(eta: int, nu: int, k_hat) -> complex:
    """C_{eta nu} = d_{eta g} . (I - kk) . d_{g nu}."""
    if eta not in (-1, 0, 1) or nu not in (-1, 0, 1):
        raise ValidationError("Zeeman indices must be -1, 0 or 1")
    k = _unit(k_hat, "k_hat")
    return complex(D_UP[eta + 1] @ (np.eye(3) - np.outer(k, k)) @ D_DOWN[nu + 1])


def explicit_polarization_sum(eta: int, nu: int, k_hat) -> complex:
    """Sum over the two real polarizations of (d_{eta g}.eps)(d_{g nu}.eps)."""
    f = polarization_frame(k_hat)
    return complex(sum((D_UP[eta + 1] @ e) * (D_DOWN[nu + 1] @ e) for e in (f.eps1, f.eps2)))


@dataclass(frozen=True)
class AngularQuadrature:
    """Nodes on the unit sphere with positive weights summing to 4*pi.

    ``order`` is the spherical-harmonic degree integrated exactly.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 3 or len(w) != len(nodes):
            raise ValidationError("quadrature needs (M, 3) nodes and M weights")
        if np.any(w <= 0):
            raise ValidationError("quadrature weights must be positive")
        if np.max(np.abs(np.linalg.norm(nodes, axis=1) - 1.0)) > 1e-12:
            raise ValidationError("quadrature nodes must be unit vectors")
        if abs(w.sum() - 4 * np.pi) > 1e-12:
            raise ValidationError(f"weights sum to {w.sum()!r}, expected 4*pi")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.weights)


def product_quadrature(order: int) -> AngularQuadrature:
    """Gauss-Legendre in cos(theta) times the trapezoid rule in phi.

    Exact for spherical harmonics of degree <= ``order``.
    """
    if order < 1:
        raise ValidationError("quadrature order must be >= 1")
    n_theta = order // 2 + 1
    n_phi = order + 1
    mu, w_mu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    sin_t = np.sqrt(1.0 - mu**2)
    nodes = np.stack([
        np.outer(sin_t, np.cos(phi)).ravel(),
        np.outer(sin_t, np.sin(phi)).ravel(),
        np.repeat(mu, n_phi),
    ], axis=1)
    weights = np.repeat(w_mu, n_phi) * (2.0 * np.pi / n_phi)
    # fix the last bits so the weight-sum invariant holds to rounding
    weights *= 4.0 * np.pi / weights.sum()
    return AngularQuadrature(nodes, weights, order)


def angular_average_projector(quad: AngularQuadrature) -> np.ndarray:
    """Quadrature estimate of the integral of (I - kk) over the sphere, (8 pi/3) I."""
    k = quad.nodes
    kk = np.einsum("m,mi,mj->ij", quad.weights, k, k)
    return quad.weights.sum() * np.eye(3) - kk


def angular_transform(quad: AngularQuadrature, k: float, r_vec) -> np.ndarray:
    """Complex quadrature of the integral of exp(-i k khat.R) (I - khat khat)."""
    r = np.asarray(r_vec, dtype=float)
    if not np.linalg.norm(r) > 0:
        raise ValidationError("R must be nonzero")
    n = quad.nodes
    w = quad.weights * np.exp(-1j * k * (n @ r))
    out = np.sum(w) * np.eye(3) - np.einsum("m,mi,mj->ij", w, n, n)
    return 0.5 * (out + out.T)


def angular_transform_to_tau(quad: AngularQuadrature, k: float, r_vec) -> np.ndarray:
    """Real part of :func:`angular_transform`; approximates 4 pi tau(k|R|)."""
    return angular_transform(quad, k, r_vec).real


def spin1_rotation(q: np.ndarray) -> np.ndarray:
    """Matrix D with Q d_{nu g} = sum_eta d_{eta g} D[eta, nu] for a rotation Q."""
    return D_DOWN @ np.asarray(q, dtype=float) @ D_UP.T
