"""Atomic ensembles, unit conventions and channel indexing.

Units: hbar = c = 1, the single-atom decay rate is the unit of rate
(``gamma == 1``) and lengths are stored as ``k0 * r`` (units of 1/k0).
Channels are ordered atom-major, Zeeman-minor: ``flat = 3 * atom + eta + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DegenerateGeometry, ValidationError

ZEEMAN = (-1, 0, 1)
DEFAULT_OMEGA0 = 1000.0


class LengthUnit(str, Enum):
    INVERSE_K0 = "inverse_k0"
    WAVELENGTH = "wavelength"


@dataclass(frozen=True)
class Ensemble:
    """Immutable set of atoms at rest plus the transition parameters.

    Attributes:
        positions: (N, 3) array of positions in units of 1/k0.
        omega0: transition angular frequency in units of the decay rate.
        gamma: single-atom decay rate, always 1.
    """

    positions: np.ndarray
    omega0: float = DEFAULT_OMEGA0
    gamma: float = field(default=1.0, init=False)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float, copy=True)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValidationError(f"positions must have shape (N, 3) with N >= 1, got {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ValidationError("positions must be finite")
        if not (np.isfinite(self.omega0) and self.omega0 > 0):
            raise ValidationError(f"omega0 must be positive and finite, got {self.omega0}")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "omega0", float(self.omega0))
        d = self.separations()
        iu = np.triu_indices(len(pos), 1)
        if np.any(d[iu] <= 0.0):
            l, j = (int(v[0]) for v in np.nonzero(np.triu(d == 0.0, 1)))
            raise DegenerateGeometry(f"atoms {l} and {j} occupy the same position")

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]

    @property
    def n_channels(self) -> int:
        return 3 * self.n_atoms

    def separations(self) -> np.ndarray:
        """Pairwise dimensionless distances x_lj = |k0 (r_l - r_j)|."""
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def separation_vector(self, l: int, j: int) -> np.ndarray:
        return self.positions[l] - self.positions[j]


def make_ensemble(positions: Sequence[Sequence[float]], omega0: float = DEFAULT_OMEGA0,
                  length_unit: str | LengthUnit = LengthUnit.INVERSE_K0) -> Ensemble:
    """Build an :class:`Ensemble`, converting wavelength units to 1/k0 (factor 2*pi)."""
    try:
        unit = LengthUnit(length_unit)
    except ValueError:
        raise ValidationError(f"unknown length unit {length_unit!r}") from None
    try:
        pos = np.asarray(positions, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"positions are not numeric: {exc}") from None
    if unit is LengthUnit.WAVELENGTH:
        pos = to_inverse_k0(pos)
    return Ensemble(pos, omega0)


def to_inverse_k0(wavelength_lengths):
    return np.asarray(wavelength_lengths, dtype=float) * (2.0 * np.pi)


def to_wavelength(inverse_k0_lengths):
    return np.asarray(inverse_k0_lengths, dtype=float) / (2.0 * np.pi)


@dataclass(frozen=True)
class ChannelIndex:
    atom: int
    zeeman: int
    flat: int

    @property
    def label(self) -> str:
        return f"atom{self.atom}_m{self.zeeman}"


def channel(atom: int, zeeman: int, n_atoms: int | None = None) -> ChannelIndex:
    """Map (atom, Zeeman index) to the flat channel index 3*atom + zeeman + 1."""
    if zeeman not in ZEEMAN:
        raise ValidationError(f"zeeman index must be one of -1, 0, 1, got {zeeman}")
    if atom < 0 or (n_atoms is not None and atom >= n_atoms):
        raise ValidationError(f"atom index {atom} out of range for N={n_atoms}")
    return ChannelIndex(int(atom), int(zeeman), 3 * int(atom) + int(zeeman) + 1)


def channel_from_flat(flat: int, n_atoms: int | None = None) -> ChannelIndex:
    if flat < 0 or (n_atoms is not None and flat >= 3 * n_atoms):
        raise ValidationError(f"flat channel {flat} out of range")
    atom, rem = divmod(int(flat), 3)
    return ChannelIndex(atom, rem - 1, int(flat))


def channel_labels(n_atoms: int) -> list[str]:
    return [channel_from_flat(a).label for a in range(3 * n_atoms)]


def normalized(amplitudes) -> np.ndarray:
    """Return a complex copy of ``amplitudes`` scaled to unit norm."""
    v = np.asarray(amplitudes, dtype=complex).ravel()
    nrm = np.linalg.norm(v)
    if nrm == 0.0 or not np.isfinite(nrm):
        raise ValidationError("amplitude vector must have finite nonzero norm")
    return v / nrm


def single_excitation(n_atoms: int, atom: int, zeeman: int) -> np.ndarray:
    v = np.zeros(3 * n_atoms, dtype=complex)
    v[channel(atom, zeeman, n_atoms).flat] = 1.0
    return v


def symmetric_excitation(n_atoms: int, zeeman: int, sign: int = 1) -> np.ndarray:
    """Equal-weight superposition of all atoms in one Zeeman channel.

    ``sign=-1`` alternates the sign atom to atom (the antisymmetric pair state
    for N = 2).
    """
    v = np.zeros(3 * n_atoms, dtype=complex)
    for atom in range(n_atoms):
        v[channel(atom, zeeman, n_atoms).flat] = float(sign) ** atom
    return v / np.sqrt(n_atoms)
