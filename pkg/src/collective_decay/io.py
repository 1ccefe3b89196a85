"""Ensemble files (strict JSON) and result bundles (CSV + JSON metadata)."""

from __future__ import annotations

import csv
import json
import os
import platform
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError

from . import __version__
from .ensemble import Ensemble, LengthUnit, channel_labels, make_ensemble
from .errors import ValidationError

OUT_DIR_ENV = "COLLECTIVE_DECAY_OUT_DIR"
FLOAT_FORMAT = "%.17g"


class AtomRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")
    position: tuple[float, float, float]


class EnsembleFile(BaseModel):
    """Schema of an ensemble JSON document; unknown fields are rejected."""

    model_config = ConfigDict(extra="forbid")
    omega0_over_gamma: float = Field(gt=0)
    length_unit: Literal["inverse_k0", "wavelength"] | None = None
    atoms: list[AtomRecord] = Field(min_length=1)


def parse_ensemble(document: dict | str, units: str | None = None) -> Ensemble:
    """Validate an ensemble document (dict or JSON text) and build the Ensemble.

    ``units`` supplies the length unit when the document omits it; a
    conflicting value is an error.
    """
    try:
        if isinstance(document, str):
            record = EnsembleFile.model_validate_json(document)
        else:
            record = EnsembleFile.model_validate(document)
    except PydanticValidationError as exc:
        raise ValidationError(f"invalid ensemble file: {exc}") from None
    unit = record.length_unit
    if units is not None:
        if unit is not None and unit != units:
            raise ValidationError(f"--units {units} conflicts with length_unit {unit} in file")
        unit = units
    return make_ensemble([a.position for a in record.atoms], record.omega0_over_gamma,
                         unit or LengthUnit.INVERSE_K0)


def load_ensemble(path: str | os.PathLike, units: str | None = None) -> Ensemble:
    return parse_ensemble(Path(path).read_text(), units)


def ensemble_document(ensemble: Ensemble) -> dict:
    """Inverse of :func:`parse_ensemble`, in 1/k0 units."""
    return {
        "omega0_over_gamma": ensemble.omega0,
        "length_unit": "inverse_k0",
        "atoms": [{"position": [float(v) for v in p]} for p in ensemble.positions],
    }


def resolve_out_dir(out_dir: str | os.PathLike | None, default: str = "results") -> Path:
    """--out-dir wins, then $COLLECTIVE_DECAY_OUT_DIR, then ``default``."""
    chosen = out_dir or os.environ.get(OUT_DIR_ENV) or default
    path = Path(chosen)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(v: float) -> str:
    return FLOAT_FORMAT % v


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


def write_matrix(path_stem: Path, matrix: np.ndarray, n_atoms: int) -> list[str]:
    """Write real and imaginary parts as two row-major CSVs labelled by channel."""
    labels = channel_labels(n_atoms)
    written = []
    for part, values in (("real", matrix.real), ("imag", matrix.imag)):
        path = path_stem.with_name(f"{path_stem.name}_{part}.csv")
        write_csv(path, ["channel", *labels],
                  ([labels[i], *values[i]] for i in range(len(labels))))
        written.append(path.name)
    return written


def write_trajectory(path: Path, traj, n_atoms: int) -> None:
    labels = channel_labels(n_atoms)
    header = ["time"]
    for lab in labels:
        header += [f"{lab}_re", f"{lab}_im"]
    header += ["population", "emission_rate"]
    rows = []
    for k, t in enumerate(traj.times):
        amps = traj.amplitudes[k]
        row = [t]
        for a in amps:
            row += [a.real, a.imag]
        row += [traj.excited_population[k], traj.emission_rate[k]]
        rows.append(row)
    write_csv(path, header, rows)


def write_eigenmodes(path: Path, modes, n_atoms: int) -> None:
    labels = channel_labels(n_atoms)
    header = ["rate", "shift"]
    for lab in labels:
        header += [f"{lab}_re", f"{lab}_im"]
    rows = []
    for k in range(len(modes.eigenvalues)):
        row = [modes.rates[k], modes.shifts[k]]
        for a in modes.eigenvectors[:, k]:
            row += [a.real, a.imag]
        rows.append(row)
    write_csv(path, header, rows)


def versions() -> dict:
    import pydantic
    return {
        "collective_decay": __version__,
        "numpy": np.__version__,
        "pydantic": pydantic.__version__,
        "python": platform.python_version(),
    }


def write_metadata(out_dir: Path, command: str, parameters: dict, ensemble: Ensemble | None,
                   outputs: list[str], extra: dict | None = None) -> Path:
    """Self-describing metadata: everything needed to re-run the command."""
    meta = {
        "command": command,
        "parameters": parameters,
        "ensemble": ensemble_document(ensemble) if ensemble is not None else None,
        "outputs": sorted(outputs),
        "versions": versions(),
    }
    if extra:
        meta.update(extra)
    path = out_dir / "metadata.json"
    path.write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
