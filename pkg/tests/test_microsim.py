import numpy as np
import pytest

from collective_decay import (FitError, ValidationError, build_generator, build_mode_grid,
                              coupling_coefficients, eigenmodes, extract_rate_and_shift,
                              make_ensemble, microsim_run)
from collective_decay.ensemble import single_excitation, symmetric_excitation
from collective_decay.microsim import coupling_matrix, max_spacing

from conftest import pair

ONE = make_ensemble([[0.0, 0.0, 0.0]])


@pytest.fixture(scope="module")
def single_atom_run():
    grid = build_mode_grid(ONE, 20.0, 80, 9, "rwa", t_final=2.0)
    return microsim_run(ONE, grid, single_excitation(1, 0, 0), 2.0, samples=81)


def test_grid_shapes():
    grid = build_mode_grid(ONE, 20.0, 80, 9, "rwa")
    assert grid.n_modes == len(grid.omega) == len(grid.weight)
    assert grid.band == (980.0, 1020.0)
    assert grid.spacing == pytest.approx(0.5)
    assert grid.alpha_size(2) == 0
    assert np.allclose(np.einsum("mi,mi->m", grid.k_hat, grid.polarization), 0, atol=1e-14)


def test_golden_rule_normalization():
    # 2 pi sum |V|^2 / d_omega over one frequency shell = Gamma (w/w0)^3
    grid = build_mode_grid(ONE, 20.0, 80, 9, "rwa")
    v, detuning = coupling_matrix(ONE, grid, "rwa")
    assert v.shape == (grid.n_modes, 3)
    shell = grid.omega == grid.omega[0]
    rates = 2 * np.pi * np.sum(np.abs(v[shell]) ** 2, axis=0) / grid.spacing
    assert np.allclose(rates, (grid.omega[0] / 1000.0) ** 3, rtol=1e-12)
    assert np.allclose(detuning, grid.omega - 1000.0)


def test_grid_validation():
    with pytest.raises(ValidationError):
        build_mode_grid(ONE, 2000.0, 80, 9, "rwa")
    with pytest.raises(ValidationError):
        build_mode_grid(ONE, 500.0, 80, 9, "full")
    with pytest.raises(ValidationError):
        build_mode_grid(ONE, 20.0, 10, 9, "rwa", t_final=5.0)
    assert max_spacing(1.0) == pytest.approx(2 * np.pi / 5)


def test_single_atom_decay(single_atom_run):
    traj = single_atom_run.trajectory
    assert single_atom_run.norm_drift < 1e-10
    assert np.max(np.abs(traj.excited_population / np.exp(-traj.times) - 1)) < 0.05
    fit = extract_rate_and_shift(traj, (0.2, 2.0))
    assert fit.rate == pytest.approx(1.0, rel=0.05)
    assert not single_atom_run.virtual_population.any()


def test_pair_rates_follow_eigenmodes():
    ens = pair(0.5)
    grid = build_mode_grid(ens, 20.0, 80, 9, "rwa", t_final=2.0)
    modes = eigenmodes(build_generator(ens, coupling_coefficients(ens)))
    for sign in (1, -1):
        beta0 = symmetric_excitation(2, 0, sign)
        fit = extract_rate_and_shift(microsim_run(ens, grid, beta0, 2.0, samples=81).trajectory,
                                     (0.2, 2.0))
        k = int(np.argmax(np.abs(modes.eigenvectors.conj().T @ beta0)))
        assert fit.rate == pytest.approx(modes.rates[k], rel=0.1, abs=0.01)


def test_full_sector_small():
    ens = pair(0.5, omega0=20.0)
    grid = build_mode_grid(ens, 60.0, 60, 5, "full", t_final=0.5)
    run = microsim_run(ens, grid, symmetric_excitation(2, 0), 0.5, samples=21)
    assert run.norm_drift < 1e-8
    assert run.virtual_population.max() > 0
    assert run.virtual_population.max() * ens.omega0 < 10
    assert grid.alpha_size(2) == 9 * grid.n_modes


def test_full_sector_scope():
    three = make_ensemble([[0, 0, 0], [0, 0, 1], [0, 0, 2]], 20.0)
    grid = build_mode_grid(three, 60.0, 60, 5, "full")
    with pytest.raises(ValidationError):
        microsim_run(three, grid, single_excitation(3, 0, 0), 0.5, "full")


def test_run_validation():
    grid = build_mode_grid(ONE, 20.0, 80, 9, "rwa")
    with pytest.raises(ValidationError):
        microsim_run(ONE, grid, np.ones(3), 1.0)
    with pytest.raises(ValidationError):
        microsim_run(ONE, grid, single_excitation(1, 0, 0), 50.0)


def test_fit_errors(single_atom_run):
    traj = single_atom_run.trajectory
    with pytest.raises(FitError):
        extract_rate_and_shift(traj, (1.0, 5.0))
    with pytest.raises(FitError):
        extract_rate_and_shift(traj, (1.0, 1.01))
