import numpy as np
import pytest

from collective_decay import (PVQuadratureSpec, ValidationError, Variant, coupling_b,
                              coupling_coefficients, coupling_g_closed, coupling_g_pv,
                              lamb_shift_regularized, make_ensemble)
from collective_decay.couplings import (counter_rotating_integrals, ground_state_integral,
                                        radial_dispersive_integrals)
from collective_decay.geometry import gamma_radial, spin1_rotation, tau_radial
from collective_decay.pv import pv_estimate

from conftest import pair


def random_ensemble(rng, n):
    while True:
        pos = rng.uniform(-2, 2, size=(n, 3))
        d = np.linalg.norm(pos[:, None] - pos[None], axis=-1)
        if d[np.triu_indices(n, 1)].min() > 0.4:
            return make_ensemble(pos)


def test_single_atom_is_zero():
    ens = make_ensemble([[0, 0, 0]])
    c = coupling_coefficients(ens)
    assert not c.b.any() and not c.g.any()
    assert c.b.shape == (3, 3)


def test_hermitian_with_zero_diagonal_blocks(rng):
    ens = random_ensemble(rng, 4)
    for m in (coupling_b(ens), coupling_g_closed(ens)):
        assert np.abs(m - m.conj().T).max() < 1e-14
        for l in range(4):
            assert not m[3 * l:3 * l + 3, 3 * l:3 * l + 3].any()


def test_dicke_limit_b():
    b = coupling_b(pair(1e-5))
    assert np.allclose(b[:3, 3:], 2 / 3 * np.eye(3), atol=1e-9)


def test_pi_contraction_along_axis():
    # d_0 . tau(x, z) . d_0 = tau_zz
    b = coupling_b(pair(np.pi))
    assert b[1, 4].real == pytest.approx(2 / np.pi**2, rel=1e-12)


def test_workers_do_not_change_results(rng):
    ens = random_ensemble(rng, 5)
    assert np.array_equal(coupling_b(ens, workers=1), coupling_b(ens, workers=4))
    assert np.array_equal(coupling_g_closed(ens, workers=1), coupling_g_closed(ens, workers=3))


def test_b_rotation_covariance(rng):
    ens = random_ensemble(rng, 3)
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q = -q
    rotated = make_ensemble(ens.positions @ q.T)
    big = np.kron(np.eye(3), spin1_rotation(q))
    for fn in (coupling_b, coupling_g_closed):
        assert np.abs(big.conj() @ fn(ens) @ big.T - fn(rotated)).max() < 1e-12


@pytest.mark.parametrize("x", [0.3, 1.0, 5.0])
def test_extended_integrals_match_closed_radial(x):
    coeffs, residual = radial_dispersive_integrals(x, Variant.EXTENDED)
    far, near = gamma_radial(np.array([x]))
    assert np.allclose(coeffs, [far[0], near[0]], rtol=1e-4)
    assert residual < 1e-3


def test_full_numeric_matches_extended():
    ext, _ = radial_dispersive_integrals(0.7, Variant.EXTENDED)
    full, _ = radial_dispersive_integrals(0.7, Variant.FULL_NUMERIC)
    assert np.allclose(full, ext, rtol=1e-8)


def test_rwa_plus_counter_is_symmetric_hard_cut():
    # with odd numerator w^3 tau(wx), the [-L, 0] half maps onto the (w + 1) term
    x, cutoff = 0.8, 20.0
    spec = PVQuadratureSpec(cutoff=cutoff)
    rwa, _ = radial_dispersive_integrals(x, Variant.RWA_CUTOFF, spec)
    counter = counter_rotating_integrals(x, cutoff, spec)

    def numerator(w):
        far, near = tau_radial(w * x)
        return (w**3)[:, None] * np.stack([far, near], axis=1)

    whole = pv_estimate(numerator, 1.0, spec, lower=-cutoff, upper=cutoff, frequency=x).value / np.pi
    assert np.allclose(rwa + counter, whole, rtol=1e-9)


def test_rwa_cutoff_differs_from_extended():
    ens = pair(0.5)
    rwa = coupling_g_pv(ens, Variant.RWA_CUTOFF)
    ext = coupling_g_pv(ens, Variant.EXTENDED)
    assert rwa.cutoff == 40.0 and ext.cutoff is None
    assert np.abs(rwa.g - ext.g).max() > 1e-2
    assert np.array_equal(rwa.b, ext.b)


def test_band_limited_rwa():
    ens = pair(1.0)
    c = coupling_g_pv(ens, Variant.RWA_CUTOFF, band=(0.95, 1.05))
    assert c.cutoff == 1.05
    assert np.all(np.isfinite(c.g))


def test_closed_variant_via_pv_route():
    ens = pair(2.0, (1, 1, 1))
    assert np.array_equal(coupling_g_pv(ens, "closed").g, coupling_g_closed(ens))


def test_lamb_shift_closed_forms():
    one = make_ensemble([[0, 0, 0]])
    lam = 40.0
    rwa = lamb_shift_regularized("rwa", one, lam).value
    assert rwa == pytest.approx(lam**3 / 3 + lam**2 / 2 + lam + np.log(lam - 1), rel=1e-10)
    ext = lamb_shift_regularized("extended_ansatz", one, lam).value
    assert ext == pytest.approx(2 * lam**3 / 3 + 2 * lam + np.log((lam - 1) / (lam + 1)), rel=1e-10)
    assert ground_state_integral(lam) == pytest.approx(
        lam**3 / 3 - lam**2 / 2 + lam - np.log(lam + 1), rel=1e-12)
    three = make_ensemble([[0, 0, 0], [0, 0, 1], [0, 0, 2]])
    diff = lamb_shift_regularized("full", three, lam).value - lamb_shift_regularized("full", one, lam).value
    assert diff == pytest.approx(6 * ground_state_integral(lam), rel=1e-12)
    with pytest.raises(ValidationError):
        lamb_shift_regularized("rwa", one, 5.0)


def test_lamb_cubic_growth():
    one = make_ensemble([[0, 0, 0]])
    ratio = lamb_shift_regularized("rwa", one, 80.0).value / lamb_shift_regularized("rwa", one, 40.0).value
    assert ratio == pytest.approx(7.844, abs=1e-3)
