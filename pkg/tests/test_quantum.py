import numpy as np
import pytest

from helpers import random_density
from qkim.classical import build_generator, propagate_probability
from qkim.hamiltonians import build_h_tau
from qkim.model import ModelParams, SpinConfig, equilibrium_distribution
from qkim.quantum import (
    build_lindbladian,
    build_sector_generator,
    coherence_decay_rate,
    decompose_density,
    ghz_density,
    load_density_json,
    maximally_mixed,
    plus_product_density,
    product_density,
    propagate_density,
    propagate_sector,
    reassemble_density,
    save_density_json,
    sector_norms,
    sector_report,
    sector_report_to_csv,
    similarity_transform,
    tau_sector_of,
    thermal_density,
)
from qkim.spectra import spectral_report


def test_tau_sector_of():
    assert tau_sector_of(0b0110, 0b0110) == 0
    assert tau_sector_of(0b0110, 0b0000) == 0b0110
    assert tau_sector_of(3, 5) == 6


def test_decompose_reassemble_round_trip():
    rng = np.random.default_rng(11)
    rho = random_density(4, rng)
    sectors = decompose_density(rho, 4)
    assert set(sectors) == set(range(16))
    assert np.abs(reassemble_density(sectors, 4) - rho).max() < 1e-15
    with pytest.raises(ValueError):
        decompose_density(rho, 3)


def test_lindbladian_agrees_with_sector_generators():
    n = 4
    p = ModelParams.from_gamma(n, 0.6, delta=0.3, Gamma=1.1)
    lind = build_lindbladian(p)
    rng = np.random.default_rng(17)
    rho = random_density(n, rng)
    drho = (lind @ rho.reshape(-1)).reshape(rho.shape)
    expected = {}
    for bits, vec in decompose_density(rho, n).items():
        gen = build_sector_generator(SpinConfig(bits, n), p)
        expected[bits] = gen @ vec
    assert np.abs(drho - reassemble_density(expected, n)).max() < 1e-12


def test_sector_generator_is_transformed_hamiltonian():
    n = 4
    p = ModelParams.from_gamma(n, 0.7, delta=0.3)
    rng = np.random.default_rng(19)
    for bits in {0, 15, int(rng.integers(16)), int(rng.integers(16))}:
        tau = SpinConfig(bits, n)
        gen = build_sector_generator(tau, p)
        tdiag = similarity_transform(tau, p)
        h = build_h_tau(tau, p).matrix
        assert np.abs(gen + tdiag[:, None] * h / tdiag[None, :]).max() < 1e-12


def test_diagonal_sector_matches_classical_generator():
    n = 5
    p = ModelParams.from_gamma(n, 0.8, delta=-0.4, Gamma=1.3)
    gen = build_sector_generator(SpinConfig(0, n), p)
    assert np.abs(gen - build_generator(None, p)).max() < 1e-12
    rng = np.random.default_rng(23)
    p0 = rng.random(1 << n)
    p0 /= p0.sum()
    for t in (0.0, 0.4, 3.0):
        quantum = propagate_sector(SpinConfig(0, n), p, p0.astype(complex), t)
        classical = propagate_probability(build_generator(None, p), p0, t)
        assert np.abs(quantum - classical).max() < 1e-12


def test_propagate_sector_validation_and_expm_route():
    n = 3
    p = ModelParams.from_gamma(n, 0.5)
    tau = SpinConfig(2, n)
    b0 = np.ones(8, dtype=complex)
    with pytest.raises(ValueError):
        propagate_sector(tau, p, b0, -0.1)
    out0 = propagate_sector(tau, p, b0, 0.0)
    assert np.array_equal(out0, b0) and out0 is not b0
    # gamma = 1 takes the dense exponential branch; tau = 0 still conserves sum
    p1 = ModelParams.from_gamma(n, 1.0)
    prob = np.full(8, 1.0 / 8.0, dtype=complex)
    out = propagate_sector(SpinConfig(0, n), p1, prob, 0.7)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)


def test_propagate_density_preserves_state_structure():
    n = 4
    p = ModelParams.from_gamma(n, 0.6, delta=0.2)
    rho0 = 0.7 * ghz_density(n) + 0.3 * maximally_mixed(n)
    rho_t = propagate_density(rho0, p, 1.2)
    assert np.trace(rho_t).real == pytest.approx(1.0, abs=1e-11)
    assert np.abs(rho_t - rho_t.conj().T).max() < 1e-11
    assert np.linalg.eigvalsh(rho_t).min() > -1e-10
    assert np.abs(propagate_density(rho0, p, 0.0) - rho0).max() < 1e-15
    with pytest.raises(ValueError):
        propagate_density(rho0, p, -1.0)


def test_long_time_limit_keeps_thermal_diagonal_and_flip_coherence():
    n = 4
    full = (1 << n) - 1
    p = ModelParams.from_gamma(n, 0.7, delta=0.1)
    rho_t = propagate_density(plus_product_density(n), p, 400.0)
    pi = equilibrium_distribution(p)
    assert np.abs(np.diag(rho_t).real - pi).max() < 1e-10
    sectors = decompose_density(rho_t, n)
    for bits, vec in sectors.items():
        if bits not in (0, full):
            assert np.abs(vec).max() < 1e-12, bits
    # the full-flip sector generator has a kernel along the equilibrium shape,
    # so that coherence survives instead of decaying
    survivor = sectors[full].real
    assert np.linalg.norm(survivor) > 0.1
    assert np.abs(survivor / survivor.sum() - pi).max() < 1e-10


def test_coherence_decay_rate_matches_sector_gap():
    n = 4
    p = ModelParams.from_gamma(n, 0.65, delta=0.25)
    rng = np.random.default_rng(29)
    b0 = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    for bits in (1, 6, 15):
        tau = SpinConfig(bits, n)
        rate = coherence_decay_rate(tau, p, b0, 8.0, 12.0)
        gap = spectral_report(build_h_tau(tau, p).matrix).gap
        assert rate == pytest.approx(gap, rel=1e-6)
    with pytest.raises(ValueError):
        coherence_decay_rate(tau, ModelParams.from_gamma(n, 1.0), b0, 8.0, 12.0)
    with pytest.raises(ValueError):
        coherence_decay_rate(tau, p, b0, 5.0, 5.0)


def test_state_builders():
    for rho, n in (
        (ghz_density(3), 3),
        (plus_product_density(3), 3),
        (product_density([0.3, 0.7, 1.1, 0.2]), 4),
        (thermal_density(ModelParams.from_gamma(3, 0.6)), 3),
        (maximally_mixed(3), 3),
    ):
        assert rho.shape == (1 << n, 1 << n)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert np.abs(rho - rho.conj().T).max() < 1e-14
        assert np.linalg.eigvalsh(rho).min() > -1e-12
    purity = np.trace(product_density([0.3, 0.7]) @ product_density([0.3, 0.7])).real
    assert purity == pytest.approx(1.0, abs=1e-12)


def test_ghz_occupies_extreme_sectors_only():
    n = 4
    norms = sector_norms(ghz_density(n), n)
    full = (1 << n) - 1
    for bits, value in norms.items():
        if bits in (0, full):
            assert value == pytest.approx(0.5 * np.sqrt(2.0), abs=1e-12)
        else:
            assert value == 0.0


def test_density_json_round_trip(tmp_path):
    rng = np.random.default_rng(31)
    rho = random_density(3, rng)
    path = tmp_path / "rho.json"
    save_density_json(path, rho, 3)
    back, n = load_density_json(path)
    assert n == 3
    assert np.abs(back - rho).max() == 0.0


def test_sector_report_and_csv(tmp_path):
    n = 3
    p = ModelParams.from_gamma(n, 0.5, delta=0.1)
    rho0 = 0.6 * ghz_density(n) + 0.4 * maximally_mixed(n)
    rows = sector_report(rho0, p, 2.0)
    assert [r.tau_bits for r in rows] == list(range(1 << n))
    by_tau = {r.tau_bits: r for r in rows}
    assert by_tau[0].sector_norm_initial > 0
    for bits, r in by_tau.items():
        assert r.min_eigenvalue >= -1e-10
        assert r.sector_norm_final <= r.sector_norm_initial + 1e-12
    path = tmp_path / "report.csv"
    sector_report_to_csv(path, rows)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "tau_bits,min_eigenvalue,sector_norm_initial,sector_norm_final"
    assert len(lines) == 1 + len(rows)
