import numpy as np
import pytest
import scipy.linalg

from helpers import hamilfeld_matrix
from qkim.classical import (
    build_generator,
    build_symmetrized_hamiltonian,
    propagate_probability,
    save_vector_csv,
    save_vector_json,
)
from qkim.model import ModelParams, equilibrium_distribution, spin, thermal_vector


def test_generator_columns_sum_to_zero():
    p = ModelParams.from_gamma(5, 0.7, delta=0.2)
    gen = build_generator(None, p)
    assert np.abs(gen.sum(axis=0)).max() < 1e-12
    off = gen - np.diag(np.diag(gen))
    assert off.min() >= 0.0


def test_generator_annihilates_equilibrium():
    p = ModelParams.from_gamma(5, 0.85, delta=-0.4)
    gen = build_generator(None, p)
    assert np.abs(gen @ equilibrium_distribution(p)).max() < 1e-13


def test_propagation_conserves_and_converges():
    p = ModelParams.from_gamma(4, 0.5, delta=0.1)
    gen = build_generator(None, p)
    rng = np.random.default_rng(11)
    p0 = rng.random(16)
    p0 /= p0.sum()
    assert np.array_equal(propagate_probability(gen, p0, 0.0), p0)
    pt = propagate_probability(gen, p0, 0.8)
    assert pt.sum() == pytest.approx(1.0, abs=1e-12)
    assert pt.min() > -1e-12
    plate = propagate_probability(gen, p0, 300.0)
    assert np.abs(plate - equilibrium_distribution(p)).max() < 1e-10


def test_propagation_matches_direct_exponential():
    p = ModelParams.from_gamma(4, 0.6, delta=-0.3)
    gen = build_generator(None, p)
    rng = np.random.default_rng(3)
    p0 = rng.random(16)
    p0 /= p0.sum()
    direct = scipy.linalg.expm(gen * 0.7) @ p0
    assert np.abs(propagate_probability(gen, p0, 0.7) - direct).max() < 1e-11


def test_propagation_input_validation():
    p = ModelParams.from_gamma(3, 0.4)
    gen = build_generator(None, p)
    ok = np.full(8, 1.0 / 8.0)
    with pytest.raises(ValueError):
        propagate_probability(gen, ok, -1.0)
    with pytest.raises(ValueError):
        propagate_probability(gen, np.full(8, 0.2), 1.0)
    with pytest.raises(ValueError):
        propagate_probability(gen, np.full(4, 0.25), 1.0)


def test_symmetrized_hamiltonian_properties():
    p = ModelParams.from_gamma(5, 0.8, delta=0.5)
    ham = build_symmetrized_hamiltonian(None, p)
    assert np.abs(ham - ham.T).max() < 1e-12
    v = thermal_vector(p)
    assert np.abs(ham @ v).max() < 1e-12
    # similarity with the generator: H = -S^{-1} L S
    gen = build_generator(None, p)
    s = np.sqrt(equilibrium_distribution(p))
    sim = -(gen * s[None, :]) / s[:, None]
    assert np.abs(ham - sim).max() < 1e-10


def test_symmetrized_hamiltonian_is_classical_spin_form():
    for g, d in ((0.3, 0.0), (0.9, -0.7), (0.0, 1.0)):
        p = ModelParams.from_gamma(6, g, delta=d)
        assert np.abs(build_symmetrized_hamiltonian(None, p) - hamilfeld_matrix(p)).max() < 1e-12


def test_symmetrized_hamiltonian_rejects_broken_rates():
    p = ModelParams.from_gamma(4, 0.6)

    def biased(config, i, params):
        return 1.0 + 0.5 * spin(config, i)

    with pytest.raises(ValueError):
        build_symmetrized_hamiltonian(biased, p)


def test_vector_exports(tmp_path):
    values = [0.5, 0.25, 0.25]
    csv_path = tmp_path / "vec.csv"
    save_vector_csv(csv_path, values)
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "index,value"
    assert lines[1] == "0,0.5"
    json_path = tmp_path / "vec.json"
    save_vector_json(json_path, values)
    assert json_path.read_text() == "[0.5, 0.25, 0.25]"
