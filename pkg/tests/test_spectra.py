import numpy as np
import pytest
import scipy.linalg

from qkim.hamiltonians import build_h_tau
from qkim.model import ModelParams, SpinConfig
from qkim.spectra import (
    eigh,
    eigvalsh,
    positivity_sweep,
    save_spectrum_csv,
    spectral_report,
    sweep_to_csv,
)


def test_eigh_rejects_asymmetric_input():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        eigh(a)
    with pytest.raises(ValueError):
        eigvalsh(a)


def test_eigh_matches_scipy_on_symmetric():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(12, 12))
    a = a + a.T
    vals, vecs = eigh(a)
    ref = scipy.linalg.eigvalsh(a)
    assert np.allclose(vals, ref, atol=1e-12)
    assert np.abs(vecs @ np.diag(vals) @ vecs.T - a).max() < 1e-10


def test_spectral_report_flat_rate_point():
    # tau = 0 at infinite temperature: unique kernel vector and gap 2 Gamma
    for big_g in (1.0, 1.7):
        p = ModelParams.from_gamma(5, 0.0, Gamma=big_g)
        rep = spectral_report(build_h_tau(SpinConfig(0, 5), p).matrix)
        assert rep.min_eigenvalue == pytest.approx(0.0, abs=1e-12)
        assert rep.kernel_dimension == 1
        assert rep.gap == pytest.approx(2.0 * big_g, abs=1e-10)


def test_spectral_report_gap_tracks_gamma():
    p = ModelParams.from_gamma(5, 0.6, Gamma=1.0)
    rep = spectral_report(build_h_tau(SpinConfig(0, 5), p).matrix)
    assert rep.gap == pytest.approx(2.0 * 0.4, abs=1e-8)
    assert rep.eigenvalues.shape == (32,)


def test_spectral_report_zero_matrix():
    rep = spectral_report(np.zeros((8, 8)))
    assert rep.kernel_dimension == 8
    assert rep.gap == np.inf
    assert rep.max_eigenvalue == 0.0


def test_positivity_sweep_rows_and_parallelism():
    gammas = (0.0, 0.5)
    deltas = (-1.0, 0.0)
    serial = positivity_sweep(3, gammas, deltas)
    parallel = positivity_sweep(3, gammas, deltas, jobs=2)
    assert serial == parallel
    assert len(serial) == 2 * 2 * 8
    keys = [(r.gamma, r.delta, r.tau_bits) for r in serial]
    assert keys == sorted(keys)
    for r in serial:
        assert r.min_eig >= -1e-10
        p = ModelParams.from_gamma(3, r.gamma, delta=r.delta)
        rep = spectral_report(build_h_tau(SpinConfig(r.tau_bits, 3), p).matrix)
        assert r.min_eig == pytest.approx(rep.min_eigenvalue, abs=1e-12)
        assert r.kernel_dim == rep.kernel_dimension


def test_positivity_sweep_tau_subset():
    rows = positivity_sweep(4, (0.3,), (0.2,), taus=(0, 5))
    assert [r.tau_bits for r in rows] == [0, 5]


def test_sweep_csv_round_trip(tmp_path):
    rows = positivity_sweep(3, (0.5,), (0.0,))
    path = tmp_path / "sweep.csv"
    sweep_to_csv(path, rows)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "gamma,delta,tau_bits,min_eig,kernel_dim,gap"
    assert len(lines) == 1 + len(rows)
    first = lines[1].split(",")
    assert float(first[0]) == 0.5 and int(first[2]) == 0
    assert float(first[3]) == rows[0].min_eig


def test_save_spectrum_csv(tmp_path):
    path = tmp_path / "spec.csv"
    save_spectrum_csv(path, np.array([0.0, 0.25, 1.5]))
    assert path.read_text() == "index,value\n0,0.0\n1,0.25\n2,1.5\n"
