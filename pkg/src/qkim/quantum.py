"""Quantum master equation with bit-flip jumps at classical Glauber rates.

The jump operators are L_i = sigma_i^x sqrt(w_i) with w_i diagonal in the spin
basis. Every matrix element rho[sigma, sigma_tilde] belongs to the coherence
sector tau = sigma XOR sigma_tilde, which the dynamics preserves; the diagonal
sector tau = 0 reproduces the classical master equation and each off-diagonal
sector relaxes under a generator similar to -H_tau.
"""

import json
import math
from dataclasses import dataclass
from typing import Dict, List

import numpy as np
import scipy.linalg
import scipy.sparse

from .hamiltonians import build_h_tau
from .model import ModelParams, SpinConfig, TauSector, energy_table, equilibrium_distribution
from .rates import rate_matrix
from .spectra import eigh, spectral_report

LINDBLAD_MAX_SITES = 10


def build_lindbladian(params):
    """Sparse generator acting on row-major vectorized density matrices.

    Index convention: entry rho[sigma, sigma_tilde] lives at row
    sigma * 2^N + sigma_tilde. Gain terms scatter sqrt(w_i(sigma) w_i(tilde))
    onto the doubly flipped pair, loss terms subtract the mean escape rates.
    """
    n = params.n_sites
    if n > LINDBLAD_MAX_SITES:
        raise ValueError("vectorized Lindbladian needs n_sites <= %d" % LINDBLAD_MAX_SITES)
    dim = 1 << n
    w = rate_matrix(params)
    wsum = w.sum(axis=1)
    rows = [np.arange(dim * dim, dtype=np.int64)]
    cols = [np.arange(dim * dim, dtype=np.int64)]
    data = [-0.5 * np.add.outer(wsum, wsum).ravel()]
    idx = np.arange(dim, dtype=np.int64)
    col_grid = (idx[:, None] * dim + idx[None, :]).ravel()
    for i in range(n):
        flipped = idx ^ (1 << i)
        rows.append((flipped[:, None] * dim + flipped[None, :]).ravel())
        cols.append(col_grid)
        data.append(np.sqrt(np.outer(w[:, i], w[:, i])).ravel())
    mat = scipy.sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim * dim, dim * dim),
    )
    return mat.tocsr()


def tau_sector_of(row, col):
    """Sector label of the density-matrix entry (row, col)."""
    return row ^ col


def decompose_density(rho, n_sites):
    """Split a density matrix into sector vectors b_tau[sigma] = rho[sigma, sigma XOR tau]."""
    dim = 1 << n_sites
    if rho.shape != (dim, dim):
        raise ValueError("density matrix shape does not match n_sites")
    idx = np.arange(dim, dtype=np.int64)
    return {tau: rho[idx, idx ^ tau].copy() for tau in range(dim)}


def reassemble_density(sectors, n_sites):
    """Inverse of decompose_density."""
    dim = 1 << n_sites
    rho = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim, dtype=np.int64)
    for tau, vec in sectors.items():
        rho[idx, idx ^ tau] = vec
    return rho


def build_sector_generator(tau, params):
    """Dense generator M_tau of one coherence sector, db/dt = M_tau b.

    Off-diagonal entries are +sqrt(w_i(sigma) w_i(sigma_tilde)) on the flipped
    configuration, the diagonal is -sum_i [w_i(sigma) + w_i(sigma_tilde)]/2.
    When the rates satisfy detailed balance, M_tau = -T H_tau T^{-1} with the
    diagonal similarity from similarity_transform.
    """
    n = tau.n_sites
    if n != params.n_sites:
        raise ValueError("tau and parameters disagree on n_sites")
    dim = 1 << n
    w = rate_matrix(params)
    idx = np.arange(dim, dtype=np.int64)
    tilde = idx ^ tau.bits
    gen = np.zeros((dim, dim))
    for i in range(n):
        gen[idx ^ (1 << i), idx] += np.sqrt(w[idx, i] * w[tilde, i])
    gen[idx, idx] += -0.5 * (w[idx].sum(axis=1) + w[tilde].sum(axis=1))
    return gen


def similarity_transform(tau, params):
    """Diagonal T with M_tau = -T H_tau T^{-1}, as a vector of entries.

    T[sigma] = exp{-(beta/4) [E(sigma) + E(sigma XOR tau)]}, evaluated through
    the ratio (1+gamma)/(1-gamma) = exp(4 beta J) so no beta is needed. Only
    defined for gamma < 1; at gamma = 1 the transform degenerates and the
    identity is returned (propagation then uses the exponential of M_tau).
    """
    n = tau.n_sites
    dim = 1 << n
    if params.gamma >= 1.0:
        return np.ones(dim)
    energies = energy_table(params)
    idx = np.arange(dim, dtype=np.int64)
    pair = energies[idx] + energies[idx ^ tau.bits]
    ratio = (1.0 + params.gamma) / (1.0 - params.gamma)
    return ratio ** (-pair / (16.0 * params.J))


def propagate_sector(tau, params, b0, t):
    """Evolve one sector vector to time t.

    gamma < 1 routes through the symmetric H_tau eigenbasis; gamma = 1 falls
    back to a dense matrix exponential of M_tau.
    """
    b0 = np.asarray(b0, dtype=complex)
    if t < 0:
        raise ValueError("time must be nonnegative")
    if t == 0:
        return b0.copy()
    if params.gamma >= 1.0:
        gen = build_sector_generator(tau, params)
        return scipy.linalg.expm(gen * t) @ b0
    tdiag = similarity_transform(tau, params)
    vals, vecs = eigh(build_h_tau(tau, params))
    psi0 = b0 / tdiag
    coef = vecs.T @ psi0
    return tdiag * (vecs @ (np.exp(-vals * t) * coef))


def propagate_density(rho0, params, t, check_tol=1e-9):
    """Evolve a density matrix sector by sector and validate the result.

    Raises RuntimeError if the evolved matrix drifts from Hermiticity, unit
    trace, or positivity beyond check_tol (scaled; positivity gets 10x slack).
    """
    n = params.n_sites
    sectors = decompose_density(np.asarray(rho0, dtype=complex), n)
    out = {}
    for tau_bits, vec in sectors.items():
        if not np.any(vec):
            out[tau_bits] = vec
            continue
        out[tau_bits] = propagate_sector(SpinConfig(tau_bits, n), params, vec, t)
    rho = reassemble_density(out, n)
    herm = np.abs(rho - rho.conj().T).max()
    if herm > check_tol:
        raise RuntimeError("evolved state lost Hermiticity (defect %g)" % herm)
    trace_err = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
    if trace_err > check_tol:
        raise RuntimeError("evolved state lost unit trace (defect %g)" % trace_err)
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    if min_eig < -10.0 * check_tol:
        raise RuntimeError("evolved state lost positivity (min eigenvalue %g)" % min_eig)
    return rho


def coherence_decay_rate(tau, params, b0, t1, t2, drop_kernel=True, kernel_tol=1e-10):
    """Asymptotic decay rate of a sector norm between times t1 and t2.

    Returns -d ln ||b|| / dt measured from the two evolved norms. With
    drop_kernel the projection onto the zero modes of H_tau is removed first,
    so the rate reflects the slowest decaying mode (the sector gap) even in
    sectors with a stationary component. Requires gamma < 1.
    """
    if params.gamma >= 1.0:
        raise ValueError("decay-rate measurement requires gamma < 1")
    if not 0 <= t1 < t2:
        raise ValueError("need 0 <= t1 < t2")
    tdiag = similarity_transform(tau, params)
    vals, vecs = eigh(build_h_tau(tau, params))
    thr = kernel_tol * max(1.0, np.abs(vals).max())
    coef = vecs.T @ (np.asarray(b0, dtype=complex) / tdiag)
    if drop_kernel:
        coef = np.where(vals <= thr, 0.0, coef)
    norms = []
    for t in (t1, t2):
        b = tdiag * (vecs @ (np.exp(-vals * t) * coef))
        norms.append(np.linalg.norm(b))
    if norms[0] == 0.0 or norms[1] == 0.0:
        raise ValueError("sector amplitude vanished in the measurement window")
    return float(np.log(norms[0] / norms[1]) / (t2 - t1))


def sector_norms(rho, n_sites):
    """Euclidean norm of each sector vector of a density matrix."""
    return {tau: float(np.linalg.norm(vec)) for tau, vec in decompose_density(rho, n_sites).items()}


def ghz_density(n_sites):
    """Pure-state density of (|all up> + |all down>)/sqrt(2)."""
    dim = 1 << n_sites
    psi = np.zeros(dim, dtype=complex)
    psi[0] = psi[dim - 1] = 1.0 / math.sqrt(2.0)
    return np.outer(psi, psi.conj())


def plus_product_density(n_sites):
    """Pure-state density of the uniform superposition (all spins along +x)."""
    dim = 1 << n_sites
    psi = np.full(dim, 1.0 / math.sqrt(dim), dtype=complex)
    return np.outer(psi, psi.conj())


def product_density(angles):
    """Pure product state with site k in cos(theta_k)|up> + sin(theta_k)|down>."""
    angles = list(angles)
    n = len(angles)
    dim = 1 << n
    psi = np.ones(dim, dtype=complex)
    idx = np.arange(dim)
    for k, theta in enumerate(angles):
        bit = (idx >> k) & 1
        psi *= np.where(bit == 0, math.cos(theta), math.sin(theta))
    return np.outer(psi, psi.conj())


def thermal_density(params):
    """Diagonal equilibrium state of the classical chain."""
    return np.diag(equilibrium_distribution(params)).astype(complex)


def maximally_mixed(n_sites):
    dim = 1 << n_sites
    return np.eye(dim, dtype=complex) / dim


def save_density_json(path, rho, n_sites):
    """JSON export: nonzero entries as [row, col, real, imag] quadruples."""
    rows, cols = np.nonzero(np.abs(rho) > 0)
    entries = [
        [int(r), int(c), repr(float(rho[r, c].real)), repr(float(rho[r, c].imag))]
        for r, c in zip(rows.tolist(), cols.tolist())
    ]
    with open(path, "w") as fh:
        json.dump({"n_sites": n_sites, "entries": entries}, fh, sort_keys=True)


def load_density_json(path):
    with open(path) as fh:
        payload = json.load(fh)
    n = int(payload["n_sites"])
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    for r, c, re, im in payload["entries"]:
        rho[int(r), int(c)] = complex(float(re), float(im))
    return rho, n


@dataclass(frozen=True)
class SectorReportRow:
    tau_bits: int
    min_eigenvalue: float
    sector_norm_initial: float
    sector_norm_final: float


def sector_report(rho0, params, t):
    """Per-sector summary of one evolution: spectrum floor and norm decay."""
    n = params.n_sites
    initial = sector_norms(np.asarray(rho0, dtype=complex), n)
    rho_t = propagate_density(rho0, params, t)
    final = sector_norms(rho_t, n)
    rows = []
    for tau_bits in range(1 << n):
        rep = spectral_report(build_h_tau(SpinConfig(tau_bits, n), params))
        rows.append(
            SectorReportRow(
                tau_bits=tau_bits,
                min_eigenvalue=rep.min_eigenvalue,
                sector_norm_initial=initial[tau_bits],
                sector_norm_final=final[tau_bits],
            )
        )
    return rows


def sector_report_to_csv(path, rows):
    with open(path, "w") as fh:
        fh.write("tau_bits,min_eigenvalue,sector_norm_initial,sector_norm_final\n")
        for r in rows:
            fh.write(
                "%d,%s,%s,%s\n"
                % (
                    r.tau_bits,
                    repr(r.min_eigenvalue),
                    repr(r.sector_norm_initial),
                    repr(r.sector_norm_final),
                )
            )
