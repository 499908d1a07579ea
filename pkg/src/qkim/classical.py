"""Dense kinetic generator for the classical chain and its symmetrized form."""

import csv
import json

import numpy as np
import scipy.linalg

from .model import SpinConfig, equilibrium_distribution
from .rates import check_detailed_balance, rate_matrix

DENSE_MAX_SITES = 14


def _dense_guard(params):
    if params.n_sites > DENSE_MAX_SITES:
        raise ValueError(
            "dense generator needs n_sites <= %d, got %d"
            % (DENSE_MAX_SITES, params.n_sites)
        )


def build_generator(rate, params):
    """Dense 2^N x 2^N generator L with L[D_i sigma, sigma] += w_i(sigma).

    Columns sum to zero, so dP/dt = L P conserves probability.
    """
    _dense_guard(params)
    n = params.n_sites
    dim = 1 << n
    w = rate_matrix(params, rate)
    gen = np.zeros((dim, dim))
    idx = np.arange(dim, dtype=np.int64)
    for i in range(n):
        gen[idx ^ (1 << i), idx] += w[:, i]
    gen[idx, idx] -= gen.sum(axis=0)
    return gen


def build_symmetrized_hamiltonian(rate, params, dbc_tol=1e-8):
    """Symmetric positive form H = -S^{-1} L S with S = diag(sqrt(P_eq)).

    Off-diagonal entries are -sqrt(w_i(sigma) w_i(D_i sigma)), which equals the
    similarity-transformed generator whenever detailed balance holds, and stays
    finite at gamma = 1 where P_eq itself degenerates. Raises if the supplied
    rate violates detailed balance beyond dbc_tol.
    """
    _dense_guard(params)
    report = check_detailed_balance(rate, params, tol=dbc_tol)
    if report.max_violation > dbc_tol:
        raise ValueError(
            "detailed balance violated (max relative violation %.3e), "
            "symmetrization is invalid" % report.max_violation
        )
    n = params.n_sites
    dim = 1 << n
    w = np.maximum(rate_matrix(params, rate), 0.0)
    ham = np.zeros((dim, dim))
    idx = np.arange(dim, dtype=np.int64)
    for i in range(n):
        flipped = idx ^ (1 << i)
        ham[flipped, idx] -= np.sqrt(w[:, i] * w[flipped, i])
    ham[idx, idx] = w.sum(axis=1)
    return ham


def propagate_probability(gen, p0, t):
    """Evolve a probability vector to exp(t L) p0.

    When L is reversible (a strictly positive stationary vector symmetrizes it),
    the propagation goes through the eigendecomposition of the symmetrized form;
    otherwise scipy's scaling-and-squaring matrix exponential is used.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    p0 = np.asarray(p0, dtype=float)
    dim = p0.shape[0]
    if gen.shape != (dim, dim):
        raise ValueError("generator and vector dimensions disagree")
    if abs(p0.sum() - 1.0) > 1e-9 or p0.min() < -1e-12:
        raise ValueError("p0 must be a probability vector")
    if t == 0.0:
        return p0.copy()
    sym = _symmetrization(gen)
    if sym is None:
        return scipy.linalg.expm(gen * t) @ p0
    s, ham = sym
    vals, vecs = scipy.linalg.eigh(ham)
    phases = np.exp(-np.maximum(vals, vals.min()) * t)
    return s * (vecs @ (phases * (vecs.T @ (p0 / s))))


def _symmetrization(gen, tol=1e-8):
    """Stationary-scaling pair (sqrt(pi), -S^{-1} L S) if it is symmetric, else None."""
    dim = gen.shape[0]
    if dim > 4096:
        return None
    kernel = scipy.linalg.null_space(gen, rcond=1e-12)
    if kernel.shape[1] != 1:
        return None
    pi = kernel[:, 0]
    pi = pi * np.sign(pi.sum())
    if pi.min() <= 0.0:
        return None
    pi = pi / pi.sum()
    s = np.sqrt(pi)
    ham = -(gen * s[np.newaxis, :]) / s[:, np.newaxis]
    scale = max(1.0, np.abs(ham).max())
    if np.abs(ham - ham.T).max() > tol * scale:
        return None
    return s, 0.5 * (ham + ham.T)


def save_vector_csv(path, values, header=("index", "value")):
    """Write (index, value) rows for a probability vector or spectrum."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k, v in enumerate(np.asarray(values).ravel()):
            writer.writerow([k, repr(float(v))])


def save_vector_json(path, values):
    with open(path, "w") as fh:
        json.dump([float(v) for v in np.asarray(values).ravel()], fh)
