"""Spectral analysis of sector Hamiltonians: kernels, gaps, positivity sweeps."""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .hamiltonians import TauHamiltonian, _as_matrix, build_h_tau
from .model import ModelParams, SpinConfig


def eigh(a, check_tol=1e-10):
    """Eigendecomposition of a real symmetric matrix, with a symmetry check.

    The builders produce symmetric matrices by construction; a defect above
    check_tol * max(1, |a|_max) means the input is not one of ours and is
    rejected rather than silently symmetrized away.
    """
    a = _as_matrix(a)
    defect = np.abs(a - a.T).max() if a.size else 0.0
    scale = max(1.0, np.abs(a).max() if a.size else 0.0)
    if defect > check_tol * scale:
        raise ValueError("matrix is not symmetric (defect %g)" % defect)
    sym = 0.5 * (a + a.T)
    return scipy.linalg.eigh(sym)


def eigvalsh(a, check_tol=1e-10):
    vals, _ = eigh(a, check_tol=check_tol)
    return vals


@dataclass(frozen=True)
class SpectralReport:
    """Summary of one sector spectrum."""

    min_eigenvalue: float
    max_eigenvalue: float
    kernel_dimension: int
    gap: float
    eigenvalues: np.ndarray


def spectral_report(h, tol=1e-10):
    """Kernel dimension and gap of a sector Hamiltonian.

    Eigenvalues within tol * max(1, |lambda|_max) of zero count as kernel; the
    gap is the smallest eigenvalue above that threshold (inf if none).
    """
    vals = eigvalsh(h)
    thr = tol * max(1.0, np.abs(vals).max() if vals.size else 0.0)
    kernel = int(np.count_nonzero(np.abs(vals) <= thr))
    above = vals[vals > thr]
    gap = float(above.min()) if above.size else math.inf
    return SpectralReport(
        min_eigenvalue=float(vals.min()),
        max_eigenvalue=float(vals.max()),
        kernel_dimension=kernel,
        gap=gap,
        eigenvalues=vals,
    )


@dataclass(frozen=True)
class SweepRow:
    """One (gamma, delta, tau) point of a positivity sweep."""

    gamma: float
    delta: float
    tau_bits: int
    min_eig: float
    kernel_dim: int
    gap: float


def positivity_sweep(n_sites, gammas, deltas, taus=None, Gamma=1.0, J=1.0, jobs=1, tol=1e-10):
    """Minimum eigenvalue, kernel dimension and gap over a parameter grid.

    taus is a sequence of sector bit patterns (default: all 2^N). Rows come out
    sorted by (gamma, delta, tau_bits) regardless of worker scheduling.
    """
    if taus is None:
        taus = range(1 << n_sites)
    points = [
        (float(g), float(d), int(t))
        for g in gammas
        for d in deltas
        for t in taus
    ]

    def work(point):
        g, d, t = point
        params = ModelParams(n_sites=n_sites, gamma=g, delta=d, Gamma=Gamma, J=J)
        rep = spectral_report(build_h_tau(SpinConfig(t, n_sites), params), tol=tol)
        return SweepRow(
            gamma=g,
            delta=d,
            tau_bits=t,
            min_eig=rep.min_eigenvalue,
            kernel_dim=rep.kernel_dimension,
            gap=rep.gap,
        )

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(work, points))
    else:
        rows = [work(pt) for pt in points]
    rows.sort(key=lambda r: (r.gamma, r.delta, r.tau_bits))
    return rows


def sweep_to_csv(path, rows):
    """CSV export with full-precision floats, stable across reruns."""
    with open(path, "w") as fh:
        fh.write("gamma,delta,tau_bits,min_eig,kernel_dim,gap\n")
        for r in rows:
            fh.write(
                "%s,%s,%d,%s,%d,%s\n"
                % (repr(r.gamma), repr(r.delta), r.tau_bits, repr(r.min_eig), r.kernel_dim, repr(r.gap))
            )


def save_spectrum_csv(path, values):
    """Two-column (index, value) CSV of a sorted eigenvalue list."""
    with open(path, "w") as fh:
        fh.write("index,value\n")
        for i, v in enumerate(np.asarray(values).ravel()):
            fh.write("%d,%s\n" % (i, repr(float(v))))
