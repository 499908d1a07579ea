"""Single-spin-flip rates, detailed balance, and flip-symmetric rate combinations."""

import math
from typing import Callable, NamedTuple

import numpy as np

from .model import SpinConfig, equilibrium_distribution

# a rate function maps (config, site, params) -> nonnegative real
RateFunction = Callable[[SpinConfig, int, "ModelParams"], float]


def _require_periodic(params):
    if params.boundary != "periodic":
        raise ValueError("rates are defined with periodic neighbors only")


def glauber_rate(config, i, params):
    """Flip rate Gamma (1 + delta s_{i-1} s_{i+1}) (1 - (gamma/2) s_i (s_{i-1} + s_{i+1})).

    Nonnegative over gamma in [0, 1], |delta| <= 1; neighbors taken mod N.
    """
    _require_periodic(params)
    n = config.n_sites
    if not 0 <= i < n:
        raise IndexError("site %d out of range for %d sites" % (i, n))
    bits = config.bits
    si = 1 - 2 * ((bits >> i) & 1)
    sl = 1 - 2 * ((bits >> ((i - 1) % n)) & 1)
    sr = 1 - 2 * ((bits >> ((i + 1) % n)) & 1)
    return params.Gamma * (1.0 + params.delta * sl * sr) * (
        1.0 - 0.5 * params.gamma * si * (sl + sr)
    )


def rate_matrix(params, rate=None):
    """(2^n, n) table of flip rates, row = configuration, column = site."""
    _require_periodic(params)
    n = params.n_sites
    if n > 24:
        raise ValueError("rate_matrix is dense-only, n_sites <= 24")
    if rate is not None and rate is not glauber_rate:
        dim = 1 << n
        w = np.empty((dim, n))
        for s in range(dim):
            c = SpinConfig(s, n)
            for i in range(n):
                w[s, i] = rate(c, i, params)
        return w
    idx = np.arange(1 << n, dtype=np.int64)
    w = np.empty((1 << n, n))
    for i in range(n):
        si = 1 - 2 * ((idx >> i) & 1)
        sl = 1 - 2 * ((idx >> ((i - 1) % n)) & 1)
        sr = 1 - 2 * ((idx >> ((i + 1) % n)) & 1)
        w[:, i] = params.Gamma * (1.0 + params.delta * sl * sr) * (
            1.0 - 0.5 * params.gamma * si * (sl + sr)
        )
    return w


def clamp_rate(value, tol=1e-14):
    """Zero out tiny negative rounding residues so square roots stay real."""
    if value < 0.0:
        if value < -tol:
            raise ValueError("rate %r is negative beyond rounding tolerance" % value)
        return 0.0
    return value


class DbcReport(NamedTuple):
    holds: bool
    max_violation: float


def check_detailed_balance(rate, params, tol=1e-12):
    """Check w(sigma -> D_i sigma) P_eq(sigma) == w(D_i sigma -> sigma) P_eq(D_i sigma).

    Full enumeration over all configurations and sites (n_sites <= 16); reports
    the maximum relative violation. P_eq uses params.beta while the rates use
    params.gamma, so a mismatched (beta, gamma) pair is detected.
    """
    n = params.n_sites
    if n > 16:
        raise ValueError("check_detailed_balance enumerates all states, n_sites <= 16")
    p = equilibrium_distribution(params)
    w = rate_matrix(params, rate)
    worst = 0.0
    idx = np.arange(1 << n, dtype=np.int64)
    for i in range(n):
        flipped = idx ^ (1 << i)
        a = w[:, i] * p
        b = w[flipped, i] * p[flipped]
        m = np.maximum(a, b)
        mask = m > 0.0
        if mask.any():
            v = float(np.max(np.abs(a[mask] - b[mask]) / m[mask]))
            worst = max(worst, v)
    return DbcReport(holds=worst <= tol, max_violation=worst)


def v_rate(config, i, params):
    """Flip-symmetric rate w_i(sigma) exp[beta J sigma_i (sigma_{i-1} + sigma_{i+1})].

    Evaluated through gamma instead of beta so that gamma = 1 stays finite:
    equal neighbors give Gamma (1 + delta) sqrt(1 - gamma^2), opposite neighbors
    give Gamma (1 - delta). Invariant under flipping spin i.
    """
    _require_periodic(params)
    n = config.n_sites
    if not 0 <= i < n:
        raise IndexError("site %d out of range for %d sites" % (i, n))
    bits = config.bits
    sl = 1 - 2 * ((bits >> ((i - 1) % n)) & 1)
    sr = 1 - 2 * ((bits >> ((i + 1) % n)) & 1)
    if sl == sr:
        root = math.sqrt(max(1.0 - params.gamma * params.gamma, 0.0))
        return params.Gamma * (1.0 + params.delta) * root
    return params.Gamma * (1.0 - params.delta)


def v_matrix(params):
    """(2^n, n) table of v_rate values."""
    _require_periodic(params)
    n = params.n_sites
    if n > 24:
        raise ValueError("v_matrix is dense-only, n_sites <= 24")
    idx = np.arange(1 << n, dtype=np.int64)
    root = math.sqrt(max(1.0 - params.gamma * params.gamma, 0.0))
    equal = params.Gamma * (1.0 + params.delta) * root
    opposite = params.Gamma * (1.0 - params.delta)
    v = np.empty((1 << n, n))
    for i in range(n):
        sl = (idx >> ((i - 1) % n)) & 1
        sr = (idx >> ((i + 1) % n)) & 1
        v[:, i] = np.where(sl == sr, equal, opposite)
    return v
