"""Shared oracles for the test suite, independent of the package internals."""

import math

import numpy as np

EYE2 = np.eye(2)
SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])

PARAM_GRID = [
    (g, d)
    for g in (0.0, 0.25, 0.5, 0.75, 0.95)
    for d in (-1.0, -0.5, 0.0, 0.5, 1.0)
]


def op_chain(n, factors):
    """Dense operator with factors[i] on site i (bit i), identity elsewhere."""
    out = np.array([[1.0]])
    for i in range(n):
        out = np.kron(factors.get(i, EYE2), out)
    return out


def one_site(n, i, op):
    return op_chain(n, {i: op})


def hamilfeld_matrix(params):
    """Face-value classical Hamiltonian H(gamma, delta).

    Builds -Gamma sum_i {[A - B Z_{i-1} Z_{i+1}] X_i
                         - (1 + delta Z_{i-1} Z_{i+1})
                           [1 - (gamma/2) Z_i (Z_{i-1} + Z_{i+1})]}
    literally from dense Pauli products, with the stable coefficient
    A = (1+delta)(1+sqrt(1-gamma^2))/2 - delta and B = (1 - delta) - A.
    """
    n, g, d, big_g = params.n_sites, params.gamma, params.delta, params.Gamma
    a = (1.0 + d) * (1.0 + math.sqrt(max(1.0 - g * g, 0.0))) / 2.0 - d
    b = (1.0 - d) - a
    dim = 1 << n
    eye = np.eye(dim)
    h = np.zeros((dim, dim))
    for i in range(n):
        x = one_site(n, i, SX)
        z = one_site(n, i, SZ)
        zm = one_site(n, (i - 1) % n, SZ)
        zp = one_site(n, (i + 1) % n, SZ)
        h -= big_g * (
            (a * eye - b * (zm @ zp)) @ x
            - (eye + d * (zm @ zp)) @ (eye - 0.5 * g * z @ (zm + zp))
        )
    return h


def dense_entropy_profile(psi, n):
    """Base-2 entanglement entropy at every bond from the full statevector."""
    out = []
    for cut in range(1, n):
        mat = np.asarray(psi).reshape(1 << (n - cut), 1 << cut)
        s = np.linalg.svd(mat, compute_uv=False)
        p = s * s
        p = p[p > 1e-300]
        p = p / p.sum()
        out.append(float(-(p * np.log2(p)).sum()))
    return out


def ground_flow_reference(h, v0, degeneracy_tol=1e-8):
    """Imaginary-time limit of v0 under exp(-t h): normalized projection of v0
    onto the lowest (possibly degenerate) eigenspace. Returns (energy, vector)."""
    vals, vecs = np.linalg.eigh(0.5 * (h + h.T))
    span = vecs[:, vals <= vals[0] + degeneracy_tol * max(1.0, abs(vals[0]))]
    proj = span @ (span.T @ np.asarray(v0, dtype=np.float64))
    norm = np.linalg.norm(proj)
    if norm < 1e-12:
        raise ValueError("initial vector is orthogonal to the lowest eigenspace")
    return float(vals[0]), proj / norm


def embed_gate(gate, sites, n):
    """Dense 2^n embedding of a k-site gate whose bit j indexes sites[j]."""
    k = len(sites)
    rest = [i for i in range(n) if i not in sites]
    u = np.kron(np.eye(1 << (n - k)), np.asarray(gate))
    v = np.zeros(1 << n, dtype=np.int64)
    for x in range(1 << n):
        y = 0
        for j, s in enumerate(sites):
            y |= ((x >> s) & 1) << j
        for j, s in enumerate(rest):
            y |= ((x >> s) & 1) << (k + j)
        v[x] = y
    return u[np.ix_(v, v)]


def cyclic_min_run(bits, n):
    """Shortest maximal run of equal values in the cyclic bit pattern."""
    vals = [(bits >> i) & 1 for i in range(n)]
    if len(set(vals)) == 1:
        return n
    start = 0
    while vals[(start - 1) % n] == vals[start]:
        start += 1
    runs = []
    length = 0
    for k in range(n):
        length += 1
        if vals[(start + k) % n] != vals[(start + k + 1) % n]:
            runs.append(length)
            length = 0
    return min(runs)


def random_density(n, rng):
    """Random full-rank density matrix on n sites."""
    dim = 1 << n
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
