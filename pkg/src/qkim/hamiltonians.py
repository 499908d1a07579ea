"""Sector Hamiltonians of the dissipative chain and their analytic special cases.

Every coherence sector is labeled by a configuration tau of conserved products;
the operator H_tau generates that sector's imaginary-time dynamics. This module
builds H_tau both from closed-form coefficients and directly from the rates,
provides its 3-site local terms with their analytic spectra, the free-fermion
spectrum at delta = 0, the commuting-block split at delta = -1, the diagonal
kernel at gamma = delta = 1, and the bond-variable (anisotropic exchange chain)
form.
"""

import itertools
import math
from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg

from .model import ModelParams, SpinConfig, TauSector, spin_table
from .rates import glauber_rate, rate_matrix, v_matrix, v_rate

DENSE_MAX_SITES = 14

PAULI_I = np.eye(2)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
# diagonal +1 on bit value 0, matching the bit encoding (bit 0 <-> spin +1)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def f01(x):
    """Step weight (1 + x)/2: 1 on aligned pairs, 0 on anti-aligned."""
    return 0.5 * (1.0 + x)


def _dense_guard(n):
    if n > DENSE_MAX_SITES:
        raise ValueError("dense operators need n_sites <= %d, got %d" % (DENSE_MAX_SITES, n))


def _tau_spins(tau):
    """Integer array of tau_i = +-1 values."""
    return np.array([1 - 2 * ((tau.bits >> i) & 1) for i in range(tau.n_sites)], dtype=np.int64)


@dataclass(frozen=True)
class GlauberCoefficients:
    """Closed-form couplings of H_tau.

    A and B weigh the uniform and three-site transverse terms on sites whose
    tau neighbors agree; the per-site A_tilde/B_tilde arrays switch to the
    reduced values on sites where tau_{i-1} = -tau_{i+1}.
    """

    A: float
    B: float
    A_tilde: np.ndarray
    B_tilde: np.ndarray


def glauber_coefficients(tau, params):
    """Coefficients (A, B, per-site A_tilde, B_tilde) for the closed-form builder.

    A uses the conjugate-multiplied form (1+delta)(1+sqrt(1-gamma^2))/2 - delta,
    which is regular at gamma = 0. B = (1 - delta) - A: the gamma -> 0 limit of
    the generic-rate builder forces B -> -delta, and delta = -1 must give the
    isotropic exchange couplings A = B = 1, both of which pin this form.
    """
    g, d = params.gamma, params.delta
    root = math.sqrt(max(1.0 - g * g, 0.0))
    a = (1.0 + d) * (1.0 + root) / 2.0 - d
    b = (1.0 - d) - a
    a_off = math.sqrt(max(1.0 - d * d, 0.0)) * max(1.0 - g * g, 0.0) ** 0.25
    t = _tau_spins(tau)
    n = tau.n_sites
    a_tilde = np.empty(n)
    b_tilde = np.empty(n)
    for i in range(n):
        if t[(i - 1) % n] == t[(i + 1) % n]:
            a_tilde[i] = a
            b_tilde[i] = b
        else:
            a_tilde[i] = a_off
            b_tilde[i] = 0.0
    return GlauberCoefficients(A=a, B=b, A_tilde=a_tilde, B_tilde=b_tilde)


@dataclass(frozen=True)
class TauHamiltonian:
    """One sector Hamiltonian: real symmetric matrix plus its labels."""

    tau: TauSector
    params: ModelParams
    matrix: np.ndarray


def _as_matrix(h):
    return h.matrix if isinstance(h, TauHamiltonian) else np.asarray(h)


def build_h_tau(tau, params):
    """Closed-form sector Hamiltonian.

    H_tau = -Gamma sum_i { [At_i - Bt_i Z_{i-1} Z_{i+1}] X_i - 1
                           + (gamma/2)(1+delta) Z_i [f(t_{i-1} t_i) Z_{i-1}
                                                     + f(t_i t_{i+1}) Z_{i+1}]
                           - delta f(t_{i-1} t_{i+1}) Z_{i-1} Z_{i+1} }
    with f(x) = (1+x)/2 and periodic site indexing.
    """
    n = tau.n_sites
    if n != params.n_sites:
        raise ValueError("tau and parameters disagree on n_sites")
    _dense_guard(n)
    g, d, big_g = params.gamma, params.delta, params.Gamma
    coef = glauber_coefficients(tau, params)
    t = _tau_spins(tau)
    s = spin_table(n).astype(np.float64)
    dim = 1 << n
    ham = np.zeros((dim, dim))
    idx = np.arange(dim, dtype=np.int64)
    diag = np.zeros(dim)
    for i in range(n):
        im, ip = (i - 1) % n, (i + 1) % n
        f_li = f01(t[im] * t[i])
        f_ir = f01(t[i] * t[ip])
        f_lr = f01(t[im] * t[ip])
        diag += -big_g * (
            -1.0
            + 0.5 * g * (1.0 + d) * s[:, i] * (f_li * s[:, im] + f_ir * s[:, ip])
            - d * f_lr * s[:, im] * s[:, ip]
        )
        off = -big_g * (coef.A_tilde[i] - coef.B_tilde[i] * s[:, im] * s[:, ip])
        ham[idx ^ (1 << i), idx] += off
    ham[idx, idx] += diag
    return TauHamiltonian(tau=tau, params=params, matrix=ham)


def build_h_tau_generic(tau, params, rate=None):
    """Sector Hamiltonian assembled directly from the rates.

    Off-diagonal entries are -sqrt(v_i(sigma) v_i(sigma_tilde)) and the diagonal
    is sum_i [w_i(sigma) + w_i(sigma_tilde)]/2 with sigma_tilde_i = tau_i sigma_i.
    An independent code path from build_h_tau; the two must agree for rates that
    satisfy detailed balance.
    """
    n = tau.n_sites
    if n != params.n_sites:
        raise ValueError("tau and parameters disagree on n_sites")
    _dense_guard(n)
    dim = 1 << n
    if rate is None or rate is glauber_rate:
        w = rate_matrix(params)
        v = v_matrix(params)
    else:
        w = rate_matrix(params, rate)
        v = np.empty((dim, n))
        for bits in range(dim):
            c = SpinConfig(bits, n)
            for i in range(n):
                v[bits, i] = v_rate(c, i, params)
    idx = np.arange(dim, dtype=np.int64)
    tilde = idx ^ tau.bits
    ham = np.zeros((dim, dim))
    for i in range(n):
        off = -np.sqrt(np.maximum(v[idx, i] * v[tilde, i], 0.0))
        ham[idx ^ (1 << i), idx] += off
    ham[idx, idx] += 0.5 * (w[idx].sum(axis=1) + w[tilde].sum(axis=1))
    return TauHamiltonian(tau=tau, params=params, matrix=ham)


def _kron3(op_left, op_mid, op_right):
    """8x8 operator on three consecutive sites, leftmost site on bit 0."""
    return np.kron(op_right, np.kron(op_mid, op_left))


def local_term(tau, params, i):
    """The 8x8 term of H_tau acting on sites (i-1, i, i+1), site i-1 on bit 0."""
    n = tau.n_sites
    g, d, big_g = params.gamma, params.delta, params.Gamma
    coef = glauber_coefficients(tau, params)
    t = _tau_spins(tau)
    im, ip = (i - 1) % n, (i + 1) % n
    f_li = f01(t[im] * t[i])
    f_ir = f01(t[i] * t[ip])
    f_lr = f01(t[im] * t[ip])
    eye = _kron3(PAULI_I, PAULI_I, PAULI_I)
    term = (
        coef.A_tilde[i] * _kron3(PAULI_I, PAULI_X, PAULI_I)
        - coef.B_tilde[i] * _kron3(PAULI_Z, PAULI_X, PAULI_Z)
        - eye
        + 0.5 * g * (1.0 + d) * (
            f_li * _kron3(PAULI_Z, PAULI_Z, PAULI_I)
            + f_ir * _kron3(PAULI_I, PAULI_Z, PAULI_Z)
        )
        - d * f_lr * _kron3(PAULI_Z, PAULI_I, PAULI_Z)
    )
    return -big_g * term


def embed_three_site(term8, i, n_sites):
    """Embed an 8x8 operator on sites (i-1, i, i+1) mod N into the full space."""
    _dense_guard(n_sites)
    dim = 1 << n_sites
    sites = [(i - 1) % n_sites, i % n_sites, (i + 1) % n_sites]
    if len(set(sites)) != 3:
        raise ValueError("three-site embedding needs n_sites >= 3")
    idx = np.arange(dim, dtype=np.int64)
    local = ((idx >> sites[0]) & 1) | (((idx >> sites[1]) & 1) << 1) | (((idx >> sites[2]) & 1) << 2)
    mask = (1 << sites[0]) | (1 << sites[1]) | (1 << sites[2])
    base = idx & ~mask
    out = np.zeros((dim, dim))
    for y in range(8):
        target = base | ((y & 1) << sites[0]) | (((y >> 1) & 1) << sites[1]) | (((y >> 2) & 1) << sites[2])
        out[target, idx] += term8[y, local]
    return out


def local_terms_open(tau, params):
    """Open-boundary term list: (center site i, 8x8 matrix) for i = 1 .. N-2.

    Dropping the two wrap-around terms of the periodic sum defines the
    open-boundary sector Hamiltonian used by the tensor-network solver.
    """
    return [(i, local_term(tau, params, i)) for i in range(1, tau.n_sites - 1)]


def build_h_tau_open(tau, params):
    """Dense open-boundary sector Hamiltonian (sum of interior 3-site terms)."""
    n = tau.n_sites
    _dense_guard(n)
    dim = 1 << n
    out = np.zeros((dim, dim))
    for i, term in local_terms_open(tau, params):
        out += embed_three_site(term, i, n)
    return out


def local_term_eigenvalues(case, tau_pair_product, params):
    """Analytic eigenvalues of the 3-site local terms.

    case 'equal' (tau_{i-1} = tau_{i+1}), with t = tau_{i-1} tau_i:
        {0, 2 Gamma (1 - delta), Gamma (1+delta) (1 -+ sqrt(1 - gamma^2 (1-t)/2))},
        each twofold degenerate on the 8-dimensional 3-site space.
    case 'unequal' (tau_{i-1} = -tau_{i+1}):
        Gamma (1 -+ sqrt(gamma^2 (1+delta)^2 + 4 sqrt(1-gamma^2) (1-delta^2)) / 2),
        each fourfold degenerate on the 8-dimensional 3-site space.
    """
    g, d, big_g = params.gamma, params.delta, params.Gamma
    if case == "equal":
        t = tau_pair_product
        if t not in (-1, 1):
            raise ValueError("tau_pair_product must be +-1")
        root = math.sqrt(max(1.0 - g * g * (1 - t) / 2.0, 0.0))
        return [
            0.0,
            2.0 * big_g * (1.0 - d),
            big_g * (1.0 + d) * (1.0 - root),
            big_g * (1.0 + d) * (1.0 + root),
        ]
    if case == "unequal":
        root = math.sqrt(max(g * g * (1.0 + d) ** 2 + 4.0 * math.sqrt(max(1.0 - g * g, 0.0)) * (1.0 - d * d), 0.0))
        return [big_g * (1.0 - 0.5 * root), big_g * (1.0 + 0.5 * root)]
    raise ValueError("case must be 'equal' or 'unequal'")


def _antiperiodic_momenta(n):
    return (2.0 * np.arange(n) + 1.0) * math.pi / n


def _periodic_momenta(n):
    return 2.0 * np.arange(n) * math.pi / n


def _mode_energies(momenta, params):
    return 2.0 * params.Gamma * (1.0 - params.gamma * np.cos(momenta))


def free_fermion_spectrum(params, n_sites=None):
    """All subset sums of the single-mode energies 2 Gamma (1 - gamma cos q).

    Uses one momentum grid chosen by chain-length parity: antiperiodic momenta
    (2k+1) pi / N for even N, periodic momenta 2 pi k / N for odd N. The empty
    subset contributes the zero ground eigenvalue. Only defined at delta = 0
    for the homogeneous sector.
    """
    if params.delta != 0.0:
        raise ValueError("free-fermion spectrum requires delta = 0")
    n = params.n_sites if n_sites is None else n_sites
    if n > 20:
        raise ValueError("subset sums need n_sites <= 20")
    q = _periodic_momenta(n) if n % 2 else _antiperiodic_momenta(n)
    lam = _mode_energies(q, params)
    sums = np.zeros(1)
    for e in lam:
        sums = np.concatenate([sums, sums + e])
    return np.sort(sums)


def free_fermion_spectrum_exact(params, n_sites=None):
    """Parity-resolved subset sums reproducing the dense spectrum exactly.

    Even-size subsets draw their modes from the antiperiodic momentum grid and
    odd-size subsets from the periodic grid; the union matches the dense
    spectrum of the homogeneous-sector operator at delta = 0 for every N.
    """
    if params.delta != 0.0:
        raise ValueError("free-fermion spectrum requires delta = 0")
    n = params.n_sites if n_sites is None else n_sites
    if n > 20:
        raise ValueError("subset sums need n_sites <= 20")

    def _parity_sums(lam):
        even, odd = np.zeros(1), np.zeros(0)
        for e in lam:
            even, odd = np.concatenate([even, odd + e]), np.concatenate([odd, even + e])
        return even, odd

    even_a, _ = _parity_sums(_mode_energies(_antiperiodic_momenta(n), params))
    _, odd_p = _parity_sums(_mode_energies(_periodic_momenta(n), params))
    return np.sort(np.concatenate([even_a, odd_p]))


@dataclass(frozen=True)
class BlockDecomposition:
    """Cyclic runs of coupled sites and the uncoupled remainder at delta = -1."""

    blocks: List[List[int]]
    isolated_sites: List[int]


def f_table(tau):
    """Integer array f_i = (1 + tau_{i-1} tau_{i+1})/2 over all sites."""
    t = _tau_spins(tau)
    n = tau.n_sites
    return np.array([(1 + t[(i - 1) % n] * t[(i + 1) % n]) // 2 for i in range(n)], dtype=np.int64)


def heisenberg_split(tau):
    """Maximal cyclic runs of consecutive sites with f_i = 1.

    Each run couples a contiguous stretch of bond variables into one open
    isotropic exchange block; runs wrapping around the ring are merged, since
    their terms share a bond variable and do not commute otherwise. Sites with
    f_i = 0 are isolated.
    """
    f = f_table(tau)
    n = tau.n_sites
    isolated = [i for i in range(n) if f[i] == 0]
    if not isolated:
        return BlockDecomposition(blocks=[list(range(n))], isolated_sites=[])
    blocks = []
    run = []
    for i in range(n):
        if f[i] == 1:
            run.append(i)
        elif run:
            blocks.append(run)
            run = []
    if run:
        # wrap-around: merge the trailing run into the leading one if adjacent
        if blocks and blocks[0][0] == 0:
            blocks[0] = run + blocks[0]
        else:
            blocks.append(run)
    return BlockDecomposition(blocks=blocks, isolated_sites=isolated)


def _exchange_chain(m):
    """Open isotropic exchange chain sum_k (XX + YY + ZZ)_{k,k+1} on m qubits."""
    dim = 1 << m
    out = np.zeros((dim, dim))
    idx = np.arange(dim, dtype=np.int64)
    for k in range(m - 1):
        zk = 1 - 2 * ((idx >> k) & 1)
        zk1 = 1 - 2 * ((idx >> (k + 1)) & 1)
        flip = idx ^ ((1 << k) | (1 << (k + 1)))
        out[flip, idx] += 1.0 - zk * zk1  # XX + YY flips anti-aligned pairs with weight 2
        out[idx, idx] += zk * zk1
    return out


def _parity_split_eigvals(op):
    """Eigenvalues of a parity-preserving qubit operator, per weight parity."""
    dim = op.shape[0]
    idx = np.arange(dim)
    pop = np.zeros(dim, dtype=np.int64)
    k = dim.bit_length() - 1
    for b in range(k):
        pop += (idx >> b) & 1
    even = np.nonzero(pop % 2 == 0)[0]
    odd = np.nonzero(pop % 2 == 1)[0]
    vals_even = scipy.linalg.eigvalsh(op[np.ix_(even, even)]) if even.size else np.zeros(0)
    vals_odd = scipy.linalg.eigvalsh(op[np.ix_(odd, odd)]) if odd.size else np.zeros(0)
    return vals_even, vals_odd


def delta_minus_one_spectrum(tau, params):
    """Spectrum of H_tau at delta = -1 assembled from its commuting blocks.

    Each cyclic run of f_i = 1 sites contributes an open exchange chain on
    (run length + 1) bond variables; isolated stretches leave free bond
    variables. The full spectrum is the combinatorial multiset of sums of one
    eigenvalue per block, weighted by the parity bookkeeping of the free bonds
    (the two-to-one map from spin to bond configurations doubles every value).
    """
    if params.delta != -1.0:
        raise ValueError("block spectrum requires delta = -1")
    n = tau.n_sites
    _dense_guard(n)
    big_g = params.Gamma
    split = heisenberg_split(tau)
    if not split.isolated_sites:
        # single run covering the whole ring: fall back to the bond-sector route
        return bond_spectrum(tau, params)
    tables = []
    for run in split.blocks:
        m = len(run) + 1
        vals_even, vals_odd = _parity_split_eigvals(_exchange_chain(m))
        tables.append([(v, 1) for v in vals_even] + [(v, -1) for v in vals_odd])
    n_free = n - sum(len(run) + 1 for run in split.blocks)
    sums = np.zeros(1)
    pars = np.ones(1, dtype=np.int64)
    for table in tables:
        lam = np.array([x[0] for x in table])
        par = np.array([x[1] for x in table], dtype=np.int64)
        sums = (sums[:, None] + lam[None, :]).ravel()
        pars = (pars[:, None] * par[None, :]).ravel()
    if n_free >= 1:
        values = np.repeat(big_g * n - big_g * sums, 1 << n_free)
    else:
        keep = pars == 1
        values = np.repeat(big_g * n - big_g * sums[keep], 2)
    return np.sort(values)


def diagonal_zero_states(tau, params):
    """Kernel of the diagonal operator H_tau(1, 1), by enumeration.

    A configuration is a zero state iff every site satisfies
    f(t_{i-1} t_i) s_{i-1} s_i + f(t_i t_{i+1}) s_i s_{i+1}
        - f(t_{i-1} t_{i+1}) s_{i-1} s_{i+1} = 1.
    """
    if params.gamma != 1.0 or params.delta != 1.0:
        raise ValueError("diagonal kernel rule requires gamma = delta = 1")
    n = tau.n_sites
    if n > 20:
        raise ValueError("enumeration needs n_sites <= 20")
    t = _tau_spins(tau)
    idx = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(1 << n, dtype=bool)
    s = [(1 - 2 * ((idx >> i) & 1)).astype(np.int64) for i in range(n)]
    for i in range(n):
        im, ip = (i - 1) % n, (i + 1) % n
        f_li = (1 + t[im] * t[i]) // 2
        f_ir = (1 + t[i] * t[ip]) // 2
        f_lr = (1 + t[im] * t[ip]) // 2
        lhs = f_li * s[im] * s[i] + f_ir * s[i] * s[ip] - f_lr * s[im] * s[ip]
        ok &= lhs == 1
    return [SpinConfig(int(b), n) for b in np.nonzero(ok)[0]]


@dataclass(frozen=True)
class BondRepresentation:
    """Couplings of H_tau rewritten in bond variables Zb_j = Z_{j-1} Z_j.

    The site-i term couples bond qubits (i, i+1):
        H = -Gamma sum_i [xx_i XbXb + yy_i YbYb + zz_i ZbZb - 1]
            - Gamma sum_j field_j Zb_j.
    """

    n_sites: int
    Gamma: float
    xx: np.ndarray
    yy: np.ndarray
    zz: np.ndarray
    field: np.ndarray


def bond_representation(tau, params):
    """Per-bond couplings {A_tilde, B_tilde, -delta f, field} of the exchange form."""
    if tau.n_sites != params.n_sites:
        raise ValueError("tau and parameters disagree on n_sites")
    if params.boundary != "periodic":
        raise ValueError("bond variables are defined on the ring")
    n = tau.n_sites
    g, d = params.gamma, params.delta
    coef = glauber_coefficients(tau, params)
    t = _tau_spins(tau)
    zz = np.array([-d * f01(t[(i - 1) % n] * t[(i + 1) % n]) for i in range(n)])
    field = np.array([g * (1.0 + d) * f01(t[(j - 1) % n] * t[j]) for j in range(n)])
    return BondRepresentation(
        n_sites=n,
        Gamma=params.Gamma,
        xx=coef.A_tilde.copy(),
        yy=coef.B_tilde.copy(),
        zz=zz,
        field=field,
    )


def bond_operator(rep, twist=False):
    """Dense operator of the bond-variable form on N bond qubits.

    With twist=True the XX and YY couplings of the site-0 term change sign;
    that operator carries the flip-odd sector of the spin form (flipping spin 0
    crosses the branch cut of the two-to-one spin-to-bond map).
    """
    n = rep.n_sites
    _dense_guard(n)
    dim = 1 << n
    idx = np.arange(dim, dtype=np.int64)
    z = [(1 - 2 * ((idx >> j) & 1)).astype(np.float64) for j in range(n)]
    ham = np.zeros((dim, dim))
    diag = np.full(dim, rep.Gamma * float(n))
    for j in range(n):
        diag -= rep.Gamma * rep.field[j] * z[j]
    for i in range(n):
        j = (i + 1) % n
        sign = -1.0 if (twist and i == 0) else 1.0
        flip = idx ^ ((1 << i) | (1 << j))
        zz_pair = z[i] * z[j]
        # XbXb has entry +1, YbYb entry -(z_i z_j), on the doubly flipped pair
        ham[flip, idx] += -rep.Gamma * sign * (rep.xx[i] - rep.yy[i] * zz_pair)
        diag -= rep.Gamma * rep.zz[i] * zz_pair
    ham[idx, idx] += diag
    return ham


def bond_spectrum(tau, params):
    """Spin-form spectrum recovered from the bond form, as a sorted multiset.

    The even bond-parity sector of the untwisted operator carries the flip-even
    spin sector and the even sector of the twisted operator the flip-odd one;
    their union is isospectral with build_h_tau.
    """
    rep = bond_representation(tau, params)
    parts = []
    for twist in (False, True):
        vals_even, _ = _parity_split_eigvals(bond_operator(rep, twist=twist))
        parts.append(vals_even)
    return np.sort(np.concatenate(parts))


def save_dense_operator(path, h):
    """Binary export: 16-byte header (N, tau_bits as int64) + row-major float64."""
    mat = _as_matrix(h)
    tau_bits = h.tau.bits if isinstance(h, TauHamiltonian) else 0
    n = h.tau.n_sites if isinstance(h, TauHamiltonian) else int(np.log2(mat.shape[0]))
    with open(path, "wb") as fh:
        fh.write(np.array([n, tau_bits], dtype="<i8").tobytes())
        fh.write(np.ascontiguousarray(mat, dtype="<f8").tobytes())


def load_dense_operator(path):
    """Inverse of save_dense_operator: returns (n_sites, tau_bits, matrix)."""
    with open(path, "rb") as fh:
        header = np.frombuffer(fh.read(16), dtype="<i8")
        n, tau_bits = int(header[0]), int(header[1])
        dim = 1 << n
        mat = np.frombuffer(fh.read(dim * dim * 8), dtype="<f8").reshape(dim, dim).copy()
    return n, tau_bits, mat


def save_operator_coo_csv(path, h, tol=0.0):
    """Sparse triplet export (row, col, value) of the nonzero entries."""
    mat = _as_matrix(h)
    rows, cols = np.nonzero(np.abs(mat) > tol)
    with open(path, "w") as fh:
        fh.write("row,col,value\n")
        for r, c in zip(rows, cols):
            fh.write("%d,%d,%s\n" % (r, c, repr(float(mat[r, c]))))
