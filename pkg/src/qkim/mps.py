"""Matrix product states with imaginary-time TEBD for open-chain sector ground states.

States are kept in mixed-canonical form around an orthogonality center; bond
Schmidt vectors store the normalized squared weights, so the bipartite entropy
at bond L is -sum lambda log2 lambda directly. Three-site terms are applied as
8x8 gates on a contiguous triple with two singular value decompositions; a
swap-conjugated route for gates on sites (i, i+2) is provided as well.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from .hamiltonians import local_terms_open
from .model import ModelParams, TauSector

DT_LADDER = (0.1, 0.03, 0.01, 0.003, 0.001)

# reshaping a (2,2,2) physical block row-major puts the leftmost site on the
# high bit; the dense builders put it on bit 0, so gates get permuted
_PERM3 = np.array([0, 4, 2, 6, 1, 5, 3, 7])
_PERM2 = np.array([0, 2, 1, 3])

SWAP_GATE = np.eye(4)[[0, 2, 1, 3]]


@dataclass
class MpsState:
    """Open-boundary MPS in mixed-canonical form.

    site_tensors[k] has shape (left bond, 2, right bond); tensors left of the
    center are left-orthonormal, tensors right of it right-orthonormal.
    bond_schmidt[b] holds the squared Schmidt weights across bond b (between
    sites b and b+1), normalized to unit sum.
    """

    site_tensors: List[np.ndarray]
    bond_schmidt: List[np.ndarray]
    chi_max: Optional[int] = None
    center: int = 0

    @property
    def n_sites(self):
        return len(self.site_tensors)

    def bond_dimensions(self):
        return [t.shape[2] for t in self.site_tensors[:-1]]


def from_product_state(local_states, chi_max=None):
    """Bond-dimension-1 state from per-site 2-vectors (each must be normalized)."""
    tensors = []
    for vec in local_states:
        v = np.asarray(vec, dtype=float)
        if v.shape != (2,):
            raise ValueError("local states must be 2-vectors")
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise ValueError("local states must be normalized")
        tensors.append(v.reshape(1, 2, 1).copy())
    n = len(tensors)
    if n < 2:
        raise ValueError("need at least 2 sites")
    return MpsState(
        site_tensors=tensors,
        bond_schmidt=[np.ones(1) for _ in range(n - 1)],
        chi_max=chi_max,
        center=0,
    )


def _svd(mat):
    try:
        return scipy.linalg.svd(mat, full_matrices=False)
    except scipy.linalg.LinAlgError:
        return scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesvd")


def _truncate(u, s, vh, chi_max, cutoff):
    keep = s.size
    if cutoff > 0.0 and s.size:
        keep = int(np.count_nonzero(s > s[0] * cutoff))
    if chi_max is not None:
        keep = min(keep, chi_max)
    keep = max(keep, 1)
    s = s[:keep].copy()
    norm = np.linalg.norm(s)
    if norm == 0.0:
        raise RuntimeError("state collapsed to zero norm under truncation")
    s /= norm
    return u[:, :keep], s, vh[:keep]


def _move_right(state, chi_max, cutoff):
    c = state.center
    t = state.site_tensors[c]
    dl, d, dr = t.shape
    u, s, vh = _truncate(*_svd(t.reshape(dl * d, dr)), chi_max, cutoff)
    state.site_tensors[c] = u.reshape(dl, d, -1)
    state.bond_schmidt[c] = s ** 2
    state.site_tensors[c + 1] = np.tensordot(s[:, None] * vh, state.site_tensors[c + 1], axes=(1, 0))
    state.center = c + 1


def _move_left(state, chi_max, cutoff):
    c = state.center
    t = state.site_tensors[c]
    dl, d, dr = t.shape
    u, s, vh = _truncate(*_svd(t.reshape(dl, d * dr)), chi_max, cutoff)
    state.site_tensors[c] = vh.reshape(-1, d, dr)
    state.bond_schmidt[c - 1] = s ** 2
    state.site_tensors[c - 1] = np.tensordot(state.site_tensors[c - 1], u * s[None, :], axes=(2, 0))
    state.center = c - 1


def move_center(state, target, chi_max=None, cutoff=0.0):
    """Shift the orthogonality center to the target site via exact splits."""
    if not 0 <= target < state.n_sites:
        raise ValueError("target site out of range")
    while state.center < target:
        _move_right(state, chi_max, cutoff)
    while state.center > target:
        _move_left(state, chi_max, cutoff)
    return state


def canonical_defect(state):
    """Worst deviation from left/right orthonormality away from the center."""
    worst = 0.0
    for k, t in enumerate(state.site_tensors):
        dl, d, dr = t.shape
        if k < state.center:
            m = t.reshape(dl * d, dr)
            worst = max(worst, np.abs(m.T @ m - np.eye(dr)).max())
        elif k > state.center:
            m = t.reshape(dl, d * dr)
            worst = max(worst, np.abs(m @ m.T - np.eye(dl)).max())
    return worst


def _resolve_caps(state, chi_max, cutoff):
    chi = state.chi_max if chi_max is None else chi_max
    cut = 0.0 if cutoff is None else cutoff
    return chi, cut


def apply_two_site_gate(state, i, gate, chi_max=None, svd_cutoff=1e-12, leave="right"):
    """Apply a 4x4 gate to sites (i, i+1); site i sits on bit 0 of the gate.

    The pair is contracted with the center inside, the gate applied, and the
    block re-split by one singular value decomposition with truncation to the
    bond cap, discarding relative weights below svd_cutoff.
    """
    n = state.n_sites
    if not 0 <= i < n - 1:
        raise ValueError("gate site out of range")
    chi, cut = _resolve_caps(state, chi_max, svd_cutoff)
    if state.center < i:
        move_center(state, i)
    elif state.center > i + 1:
        move_center(state, i + 1)
    theta = np.tensordot(state.site_tensors[i], state.site_tensors[i + 1], axes=(2, 0))
    dl, _, _, dr = theta.shape
    g = np.asarray(gate)[np.ix_(_PERM2, _PERM2)]
    theta = np.tensordot(g, theta.reshape(dl, 4, dr), axes=(1, 1)).transpose(1, 0, 2)
    u, s, vh = _truncate(*_svd(theta.reshape(dl * 2, 2 * dr)), chi, cut)
    k = s.size
    state.bond_schmidt[i] = s ** 2
    if leave == "right":
        state.site_tensors[i] = u.reshape(dl, 2, k)
        state.site_tensors[i + 1] = (s[:, None] * vh).reshape(k, 2, dr)
        state.center = i + 1
    else:
        state.site_tensors[i] = (u * s[None, :]).reshape(dl, 2, k)
        state.site_tensors[i + 1] = vh.reshape(k, 2, dr)
        state.center = i
    return state


def apply_nnn_term(state, i, gate, chi_max=None, svd_cutoff=1e-12):
    """Apply a 4x4 gate to the next-nearest pair (i, i+2).

    Realized as swap(i+1, i+2), gate on the now-adjacent pair (i, i+1),
    swap back; equivalent to the dense application up to truncation.
    """
    if not 0 <= i < state.n_sites - 2:
        raise ValueError("next-nearest pair out of range")
    apply_two_site_gate(state, i + 1, SWAP_GATE, chi_max, svd_cutoff)
    apply_two_site_gate(state, i, gate, chi_max, svd_cutoff)
    apply_two_site_gate(state, i + 1, SWAP_GATE, chi_max, svd_cutoff)
    return state


def apply_three_site_gate(state, i, gate, chi_max=None, svd_cutoff=1e-12, leave="right"):
    """Apply an 8x8 gate to the triple (i-1, i, i+1); site i-1 on gate bit 0.

    The triple is contracted into one block and re-split with two singular
    value decompositions, refreshing both Schmidt vectors. leave picks which
    end of the triple keeps the orthogonality center (chained sweeps reuse it).
    """
    j = i - 1
    n = state.n_sites
    if not 0 <= j <= n - 3:
        raise ValueError("triple out of range")
    chi, cut = _resolve_caps(state, chi_max, svd_cutoff)
    if state.center < j:
        move_center(state, j)
    elif state.center > j + 2:
        move_center(state, j + 2)
    theta = np.tensordot(state.site_tensors[j], state.site_tensors[j + 1], axes=(2, 0))
    theta = np.tensordot(theta, state.site_tensors[j + 2], axes=(3, 0))
    dl, _, _, _, dr = theta.shape
    g = np.asarray(gate)[np.ix_(_PERM3, _PERM3)]
    theta = np.tensordot(g, theta.reshape(dl, 8, dr), axes=(1, 1)).transpose(1, 0, 2)
    theta = theta.reshape(dl, 2, 2, 2, dr)
    if leave == "right":
        u, s, vh = _truncate(*_svd(theta.reshape(dl * 2, 4 * dr)), chi, cut)
        k1 = s.size
        state.site_tensors[j] = u.reshape(dl, 2, k1)
        state.bond_schmidt[j] = s ** 2
        u2, s2, vh2 = _truncate(*_svd((s[:, None] * vh).reshape(k1 * 2, 2 * dr)), chi, cut)
        k2 = s2.size
        state.site_tensors[j + 1] = u2.reshape(k1, 2, k2)
        state.bond_schmidt[j + 1] = s2 ** 2
        state.site_tensors[j + 2] = (s2[:, None] * vh2).reshape(k2, 2, dr)
        state.center = j + 2
    else:
        u, s, vh = _truncate(*_svd(theta.reshape(dl * 4, 2 * dr)), chi, cut)
        k2 = s.size
        state.site_tensors[j + 2] = vh.reshape(k2, 2, dr)
        state.bond_schmidt[j + 1] = s ** 2
        u2, s2, vh2 = _truncate(*_svd((u * s[None, :]).reshape(dl * 2, 2 * k2)), chi, cut)
        k1 = s2.size
        state.site_tensors[j + 1] = vh2.reshape(k1, 2, k2)
        state.bond_schmidt[j] = s2 ** 2
        state.site_tensors[j] = (u2 * s2[None, :]).reshape(dl, 2, k1)
        state.center = j
    return state


def site_expectation(state, i, op):
    """Expectation of a single-site 2x2 operator."""
    move_center(state, i)
    t = state.site_tensors[i]
    return float(np.real(np.einsum("apb,pq,aqb->", t.conj(), np.asarray(op), t)))


def overlap(a, b):
    """Inner product <a|b> of two states on the same chain."""
    if a.n_sites != b.n_sites:
        raise ValueError("states live on different chains")
    env = np.ones((1, 1))
    for ta, tb in zip(a.site_tensors, b.site_tensors):
        env = np.einsum("ab,apc,bpd->cd", env, ta.conj(), tb)
    return complex(env[0, 0])


def energy(state, terms):
    """Variational energy sum over (center site, 8x8 matrix) three-site terms."""
    total = 0.0
    for i, h in sorted(terms, key=lambda item: item[0]):
        j = i - 1
        move_center(state, i)
        theta = np.tensordot(state.site_tensors[j], state.site_tensors[j + 1], axes=(2, 0))
        theta = np.tensordot(theta, state.site_tensors[j + 2], axes=(3, 0))
        dl, _, _, _, dr = theta.shape
        th = theta.reshape(dl, 8, dr)
        hm = np.asarray(h)[np.ix_(_PERM3, _PERM3)]
        total += float(np.real(np.einsum("axb,xy,ayb->", th.conj(), hm, th)))
    return total


def entropy_profile(state):
    """Bipartite entropies -sum lambda log2 lambda at every bond, left to right."""
    out = []
    for weights in state.bond_schmidt:
        p = weights[weights > 1e-300]
        p = p / p.sum()
        out.append(float(-(p * np.log2(p)).sum()))
    return out


def _gate_exponential(h, scale):
    vals, vecs = scipy.linalg.eigh(0.5 * (h + h.T))
    return (vecs * np.exp(scale * vals)) @ vecs.T


@dataclass
class GroundStateResult:
    state: MpsState
    energy: float
    converged: bool
    stage_energies: List[List[float]]


def imaginary_time_ground_state(
    tau,
    params,
    chi_max=64,
    cutoff=1e-12,
    dt_schedule=DT_LADDER,
    sweeps_per_stage=200,
    energy_tol=1e-10,
    initial_local_states=None,
):
    """Imaginary-time TEBD ground-state search for the open-chain sector operator.

    Starts from the uniform transverse product state (or the given per-site
    2-vectors) and applies symmetric sweeps of exp(-dt h_i / 2) three-site
    gates (left-to-right then mirrored) with a decreasing dt ladder,
    renormalizing at every split. A stage ends when the per-sweep energy change
    drops below energy_tol (scaled) or after its sweep budget (one shared count
    or a per-stage sequence); running out of sweeps raises a warning and clears
    the converged flag.

    The chain ends never flip (no term is centered there), so the edge spins
    along z are conserved: the flow stays inside the edge-spin blocks of the
    initial state. Polarized initial edges select one block.
    """
    n = tau.n_sites
    if n < 3:
        raise ValueError("need at least 3 sites")
    terms = local_terms_open(tau, params)
    if initial_local_states is None:
        amp = 1.0 / math.sqrt(2.0)
        initial_local_states = [(amp, amp)] * n
    state = from_product_state(initial_local_states, chi_max=chi_max)
    try:
        budgets = [int(b) for b in sweeps_per_stage]
        if len(budgets) != len(dt_schedule):
            raise ValueError("per-stage sweep budgets must match the dt schedule")
    except TypeError:
        budgets = [int(sweeps_per_stage)] * len(dt_schedule)
    e_prev = energy(state, terms)
    stage_energies = []
    all_converged = True
    for dt, budget in zip(dt_schedule, budgets):
        gates = {i: _gate_exponential(h, -0.5 * dt) for i, h in terms}
        history = []
        converged = False
        for _ in range(budget):
            for i in range(1, n - 1):
                apply_three_site_gate(state, i, gates[i], chi_max, cutoff, leave="right")
            for i in range(n - 2, 0, -1):
                apply_three_site_gate(state, i, gates[i], chi_max, cutoff, leave="left")
            e = energy(state, terms)
            history.append(e)
            if abs(e - e_prev) < energy_tol * max(1.0, abs(e)):
                e_prev = e
                converged = True
                break
            e_prev = e
        stage_energies.append(history)
        if not converged:
            all_converged = False
            warnings.warn(
                "imaginary-time stage dt=%g did not converge in %d sweeps" % (dt, budget)
            )
    # full canonical pass so every stored Schmidt vector reflects the final state
    move_center(state, n - 1)
    move_center(state, 0)
    move_center(state, n // 2)
    return GroundStateResult(
        state=state, energy=e_prev, converged=all_converged, stage_energies=stage_energies
    )


def mps_to_statevector(state):
    """Dense amplitude vector with site k on bit k; small chains only."""
    n = state.n_sites
    if n > 16:
        raise ValueError("dense conversion needs n_sites <= 16")
    acc = np.ones((1, 1))
    for t in state.site_tensors:
        block = np.tensordot(acc, t, axes=(1, 0))
        p, _, dr = block.shape
        # composite index bit_k * 2^k + previous bits: new bit goes on top
        acc = block.transpose(1, 0, 2).reshape(2 * p, dr)
    return acc.reshape(-1)


def save_mps(path, state):
    """Checkpoint: per-site tensors and Schmidt vectors as float64 arrays."""
    payload = {"center": np.array([state.center]), "n_sites": np.array([state.n_sites])}
    if state.chi_max is not None:
        payload["chi_max"] = np.array([state.chi_max])
    for k, t in enumerate(state.site_tensors):
        payload["tensor_%d" % k] = np.ascontiguousarray(t, dtype=np.float64)
    for b, s in enumerate(state.bond_schmidt):
        payload["schmidt_%d" % b] = np.ascontiguousarray(s, dtype=np.float64)
    np.savez(path, **payload)


def load_mps(path):
    with np.load(path) as data:
        n = int(data["n_sites"][0])
        tensors = [data["tensor_%d" % k].copy() for k in range(n)]
        schmidt = [data["schmidt_%d" % b].copy() for b in range(n - 1)]
        chi = int(data["chi_max"][0]) if "chi_max" in data else None
        center = int(data["center"][0])
    return MpsState(site_tensors=tensors, bond_schmidt=schmidt, chi_max=chi, center=center)


def save_entropy_csv(path, entropies):
    """CSV rows (L, S): entropy of the first L sites, L = 1 .. N-1."""
    with open(path, "w") as fh:
        fh.write("L,S\n")
        for b, s in enumerate(entropies):
            fh.write("%d,%s\n" % (b + 1, repr(float(s))))
