"""Bit-encoded Ising configurations, model parameters, energies, equilibrium weights.

Conventions shared by every module in the package:
  - bit i of an integer encodes site i, bit value 0 means spin +1, bit 1 means -1;
  - dense operators index their basis by this configuration integer;
  - tau configurations (conserved products sigma_i * sigma_tilde_i) use the same
    packing, tau = 0 is all-up.
"""

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class SpinConfig(NamedTuple):
    """A chain configuration packed into an integer (bit i = site i, 0 = up)."""

    bits: int
    n_sites: int


# conserved sigma*sigma_tilde products, same bit packing, bit 0 <-> tau_i = +1
TauSector = SpinConfig


def check_config(config):
    if config.n_sites < 1:
        raise ValueError("n_sites must be >= 1, got %d" % config.n_sites)
    if config.bits < 0 or config.bits >> config.n_sites:
        raise ValueError(
            "bits 0x%x has set bits at positions >= %d" % (config.bits, config.n_sites)
        )


def spin(config, i):
    """Spin value sigma_i = +-1 at site i."""
    if not 0 <= i < config.n_sites:
        raise IndexError("site %d out of range for %d sites" % (i, config.n_sites))
    return 1 - 2 * ((config.bits >> i) & 1)


def flip(config, i):
    """Flip the spin at site i; involutive."""
    if not 0 <= i < config.n_sites:
        raise IndexError("site %d out of range for %d sites" % (i, config.n_sites))
    return SpinConfig(config.bits ^ (1 << i), config.n_sites)


def config_to_string(config):
    """Serialize as '+'/'-' characters, site 0 leftmost."""
    check_config(config)
    return "".join("+" if (config.bits >> i) & 1 == 0 else "-" for i in range(config.n_sites))


def config_from_string(s):
    """Parse a '+'/'-' string, site 0 leftmost. Accepts unicode minus as well."""
    bits = 0
    for i, ch in enumerate(s):
        if ch in "-−":
            bits |= 1 << i
        elif ch != "+":
            raise ValueError("invalid spin character %r" % ch)
    return SpinConfig(bits, len(s))


def spin_table(n_sites):
    """(2^n, n) array of spin values, row = configuration integer, column = site."""
    idx = np.arange(1 << n_sites, dtype=np.int64)
    cols = [(1 - 2 * ((idx >> i) & 1)).astype(np.int8) for i in range(n_sites)]
    return np.stack(cols, axis=1)


BOUNDARIES = ("periodic", "open")


@dataclass(frozen=True)
class ModelParams:
    """Chain size, boundary, coupling and rate parameters.

    beta and gamma are stored independently; the named constructors derive one
    from the other through gamma = tanh(2 beta J) and reject inconsistent pairs.
    The bare constructor only checks ranges, so deliberately mismatched
    (beta, gamma) pairs can be built to probe broken detailed balance.
    """

    n_sites: int
    boundary: str = "periodic"
    J: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    Gamma: float = 1.0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        if self.boundary not in BOUNDARIES:
            raise ValueError("boundary must be one of %r" % (BOUNDARIES,))
        if self.J <= 0:
            raise ValueError("J must be positive")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if abs(self.delta) > 1.0:
            raise ValueError("delta must lie in [-1, 1]")
        if self.Gamma <= 0:
            raise ValueError("Gamma must be positive")

    @classmethod
    def from_gamma(cls, n_sites, gamma, delta=0.0, J=1.0, Gamma=1.0, boundary="periodic"):
        """Build params from gamma, deriving beta = artanh(gamma)/(2J)."""
        beta = beta_from_gamma(gamma, J)
        return cls(n_sites, boundary, J, beta, gamma, delta, Gamma)

    @classmethod
    def from_beta(cls, n_sites, beta, delta=0.0, J=1.0, Gamma=1.0, boundary="periodic"):
        """Build params from beta, deriving gamma = tanh(2 beta J)."""
        gamma = 1.0 if math.isinf(beta) else math.tanh(2.0 * beta * J)
        return cls(n_sites, boundary, J, beta, gamma, delta, Gamma)

    @classmethod
    def make(cls, n_sites, gamma=None, beta=None, delta=0.0, J=1.0, Gamma=1.0,
             boundary="periodic", tol=1e-12):
        """Build params from gamma and/or beta, enforcing gamma = tanh(2 beta J).

        If both are supplied they must agree to within tol.
        """
        if gamma is None and beta is None:
            raise ValueError("supply gamma, beta, or both")
        if gamma is None:
            return cls.from_beta(n_sites, beta, delta, J, Gamma, boundary)
        if beta is None:
            return cls.from_gamma(n_sites, gamma, delta, J, Gamma, boundary)
        expected = 1.0 if math.isinf(beta) else math.tanh(2.0 * beta * J)
        if abs(gamma - expected) > tol:
            raise ValueError(
                "gamma=%r inconsistent with tanh(2 beta J)=%r" % (gamma, expected)
            )
        return cls(n_sites, boundary, J, beta, gamma, delta, Gamma)


def beta_from_gamma(gamma, J=1.0):
    """Inverse temperature with gamma = tanh(2 beta J); gamma = 1 gives beta = inf."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    if gamma == 1.0:
        return math.inf
    return math.atanh(gamma) / (2.0 * J)


def params_to_json(params):
    """Flat JSON object with keys n_sites, boundary, J, beta, gamma, delta, Gamma."""
    beta = "inf" if math.isinf(params.beta) else params.beta
    return json.dumps(
        {
            "n_sites": params.n_sites,
            "boundary": params.boundary,
            "J": params.J,
            "beta": beta,
            "gamma": params.gamma,
            "delta": params.delta,
            "Gamma": params.Gamma,
        },
        sort_keys=True,
    )


def params_from_json(text):
    d = json.loads(text)
    return ModelParams(
        n_sites=int(d["n_sites"]),
        boundary=d["boundary"],
        J=float(d["J"]),
        beta=float(d["beta"]),
        gamma=float(d["gamma"]),
        delta=float(d["delta"]),
        Gamma=float(d["Gamma"]),
    )


def ising_energy(config, params):
    """Nearest-neighbor energy -J sum_i sigma_i sigma_{i+1}.

    Periodic boundary sums N bonds (index mod N), open boundary N-1 bonds.
    """
    if config.n_sites != params.n_sites:
        raise ValueError("configuration and parameters disagree on n_sites")
    check_config(config)
    n = params.n_sites
    bits = config.bits
    n_bonds = n if params.boundary == "periodic" else n - 1
    e = 0
    for i in range(n_bonds):
        si = 1 - 2 * ((bits >> i) & 1)
        sj = 1 - 2 * ((bits >> ((i + 1) % n)) & 1)
        e -= si * sj
    return params.J * e


def energy_table(params):
    """(2^n,) array of ising_energy over all configurations."""
    n = params.n_sites
    if n > 24:
        raise ValueError("energy_table is dense-only, n_sites <= 24")
    idx = np.arange(1 << n, dtype=np.int64)
    n_bonds = n if params.boundary == "periodic" else n - 1
    e = np.zeros(1 << n)
    for i in range(n_bonds):
        si = 1 - 2 * ((idx >> i) & 1)
        sj = 1 - 2 * ((idx >> ((i + 1) % n)) & 1)
        e -= si * sj
    return params.J * e


def partition_function(params):
    """Closed-form partition function of the chain.

    Periodic: 2^N (cosh^N(beta J) + sinh^N(beta J)). Open: the transfer-matrix
    value 2^N cosh^{N-1}(beta J), cross-checked by enumeration in the tests.
    Infinite beta returns inf.
    """
    if params.n_sites < 2:
        raise ValueError("partition_function needs n_sites >= 2")
    bj = params.beta * params.J
    n = params.n_sites
    if params.boundary == "periodic":
        return 2.0 ** n * (math.cosh(bj) ** n + math.sinh(bj) ** n)
    return 2.0 ** n * math.cosh(bj) ** (n - 1)


def equilibrium_distribution(params):
    """(2^n,) Boltzmann probabilities exp(-beta H)/Z over all configurations.

    Evaluated through energies shifted by the ground energy, which keeps the
    ratios exact and gives the correct zero-temperature limit at beta = inf.
    """
    e = energy_table(params)
    de = e - e.min()
    if math.isinf(params.beta):
        w = (de == 0.0).astype(float)
    else:
        w = np.exp(-params.beta * de)
    return w / w.sum()


def equilibrium_prob(config, params):
    """Boltzmann probability of one configuration."""
    if config.n_sites != params.n_sites:
        raise ValueError("configuration and parameters disagree on n_sites")
    check_config(config)
    return float(equilibrium_distribution(params)[config.bits])


def thermal_vector(params):
    """Unit vector with components proportional to exp(-beta H(sigma)/2).

    This is the componentwise square root of the equilibrium distribution; it
    spans the kernel of the symmetrized generator when detailed balance holds.
    """
    return np.sqrt(equilibrium_distribution(params))
