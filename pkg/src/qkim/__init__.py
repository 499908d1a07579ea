"""Numerical laboratory for a quantum kinetic Ising chain.

Classical Glauber dynamics, the bit-flip Lindblad master equation built on the
same rates, the per-sector coherence Hamiltonians with their analytic special
cases, and an imaginary-time MPS engine for large-chain entropy profiles.
"""

from .classical import (
    build_generator,
    build_symmetrized_hamiltonian,
    propagate_probability,
)
from .hamiltonians import (
    BlockDecomposition,
    BondRepresentation,
    GlauberCoefficients,
    TauHamiltonian,
    bond_operator,
    bond_representation,
    bond_spectrum,
    build_h_tau,
    build_h_tau_generic,
    build_h_tau_open,
    delta_minus_one_spectrum,
    diagonal_zero_states,
    embed_three_site,
    f_table,
    free_fermion_spectrum,
    free_fermion_spectrum_exact,
    glauber_coefficients,
    heisenberg_split,
    local_term,
    local_term_eigenvalues,
    local_terms_open,
)
from .model import (
    ModelParams,
    SpinConfig,
    TauSector,
    beta_from_gamma,
    config_from_string,
    config_to_string,
    energy_table,
    equilibrium_distribution,
    flip,
    ising_energy,
    partition_function,
    spin,
    spin_table,
    thermal_vector,
)
from .mps import (
    GroundStateResult,
    MpsState,
    apply_nnn_term,
    apply_three_site_gate,
    apply_two_site_gate,
    entropy_profile,
    from_product_state,
    imaginary_time_ground_state,
    load_mps,
    move_center,
    mps_to_statevector,
    overlap,
    save_mps,
)
from .quantum import (
    build_lindbladian,
    build_sector_generator,
    coherence_decay_rate,
    decompose_density,
    ghz_density,
    plus_product_density,
    propagate_density,
    propagate_sector,
    reassemble_density,
    sector_report,
    similarity_transform,
    thermal_density,
)
from .rates import (
    DbcReport,
    check_detailed_balance,
    glauber_rate,
    rate_matrix,
    v_matrix,
    v_rate,
)
from .spectra import (
    SpectralReport,
    eigh,
    eigvalsh,
    positivity_sweep,
    spectral_report,
    sweep_to_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
