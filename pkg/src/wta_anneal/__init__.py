"""Weapon-target assignment via simulated adiabatic spin-model annealing."""

from .errors import (
    EigensolverError,
    IntegrationError,
    ParseError,
    SizeLimitError,
    ValidationError,
    WtaAnnealError,
)
from .instance import (
    GeneratorConfig,
    WtaInstance,
    decode_index,
    encode_assignment,
    evaluate_objective,
    generate_instance,
    is_feasible,
    parse_instance,
    serialize_instance,
    site_index,
)
from .spin_model import (
    Basis,
    QuadraticSpinModel,
    all_energies,
    bits_for_indices,
    compile_instance,
    default_penalty,
    energies_for_bits,
    energy,
    export_coefficients,
    ising_energy,
    parse_coefficients,
    to_ising,
)
from .evolution import (
    EvolutionTrace,
    Hamiltonian,
    Schedule,
    SpectrumTrace,
    argmax_state,
    build_final_hamiltonian_exact,
    build_final_hamiltonian_quadratic,
    build_initial_hamiltonian,
    evolve,
    initial_state,
    measure_distribution,
    spectrum,
)
from .solvers import (
    CeParams,
    CeResult,
    brute_force_ising,
    brute_force_wta,
    cross_entropy_wta,
)
from .estimators import (
    AdiabaticSolver,
    BruteForceSolver,
    CrossEntropySolver,
    SpinModelCompiler,
)

__version__ = "0.1.0"
