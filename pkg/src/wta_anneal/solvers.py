"""Classical reference solvers: exhaustive enumeration and cross-entropy.

The brute-force solvers are the ground truth the quantum pipeline is
checked against; the cross-entropy optimizer is the stochastic
cross-validator.  All tie-breaking is by lowest encoded basis index so
results are deterministic across modules.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeLimitError, ValidationError
from .instance import WtaInstance, decode_index
from .spin_model import Basis, QuadraticSpinModel, bits_for_indices, energies_for_bits

__all__ = [
    "ENUMERATION_CEILING",
    "CeParams",
    "CeResult",
    "brute_force_wta",
    "brute_force_ising",
    "cross_entropy_wta",
]

ENUMERATION_CEILING = 24
_CHUNK = 1 << 18


def _check_ceiling(N: int) -> None:
    if N > ENUMERATION_CEILING:
        raise SizeLimitError(
            f"N={N} exceeds the {ENUMERATION_CEILING}-bit enumeration ceiling; "
            "use the cross-entropy solver instead"
        )


def brute_force_wta(inst: WtaInstance) -> tuple[np.ndarray, float]:
    """Exact feasible minimizer of the surviving-threat objective.

    Enumerates all 2^N binary matrices, keeps those with at most one
    target per weapon, and returns (assignment, objective); ties break to
    the lowest encoded index.
    """
    N = inst.num_qubits
    _check_ceiling(N)
    m, n = inst.m, inst.n
    surv_t = (1.0 - inst.probs.T)[None, :, :]  # (1, n, m)
    best_k, best_val = -1, np.inf
    for start in range(0, inst.dim, _CHUNK):
        ks = np.arange(start, min(start + _CHUNK, inst.dim))
        bits3 = bits_for_indices(ks, N).reshape(len(ks), n, m)
        feasible = (bits3.sum(axis=1) <= 1).all(axis=1)
        survival = np.where(bits3[:, :, :] == 1, surv_t, 1.0).prod(axis=2)
        vals = survival @ inst.values
        vals[~feasible] = np.inf
        idx = int(np.argmin(vals))
        if vals[idx] < best_val:
            best_val = float(vals[idx])
            best_k = start + idx
    return decode_index(best_k, m, n), best_val


def brute_force_ising(model: QuadraticSpinModel) -> tuple[np.ndarray, float]:
    """Exhaustive ground state of a QUBO-basis model: (bitstring, energy)."""
    if model.basis is not Basis.QUBO:
        raise ValidationError("brute_force_ising expects a QUBO-basis model")
    N = model.num_sites
    _check_ceiling(N)
    best_k, best_val = -1, np.inf
    for start in range(0, model.dim, _CHUNK):
        ks = np.arange(start, min(start + _CHUNK, model.dim))
        vals = energies_for_bits(model, bits_for_indices(ks, N))
        idx = int(np.argmin(vals))
        if vals[idx] < best_val:
            best_val = float(vals[idx])
            best_k = start + idx
    bits = ((best_k >> np.arange(N, dtype=np.int64)) & 1).astype(np.int8)
    return bits, best_val


@dataclass(frozen=True)
class CeParams:
    """Cross-entropy settings; defaults are tuned for 12-qubit instances."""

    sample_count: int = 500
    elite_fraction: float = 0.1
    smoothing: float = 0.7
    max_iterations: int = 200
    convergence_threshold: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.sample_count < 10:
            raise ValidationError(f"sample_count must be >= 10, got {self.sample_count}")
        if not 0 < self.elite_fraction < 1:
            raise ValidationError(f"elite_fraction must be in (0, 1), got {self.elite_fraction}")
        if not 0 < self.smoothing <= 1:
            raise ValidationError(f"smoothing must be in (0, 1], got {self.smoothing}")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if self.convergence_threshold <= 0:
            raise ValidationError("convergence_threshold must be positive")


@dataclass(frozen=True)
class CeResult:
    assignment: np.ndarray
    objective: float
    iterations: int
    converged: bool


def cross_entropy_wta(inst: WtaInstance, params: CeParams | None = None) -> CeResult:
    """Cross-entropy search over feasible assignments.

    Each weapon samples independently from a categorical distribution over
    {idle, target 1..n}, so every sample satisfies the one-target-per-weapon
    constraint by construction.  The distribution is refit to the elite
    fraction each iteration with exponential smoothing.  Deterministic for
    a fixed seed; returns the best assignment ever sampled.
    """
    params = params or CeParams()
    rng = np.random.default_rng(params.seed)
    m, n = inst.m, inst.n
    M = params.sample_count
    n_elite = max(1, int(np.ceil(params.elite_fraction * M)))
    # categorical over n+1 choices per weapon; column 0 means idle
    P = np.full((m, n + 1), 1.0 / (n + 1))
    survival_factors = 1.0 - inst.probs  # (m, n)

    best_val = np.inf
    best_choices = np.zeros(m, dtype=np.int64)
    converged = False
    it = 0
    for it in range(1, params.max_iterations + 1):
        u = rng.random((M, m))
        cdf = np.cumsum(P, axis=1)
        choices = np.empty((M, m), dtype=np.int64)
        for i in range(m):
            choices[:, i] = np.searchsorted(cdf[i], u[:, i], side="right")
        np.clip(choices, 0, n, out=choices)

        survival = np.ones((M, n))
        for i in range(m):
            c = choices[:, i]
            hit = c > 0
            tgt = c[hit] - 1
            rows = np.nonzero(hit)[0]
            survival[rows, tgt] *= survival_factors[i, tgt]
        vals = survival @ inst.values

        order = np.argsort(vals, kind="stable")
        if vals[order[0]] < best_val:
            best_val = float(vals[order[0]])
            best_choices = choices[order[0]].copy()
        elites = choices[order[:n_elite]]

        freq = np.zeros_like(P)
        for i in range(m):
            freq[i] = np.bincount(elites[:, i], minlength=n + 1) / n_elite
        new_P = params.smoothing * freq + (1.0 - params.smoothing) * P
        delta = float(np.abs(new_P - P).max())
        P = new_P
        if delta < params.convergence_threshold:
            converged = True
            break

    bits = np.zeros((m, n), dtype=np.int8)
    for i in range(m):
        if best_choices[i] > 0:
            bits[i, best_choices[i] - 1] = 1
    return CeResult(assignment=bits, objective=best_val, iterations=it, converged=converged)
