"""Scikit-learn style wrappers around the functional core.

Each solver follows the estimator protocol: hyperparameters in
``__init__`` (so ``get_params`` / ``set_params`` / ``clone`` work),
``fit(instance)`` runs the algorithm and stores results in trailing-
underscore attributes, ``predict`` returns the assignment matrix.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ValidationError
from .instance import WtaInstance, encode_assignment, evaluate_objective
from .solvers import CeParams, brute_force_ising, brute_force_wta, cross_entropy_wta
from .spin_model import compile_instance, default_penalty, to_ising
from . import evolution

__all__ = [
    "SpinModelCompiler",
    "BruteForceSolver",
    "CrossEntropySolver",
    "AdiabaticSolver",
]


def _check_instance(inst) -> WtaInstance:
    if not isinstance(inst, WtaInstance):
        raise ValidationError(f"expected a WtaInstance, got {type(inst).__name__}")
    return inst


class SpinModelCompiler(TransformerMixin, BaseEstimator):
    """Stateless transformer: WTA instance -> quadratic spin model."""

    def __init__(self, penalty=None, normalize_row_linear=False, basis="qubo"):
        self.penalty = penalty
        self.normalize_row_linear = normalize_row_linear
        self.basis = basis

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        if isinstance(X, WtaInstance):
            return self._compile_one(X)
        return [self._compile_one(inst) for inst in X]

    def _compile_one(self, inst):
        inst = _check_instance(inst)
        model = compile_instance(
            inst,
            penalty=self.penalty,
            normalize_row_linear=self.normalize_row_linear,
        )
        if self.basis == "ising":
            model = to_ising(model)
        elif self.basis != "qubo":
            raise ValidationError(f"unknown basis {self.basis!r}")
        return model


class _SolverBase(BaseEstimator):
    def predict(self, X=None):
        if not hasattr(self, "assignment_"):
            raise ValidationError("solver is not fitted yet")
        return self.assignment_


class BruteForceSolver(_SolverBase):
    """Exact solver by exhaustive enumeration; ``method`` picks the space.

    ``method='wta'`` enumerates feasible assignments of the original
    objective; ``method='ising'`` compiles the quadratic model first and
    returns its decoded ground state.
    """

    def __init__(self, method="wta", penalty=None, normalize_row_linear=False):
        self.method = method
        self.penalty = penalty
        self.normalize_row_linear = normalize_row_linear

    def fit(self, X, y=None):
        inst = _check_instance(X)
        if self.method == "wta":
            bits, value = brute_force_wta(inst)
        elif self.method == "ising":
            model = compile_instance(
                inst, penalty=self.penalty, normalize_row_linear=self.normalize_row_linear
            )
            flat, self.energy_ = brute_force_ising(model)
            bits = flat.reshape((inst.m, inst.n), order="F")
            value = evaluate_objective(inst, bits)
        else:
            raise ValidationError(f"unknown method {self.method!r}")
        self.assignment_ = bits
        self.objective_ = value
        self.index_ = encode_assignment(bits)
        return self


class CrossEntropySolver(_SolverBase):
    """Cross-entropy stochastic solver over feasible assignments."""

    def __init__(
        self,
        sample_count=500,
        elite_fraction=0.1,
        smoothing=0.7,
        max_iterations=200,
        convergence_threshold=1e-3,
        seed=0,
    ):
        self.sample_count = sample_count
        self.elite_fraction = elite_fraction
        self.smoothing = smoothing
        self.max_iterations = max_iterations
        self.convergence_threshold = convergence_threshold
        self.seed = seed

    def fit(self, X, y=None):
        inst = _check_instance(X)
        result = cross_entropy_wta(
            inst,
            CeParams(
                sample_count=self.sample_count,
                elite_fraction=self.elite_fraction,
                smoothing=self.smoothing,
                max_iterations=self.max_iterations,
                convergence_threshold=self.convergence_threshold,
                seed=self.seed,
            ),
        )
        self.assignment_ = result.assignment
        self.objective_ = result.objective
        self.index_ = encode_assignment(result.assignment)
        self.n_iterations_ = result.iterations
        self.converged_ = result.converged
        return self


class AdiabaticSolver(_SolverBase):
    """Annealing-simulation solver: evolve, measure, decode the argmax."""

    def __init__(
        self,
        total_time=80.0,
        num_steps=None,
        penalty=None,
        normalize_row_linear=False,
        final="quadratic",
        num_samples=25,
        norm_tol=1e-6,
    ):
        self.total_time = total_time
        self.num_steps = num_steps
        self.penalty = penalty
        self.normalize_row_linear = normalize_row_linear
        self.final = final
        self.num_samples = num_samples
        self.norm_tol = norm_tol

    def fit(self, X, y=None):
        inst = _check_instance(X)
        penalty = self.penalty if self.penalty is not None else default_penalty(inst)
        if self.final == "quadratic":
            model = compile_instance(
                inst, penalty=penalty, normalize_row_linear=self.normalize_row_linear
            )
            hf = evolution.build_final_hamiltonian_quadratic(model)
        elif self.final == "exact":
            hf = evolution.build_final_hamiltonian_exact(inst, penalty)
        else:
            raise ValidationError(f"unknown final Hamiltonian {self.final!r}")
        hb = evolution.build_initial_hamiltonian(inst.num_qubits)
        schedule = evolution.Schedule(
            total_time=self.total_time,
            num_steps=self.num_steps,
            sample_times=tuple(np.linspace(0.0, self.total_time, self.num_samples)),
        )
        state, trace = evolution.evolve(hb, hf, schedule, tol=self.norm_tol)
        self.state_ = state
        self.trace_ = trace
        self.index_ = evolution.argmax_state(state)
        from .instance import decode_index

        self.assignment_ = decode_index(self.index_, inst.m, inst.n)
        self.objective_ = evaluate_objective(inst, self.assignment_)
        self.ground_index_ = int(np.argmin(hf.diagonal))
        self.ground_population_ = float(np.abs(state[self.ground_index_]) ** 2)
        return self
