"""State-vector simulation of the adiabatic evolution.

The interpolated Hamiltonian H(t) = (1 - t/T) H_B + (t/T) H_F is
integrated on the Schrodinger equation (hbar = 1) with one of two
fixed-step 4th-order schemes:

* ``splitting`` (default when the driver/final structure allows it): a
  Yoshida composition of Strang splittings.  Both split factors are
  exponentiated exactly (the transverse-field driver factorizes into
  single-qubit rotations, the final Hamiltonian is diagonal), so the
  scheme is unconditionally stable and unitary to rounding regardless of
  how large the penalty part of the spectrum is.
* ``rk4``: classical explicit Runge-Kutta working in a rotating frame
  that subtracts the linear interpolation of the endpoint ground
  energies (a global phase), which keeps the occupied spectrum near zero.
  Step counts scale with the full spectral spread, so this is only
  practical for modest penalty magnitudes.

The state is never renormalized; norm drift is checked against the
requested tolerance and is the accuracy monitor for the rk4 path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh

from .errors import EigensolverError, IntegrationError, SizeLimitError, ValidationError
from .instance import WtaInstance
from .spin_model import (
    Basis,
    QuadraticSpinModel,
    all_energies,
    bits_for_indices,
)

__all__ = [
    "Hamiltonian",
    "Schedule",
    "EvolutionTrace",
    "SpectrumTrace",
    "build_initial_hamiltonian",
    "build_final_hamiltonian_quadratic",
    "build_final_hamiltonian_exact",
    "initial_state",
    "evolve",
    "spectrum",
    "measure_distribution",
    "argmax_state",
]

DEFAULT_QUBIT_CEILING = 16
DENSE_EIG_CEILING = 2048


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian operator, stored as a diagonal vector or a sparse matrix.

    ``ground_hint`` is a known ground-state energy used by the integrator's
    rotating frame; it is exact for diagonal operators and for the
    transverse-field driver.
    """

    dim: int
    diagonal: np.ndarray | None = None
    matrix: sp.spmatrix | None = None
    ground_hint: float | None = None
    # True only for the -sum X driver, whose exponential factorizes
    is_transverse_driver: bool = False

    def __post_init__(self):
        if (self.diagonal is None) == (self.matrix is None):
            raise ValidationError("exactly one of diagonal/matrix must be given")
        if self.diagonal is not None:
            d = np.asarray(self.diagonal, dtype=np.float64)
            if d.shape != (self.dim,):
                raise ValidationError(f"diagonal must have shape ({self.dim},)")
            d.setflags(write=False)
            object.__setattr__(self, "diagonal", d)
        else:
            if self.matrix.shape != (self.dim, self.dim):
                raise ValidationError("matrix shape does not match dim")
            defect = abs(self.matrix - self.matrix.getH()).max()
            if defect > 1e-12:
                raise ValidationError(f"matrix not Hermitian (defect {defect:.2e})")

    @property
    def is_diagonal(self) -> bool:
        return self.diagonal is not None

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        if self.diagonal is not None:
            return self.diagonal * psi
        return self.matrix @ psi

    def as_sparse(self) -> sp.spmatrix:
        if self.diagonal is not None:
            return sp.diags(self.diagonal, format="csr")
        return self.matrix.tocsr()

    def ground_energy(self) -> float:
        if self.ground_hint is not None:
            return self.ground_hint
        if self.diagonal is not None:
            return float(self.diagonal.min())
        return 0.0

    def spread_bound(self) -> float:
        """Upper bound on max |eigenvalue - ground_energy|."""
        if self.diagonal is not None:
            return float(self.diagonal.max() - self.diagonal.min())
        # Gershgorin radius around zero, shifted by the known ground energy
        bound = float(abs(self.matrix).sum(axis=1).max())
        return bound + abs(self.ground_energy())


def build_initial_hamiltonian(N: int, ceiling: int = DEFAULT_QUBIT_CEILING) -> Hamiltonian:
    """Transverse-field driver -sum_b X_b as a sparse matrix.

    Couples every pair of basis states at Hamming distance 1 with -1;
    its ground state is the uniform superposition at energy -N.
    """
    if N < 1:
        raise ValidationError(f"need N >= 1, got {N}")
    if N > ceiling:
        raise SizeLimitError(f"N={N} exceeds the {ceiling}-qubit simulation ceiling")
    K = 1 << N
    ks = np.arange(K, dtype=np.int64)
    rows = np.repeat(ks, N)
    cols = (ks[:, None] ^ (np.int64(1) << np.arange(N, dtype=np.int64))[None, :]).ravel()
    data = np.full(rows.size, -1.0)
    mat = sp.csr_matrix((data, (rows, cols)), shape=(K, K))
    return Hamiltonian(dim=K, matrix=mat, ground_hint=float(-N), is_transverse_driver=True)


def build_final_hamiltonian_quadratic(model: QuadraticSpinModel) -> Hamiltonian:
    """Diagonal operator whose entry at k is the model energy of bits(k)."""
    if model.basis is not Basis.QUBO:
        raise ValidationError("final Hamiltonian expects a QUBO-basis model")
    diag = all_energies(model)
    return Hamiltonian(dim=model.dim, diagonal=diag)


def build_final_hamiltonian_exact(inst: WtaInstance, penalty: float) -> Hamiltonian:
    """Diagonal operator from the exact objective plus row-pair penalties.

    Entry k is the surviving threat of the decoded assignment plus
    ``penalty`` per same-row assignment pair.  Exact (all orders), so it is
    the approximation-quality reference, not the annealer-compatible path.
    """
    if penalty <= 0:
        raise ValidationError(f"penalty must be positive, got {penalty}")
    m, n = inst.m, inst.n
    N = m * n
    K = 1 << N
    diag = np.empty(K)
    chunk = 1 << 18
    for start in range(0, K, chunk):
        ks = np.arange(start, min(start + chunk, K))
        bits = bits_for_indices(ks, N).astype(np.float64)
        # column-major site order: bits3[:, j, i] is entry (i, j)
        bits3 = bits.reshape(len(ks), n, m)
        survival = np.where(bits3 == 1, (1.0 - inst.probs.T)[None, :, :], 1.0).prod(axis=2)
        obj = survival @ inst.values
        row_counts = bits3.sum(axis=1)  # assignments per weapon
        violations = (row_counts * (row_counts - 1) / 2.0).sum(axis=1)
        diag[start : start + len(ks)] = obj + penalty * violations
    return Hamiltonian(dim=K, diagonal=diag)


def initial_state(N: int, ceiling: int = DEFAULT_QUBIT_CEILING) -> np.ndarray:
    """Normalized uniform superposition, the driver's ground state."""
    if N < 1:
        raise ValidationError(f"need N >= 1, got {N}")
    if N > ceiling:
        raise SizeLimitError(f"N={N} exceeds the {ceiling}-qubit simulation ceiling")
    K = 1 << N
    return np.full(K, 1.0 / math.sqrt(K), dtype=np.complex128)


@dataclass(frozen=True)
class Schedule:
    """Linear annealing schedule over duration ``total_time`` (hbar = 1).

    ``num_steps`` of None picks a step from the operator spectral bounds so
    the explicit integrator stays well inside its accuracy region.
    ``sample_times`` default to 25 evenly spaced report times.
    """

    total_time: float
    num_steps: int | None = None
    sample_times: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.total_time < 0:
            raise ValidationError(f"total_time must be >= 0, got {self.total_time}")
        if self.num_steps is not None and self.num_steps < 1:
            raise ValidationError(f"num_steps must be >= 1, got {self.num_steps}")
        if self.sample_times is not None:
            ts = tuple(float(t) for t in self.sample_times)
            if any(t < 0 or t > self.total_time for t in ts):
                raise ValidationError("sample times must lie in [0, total_time]")
            if list(ts) != sorted(ts):
                raise ValidationError("sample times must be sorted")
            object.__setattr__(self, "sample_times", ts)

    def resolved_samples(self) -> np.ndarray:
        if self.sample_times is not None:
            return np.array(self.sample_times)
        return np.linspace(0.0, self.total_time, 25)


@dataclass(frozen=True)
class EvolutionTrace:
    """Sampled populations and norms along one evolution run."""

    times: np.ndarray
    populations: np.ndarray  # (num_samples, K)
    norms: np.ndarray
    final_state: np.ndarray

    def top_states(self, top_m: int = 32, include: tuple[int, ...] = ()) -> list[int]:
        """Indices of the ``top_m`` states by peak population, plus ``include``."""
        peak = self.populations.max(axis=0)
        order = np.argsort(-peak, kind="stable")[:top_m]
        keep = sorted(set(order.tolist()) | set(include))
        return keep

    def to_csv(
        self,
        top_m: int | None = 32,
        include: tuple[int, ...] = (),
    ) -> str:
        """CSV text, one row per sample time; columns keyed by basis index."""
        if top_m is None:
            cols = list(range(self.populations.shape[1]))
        else:
            cols = self.top_states(top_m, include)
        header = ["time", "norm"] + [f"p_{k}" for k in cols]
        lines = [",".join(header)]
        for row, (t, nrm) in enumerate(zip(self.times, self.norms)):
            vals = [f"{t:.12g}", f"{nrm:.12g}"]
            vals += [f"{self.populations[row, k]:.12g}" for k in cols]
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SpectrumTrace:
    """Lowest eigenvalues of H(t) at each sample time, ascending per row."""

    times: np.ndarray
    eigenvalues: np.ndarray  # (num_samples, k)

    def gaps(self) -> np.ndarray:
        return self.eigenvalues[:, 1] - self.eigenvalues[:, 0]

    def min_gap(self) -> tuple[float, float]:
        """(smallest first gap, time at which it occurs)."""
        gaps = self.gaps()
        idx = int(np.argmin(gaps))
        return float(gaps[idx]), float(self.times[idx])

    def to_csv(self) -> str:
        k = self.eigenvalues.shape[1]
        header = ["time"] + [f"lambda_{i}" for i in range(k)]
        lines = [",".join(header)]
        for t, row in zip(self.times, self.eigenvalues):
            lines.append(",".join([f"{t:.12g}"] + [f"{v:.12g}" for v in row]))
        return "\n".join(lines) + "\n"


# Yoshida 4th-order composition weights for a symmetric 2nd-order substep
_YOSHIDA_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSHIDA_W0 = 1.0 - 2.0 * _YOSHIDA_W1

# target values of (step size) * (spectral spread) for each scheme
_RK4_THETA = 0.35
_SPLIT_THETA = 8.0


def _splitting_supported(hb: Hamiltonian, hf: Hamiltonian) -> bool:
    return (hb.is_diagonal or hb.is_transverse_driver) and hf.is_diagonal


def _auto_num_steps(hb: Hamiltonian, hf: Hamiltonian, total_time: float, method: str) -> int:
    bound = max(hb.spread_bound(), hf.spread_bound(), 1.0)
    theta = _SPLIT_THETA if method == "splitting" else _RK4_THETA
    steps = max(1000, int(math.ceil(total_time * bound / theta)))
    if method == "splitting":
        # 4th-order global error grows like T * h^4; keep it flat in T
        steps = max(steps, int(math.ceil(950.0 * (total_time / 10.0) ** 1.25)))
    return steps


def _resolve_method(hb: Hamiltonian, hf: Hamiltonian, method: str) -> str:
    if method == "auto":
        return "splitting" if _splitting_supported(hb, hf) else "rk4"
    if method not in ("splitting", "rk4"):
        raise ValidationError(f"unknown integration method {method!r}")
    if method == "splitting" and not _splitting_supported(hb, hf):
        raise ValidationError(
            "splitting integrator needs a transverse-field or diagonal driver "
            "and a diagonal final Hamiltonian"
        )
    return method


def _apply_x_rotations(psi: np.ndarray, theta: float, N: int) -> np.ndarray:
    """Apply exp(+i * theta * sum_b X_b), one 2x2 rotation per qubit."""
    c, s = math.cos(theta), math.sin(theta)
    for b in range(N):
        v = psi.reshape(-1, 2, 1 << b)
        lo = v[:, 0, :].copy()
        hi = v[:, 1, :]
        v[:, 0, :] = c * lo + 1j * s * hi
        v[:, 1, :] = c * hi + 1j * s * lo
    return psi


class _Stepper:
    """One fixed-size time step of the interpolated Hamiltonian."""

    def __init__(self, hb: Hamiltonian, hf: Hamiltonian, total_time: float, method: str):
        self.hb = hb
        self.hf = hf
        self.T = total_time
        self.method = method
        self.N = hb.dim.bit_length() - 1
        self.eb = hb.ground_energy()
        self.ef = hf.ground_energy()

    def advance(self, psi: np.ndarray, t: float, h: float) -> np.ndarray:
        if self.method == "rk4":
            return self._rk4(psi, t, h)
        # Yoshida = three Strang substeps; the driver exponentials all
        # commute, so adjacent half-steps are merged into one application
        subs = []
        tt = t
        for w in (_YOSHIDA_W1, _YOSHIDA_W0, _YOSHIDA_W1):
            hw = w * h
            s = (tt + 0.5 * hw) / self.T
            subs.append((hw, s))
            tt += hw
        psi = self._driver(psi, 0.5 * subs[0][0] * (1.0 - subs[0][1]))
        for idx, (hw, s) in enumerate(subs):
            psi = psi * np.exp(-1j * (hw * s) * self.hf.diagonal)
            tau = 0.5 * hw * (1.0 - s)
            if idx + 1 < len(subs):
                hw2, s2 = subs[idx + 1]
                tau += 0.5 * hw2 * (1.0 - s2)
            psi = self._driver(psi, tau)
        return psi

    def _driver(self, psi: np.ndarray, tau: float) -> np.ndarray:
        if self.hb.is_diagonal:
            return psi * np.exp(-1j * tau * self.hb.diagonal)
        # hb = -sum X, so exp(-i tau hb) = exp(+i tau sum X)
        return _apply_x_rotations(psi, tau, self.N)

    def _rk4(self, psi: np.ndarray, t: float, h: float) -> np.ndarray:
        k1 = self._deriv(t, psi)
        k2 = self._deriv(t + 0.5 * h, psi + 0.5 * h * k1)
        k3 = self._deriv(t + 0.5 * h, psi + 0.5 * h * k2)
        k4 = self._deriv(t + h, psi + h * k3)
        return psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def _deriv(self, t: float, v: np.ndarray) -> np.ndarray:
        s = t / self.T
        shift = (1.0 - s) * self.eb + s * self.ef
        hv = (1.0 - s) * self.hb.matvec(v) + s * self.hf.matvec(v) - shift * v
        return -1j * hv


def evolve(
    hb: Hamiltonian,
    hf: Hamiltonian,
    schedule: Schedule,
    tol: float = 1e-6,
    method: str = "auto",
) -> tuple[np.ndarray, EvolutionTrace]:
    """Integrate the Schrodinger equation along the annealing schedule.

    Starts from the uniform superposition, returns the final state and a
    trace sampled at the schedule's report times.  ``method`` is ``auto``
    (splitting when the operator structure allows, else rk4),
    ``splitting``, or ``rk4``.  Raises :class:`IntegrationError` when the
    norm drifts more than ``tol``.
    """
    if hb.dim != hf.dim:
        raise ValidationError(f"dimension mismatch: {hb.dim} vs {hf.dim}")
    method = _resolve_method(hb, hf, method)
    K = hb.dim
    N = K.bit_length() - 1
    psi = initial_state(N)
    T = schedule.total_time
    samples = schedule.resolved_samples()

    if T == 0:
        pops = np.tile(np.abs(psi) ** 2, (len(samples), 1))
        trace = EvolutionTrace(
            times=samples,
            populations=pops,
            norms=np.ones(len(samples)),
            final_state=psi,
        )
        return psi, trace

    num_steps = schedule.num_steps or _auto_num_steps(hb, hf, T, method)
    h_target = T / num_steps
    stepper = _Stepper(hb, hf, T, method)

    times_out = []
    pops_out = []
    norms_out = []
    t = 0.0
    sample_iter = iter(samples)
    next_sample = next(sample_iter, None)
    max_drift = 0.0

    def record(tt: float) -> None:
        nonlocal max_drift
        nrm = float(np.linalg.norm(psi))
        max_drift = max(max_drift, abs(nrm - 1.0))
        times_out.append(tt)
        norms_out.append(nrm)
        pops_out.append(np.abs(psi) ** 2)

    # consume any samples at t = 0 before stepping
    while next_sample is not None and next_sample <= 0.0:
        record(0.0)
        next_sample = next(sample_iter, None)

    segment_ends = sorted({float(s) for s in samples if s > 0.0} | {T})
    for end in segment_ends:
        n_sub = max(1, int(math.ceil((end - t) / h_target - 1e-12)))
        h = (end - t) / n_sub
        for _ in range(n_sub):
            psi = stepper.advance(psi, t, h)
            t += h
        t = end
        while next_sample is not None and next_sample <= end + 1e-12:
            record(next_sample)
            next_sample = next(sample_iter, None)

    if max_drift > tol:
        raise IntegrationError(
            f"norm drift {max_drift:.3e} exceeds tolerance {tol:.1e}; "
            f"increase num_steps (used {num_steps})"
        )
    trace = EvolutionTrace(
        times=np.array(times_out),
        populations=np.array(pops_out),
        norms=np.array(norms_out),
        final_state=psi,
    )
    return psi, trace


def _lowest_eigs(A: sp.spmatrix, k: int, time_label: float) -> np.ndarray:
    K = A.shape[0]
    if K <= DENSE_EIG_CEILING:
        vals = eigh(A.toarray(), eigvals_only=True, subset_by_index=(0, k - 1))
        return np.sort(vals)
    try:
        vals = spla.eigsh(A, k=k, which="SA", return_eigenvectors=False)
        return np.sort(vals)
    except spla.ArpackNoConvergence:
        # Lanczos stalled; fall back to a dense partial solve
        try:
            vals = eigh(A.toarray(), eigvals_only=True, subset_by_index=(0, k - 1))
            return np.sort(vals)
        except Exception as exc:
            raise EigensolverError(
                f"eigensolver failed at sample time {time_label:.6g}: {exc}"
            ) from exc


def spectrum(
    hb: Hamiltonian,
    hf: Hamiltonian,
    sample_times,
    total_time: float,
    k: int = 8,
) -> SpectrumTrace:
    """Lowest ``k`` eigenvalues of H(t) at each sample time."""
    if k < 2:
        raise ValidationError(f"need k >= 2 eigenvalues to resolve a gap, got {k}")
    if hb.dim != hf.dim:
        raise ValidationError(f"dimension mismatch: {hb.dim} vs {hf.dim}")
    if total_time <= 0:
        raise ValidationError(f"total_time must be positive, got {total_time}")
    times = np.asarray(list(sample_times), dtype=np.float64)
    if times.size == 0:
        raise ValidationError("need at least one sample time")
    if np.any(times < 0) or np.any(times > total_time):
        raise ValidationError("sample times must lie in [0, total_time]")
    hb_s = hb.as_sparse()
    hf_s = hf.as_sparse()
    rows = []
    for t in times:
        s = t / total_time
        A = ((1.0 - s) * hb_s + s * hf_s).tocsr()
        rows.append(_lowest_eigs(A, k, t))
    return SpectrumTrace(times=times, eigenvalues=np.array(rows))


def measure_distribution(state: np.ndarray) -> np.ndarray:
    """Born-rule probabilities |c_k|^2 of a normalized state."""
    state = np.asarray(state)
    nrm = np.linalg.norm(state)
    if abs(nrm - 1.0) > 1e-5:
        raise ValidationError(f"state is not normalized (norm {nrm:.8f})")
    p = np.abs(state) ** 2
    return p / p.sum()


def argmax_state(state: np.ndarray) -> int:
    """Basis index with the largest population; ties go to the lowest index."""
    return int(np.argmax(measure_distribution(state)))
