"""Weapon-target assignment problem instances.

An instance holds m weapons, n targets, per-target threat values and the
m x n kill-probability matrix.  Decision matrices are plain 0/1 numpy
arrays of shape (m, n).  Every flat site/bit index in the package uses the
same column-major convention: entry (i, j) (0-based) lives at bit
``m * j + i``, so the weapon index varies fastest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError

__all__ = [
    "WtaInstance",
    "GeneratorConfig",
    "site_index",
    "evaluate_objective",
    "is_feasible",
    "encode_assignment",
    "decode_index",
    "generate_instance",
    "serialize_instance",
    "parse_instance",
]


@dataclass(frozen=True, eq=False)
class WtaInstance:
    """Immutable static WTA instance.

    Attributes
    ----------
    m, n : number of weapons and targets.
    values : shape (n,), positive threat value per target.
    probs : shape (m, n), kill probability of weapon i on target j, in [0, 1].
    """

    m: int
    n: int
    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValidationError(f"need m >= 1 and n >= 1, got m={self.m}, n={self.n}")
        values = np.asarray(self.values, dtype=np.float64)
        probs = np.asarray(self.probs, dtype=np.float64)
        if values.shape != (self.n,):
            raise ValidationError(f"values must have shape ({self.n},), got {values.shape}")
        if probs.shape != (self.m, self.n):
            raise ValidationError(f"probs must have shape ({self.m}, {self.n}), got {probs.shape}")
        if not np.all(values > 0):
            raise ValidationError("all threat values must be positive")
        if np.any(probs < 0) or np.any(probs > 1):
            raise ValidationError("all kill probabilities must lie in [0, 1]")
        values.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    @property
    def num_qubits(self) -> int:
        """N = m * n, one qubit per decision-matrix entry."""
        return self.m * self.n

    @property
    def dim(self) -> int:
        """State-space size K = 2 ** N."""
        return 1 << self.num_qubits

    def __eq__(self, other):
        if not isinstance(other, WtaInstance):
            return NotImplemented
        return (
            self.m == other.m
            and self.n == other.n
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.probs, other.probs)
        )


def site_index(i: int, j: int, m: int) -> int:
    """Flat bit position of decision entry (i, j), 0-based, weapon index fastest."""
    return m * j + i


def _check_assignment(inst: WtaInstance, bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.shape != (inst.m, inst.n):
        raise ValidationError(
            f"assignment shape {bits.shape} does not match instance ({inst.m}, {inst.n})"
        )
    if not np.isin(bits, (0, 1)).all():
        raise ValidationError("assignment entries must be 0 or 1")
    return bits.astype(np.int8)


def evaluate_objective(inst: WtaInstance, bits: np.ndarray) -> float:
    """Surviving threat value of an assignment.

    Returns sum_j V_j * prod_i (1 - p_ij)^x_ij.  Feasibility is not
    checked; the objective is defined for every binary matrix.
    """
    bits = _check_assignment(inst, bits)
    survival = np.where(bits == 1, 1.0 - inst.probs, 1.0).prod(axis=0)
    return float(survival @ inst.values)


def is_feasible(bits: np.ndarray) -> bool:
    """True iff every weapon engages at most one target (row sums <= 1)."""
    bits = np.asarray(bits)
    if not np.isin(bits, (0, 1)).all():
        raise ValidationError("assignment entries must be 0 or 1")
    return bool((bits.sum(axis=1) <= 1).all())


def encode_assignment(bits: np.ndarray) -> int:
    """Basis index of an assignment: k = sum_ij x_ij * 2^(m*j + i), 0-based i, j."""
    bits = np.asarray(bits)
    if not np.isin(bits, (0, 1)).all():
        raise ValidationError("assignment entries must be 0 or 1")
    flat = np.ravel(bits, order="F").astype(np.int64)
    return int((flat << np.arange(flat.size, dtype=np.int64)).sum())


def decode_index(k: int, m: int, n: int) -> np.ndarray:
    """Inverse of :func:`encode_assignment`; returns the (m, n) 0/1 matrix."""
    num = m * n
    if not 0 <= k < (1 << num):
        raise ValidationError(f"index {k} out of range [0, 2^{num})")
    flat = (k >> np.arange(num, dtype=np.int64)) & 1
    return np.asarray(flat, dtype=np.int8).reshape((m, n), order="F")


@dataclass(frozen=True)
class GeneratorConfig:
    """Ranges for random instance generation.

    Threat values are drawn uniformly from ``value_range`` (order of 1 by
    default).  Kill probabilities are drawn from ``prob_range``, then one
    randomly chosen entry per weapon row is redrawn from
    ``(high_prob_threshold, high_prob_cap)`` so every weapon has at least
    one very effective engagement.
    """

    value_range: tuple[float, float] = (0.5, 1.5)
    prob_range: tuple[float, float] = (0.05, 0.9)
    high_prob_threshold: float = 0.9
    high_prob_cap: float = 0.99

    def __post_init__(self):
        lo, hi = self.value_range
        if not (0 < lo <= hi):
            raise ValidationError(f"invalid value_range {self.value_range}")
        plo, phi = self.prob_range
        if not (0 <= plo <= phi <= 1):
            raise ValidationError(f"invalid prob_range {self.prob_range}")
        if not (0 < self.high_prob_threshold < self.high_prob_cap <= 1):
            raise ValidationError(
                f"need 0 < threshold < cap <= 1, got "
                f"{self.high_prob_threshold}, {self.high_prob_cap}"
            )


def generate_instance(
    m: int, n: int, seed: int, config: GeneratorConfig | None = None
) -> WtaInstance:
    """Random instance, deterministic for a fixed seed."""
    if m < 1 or n < 1:
        raise ValidationError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    config = config or GeneratorConfig()
    rng = np.random.default_rng(seed)
    values = rng.uniform(*config.value_range, size=n)
    probs = rng.uniform(*config.prob_range, size=(m, n))
    hot = rng.integers(0, n, size=m)
    probs[np.arange(m), hot] = rng.uniform(
        config.high_prob_threshold, config.high_prob_cap, size=m
    )
    return WtaInstance(m=m, n=n, values=values, probs=probs)


def serialize_instance(inst: WtaInstance) -> str:
    """JSON document with fields m, n, values, probs; lossless round trip."""
    doc = {
        "m": inst.m,
        "n": inst.n,
        "values": inst.values.tolist(),
        "probs": inst.probs.tolist(),
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_instance(text: str) -> WtaInstance:
    """Parse a document produced by :func:`serialize_instance`.

    Raises :class:`ParseError` naming the offending field path.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    for name in ("m", "n", "values", "probs"):
        if name not in doc:
            raise ParseError(f"missing field `{name}`")
    m, n = doc["m"], doc["n"]
    if not isinstance(m, int) or m < 1:
        raise ParseError(f"m: expected positive integer, got {m!r}")
    if not isinstance(n, int) or n < 1:
        raise ParseError(f"n: expected positive integer, got {n!r}")
    values = doc["values"]
    if not isinstance(values, list) or len(values) != n:
        raise ParseError(f"values: expected array of length {n}")
    for j, v in enumerate(values):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0:
            raise ParseError(f"values[{j}]: expected positive number, got {v!r}")
    probs = doc["probs"]
    if not isinstance(probs, list) or len(probs) != m:
        raise ParseError(f"probs: expected {m} rows")
    for i, row in enumerate(probs):
        if not isinstance(row, list) or len(row) != n:
            raise ParseError(f"probs[{i}]: expected row of length {n}")
        for j, p in enumerate(row):
            if not isinstance(p, (int, float)) or isinstance(p, bool):
                raise ParseError(f"probs[{i}][{j}]: expected number, got {p!r}")
            if not 0 <= p <= 1:
                raise ParseError(f"probs[{i}][{j}]: probability {p} outside [0, 1]")
    return WtaInstance(m=m, n=n, values=np.array(values), probs=np.array(probs))
