"""Quadratic spin energy models and the WTA block compiler.

The compiler builds the pairwise-interaction model from a WTA instance:
for every pair of sites in the same weapon row it accumulates the two
single-site survival terms plus a penalty coupling that punishes double
assignment, and for every pair in the same target column it accumulates
the expanded two-factor survival product.  Models exist in two bases:
``QUBO`` uses 0/1 site variables, ``ISING`` uses +/-1 spins obtained via
s = (1 - z) / 2.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError
from .instance import WtaInstance, site_index

__all__ = [
    "Basis",
    "QuadraticSpinModel",
    "default_penalty",
    "compile_instance",
    "energy",
    "ising_energy",
    "energies_for_bits",
    "all_energies",
    "to_ising",
    "export_coefficients",
    "parse_coefficients",
]


class Basis(enum.Enum):
    """Variable convention of a model: 0/1 site occupations or +/-1 spins."""

    QUBO = "qubo"
    ISING = "ising"


@dataclass(frozen=True, eq=False)
class QuadraticSpinModel:
    """Offset + linear + pairwise coefficients over ``num_sites`` spins.

    ``quadratic`` keys are canonical unordered pairs (i < j); self-pairs
    are rejected.
    """

    num_sites: int
    basis: Basis
    offset: float
    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_sites < 1:
            raise ValidationError(f"num_sites must be >= 1, got {self.num_sites}")
        for site in self.linear:
            if not 0 <= site < self.num_sites:
                raise ValidationError(f"linear site {site} out of range")
        canon: dict[tuple[int, int], float] = {}
        for (a, b), coeff in self.quadratic.items():
            if a == b:
                raise ValidationError(f"self-pair ({a}, {b}) not allowed")
            if not (0 <= a < self.num_sites and 0 <= b < self.num_sites):
                raise ValidationError(f"pair ({a}, {b}) out of range")
            key = (a, b) if a < b else (b, a)
            canon[key] = canon.get(key, 0.0) + coeff
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "linear", dict(self.linear))
        object.__setattr__(self, "quadratic", canon)

    def __eq__(self, other):
        if not isinstance(other, QuadraticSpinModel):
            return NotImplemented
        return (
            self.num_sites == other.num_sites
            and self.basis == other.basis
            and self.offset == other.offset
            and self.linear == other.linear
            and self.quadratic == other.quadratic
        )

    @property
    def dim(self) -> int:
        return 1 << self.num_sites


def default_penalty(inst: WtaInstance) -> float:
    """Penalty energy that safely dominates any gain from double assignment."""
    return 2.0 * float(inst.values.sum()) * max(inst.n, 2)


def compile_instance(
    inst: WtaInstance,
    penalty: float | None = None,
    normalize_row_linear: bool = False,
) -> QuadraticSpinModel:
    """Build the pairwise (QUBO-basis) model for a WTA instance.

    The row-pair sum repeats each single-site survival term once per
    partner target, i.e. with multiplicity (n - 1); this is the literal
    block construction.  ``normalize_row_linear`` divides the row
    contributions by (n - 1) instead.

    A 1x1 instance degenerates to the single survival term with no pairs.
    """
    if penalty is None:
        penalty = default_penalty(inst)
    if penalty <= 0:
        raise ValidationError(f"penalty must be positive, got {penalty}")
    m, n = inst.m, inst.n
    V, p = inst.values, inst.probs
    N = m * n
    offset = 0.0
    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}

    def add_linear(site: int, coeff: float) -> None:
        linear[site] = linear.get(site, 0.0) + coeff

    def add_pair(a: int, b: int, coeff: float) -> None:
        key = (a, b) if a < b else (b, a)
        quadratic[key] = quadratic.get(key, 0.0) + coeff

    if m == 1 and n == 1:
        # degenerate: no pairs exist, keep the bare survival term
        return QuadraticSpinModel(
            num_sites=1,
            basis=Basis.QUBO,
            offset=float(V[0]),
            linear={0: -float(V[0] * p[0, 0])},
        )

    row_scale = 1.0 / (n - 1) if (normalize_row_linear and n > 1) else 1.0
    # row pairs: survival terms for both targets plus the penalty coupling
    for i in range(m):
        for j in range(n):
            for jp in range(j):
                offset += row_scale * float(V[j] + V[jp])
                add_linear(site_index(i, j, m), -row_scale * float(V[j] * p[i, j]))
                add_linear(site_index(i, jp, m), -row_scale * float(V[jp] * p[i, jp]))
                add_pair(site_index(i, j, m), site_index(i, jp, m), penalty)
    # column pairs: expanded two-factor survival product
    for j in range(n):
        for i in range(m):
            for ip in range(i):
                offset += float(V[j])
                add_linear(site_index(i, j, m), -float(V[j] * p[i, j]))
                add_linear(site_index(ip, j, m), -float(V[j] * p[ip, j]))
                add_pair(
                    site_index(i, j, m),
                    site_index(ip, j, m),
                    float(V[j] * p[i, j] * p[ip, j]),
                )

    return QuadraticSpinModel(
        num_sites=N, basis=Basis.QUBO, offset=offset, linear=linear, quadratic=quadratic
    )


def _check_bits(model: QuadraticSpinModel, s, allowed=(0, 1)) -> np.ndarray:
    s = np.asarray(s)
    if s.shape[-1] != model.num_sites:
        raise ValidationError(
            f"bitstring length {s.shape[-1]} does not match {model.num_sites} sites"
        )
    if not np.isin(s, allowed).all():
        raise ValidationError(f"entries must be in {allowed}")
    return s


def energy(model: QuadraticSpinModel, s) -> float:
    """Classical energy of a 0/1 bitstring under a QUBO-basis model."""
    if model.basis is not Basis.QUBO:
        raise ValidationError("energy() expects a QUBO-basis model")
    s = _check_bits(model, s).astype(np.float64)
    total = model.offset
    for site, coeff in model.linear.items():
        total += coeff * s[site]
    for (a, b), coeff in model.quadratic.items():
        total += coeff * s[a] * s[b]
    return float(total)


def ising_energy(model: QuadraticSpinModel, z) -> float:
    """Classical energy of a +/-1 spin configuration under an Ising-basis model."""
    if model.basis is not Basis.ISING:
        raise ValidationError("ising_energy() expects an Ising-basis model")
    z = _check_bits(model, z, allowed=(-1, 1)).astype(np.float64)
    total = model.offset
    for site, coeff in model.linear.items():
        total += coeff * z[site]
    for (a, b), coeff in model.quadratic.items():
        total += coeff * z[a] * z[b]
    return float(total)


def energies_for_bits(model: QuadraticSpinModel, bits: np.ndarray) -> np.ndarray:
    """Vectorized energies for a (batch, num_sites) matrix of 0/1 bits."""
    if model.basis is not Basis.QUBO:
        raise ValidationError("energies_for_bits() expects a QUBO-basis model")
    bits = _check_bits(model, bits).astype(np.float64)
    out = np.full(bits.shape[0], model.offset)
    for site, coeff in model.linear.items():
        out += coeff * bits[:, site]
    for (a, b), coeff in model.quadratic.items():
        out += coeff * bits[:, a] * bits[:, b]
    return out


def bits_for_indices(ks: np.ndarray, num_sites: int) -> np.ndarray:
    """Bit matrix (len(ks), num_sites) for basis indices, bit b at column b."""
    ks = np.asarray(ks, dtype=np.int64)
    return ((ks[:, None] >> np.arange(num_sites, dtype=np.int64)) & 1).astype(np.int8)


def all_energies(model: QuadraticSpinModel, max_sites: int = 24) -> np.ndarray:
    """Energies over the full basis, index-ordered.  Guarded by ``max_sites``."""
    if model.num_sites > max_sites:
        raise ValidationError(
            f"{model.num_sites} sites exceeds the {max_sites}-site enumeration ceiling"
        )
    out = np.empty(model.dim)
    chunk = 1 << 18
    for start in range(0, model.dim, chunk):
        ks = np.arange(start, min(start + chunk, model.dim))
        out[start : start + len(ks)] = energies_for_bits(
            model, bits_for_indices(ks, model.num_sites)
        )
    return out


def to_ising(model: QuadraticSpinModel) -> QuadraticSpinModel:
    """Exact basis change QUBO -> Ising via s = (1 - z) / 2.

    Energies agree exactly: E_ising(z) = E_qubo(s) whenever z = 1 - 2 s.
    """
    if model.basis is not Basis.QUBO:
        raise ValidationError("model is already in the Ising basis")
    offset = model.offset
    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    for site, a in model.linear.items():
        offset += a / 2.0
        linear[site] = linear.get(site, 0.0) - a / 2.0
    for (i, j), b in model.quadratic.items():
        offset += b / 4.0
        linear[i] = linear.get(i, 0.0) - b / 4.0
        linear[j] = linear.get(j, 0.0) - b / 4.0
        quadratic[(i, j)] = quadratic.get((i, j), 0.0) + b / 4.0
    linear = {k: v for k, v in linear.items() if v != 0.0}
    quadratic = {k: v for k, v in quadratic.items() if v != 0.0}
    return QuadraticSpinModel(
        num_sites=model.num_sites,
        basis=Basis.ISING,
        offset=offset,
        linear=linear,
        quadratic=quadratic,
    )


def export_coefficients(model: QuadraticSpinModel) -> str:
    """Deterministic sparse-triplet JSON document for a model."""
    doc = {
        "basis": model.basis.value,
        "num_sites": model.num_sites,
        "offset": model.offset,
        "linear": [[site, model.linear[site]] for site in sorted(model.linear)],
        "quadratic": [
            [a, b, model.quadratic[(a, b)]] for a, b in sorted(model.quadratic)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_coefficients(text: str) -> QuadraticSpinModel:
    """Inverse of :func:`export_coefficients`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    for name in ("basis", "num_sites", "offset", "linear", "quadratic"):
        if name not in doc:
            raise ParseError(f"missing field `{name}`")
    try:
        basis = Basis(doc["basis"])
    except ValueError:
        raise ParseError(f"basis: unknown value {doc['basis']!r}") from None
    num_sites = doc["num_sites"]
    if not isinstance(num_sites, int) or num_sites < 1:
        raise ParseError(f"num_sites: expected positive integer, got {num_sites!r}")
    linear = {}
    for idx, entry in enumerate(doc["linear"]):
        if not (isinstance(entry, list) and len(entry) == 2):
            raise ParseError(f"linear[{idx}]: expected [site, coeff]")
        linear[int(entry[0])] = float(entry[1])
    quadratic = {}
    for idx, entry in enumerate(doc["quadratic"]):
        if not (isinstance(entry, list) and len(entry) == 3):
            raise ParseError(f"quadratic[{idx}]: expected [i, j, coeff]")
        quadratic[(int(entry[0]), int(entry[1]))] = float(entry[2])
    try:
        return QuadraticSpinModel(
            num_sites=num_sites,
            basis=basis,
            offset=float(doc["offset"]),
            linear=linear,
            quadratic=quadratic,
        )
    except ValidationError as exc:
        raise ParseError(str(exc)) from exc
