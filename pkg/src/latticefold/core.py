"""Sparse pseudo-Boolean objectives, the QUBO/Ising pair, and file interchange.

Every encoder in this package produces a :class:`PolynomialObjective` (or its
degree-<=2 restriction :class:`QuadraticObjective`), and every solver consumes
one.  Variables are 0-indexed integers; Boolean variables take values in
{0, 1}, spins in {-1, +1}, related by ``b = (1 + s) / 2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

BOOLEAN = "boolean"
ISING = "ising"


class InputError(ValueError):
    """Invalid user-facing input (bad assignment length, bad file, ...)."""


class TermAccumulator:
    """Mutable builder for polynomial terms.

    Accumulates coefficients on sorted, duplicate-free index tuples; exact
    zeros are dropped at build time.  Products respect Boolean idempotency.
    """

    def __init__(self) -> None:
        self.terms: dict[tuple[int, ...], float] = {}
        self.offset = 0.0

    def add(self, vars_, coeff: float) -> None:
        if coeff == 0.0:
            return
        key = tuple(sorted(set(int(v) for v in vars_)))
        if not key:
            self.offset += coeff
            return
        self.terms[key] = self.terms.get(key, 0.0) + coeff

    def add_poly(self, poly: dict[tuple[int, ...], float], scale: float = 1.0) -> None:
        for key, coeff in poly.items():
            self.add(key, coeff * scale)

    def add_product(self, p1: dict[tuple[int, ...], float], p2: dict[tuple[int, ...], float], scale: float = 1.0) -> None:
        """Add scale * p1 * p2.  Keys () are constants."""
        for k1, c1 in p1.items():
            for k2, c2 in p2.items():
                self.add(set(k1) | set(k2), c1 * c2 * scale)

    def build(self, num_vars: int, quadratic: bool = False) -> "PolynomialObjective":
        terms = {k: c for k, c in self.terms.items() if c != 0.0}
        cls = QuadraticObjective if quadratic else PolynomialObjective
        return cls(num_vars=num_vars, terms=terms, offset=self.offset)


def poly_product(polys, scale: float = 1.0) -> dict[tuple[int, ...], float]:
    """Product of linear-combination dicts {index-tuple: coeff}, idempotent."""
    out: dict[tuple[int, ...], float] = {(): scale}
    for poly in polys:
        nxt: dict[tuple[int, ...], float] = {}
        for k1, c1 in out.items():
            for k2, c2 in poly.items():
                key = tuple(sorted(set(k1) | set(k2)))
                nxt[key] = nxt.get(key, 0.0) + c1 * c2
        out = nxt
    return out


@dataclass(frozen=True)
class PolynomialObjective:
    """Arbitrary-degree pseudo-Boolean objective as a sparse term table.

    ``terms`` maps sorted, duplicate-free variable-index tuples (degree >= 1)
    to nonzero real coefficients; ``offset`` carries the constant part.
    Instances are immutable after construction and safe to share across
    threads.
    """

    num_vars: int
    terms: dict[tuple[int, ...], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self) -> None:
        for key, coeff in self.terms.items():
            if not key:
                raise ValueError("constant terms belong in offset")
            if list(key) != sorted(set(key)):
                raise ValueError(f"term key {key} not sorted/duplicate-free")
            if key[-1] >= self.num_vars or key[0] < 0:
                raise ValueError(f"term key {key} out of range for {self.num_vars} vars")
            if not np.isfinite(coeff) or coeff == 0.0:
                raise ValueError(f"coefficient for {key} must be finite and nonzero")

    @property
    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], float]]:
        """Deterministic iteration order: by (degree, indices)."""
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def evaluate(self, assignment) -> float:
        """Energy of a Boolean assignment: offset + sum_T c_T * prod b_i."""
        bits = np.asarray(assignment)
        if bits.shape != (self.num_vars,):
            raise InputError(
                f"assignment length {bits.shape} does not match num_vars={self.num_vars}"
            )
        energy = self.offset
        for key, coeff in self.terms.items():
            prod = 1.0
            for i in key:
                prod *= bits[i]
                if prod == 0.0:
                    break
            energy += coeff * prod
        return float(energy)

    def evaluate_batch(self, bits: np.ndarray) -> np.ndarray:
        """Vectorised energies for a (m, num_vars) 0/1 array."""
        bits = np.asarray(bits, dtype=np.float64)
        if bits.ndim != 2 or bits.shape[1] != self.num_vars:
            raise InputError(f"expected (m, {self.num_vars}) array, got {bits.shape}")
        energies = np.full(bits.shape[0], self.offset, dtype=np.float64)
        for key, coeff in self.terms.items():
            prod = bits[:, key[0]].copy()
            for i in key[1:]:
                prod *= bits[:, i]
            energies += coeff * prod
        return energies

    def scaled(self, factor: float) -> "PolynomialObjective":
        return type(self)(
            num_vars=self.num_vars,
            terms={k: c * factor for k, c in self.terms.items()} if factor != 0.0 else {},
            offset=self.offset * factor,
        )

    def __add__(self, other: "PolynomialObjective") -> "PolynomialObjective":
        if other.num_vars != self.num_vars:
            raise InputError("cannot add objectives with different num_vars")
        acc = TermAccumulator()
        acc.offset = self.offset + other.offset
        acc.add_poly(self.terms)
        acc.add_poly(other.terms)
        return acc.build(self.num_vars, quadratic=False)

    def to_dict(self, space: str = BOOLEAN) -> dict:
        return {
            "num_vars": self.num_vars,
            "offset": self.offset,
            "terms": [
                {"vars": list(k), "coeff": c} for k, c in self.sorted_terms()
            ],
            "space": space,
        }


@dataclass(frozen=True)
class QuadraticObjective(PolynomialObjective):
    """Degree-<=2 restriction of :class:`PolynomialObjective` (a QUBO)."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.degree > 2:
            raise ValueError(f"QuadraticObjective requires degree <= 2, got {self.degree}")

    @property
    def linear(self) -> dict[int, float]:
        return {k[0]: c for k, c in self.terms.items() if len(k) == 1}

    @property
    def quadratic(self) -> dict[tuple[int, int], float]:
        return {(k[0], k[1]): c for k, c in self.terms.items() if len(k) == 2}

    @property
    def density(self) -> float:
        """Fraction of possible off-diagonal couplings that are nonzero."""
        n = self.num_vars
        if n < 2:
            return 0.0
        return len(self.quadratic) / (n * (n - 1) / 2)


@dataclass(frozen=True)
class IsingProblem:
    """Spin-space twin of a QUBO: H = sum J_ij s_i s_j + sum h_i s_i + offset."""

    num_vars: int
    couplings: dict[tuple[int, int], float] = field(default_factory=dict)
    fields: dict[int, float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self) -> None:
        for (i, j) in self.couplings:
            if not (0 <= i < j < self.num_vars):
                raise ValueError(f"coupling key ({i},{j}) must satisfy 0 <= i < j < n")
        for i in self.fields:
            if not (0 <= i < self.num_vars):
                raise ValueError(f"field key {i} out of range")

    def evaluate(self, spins) -> float:
        s = np.asarray(spins)
        if s.shape != (self.num_vars,):
            raise InputError(
                f"spin vector length {s.shape} does not match num_vars={self.num_vars}"
            )
        energy = self.offset
        for i, h in self.fields.items():
            energy += h * s[i]
        for (i, j), jij in self.couplings.items():
            energy += jij * s[i] * s[j]
        return float(energy)

    def to_dict(self) -> dict:
        terms = [{"vars": [i], "coeff": c} for i, c in sorted(self.fields.items())]
        terms += [
            {"vars": list(k), "coeff": c} for k, c in sorted(self.couplings.items())
        ]
        return {
            "num_vars": self.num_vars,
            "offset": self.offset,
            "terms": terms,
            "space": ISING,
        }


def qubo_to_ising(q: PolynomialObjective) -> IsingProblem:
    """Exact change of variables b_i = (1 + s_i) / 2.

    Preserves the full energy spectrum: evaluate(q, b) == ising.evaluate(s)
    for every assignment with s = 2b - 1.
    """
    if q.degree > 2:
        raise InputError(f"cannot convert degree-{q.degree} objective to Ising form")
    fields: dict[int, float] = {}
    couplings: dict[tuple[int, int], float] = {}
    offset = q.offset
    for key, c in q.terms.items():
        if len(key) == 1:
            i = key[0]
            fields[i] = fields.get(i, 0.0) + c / 2.0
            offset += c / 2.0
        else:
            i, j = key
            couplings[(i, j)] = couplings.get((i, j), 0.0) + c / 4.0
            fields[i] = fields.get(i, 0.0) + c / 4.0
            fields[j] = fields.get(j, 0.0) + c / 4.0
            offset += c / 4.0
    fields = {i: h for i, h in fields.items() if h != 0.0}
    couplings = {k: v for k, v in couplings.items() if v != 0.0}
    return IsingProblem(num_vars=q.num_vars, couplings=couplings, fields=fields, offset=offset)


def ising_to_qubo(p: IsingProblem) -> QuadraticObjective:
    """Inverse substitution s_i = 2 b_i - 1; round trip is the identity."""
    acc = TermAccumulator()
    acc.offset = p.offset
    for i, h in p.fields.items():
        acc.add((i,), 2.0 * h)
        acc.offset -= h
    for (i, j), jij in p.couplings.items():
        acc.add((i, j), 4.0 * jij)
        acc.add((i,), -2.0 * jij)
        acc.add((j,), -2.0 * jij)
        acc.offset += jij
    return acc.build(p.num_vars, quadratic=True)


def coefficient_stats(q: PolynomialObjective) -> tuple[float, float, float]:
    """(j_max, j_min, resolution) over all nonzero term coefficients.

    resolution = j_max / j_min is the coupler dynamic range a device (or a
    temperature schedule) must resolve.
    """
    if not q.terms:
        raise InputError("coefficient_stats of an objective with no terms")
    mags = np.abs(np.fromiter(q.terms.values(), dtype=np.float64))
    j_max = float(mags.max())
    j_min = float(mags.min())
    return j_max, j_min, j_max / j_min


@dataclass(frozen=True)
class Assignment:
    """A variable assignment plus the space its values live in."""

    values: np.ndarray
    space: str = BOOLEAN

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values))
        if self.space not in (BOOLEAN, ISING):
            raise InputError(f"unknown space {self.space!r}")

    def to_bits(self) -> np.ndarray:
        if self.space == BOOLEAN:
            return self.values.astype(np.int8)
        return ((self.values + 1) // 2).astype(np.int8)

    def to_spins(self) -> np.ndarray:
        if self.space == ISING:
            return self.values.astype(np.int8)
        return (2 * self.values - 1).astype(np.int8)


# ---------------------------------------------------------------------------
# JSON problem files: the interchange format for every CLI stage.
# ---------------------------------------------------------------------------

def problem_to_json(obj, extra: dict | None = None) -> dict:
    """Serialize a PolynomialObjective/QuadraticObjective/IsingProblem."""
    doc = obj.to_dict() if isinstance(obj, IsingProblem) else obj.to_dict(BOOLEAN)
    if extra:
        doc.update(extra)
    return doc


def problem_from_dict(doc: dict):
    """Load a problem from its JSON dict; returns the matching problem type."""
    try:
        num_vars = int(doc["num_vars"])
        offset = float(doc.get("offset", 0.0))
        space = doc.get("space", BOOLEAN)
        raw_terms = doc.get("terms", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed problem document: {exc}") from exc

    acc = TermAccumulator()
    acc.offset = offset
    if space == ISING:
        couplings: dict[tuple[int, int], float] = {}
        fields: dict[int, float] = {}
        for t in raw_terms:
            key = tuple(sorted(int(v) for v in t["vars"]))
            c = float(t["coeff"])
            if len(key) == 1:
                fields[key[0]] = fields.get(key[0], 0.0) + c
            elif len(key) == 2:
                couplings[key] = couplings.get(key, 0.0) + c
            else:
                raise InputError("ising documents support degree <= 2 only")
        fields = {i: v for i, v in fields.items() if v != 0.0}
        couplings = {k: v for k, v in couplings.items() if v != 0.0}
        return IsingProblem(num_vars=num_vars, couplings=couplings, fields=fields, offset=offset)

    for t in raw_terms:
        acc.add(t["vars"], float(t["coeff"]))
    degree = max((len(k) for k in acc.terms), default=0)
    return acc.build(num_vars, quadratic=degree <= 2)


def save_problem(path, obj, extra: dict | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_json(obj, extra), fh, indent=1)
        fh.write("\n")


def load_problem(path) -> tuple[object, dict]:
    """Returns (problem, full document) so callers can read layout/aux data."""
    with open(path) as fh:
        doc = json.load(fh)
    return problem_from_dict(doc), doc
