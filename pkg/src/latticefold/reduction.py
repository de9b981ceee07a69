"""HUBO -> QUBO degree reduction via iterated pair substitution.

One auxiliary variable b_aux stands in for a product b_i*b_j; the penalty

    alpha * (b_i b_j - 2 b_aux (b_i + b_j) + 3 b_aux)

is zero exactly when b_aux = b_i*b_j and at least alpha otherwise, so any
alpha above the total coefficient mass preserves the minimum and the set of
original-variable minimizers.  Pairs are chosen greedily by how many
high-order terms they appear in (ties to the lexicographically smallest
pair); a recurring pair reuses its auxiliary.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import InputError, PolynomialObjective, QuadraticObjective, TermAccumulator

WORST_CASE = "worst_case"


@dataclass(frozen=True)
class QuadratizationResult:
    qubo: QuadraticObjective
    aux_map: list  # (aux index, (i, j)) in creation order
    alpha: float

    def aux_map_doc(self) -> list:
        return [{"aux": a, "pair": [i, j]} for a, (i, j) in self.aux_map]

    def project(self, assignment: np.ndarray) -> np.ndarray:
        """Drop auxiliary variables, keeping the original block."""
        n_orig = self.qubo.num_vars - len(self.aux_map)
        return np.asarray(assignment)[:n_orig]

    def lift(self, assignment) -> np.ndarray:
        """Extend an original assignment with consistent auxiliary values."""
        vals = list(np.asarray(assignment).astype(np.uint8))
        for aux, (i, j) in self.aux_map:
            assert aux == len(vals)
            vals.append(vals[i] & vals[j])
        return np.array(vals, dtype=np.uint8)


def worst_case_alpha(hubo: PolynomialObjective) -> float:
    """1 + total absolute coefficient mass: no inconsistency can ever pay."""
    return 1.0 + float(sum(abs(c) for c in hubo.terms.values()))


def resolve_alpha(hubo: PolynomialObjective, alpha_policy) -> float:
    if alpha_policy == WORST_CASE or alpha_policy is None:
        return worst_case_alpha(hubo)
    if isinstance(alpha_policy, str):
        if alpha_policy.startswith("fixed:"):
            alpha = float(alpha_policy.split(":", 1)[1])
        else:
            raise InputError(f"unknown alpha policy {alpha_policy!r}")
    else:
        alpha = float(alpha_policy)
    if alpha <= 0:
        raise InputError(f"penalty strength must be positive, got {alpha}")
    return alpha


def scaled_alpha(lambda_global: float, factor: float = 1.1) -> float:
    """Reduction penalty tied to the model's own penalty scale."""
    return factor * lambda_global


def quadratize(hubo: PolynomialObjective, alpha_policy=WORST_CASE) -> QuadratizationResult:
    """Reduce to degree <= 2; degree <= 2 input passes through unchanged."""
    alpha = resolve_alpha(hubo, alpha_policy)
    if hubo.degree <= 2:
        qubo = QuadraticObjective(
            num_vars=hubo.num_vars, terms=dict(hubo.terms), offset=hubo.offset
        )
        return QuadratizationResult(qubo=qubo, aux_map=[], alpha=alpha)

    terms = {frozenset(k): c for k, c in hubo.terms.items()}
    next_var = hubo.num_vars
    aux_of_pair: dict[tuple[int, int], int] = {}
    aux_map: list = []

    while True:
        high = [k for k in terms if len(k) > 2]
        if not high:
            break
        counts: Counter = Counter()
        for key in high:
            for pair in combinations(sorted(key), 2):
                counts[pair] += 1
        best_pair = min(counts, key=lambda p: (-counts[p], p))
        i, j = best_pair
        if best_pair in aux_of_pair:
            aux = aux_of_pair[best_pair]
        else:
            aux = next_var
            next_var += 1
            aux_of_pair[best_pair] = aux
            aux_map.append((aux, best_pair))
        new_terms: dict[frozenset, float] = {}
        for key, coeff in terms.items():
            if len(key) > 2 and i in key and j in key:
                key = (key - {i, j}) | {aux}
            new_terms[key] = new_terms.get(key, 0.0) + coeff
        terms = {k: c for k, c in new_terms.items() if c != 0.0}

    acc = TermAccumulator()
    acc.offset = hubo.offset
    for key, coeff in terms.items():
        acc.add(tuple(sorted(key)), coeff)
    for aux, (i, j) in aux_map:
        acc.add((i, j), alpha)
        acc.add((i, aux), -2.0 * alpha)
        acc.add((j, aux), -2.0 * alpha)
        acc.add((aux,), 3.0 * alpha)
    qubo = acc.build(next_var, quadratic=True)
    return QuadratizationResult(qubo=qubo, aux_map=aux_map, alpha=alpha)


@dataclass(frozen=True)
class VerificationReport:
    exhaustive: bool
    checked: int
    max_discrepancy: float
    min_inconsistency_gap: float

    @property
    def ok(self) -> bool:
        return self.max_discrepancy <= 1e-9 and self.min_inconsistency_gap > 0.0


def verify_quadratization(
    hubo: PolynomialObjective,
    result: QuadratizationResult,
    budget: int = 20,
    samples: int = 100_000,
    seed: int = 0,
) -> VerificationReport:
    """Check energy agreement on consistent extensions and that every
    inconsistent auxiliary setting costs energy.

    Exhaustive over the original variables when their count fits the budget
    (the inconsistency scan is exhaustive over joint assignments when
    originals + auxiliaries fit); otherwise randomized sampling.
    """
    n = hubo.num_vars
    n_aux = len(result.aux_map)
    exhaustive = n <= budget

    if exhaustive:
        codes = np.arange(1 << n, dtype=np.uint64)
        bits = ((codes[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & np.uint64(1)).astype(np.uint8)
    else:
        rng = np.random.default_rng(seed)
        bits = rng.integers(0, 2, size=(samples, n), dtype=np.uint8)

    lifted = np.empty((bits.shape[0], n + n_aux), dtype=np.uint8)
    lifted[:, :n] = bits
    for aux, (i, j) in result.aux_map:
        lifted[:, aux] = lifted[:, i] & lifted[:, j]
    hubo_e = hubo.evaluate_batch(bits)
    qubo_e = result.qubo.evaluate_batch(lifted)
    max_disc = float(np.abs(hubo_e - qubo_e).max()) if len(bits) else 0.0

    # inconsistency gap: cheapest violation relative to the consistent lift
    gap = float("inf")
    checked = len(bits)
    if n_aux:
        if exhaustive and n + n_aux <= 30:
            all_codes = np.arange(1 << n, dtype=np.uint64)
            all_bits = (
                (all_codes[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & np.uint64(1)
            ).astype(np.uint8)
            all_lifted = np.empty((len(all_codes), n + n_aux), dtype=np.uint8)
            all_lifted[:, :n] = all_bits
            for aux, (i, j) in result.aux_map:
                all_lifted[:, aux] = all_lifted[:, i] & all_lifted[:, j]
            consistent = result.qubo.evaluate_batch(all_lifted)

            total = 1 << (n + n_aux)
            shifts = np.arange(n + n_aux, dtype=np.uint64)
            mask = np.uint64((1 << n) - 1)
            for lo in range(0, total, 1 << 20):
                codes = np.arange(lo, min(lo + (1 << 20), total), dtype=np.uint64)
                joint = ((codes[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)
                aux_ok = np.ones(len(codes), dtype=bool)
                for aux, (i, j) in result.aux_map:
                    aux_ok &= joint[:, aux] == (joint[:, i] & joint[:, j])
                bad = ~aux_ok
                if bad.any():
                    e = result.qubo.evaluate_batch(joint[bad])
                    refs = consistent[(codes[bad] & mask).astype(np.int64)]
                    gap = min(gap, float((e - refs).min()))
            checked = total
        else:
            rng = np.random.default_rng(seed + 1)
            m = max(samples, 100_000)
            sample_bits = rng.integers(0, 2, size=(m, n), dtype=np.uint8)
            joint = np.empty((m, n + n_aux), dtype=np.uint8)
            joint[:, :n] = sample_bits
            for aux, (i, j) in result.aux_map:
                joint[:, aux] = joint[:, i] & joint[:, j]
            base = result.qubo.evaluate_batch(joint)
            flip_at = rng.integers(0, n_aux, size=m)
            for aux_idx in range(n_aux):
                rows = np.flatnonzero(flip_at == aux_idx)
                if not len(rows):
                    continue
                aux = result.aux_map[aux_idx][0]
                broken = joint[rows].copy()
                broken[:, aux] ^= 1
                gap = min(gap, float((result.qubo.evaluate_batch(broken) - base[rows]).min()))
            checked = m
    return VerificationReport(
        exhaustive=exhaustive,
        checked=int(checked),
        max_discrepancy=max_disc,
        min_inconsistency_gap=float(gap),
    )
