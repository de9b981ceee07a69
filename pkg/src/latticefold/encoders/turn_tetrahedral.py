"""Turn-based encoding on the tetrahedral lattice, one-hot 4-bit turns.

The first two turns are fixed by symmetry; every later turn carries four
one-hot indicator bits.  Distances are tracked per lattice direction with
alternating signs (A->B moves count +1, B->A moves -1), so two beads coincide
iff all four signed counts vanish.  Overlap is penalized only inside the
gated contact terms: each contact-capable pair (separation >= 5, odd) gets a
qubit q_ij applying

    eps_ij + lam1*(D(i,j) - 1) + lam2 * sum_nbrs (2 - D)

which drives q_ij to 1 exactly at contacts but, by the same token, lets the
chain buy an overlap by giving up one contact.  That failure mode is a
property of the model, not of this implementation; the tests pin it.

Degree is 3 (distance quadratic times the gate), so a single reduction round
suffices downstream.
"""

from __future__ import annotations

from ..core import InputError, TermAccumulator, poly_product
from .interactions import InteractionModel
from .model import (
    TET_FIRST_TURN_DIR,
    TET_MIRROR_FIXED_DIR,
    TET_SECOND_TURN_DIR,
    TURN_TETRAHEDRAL,
    EncodedModel,
    interaction_pair_range,
)

Poly = dict[tuple[int, ...], float]

STRICT = "strict"
TTS_TUNED = "tts"


def default_turn_tet_penalties(n: int, variant: str = STRICT) -> dict:
    """lambda family scaled with chain length.

    The strict cubic scaling penalizes every constraint violation below the
    physical energy scale; the quadratic variant trades that guarantee for
    smaller coefficients (and pairs with a reduction penalty of 1.1x).
    """
    if variant == STRICT:
        lam_global = 21.0 * n**3
    elif variant == TTS_TUNED:
        lam_global = 21.0 * n**2
    else:
        raise InputError(f"unknown penalty variant {variant!r}")
    return {
        "lambda_global": lam_global,
        "lambda_1": lam_global,
        "lambda_2": 10.0,
        "lambda_turn": lam_global,
        "lambda_gc": lam_global,
        "variant": variant,
    }


def chain_neighbors(bead: int, n: int) -> list[int]:
    return [b for b in (bead - 1, bead + 1) if 0 <= b < n]


def encode_turn_tetrahedral(
    sequence: str,
    interaction: InteractionModel,
    penalties: dict | None = None,
    penalty_variant: str = STRICT,
) -> EncodedModel:
    n = len(sequence)
    if n < 2:
        raise InputError("sequence must have at least 2 residues")
    interaction.validate_sequence(sequence)
    if not interaction.all_nonpositive():
        raise InputError(
            "turn-based encodings need all pair energies <= 0 (gated interaction terms)"
        )
    pens = default_turn_tet_penalties(n, penalty_variant)
    if penalties:
        pens.update(penalties)
    lam1, lam2 = pens["lambda_1"], pens["lambda_2"]
    lam_turn, lam_gc = pens["lambda_turn"], pens["lambda_gc"]
    if min(lam1, lam2, lam_turn, lam_gc) <= 0:
        raise InputError("penalty multipliers must be strictly positive")

    pairs = interaction_pair_range(TURN_TETRAHEDRAL, n)
    for i, j in pairs:
        bound = 4.0 * (j - i - 1) * lam2 + abs(interaction.energy(sequence[i], sequence[j]))
        if lam1 <= bound:
            raise InputError(
                f"lambda_1={lam1} does not dominate pair ({i},{j}): needs > {bound}"
            )

    next_var = 0
    turns: list[list] = [
        [1 if a == TET_FIRST_TURN_DIR else 0 for a in range(4)],
    ]
    if n >= 3:
        turns.append([1 if a == TET_SECOND_TURN_DIR else 0 for a in range(4)])
    for t in range(3, n):
        block = []
        for a in range(4):
            # the reflection through the two fixed bonds swaps directions 0
            # and 1; pinning direction 1 off at the third turn removes it
            if t == 3 and a == TET_MIRROR_FIXED_DIR:
                block.append(0)
            else:
                block.append(f"v{next_var}")
                next_var += 1
        turns.append(block)
    interaction_qubits = {}
    for i, j in pairs:
        interaction_qubits[(i, j)] = next_var
        next_var += 1
    num_vars = next_var

    def literal(t: int, a: int) -> Poly:
        bit = turns[t - 1][a]
        if isinstance(bit, str):
            return {(int(bit[1:]),): 1.0}
        return {(): float(bit)} if bit else {}

    def signed_counts(i: int, j: int) -> list[Poly]:
        """Per-direction signed turn counts between beads i < j (0-based)."""
        counts: list[Poly] = [dict() for _ in range(4)]
        for t in range(i + 1, j + 1):
            sign = 1.0 if t % 2 == 1 else -1.0
            for a in range(4):
                for key, c in literal(t, a).items():
                    counts[a][key] = counts[a].get(key, 0.0) + sign * c
        return counts

    def squared_distance(i: int, j: int) -> Poly:
        out: Poly = {}
        for diff in signed_counts(i, j):
            for key, c in poly_product([diff, diff]).items():
                out[key] = out.get(key, 0.0) + c
        return out

    acc = TermAccumulator()

    # one-hot penalty on free turns
    for t in range(3, n):
        block = [literal(t, a) for a in range(4)]
        expr: Poly = {(): -1.0}
        for lit in block:
            for key, c in lit.items():
                expr[key] = expr.get(key, 0.0) + c
        acc.add_poly(poly_product([expr, expr]), lam_turn)

    # growth constraint: consecutive turns may not repeat a direction
    for t in range(1, n - 1):
        for a in range(4):
            acc.add_product(literal(t, a), literal(t + 1, a), lam_gc)

    # gated contact terms with neighborhood overlap penalties
    for (i, j), q in interaction_qubits.items():
        eps = interaction.energy(sequence[i], sequence[j])
        inner: Poly = {(): eps - lam1}
        for key, c in squared_distance(i, j).items():
            inner[key] = inner.get(key, 0.0) + lam1 * c
        for r in chain_neighbors(j, n):
            lo, hi = min(i, r), max(i, r)
            inner[()] = inner.get((), 0.0) + 2.0 * lam2
            for key, c in squared_distance(lo, hi).items():
                inner[key] = inner.get(key, 0.0) - lam2 * c
        for m in chain_neighbors(i, n):
            lo, hi = min(m, j), max(m, j)
            inner[()] = inner.get((), 0.0) + 2.0 * lam2
            for key, c in squared_distance(lo, hi).items():
                inner[key] = inner.get(key, 0.0) - lam2 * c
        acc.add_product({(q,): 1.0}, inner)

    objective = acc.build(num_vars, quadratic=False)
    layout = {
        "type": "turn-tetrahedral",
        "L": None,
        "energy_shift": 0.0,
        "turns": turns,
        "interaction_qubits": {f"{i},{j}": q for (i, j), q in interaction_qubits.items()},
    }
    return EncodedModel(
        model=TURN_TETRAHEDRAL,
        objective=objective,
        sequence=sequence,
        interaction=interaction,
        penalties=pens,
        layout=layout,
    )
