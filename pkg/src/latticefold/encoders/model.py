"""EncodedModel: an objective plus the variable layout that makes solver
bitstrings decodable into folds, serializable to the problem-JSON format.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import InputError, PolynomialObjective, problem_from_dict, problem_to_json
from ..lattice import CARTESIAN, TETRAHEDRAL, LatticeSpec, Site, cartesian_site, neighbor_sites, site_classes
from .folds import Fold
from .interactions import InteractionModel

TURN_CARTESIAN = "turn-cart"
TURN_TETRAHEDRAL = "turn-tet"
COORD_CARTESIAN = "coord-cart"
COORD_TETRAHEDRAL = "coord-tet"

MODEL_LATTICE = {
    TURN_CARTESIAN: CARTESIAN,
    TURN_TETRAHEDRAL: TETRAHEDRAL,
    COORD_CARTESIAN: CARTESIAN,
    COORD_TETRAHEDRAL: TETRAHEDRAL,
}

# Dense 3-bit turn patterns for the Cartesian walk.  The two missing patterns
# (0,0,0) and (1,1,0) encode no direction.
CART_PATTERN_TO_STEP = {
    (1, 0, 1): (1, 0, 0),
    (0, 1, 1): (-1, 0, 0),
    (1, 0, 0): (0, 1, 0),
    (0, 1, 0): (0, -1, 0),
    (0, 0, 1): (0, 0, 1),
    (1, 1, 1): (0, 0, -1),
}
CART_OPPOSITE_PAIRS = (
    ((1, 0, 1), (0, 1, 1)),
    ((1, 0, 0), (0, 1, 0)),
    ((0, 0, 1), (1, 1, 1)),
)
CART_INVALID_PATTERNS = ((0, 0, 0), (1, 1, 0))

# Fixed symmetry-breaking prefix: first turn +x, second turn in {+x, +z}.
CART_FIRST_TURN = (1, 0, 1)
CART_SECOND_TURN_TEMPLATE = (None, 0, 1)  # slot 0 stays free

TET_FIRST_TURN_DIR = 3
TET_SECOND_TURN_DIR = 2
# reflection through the plane of the two fixed bonds swaps directions 0 and
# 1; direction 1 is pinned off at the third turn to break that symmetry
TET_MIRROR_FIXED_DIR = 1


@dataclass(frozen=True)
class EncodedModel:
    """An objective and everything needed to decode its assignments."""

    model: str
    objective: PolynomialObjective
    sequence: str
    interaction: InteractionModel
    penalties: dict
    layout: dict

    @property
    def lattice_kind(self) -> str:
        return MODEL_LATTICE[self.model]

    @property
    def num_vars(self) -> int:
        return self.objective.num_vars

    def lattice_spec(self) -> LatticeSpec | None:
        L = self.layout.get("L")
        return None if L is None else LatticeSpec(self.lattice_kind, int(L))

    def to_doc(self) -> dict:
        return problem_to_json(
            self.objective,
            extra={
                "model": self.model,
                "sequence": self.sequence,
                "interaction": self.interaction.to_dict(),
                "penalties": dict(self.penalties),
                "layout": self.layout,
            },
        )

    @staticmethod
    def from_doc(doc: dict) -> "EncodedModel":
        if "layout" not in doc or "model" not in doc:
            raise InputError("problem document carries no model layout")
        objective = problem_from_dict(doc)
        return EncodedModel(
            model=doc["model"],
            objective=objective,
            sequence=doc["sequence"],
            interaction=InteractionModel.from_dict(doc["interaction"]),
            penalties=dict(doc.get("penalties", {})),
            layout=doc["layout"],
        )


def _literal_value(layout_bit, bits: np.ndarray) -> int:
    if isinstance(layout_bit, str):
        return int(bits[int(layout_bit[1:])])
    return int(layout_bit)


def decode(model: EncodedModel, assignment) -> Fold:
    """Map a solver bitstring to bead positions.

    Never raises on infeasible content: invalid turn patterns and broken
    one-hot blocks set decode_feasible=False, record a violation, and the
    positions are completed best-effort.
    """
    bits = np.asarray(assignment).astype(np.int8)
    if bits.shape != (model.num_vars,):
        raise InputError(
            f"assignment length {bits.shape} does not match {model.num_vars} free variables"
        )
    if model.layout["type"] == "coordinate":
        return _decode_coordinate(model, bits)
    return _decode_turns(model, bits)


def _decode_coordinate(model: EncodedModel, bits: np.ndarray) -> Fold:
    spec = model.lattice_spec()
    classes = site_classes(spec)
    positions: list[Site] = []
    violations: list[str] = []
    for block in model.layout["bead_blocks"]:
        bead, cls = block["bead"], block["class"]
        start, count = block["start"], block["count"]
        ranks = np.flatnonzero(bits[start : start + count])
        if len(ranks) == 1:
            positions.append(classes[cls][int(ranks[0])])
        else:
            violations.append(f"bead {bead} placed on {len(ranks)} sites")
            rank = int(ranks[0]) if len(ranks) else 0
            positions.append(classes[cls][rank])
    return Fold(
        lattice_kind=model.lattice_kind,
        positions=positions,
        decode_feasible=not violations,
        violations=violations,
    )


def _decode_turns(model: EncodedModel, bits: np.ndarray) -> Fold:
    kind = model.lattice_kind
    positions = [cartesian_site(0, 0, 0) if kind == CARTESIAN else Site(0, 0, 0, 0)]
    violations: list[str] = []
    for t, block in enumerate(model.layout["turns"], start=1):
        pattern = tuple(_literal_value(b, bits) for b in block)
        cur = positions[-1]
        if kind == CARTESIAN:
            step = CART_PATTERN_TO_STEP.get(pattern)
            if step is None:
                violations.append(f"turn {t} pattern {pattern} encodes no direction")
                positions.append(cur)
            else:
                positions.append(cartesian_site(cur.i + step[0], cur.j + step[1], cur.k + step[2]))
        else:
            ones = [a for a, v in enumerate(pattern) if v]
            if len(ones) != 1:
                violations.append(f"turn {t} block {pattern} is not one-hot")
                positions.append(cur if not ones else neighbor_sites(kind, cur)[ones[0]])
            else:
                positions.append(neighbor_sites(kind, cur)[ones[0]])
    return Fold(
        lattice_kind=kind,
        positions=positions,
        decode_feasible=not violations,
        violations=violations,
    )


def interaction_pair_range(model_tag: str, n: int) -> list[tuple[int, int]]:
    """Contact-capable bead pairs: odd separation, >= 3 (Cartesian) or >= 5
    (tetrahedral); beads 0-based."""
    gap = 3 if model_tag == TURN_CARTESIAN else 5
    return [
        (i, j)
        for i in range(n)
        for j in range(i + gap, n)
        if (j - i) % 2 == 1
    ]
