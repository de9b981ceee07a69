"""Pairwise residue contact-energy models.

Three kinds: the binary HP model (only H-H contacts carry energy), the
Miyazawa-Jernigan statistical contact potential shipped as a data file, and
custom user tables.  Turn-based encodings require every pair energy to be
<= 0; the encoders enforce this.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from ..core import InputError

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"

HP = "hp"
MIYAZAWA_JERNIGAN = "mj"
CUSTOM = "custom"


@dataclass(frozen=True)
class InteractionModel:
    """Symmetric pair-energy table keyed by residue-code pairs."""

    kind: str
    pair_energies: dict[tuple[str, str], float] = field(default_factory=dict)
    alphabet: str = ""

    def energy(self, a: str, b: str) -> float:
        key = (a, b) if a <= b else (b, a)
        return self.pair_energies.get(key, 0.0)

    def validate_sequence(self, sequence: str) -> None:
        bad = sorted(set(sequence) - set(self.alphabet))
        if bad:
            raise InputError(
                f"residues {''.join(bad)} not in the {self.kind} alphabet {self.alphabet}"
            )

    def all_nonpositive(self) -> bool:
        return all(v <= 0.0 for v in self.pair_energies.values())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "alphabet": self.alphabet,
            "pair_energies": {a + b: v for (a, b), v in sorted(self.pair_energies.items())},
        }

    @staticmethod
    def from_dict(doc: dict) -> "InteractionModel":
        pairs = {}
        for key, v in doc.get("pair_energies", {}).items():
            if len(key) != 2:
                raise InputError(f"pair key {key!r} must be two residue codes")
            a, b = sorted(key)
            pairs[(a, b)] = float(v)
        return InteractionModel(
            kind=doc.get("kind", CUSTOM),
            pair_energies=pairs,
            alphabet=doc.get("alphabet", "".join(sorted({c for k in pairs for c in k}))),
        )


def hp_model(contact_energy: float = -1.0) -> InteractionModel:
    if contact_energy >= 0.0:
        raise InputError("H-H contact energy must be negative")
    return InteractionModel(
        kind=HP, pair_energies={("H", "H"): contact_energy}, alphabet="HP"
    )


def mj_model() -> InteractionModel:
    """Miyazawa-Jernigan contact energies from the shipped data file."""
    text = resources.files("latticefold.data").joinpath("mj_contact_energies.json").read_text()
    doc = json.loads(text)
    pairs = {}
    for key, v in doc["pair_energies"].items():
        a, b = sorted(key)
        pairs[(a, b)] = float(v)
    return InteractionModel(kind=MIYAZAWA_JERNIGAN, pair_energies=pairs, alphabet=AMINO_ACIDS)


def custom_model(pair_energies: dict, alphabet: str | None = None) -> InteractionModel:
    pairs = {}
    for key, v in pair_energies.items():
        a, b = sorted(key) if isinstance(key, tuple) else sorted(key)
        pairs[(a, b)] = float(v)
    if alphabet is None:
        alphabet = "".join(sorted({c for k in pairs for c in k}))
    return InteractionModel(kind=CUSTOM, pair_energies=pairs, alphabet=alphabet)


def get_model(name: str) -> InteractionModel:
    if name == HP:
        return hp_model()
    if name in (MIYAZAWA_JERNIGAN, "miyazawa-jernigan"):
        return mj_model()
    raise InputError(f"unknown interaction model {name!r}; use 'hp' or 'mj'")
