"""Step sets for small-step quadrant walks, and the bundled model catalog.

A model is a set of steps from {-1,0,1}^2 \\ {(0,0)} with positive weights
(weights may be the formal symbol lam).  The catalog data file enumerates the
inherently-quadrant unweighted models (79 of them) plus the four weighted
models with algebraic series; catalog entries are inputs for the exact
machinery, never oracles.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Iterable, Mapping

from ._rat import QQ, qq
from .algebra import AlgebraError, Rat

#: Compass names in canonical (clockwise from N) order.
STEP_ORDER = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")
STEP_VECTORS = {
    "N": (0, 1),
    "NE": (1, 1),
    "E": (1, 0),
    "SE": (1, -1),
    "S": (0, -1),
    "SW": (-1, -1),
    "W": (-1, 0),
    "NW": (-1, 1),
}
VECTOR_NAMES = {v: k for k, v in STEP_VECTORS.items()}

LAMBDA_TOKENS = {"λ", "lam", "lambda"}


class StepSetError(ValueError):
    pass


class StepSet:
    """A weighted small-step model.

    weights: map (i, j) -> Rat weight.  Numeric weights must be positive;
    the formal symbol lam is allowed as a weight (treated as positive).
    """

    __slots__ = ("weights",)

    def __init__(self, weights: Mapping[tuple[int, int], Rat]):
        if not weights:
            raise StepSetError("a step set needs at least one step")
        clean: dict[tuple[int, int], Rat] = {}
        for (i, j), w in sorted(weights.items()):
            if (i, j) == (0, 0) or not (-1 <= i <= 1 and -1 <= j <= 1):
                raise StepSetError(f"illegal step {(i, j)}")
            w = w if isinstance(w, Rat) else Rat.const(w)
            if w.is_const():
                if w.const_value() <= 0:
                    raise StepSetError(f"weight of {(i, j)} must be positive")
            elif w.variables() != {"lam"}:
                raise StepSetError("weights may only involve the symbol lam")
            clean[(i, j)] = w
        self.weights = clean

    # -- constructors --------------------------------------------------------

    @staticmethod
    def parse(text: str) -> "StepSet":
        """Parse 'NE,W,S' or 'W:1,SW:1,S:λ,SE:1,E:2,NE:1'."""
        weights: dict[tuple[int, int], Rat] = {}
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if ":" in chunk:
                name, wtext = chunk.split(":", 1)
                name, wtext = name.strip(), wtext.strip()
                if wtext in LAMBDA_TOKENS:
                    w = Rat.var("lam")
                else:
                    w = Rat.const(qq(wtext))
            else:
                name, w = chunk, Rat.const(1)
            key = name.upper()
            if key not in STEP_VECTORS:
                raise StepSetError(f"unknown step name {name!r}")
            vec = STEP_VECTORS[key]
            if vec in weights:
                raise StepSetError(f"duplicate step {name}")
            weights[vec] = w
        return StepSet(weights)

    @staticmethod
    def from_vectors(vectors: Iterable[tuple[int, int]]) -> "StepSet":
        return StepSet({tuple(v): Rat.const(1) for v in vectors})

    # -- text / identity -------------------------------------------------------

    def text(self) -> str:
        parts = []
        for name in STEP_ORDER:
            vec = STEP_VECTORS[name]
            if vec in self.weights:
                w = self.weights[vec]
                if w.is_const() and w.const_value() == 1:
                    parts.append(name)
                elif w.is_const():
                    parts.append(f"{name}:{w.const_value()}")
                else:
                    parts.append(f"{name}:λ")
        return ",".join(parts)

    def __repr__(self) -> str:
        return f"StepSet({self.text()})"

    def __eq__(self, other) -> bool:
        return isinstance(other, StepSet) and self.weights == other.weights

    def __hash__(self) -> int:
        return hash(tuple(sorted((v, hash(w)) for v, w in self.weights.items())))

    # -- structure ---------------------------------------------------------------

    def vectors(self) -> list[tuple[int, int]]:
        return sorted(self.weights)

    def is_symbolic(self) -> bool:
        return any(not w.is_const() for w in self.weights.values())

    def is_unit_weights(self) -> bool:
        return all(w.is_const() and w.const_value() == 1 for w in self.weights.values())

    def is_singular(self) -> bool:
        """Singular: every step (i, j) has i + j >= 0."""
        return all(i + j >= 0 for (i, j) in self.weights)

    def has_x_symmetry(self) -> bool:
        """Invariant under horizontal mirror i -> -i (vertical axis)."""
        return all(
            (-i, j) in self.weights and self.weights[(-i, j)] == w
            for (i, j), w in self.weights.items()
        )

    def has_diagonal_symmetry(self) -> bool:
        return all(
            (j, i) in self.weights and self.weights[(j, i)] == w
            for (i, j), w in self.weights.items()
        )

    def total_weight(self) -> QQ:
        """Sum of all step weights (exact); fails for symbolic weights."""
        tot = QQ(0)
        for w in self.weights.values():
            if not w.is_const():
                raise StepSetError("total weight undefined for symbolic weights")
            tot += w.const_value()
        return tot

    # -- derived models ------------------------------------------------------------

    def reversed(self) -> "StepSet":
        """All steps negated (time reversal)."""
        return StepSet({(-i, -j): w for (i, j), w in self.weights.items()})

    def transposed(self) -> "StepSet":
        """Diagonal reflection (i, j) -> (j, i)."""
        return StepSet({(j, i): w for (i, j), w in self.weights.items()})

    def mirrored_x(self) -> "StepSet":
        """Horizontal mirror (i, j) -> (-i, j)."""
        return StepSet({(-i, j): w for (i, j), w in self.weights.items()})

    def mirrored_y(self) -> "StepSet":
        """Vertical mirror (i, j) -> (i, -j)."""
        return StepSet({(i, -j): w for (i, j), w in self.weights.items()})


# --------------------------------------------------------------------------
# catalog generation and access
# --------------------------------------------------------------------------


def _moves_all_directions(vectors: frozenset[tuple[int, int]]) -> bool:
    return (
        any(i == 1 for i, _ in vectors)
        and any(i == -1 for i, _ in vectors)
        and any(j == 1 for _, j in vectors)
        and any(j == -1 for _, j in vectors)
    )


def _is_one_dimensional(vectors: frozenset[tuple[int, int]]) -> bool:
    """All steps proportional to one direction (walk lives on a line)."""
    vecs = list(vectors)
    if len(vecs) <= 1:
        return True
    i0, j0 = vecs[0]
    return all(i0 * j - j0 * i == 0 for i, j in vecs[1:])


def _half_plane_reducible(vectors: frozenset[tuple[int, int]]) -> bool:
    """One quadrant constraint implies the other, or the walk is frozen.

    If every step satisfies i >= j then x - y never decreases, so x >= y >= 0
    along any quadrant walk and the constraint x >= 0 is automatic: the model
    is equivalent to a half-plane model.  Same with i <= j.  If every step
    satisfies i + j <= 0 then x + y can never grow from 0, so the walk is
    stuck at the origin.  (All steps with i + j >= 0 is fine: those are the
    singular models, where both constraints still bind.)
    """
    if all(i >= j for i, j in vectors):
        return True
    if all(i <= j for i, j in vectors):
        return True
    if all(i + j <= 0 for i, j in vectors):
        return True
    return False


def inherently_quadrant_step_sets() -> list[StepSet]:
    """The 79 unweighted models that are inherently quarter-plane walks.

    Keep a nonempty step set iff it moves in all four axis directions (else a
    constraint is vacuous or the walk is confined to an axis), is not
    one-dimensional, and is not half-plane reducible; dedupe under diagonal
    reflection, preferring the representative that is smallest in the step
    ordering.
    """
    all_steps = [v for v in STEP_VECTORS.values()]
    keep: set[frozenset[tuple[int, int]]] = set()
    for mask in range(1, 1 << 8):
        vecs = frozenset(all_steps[b] for b in range(8) if mask >> b & 1)
        if not _moves_all_directions(vecs):
            continue
        if _is_one_dimensional(vecs):
            continue
        if _half_plane_reducible(vecs):
            continue
        mirror = frozenset((j, i) for i, j in vecs)
        canon = min(tuple(sorted(vecs)), tuple(sorted(mirror)))
        keep.add(frozenset(canon))
    sets = sorted(keep, key=lambda s: (len(s), sorted(s)))
    return [StepSet.from_vectors(s) for s in sets]


#: Step text for the four weighted models with algebraic generating functions.
#: w3 reverses every step of w2; w4 mirrors w2 horizontally.
WEIGHTED_MODEL_TEXT = {
    "w1": "NE,E:2,SE,S:λ,SW,W",
    "w2": "N:2,NE,E:2,SE,S,W,NW",
    "w3": "N,E,SE,S:2,SW,W:2,NW",
    "w4": "N:2,NE,E,S,SW,W:2,NW",
}


def _load_catalog_json() -> dict:
    with resources.files("quadwalks.data").joinpath("catalog.json").open() as fh:
        return json.load(fh)


class CatalogEntry:
    __slots__ = ("id", "steps", "group", "aliases", "singular", "weighted")

    def __init__(self, id: str, steps: StepSet, group, aliases: list[str], weighted: bool):
        self.id = id
        self.steps = steps
        self.group = group  # int order, or string "infinite>=BOUND"
        self.aliases = aliases
        self.singular = steps.is_singular()
        self.weighted = weighted

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "steps": self.steps.text(),
            "group": self.group,
            "aliases": self.aliases,
            "singular": self.singular,
            "weighted": self.weighted,
        }


class Catalog:
    def __init__(self, entries: list[CatalogEntry]):
        self.entries = entries
        self.by_key: dict[str, CatalogEntry] = {}
        for e in entries:
            self.by_key[e.id] = e
            for a in e.aliases:
                self.by_key[a] = e

    def lookup(self, name: str) -> CatalogEntry:
        key = name.strip()
        for cand in (key, key.lower(), f"#{key}" if key.isdigit() else key):
            if cand in self.by_key:
                return self.by_key[cand]
        raise KeyError(f"unknown model {name!r}")

    def unweighted(self) -> list[CatalogEntry]:
        return [e for e in self.entries if not e.weighted]

    def weighted(self) -> list[CatalogEntry]:
        return [e for e in self.entries if e.weighted]


_CATALOG: Catalog | None = None


def catalog() -> Catalog:
    global _CATALOG
    if _CATALOG is None:
        import os

        override = os.environ.get("QUADWALKS_CATALOG")
        if override:
            with open(override) as fh:
                raw = json.load(fh)
        else:
            raw = _load_catalog_json()
        entries = [
            CatalogEntry(
                rec["id"],
                StepSet.parse(rec["steps"]),
                rec["group"],
                rec.get("aliases", []),
                rec.get("weighted", False),
            )
            for rec in raw["models"]
        ]
        _CATALOG = Catalog(entries)
    return _CATALOG


def model(name: str) -> StepSet:
    """Resolve a model id/alias to its step set ('kreweras', '#5', 'm17', ...).

    Raw step text is accepted too, so ad-hoc models work everywhere ids do.
    """
    try:
        return catalog().lookup(name).steps
    except KeyError:
        try:
            return StepSet.parse(name)
        except StepSetError:
            raise KeyError(f"unknown model {name!r}") from None
