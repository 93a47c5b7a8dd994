#!/usr/bin/env python3
"""Regenerate src/quadwalks/data/catalog.json from first principles.

Enumerates the 79 inherently-quadrant step-set classes, classifies every
group with the package's own orbit routine, attaches the conventional model
names, and freezes the result.  Counts are asserted before writing so a bad
build can never ship.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

SRC = Path(__file__).resolve().parents[1] / "src"
sys.path.insert(0, str(SRC))

from quadwalks.kernel import classify_group  # noqa: E402
from quadwalks.steps import (  # noqa: E402
    WEIGHTED_MODEL_TEXT,
    StepSet,
    inherently_quadrant_step_sets,
)

#: conventional names -> step text in the orientation the named tables use
NAMED = {
    "kreweras": "NE,S,W",
    "reverse-kreweras": "N,E,SW",
    "double-kreweras": "N,NE,E,S,SW,W",
    "gessel": "NE,E,SW,W",
    "#1": "N,E,SW,W",
    "#2": "N,E,SW,NW",
    "#3": "N,NE,S,W",
    "#4": "N,E,SE,W",
    "#5": "N,NE,E,SW,W",
    "#6": "N,NE,S,SW,W",
    "#7": "N,E,SW,W,NW",
    "#8": "N,NE,E,S,W",
    "#9": "N,E,SE,S,NW",
    "#10": "N,NE,SE,SW",
    "#11": "N,NE,SE,W",
    "#12": "N,NE,SE,S,SW",
}

EXPECTED_NAMED_GROUPS = {
    "kreweras": 6,
    "reverse-kreweras": 6,
    "double-kreweras": 6,
    "gessel": 8,
}


def class_key(vectors: frozenset[tuple[int, int]]) -> tuple:
    transposed = frozenset((j, i) for i, j in vectors)
    return min(tuple(sorted(vectors)), tuple(sorted(transposed)))


def main() -> None:
    classes = inherently_quadrant_step_sets()
    assert len(classes) == 79, len(classes)

    by_key: dict[tuple, StepSet] = {class_key(s.vectors()): s for s in classes}
    assert len(by_key) == 79

    aliases: dict[tuple, list[str]] = {}
    for name, text in NAMED.items():
        named = StepSet.parse(text)
        key = class_key(named.vectors())
        assert key in by_key, f"{name} is not one of the 79 classes"
        if aliases.get(key):
            # two names on one class must agree on orientation
            assert by_key[key].vectors() == named.vectors(), name
        by_key[key] = named  # freeze the named orientation
        aliases.setdefault(key, []).append(name)

    ordered = sorted(by_key.items(), key=lambda kv: (len(kv[1].vectors()), kv[1].text()))

    records = []
    finite_orders: dict[int, int] = {}
    infinite = 0
    singular = 0
    for n, (key, steps) in enumerate(ordered, start=1):
        group = classify_group(steps, 16)
        if isinstance(group, int):
            finite_orders[group] = finite_orders.get(group, 0) + 1
        else:
            infinite += 1
        singular += steps.is_singular()
        rec = {"id": f"m{n:02d}", "steps": steps.text(), "group": group}
        if aliases.get(key):
            rec["aliases"] = sorted(aliases[key])
        records.append(rec)

    assert finite_orders == {4: 16, 6: 5, 8: 2}, finite_orders
    assert infinite == 56, infinite
    assert singular == 5, singular

    weighted_groups = {}
    for name, text in WEIGHTED_MODEL_TEXT.items():
        group = classify_group(StepSet.parse(text), 16)
        weighted_groups[name] = group
        records.append(
            {"id": name, "steps": text, "group": group, "weighted": True}
        )
    assert weighted_groups == {"w1": 6, "w2": 10, "w3": 10, "w4": 10}, weighted_groups

    named_groups = {}
    for name, want in EXPECTED_NAMED_GROUPS.items():
        rec = next(r for r in records if name in r.get("aliases", ()))
        named_groups[name] = rec["group"]
        assert rec["group"] == want, (name, rec["group"], want)
    for numbered in (f"#{k}" for k in range(1, 13)):
        rec = next(r for r in records if numbered in r.get("aliases", ()))
        assert rec["group"] == "infinite>=16", (numbered, rec["group"])

    out = SRC / "quadwalks" / "data" / "catalog.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w") as fh:
        json.dump({"models": records}, fh, indent=1)
        fh.write("\n")
    print(f"wrote {out}: {len(records)} records "
          f"(79 unweighted: {finite_orders} finite, {infinite} infinite, "
          f"{singular} singular; weighted {weighted_groups})")


if __name__ == "__main__":
    main()
