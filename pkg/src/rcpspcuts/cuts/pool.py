"""Cut records and the cut pool (hash dedupe plus dominance for covers)."""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from ..model import CUT, ConstraintRow

FAMILIES = ("CV", "LCV", "PR", "LPR", "CL", "OH", "CG", "SCG")
# order in which per-iteration batches are merged into the pool
INSERT_ORDER = ("LPR", "CL", "LCV", "SCG", "OH")
COVER_FAMILIES = ("CV", "LCV")

MIN_VIOLATION = 1e-4
LCV_MIN_VIOLATION = 0.005
COEF_DIGITS = 9


def _canon(v: float) -> float:
    r = round(float(v), COEF_DIGITS)
    return 0.0 if r == 0 else r


@dataclass(frozen=True)
class Cut:
    """Sparse inequality ``sum coefs * x[cols] <= rhs``."""

    cols: tuple[int, ...]
    coefs: tuple[float, ...]
    rhs: float
    family: str
    violation: float = 0.0
    meta: Mapping = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown cut family {self.family!r}")
        if len(self.cols) != len(self.coefs):
            raise ValueError("cols and coefs differ in length")

    @classmethod
    def make(cls, coefs: Mapping[int, float], rhs: float, family: str, x: Optional[np.ndarray] = None,
             **meta) -> "Cut":
        items = sorted((int(c), float(v)) for c, v in coefs.items() if v != 0)
        cols = tuple(c for c, _ in items)
        vals = tuple(v for _, v in items)
        viol = 0.0
        if x is not None:
            viol = float(np.dot(x[list(cols)], vals)) - rhs if cols else -rhs
        return cls(cols, vals, float(rhs), family, viol, dict(meta))

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.cols, self.coefs))

    def lhs(self, x: np.ndarray) -> float:
        return float(np.dot(x[list(self.cols)], self.coefs)) if self.cols else 0.0

    def violated_by(self, x: np.ndarray) -> float:
        return self.lhs(x) - self.rhs

    @property
    def key(self) -> str:
        """Canonical hash: sorted columns, rounded coefficients and rhs (family not included)."""
        items = sorted(zip(self.cols, self.coefs))
        payload = json.dumps([[c, _canon(v)] for c, v in items if _canon(v) != 0] + [_canon(self.rhs)])
        return hashlib.sha1(payload.encode()).hexdigest()

    def dominates(self, other: "Cut", strict: bool = False) -> bool:
        """Coefficients componentwise >= and rhs <= (over nonnegative variables)."""
        mine, theirs = self.as_dict(), other.as_dict()
        tol = 1e-9
        if self.rhs > other.rhs + tol:
            return False
        if any(mine.get(c, 0.0) < v - tol for c, v in theirs.items()):
            return False
        if any(v < -tol and c not in theirs for c, v in mine.items()):
            return False
        if not strict:
            return True
        return self.rhs < other.rhs - tol or any(mine.get(c, 0.0) > theirs.get(c, 0.0) + tol
                                                 for c in mine.keys() | theirs.keys())

    def to_row(self) -> ConstraintRow:
        return ConstraintRow(self.cols, self.coefs, "L", self.rhs, CUT, (self.family, self.key[:12]))

    def log_entry(self, iteration: int = 0) -> dict:
        return {"family": self.family, "violation": self.violation, "size": len(self.cols),
                "rhs": self.rhs, "iteration": iteration, "hash": self.key}


class CutPool:
    """Hash-keyed cut store.  Covers are additionally kept free of dominated members."""

    def __init__(self, dominance_families: Iterable[str] = COVER_FAMILIES):
        self._cuts: dict[str, Cut] = {}
        self.dominance_families = frozenset(dominance_families)
        self.accepted: Counter = Counter()
        self.duplicates: Counter = Counter()
        self.dominated: Counter = Counter()
        self.evicted: Counter = Counter()

    def __len__(self) -> int:
        return len(self._cuts)

    def __contains__(self, cut: Cut) -> bool:
        return cut.key in self._cuts

    def __iter__(self):
        return iter(self._cuts.values())

    def cuts(self, family: Optional[str] = None) -> list[Cut]:
        return [c for c in self._cuts.values() if family is None or c.family == family]

    def insert(self, cut: Cut) -> bool:
        key = cut.key
        if key in self._cuts:
            self.duplicates[cut.family] += 1
            return False
        if cut.family in self.dominance_families:
            covers = [(k, c) for k, c in self._cuts.items() if c.family in self.dominance_families]
            if any(c.dominates(cut) for _, c in covers):
                self.dominated[cut.family] += 1
                return False
            for k, c in covers:
                if cut.dominates(c):
                    del self._cuts[k]
                    self.evicted[c.family] += 1
        self._cuts[key] = cut
        self.accepted[cut.family] += 1
        return True

    def insert_all(self, cuts: Iterable[Cut]) -> int:
        return sum(self.insert(c) for c in cuts)

    def rows(self) -> list[ConstraintRow]:
        return [c.to_row() for c in self._cuts.values()]


def merge_batches(batches: Mapping[str, list[Cut]]) -> list[Cut]:
    """Deterministic merge: fixed family order, then violation descending, then hash."""
    out = []
    rank = {f: i for i, f in enumerate(INSERT_ORDER)}
    for fam in sorted(batches, key=lambda f: (rank.get(f, len(rank)), f)):
        out.extend(sorted(batches[fam], key=lambda c: (-round(c.violation, 9), c.key)))
    return out


def top_violated(cuts: Iterable[Cut], limit: Optional[int]) -> list[Cut]:
    ordered = sorted(cuts, key=lambda c: (-round(c.violation, 9), c.key))
    return ordered if limit is None else ordered[:limit]


def zeta_for(n_rows: int, fraction: float = 0.2) -> int:
    return max(1, int(np.ceil(fraction * n_rows)))
