from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
LIMIT = "limit"
ERROR = "error"

SENSES = ("L", "E", "G")


class SolverError(RuntimeError):
    pass


@dataclass
class LinearProblem:
    """min/max c.x + offset  s.t.  A x (<=,=,>=) b,  lb <= x <= ub,  x_i integer where flagged."""

    c: np.ndarray
    A: sp.csr_matrix
    sense: np.ndarray
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray
    maximize: bool = False
    names: Optional[list[str]] = None
    row_names: Optional[list[str]] = None
    offset: float = 0.0

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.shape[0]
        self.A = sp.csr_matrix(self.A, dtype=float) if self.A is not None else sp.csr_matrix((0, n))
        if self.A.shape[1] != n:
            raise ValueError(f"A has {self.A.shape[1]} columns, c has {n}")
        m = self.A.shape[0]
        self.sense = np.asarray(self.sense if len(self.sense) else np.empty(0, dtype="<U1"), dtype="<U1")
        self.b = np.asarray(self.b, dtype=float).reshape(m)
        self.lb = np.asarray(self.lb, dtype=float).reshape(n)
        self.ub = np.asarray(self.ub, dtype=float).reshape(n)
        self.integer = np.asarray(self.integer, dtype=bool).reshape(n)
        if self.sense.shape != (m,) or not set(self.sense.tolist()) <= set(SENSES):
            raise ValueError("sense must hold one of L/E/G per row")

    @property
    def n_cols(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def is_mip(self) -> bool:
        return bool(self.integer.any())

    def relaxation(self) -> "LinearProblem":
        return LinearProblem(self.c, self.A, self.sense, self.b, self.lb, self.ub, np.zeros(self.n_cols, bool),
                             self.maximize, self.names, self.row_names, self.offset)

    def with_bounds(self, lb: np.ndarray, ub: np.ndarray) -> "LinearProblem":
        return LinearProblem(self.c, self.A, self.sense, self.b, lb, ub, self.integer, self.maximize, self.names,
                             self.row_names, self.offset)

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x + self.offset)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest bound or row violation of ``x`` (0 when feasible)."""
        act = self.A @ x
        row = np.where(self.sense == "L", act - self.b,
                       np.where(self.sense == "G", self.b - act, np.abs(act - self.b)))
        return float(max(np.max(self.lb - x, initial=0.0), np.max(x - self.ub, initial=0.0),
                         np.max(row, initial=0.0)))

    def column_names(self) -> list[str]:
        return list(self.names) if self.names is not None else [f"c{i}" for i in range(self.n_cols)]


def build_problem(c: Sequence[float], rows: Sequence[tuple[dict[int, float], str, float]], lb, ub,
                  integer=None, maximize: bool = False, names=None) -> LinearProblem:
    """Assemble a problem from sparse ``(coefficients, sense, rhs)`` rows."""
    n = len(c)
    data, ri, ci = [], [], []
    for i, (coefs, _, _) in enumerate(rows):
        for j, v in coefs.items():
            if v:
                ri.append(i)
                ci.append(j)
                data.append(v)
    A = sp.csr_matrix((data, (ri, ci)), shape=(len(rows), n))
    sense = np.array([s for _, s, _ in rows], dtype="<U1")
    b = np.array([r for _, _, r in rows], dtype=float)
    if integer is None:
        integer = np.zeros(n, bool)
    return LinearProblem(np.asarray(c, float), A, sense, b, np.broadcast_to(np.asarray(lb, float), (n,)).copy(),
                         np.broadcast_to(np.asarray(ub, float), (n,)).copy(),
                         np.broadcast_to(np.asarray(integer, bool), (n,)).copy(), maximize, names)


@dataclass
class LpSolution:
    status: str
    objective: Optional[float] = None
    x: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None
    duals: Optional[np.ndarray] = None
    iterations: int = 0
    nodes: int = 0
    bound: Optional[float] = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL

    @property
    def has_values(self) -> bool:
        return self.x is not None


@dataclass(frozen=True)
class SolverHandle:
    """Backend selection plus limits.

    kind is ``builtin`` (own simplex / branch-and-bound), ``highs`` (scipy's
    HiGHS bindings) or ``external`` (a shell command template with ``{lp}`` and
    ``{sol}`` placeholders that reads a CPLEX LP file and writes a CBC-style
    solution file).
    """

    kind: str = "builtin"
    command: Optional[str] = None
    time_limit: Optional[float] = None
    node_limit: int = 1_000_000
    mip_gap: float = 1e-6
    options: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in ("builtin", "highs", "external"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "external":
            if not self.command or "{lp}" not in self.command or "{sol}" not in self.command:
                raise ValueError("external command template needs {lp} and {sol} placeholders")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time limit must be positive")
        if self.node_limit <= 0 or self.mip_gap < 0:
            raise ValueError("node limit must be positive and gap non-negative")

    def limited(self, time_limit: Optional[float]) -> "SolverHandle":
        """Same backend with the time limit tightened to ``time_limit``."""
        if time_limit is None:
            return self
        tl = max(time_limit, 1e-3)
        if self.time_limit is not None:
            tl = min(tl, self.time_limit)
        return SolverHandle(self.kind, self.command, tl, self.node_limit, self.mip_gap, self.options)
