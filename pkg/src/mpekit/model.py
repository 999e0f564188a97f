"""Core representation of binary graphical models in log space.

A model is a collection of log-potentials over subsets of binary
variables; the joint log-score of a full assignment is the sum of the
selected table entries.  Zero-probability entries are represented by an
explicit ``-inf``, which is absorbing under addition.

All objects in this module are immutable after construction and safe to
share across threads; the module-level operations are pure functions.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

NEG_INF = float("-inf")

#: Enumeration guard: refuse brute force beyond this many free variables.
MAX_BRUTE_FORCE_VARS = 25


class Assignment(Mapping):
    """Immutable partial assignment of binary variables.

    Maps variable indices to values in ``{0, 1}``.  Iteration order is
    always ascending by variable index, so equal assignments stringify
    and serialize identically.
    """

    __slots__ = ("_vals",)

    def __init__(self, entries=None):
        vals: dict[int, int] = {}
        if entries is not None:
            items = entries.items() if isinstance(entries, Mapping) else entries
            for var, val in items:
                var = int(var)
                val = int(val)
                if var < 0:
                    raise ValueError(f"negative variable index {var}")
                if val not in (0, 1):
                    raise ValueError(f"value for variable {var} must be 0 or 1, got {val}")
                if var in vals:
                    raise ValueError(f"duplicate variable index {var}")
                vals[var] = val
        object.__setattr__(self, "_vals", vals)

    def __setattr__(self, name, value):
        raise AttributeError("Assignment is immutable")

    def __getitem__(self, var: int) -> int:
        return self._vals[var]

    def __iter__(self):
        return iter(sorted(self._vals))

    def __len__(self) -> int:
        return len(self._vals)

    def __eq__(self, other) -> bool:
        if isinstance(other, Assignment):
            return self._vals == other._vals
        if isinstance(other, Mapping):
            return dict(self._vals) == dict(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._vals.items())))

    def __repr__(self) -> str:
        body = ", ".join(f"{v}={self._vals[v]}" for v in self)
        return f"Assignment({{{body}}})"

    def assign(self, var: int, val: int) -> "Assignment":
        """Return a copy with one extra entry (must not conflict)."""
        return self.union(Assignment({var: val}))

    def union(self, other: Mapping) -> "Assignment":
        """Merge two assignments; agreeing overlap is allowed, conflict raises."""
        merged = dict(self._vals)
        for var, val in other.items():
            if merged.get(var, val) != val:
                raise ValueError(f"conflicting values for variable {var}")
            merged[int(var)] = int(val)
        return Assignment(merged)

    def restrict(self, variables: Iterable[int]) -> "Assignment":
        keep = set(variables)
        return Assignment({v: x for v, x in self._vals.items() if v in keep})


class LogPotential:
    """A factor stored in log space over an ordered scope of binary variables.

    The table is indexed row-major over the scope order with value 0
    before value 1 per variable; internally it is held as a read-only
    ``(2,) * len(scope)`` array.  ``-inf`` is the only non-finite entry
    permitted.
    """

    __slots__ = ("scope", "table")

    def __init__(self, scope: Iterable[int], table):
        scope = tuple(int(v) for v in scope)
        if len(set(scope)) != len(scope):
            raise ValueError(f"duplicate variable in scope {scope}")
        arr = np.asarray(table, dtype=np.float64)
        if arr.size != 2 ** len(scope):
            raise ValueError(
                f"table has {arr.size} entries, expected {2 ** len(scope)} for scope {scope}"
            )
        arr = arr.reshape((2,) * len(scope)).copy()
        if np.isnan(arr).any() or (arr == np.inf).any():
            raise ValueError("table entries must be finite reals or -inf")
        arr.flags.writeable = False
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "table", arr)

    def __setattr__(self, name, value):
        raise AttributeError("LogPotential is immutable")

    def flat(self) -> np.ndarray:
        """Row-major view of the table as a 1-D array."""
        return self.table.reshape(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LogPotential):
            return NotImplemented
        return self.scope == other.scope and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.scope, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"LogPotential(scope={self.scope})"


class GraphicalModel:
    """Binary graphical model: variables plus log-potentials with scopes."""

    __slots__ = ("num_vars", "factors", "name")

    def __init__(self, num_vars: int, factors: Iterable[LogPotential], name: str = "model"):
        num_vars = int(num_vars)
        if num_vars < 0:
            raise ValueError("num_vars must be nonnegative")
        factors = tuple(factors)
        for f in factors:
            for v in f.scope:
                if not 0 <= v < num_vars:
                    raise ValueError(f"factor scope index {v} out of range [0, {num_vars})")
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "name", str(name))

    def __setattr__(self, name, value):
        raise AttributeError("GraphicalModel is immutable")

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return (2,) * self.num_vars

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphicalModel):
            return NotImplemented
        return self.num_vars == other.num_vars and self.factors == other.factors

    def __hash__(self):
        return hash((self.num_vars, self.factors))

    def __repr__(self) -> str:
        return f"GraphicalModel(name={self.name!r}, num_vars={self.num_vars}, num_factors={len(self.factors)})"


@dataclass(frozen=True)
class PrimalGraph:
    """Undirected co-occurrence graph of a model's variables."""

    num_vars: int
    neighbors: tuple[frozenset, ...]

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(nb) for nb in self.neighbors)

    def edges(self) -> set[tuple[int, int]]:
        return {(a, b) for a in range(self.num_vars) for b in self.neighbors[a] if a < b}


def primal_graph(model: GraphicalModel) -> PrimalGraph:
    """Build the primal graph: an edge joins every pair co-occurring in a scope."""
    nbrs: list[set] = [set() for _ in range(model.num_vars)]
    for f in model.factors:
        for a in f.scope:
            for b in f.scope:
                if a != b:
                    nbrs[a].add(b)
    return PrimalGraph(model.num_vars, tuple(frozenset(s) for s in nbrs))


def log_score(model: GraphicalModel, full: Mapping) -> float:
    """Unnormalized joint log-score of a full assignment.

    Sums the table entry each factor selects under ``full``; any ``-inf``
    entry makes the result ``-inf``.  Raises if ``full`` does not assign
    every variable of the model.
    """
    for v in range(model.num_vars):
        if v not in full:
            raise ValueError(f"assignment is missing variable {v}")
    total = 0.0
    for f in model.factors:
        if f.scope:
            entry = float(f.table[tuple(full[v] for v in f.scope)])
        else:
            entry = float(f.table[()])
        total += entry
        if total == NEG_INF:
            return NEG_INF
    return total


def condition(model: GraphicalModel, partial: Mapping) -> GraphicalModel:
    """Restrict every factor by fixing the variables assigned in ``partial``.

    Variable indices are preserved (no reindexing).  Factors whose whole
    scope is assigned collapse into a single constant factor with empty
    scope, so the conditioned model's scores already include the
    collapsed log-mass.
    """
    for v in partial:
        if not 0 <= v < model.num_vars:
            raise ValueError(f"conditioning variable {v} out of range")
    if not partial:
        return GraphicalModel(model.num_vars, model.factors, name=model.name)
    const = 0.0
    collapsed = False
    new_factors = []
    for f in model.factors:
        if not f.scope:
            const += float(f.table[()])
            collapsed = True
            continue
        if not any(v in partial for v in f.scope):
            new_factors.append(f)
            continue
        idx = tuple(partial[v] if v in partial else slice(None) for v in f.scope)
        rest = tuple(v for v in f.scope if v not in partial)
        sub = f.table[idx]
        if rest:
            new_factors.append(LogPotential(rest, sub))
        else:
            const += float(sub)
            collapsed = True
    if collapsed:
        new_factors.append(LogPotential((), [const]))
    return GraphicalModel(model.num_vars, new_factors, name=model.name)


def _add_broadcast(target: np.ndarray, axis_of: dict, factor: LogPotential) -> None:
    """Add a factor table into ``target`` along the axes given by ``axis_of``."""
    axes = [axis_of[v] for v in factor.scope]
    order = sorted(range(len(axes)), key=axes.__getitem__)
    table = np.transpose(factor.table, order)
    shape = [1] * target.ndim
    for a in axes:
        shape[a] = 2
    target += table.reshape(shape)


def brute_force_mpe(
    model: GraphicalModel, evidence: Optional[Mapping] = None
) -> tuple[Assignment, float]:
    """Exact MPE by enumeration over the free variables.

    Returns the maximizing completion (free variables only) and the
    joint log-score of evidence plus completion.  Ties are broken by the
    lexicographically smallest completion: ascending variable index,
    value 0 before value 1.  Guarded to at most
    ``MAX_BRUTE_FORCE_VARS`` free variables.
    """
    evidence = Assignment(evidence) if not isinstance(evidence, Assignment) else evidence
    free = [v for v in range(model.num_vars) if v not in evidence]
    if len(free) > MAX_BRUTE_FORCE_VARS:
        raise ValueError(f"{len(free)} free variables exceed the enumeration guard")
    cond = condition(model, evidence)
    axis_of = {v: i for i, v in enumerate(free)}
    scores = np.zeros((2,) * len(free))
    const = 0.0
    for f in cond.factors:
        if f.scope:
            _add_broadcast(scores, axis_of, f)
        else:
            const += float(f.table[()])
    # First maximum in C order is the lexicographically smallest completion.
    bits = np.unravel_index(int(np.argmax(scores)), scores.shape)
    completion = Assignment({free[i]: int(bits[i]) for i in range(len(free))})
    value = float(scores[bits]) + const if free else const
    return completion, value


def free_variables(model: GraphicalModel, evidence: Mapping) -> list[int]:
    """Variables of the model not assigned by ``evidence``, ascending."""
    return [v for v in range(model.num_vars) if v not in evidence]
