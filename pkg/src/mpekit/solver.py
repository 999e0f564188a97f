"""Anytime depth-first branch-and-bound MPE solver.

The search keeps an incumbent (best full assignment so far), prunes
children whose mini-bucket upper bound cannot beat it, and returns a
:class:`SolveRecord` either when the tree is exhausted (optimal) or when
the time budget runs out (feasible_timeout).  Branching and child/node
ordering are pluggable policies, so learned heuristics slot in next to
the classical ones; policies never affect the optimal value, only the
number of nodes explored.
"""

from __future__ import annotations

import math
import time
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Callable, Optional

from .elimination import (
    EliminationOrder,
    min_degree_order,
    min_fill_order,
    mini_bucket_bound,
    mpe_upper_bound,
    restrict_order,
)
from .model import (
    Assignment,
    GraphicalModel,
    NEG_INF,
    condition,
    free_variables,
    log_score,
    primal_graph,
)
from .sampling import GibbsConfig, estimate_mode_values

_PRUNE_SLACK = 1e-12
_CLOCK_CHECK_INTERVAL = 64

DEFAULT_I_BOUND = 10


@dataclass(frozen=True)
class SolveRecord:
    """Outcome of one solver run.

    ``assignment`` covers the free (non-evidence) variables of the
    query; ``log_score`` is the joint score of evidence plus assignment.
    ``bound_trace`` lists ``(nodes_explored, global_upper_bound)`` pairs
    and is non-increasing in the bound.
    """

    assignment: Optional[Assignment]
    log_score: float
    wall_time: float
    nodes_explored: int
    status: str  # optimal | feasible_timeout | no_solution
    bound_trace: tuple = ()

    def to_dict(self) -> dict:
        return {
            "assignment": [[v, self.assignment[v]] for v in self.assignment]
            if self.assignment is not None
            else None,
            "log_score": self.log_score,
            "wall_time_s": self.wall_time,
            "nodes": self.nodes_explored,
            "status": self.status,
            "bound_trace": [[n, b] for n, b in self.bound_trace],
        }

    @staticmethod
    def from_dict(d: Mapping) -> "SolveRecord":
        assignment = d["assignment"]
        return SolveRecord(
            assignment=Assignment({int(v): int(x) for v, x in assignment})
            if assignment is not None
            else None,
            log_score=float(d["log_score"]),
            wall_time=float(d["wall_time_s"]),
            nodes_explored=int(d["nodes"]),
            status=str(d["status"]),
            bound_trace=tuple((int(n), float(b)) for n, b in d["bound_trace"]),
        )


@dataclass(frozen=True)
class NodeInfo:
    """Descriptor handed to node-selection policies."""

    depth: int
    decisions: Mapping
    bound: float


@dataclass(frozen=True)
class BranchPolicy:
    """Orders free variables (and a first value) at a search node."""

    name: str
    fn: Callable  # (model, evidence, free frozenset) -> list[(var, first_value)]


@dataclass(frozen=True)
class NodePolicy:
    """Priority among sibling children; higher priority is explored first."""

    name: str
    priority: Callable  # NodeInfo -> float
    warm_start: Optional[Callable] = None  # (model, evidence) -> dict | None


def dfs_node_policy() -> NodePolicy:
    """Plain DFS: siblings keep the branch policy's value order."""
    return NodePolicy(name="dfs", priority=lambda info: 0.0)


def _conditioned_degrees(model: GraphicalModel, evidence: Mapping) -> dict[int, int]:
    graph = primal_graph(condition(model, evidence))
    return {v: graph.degrees[v] for v in free_variables(model, evidence)}


class _OrderCache:
    """Reuse the first (root) elimination order by restriction at descendants."""

    def __init__(self, method: str = "min-fill"):
        self.method = method
        self._root: Optional[EliminationOrder] = None
        self._root_free: Optional[frozenset] = None

    def get(self, model: GraphicalModel, evidence: Mapping) -> EliminationOrder:
        free = frozenset(free_variables(model, evidence))
        if self._root is not None and free <= self._root_free:
            return restrict_order(self._root, free)
        graph = primal_graph(condition(model, evidence))
        fn = min_fill_order if self.method == "min-fill" else min_degree_order
        order = fn(graph, free)
        if self._root is None:
            self._root = order
            self._root_free = free
        return order


def strong_branching_score(
    model: GraphicalModel, evidence: Mapping, var: int, i_bound: int
) -> tuple[float, int]:
    """One-step look-ahead: bound improvement from fixing ``var``.

    Returns ``(parent_bound - max(child bounds), best child value)``
    with ties on the child bounds resolving to value 0.
    """
    evidence = evidence if isinstance(evidence, Assignment) else Assignment(evidence)
    if var in evidence:
        raise ValueError(f"variable {var} is not free")
    parent = mpe_upper_bound(model, evidence, i_bound)
    b0 = mpe_upper_bound(model, evidence.assign(var, 0), i_bound)
    b1 = mpe_upper_bound(model, evidence.assign(var, 1), i_bound)
    best = 0 if b0 >= b1 else 1
    return parent - max(b0, b1), best


def strong_branching_policy(i_bound: int = DEFAULT_I_BOUND, top_k: int = 8) -> BranchPolicy:
    """Strong-branching-lite: full look-ahead on the ``top_k`` highest-degree vars."""
    cache = _OrderCache()

    def fn(model, evidence, free):
        evidence = evidence if isinstance(evidence, Assignment) else Assignment(evidence)
        degrees = _conditioned_degrees(model, evidence)
        ranked_by_degree = sorted(free, key=lambda v: (-degrees[v], v))
        scored = ranked_by_degree[:top_k]
        rest = ranked_by_degree[top_k:]
        parent_order = cache.get(model, evidence)
        parent = mini_bucket_bound(model, evidence, i_bound, parent_order).upper_bound
        entries = []
        for v in scored:
            child_free = [u for u in free if u != v]
            b0 = mini_bucket_bound(
                model, evidence.assign(v, 0), i_bound, restrict_order(parent_order, child_free)
            ).upper_bound
            b1 = mini_bucket_bound(
                model, evidence.assign(v, 1), i_bound, restrict_order(parent_order, child_free)
            ).upper_bound
            best = 0 if b0 >= b1 else 1
            entries.append((parent - max(b0, b1), v, best))
        entries.sort(key=lambda e: (-e[0], e[1]))
        out = [(v, best) for _, v, best in entries]
        out.extend((v, 0) for v in rest)
        return out

    return BranchPolicy(name="strong", fn=fn)


def max_degree_policy(
    model: GraphicalModel,
    evidence: Mapping,
    gibbs: GibbsConfig,
    n_samples: int = 64,
) -> list[tuple[int, int]]:
    """Free variables by descending conditioned degree with Gibbs-mode values.

    This is the classical graph-based heuristic: highest-degree first
    (ties ascending index), each paired with its estimated most likely
    value given the evidence.
    """
    evidence = evidence if isinstance(evidence, Assignment) else Assignment(evidence)
    degrees = _conditioned_degrees(model, evidence)
    modes = estimate_mode_values(model, evidence, n_samples, gibbs)
    ranked = sorted(degrees, key=lambda v: (-degrees[v], v))
    return [(v, modes.get(v, 0)) for v in ranked]


def max_degree_branch_policy(
    gibbs: Optional[GibbsConfig] = None, n_samples: int = 64
) -> BranchPolicy:
    """Branch policy wrapping :func:`max_degree_policy` with a static root ranking."""
    gibbs = gibbs if gibbs is not None else GibbsConfig(burn_in=50, thinning=1, seed=0)
    cached: dict = {}

    def fn(model, evidence, free):
        if "ranking" not in cached or not free <= cached["root_free"]:
            cached["ranking"] = max_degree_policy(model, evidence, gibbs, n_samples)
            cached["root_free"] = frozenset(free)
        return [(v, val) for v, val in cached["ranking"] if v in free]

    return BranchPolicy(name="max-degree", fn=fn)


@dataclass
class _Node:
    decisions: dict
    free: tuple
    bound: float
    depth: int


def solve_mpe(
    model: GraphicalModel,
    evidence: Optional[Mapping] = None,
    budget: float = math.inf,
    branch: Optional[BranchPolicy] = None,
    node_sel: Optional[NodePolicy] = None,
    i_bound: int = DEFAULT_I_BOUND,
    seed: int = 0,
    order_method: str = "min-fill",
    use_bounds: bool = True,
    seed_incumbent: bool = True,
) -> SolveRecord:
    """Depth-first branch-and-bound MPE over the non-evidence variables.

    Anytime: the best incumbent is returned when the budget expires
    (``feasible_timeout``); exhausting the tree proves optimality.  A
    child is pruned when its upper bound cannot exceed the incumbent
    (within 1e-12 slack, so ties are pruned).  ``no_solution`` means
    every completion scores ``-inf``.  With ``use_bounds=False`` the
    solver enumerates without pruning, which changes only the node
    count, never the optimal value.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    t_start = time.monotonic()
    deadline = t_start + budget
    ev = evidence if isinstance(evidence, Assignment) else Assignment(evidence or {})
    branch = branch if branch is not None else strong_branching_policy(i_bound)
    node_sel = node_sel if node_sel is not None else dfs_node_policy()
    free0 = tuple(free_variables(model, ev))
    order_cache = _OrderCache(order_method)

    inc_score = NEG_INF
    inc_completion: Optional[dict] = None

    def consider(completion: dict) -> None:
        nonlocal inc_score, inc_completion
        sc = log_score(model, ev.union(completion))
        if sc > inc_score:
            inc_score = sc
            inc_completion = dict(completion)

    if free0 and seed_incumbent:
        modes = estimate_mode_values(
            model, ev, 48, GibbsConfig(burn_in=30, thinning=1, seed=seed)
        )
        consider(modes)
    if node_sel.warm_start is not None and free0:
        warm = node_sel.warm_start(model, ev)
        if warm:
            consider(dict(warm))

    def bound_of(ev_node: Assignment) -> float:
        if not use_bounds:
            return math.inf
        order = order_cache.get(model, ev_node)
        return mini_bucket_bound(model, ev_node, i_bound, order).upper_bound

    root_bound = bound_of(ev) if free0 else None
    trace: list[tuple[int, float]] = []

    def trace_append(n: int, value: float) -> None:
        if not trace or value < trace[-1][1]:
            trace.append((n, value))

    if root_bound is not None:
        trace_append(0, root_bound)

    stack = [_Node({}, free0, root_bound if root_bound is not None else math.inf, 0)]
    nodes = 0
    timed_out = False

    while stack:
        if nodes and nodes % _CLOCK_CHECK_INTERVAL == 0:
            if time.monotonic() > deadline:
                timed_out = True
                break
            gb = max(
                [inc_score] + [n.bound for n in stack]
            )
            trace_append(nodes, gb)
        node = stack.pop()
        nodes += 1
        if inc_completion is not None and node.bound <= inc_score + _PRUNE_SLACK:
            continue
        if not node.free:
            consider(node.decisions)
            continue
        ev_node = ev.union(node.decisions)
        ranked = branch.fn(model, ev_node, frozenset(node.free))
        var, first = ranked[0]
        children = []
        for rank, val in enumerate((first, 1 - first)):
            decisions = {**node.decisions, var: val}
            ev_child = ev.union(decisions)
            free_child = tuple(u for u in node.free if u != var)
            if not free_child:
                consider(decisions)
                continue
            b = bound_of(ev_child, free_child)
            if b == NEG_INF:
                continue
            if inc_completion is not None and b <= inc_score + _PRUNE_SLACK:
                continue
            pr = node_sel.priority(NodeInfo(node.depth + 1, Assignment(decisions), b))
            children.append((pr, rank, decisions, free_child, b))
        # Pop order: priority descending, then the policy's preferred value.
        children.sort(key=lambda c: (-c[0], c[1]))
        for pr, rank, decisions, free_child, b in reversed(children):
            stack.append(_Node(decisions, free_child, b, node.depth + 1))

    wall = time.monotonic() - t_start
    if timed_out:
        status = "feasible_timeout"
        gb = max([inc_score] + [n.bound for n in stack])
        trace_append(nodes, gb)
    elif inc_completion is not None and inc_score > NEG_INF:
        status = "optimal"
        trace_append(nodes, inc_score)
    else:
        status = "no_solution"
    assignment = (
        Assignment(inc_completion)
        if inc_completion is not None and inc_score > NEG_INF
        else None
    )
    return SolveRecord(
        assignment=assignment,
        log_score=inc_score,
        wall_time=wall,
        nodes_explored=max(nodes, 1),
        status=status,
        bound_trace=tuple(trace),
    )
