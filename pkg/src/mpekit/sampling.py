"""Gibbs sampling over binary graphical models.

Sweeps are systematic (site 0..n-1 per sweep) and every random draw
comes from a counter-based generator keyed by ``(seed, sweep, site)``,
so runs are reproducible bit-for-bit and independent chains can be
derived from distinct seeds without shared state.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .model import (
    Assignment,
    GraphicalModel,
    LogPotential,
    NEG_INF,
    _add_broadcast,
    condition,
    free_variables,
)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
# Counter layout: sweep index shifted past the site index.
_SITE_BITS = 20
#: Per-site conditional tables are precomputed up to this many neighbors.
_MAX_TABLE_NEIGHBORS = 16


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def counter_uniform(seed: int, sweep: int, site: int) -> float:
    """Deterministic uniform in [0, 1) keyed by (seed, sweep, site)."""
    counter = ((sweep << _SITE_BITS) | site) + 1
    z = _mix64((seed + _GOLDEN * counter) & _MASK64)
    return (z >> 11) * 2.0**-53


@dataclass(frozen=True)
class GibbsConfig:
    """Sampler settings; the paper-style pipeline leaves these to the caller."""

    burn_in: int = 500
    thinning: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def gibbs_conditional(model: GraphicalModel, state: Mapping, var: int) -> float:
    """P(var = 1 | all other variables as in ``state``).

    Computed as sigma(s1 - s0) where s0/s1 sum the factors touching
    ``var`` with it clamped to 0/1.  If both branches are ``-inf`` the
    conditional is defined as 0.5.
    """
    s0 = 0.0
    s1 = 0.0
    for f in model.factors:
        if var not in f.scope:
            continue
        idx0 = tuple(0 if u == var else state[u] for u in f.scope)
        idx1 = tuple(1 if u == var else state[u] for u in f.scope)
        s0 += float(f.table[idx0])
        s1 += float(f.table[idx1])
    if s0 == NEG_INF and s1 == NEG_INF:
        return 0.5
    if s1 == NEG_INF:
        return 0.0
    if s0 == NEG_INF:
        return 1.0
    return _sigmoid(s1 - s0)


def _site_table(model: GraphicalModel, var: int):
    """Precompute the conditional P(var=1 | neighbors) over all neighbor states.

    Returns ``(neighbors, weights, p1_flat)`` where the flat index of a
    neighbor configuration is ``sum(state[nbr] * weight)``.  Falls back
    to ``None`` when the neighborhood is too large to tabulate.
    """
    touching = [f for f in model.factors if var in f.scope]
    nbrs = sorted({u for f in touching for u in f.scope if u != var})
    if len(nbrs) > _MAX_TABLE_NEIGHBORS:
        return None
    axis_of = {u: i for i, u in enumerate(nbrs)}
    shape = (2,) * len(nbrs)
    s0 = np.zeros(shape)
    s1 = np.zeros(shape)
    for f in touching:
        pos = f.scope.index(var)
        idx0 = tuple(0 if i == pos else slice(None) for i in range(len(f.scope)))
        idx1 = tuple(1 if i == pos else slice(None) for i in range(len(f.scope)))
        rest = tuple(u for u in f.scope if u != var)
        _add_broadcast(s0, axis_of, LogPotential(rest, f.table[idx0]))
        _add_broadcast(s1, axis_of, LogPotential(rest, f.table[idx1]))
    with np.errstate(invalid="ignore", over="ignore"):
        d = s1 - s0
        p1 = np.where(d >= 0, 1.0 / (1.0 + np.exp(-d)), np.exp(d) / (1.0 + np.exp(d)))
    p1 = np.where(np.isneginf(s0) & np.isneginf(s1), 0.5, p1)
    p1 = np.where(np.isneginf(s1) & ~np.isneginf(s0), 0.0, p1)
    p1 = np.where(np.isneginf(s0) & ~np.isneginf(s1), 1.0, p1)
    k = len(nbrs)
    weights = tuple(1 << (k - 1 - j) for j in range(k))
    return tuple(nbrs), weights, p1.reshape(-1).tolist()


def _chain_rows(
    model: GraphicalModel, clamped: Mapping, n: int, cfg: GibbsConfig
) -> np.ndarray:
    """Run one chain and return kept states as an ``(n, num_vars)`` int8 array."""
    nv = model.num_vars
    if nv >= (1 << _SITE_BITS):
        raise ValueError("model too large for the counter layout")
    seed = cfg.seed & _MASK64
    state = [0] * nv
    for v in range(nv):
        if v in clamped:
            state[v] = int(clamped[v])
        else:
            state[v] = 1 if counter_uniform(seed, 0, v) < 0.5 else 0
    sites = []
    for v in range(nv):
        if v in clamped:
            continue
        table = _site_table(model, v)
        sites.append((v, table))

    rows = np.zeros((n, nv), dtype=np.int8)
    uniform = counter_uniform
    sweep = 0

    def do_sweep(sweep: int) -> None:
        for v, table in sites:
            if table is None:
                p1 = gibbs_conditional(model, state, v)
            else:
                nbrs, weights, flat = table
                idx = 0
                for u, w in zip(nbrs, weights):
                    if state[u]:
                        idx += w
                p1 = flat[idx]
            state[v] = 1 if uniform(seed, sweep, v) < p1 else 0

    for _ in range(cfg.burn_in):
        sweep += 1
        do_sweep(sweep)
    for k in range(n):
        for _ in range(cfg.thinning):
            sweep += 1
            do_sweep(sweep)
        rows[k] = state
    return rows


def gibbs_sample(model: GraphicalModel, n: int, cfg: GibbsConfig) -> list[Assignment]:
    """Draw ``n`` full assignments from the model's joint distribution.

    The initial state is uniform over ``{0,1}^n``; ``cfg.burn_in``
    sweeps are discarded and one state is kept every ``cfg.thinning``
    sweeps.  Output is a deterministic function of ``(model, n, cfg)``.
    """
    if n < 0:
        raise ValueError("sample count must be >= 0")
    rows = _chain_rows(model, {}, n, cfg)
    return [Assignment(dict(enumerate(int(x) for x in row))) for row in rows]


def estimate_mode_values(
    model: GraphicalModel, evidence: Mapping, n: int, cfg: GibbsConfig
) -> dict[int, int]:
    """Majority value per free variable across ``n`` conditioned samples.

    Evidence variables are clamped; exact ties resolve to value 0.
    """
    ev = evidence if isinstance(evidence, Assignment) else Assignment(evidence)
    free = free_variables(model, ev)
    if not free:
        return {}
    if n <= 0:
        return {v: 0 for v in free}
    cond = condition(model, ev)
    rows = _chain_rows(cond, ev, n, cfg)
    ones = rows.sum(axis=0)
    return {v: int(2 * int(ones[v]) > n) for v in free}
