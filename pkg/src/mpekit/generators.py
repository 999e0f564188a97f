"""Seeded random model generators used by tests, demos, and benchmarks."""

from __future__ import annotations

import numpy as np

from .model import Assignment, GraphicalModel, LogPotential


def random_model(
    num_vars: int,
    n_unary: int = 0,
    n_pairwise: int = 0,
    n_ternary: int = 0,
    scale: float = 1.0,
    zero_fraction: float = 0.0,
    seed: int = 0,
    name: str | None = None,
) -> GraphicalModel:
    """Random binary model with mixed unary/pairwise/ternary factors.

    Log-potential entries are drawn from ``N(0, scale)``; with
    ``zero_fraction > 0`` a matching fraction of entries is replaced by
    ``-inf`` (zero probability).  Scopes are sampled without replacement
    within each factor, so the same clique may appear in several factors.
    """
    rng = np.random.default_rng(seed)
    factors = []
    for arity, count in ((1, n_unary), (2, n_pairwise), (3, n_ternary)):
        if arity > num_vars and count > 0:
            raise ValueError(f"cannot place arity-{arity} factors on {num_vars} variables")
        for _ in range(count):
            scope = rng.choice(num_vars, size=arity, replace=False)
            table = rng.normal(0.0, scale, size=2**arity)
            if zero_fraction > 0.0:
                mask = rng.random(table.shape) < zero_fraction
                table = np.where(mask, -np.inf, table)
            factors.append(LogPotential(sorted(int(v) for v in scope), table))
    return GraphicalModel(
        num_vars, factors, name=name if name is not None else f"random-{num_vars}v-s{seed}"
    )


def random_mixed_model(num_vars: int, seed: int = 0, scale: float = 1.0) -> GraphicalModel:
    """Convenience profile: one unary per variable plus ~1.2n pairwise and n/4 ternary."""
    return random_model(
        num_vars,
        n_unary=num_vars,
        n_pairwise=max(1, int(round(1.2 * num_vars))),
        n_ternary=max(1, num_vars // 4),
        scale=scale,
        seed=seed,
    )


def chain_model(num_vars: int, seed: int = 0, scale: float = 1.0) -> GraphicalModel:
    """Pairwise chain 0-1, 1-2, ..., with one unary per variable."""
    rng = np.random.default_rng(seed)
    factors = [
        LogPotential([v], rng.normal(0.0, scale, size=2)) for v in range(num_vars)
    ]
    factors += [
        LogPotential([v, v + 1], rng.normal(0.0, scale, size=4))
        for v in range(num_vars - 1)
    ]
    return GraphicalModel(num_vars, factors, name=f"chain-{num_vars}v-s{seed}")


def grid_model(rows: int, cols: int, seed: int = 0, scale: float = 1.0) -> GraphicalModel:
    """Pairwise grid with one unary per cell; variable index is row-major."""
    rng = np.random.default_rng(seed)
    idx = lambda r, c: r * cols + c
    factors = [
        LogPotential([idx(r, c)], rng.normal(0.0, scale, size=2))
        for r in range(rows)
        for c in range(cols)
    ]
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                factors.append(
                    LogPotential([idx(r, c), idx(r, c + 1)], rng.normal(0.0, scale, size=4))
                )
            if r + 1 < rows:
                factors.append(
                    LogPotential([idx(r, c), idx(r + 1, c)], rng.normal(0.0, scale, size=4))
                )
    return GraphicalModel(rows * cols, factors, name=f"grid-{rows}x{cols}-s{seed}")


def random_evidence(model: GraphicalModel, n_evidence: int, seed: int = 0) -> Assignment:
    """Uniformly random evidence: a random variable subset with random values."""
    rng = np.random.default_rng(seed)
    n_evidence = min(n_evidence, model.num_vars)
    variables = rng.choice(model.num_vars, size=n_evidence, replace=False)
    values = rng.integers(0, 2, size=n_evidence)
    return Assignment({int(v): int(x) for v, x in zip(variables, values)})
