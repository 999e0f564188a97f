"""UAI model and evidence file formats.

Models are whitespace-delimited: a ``MARKOV``/``BAYES`` preamble,
variable count, cardinalities, factor scopes and probability-space
tables.  Tables are converted to log space on read (probability 0 maps
to ``-inf``) and back to probabilities on write.  Only binary variables
are accepted.

Evidence files are ``count idx val idx val ...``.
"""

from __future__ import annotations

import math

from .model import Assignment, GraphicalModel, LogPotential


class UAIError(ValueError):
    """Malformed UAI model or evidence document."""


class _Tokens:
    def __init__(self, text: str):
        self._toks = text.split()
        self._pos = 0

    def next(self, what: str) -> str:
        if self._pos >= len(self._toks):
            raise UAIError(f"unexpected end of document while reading {what}")
        tok = self._toks[self._pos]
        self._pos += 1
        return tok

    def next_int(self, what: str) -> int:
        tok = self.next(what)
        try:
            return int(tok)
        except ValueError:
            raise UAIError(f"expected integer for {what}, got {tok!r}") from None

    def next_float(self, what: str) -> float:
        tok = self.next(what)
        try:
            return float(tok)
        except ValueError:
            raise UAIError(f"expected number for {what}, got {tok!r}") from None

    def exhausted(self) -> bool:
        return self._pos >= len(self._toks)


def parse_uai(text: str, name: str = "model") -> GraphicalModel:
    """Parse a UAI model document into a binary graphical model.

    Probabilities are mapped through ``ln``; an exact 0 becomes ``-inf``.
    Raises :class:`UAIError` on a malformed preamble, non-binary
    cardinalities, table-size mismatches, or negative probabilities.
    """
    toks = _Tokens(text)
    kind = toks.next("network type").upper()
    if kind not in ("MARKOV", "BAYES"):
        raise UAIError(f"unsupported network type {kind!r}, expected MARKOV or BAYES")
    num_vars = toks.next_int("variable count")
    if num_vars < 0:
        raise UAIError("negative variable count")
    for i in range(num_vars):
        card = toks.next_int(f"cardinality of variable {i}")
        if card != 2:
            raise UAIError(
                f"variable {i} has cardinality {card}; only binary variables are supported"
            )
    num_factors = toks.next_int("factor count")
    if num_factors < 0:
        raise UAIError("negative factor count")
    scopes = []
    for k in range(num_factors):
        size = toks.next_int(f"scope size of factor {k}")
        if size < 0:
            raise UAIError(f"negative scope size for factor {k}")
        scope = tuple(toks.next_int(f"scope of factor {k}") for _ in range(size))
        for v in scope:
            if not 0 <= v < num_vars:
                raise UAIError(f"factor {k} references variable {v} out of range")
        if len(set(scope)) != len(scope):
            raise UAIError(f"factor {k} repeats a variable in its scope")
        scopes.append(scope)
    factors = []
    for k, scope in enumerate(scopes):
        n_entries = toks.next_int(f"table size of factor {k}")
        if n_entries != 2 ** len(scope):
            raise UAIError(
                f"factor {k} declares {n_entries} entries, expected {2 ** len(scope)}"
            )
        table = []
        for j in range(n_entries):
            p = toks.next_float(f"entry {j} of factor {k}")
            if p < 0:
                raise UAIError(f"negative probability {p} in factor {k}")
            table.append(math.log(p) if p > 0 else float("-inf"))
        factors.append(LogPotential(scope, table))
    if not toks.exhausted():
        raise UAIError("trailing tokens after the last factor table")
    return GraphicalModel(num_vars, factors, name=name)


def serialize_uai(model: GraphicalModel) -> str:
    """Write a model back to UAI text (probability space).

    Output is deterministic: serializing the same model twice yields
    byte-identical text, and a parse of the output reproduces the table
    probabilities exactly up to float formatting (well inside 1e-12
    relative error).
    """
    lines = ["MARKOV", str(model.num_vars)]
    lines.append(" ".join("2" for _ in range(model.num_vars)))
    lines.append(str(len(model.factors)))
    for f in model.factors:
        lines.append(" ".join([str(len(f.scope))] + [str(v) for v in f.scope]))
    for f in model.factors:
        flat = f.flat()
        lines.append(str(flat.size))
        lines.append(" ".join(repr(math.exp(x)) if x != float("-inf") else "0.0" for x in flat))
    return "\n".join(lines) + "\n"


def parse_evidence(text: str, num_vars: int | None = None) -> Assignment:
    """Parse a UAI evidence document: ``count`` then ``index value`` pairs."""
    toks = _Tokens(text)
    count = toks.next_int("evidence count")
    if count < 0:
        raise UAIError("negative evidence count")
    seen = {}
    for _ in range(count):
        var = toks.next_int("evidence index")
        val = toks.next_int("evidence value")
        if var in seen:
            raise UAIError(f"duplicate evidence index {var}")
        if num_vars is not None and not 0 <= var < num_vars:
            raise UAIError(f"evidence index {var} out of range [0, {num_vars})")
        if var < 0:
            raise UAIError(f"evidence index {var} is negative")
        if val not in (0, 1):
            raise UAIError(f"evidence value for variable {var} must be 0 or 1, got {val}")
        seen[var] = val
    if not toks.exhausted():
        raise UAIError("trailing tokens after evidence pairs")
    return Assignment(seen)
