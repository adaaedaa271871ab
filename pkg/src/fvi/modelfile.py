"""JSON model files: factored MDP plus basis functions.

Layout::

    {"variables": [{"name": "a", "size": 2}, ...],
     "actions":   ["noop", ...],
     "factors":   [{"var": "a", "parents": ["a", "b"], "table": [action][parent assignment][value]}],
     "rewards":   [{"scope": ["a"], "table": [action][assignment]}],
     "basis":     [{"scope": ["a"], "table": [assignment]}],
     "gamma": 0.95,
     "start": [0, 0]}

Assignments over a listed scope are little-endian: the first listed variable
is the least significant digit. Scopes may be listed in any order; tables are
permuted into increasing variable order on load.
"""
import json
import math
from pathlib import Path

import numpy as np

from fvi.errors import ModelError
from fvi.factored.model import (STOCH_TOL, BasisSet, FactoredMdp,
                                LocalScopeFunction, TransitionFactor, VarSpace)


def _get(doc, key, path, kind=None):
    if not isinstance(doc, dict) or key not in doc:
        raise ModelError(f"missing key {key!r}", path or None)
    val = doc[key]
    if kind is not None and not isinstance(val, kind):
        raise ModelError(f"expected {kind.__name__}", f"{path}.{key}" if path else key)
    return val


def _array(raw, shape, path):
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise ModelError("table is not a rectangular array of numbers", path) from None
    if arr.shape != shape:
        raise ModelError(f"table has shape {arr.shape}, expected {shape}", path)
    if not np.all(np.isfinite(arr)):
        raise ModelError("table has non-finite entries", path)
    return arr


def _scope(names, index, path):
    if not isinstance(names, list):
        raise ModelError("scope must be a list of variable names", path)
    out = []
    for t, nm in enumerate(names):
        if nm not in index:
            raise ModelError(f"unknown variable {nm!r}", f"{path}[{t}]")
        out.append(index[nm])
    if len(set(out)) != len(out):
        raise ModelError("scope lists a variable twice", path)
    return out


def _sort_scope(table, listed, sizes, lead, trail):
    """Permute scope axes of ``table`` from listed order into increasing order.

    ``table`` has shape ``lead + (prod sizes,) + trail``.
    """
    k = len(listed)
    order = sorted(range(k), key=lambda t: listed[t])
    if order == list(range(k)):
        return tuple(listed), table
    nl, nt = len(lead), len(trail)
    # little-endian: listed position t becomes axis k-1-t after a C-order reshape
    full = table.reshape(lead + tuple(sizes[listed[t]] for t in reversed(range(k))) + trail)
    src = [nl + k - 1 - order[k - 1 - u] for u in range(k)]
    axes = list(range(nl)) + src + list(range(nl + k, nl + k + nt))
    out = full.transpose(axes).reshape(lead + (math.prod(sizes[i] for i in listed),) + trail)
    return tuple(sorted(listed)), np.ascontiguousarray(out)


def parse_model(doc):
    """Build ``(FactoredMdp, BasisSet or None)`` from a model document.

    Raises:
        ModelError: with ``path`` naming the offending element.
    """
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    variables = _get(doc, "variables", "", list)
    names, sizes = [], []
    for v, var in enumerate(variables):
        name = _get(var, "name", f"variables[{v}]", str)
        size = _get(var, "size", f"variables[{v}]", int)
        if size < 2:
            raise ModelError("variable size must be >= 2", f"variables[{v}].size")
        if name in names:
            raise ModelError(f"duplicate variable name {name!r}", f"variables[{v}].name")
        names.append(name)
        sizes.append(size)
    if not names:
        raise ModelError("at least one variable is required", "variables")
    index = {nm: i for i, nm in enumerate(names)}
    space = VarSpace(tuple(sizes), tuple(names))

    actions = _get(doc, "actions", "", list)
    if not actions or not all(isinstance(a, str) for a in actions) or len(set(actions)) != len(actions):
        raise ModelError("actions must be a non-empty list of distinct names", "actions")
    A = len(actions)

    factors = [None] * space.m
    for f, fac in enumerate(_get(doc, "factors", "", list)):
        where = f"factors[{f}]"
        var = _get(fac, "var", where, str)
        if var not in index:
            raise ModelError(f"unknown variable {var!r}", f"{where}.var")
        i = index[var]
        if factors[i] is not None:
            raise ModelError(f"second factor for variable {var!r}", where)
        parents = _scope(_get(fac, "parents", where, list), index, f"{where}.parents")
        n_par = math.prod(sizes[p] for p in parents)
        table = _array(_get(fac, "table", where), (A, n_par, sizes[i]), f"{where}.table")
        if np.any(table < 0):
            a, row, _ = map(int, np.argwhere(table < 0)[0])
            raise ModelError("negative probability", f"{where}.table[{a}][{row}]")
        bad = np.abs(table.sum(axis=2) - 1.0) > STOCH_TOL
        if np.any(bad):
            a, row = map(int, np.argwhere(bad)[0])
            raise ModelError(f"distribution for variable {var!r} sums to {table[a, row].sum()!r}",
                             f"{where}.table[{a}][{row}]")
        scope, table = _sort_scope(table, parents, sizes, (A,), (sizes[i],))
        factors[i] = TransitionFactor(i, scope, tuple(sizes[p] for p in scope), table)
    missing = [names[i] for i, fac in enumerate(factors) if fac is None]
    if missing:
        raise ModelError(f"no transition factor for variable(s) {', '.join(missing)}", "factors")

    rewards = []
    for j, rw in enumerate(_get(doc, "rewards", "", list)):
        where = f"rewards[{j}]"
        listed = _scope(_get(rw, "scope", where, list), index, f"{where}.scope")
        n = math.prod(sizes[p] for p in listed)
        table = _array(_get(rw, "table", where), (A, n), f"{where}.table")
        scope, table = _sort_scope(table, listed, sizes, (A,), ())
        rewards.append(LocalScopeFunction(scope, tuple(sizes[p] for p in scope), table))

    basis = None
    if "basis" in doc:
        fns = []
        for k, h in enumerate(_get(doc, "basis", "", list)):
            where = f"basis[{k}]"
            listed = _scope(_get(h, "scope", where, list), index, f"{where}.scope")
            n = math.prod(sizes[p] for p in listed)
            table = _array(_get(h, "table", where), (n,), f"{where}.table")
            scope, table = _sort_scope(table, listed, sizes, (), ())
            fns.append(LocalScopeFunction(scope, tuple(sizes[p] for p in scope), table))
        if not fns:
            raise ModelError("basis must list at least one function", "basis")
        basis = BasisSet(tuple(fns))

    gamma = _get(doc, "gamma", "")
    if isinstance(gamma, bool) or not isinstance(gamma, (int, float)):
        raise ModelError("gamma must be a number", "gamma")
    start = doc.get("start")
    if start is not None:
        if not isinstance(start, list) or len(start) != space.m or \
                not all(isinstance(s, int) and 0 <= s < n for s, n in zip(start, sizes)):
            raise ModelError("start must list one in-range value per variable", "start")
        start = tuple(start)
    fmdp = FactoredMdp(space, tuple(actions), tuple(factors), tuple(rewards), float(gamma), start)
    return fmdp, basis


def load_model(path):
    """Read and validate a model file. Returns ``(FactoredMdp, BasisSet or None)``."""
    p = Path(path)
    if not p.is_file():
        raise ModelError(f"model file not found: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_model(doc)


def to_document(fmdp, basis=None):
    """Inverse of :func:`parse_model` (scopes written in increasing order)."""
    sp = fmdp.space
    names = sp.names

    def scope(s):
        return [names[i] for i in s]

    doc = {
        "variables": [{"name": nm, "size": n} for nm, n in zip(names, sp.sizes)],
        "actions": list(fmdp.actions),
        "factors": [{"var": names[f.var], "parents": scope(f.parents), "table": f.table.tolist()}
                    for f in fmdp.factors],
        "rewards": [{"scope": scope(r.scope), "table": r.table.tolist()} for r in fmdp.rewards],
        "gamma": fmdp.gamma,
        "start": list(fmdp.start),
    }
    if basis is not None:
        doc["basis"] = [{"scope": scope(h.scope), "table": h.table.tolist()} for h in basis]
    return doc
