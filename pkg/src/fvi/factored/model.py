"""Factored MDP data model and its flattening oracle.

States are integer vectors ``x`` with ``x[i] in range(sizes[i])``. Wherever a
scope (or the whole state) is linearised, the first variable of the scope is
the least significant digit (little-endian mixed radix).
"""
import math
from dataclasses import dataclass

import numpy as np

from fvi.errors import InvalidInputError, ModelError
from fvi.tabular import FlatMdp

STOCH_TOL = 1e-9
FLATTEN_CAP = 2 ** 16


def _strides(sizes):
    out = np.ones(len(sizes), dtype=np.int64)
    for t in range(1, len(sizes)):
        out[t] = out[t - 1] * sizes[t - 1]
    return out


def decode(indices, sizes):
    """Mixed-radix digits of ``indices``; returns shape (len(indices), len(sizes))."""
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    out = np.empty((idx.shape[0], len(sizes)), dtype=np.int64)
    for t, n in enumerate(sizes):
        out[:, t] = idx % n
        idx = idx // n
    return out


def assignments(sizes):
    """All assignments of a scope with the given domain sizes, in table order."""
    return decode(np.arange(math.prod(sizes)), sizes)


@dataclass(frozen=True)
class VarSpace:
    sizes: tuple
    names: tuple = None

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if len(sizes) < 1:
            raise InvalidInputError("a factored state space needs at least one variable")
        if any(n < 2 for n in sizes):
            raise InvalidInputError(f"variable domain sizes must be >= 2, got {sizes}")
        names = tuple(self.names) if self.names is not None else tuple(f"x{i}" for i in range(len(sizes)))
        if len(names) != len(sizes) or len(set(names)) != len(names):
            raise InvalidInputError("variable names must be unique, one per variable")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "names", names)

    @property
    def m(self):
        return len(self.sizes)

    @property
    def size(self):
        """Number of joint states (an exact Python int; may be astronomically large)."""
        return math.prod(self.sizes)

    def scope_sizes(self, scope):
        return tuple(self.sizes[i] for i in scope)

    def check_scope(self, scope):
        scope = tuple(int(i) for i in scope)
        if any(i < 0 or i >= self.m for i in scope):
            raise InvalidInputError(f"scope {scope} has an index outside 0..{self.m - 1}")
        if any(a >= b for a, b in zip(scope, scope[1:])):
            raise InvalidInputError(f"scope {scope} must be strictly increasing")
        return scope

    def check_states(self, states):
        X = np.asarray(states, dtype=np.int64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.m:
            raise InvalidInputError(f"states must have {self.m} components")
        if np.any(X < 0) or np.any(X >= np.asarray(self.sizes)):
            raise InvalidInputError("state component outside its variable domain")
        return X

    def index(self, states):
        """Linear index of each state (requires the space to fit in int64)."""
        if self.size >= 2 ** 62:
            raise InvalidInputError("state space too large for linear indices")
        X = self.check_states(states)
        return X @ _strides(self.sizes)

    def all_states(self, cap=FLATTEN_CAP):
        if self.size > cap:
            raise InvalidInputError(
                f"refusing to enumerate {self.size} states (cap {cap}); raise the flatten cap explicitly")
        return decode(np.arange(self.size), self.sizes)


def local_index(states, scope, sizes):
    """Table position of ``states[:, scope]`` for a scope with domain ``sizes``."""
    X = np.asarray(states, dtype=np.int64)
    if not scope:
        return np.zeros(X.shape[0], dtype=np.int64)
    return X[:, list(scope)] @ _strides(sizes)


@dataclass(frozen=True, eq=False)
class LocalScopeFunction:
    """Table over ``X[scope]``; ``table`` is (n_assign,) or (n_actions, n_assign)."""

    scope: tuple
    sizes: tuple
    table: np.ndarray

    def __post_init__(self):
        scope = tuple(int(i) for i in self.scope)
        sizes = tuple(int(n) for n in self.sizes)
        table = np.array(self.table, dtype=float)
        if len(scope) != len(sizes):
            raise InvalidInputError("scope and sizes differ in length")
        if any(a >= b for a, b in zip(scope, scope[1:])):
            raise InvalidInputError(f"scope {scope} must be strictly increasing")
        if table.ndim not in (1, 2) or table.shape[-1] != math.prod(sizes):
            raise InvalidInputError(
                f"table shape {table.shape} does not fit scope sizes {sizes}")
        if not np.all(np.isfinite(table)):
            raise InvalidInputError("local-scope table has non-finite entries")
        table.setflags(write=False)
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "table", table)

    @property
    def action_dependent(self):
        return self.table.ndim == 2

    def __call__(self, states, action=None):
        """Evaluate at full states (S, m) by restriction to the scope."""
        idx = local_index(np.atleast_2d(states), self.scope, self.sizes)
        if self.action_dependent:
            if action is None:
                raise InvalidInputError("action-dependent function needs an action")
            return self.table[action, idx]
        return self.table[idx]

    def at(self, local):
        """Evaluate at restricted assignments ``x[scope]`` given directly, shape (S, |scope|)."""
        L = np.atleast_2d(np.asarray(local, dtype=np.int64))
        idx = L @ _strides(self.sizes) if self.scope else np.zeros(L.shape[0], dtype=np.int64)
        return self.table[..., idx]


@dataclass(frozen=True, eq=False)
class TransitionFactor:
    """``P_i(y[i] | x[parents], a)`` stored as ``table[a, parent_assignment, y_i]``."""

    var: int
    parents: tuple
    parent_sizes: tuple
    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        object.__setattr__(self, "parents", tuple(int(i) for i in self.parents))
        object.__setattr__(self, "parent_sizes", tuple(int(n) for n in self.parent_sizes))
        object.__setattr__(self, "var", int(self.var))
        if table.ndim != 3 or table.shape[1] != math.prod(self.parent_sizes):
            raise InvalidInputError(
                f"factor for variable {self.var}: table shape {table.shape} does not fit its parents")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def probs(self, states, action):
        """Distribution rows over ``y[var]`` for each state, shape (S, n_var)."""
        return self.table[action, local_index(states, self.parents, self.parent_sizes)]


@dataclass(frozen=True, eq=False)
class BasisSet:
    functions: tuple

    def __post_init__(self):
        fns = tuple(self.functions)
        if not fns:
            raise InvalidInputError("a basis needs at least one function")
        for k, h in enumerate(fns):
            if h.action_dependent:
                raise InvalidInputError(f"basis function {k} must not depend on the action")
        object.__setattr__(self, "functions", fns)

    @property
    def K(self):
        return len(self.functions)

    def __len__(self):
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)


@dataclass(frozen=True, eq=False)
class FactoredMdp:
    space: VarSpace
    actions: tuple
    factors: tuple
    rewards: tuple
    gamma: float
    start: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "rewards", tuple(self.rewards))
        object.__setattr__(self, "gamma", float(self.gamma))
        start = self.start if self.start is not None else (0,) * self.space.m
        object.__setattr__(self, "start", tuple(int(s) for s in start))
        _check_fmdp(self)

    @property
    def n_actions(self):
        return len(self.actions)

    @property
    def m(self):
        return self.space.m


def _check_fmdp(f):
    sp = f.space
    if not 0.0 <= f.gamma < 1.0:
        raise ModelError(f"discount must lie in [0, 1), got {f.gamma}", "gamma")
    if f.n_actions < 1:
        raise ModelError("at least one action is required", "actions")
    if len(f.factors) != sp.m:
        raise ModelError(f"expected one transition factor per variable ({sp.m}), got {len(f.factors)}",
                         "factors")
    for i, fac in enumerate(f.factors):
        where = f"factors[{i}]"
        if fac.var != i:
            raise ModelError(f"factor for variable {fac.var} found where variable {i} was expected", where)
        try:
            sp.check_scope(fac.parents)
        except InvalidInputError as exc:
            raise ModelError(str(exc), where) from None
        if fac.parent_sizes != sp.scope_sizes(fac.parents):
            raise ModelError("parent sizes disagree with the variable domains", where)
        if fac.table.shape != (f.n_actions, math.prod(fac.parent_sizes), sp.sizes[i]):
            raise ModelError(f"table shape {fac.table.shape} is wrong", where)
        if not np.all(np.isfinite(fac.table)) or np.any(fac.table < 0):
            raise ModelError(f"variable {sp.names[i]!r}: probabilities must be finite and non-negative",
                             where)
        sums = fac.table.sum(axis=2)
        bad = np.abs(sums - 1.0) > STOCH_TOL
        if np.any(bad):
            a, row = map(int, np.argwhere(bad)[0])
            raise ModelError(
                f"variable {sp.names[i]!r}: distribution for action {a}, parent assignment {row} "
                f"sums to {sums[a, row]!r}", f"{where}.table[{a}][{row}]")
    for j, rw in enumerate(f.rewards):
        where = f"rewards[{j}]"
        try:
            sp.check_scope(rw.scope)
        except InvalidInputError as exc:
            raise ModelError(str(exc), where) from None
        if rw.sizes != sp.scope_sizes(rw.scope):
            raise ModelError("scope sizes disagree with the variable domains", where)
        if rw.table.ndim != 2 or rw.table.shape[0] != f.n_actions:
            raise ModelError("reward tables must be indexed [action][assignment]", where)
    if len(f.start) != sp.m or any(not 0 <= s < n for s, n in zip(f.start, sp.sizes)):
        raise ModelError(f"start state {f.start} is not a valid state", "start")


def validate_fmdp(spec):
    """Validate a model and return it as a :class:`FactoredMdp`.

    ``spec`` may be a :class:`FactoredMdp` (re-checked) or a model document
    in the JSON file layout (parsed, basis ignored).
    """
    if isinstance(spec, FactoredMdp):
        _check_fmdp(spec)
        return spec
    from fvi.modelfile import parse_model
    return parse_model(spec)[0]


def check_basis(basis, space):
    for k, h in enumerate(basis):
        try:
            space.check_scope(h.scope)
        except InvalidInputError as exc:
            raise ModelError(str(exc), f"basis[{k}]") from None
        if h.sizes != space.scope_sizes(h.scope):
            raise ModelError("scope sizes disagree with the variable domains", f"basis[{k}]")
    return basis


def _check_action(fmdp, a):
    a = int(a)
    if not 0 <= a < fmdp.n_actions:
        raise InvalidInputError(f"action {a} out of range")
    return a


def eval_transition(fmdp, x, a, y):
    """``P(y | x, a)`` as the product of the per-variable factors."""
    sp = fmdp.space
    X = sp.check_states(x)
    Y = sp.check_states(y)
    a = _check_action(fmdp, a)
    p = 1.0
    for i, fac in enumerate(fmdp.factors):
        p *= fac.probs(X, a)[0, Y[0, i]]
    return float(p)


def eval_reward(fmdp, x, a):
    """``R(x, a)`` as the sum of the local reward terms."""
    X = fmdp.space.check_states(x)
    a = _check_action(fmdp, a)
    r = 0.0
    for rw in fmdp.rewards:
        r += rw(X, a)[0]
    return float(r)


def reward_vectors(fmdp, states):
    """Rewards at the given states for every action, shape (A, S)."""
    X = fmdp.space.check_states(states)
    out = np.zeros((fmdp.n_actions, X.shape[0]))
    for a in range(fmdp.n_actions):
        for rw in fmdp.rewards:
            out[a] += rw(X, a)
    return out


def flatten(fmdp, cap=FLATTEN_CAP):
    """Enumerate the full state space into an explicit :class:`FlatMdp`.

    Refuses when the space exceeds ``cap`` states.
    """
    sp = fmdp.space
    X = sp.all_states(cap)
    N = X.shape[0]
    P = np.empty((fmdp.n_actions, N, N))
    for a in range(fmdp.n_actions):
        M = np.ones((N, N))
        for i, fac in enumerate(fmdp.factors):
            M *= fac.probs(X, a)[:, X[:, i]]
        P[a] = M
    r = reward_vectors(fmdp, X)
    start = int(sp.index(np.asarray(fmdp.start)[None, :])[0])
    return FlatMdp(P, r, fmdp.gamma, start)


def flatten_basis(basis, space, states=None, cap=FLATTEN_CAP):
    """Basis matrix ``H[x, k] = h_k(x[C_k])`` over all states or the given list."""
    check_basis(basis, space)
    X = space.all_states(cap) if states is None else space.check_states(states)
    return np.column_stack([h(X) for h in basis])
