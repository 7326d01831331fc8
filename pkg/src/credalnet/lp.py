"""The global linear program whose feasible set is the unconditional part
of the joint model induced by the local credal sets and the graph.

One unknown per joint state.  For every node ``s``, every joint state
``x`` of its non-descendants and every homogeneous row ``gamma`` of the
local set attached to ``(s, x restricted to parents(s))``, the program
carries the row::

    sum_{z_s} sum_{z_D(s)} P(z_s, z_D(s), x) * gamma(z_s)  >=  0

plus the single normalisation equality.  Explicit non-negativity rows
are redundant but can be requested for cross-checking.  Minimising a
gamble's coefficient vector over this polytope gives its tight lower
expectation; enumerating the polytope's vertices supports repeated
queries and the brute-force conditional oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping

import numpy as np

from . import polytope, simplex
from .credal import MassFunction
from .errors import CapabilityError, InputError, ModelError
from .network import CredalNetwork, Event, Factor

MAX_LP_VARIABLES = 2 ** 16
MAX_LP_ROWS = 2 ** 20

#: Desk-scale bound for joint vertex enumeration.
MAX_ENUMERATION_STATES = 64


class JointIndex:
    """Index arithmetic over the joint states of the whole network,
    lexicographic in node-declaration order."""

    def __init__(self, net: CredalNetwork):
        self.nodes = net.dag.nodes
        self.sizes = np.array([net.size(s) for s in self.nodes])
        self.total = int(np.prod(self.sizes)) if len(self.sizes) else 1
        strides = np.ones(len(self.nodes), dtype=np.int64)
        for i in range(len(self.nodes) - 2, -1, -1):
            strides[i] = strides[i + 1] * self.sizes[i + 1]
        self.strides = strides
        self._pos = {s: i for i, s in enumerate(self.nodes)}

    def digits(self, node: str) -> np.ndarray:
        """State index of ``node`` at every joint state."""
        i = self._pos[node]
        return (np.arange(self.total) // self.strides[i]) % self.sizes[i]

    def config_index(self, subset: Iterable[str]) -> tuple[np.ndarray, int]:
        """Config index over ``subset`` at every joint state, and the
        config count.  Subset order must follow declaration order."""
        idx = np.zeros(self.total, dtype=np.int64)
        count = 1
        for s in subset:
            idx = idx * self.sizes[self._pos[s]] + self.digits(s)
            count *= int(self.sizes[self._pos[s]])
        return idx, count


@dataclass
class LinearProgram:
    """Dense minimisation program over the joint-state unknowns."""

    variables: tuple[tuple, ...]          # joint states, lexicographic
    objective: np.ndarray
    eq_rows: np.ndarray                   # here: the single normalisation row
    eq_rhs: np.ndarray
    ineq_rows: np.ndarray                 # rows r with  r @ P >= rhs
    ineq_rhs: np.ndarray
    row_labels: tuple[str, ...]

    def dump(self) -> str:
        """Line-oriented text form, deterministic ordering."""
        lines = ["vars " + " ".join(",".join(v) for v in self.variables)]
        lines.append("min " + " ".join(repr(float(c)) for c in self.objective))
        for row, rhs in zip(self.eq_rows, self.eq_rhs):
            lines.append("eq " + " ".join(repr(float(a)) for a in row)
                         + " = " + repr(float(rhs)))
        for label, row, rhs in zip(self.row_labels, self.ineq_rows, self.ineq_rhs):
            lines.append(f"ge {label} " + " ".join(repr(float(a)) for a in row)
                         + " >= " + repr(float(rhs)))
        return "\n".join(lines) + "\n"


@dataclass
class LpSolution:
    optimum: float
    argmin: dict
    status: str


def _objective_from_factor(net: CredalNetwork, idx: JointIndex,
                           f: Factor) -> np.ndarray:
    unknown = set(f.scope) - set(net.dag.nodes)
    if unknown:
        raise InputError(f"factor scope outside the network: {sorted(unknown)}")
    scope = net.dag.sorted_nodes(f.scope)
    if scope != f.scope:
        raise InputError("factor scope must follow declaration order")
    values = np.array([f.table[t] for t in net.joint_tuples(scope)])
    cfg, _ = idx.config_index(scope)
    return values[cfg]


def factor_vector(net: CredalNetwork, f: Factor) -> np.ndarray:
    """The factor's value at every joint state (cylindrical extension),
    aligned with the lexicographic joint-state order."""
    return _objective_from_factor(net, JointIndex(net), f)


def event_mask(net: CredalNetwork, event: Event) -> np.ndarray:
    """Boolean membership of every joint state in the event."""
    idx = JointIndex(net)
    scope = net.dag.sorted_nodes(event.scope)
    if scope != event.scope:
        raise InputError("event scope must follow declaration order")
    tuples = net.joint_tuples(scope)
    member = np.array([t in event.states for t in tuples])
    cfg, _ = idx.config_index(scope)
    return member[cfg]


def _constraint_rows(net: CredalNetwork, idx: JointIndex):
    """The homogeneous global rows, one per (node, non-descendant state,
    local gamma), in deterministic order."""
    rows, labels = [], []
    for s in net.dag.nodes:
        nd = net.dag.sorted_nodes(
            set(net.dag.nodes) - {s} - net.dag.descendants(s))
        pa = net.dag.parents(s)
        pa_pos = [nd.index(p) for p in pa]
        zs = idx.digits(s)
        cfg, count = idx.config_index(nd)
        nd_tuples = list(product(*(net.states(u) for u in nd)))
        assert len(nd_tuples) == count
        for ci, nd_t in enumerate(nd_tuples):
            pa_cfg = tuple(nd_t[i] for i in pa_pos)
            local = net.local(s, pa_cfg)
            mask = cfg == ci
            zsm = zs[mask]
            for gi, h in enumerate(local.homogeneous):
                gamma = np.asarray(h.gamma)
                row = np.zeros(idx.total)
                row[mask] = gamma[zsm]
                rows.append(row)
                labels.append(f"{s}|{','.join(nd_t) if nd_t else '-'}|g{gi}")
        if len(rows) > MAX_LP_ROWS:
            raise CapabilityError("global program exceeds the row bound")
    return rows, labels


def build_global_lp(net: CredalNetwork, f: Factor,
                    include_nonnegativity: bool = False) -> LinearProgram:
    """Assemble the global program for minimising the expectation of f."""
    idx = JointIndex(net)
    if idx.total > MAX_LP_VARIABLES:
        raise CapabilityError("global program exceeds the variable bound")
    c = _objective_from_factor(net, idx, f)
    rows, labels = _constraint_rows(net, idx)
    if include_nonnegativity:
        for j in range(idx.total):
            row = np.zeros(idx.total)
            row[j] = 1.0
            rows.append(row)
            labels.append(f"nonneg|{j}")
    if len(rows) > MAX_LP_ROWS:
        raise CapabilityError("global program exceeds the row bound")
    return LinearProgram(
        variables=tuple(net.joint_tuples()),
        objective=c,
        eq_rows=np.ones((1, idx.total)),
        eq_rhs=np.ones(1),
        ineq_rows=np.array(rows) if rows else np.zeros((0, idx.total)),
        ineq_rhs=np.zeros(len(rows)),
        row_labels=tuple(labels),
    )


def solve_lp(lp: LinearProgram, *, exact: bool = False) -> LpSolution:
    res = simplex.solve(lp.objective, A_eq=lp.eq_rows, b_eq=lp.eq_rhs,
                        A_ub=lp.ineq_rows, b_ub=lp.ineq_rhs, exact=exact)
    if res.status != "optimal":
        return LpSolution(float("nan"), {}, res.status)
    x = res.x if not exact else np.array([float(v) for v in res.x])
    argmin = dict(zip(lp.variables, x))
    opt = res.objective if exact else float(res.objective)
    return LpSolution(opt, argmin, "optimal")


class GlobalPolytope:
    """The constraint system of a network, cached so that many objectives
    (e.g. the evaluations of a bracketing run) reuse one build."""

    def __init__(self, net: CredalNetwork, include_nonnegativity: bool = False):
        self.net = net
        self.idx = JointIndex(net)
        if self.idx.total > MAX_LP_VARIABLES:
            raise CapabilityError("global program exceeds the variable bound")
        rows, labels = _constraint_rows(net, self.idx)
        if include_nonnegativity:
            rows = rows + [row for row in np.eye(self.idx.total)]
            labels = labels + [f"nonneg|{j}" for j in range(self.idx.total)]
        self.rows = np.array(rows) if rows else np.zeros((0, self.idx.total))
        self.labels = tuple(labels)
        self._eq = np.ones((1, self.idx.total))

    def minimize(self, c: np.ndarray, *, exact: bool = False):
        res = simplex.solve(c, A_eq=self._eq, b_eq=[1.0],
                            A_ub=self.rows, b_ub=np.zeros(len(self.rows)),
                            exact=exact)
        if res.status != "optimal":
            raise ModelError(
                f"global program ended with status {res.status}; "
                "the local models are inconsistent or the build is invalid")
        return res.objective, res.x

    def objective_of(self, f: Factor) -> np.ndarray:
        return _objective_from_factor(self.net, self.idx, f)

    def extreme_points(self) -> np.ndarray:
        if self.idx.total > MAX_ENUMERATION_STATES:
            raise CapabilityError(
                f"vertex enumeration limited to {MAX_ENUMERATION_STATES} "
                "joint states")
        return polytope.cut_simplex(self.idx.total, self.rows)


def lower_expectation_lp(net: CredalNetwork, f: Factor, *,
                         include_nonnegativity: bool = False,
                         exact: bool = False) -> float:
    """Tight lower expectation of ``f`` via the global program."""
    gp = GlobalPolytope(net, include_nonnegativity)
    value, _ = gp.minimize(gp.objective_of(f), exact=exact)
    return value if exact else float(value)


def upper_expectation_lp(net: CredalNetwork, f: Factor, **kw) -> float:
    return -lower_expectation_lp(net, -f, **kw)


def solve_global(net: CredalNetwork, f: Factor, *,
                 include_nonnegativity: bool = False,
                 exact: bool = False) -> LpSolution:
    """Like :func:`lower_expectation_lp` but returning the argmin as well."""
    lp = build_global_lp(net, f, include_nonnegativity)
    return solve_lp(lp, exact=exact)


def enumerate_joint_extreme_points(net: CredalNetwork) -> list[MassFunction]:
    """Extreme points of the global polytope (desk scale).

    Minimising any linear objective over the returned list equals
    :func:`lower_expectation_lp` for the same objective.
    """
    gp = GlobalPolytope(net)
    V = gp.extreme_points()
    if len(V) == 0:
        raise ModelError("global polytope is empty")
    joint = tuple(net.joint_tuples())
    V = np.clip(V, 0.0, None)
    return [MassFunction(joint, tuple(float(x) for x in v / v.sum()))
            for v in V]
