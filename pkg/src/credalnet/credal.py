"""Finite local credal sets in dual vertex/constraint representation.

A credal set is a nonempty closed convex set of mass functions over one
node's finite state space.  It can be handed over as a list of extreme
points, as a list of linear constraints ``alpha @ p >= beta``, or both.
On construction the set is normalised to a list of *homogeneous*
constraints ``gamma @ p >= 0`` (valid on the ``sum p = 1`` hyperplane,
with ``gamma = alpha - beta``); per-state non-negativity rows are added
unless an LP certifies that they are already implied.  All query
operations are pure, so instances are freely shareable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import polytope, simplex
from .errors import CapabilityError, InputError, ModelError

State = Hashable

#: Feasibility tolerance (mass-function validity, constraint slack).
TOL_FEAS = simplex.TOL_FEAS

#: Value-agreement tolerance used by the numerical invariants.
TOL_NUM = 1e-9

#: Desk-scale bounds for the representation conversions.
MAX_CONVERSION_STATES = 12
MAX_CONVERSION_VERTICES = 64


@dataclass(frozen=True)
class MassFunction:
    """A probability mass function over an ordered finite state space."""

    states: tuple[State, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.states) != len(self.probs) or not self.states:
            raise InputError("mass function must assign one value per state")
        if any(p < -TOL_FEAS for p in self.probs):
            raise InputError(f"negative probability in {self.probs}")
        if abs(sum(self.probs) - 1.0) > TOL_FEAS:
            raise InputError(f"probabilities sum to {sum(self.probs)}, not 1")

    @classmethod
    def from_mapping(cls, states: Sequence[State], values: Mapping[State, float]):
        if set(values) != set(states):
            raise InputError("mass function does not cover the state space")
        return cls(tuple(states), tuple(float(values[s]) for s in states))

    def __getitem__(self, state: State) -> float:
        return self.probs[self.states.index(state)]

    def as_dict(self) -> dict:
        return dict(zip(self.states, self.probs))


@dataclass(frozen=True)
class LinearConstraint:
    """``sum_x coeffs[x] * p(x) >= bound``."""

    coeffs: tuple[float, ...]
    bound: float

    @classmethod
    def from_mapping(cls, states: Sequence[State], coeffs: Mapping[State, float],
                     bound: float):
        if set(coeffs) != set(states):
            raise InputError("constraint coefficients must cover the state space")
        return cls(tuple(float(coeffs[s]) for s in states), float(bound))


@dataclass(frozen=True)
class HomogeneousConstraint:
    """``sum_x gamma[x] * p(x) >= 0`` on the ``sum p = 1`` hyperplane."""

    gamma: tuple[float, ...]


def _as_values(states: Sequence[State], f) -> np.ndarray:
    """Accept a mapping state->value or a sequence aligned with states."""
    if isinstance(f, Mapping):
        missing = [s for s in states if s not in f]
        if missing:
            raise InputError(f"gamble does not cover states {missing}")
        return np.array([float(f[s]) for s in states])
    arr = np.asarray(f, dtype=float)
    if arr.shape != (len(states),):
        raise InputError("gamble has the wrong number of values")
    return arr


class CredalSet:
    """A nonempty closed convex polytope of mass functions."""

    def __init__(self, states: Sequence[State],
                 vertices: Iterable[MassFunction | Mapping | Sequence] | None = None,
                 constraints: Iterable[LinearConstraint | tuple] | None = None):
        self.states: tuple[State, ...] = tuple(states)
        if not self.states or len(set(self.states)) != len(self.states):
            raise InputError("state space must be nonempty without duplicates")
        n = len(self.states)

        if vertices is None and constraints is None:
            raise InputError("credal set needs vertices or constraints")

        self._V: np.ndarray | None = None
        self.vertices: tuple[MassFunction, ...] | None = None
        if vertices is not None:
            verts = [self._coerce_vertex(v) for v in vertices]
            if not verts:
                raise ModelError("empty vertex list")
            self.vertices = tuple(verts)
            self._V = np.array([v.probs for v in verts], dtype=float)

        self.constraints: tuple[LinearConstraint, ...] | None = None
        if constraints is not None:
            self.constraints = tuple(self._coerce_constraint(c) for c in constraints)

        self.homogeneous: tuple[HomogeneousConstraint, ...] = self._derive_homogeneous()
        self._H = (np.array([h.gamma for h in self.homogeneous], dtype=float)
                   if self.homogeneous else np.zeros((0, n)))

        if self._V is None and not self._feasible():
            raise ModelError("credal set is empty")
        if self._V is not None and self.constraints is not None:
            self._check_mutual_membership()
        if self._V is not None:
            self._check_minimal()

    # -- construction helpers ---------------------------------------------

    def _coerce_vertex(self, v) -> MassFunction:
        if isinstance(v, MassFunction):
            if v.states != self.states:
                raise InputError("vertex state space mismatch")
            return v
        if isinstance(v, Mapping):
            return MassFunction.from_mapping(self.states, v)
        return MassFunction(self.states, tuple(float(x) for x in v))

    def _coerce_constraint(self, c) -> LinearConstraint:
        if isinstance(c, LinearConstraint):
            if len(c.coeffs) != len(self.states):
                raise InputError("constraint width mismatch")
            return c
        coeffs, bound = c
        if isinstance(coeffs, Mapping):
            return LinearConstraint.from_mapping(self.states, coeffs, bound)
        return LinearConstraint(tuple(float(x) for x in coeffs), float(bound))

    def _derive_homogeneous(self) -> tuple[HomogeneousConstraint, ...]:
        n = len(self.states)
        if self.constraints is not None:
            raw = [(np.array(c.coeffs) - c.bound) for c in self.constraints]
        elif n == 2:
            # Binary sets are intervals on p(first state); the two interval
            # rows make the non-negativity rows redundant.
            lo = float(self._V[:, 0].min())
            hi = float(self._V[:, 0].max())
            return (HomogeneousConstraint((1.0 - lo, -lo)),
                    HomogeneousConstraint((hi - 1.0, hi)))
        else:
            facets = polytope.facet_constraints(self._V)
            raw = [alpha - beta for alpha, beta in facets]

        out = []
        for g in raw:
            g = np.asarray(g, dtype=float)
            scale = np.abs(g).max()
            if scale <= 1e-14:
                continue  # trivial row
            out.append(HomogeneousConstraint(tuple(float(x) for x in g / scale)))
        # Emit explicit non-negativity for every state that is not already
        # implied; correctness over minimality.
        G = np.array([h.gamma for h in out]) if out else np.zeros((0, n))
        for i in range(n):
            if not self._nonneg_implied(G, i):
                gamma = np.zeros(n)
                gamma[i] = 1.0
                out.append(HomogeneousConstraint(tuple(gamma)))
        return tuple(out)

    def _nonneg_implied(self, G: np.ndarray, i: int) -> bool:
        """Does ``sum p = 1`` plus the rows of G force ``p_i >= 0``?"""
        if self._V is not None and len(self.states) == 2:
            return True  # interval rows, see _derive_homogeneous
        n = len(self.states)
        c = np.zeros(n)
        c[i] = 1.0
        res = simplex.solve(c, A_eq=np.ones((1, n)), b_eq=[1.0],
                            A_ub=G, b_ub=np.zeros(len(G)))
        return res.status == "optimal" and res.objective >= -TOL_FEAS

    def _feasible(self) -> bool:
        n = len(self.states)
        res = simplex.solve(np.zeros(n), A_eq=np.ones((1, n)), b_eq=[1.0],
                            A_ub=self._H, b_ub=np.zeros(len(self._H)))
        return res.status == "optimal"

    def _check_mutual_membership(self):
        slack = self._V @ self._H.T
        if slack.size and slack.min() < -TOL_FEAS:
            raise InputError("a vertex violates the given constraints")
        if len(self.states) > MAX_CONVERSION_STATES:
            raise CapabilityError("dual-representation check exceeds desk scale")
        for w in polytope.cut_simplex(len(self.states), self._H):
            if not polytope.in_hull(w, self._V):
                raise InputError(
                    "constraint polytope is not covered by the given vertices")

    def _check_minimal(self):
        k = len(self._V)
        if k <= 1:
            return
        if k == 2:
            if np.max(np.abs(self._V[0] - self._V[1])) <= TOL_FEAS:
                raise InputError("duplicate vertices in credal set")
            return
        if k > MAX_CONVERSION_VERTICES:
            raise CapabilityError("vertex minimality check exceeds desk scale")
        for i in range(k):
            rest = np.delete(self._V, i, axis=0)
            if polytope.in_hull(self._V[i], rest):
                raise InputError(
                    f"vertex {i} lies in the convex hull of the others")

    # -- queries ------------------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.states)

    def lower_expectation(self, f, *, route: str = "auto",
                          exact: bool = False) -> float:
        """Tight lower bound on the expectation of the gamble ``f``.

        Uses the vertex list when one is available (minimum of finitely
        many dot products) and an LP over the constraint representation
        otherwise; ``route`` forces one of the two.
        """
        fv = _as_values(self.states, f)
        if route not in ("auto", "vertices", "lp"):
            raise InputError(f"unknown route {route!r}")
        use_vertices = self._V is not None if route == "auto" else route == "vertices"
        if use_vertices:
            if self._V is None:
                raise InputError("no vertex representation available")
            if exact:
                exps = [sum(Fraction(p) * Fraction(x) for p, x in zip(v, fv))
                        for v in self._V]
                return min(exps)
            return float(np.min(self._V @ fv))
        res = simplex.solve(
            fv if not exact else [Fraction(x) for x in fv],
            A_eq=np.ones((1, self.n_states)), b_eq=[1.0],
            A_ub=self._H, b_ub=np.zeros(len(self._H)), exact=exact)
        if res.status != "optimal":
            raise ModelError(f"local LP ended with status {res.status}")
        return res.objective if exact else float(res.objective)

    def upper_expectation(self, f, **kw) -> float:
        fv = _as_values(self.states, f)
        return -self.lower_expectation(-fv, **kw)

    def lower_probability(self, A: Iterable[State], **kw) -> float:
        return self.lower_expectation(self._indicator(A), **kw)

    def upper_probability(self, A: Iterable[State], **kw) -> float:
        return self.upper_expectation(self._indicator(A), **kw)

    def _indicator(self, A: Iterable[State]) -> np.ndarray:
        A = set(A)
        unknown = A - set(self.states)
        if unknown:
            raise InputError(f"event contains unknown states {unknown}")
        return np.array([1.0 if s in A else 0.0 for s in self.states])

    def contains(self, p, tol: float = TOL_FEAS) -> bool:
        """Membership of a mass function in the polytope."""
        pv = _as_values(self.states, p if not isinstance(p, MassFunction)
                        else dict(zip(p.states, p.probs)))
        if abs(pv.sum() - 1.0) > tol or pv.min() < -tol:
            return False
        return bool(len(self._H) == 0 or (self._H @ pv).min() >= -tol)

    def __repr__(self) -> str:
        nv = len(self._V) if self._V is not None else None
        return (f"CredalSet(states={self.states!r}, vertices={nv}, "
                f"homogeneous={len(self.homogeneous)})")


def vacuous(states: Sequence[State]) -> CredalSet:
    """The full simplex: degenerate mass on each state."""
    n = len(tuple(states))
    return CredalSet(states, vertices=np.eye(n))


def singleton(states: Sequence[State], p) -> CredalSet:
    """The one-element credal set {p}."""
    return CredalSet(states, vertices=[p])


def binary_interval(states: Sequence[State], low: float, high: float) -> CredalSet:
    """Binary credal set with p(first state) in [low, high]; degenerates
    to a singleton when the interval collapses."""
    states = tuple(states)
    if len(states) != 2:
        raise InputError("binary_interval needs exactly two states")
    if not (0.0 <= low <= high <= 1.0):
        raise InputError(f"invalid probability interval [{low}, {high}]")
    if high - low <= TOL_FEAS:
        return CredalSet(states, vertices=[(low, 1.0 - low)])
    return CredalSet(states, vertices=[(low, 1.0 - low), (high, 1.0 - high)])


# -- module-level operations (thin wrappers with the documented names) ------

def local_lower_expectation(m: CredalSet, f, **kw) -> float:
    return m.lower_expectation(f, **kw)


def local_upper_expectation(m: CredalSet, f, **kw) -> float:
    return m.upper_expectation(f, **kw)


def local_lower_probability(m: CredalSet, A, **kw) -> float:
    return m.lower_probability(A, **kw)


def local_upper_probability(m: CredalSet, A, **kw) -> float:
    return m.upper_probability(A, **kw)


def to_homogeneous(m: CredalSet) -> list[HomogeneousConstraint]:
    """The homogeneous-constraint representation (derived at load time)."""
    return list(m.homogeneous)


def vertices_to_constraints(m: CredalSet) -> list[LinearConstraint]:
    """Facet enumeration of the vertex representation."""
    if m._V is None:
        raise InputError("credal set has no vertex representation")
    if m.n_states > MAX_CONVERSION_STATES or len(m._V) > MAX_CONVERSION_VERTICES:
        raise CapabilityError("facet enumeration exceeds desk scale")
    return [LinearConstraint(tuple(float(a) for a in alpha), float(beta))
            for alpha, beta in polytope.facet_constraints(m._V)]


def constraints_to_vertices(m: CredalSet) -> list[MassFunction]:
    """Vertex enumeration of the constraint polytope."""
    if m.n_states > MAX_CONVERSION_STATES:
        raise CapabilityError("vertex enumeration exceeds desk scale")
    V = polytope.cut_simplex(m.n_states, m._H)
    if len(V) == 0:
        raise ModelError("credal set is empty")
    V = np.clip(V, 0.0, None)
    return [MassFunction(m.states, tuple(float(x) for x in v / v.sum()))
            for v in V]
