"""Query dispatch: route a parsed query to the LP, the reduction planner,
or a specialised recursion, and report lower/upper values with bracket
diagnostics.  Upper values always come from conjugacy (the negated gamble
through the same machinery)."""

from __future__ import annotations

from typing import Mapping

from . import chains, conditioning, decompose, lp
from .errors import HypothesisError, InputError
from .fileio import Query
from .network import CredalNetwork, Event, Factor


def _bracket(net: CredalNetwork, f: Factor, given: Event, rule: str,
             tolerance: float, engine: str) -> conditioning.BracketResult:
    ev = conditioning.rho_evaluator(net, f, given, method=engine)
    if rule == "natural":
        return conditioning.natural_conditional(ev, tolerance)
    return conditioning.regular_conditional(ev, tolerance)


def _chain_bracket(net, f: Factor, given: Event, rule: str, tolerance: float):
    order = chains.chain_order(net)
    if given.cylinder and given.scope == (order[-1],) and \
            f.scope in ((order[0],), ()):
        (x_n,) = next(iter(given.states))
        fn = lambda mu: chains.chain_reverse_rho(net, f, x_n, mu)
        ev = conditioning.rho_callable(fn, f.min(), f.max(), f.min())
        if rule == "natural":
            return conditioning.natural_conditional(ev, tolerance)
        return conditioning.regular_conditional(ev, tolerance)
    raise HypothesisError(
        "chain dispatch needs a gamble on the first node conditioned on "
        "the value of the last one")


def _hmm_bracket(net, f: Factor, given: Event, rule: str, tolerance: float):
    if not given.cylinder:
        raise HypothesisError(
            "hidden-state dispatch needs an instantiated observation event")
    spec = chains.infer_hmm_spec(net, given.scope)
    if f.scope not in ((spec.state_nodes[-1],), ()):
        raise HypothesisError(
            "hidden-state dispatch needs a gamble on the final state node")
    observations = given.assignment()
    fn = lambda mu: chains.hmm_forward_rho(spec, f, observations, mu)
    ev = conditioning.rho_callable(fn, f.min(), f.max(), f.min())
    if rule == "natural":
        return conditioning.natural_conditional(ev, tolerance)
    return conditioning.regular_conditional(ev, tolerance)


def run_query(net: CredalNetwork, q: Query, trace: list | None = None) -> dict:
    """Evaluate one query; returns a flat result mapping for reporting."""
    out: dict = {"rule": q.rule, "method": q.method}

    if q.rule == "unconditional":
        if q.method == "lp":
            lower = lp.lower_expectation_lp(net, q.target)
            upper = -lp.lower_expectation_lp(net, -q.target)
        elif q.method in ("auto", "decompose"):
            lower = decompose.lower_expectation(net, q.target, trace=trace)
            upper = -decompose.lower_expectation(net, -q.target, trace=trace)
        elif q.method == "chain":
            lower = chains.chain_forward(net, q.target)
            upper = -chains.chain_forward(net, -q.target)
        elif q.method == "hmm":
            raise HypothesisError(
                "hidden-state dispatch requires a conditional query")
        out.update(lower=lower, upper=upper, kind="exact", iterations=0)
        return out

    if q.method == "lp":
        res_low = _bracket(net, q.target, q.given, q.rule, q.tolerance, "lp")
        res_up = _bracket(net, -q.target, q.given, q.rule, q.tolerance, "lp")
    elif q.method in ("auto", "decompose"):
        res_low = conditioning.reduce_then_condition(
            net, q.target, q.given, q.rule, tolerance=q.tolerance,
            trace=trace)
        res_up = conditioning.reduce_then_condition(
            net, -q.target, q.given, q.rule, tolerance=q.tolerance,
            trace=trace)
    elif q.method == "chain":
        res_low = _chain_bracket(net, q.target, q.given, q.rule, q.tolerance)
        res_up = _chain_bracket(net, -q.target, q.given, q.rule, q.tolerance)
    elif q.method == "hmm":
        res_low = _hmm_bracket(net, q.target, q.given, q.rule, q.tolerance)
        res_up = _hmm_bracket(net, -q.target, q.given, q.rule, q.tolerance)
    else:
        raise InputError(f"unknown method {q.method!r}")

    out.update(lower=res_low.value, upper=-res_up.value,
               kind=res_low.kind, iterations=res_low.iterations,
               bracket_width=res_low.width, upper_kind=res_up.kind,
               upper_iterations=res_up.iterations)
    return out
