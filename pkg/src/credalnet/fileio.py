"""Network and query files.

Both are restricted JSON documents with a canonical field order, so a
parse/serialize round trip is byte-stable.  Probabilities and bounds may
be written as JSON numbers, decimal strings, or exact fractions "a/b";
fixtures prefer fractions to avoid decimal-representation drift.

Network document::

    {"nodes": [{"name": "1", "states": ["h", "t"]}, ...],
     "edges": [["1", "2"], ...],
     "locals": [{"node": "1", "given": {},
                 "vertices": [{"h": "1/4", "t": "3/4"}, ...]},
                {"node": "2", "given": {"1": "h"},
                 "constraints": [{"alpha": {"h": "1", "t": "0"},
                                  "beta": "1/4"}, ...]}]}

Query document::

    {"target": {"scope": ["2"], "table": {"h": 1, "t": 0}},
     "given": {"assignment": {"1": "h"}},
     "rule": "natural", "method": "auto", "tolerance": 1e-9}

The target may also be {"indicator": {"scope": [...], "states": [[...]]}}
and the conditioning event an explicit joint-state list with the same
shape.  ``rule`` is natural, regular or unconditional.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping

from .credal import CredalSet, LinearConstraint
from .errors import InputError
from .graph import Dag
from .network import CredalNetwork, Event, Factor, ValidationReport


def parse_number(v) -> float:
    """JSON number, decimal string, or exact fraction 'a/b'."""
    if isinstance(v, bool):
        raise InputError(f"not a number: {v!r}")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            if "/" in v:
                return float(Fraction(v))
            return float(v)
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"cannot parse number {v!r}: {e}") from None
    raise InputError(f"not a number: {v!r}")


def _fmt(x: float) -> str:
    return repr(float(x))


# -- network documents -------------------------------------------------------

def validate_document(doc) -> ValidationReport:
    """Structural validation of a raw network document; reports every
    violation instead of stopping at the first."""
    report = ValidationReport()
    if not isinstance(doc, Mapping):
        report.add("document is not a JSON object")
        return report

    nodes = doc.get("nodes")
    names: list[str] = []
    spaces: dict[str, tuple] = {}
    if not isinstance(nodes, list) or not nodes:
        report.add("missing or empty 'nodes' list")
    else:
        for entry in nodes:
            if not isinstance(entry, Mapping) or "name" not in entry \
                    or "states" not in entry:
                report.add(f"malformed node entry {entry!r}")
                continue
            name = str(entry["name"])
            states = tuple(str(x) for x in entry["states"])
            if name in spaces:
                report.add(f"duplicate node {name!r}")
            if not states or len(set(states)) != len(states):
                report.add(f"bad state list for node {name!r}")
            names.append(name)
            spaces[name] = states

    edges = []
    for e in doc.get("edges", []):
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            report.add(f"malformed edge {e!r}")
            continue
        a, b = str(e[0]), str(e[1])
        if a not in spaces or b not in spaces:
            report.add(f"edge ({a!r}, {b!r}) references undeclared node")
            continue
        if a == b:
            report.add(f"self-loop on node {a!r}")
            continue
        if (a, b) in edges:
            report.add(f"duplicate edge ({a!r}, {b!r})")
            continue
        edges.append((a, b))

    # acyclicity on the raw edge list
    parents = {s: [] for s in spaces}
    for a, b in edges:
        parents[b].append(a)
    seen_order = []
    pending = dict((s, len(parents[s])) for s in spaces)
    queue = [s for s in names if pending.get(s) == 0]
    while queue:
        s = queue.pop()
        seen_order.append(s)
        for a, b in edges:
            if a == s:
                pending[b] -= 1
                if pending[b] == 0:
                    queue.append(b)
    if len(seen_order) != len(spaces):
        report.add("acyclicity violated")
        return report

    # local models: coverage and parse
    parent_list = {s: [a for a in names if (a, s) in set(edges)] for s in spaces}
    needed = set()
    for s in names:
        for cfg in product(*(spaces[p] for p in parent_list[s])):
            needed.add((s, cfg))
    seen = set()
    for entry in doc.get("locals", []):
        if not isinstance(entry, Mapping) or "node" not in entry:
            report.add(f"malformed local entry {entry!r}")
            continue
        s = str(entry["node"])
        if s not in spaces:
            report.add(f"local model for undeclared node {s!r}")
            continue
        given = entry.get("given", {})
        try:
            cfg = tuple(str(given[p]) for p in parent_list[s])
        except KeyError as e:
            report.add(f"local model for {s!r} misses parent value {e}")
            continue
        key = (s, cfg)
        if key in seen:
            report.add(f"duplicate local model for {key!r}")
            continue
        seen.add(key)
        if key not in needed:
            report.add(f"local model for impossible configuration {key!r}")
            continue
        try:
            _parse_local(entry, spaces[s])
        except InputError as e:
            report.add(f"invalid local model for {key!r}: {e}")
    for key in sorted(needed - seen):
        report.add(f"missing local model for node {key[0]!r} given {key[1]!r}")
    return report


def _parse_local(entry: Mapping, states: tuple) -> CredalSet:
    vertices = entry.get("vertices")
    constraints = entry.get("constraints")
    verts = None
    if vertices is not None:
        verts = [{s: parse_number(v[s]) for s in states}
                 if all(s in v for s in states) else _bad_vertex(v, states)
                 for v in vertices]
    cons = None
    if constraints is not None:
        cons = []
        for c in constraints:
            if "alpha" not in c or "beta" not in c:
                raise InputError(f"constraint needs alpha and beta: {c!r}")
            alpha = {s: parse_number(c["alpha"][s]) for s in states
                     if s in c["alpha"]}
            if set(alpha) != set(states):
                raise InputError(f"constraint alpha must cover {states}")
            cons.append(LinearConstraint.from_mapping(states, alpha,
                                                      parse_number(c["beta"])))
    return CredalSet(states, vertices=verts, constraints=cons)


def _bad_vertex(v, states):
    raise InputError(f"vertex {v!r} does not cover states {states}")


def load_network_document(doc) -> CredalNetwork:
    report = validate_document(doc)
    if not report.ok:
        raise InputError("invalid network document:\n" + str(report))
    names = [str(e["name"]) for e in doc["nodes"]]
    spaces = {str(e["name"]): tuple(str(x) for x in e["states"])
              for e in doc["nodes"]}
    edges = [(str(a), str(b)) for a, b in doc.get("edges", [])]
    dag = Dag(names, edges)
    locals_ = {}
    for entry in doc.get("locals", []):
        s = str(entry["node"])
        given = entry.get("given", {})
        cfg = tuple(str(given[p]) for p in dag.parents(s))
        locals_[(s, cfg)] = _parse_local(entry, spaces[s])
    return CredalNetwork(dag, spaces, locals_)


def load_network(path: str) -> CredalNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise InputError(f"cannot parse {path}: {e}") from None
    return load_network_document(doc)


def network_document(net: CredalNetwork) -> dict:
    """Canonical document for a network (vertex representation when
    available, constraints otherwise)."""
    doc = {
        "nodes": [{"name": s, "states": list(net.states(s))}
                  for s in net.dag.nodes],
        "edges": sorted([list(e) for e in net.dag.edges],
                        key=lambda e: (net.dag.index(e[0]), net.dag.index(e[1]))),
        "locals": [],
    }
    for s in net.dag.nodes:
        for cfg in net.parent_configs(s):
            m = net.local(s, cfg)
            entry = {"node": s,
                     "given": {p: x for p, x in zip(net.dag.parents(s), cfg)}}
            if m.vertices is not None:
                entry["vertices"] = [
                    {x: _fmt(v[x]) for x in m.states} for v in m.vertices]
            else:
                entry["constraints"] = [
                    {"alpha": {x: _fmt(a) for x, a in zip(m.states, c.coeffs)},
                     "beta": _fmt(c.bound)} for c in m.constraints]
            doc["locals"].append(entry)
    return doc


def dump_network(net: CredalNetwork) -> str:
    return json.dumps(network_document(net), indent=1, sort_keys=False) + "\n"


# -- query documents ----------------------------------------------------------

RULES = ("natural", "regular", "unconditional")
METHODS = ("auto", "lp", "decompose", "chain", "hmm")


@dataclass
class Query:
    target: Factor
    given: Event | None
    rule: str
    method: str
    tolerance: float


def _parse_scoped_states(net: CredalNetwork, obj, what: str):
    scope = [str(s) for s in obj.get("scope", [])]
    net.dag.check_subset(scope)
    scope_t = net.dag.sorted_nodes(scope)
    states = obj.get("states")
    if not isinstance(states, list) or not states:
        raise InputError(f"{what} needs a nonempty 'states' list")
    tuples = []
    for row in states:
        if not isinstance(row, list) or len(row) != len(scope):
            raise InputError(f"bad joint state {row!r} for scope {scope}")
        by_node = dict(zip(scope, map(str, row)))
        tuples.append(tuple(by_node[s] for s in scope_t))
    return scope_t, tuples


def parse_query(net: CredalNetwork, doc) -> Query:
    if not isinstance(doc, Mapping) or "target" not in doc:
        raise InputError("query document needs a 'target'")
    target = doc["target"]
    if "indicator" in target:
        scope_t, tuples = _parse_scoped_states(net, target["indicator"],
                                               "indicator target")
        factor = net.indicator(net.event(scope_t, tuples))
    elif "table" in target:
        scope = [str(s) for s in target.get("scope", [])]
        net.dag.check_subset(scope)
        scope_t = net.dag.sorted_nodes(scope)
        table = target["table"]
        if isinstance(table, Mapping):
            if len(scope_t) != 1:
                raise InputError("mapping-style tables need a single-node scope")
            entries = {(str(k),): parse_number(v) for k, v in table.items()}
        else:
            entries = {}
            for row in table:
                by_node = dict(zip(scope, map(str, row["states"])))
                entries[tuple(by_node[s] for s in scope_t)] = \
                    parse_number(row["value"])
        factor = net.factor(scope_t, entries)
    else:
        raise InputError("target needs 'table' or 'indicator'")

    rule = doc.get("rule", "unconditional")
    if rule not in RULES:
        raise InputError(f"unknown rule {rule!r}")
    method = doc.get("method", "auto")
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}")
    tolerance = parse_number(doc.get("tolerance", 1e-9))

    given_doc = doc.get("given")
    given = None
    if given_doc is not None:
        if "assignment" in given_doc:
            assignment = {str(k): str(v)
                          for k, v in given_doc["assignment"].items()}
            if not assignment:
                raise InputError("empty conditioning assignment")
            given = net.cylinder(assignment)
        else:
            scope_t, tuples = _parse_scoped_states(net, given_doc,
                                                   "conditioning event")
            given = net.event(scope_t, tuples)
            if given.empty:
                raise InputError("conditioning event is empty")
    if rule == "unconditional" and given is not None:
        raise InputError("unconditional queries cannot carry a conditioning "
                         "event")
    if rule != "unconditional" and given is None:
        raise InputError(f"rule {rule!r} needs a conditioning event")
    return Query(factor, given, rule, method, tolerance)


def load_query(net: CredalNetwork, path: str) -> Query:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise InputError(f"cannot parse {path}: {e}") from None
    return parse_query(net, doc)
