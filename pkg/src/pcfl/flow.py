import logging
from fractions import Fraction
from typing import Any, Dict, Hashable, Iterable, Mapping, Tuple, Union

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from .types.flow import Disentangling, InvalidAssignment, ProbAssignment, Subset, nonempty_subsets

_logger = logging.getLogger(__name__)

SOURCE = "source"
SINK = "sink"

FlowDict = Dict[Hashable, Dict[Hashable, Fraction]]


def max_flow(graph: nx.DiGraph, source: Hashable = SOURCE, sink: Hashable = SINK) -> Tuple[Fraction, FlowDict]:
    """
    Maximum s-t flow with exact arithmetic.

    Edges carry their bound in the `capacity` attribute, edges without one are uncapacitated.

    :return: The flow value and the flow on every edge.
    """
    if source not in graph or sink not in graph:
        return Fraction(0), {}

    value, flow = nx.maximum_flow(graph, source, sink, flow_func=edmonds_karp)

    return Fraction(value), {u: {v: Fraction(f) for v, f in out.items()} for u, out in flow.items()}


def _network(assignment: ProbAssignment) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_node(SOURCE)
    graph.add_node(SINK)

    universe = range(1, assignment.n + 1)
    for subset in nonempty_subsets(assignment.n):
        if len(subset) == 1:
            (i,) = subset
            graph.add_edge(SOURCE, subset, capacity=assignment.p_of(i))
        for i in universe:
            if i not in subset:
                graph.add_edge(subset, subset | {i})
        graph.add_edge(subset, SINK, capacity=assignment.r_of(subset))

    return graph


def _decompose(flow: FlowDict) -> Dict[Tuple[int, Subset], Fraction]:
    """Splits a flow on the subset lattice into source-to-sink paths, keyed by (entry point, exit set)."""
    residual = {u: {v: f for v, f in out.items() if f > 0} for u, out in flow.items()}
    routed: Dict[Tuple[int, Subset], Fraction] = {}

    while residual.get(SOURCE):
        path = [SOURCE]
        node = SOURCE
        while node != SINK:
            node = next(iter(residual[node]))
            path.append(node)

        amount = min(residual[u][v] for u, v in zip(path, path[1:]))
        for u, v in zip(path, path[1:]):
            residual[u][v] -= amount
            if not residual[u][v]:
                del residual[u][v]

        (k,) = path[1]
        key = (k, path[-2])
        routed[key] = routed.get(key, Fraction(0)) + amount

    return routed


def disentangle(assignment: ProbAssignment) -> Union[Disentangling, InvalidAssignment]:
    """
    Splits every r_I into shares s_{k,I}, k ∈ I, such that the shares of a set sum to at most 1
    and every p_k is covered by Σ_{I∋k} s_{k,I}·r_I.

    :return: The shares, or the set whose demand exceeds the supply of the sets meeting it.
    """
    graph = _network(assignment)
    demand = sum(assignment.p, Fraction(0))
    value, flow = max_flow(graph)

    if value < demand:
        _, (source_side, _) = nx.minimum_cut(graph, SOURCE, SINK, flow_func=edmonds_karp)
        cut = frozenset(i for node in source_side if isinstance(node, frozenset) and len(node) == 1 for i in node)
        _logger.debug("disentangle: flow %s < %s, cut %s", value, demand, sorted(cut))
        return InvalidAssignment(cut)

    shares = {}
    for (k, subset), amount in _decompose(flow).items():
        supply = assignment.r_of(subset)
        if supply:
            shares[(k, subset)] = amount / supply

    return Disentangling(shares)


def check_disentangling(assignment: ProbAssignment, result: Disentangling) -> bool:
    """Both share constraints, checked exactly."""
    subsets = nonempty_subsets(assignment.n)
    for subset in subsets:
        if sum((result.s_of(k, subset) for k in subset), Fraction(0)) > 1:
            return False

    for k in range(1, assignment.n + 1):
        covered = sum((result.s_of(k, i) * assignment.r_of(i) for i in subsets if k in i), Fraction(0))
        if assignment.p_of(k) > covered:
            return False

    return True


def lift_check(
    left: Mapping[Hashable, Fraction],
    right: Mapping[Hashable, Fraction],
    relation: Iterable[Tuple[Hashable, Hashable]],
) -> bool:
    """
    Whether `left`(X) ≤ `right`(R(X)) for every X ⊆ supp(`left`), decided by a single max-flow.
    """
    graph = nx.DiGraph()
    graph.add_node(SOURCE)
    graph.add_node(SINK)

    demand = Fraction(0)
    for a, p in left.items():
        if p > 0:
            graph.add_edge(SOURCE, ("L", a), capacity=p)
            demand += p
    for b, q in right.items():
        if q > 0:
            graph.add_edge(("R", b), SINK, capacity=q)

    for a, b in relation:
        if ("L", a) in graph and ("R", b) in graph:
            graph.add_edge(("L", a), ("R", b))

    if not demand:
        return True

    value, _ = max_flow(graph)

    return value == demand


def disentangle_json(obj: Dict[str, Any]) -> Dict[str, Any]:
    return disentangle(ProbAssignment.from_json(obj)).to_json()


#####################
#      Exports      #
#####################

__all__ = [
    "check_disentangling",
    "disentangle",
    "disentangle_json",
    "lift_check",
    "max_flow",
]
