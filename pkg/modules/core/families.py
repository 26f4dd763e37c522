"""
Instance families for sweeps: non-isomorphic trees, cycles and unicyclic graphs.
"""
import logging
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Tuple

import networkx as nx

from modules.core.graph_core import Graph, GraphClass, classify, find_cycle

logger = logging.getLogger(__name__)


def parse_range(text: str) -> List[int]:
    """'4' -> [4], '3-6' -> [3, 4, 5, 6], '1,3' -> [1, 3]."""
    values: List[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            low, high = part.split("-", 1)
            values.extend(range(int(low), int(high) + 1))
        elif part:
            values.append(int(part))
    return values


def trees(n: int) -> Iterator[Graph]:
    """Every tree on exactly n vertices, one per isomorphism class."""
    if n == 1:
        yield Graph.from_edges(1, [], name="tree1_0")
        return
    for i, tree in enumerate(nx.nonisomorphic_trees(n)):
        yield Graph.from_networkx(tree, name=f"tree{n}_{i}")


def trees_up_to(n_max: int, n_min: int = 1) -> Iterator[Graph]:
    for n in range(n_min, n_max + 1):
        yield from trees(n)


def cycle(length: int) -> Graph:
    return Graph.from_edges(length, [(i, (i + 1) % length) for i in range(length)], name=f"c{length}")


def path(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], name=f"p{n}")


def star(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)], name=f"star{leaves}")


def disjoint_union(first: Graph, second: Graph, name: Optional[str] = None) -> Graph:
    shift = first.n
    edges = first.edges() + [(u + shift, v + shift) for u, v in second.edges()]
    return Graph.from_edges(first.n + second.n, edges, name=name or f"{first.name}+{second.name}")


def with_pendants(base: Graph, anchors: List[int], name: Optional[str] = None) -> Graph:
    """Adds one new leaf on each anchor vertex."""
    edges = base.edges() + [(a, base.n + i) for i, a in enumerate(anchors)]
    return Graph.from_edges(base.n + len(anchors), edges, name=name or f"{base.name}_pend{len(anchors)}")


def _labeled_forests(t: int, offset: int) -> Iterator[List[Tuple[int, int]]]:
    vertices = list(range(offset, offset + t))
    candidates = list(combinations(vertices, 2))
    for size in range(0, max(t, 1)):
        for chosen in combinations(candidates, size):
            forest = nx.Graph()
            forest.add_nodes_from(vertices)
            forest.add_edges_from(chosen)
            if nx.is_forest(forest):
                yield list(chosen)


def _attachments(components: List[List[int]], length: int) -> Iterator[List[Tuple[int, int]]]:
    if not components:
        yield []
        return
    first, rest = components[0], components[1:]
    options: List[Optional[Tuple[int, int]]] = [None]
    options += [(v, c) for v in first for c in range(length)]
    for option in options:
        for tail in _attachments(rest, length):
            yield ([option] if option else []) + tail


def unicyclic(length: int, t: int, connected: Optional[bool] = None) -> Iterator[Graph]:
    """
    Every graph with one cycle of the given length plus t further vertices forming a
    forest, one per isomorphism class. `connected` filters by connectivity.
    """
    base = [(i, (i + 1) % length) for i in range(length)]
    seen: Dict[str, List[nx.Graph]] = {}
    index = 0
    for forest_edges in _labeled_forests(t, length):
        forest = nx.Graph()
        forest.add_nodes_from(range(length, length + t))
        forest.add_edges_from(forest_edges)
        components = [sorted(c) for c in sorted(nx.connected_components(forest), key=min)]
        for attach in _attachments(components, length):
            nx_graph = nx.Graph()
            nx_graph.add_nodes_from(range(length + t))
            nx_graph.add_edges_from(base + forest_edges + attach)
            if connected is not None and nx.is_connected(nx_graph) != connected:
                continue
            key = nx.weisfeiler_lehman_graph_hash(nx_graph)
            bucket = seen.setdefault(key, [])
            if any(nx.is_isomorphic(nx_graph, other) for other in bucket):
                continue
            bucket.append(nx_graph)
            g = Graph.from_networkx(nx_graph, name=f"uni{length}_{t}_{index}")
            index += 1
            if classify(g) in (GraphClass.CYCLE, GraphClass.UNICYCLIC, GraphClass.UNICYCLIC_FOREST) \
                    and len(find_cycle(g)) == length:
                yield g


def family(text: str) -> List[Graph]:
    """
    Expands a family string:
      trees:<n-range>          every tree with a vertex count in range
      cycles:<l-range>
      unicyclic:<l-range>:<t-range>
    """
    kind, _, rest = text.partition(":")
    if kind == "trees":
        return [g for n in parse_range(rest) for g in trees(n)]
    if kind == "cycles":
        return [cycle(length) for length in parse_range(rest)]
    if kind == "unicyclic":
        lengths, _, ts = rest.partition(":")
        return [g for length in parse_range(lengths) for t in parse_range(ts or "0") for g in unicyclic(length, t)]
    raise ValueError(f"unknown family {text!r}")
