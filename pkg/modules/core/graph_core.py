"""
Graph representation, classification and the structural decompositions consumed by
the strategies: rooted trees, and a cycle with its attached trees.
"""
import logging
from collections import deque
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, model_validator

from modules.schemas.errors import (
    ComponentHasCycle,
    GraphFormatError,
    MultipleCycles,
    NotUnicyclic,
)

logger = logging.getLogger(__name__)


class Graph(BaseModel):
    """
    Labeled simple undirected graph on vertices 0..n-1.
    """
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=0, description="Vertex count.")
    adjacency: Tuple[Tuple[int, ...], ...] = Field(description="Sorted neighbor list per vertex.")
    name: str = Field(default="-", description="Identifier used in reports and transcripts.")

    @model_validator(mode="after")
    def _check_simple_undirected(self) -> "Graph":
        if len(self.adjacency) != self.n:
            raise ValueError("adjacency must list every vertex")
        for v, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"neighbors of {v} must be sorted and distinct")
            for u in nbrs:
                if u == v:
                    raise ValueError(f"self-loop at {v}")
                if not 0 <= u < self.n or v not in self.adjacency[u]:
                    raise ValueError(f"edge {v}-{u} is not symmetric")
        return self

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]], name: str = "-") -> "Graph":
        nbrs: List[set] = [set() for _ in range(n)]
        for u, v in edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n=n, adjacency=tuple(tuple(sorted(s)) for s in nbrs), name=name)

    @classmethod
    def from_networkx(cls, nx_graph: nx.Graph, name: str = "-") -> "Graph":
        mapping = {node: i for i, node in enumerate(sorted(nx_graph.nodes()))}
        edges = [(mapping[u], mapping[v]) for u, v in nx_graph.edges()]
        return cls.from_edges(len(mapping), edges, name=name)

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self.adjacency[v]

    def closed_neighborhood(self, v: int) -> Tuple[int, ...]:
        return tuple(sorted((v,) + self.adjacency[v]))

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency) // 2

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g

    @cached_property
    def distances(self) -> Dict[int, Dict[int, int]]:
        return dict(nx.all_pairs_shortest_path_length(self.to_networkx()))

    def relabeled(self, name: str) -> "Graph":
        return Graph(n=self.n, adjacency=self.adjacency, name=name)


class GraphClass(str, Enum):
    TREE = "Tree"
    FOREST = "Forest"
    CYCLE = "Cycle"
    UNICYCLIC = "Unicyclic"
    UNICYCLIC_FOREST = "UnicyclicForest"
    OTHER = "Other"


class RootedTree(BaseModel):
    """
    A tree component rooted at `root`. `parent` is undefined (absent) at the root.
    """
    model_config = ConfigDict(frozen=True)

    root: int
    parent: Dict[int, int] = Field(description="v -> v+ for every non-root vertex.")
    children: Dict[int, Tuple[int, ...]] = Field(description="v -> C(v), sorted by label.")
    postorder: Tuple[int, ...] = Field(description="Every child before its parent; leaves first.")

    @property
    def vertices(self) -> Tuple[int, ...]:
        return self.postorder

    def descendants(self, v: int) -> List[int]:
        out, stack = [], [v]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self.children[u])
        return out

    def depth(self, v: int) -> int:
        d = 0
        while v != self.root:
            v = self.parent[v]
            d += 1
        return d

    def path_from_root(self, v: int) -> List[int]:
        path = [v]
        while v != self.root:
            v = self.parent[v]
            path.append(v)
        return path[::-1]


class AttachedTree(BaseModel):
    model_config = ConfigDict(frozen=True)

    tree: RootedTree
    mate: Optional[int] = Field(default=None, description="Cycle neighbor z* of the root; None for components off the cycle.")


class UnicyclicDecomposition(BaseModel):
    """
    The cycle (in canonical cyclic order) and the rooted trees of G - V(C).
    """
    model_config = ConfigDict(frozen=True)

    cycle: Tuple[int, ...]
    attached_trees: Tuple[AttachedTree, ...]
    t: int = Field(description="Number of vertices not on the cycle.")

    @property
    def length(self) -> int:
        return len(self.cycle)

    def cycle_component_trees(self) -> List[AttachedTree]:
        return [a for a in self.attached_trees if a.mate is not None]

    def detached_trees(self) -> List[AttachedTree]:
        return [a for a in self.attached_trees if a.mate is None]


def parse_graph(text: str, name: str = "-") -> Graph:
    """
    Parses the graph file format: first non-comment line n, then one "u v" edge per line.
    Lines starting with '#' are comments.
    """
    rows = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append((number, line))
    if not rows:
        raise GraphFormatError("missing vertex count")
    number, first = rows[0]
    try:
        n = int(first)
    except ValueError:
        raise GraphFormatError(f"vertex count expected, got {first!r}", number)
    if n < 0:
        raise GraphFormatError("vertex count must be nonnegative", number)

    seen = set()
    edges = []
    for number, line in rows[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'u v', got {line!r}", number)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer vertex in {line!r}", number)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex index out of range in {line!r}", number)
        if u == v:
            raise GraphFormatError(f"self-loop at {u}", number)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {u}-{v}", number)
        seen.add(key)
        edges.append(key)
    return Graph.from_edges(n, edges, name=name)


def load_graph(path: str) -> Graph:
    with open(path, "r") as f:
        return parse_graph(f.read(), name=path)


def graph_to_text(g: Graph) -> str:
    return "\n".join([str(g.n)] + [f"{u} {v}" for u, v in g.edges()]) + "\n"


def _components(g: Graph) -> List[List[int]]:
    return [sorted(c) for c in sorted(nx.connected_components(g.to_networkx()), key=min)]


def cyclomatic_number(g: Graph) -> int:
    return g.num_edges() - g.n + len(_components(g))


def classify(g: Graph) -> GraphClass:
    if g.n == 0:
        return GraphClass.OTHER
    components = len(_components(g))
    cycles = g.num_edges() - g.n + components
    connected = components == 1
    if cycles == 0:
        return GraphClass.TREE if connected else GraphClass.FOREST
    if cycles == 1:
        if connected and all(len(nbrs) == 2 for nbrs in g.adjacency):
            return GraphClass.CYCLE
        return GraphClass.UNICYCLIC if connected else GraphClass.UNICYCLIC_FOREST
    return GraphClass.OTHER


def find_cycle(g: Graph) -> Optional[Tuple[int, ...]]:
    """
    The unique cycle in canonical order: start at its smallest label, step toward the
    smaller-labeled cycle neighbor. None for acyclic graphs.
    """
    cycles = cyclomatic_number(g)
    if cycles == 0:
        return None
    if cycles > 1:
        raise MultipleCycles(f"graph has {cycles} independent cycles")

    # strip leaves until only the cycle (and isolated leftovers) remain
    degree = [len(nbrs) for nbrs in g.adjacency]
    removed = [False] * g.n
    queue = deque(v for v in range(g.n) if degree[v] <= 1)
    while queue:
        v = queue.popleft()
        if removed[v]:
            continue
        removed[v] = True
        for u in g.adjacency[v]:
            if not removed[u]:
                degree[u] -= 1
                if degree[u] <= 1:
                    queue.append(u)
    on_cycle = {v for v in range(g.n) if not removed[v]}

    start = min(on_cycle)
    cycle = [start]
    prev, current = start, min(u for u in g.adjacency[start] if u in on_cycle)
    while current != start:
        cycle.append(current)
        nxt = [u for u in g.adjacency[current] if u in on_cycle and u != prev]
        prev, current = current, nxt[0]
    return tuple(cycle)


def root_tree(g: Graph, z: int, exclude: FrozenSet[int] = frozenset()) -> RootedTree:
    """
    Roots the tree containing z. Vertices in `exclude` are treated as deleted, which
    lets callers root the components of G - V(C).
    """
    parent: Dict[int, int] = {}
    children: Dict[int, List[int]] = {z: []}
    order = [z]
    edge_count = 0
    queue = deque([z])
    while queue:
        v = queue.popleft()
        for u in g.adjacency[v]:
            if u in exclude:
                continue
            edge_count += 1
            if u == parent.get(v):
                continue
            if u in children:
                raise ComponentHasCycle(f"component of {z} contains a cycle")
            parent[u] = v
            children[u] = []
            children[v].append(u)
            order.append(u)
            queue.append(u)
    if edge_count // 2 != len(order) - 1:
        raise ComponentHasCycle(f"component of {z} contains a cycle")

    postorder: List[int] = []
    stack = [(z, False)]
    while stack:
        v, expanded = stack.pop()
        if expanded:
            postorder.append(v)
            continue
        stack.append((v, True))
        for u in sorted(children[v], reverse=True):
            stack.append((u, False))
    return RootedTree(
        root=z,
        parent=parent,
        children={v: tuple(sorted(c)) for v, c in children.items()},
        postorder=tuple(postorder),
    )


def decompose_unicyclic(g: Graph) -> UnicyclicDecomposition:
    if classify(g) not in (GraphClass.CYCLE, GraphClass.UNICYCLIC, GraphClass.UNICYCLIC_FOREST):
        raise NotUnicyclic(f"graph {g.name} is {classify(g).value}")
    cycle = find_cycle(g)
    on_cycle = frozenset(cycle)
    rest = g.to_networkx().subgraph(v for v in range(g.n) if v not in on_cycle)

    attached = []
    for component in sorted(nx.connected_components(rest), key=min):
        touching = sorted(v for v in component if any(u in on_cycle for u in g.adjacency[v]))
        if touching:
            z = touching[0]
            mate = next(u for u in g.adjacency[z] if u in on_cycle)
        else:
            z, mate = min(component), None
        attached.append(AttachedTree(tree=root_tree(g, z, exclude=on_cycle), mate=mate))

    attached.sort(key=lambda a: a.tree.root)
    logger.debug(f"Decomposed {g.name}: cycle={cycle}, {len(attached)} trees")
    return UnicyclicDecomposition(cycle=cycle, attached_trees=tuple(attached), t=g.n - len(cycle))


def components(g: Graph) -> List[List[int]]:
    return _components(g)


def forest_roots(g: Graph) -> List[int]:
    """Smallest label of every component, in component order."""
    return [c[0] for c in _components(g)]


def cycle_positions(cycle: Sequence[int]) -> Dict[int, int]:
    return {v: i for i, v in enumerate(cycle)}
