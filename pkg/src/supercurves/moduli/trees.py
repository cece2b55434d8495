"""
Labelled trees in parent-vector form.

A tree on the vertices ``1..N`` is stored as ``(j_2, ..., j_N)`` with
``1 <= j_i < i``: vertex ``i`` hangs below vertex ``j_i``. Every labelled tree
whose labels increase away from vertex 1 has exactly one such vector, so there
are ``(N - 1)!`` of them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from logging import getLogger
from typing import Dict, FrozenSet, Iterable, Iterator, List, Sequence, Tuple

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

from supercurves.exceptions import TreeError

logger = getLogger(__name__)

MAX_HOMOMORPHISM_VERTICES = 8

TreeMap = Tuple[int, ...]


@dataclass(frozen=True)
class LabelledTree:
    """
    ``parents[i - 2]`` is the parent of vertex ``i``; ``labels[i - 1]`` is the
    vertex carrying marked point ``i``.
    """

    parents: Tuple[int, ...] = ()
    labels: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(int(value) for value in self.parents))
        object.__setattr__(self, "labels", tuple(int(value) for value in self.labels))
        for index, parent in enumerate(self.parents, start=2):
            if not 1 <= parent < index:
                raise TreeError(
                    f"parent of vertex {index} must lie in 1..{index - 1}, got {parent}",
                    f"tree.parents[{index - 2}]",
                )
        for index, vertex in enumerate(self.labels, start=1):
            if not 1 <= vertex <= self.size:
                raise TreeError(
                    f"marked point {index} sits on vertex {vertex}, outside 1..{self.size}",
                    f"tree.labels[{index - 1}]",
                )

    @classmethod
    def decode(cls, parents: Sequence[int], labels: Sequence[int] = ()) -> LabelledTree:
        return cls(tuple(parents), tuple(labels))

    def encode(self) -> List[int]:
        return list(self.parents)

    @classmethod
    def from_edges(
        cls, size: int, edges: Iterable[Tuple[int, int]], labels: Sequence[int] = ()
    ) -> LabelledTree:
        """The tree with these edges; labels must increase away from vertex 1."""
        graph = nx.Graph()
        graph.add_nodes_from(range(1, size + 1))
        graph.add_edges_from(edges)
        if not nx.is_tree(graph):
            raise TreeError(f"the edges do not form a tree on {size} vertices")
        parents = []
        for vertex in range(2, size + 1):
            path = nx.shortest_path(graph, 1, vertex)
            if any(later <= earlier for earlier, later in zip(path, path[1:])):
                raise TreeError(
                    f"labels do not increase along the path 1 -> {vertex}: {path}"
                )
            parents.append(path[-2])
        return cls(tuple(parents), tuple(labels))

    @property
    def size(self) -> int:
        return len(self.parents) + 1

    @property
    def marked_count(self) -> int:
        return len(self.labels)

    @property
    def vertices(self) -> List[int]:
        return list(range(1, self.size + 1))

    @property
    def edges(self) -> List[Tuple[int, int]]:
        """Unoriented edges ``(parent, child)``."""
        return [(parent, child) for child, parent in enumerate(self.parents, start=2)]

    @property
    def oriented_edges(self) -> List[Tuple[int, int]]:
        return sorted(
            [edge for parent, child in self.edges for edge in ((parent, child), (child, parent))]
        )

    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(self.edges)
        return graph

    def adjacent(self, alpha: int, beta: int) -> bool:
        return (alpha, beta) in self.oriented_edges

    def neighbours(self, alpha: int) -> List[int]:
        return sorted(self.graph().neighbors(alpha))

    def marked_on(self, alpha: int) -> List[int]:
        return [index for index, vertex in enumerate(self.labels, start=1) if vertex == alpha]

    def toward(self, alpha: int, target: int) -> int:
        """The neighbour of ``alpha`` on the path to ``target``."""
        if alpha == target:
            raise TreeError(f"vertex {alpha} has no direction toward itself")
        return int(nx.shortest_path(self.graph(), alpha, target)[1])

    def is_connected(self, vertices: Iterable[int]) -> bool:
        chosen = set(vertices)
        if not chosen or not chosen <= set(self.vertices):
            return False
        return bool(nx.is_connected(self.graph().subgraph(chosen)))


def subtree(tree: LabelledTree, alpha: int, beta: int) -> FrozenSet[int]:
    """``T_{alpha beta}``: the vertices on the ``beta`` side once the edge is removed."""
    if not tree.adjacent(alpha, beta):
        raise TreeError(f"vertices {alpha} and {beta} are not adjacent")
    graph = tree.graph()
    graph.remove_edge(alpha, beta)
    return frozenset(nx.node_connected_component(graph, beta))


def enumerate_trees(size: int) -> Iterator[Tuple[int, ...]]:
    """All parent vectors on ``size`` vertices, in lexicographic order."""
    if size < 1:
        raise TreeError(f"trees need at least one vertex, got {size}")
    yield from itertools.product(*(range(1, index) for index in range(2, size + 1)))


def brute_force_trees(size: int) -> List[Tuple[int, ...]]:
    """Parent vectors found by testing every edge subset of the complete graph."""
    pairs = list(itertools.combinations(range(1, size + 1), 2))
    found = []
    for edges in itertools.combinations(pairs, size - 1):
        graph = nx.Graph()
        graph.add_nodes_from(range(1, size + 1))
        graph.add_edges_from(edges)
        if not nx.is_tree(graph):
            continue
        try:
            found.append(tuple(LabelledTree.from_edges(size, edges).parents))
        except TreeError:
            continue
    return sorted(found)


def _label_compatible(
    source: LabelledTree, target: LabelledTree, mapping: Dict[int, int]
) -> bool:
    return all(
        mapping[vertex] == image for vertex, image in zip(source.labels, target.labels)
    )


def tree_homomorphisms(source: LabelledTree, target: LabelledTree) -> List[TreeMap]:
    """
    Surjective label-preserving tree homomorphisms ``f: source -> target``.

    Fibers are subtrees, so every candidate contracts a set of edges and maps the
    quotient tree isomorphically onto ``target``. ``f`` is returned as
    ``(f(1), ..., f(N))``, sorted lexicographically.
    """
    if source.marked_count != target.marked_count:
        return []
    if source.size > MAX_HOMOMORPHISM_VERTICES:
        raise TreeError(
            f"trees with more than {MAX_HOMOMORPHISM_VERTICES} vertices are too large "
            f"to enumerate homomorphisms, got {source.size}"
        )
    if target.size > source.size:
        return []
    found = set()
    target_graph = target.graph()
    collapse_count = source.size - target.size
    for collapsed in itertools.combinations(source.edges, collapse_count):
        contraction = nx.Graph()
        contraction.add_nodes_from(source.vertices)
        contraction.add_edges_from(collapsed)
        fibers = {
            vertex: min(component)
            for component in nx.connected_components(contraction)
            for vertex in component
        }
        quotient = nx.Graph()
        quotient.add_nodes_from(set(fibers.values()))
        quotient.add_edges_from(
            (fibers[parent], fibers[child])
            for parent, child in source.edges
            if fibers[parent] != fibers[child]
        )
        for isomorphism in GraphMatcher(quotient, target_graph).isomorphisms_iter():
            mapping = {vertex: isomorphism[fibers[vertex]] for vertex in source.vertices}
            if _label_compatible(source, target, mapping):
                found.add(tuple(mapping[vertex] for vertex in source.vertices))
    logger.debug(f"{len(found)} tree homomorphisms from {source.parents} to {target.parents}")
    return sorted(found)


def tree_isomorphisms(source: LabelledTree, target: LabelledTree) -> List[TreeMap]:
    if source.size != target.size:
        return []
    return tree_homomorphisms(source, target)
