"""
Skeleton graph topology
Joint adjacency, degree centrality and the parent map used for bone vectors
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import networkx as nx

from ..errors import DataError

Edge = Tuple[int, int]

# NTU RGB+D joints, 0-indexed (joint 20 is the spine at the shoulders)
NTU_EDGES: Tuple[Edge, ...] = (
    (0, 1), (1, 20), (2, 20), (3, 2), (4, 20), (5, 4), (6, 5), (7, 6),
    (8, 20), (9, 8), (10, 9), (11, 10), (12, 0), (13, 12), (14, 13), (15, 14),
    (16, 0), (17, 16), (18, 17), (19, 18), (21, 22), (22, 7), (23, 24), (24, 11),
)

# Left/right joint pairs swapped by a mirror flip
NTU_MIRROR_PAIRS: Tuple[Edge, ...] = (
    (4, 8), (5, 9), (6, 10), (7, 11), (12, 16), (13, 17), (14, 18), (15, 19),
    (21, 23), (22, 24),
)

NTU_ROOT = 0
NTU_CENTER = 20


@dataclass(frozen=True)
class SkeletonGraph:
    """Undirected joint graph with degrees and an optional parent map"""

    num_joints: int
    edges: Tuple[Edge, ...]
    parents: Optional[Tuple[Optional[int], ...]] = None
    degrees: Tuple[int, ...] = field(default=())
    mirror_pairs: Tuple[Edge, ...] = ()
    center: int = 0
    name: str = 'custom'

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < self.num_joints and 0 <= v < self.num_joints):
                raise DataError(f"edge ({u}, {v}) out of range for {self.num_joints} joints")
        if not self.degrees:
            object.__setattr__(self, 'degrees', _count_degrees(self.num_joints, self.edges))
        if self.parents is not None:
            if len(self.parents) != self.num_joints:
                raise DataError("parent map length differs from joint count")
            _check_forest(self.parents)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.num_joints))
        g.add_edges_from(self.edges)
        return g

    def describe(self) -> dict:
        """Fields that identify the topology (used in config digests)"""
        return {'name': self.name, 'num_joints': self.num_joints,
                'edges': [list(e) for e in self.edges]}


def _count_degrees(num_joints: int, edges: Sequence[Edge]) -> Tuple[int, ...]:
    g = nx.Graph()
    g.add_nodes_from(range(num_joints))
    # self loops would count twice in networkx; skeleton edges never have them
    g.add_edges_from((u, v) for u, v in edges if u != v)
    return tuple(int(g.degree[v]) for v in range(num_joints))


def _check_forest(parents: Sequence[Optional[int]]):
    for start in range(len(parents)):
        seen = set()
        v = start
        while v is not None:
            if v in seen:
                raise DataError(f"parent map has a cycle through joint {v}")
            seen.add(v)
            v = parents[v]


def parents_from_root(num_joints: int, edges: Sequence[Edge], root: int) -> Tuple[Optional[int], ...]:
    """
    Derive a parent map by breadth-first search from a root joint
    Args:
        num_joints: Number of joints
        edges: Undirected edges
        root: Root joint (gets no parent)
    Returns:
        Tuple of parent indices, None for the root and unreachable joints
    """
    g = nx.Graph()
    g.add_nodes_from(range(num_joints))
    g.add_edges_from(edges)
    parents = [None] * num_joints
    for child, parent in nx.bfs_predecessors(g, root, sort_neighbors=sorted):
        parents[child] = parent
    return tuple(parents)


def build_ntu_graph() -> SkeletonGraph:
    """The 25-joint NTU RGB+D skeleton rooted at the spine base"""
    return SkeletonGraph(
        num_joints=25,
        edges=NTU_EDGES,
        parents=parents_from_root(25, NTU_EDGES, NTU_ROOT),
        mirror_pairs=NTU_MIRROR_PAIRS,
        center=NTU_CENTER,
        name='ntu25',
    )


def build_chain_graph(num_joints: int) -> SkeletonGraph:
    """A path graph 0-1-...-(n-1) rooted at joint 0; handy for small experiments"""
    edges = tuple((i, i + 1) for i in range(num_joints - 1))
    return SkeletonGraph(
        num_joints=num_joints,
        edges=edges,
        parents=parents_from_root(num_joints, edges, 0),
        name=f'chain{num_joints}',
    )
