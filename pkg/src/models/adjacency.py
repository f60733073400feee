"""
Normalized adjacency matrices for graph convolution
"""
import networkx as nx
import numpy as np

from ..errors import ConfigError, DegenerateGraph
from ..skeleton.graph import SkeletonGraph

PARTITION_COUNTS = (1, 3)


def _self_looped(graph: SkeletonGraph) -> np.ndarray:
    a = np.eye(graph.num_joints)
    for u, v in graph.edges:
        a[u, v] = a[v, u] = 1.0
    return a


def normalize_adjacency(graph: SkeletonGraph, require_connected: bool = True) -> np.ndarray:
    """
    Symmetric normalization D^-1/2 (A + I) D^-1/2, D the degree matrix of A + I
    Args:
        graph: Skeleton graph
        require_connected: Reject graphs with more than one component
    """
    if graph.num_joints < 1:
        raise DegenerateGraph("graph has no joints")
    if require_connected and not nx.is_connected(graph.to_networkx()):
        raise DegenerateGraph(f"graph '{graph.name}' is not connected")
    a = _self_looped(graph)
    inv_sqrt = 1.0 / np.sqrt(a.sum(axis=1))
    return a * inv_sqrt[:, None] * inv_sqrt[None, :]


def partition_adjacency(graph: SkeletonGraph, partitions: int = 1) -> np.ndarray:
    """
    Adjacency split into K partitions, shape K x V x V

    K=1 is the uniform strategy. K=3 is the spatial strategy: for every receiving
    joint w, a neighbour v (or w itself) falls into the root group when it is as far
    from the graph centre as w, the centripetal group when closer and the centrifugal
    group when farther. Each partition uses the same normalization as K=1, so the
    partitions sum to normalize_adjacency(graph).
    """
    if partitions not in PARTITION_COUNTS:
        raise ConfigError(f"spatial_kernel must be one of {PARTITION_COUNTS}, got {partitions}")
    norm = normalize_adjacency(graph)
    if partitions == 1:
        return norm[None]

    hops = nx.single_source_shortest_path_length(graph.to_networkx(), graph.center)
    v_count = graph.num_joints
    parts = np.zeros((3, v_count, v_count))
    for v in range(v_count):
        for w in range(v_count):
            if norm[v, w] == 0.0:
                continue
            if hops[v] == hops[w]:
                parts[0, v, w] = norm[v, w]
            elif hops[v] < hops[w]:
                parts[1, v, w] = norm[v, w]
            else:
                parts[2, v, w] = norm[v, w]
    return parts
