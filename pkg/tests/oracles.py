"""Independent reference implementations used only by the tests."""
import itertools

import networkx as nx
import numpy as np


def naive_rs_robust(n, edges, r, s):
    """Definition-level (r, s) check over ordered subset pairs with itertools."""
    nbrs = {v: set() for v in range(n)}
    for u, v in edges:
        nbrs[u].add(v)
        nbrs[v].add(u)

    def x(sub):
        return [v for v in sub if len(nbrs[v] - sub) >= r]

    for labels in itertools.product((0, 1, 2), repeat=n):
        s1 = {v for v in range(n) if labels[v] == 1}
        s2 = {v for v in range(n) if labels[v] == 2}
        if not s1 or not s2:
            continue
        x1, x2 = x(s1), x(s2)
        if len(x1) < len(s1) and len(x2) < len(s2) and len(x1) + len(x2) < s:
            return False
    return True


def hop_graph_edges(n, edges, K):
    """Pairs within K hops, from networkx shortest paths."""
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    dist = dict(nx.all_pairs_shortest_path_length(g, cutoff=K))
    return {(u, v) for u in range(n) for v in dist[u] if u < v}


def random_graph(rng, n, p):
    return {(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p}


def plain_consensus_step(values, adjacency):
    """Equal-weight linear consensus with neighbor sums accumulated in id order."""
    out = np.empty_like(values)
    for i in range(len(values)):
        acc = values[i].copy()
        for j in sorted(adjacency[i]):
            acc += values[j]
        out[i] = acc / (len(adjacency[i]) + 1)
    return out
