"""Build the Voronoi-neighbor graph of a formation and extend it by hops.

Every agent talks to the agents whose Voronoi cells touch its own, which is
the edge set of the Delaunay triangulation. Letting messages travel K hops
densifies that graph until it becomes complete.
"""
from resilient_voronoi.geometry import delaunay, vertex_neighbor_ring
from resilient_voronoi.graph import from_triangulation, k_hop_extend
from resilient_voronoi.study import TwoLines, generate_formation

points = generate_formation(TwoLines(11))
print("two staggered rows of agents:")
for i, (x, y) in enumerate(points):
    print(f"  agent {i:2d} at ({x:.0f}, {y:.0f})")

tri = delaunay(points)
print(f"\n{len(tri.triangles)} triangles; agent 4 sees {list(vertex_neighbor_ring(tri, 4).vertices)}")

base = from_triangulation(tri)
for K in range(1, 9):
    g = k_hop_extend(base, K)
    print(f"K={K}: {g.n_edges:2d} edges, min degree {min(g.degree(v) for v in range(g.n))}")
