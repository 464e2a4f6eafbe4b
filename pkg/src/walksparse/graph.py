"""Graph data model, derived matrices, bipartite lift, expander decomposition.

A Graph stores a vertex count, a canonical weighted edge list (undirected
edges with u < v, sorted, duplicates merged by weight sum) and a directed
flag.  Matrices are built on demand as dense arrays; everything is desk
scale.  The expander decomposition is a deterministic recursive sweep cut:
pieces with second normalized-Laplacian eigenvalue above the target are
emitted, otherwise the best Cheeger sweep cut splits the piece and the two
sides and the cut edges are decomposed recursively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidInput


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple
    directed: bool = False

    def __post_init__(self):
        if self.n < 0:
            raise InvalidInput("negative vertex count")
        canon = {}
        for item in self.edges:
            if len(item) == 2:
                u, v = item
                w = 1.0
            else:
                u, v, w = item
            u, v, w = int(u), int(v), float(w)
            if u == v:
                raise InvalidInput(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidInput(f"edge ({u},{v}) out of range for n={self.n}")
            if not np.isfinite(w) or w <= 0:
                raise InvalidInput(f"edge ({u},{v}) has non-positive weight {w}")
            if not self.directed and u > v:
                u, v = v, u
            canon[(u, v)] = canon.get((u, v), 0.0) + w
        ordered = tuple((u, v, canon[(u, v)]) for (u, v) in sorted(canon))
        object.__setattr__(self, "edges", ordered)

    @property
    def m(self):
        return len(self.edges)

    def edge_arrays(self):
        if not self.edges:
            return np.zeros(0, dtype=int), np.zeros(0, dtype=int), np.zeros(0)
        u, v, w = zip(*self.edges)
        return np.asarray(u, dtype=int), np.asarray(v, dtype=int), np.asarray(w)

    def weights(self):
        return self.edge_arrays()[2]

    def reweighted(self, s):
        """Subgraph with edge e reweighted to s[e] * w[e]; zero drops the edge."""
        s = np.asarray(s, dtype=float)
        if s.shape != (self.m,):
            raise InvalidInput("reweighting length mismatch")
        if np.any(s < -1e-12):
            raise InvalidInput("negative reweighting")
        kept = [
            (u, v, w * si) for (u, v, w), si in zip(self.edges, s) if si > 0.0
        ]
        return Graph(self.n, tuple(kept), self.directed)

    # -- matrices ----------------------------------------------------------

    def adjacency(self):
        a = np.zeros((self.n, self.n))
        for u, v, w in self.edges:
            if self.directed:
                a[u, v] += w
            else:
                a[u, v] += w
                a[v, u] += w
        return a

    def weighted_degrees(self):
        if self.directed:
            raise InvalidInput("directed graphs have in/out degrees")
        d = np.zeros(self.n)
        for u, v, w in self.edges:
            d[u] += w
            d[v] += w
        return d

    def out_degrees(self):
        d = np.zeros(self.n)
        for u, v, w in self.edges:
            d[u] += w
            if not self.directed:
                d[v] += w
        return d

    def in_degrees(self):
        d = np.zeros(self.n)
        for u, v, w in self.edges:
            d[v] += w
            if not self.directed:
                d[u] += w
        return d

    def degree_matrix(self):
        return np.diag(self.weighted_degrees())

    def laplacian(self):
        return np.diag(self.weighted_degrees()) - self.adjacency()

    def unsigned_laplacian(self):
        return np.diag(self.weighted_degrees()) + self.adjacency()

    def normalized_laplacian(self):
        d = self.weighted_degrees()
        with np.errstate(divide="ignore"):
            dis = np.where(d > 0, 1.0 / np.sqrt(np.where(d > 0, d, 1.0)), 0.0)
        lap = self.laplacian()
        return linalg.sym(dis[:, None] * lap * dis[None, :])

    def incidence_signed(self):
        """Columns b_e = 1_u - 1_v (tail minus head for directed edges)."""
        b = np.zeros((self.n, self.m))
        for j, (u, v, _) in enumerate(self.edges):
            b[u, j] = 1.0
            b[v, j] = -1.0
        return b

    def incidence_unsigned(self):
        b = np.zeros((self.n, self.m))
        for j, (u, v, _) in enumerate(self.edges):
            b[u, j] = 1.0
            b[v, j] = 1.0
        return b

    # -- structure ---------------------------------------------------------

    def neighbors(self):
        adj = [[] for _ in range(self.n)]
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return [sorted(set(a)) for a in adj]

    def connected_components(self):
        """Vertex components of the underlying undirected graph, each sorted."""
        adj = self.neighbors()
        seen = [False] * self.n
        comps = []
        for root in range(self.n):
            if seen[root]:
                continue
            stack = [root]
            seen[root] = True
            comp = []
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in adj[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def non_isolated(self):
        used = set()
        for u, v, _ in self.edges:
            used.add(u)
            used.add(v)
        return sorted(used)

    def is_connected(self):
        return len(self.connected_components()) <= 1

    def bipartition(self):
        """(X, Y) two-coloring of the underlying undirected graph, or None.

        Per component the smallest vertex is assigned to X; isolated
        vertices land in X.  Returns None if any odd cycle exists.
        """
        adj = self.neighbors()
        color = [-1] * self.n
        for root in range(self.n):
            if color[root] != -1:
                continue
            color[root] = 0
            stack = [root]
            while stack:
                v = stack.pop()
                for w in adj[v]:
                    if color[w] == -1:
                        color[w] = 1 - color[v]
                        stack.append(w)
                    elif color[w] == color[v]:
                        return None
        x = [v for v in range(self.n) if color[v] == 0]
        y = [v for v in range(self.n) if color[v] == 1]
        return x, y

    def induced_on(self, vertices):
        """(subgraph on the listed vertices with relabeled ids, id list)."""
        vertices = sorted(vertices)
        index = {v: i for i, v in enumerate(vertices)}
        kept = [
            (index[u], index[v], w)
            for u, v, w in self.edges
            if u in index and v in index
        ]
        return Graph(len(vertices), tuple(kept), self.directed), vertices


def graph_matrices(g):
    """adjacency / degree / Laplacian / unsigned / normalized, undirected only."""
    if g.directed:
        raise InvalidInput("graph matrices are defined for undirected graphs")
    return {
        "adjacency": g.adjacency(),
        "degree": g.degree_matrix(),
        "laplacian": g.laplacian(),
        "unsigned_laplacian": g.unsigned_laplacian(),
        "normalized_laplacian": g.normalized_laplacian(),
    }


def bipartite_lift(g):
    """Undirected bipartite double cover of a directed graph.

    Arc (u, v, w) becomes the edge (u, n + v, w): part X holds out-copies
    0..n-1 and part Y holds in-copies n..2n-1.  `lift_edge_to_arc` inverts
    the map for round-tripping reweightings.
    """
    if not g.directed:
        raise InvalidInput("bipartite lift expects a directed graph")
    edges = tuple((u, g.n + v, w) for u, v, w in g.edges)
    return Graph(2 * g.n, edges, directed=False)


def lift_edge_to_arc(edge, n):
    u, v = edge[0], edge[1]
    if u >= n:
        u, v = v, u
    if not (u < n <= v):
        raise InvalidInput(f"edge {edge} is not a lift edge for n={n}")
    return u, v - n


def sv_error_matrices(g):
    """Error matrices (E, F) for singular-value approximation checks.

    Directed:  E = D_out - A D_in^+ A^T,  F = D_in - A^T D_out^+ A.
    Undirected: E = F = D - A D^+ A.
    Both are positive semidefinite; isolated vertices are handled through
    the diagonal pseudoinverses.
    """
    a = g.adjacency()
    if g.directed:
        dout = g.out_degrees()
        din = g.in_degrees()
        dout_p = np.where(dout > 0, 1.0 / np.where(dout > 0, dout, 1.0), 0.0)
        din_p = np.where(din > 0, 1.0 / np.where(din > 0, din, 1.0), 0.0)
        e = np.diag(dout) - a @ np.diag(din_p) @ a.T
        f = np.diag(din) - a.T @ np.diag(dout_p) @ a
        return linalg.sym(e), linalg.sym(f)
    d = g.weighted_degrees()
    d_p = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0), 0.0)
    e = np.diag(d) - a @ np.diag(d_p) @ a
    e = linalg.sym(e)
    return e, e.copy()


def lambda2(g):
    """Second smallest eigenvalue of the normalized Laplacian on the
    non-isolated vertices (0 for graphs with fewer than two of them)."""
    verts = g.non_isolated()
    if len(verts) < 2:
        return 0.0
    sub, _ = g.induced_on(verts)
    w = linalg.eigvalsh(sub.normalized_laplacian())
    return float(w[1])


def default_phi_target(n):
    """1 / (4 log2(n)^2), the decomposition's default expansion target."""
    return 1.0 / (4.0 * max(1.0, np.log2(max(n, 2))) ** 2)


def _conductance(order_prefix, volumes, cut_weight, total_volume):
    vol_s = volumes
    vol_t = total_volume - volumes
    denom = min(vol_s, vol_t)
    if denom <= 0:
        return np.inf
    return cut_weight / denom


def _best_sweep_cut(gsub):
    """Best-conductance prefix cut along the Fiedler embedding.

    Returns the vertex set S (local ids).  gsub is connected with >= 2
    vertices and every vertex non-isolated.
    """
    lap = gsub.normalized_laplacian()
    _, vecs = linalg.eigh(lap)
    d = gsub.weighted_degrees()
    embed = vecs[:, 1] / np.sqrt(d)
    order = sorted(range(gsub.n), key=lambda v: (embed[v], v))
    rank = np.empty(gsub.n, dtype=int)
    for pos, v in enumerate(order):
        rank[v] = pos

    total = float(np.sum(d))
    vol = 0.0
    cut = 0.0
    # incremental sweep: moving vertex `order[k]` across the cut toggles
    # its incident edges
    incident = [[] for _ in range(gsub.n)]
    for u, v, w in gsub.edges:
        incident[u].append((v, w))
        incident[v].append((u, w))
    best = (np.inf, None)
    for k in range(gsub.n - 1):
        v = order[k]
        vol += d[v]
        for u, w in incident[v]:
            if rank[u] <= k:
                cut -= w
            else:
                cut += w
        phi = _conductance(None, vol, cut, total)
        if phi < best[0] - 1e-15:
            best = (phi, k)
    k = best[1]
    return set(order[: k + 1])


def expander_decompose(g, phi_target=None, c_mult=4.0, strict_multiplicity=True):
    """Partition the edges into expander pieces.

    Every returned piece, restricted to its non-isolated vertices, has
    lambda_2 of the normalized Laplacian >= phi_target; the edge sets
    partition E(G) exactly; single-edge pieces are emitted as-is.  The
    per-vertex piece multiplicity is checked against c_mult*log2(n)+1.
    """
    if g.directed:
        raise InvalidInput("expander decomposition expects an undirected graph")
    if any(w != 1.0 for _, _, w in g.edges):
        raise InvalidInput("expander decomposition expects an unweighted graph")
    if phi_target is None:
        phi_target = default_phi_target(g.n)
    if not (0.0 < phi_target <= 2.0):
        raise InvalidInput(f"phi_target {phi_target} is not achievable")
    if g.m == 0:
        return []

    pieces = []

    def decompose_edges(edges):
        if not edges:
            return
        sub = Graph(g.n, tuple(edges), directed=False)
        comps = sub.connected_components()
        nontrivial = [c for c in comps if len(c) > 1]
        for comp in nontrivial:
            comp_set = set(comp)
            comp_edges = [e for e in edges if e[0] in comp_set]
            decompose_connected(comp_edges)

    def decompose_connected(edges):
        if len(edges) <= 1:
            pieces.append(edges)
            return
        sub = Graph(g.n, tuple(edges), directed=False)
        gsub, ids = sub.induced_on(sub.non_isolated())
        lam = float(linalg.eigvalsh(gsub.normalized_laplacian())[1])
        if lam >= phi_target - 1e-12:
            pieces.append(edges)
            return
        local_s = _best_sweep_cut(gsub)
        s = {ids[v] for v in local_s}
        e_s = [e for e in edges if e[0] in s and e[1] in s]
        e_t = [e for e in edges if e[0] not in s and e[1] not in s]
        e_cut = [e for e in edges if (e[0] in s) != (e[1] in s)]
        if not e_s and not e_t:
            # the sweep cut across a bipartition-like split leaves no
            # internal edges; single edges are expanders on their endpoints
            for e in e_cut:
                pieces.append([e])
            return
        decompose_edges(e_s)
        decompose_edges(e_t)
        decompose_edges(e_cut)

    decompose_edges(list(g.edges))
    out = [Graph(g.n, tuple(p), directed=False) for p in pieces]

    total_edges = sum(p.m for p in out)
    if total_edges != g.m:
        raise InvalidInput("internal error: decomposition does not partition the edges")
    if strict_multiplicity:
        mult = np.zeros(g.n, dtype=int)
        for p in out:
            for v in p.non_isolated():
                mult[v] += 1
        bound = c_mult * np.log2(max(g.n, 2)) + 1
        worst = int(mult.max()) if g.n else 0
        if worst > bound:
            raise InvalidInput(
                f"vertex multiplicity {worst} exceeds {bound:.1f}; "
                "lower phi_target or disable strict_multiplicity"
            )
    return out
