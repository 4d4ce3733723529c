"""Undirected graphs, free index sets, and clique covers for block sampling.

A graph on ``p`` vertices is a symmetric boolean adjacency matrix with a
false diagonal. The *free index set* of a graph is the ordered list of
upper-triangular pairs ``(i, j)`` with ``i <= j`` that are either diagonal or
edges, scanned row-wise; it fixes the vectorization order used everywhere
(gradients, mass matrices, traces).

A clique cover is a list of vertex sets, each complete in the graph, whose
within-clique pairs (plus singleton diagonals) cover the free index set.
Three constructions are provided: all maximal cliques, one 2-clique per edge,
and a randomized greedy cover that emits few, large, maximal cliques.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph as a dense boolean adjacency matrix."""

    adj: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adj, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diagonal(a)):
            raise ValueError("adjacency diagonal must be false")
        object.__setattr__(self, "adj", a)

    @property
    def p(self) -> int:
        return self.adj.shape[0]

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.adj, 1)))

    def edges(self) -> list[tuple[int, int]]:
        r, c = np.nonzero(np.triu(self.adj, 1))
        return list(zip(r.tolist(), c.tolist()))

    @staticmethod
    def from_edges(p: int, edges) -> "Graph":
        adj = np.zeros((p, p), dtype=bool)
        for i, j in edges:
            if i == j:
                raise ValueError("self loops are not allowed")
            adj[i, j] = adj[j, i] = True
        return Graph(adj)

    @staticmethod
    def empty(p: int) -> "Graph":
        return Graph(np.zeros((p, p), dtype=bool))

    @staticmethod
    def complete(p: int) -> "Graph":
        return Graph(~np.eye(p, dtype=bool))


@dataclass(frozen=True)
class FreeIndexSet:
    """Row-wise ordered free pairs (all diagonals plus the edges)."""

    p: int
    rows: np.ndarray  # int32, i of each pair
    cols: np.ndarray  # int32, j of each pair, j >= i

    @property
    def n(self) -> int:
        return self.rows.size

    @property
    def diag_mask(self) -> np.ndarray:
        return self.rows == self.cols

    @property
    def mult(self) -> np.ndarray:
        """Symmetric-pair multiplicity: 1 on diagonal pairs, 2 on edges."""
        return np.where(self.diag_mask, 1.0, 2.0)

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.rows.tolist(), self.cols.tolist()))

    def labels(self) -> list[str]:
        return [f"{i}_{j}" for i, j in self.pairs()]

    def gather(self, m: np.ndarray) -> np.ndarray:
        """Vectorize a symmetric matrix over the free pairs."""
        return m[self.rows, self.cols]

    def scatter(self, v: np.ndarray) -> np.ndarray:
        """Embed a free-coordinate vector into a full symmetric matrix."""
        m = np.zeros((self.p, self.p))
        m[self.rows, self.cols] = v
        m[self.cols, self.rows] = v
        return m

    def positions_in_full(self) -> np.ndarray:
        """Index of each free pair within the full upper-triangular order."""
        i, j, p = self.rows.astype(np.int64), self.cols.astype(np.int64), self.p
        return (i * (2 * p - i - 1)) // 2 + j


def free_index_set(g: Graph) -> FreeIndexSet:
    """Ordered free pairs of ``g``: row-wise upper triangle, diag + edges."""
    keep = np.triu(g.adj) | np.eye(g.p, dtype=bool)
    r, c = np.nonzero(keep)
    return FreeIndexSet(g.p, r.astype(np.int32), c.astype(np.int32))


def full_index_set(p: int) -> FreeIndexSet:
    """Free index set of the complete graph (every upper pair)."""
    return free_index_set(Graph.complete(p))


@dataclass(frozen=True)
class CliqueCover:
    """Ordered list of cliques, each a sorted int32 vertex array."""

    cliques: tuple

    def __len__(self) -> int:
        return len(self.cliques)

    def __iter__(self):
        return iter(self.cliques)

    def sizes(self) -> list[int]:
        return [c.size for c in self.cliques]


def _as_cover(cliques) -> CliqueCover:
    return CliqueCover(tuple(np.asarray(sorted(c), dtype=np.int32) for c in cliques))


def random_graph(rng: np.random.Generator, p: int, s: float) -> Graph:
    """Each unordered pair is an edge independently with probability ``s``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("edge probability must be in [0, 1]")
    adj = np.zeros((p, p), dtype=bool)
    iu = np.triu_indices(p, 1)
    if iu[0].size:
        adj[iu] = rng.random(iu[0].size) < s
    return Graph(adj | adj.T)


def maximal_cliques(g: Graph) -> CliqueCover:
    """All maximal cliques via Bron-Kerbosch with pivoting.

    Isolated vertices appear as singleton cliques. Output order is
    deterministic for a given graph.
    """
    p = g.p
    nbr = [0] * p
    for v in range(p):
        mask = 0
        for u in np.nonzero(g.adj[v])[0]:
            mask |= 1 << int(u)
        nbr[v] = mask

    out: list[list[int]] = []

    def bits(x: int):
        while x:
            low = x & -x
            yield low.bit_length() - 1
            x ^= low

    def expand(r: list[int], cand: int, excl: int):
        if cand == 0 and excl == 0:
            out.append(r.copy())
            return
        pivot = max(bits(cand | excl), key=lambda u: (cand & nbr[u]).bit_count())
        for v in bits(cand & ~nbr[pivot]):
            vb = 1 << v
            r.append(v)
            expand(r, cand & nbr[v], excl & nbr[v])
            r.pop()
            cand &= ~vb
            excl |= vb

    expand([], (1 << p) - 1, 0)
    return _as_cover(out)


def edgewise_cover(g: Graph) -> CliqueCover:
    """One 2-clique per edge plus singletons for isolated vertices."""
    cliques = [[i, j] for i, j in g.edges()]
    isolated = np.nonzero(~g.adj.any(axis=0))[0]
    cliques.extend([[int(v)] for v in isolated])
    return _as_cover(cliques)


def heuristic_cover_for_permutation(g: Graph, perm: np.ndarray) -> CliqueCover:
    """Greedy cover of few maximal cliques for a fixed vertex permutation.

    Relabel the graph by ``perm``, scan the upper triangle row-wise, and for
    each edge whose pair is not yet inside an emitted clique, grow a clique
    from that pair by testing the remaining vertices in permuted order. Every
    emitted clique is maximal; vertices in no clique are appended as
    singletons so that the diagonal stays covered.
    """
    p = g.p
    perm = np.asarray(perm)
    b = g.adj[np.ix_(perm, perm)]
    covered = np.zeros((p, p), dtype=bool)
    in_any = np.zeros(p, dtype=bool)
    cliques = []
    for i in range(p):
        for j in range(i + 1, p):
            if not b[i, j] or covered[i, j]:
                continue
            members = [i, j]
            ok = b[:, i] & b[:, j]
            for v in range(p):
                if v != i and v != j and ok[v]:
                    members.append(v)
                    ok &= b[:, v]
            mem = np.array(members)
            covered[np.ix_(mem, mem)] = True
            in_any[mem] = True
            cliques.append(perm[mem])
    for v in range(p):
        if not in_any[v]:
            cliques.append([int(perm[v])])
    return _as_cover(cliques)


def heuristic_clique_cover(rng: np.random.Generator, g: Graph) -> CliqueCover:
    """Greedy cover under a fresh uniformly random vertex permutation."""
    return heuristic_cover_for_permutation(g, rng.permutation(g.p))


def cover_valid(g: Graph, cover: CliqueCover) -> bool:
    """Check completeness of every clique and coverage of all free pairs."""
    need = np.triu(g.adj) | np.eye(g.p, dtype=bool)
    got = np.zeros_like(need)
    for c in cover:
        block = g.adj[np.ix_(c, c)] | np.eye(c.size, dtype=bool)
        if not block.all():
            return False
        got[np.ix_(c, c)] = True
    return bool(np.all(got | ~need))


COVER_BUILDERS = {
    "maximal": lambda rng, g: maximal_cliques(g),
    "edgewise": lambda rng, g: edgewise_cover(g),
    "heuristic": heuristic_clique_cover,
}


def build_cover(name: str, rng: np.random.Generator, g: Graph) -> CliqueCover:
    try:
        return COVER_BUILDERS[name](rng, g)
    except KeyError:
        raise ValueError(f"unknown cover strategy {name!r}") from None


def to_edge_list_text(g: Graph) -> str:
    """Serialize as the CLI's edge-list format: ``p`` then one ``i j`` per edge."""
    lines = [str(g.p)]
    lines += [f"{i} {j}" for i, j in g.edges()]
    return "\n".join(lines) + "\n"


def from_edge_list_text(text: str) -> Graph:
    rows = [ln for ln in (s.strip() for s in text.splitlines()) if ln]
    if not rows:
        raise ValueError("empty edge-list text")
    p = int(rows[0])
    edges = []
    for ln in rows[1:]:
        i, j = ln.split()
        edges.append((int(i), int(j)))
    return Graph.from_edges(p, edges)
