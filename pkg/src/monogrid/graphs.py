"""Bitset graphs, vertex subsets, and exact pair densities.

Vertices are dense integers 0..n-1.  Every adjacency row is one Python int
with bit v set when the edge is present, so a subset degree is a single AND
plus a popcount.  All the hot loops downstream (regularity checks, candidate
filtering) are subset-density queries, which is why the representation is a
bit row rather than an adjacency list.

Densities are exact `Fraction` values (edge count over product of sizes), so
comparisons against rational thresholds like (1-eps)*p never go through
floats.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator


def _iter_bits(bits: int) -> Iterator[int]:
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


class VertexSet:
    """Immutable subset of 0..n-1 backed by an int bitmask."""

    __slots__ = ("n", "bits", "_size")

    def __init__(self, n: int, bits: int):
        if n < 0:
            raise ValueError("universe size must be non-negative")
        if bits < 0 or bits >> n:
            raise ValueError("bitmask has members outside the universe")
        self.n = n
        self.bits = bits
        self._size = bits.bit_count()

    @classmethod
    def from_ids(cls, n: int, ids: Iterable[int]) -> "VertexSet":
        bits = 0
        for v in ids:
            if not 0 <= v < n:
                raise ValueError(f"vertex {v} outside universe of size {n}")
            bits |= 1 << v
        return cls(n, bits)

    @classmethod
    def full(cls, n: int) -> "VertexSet":
        return cls(n, (1 << n) - 1)

    @classmethod
    def empty(cls, n: int) -> "VertexSet":
        return cls(n, 0)

    @property
    def size(self) -> int:
        return self._size

    def __len__(self) -> int:
        return self._size

    def __bool__(self) -> bool:
        return self._size > 0

    def __iter__(self) -> Iterator[int]:
        return _iter_bits(self.bits)

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.n and (self.bits >> v) & 1 == 1

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, VertexSet)
            and self.n == other.n
            and self.bits == other.bits
        )

    def __hash__(self) -> int:
        return hash((self.n, self.bits))

    def _check_universe(self, other: "VertexSet") -> None:
        if self.n != other.n:
            raise ValueError("vertex sets live in different universes")

    def __and__(self, other: "VertexSet") -> "VertexSet":
        self._check_universe(other)
        return VertexSet(self.n, self.bits & other.bits)

    def __or__(self, other: "VertexSet") -> "VertexSet":
        self._check_universe(other)
        return VertexSet(self.n, self.bits | other.bits)

    def __sub__(self, other: "VertexSet") -> "VertexSet":
        self._check_universe(other)
        return VertexSet(self.n, self.bits & ~other.bits)

    def isdisjoint(self, other: "VertexSet") -> bool:
        self._check_universe(other)
        return self.bits & other.bits == 0

    def add(self, v: int) -> "VertexSet":
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} outside universe of size {self.n}")
        return VertexSet(self.n, self.bits | (1 << v))

    def remove(self, v: int) -> "VertexSet":
        return VertexSet(self.n, self.bits & ~(1 << v))

    def lowest(self, k: int) -> "VertexSet":
        """The k smallest member ids, as a new set."""
        if k < 0 or k > self._size:
            raise ValueError(f"cannot take {k} of {self._size} members")
        bits = 0
        for i, v in enumerate(self):
            if i >= k:
                break
            bits |= 1 << v
        return VertexSet(self.n, bits)

    def sample(self, k: int, rng) -> "VertexSet":
        """Uniform k-subset drawn with the supplied numpy Generator."""
        if k < 0 or k > self._size:
            raise ValueError(f"cannot sample {k} of {self._size} members")
        ids = self.to_list()
        picked = rng.choice(len(ids), size=k, replace=False)
        bits = 0
        for i in picked:
            bits |= 1 << ids[int(i)]
        return VertexSet(self.n, bits)

    def to_list(self) -> list[int]:
        return list(self)

    def __repr__(self) -> str:
        if self._size <= 12:
            return f"VertexSet(n={self.n}, {{{', '.join(map(str, self))}}})"
        return f"VertexSet(n={self.n}, size={self._size})"


class Graph:
    """Immutable simple graph on 0..n-1 with int bitmask adjacency rows."""

    __slots__ = ("n", "_rows", "_m")

    def __init__(self, n: int, rows: list[int], edge_count: int | None = None):
        if len(rows) != n:
            raise ValueError("row count does not match vertex count")
        self.n = n
        self._rows = rows
        if edge_count is None:
            edge_count = sum(r.bit_count() for r in rows) // 2
        self._m = edge_count

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) outside vertex range 0..{n - 1}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, rows)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        rows = [full & ~(1 << v) for v in range(n)]
        return cls(n, rows)

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        if n < 3:
            raise ValueError("a cycle needs at least 3 vertices")
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def path(cls, n: int) -> "Graph":
        if n < 1:
            raise ValueError("a path needs at least 1 vertex")
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @property
    def edge_count(self) -> int:
        return self._m

    def row(self, v: int) -> int:
        return self._rows[v]

    def degree(self, v: int) -> int:
        return self._rows[v].bit_count()

    def max_degree(self) -> int:
        return max((r.bit_count() for r in self._rows), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"edge ({u}, {v}) outside vertex range")
        return (self._rows[u] >> v) & 1 == 1

    def neighbours(self, v: int) -> VertexSet:
        return VertexSet(self.n, self._rows[v])

    def edges(self) -> Iterator[tuple[int, int]]:
        """All edges as (u, v) with u < v, ascending."""
        for u in range(self.n):
            higher = self._rows[u] >> (u + 1)
            for off in _iter_bits(higher):
                yield u, u + 1 + off

    def vertices(self) -> range:
        return range(self.n)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self._rows == other._rows
        )

    def __hash__(self) -> int:
        return hash((self.n, tuple(self._rows)))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self._m})"


def _edges_between(G: Graph, A: VertexSet, B: VertexSet) -> int:
    """e(A, B) for disjoint A, B.  Iterates the smaller side."""
    if len(A) > len(B):
        A, B = B, A
    bbits = B.bits
    rows = G._rows
    return sum((rows[a] & bbits).bit_count() for a in A)


def pair_density(G: Graph, A: VertexSet, B: VertexSet) -> Fraction:
    """Exact bipartite density e(A,B) / (|A| |B|) for disjoint non-empty sets."""
    if A.n != G.n or B.n != G.n:
        raise ValueError("vertex sets do not match the graph's universe")
    if not A or not B:
        raise ValueError("pair density needs non-empty sets")
    if not A.isdisjoint(B):
        raise ValueError("pair density needs disjoint sets")
    return Fraction(_edges_between(G, A, B), len(A) * len(B))


def degree_into(G: Graph, v: int, B: VertexSet) -> int:
    """|N(v) ∩ B| for a vertex v outside B."""
    if not 0 <= v < G.n:
        raise ValueError(f"vertex {v} out of range")
    if B.n != G.n:
        raise ValueError("vertex set does not match the graph's universe")
    if v in B:
        raise ValueError(f"vertex {v} must not belong to the target set")
    return (G.row(v) & B.bits).bit_count()


def neighbours_in(G: Graph, v: int, B: VertexSet) -> VertexSet:
    """N(v) ∩ B as a VertexSet, same preconditions as degree_into."""
    if not 0 <= v < G.n:
        raise ValueError(f"vertex {v} out of range")
    if B.n != G.n:
        raise ValueError("vertex set does not match the graph's universe")
    if v in B:
        raise ValueError(f"vertex {v} must not belong to the target set")
    return VertexSet(G.n, G.row(v) & B.bits)


class EdgeColouring:
    """Total colouring of a graph's edges with colours 0..r-1.

    Keys are canonical (min, max) pairs.  The mapping is expected to cover
    every edge of the graph it was built for; `validate_total` checks that.
    """

    __slots__ = ("n", "r", "_map")

    def __init__(self, n: int, r: int, mapping: dict[tuple[int, int], int]):
        if r < 2:
            raise ValueError("an edge colouring needs at least 2 colours")
        self.n = n
        self.r = r
        norm: dict[tuple[int, int], int] = {}
        for (u, v), c in mapping.items():
            if not (0 <= u < n and 0 <= v < n) or u == v:
                raise ValueError(f"bad edge ({u}, {v}) in colouring")
            if not 0 <= c < r:
                raise ValueError(f"colour {c} outside 0..{r - 1}")
            key = (u, v) if u < v else (v, u)
            if key in norm:
                raise ValueError(f"edge {key} coloured twice")
            norm[key] = c
        self._map = norm

    @classmethod
    def constant(cls, G: Graph, r: int, c: int = 0) -> "EdgeColouring":
        return cls(G.n, r, {e: c for e in G.edges()})

    def colour(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        try:
            return self._map[key]
        except KeyError:
            raise ValueError(f"edge {key} not coloured") from None

    def items(self) -> Iterator[tuple[tuple[int, int], int]]:
        return iter(self._map.items())

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, edge: tuple[int, int]) -> bool:
        u, v = edge
        key = (u, v) if u < v else (v, u)
        return key in self._map

    def validate_total(self, G: Graph) -> None:
        """Raise unless the colouring covers exactly E(G)."""
        if G.n != self.n:
            raise ValueError("colouring universe does not match graph")
        m = G.edge_count
        if len(self._map) != m:
            raise ValueError(f"colouring has {len(self._map)} edges, graph has {m}")
        for u, v in self._map:
            if not G.has_edge(u, v):
                raise ValueError(f"colouring refers to absent edge ({u}, {v})")

    def colour_counts(self) -> list[int]:
        counts = [0] * self.r
        for c in self._map.values():
            counts[c] += 1
        return counts


def colour_subgraph(G: Graph, chi: EdgeColouring, c: int) -> Graph:
    """The spanning subgraph of G carrying exactly the colour-c edges."""
    if not 0 <= c < chi.r:
        raise ValueError(f"colour {c} outside 0..{chi.r - 1}")
    if chi.n != G.n:
        raise ValueError("colouring universe does not match graph")
    rows = [0] * G.n
    m = 0
    for (u, v), col in chi.items():
        if col != c:
            continue
        if not G.has_edge(u, v):
            raise ValueError(f"colouring refers to absent edge ({u}, {v})")
        rows[u] |= 1 << v
        rows[v] |= 1 << u
        m += 1
    return Graph(G.n, rows, m)


# ---------------------------------------------------------------------------
# file formats
#
# Graph file: header line "n <count>", then one "u v" per edge, 0-based.
# Colouring file: header line "r <count>", then "u v c" triples.
# Lines starting with "#" and blank lines are ignored in both.


def write_graph(G: Graph, path: str, comment: str | None = None) -> None:
    with open(path, "w") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"n {G.n}\n")
        for u, v in G.edges():
            fh.write(f"{u} {v}\n")


def _significant_lines(path: str) -> Iterator[tuple[int, list[str]]]:
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line.split()


def read_graph(path: str) -> Graph:
    n = None
    rows: list[int] = []
    m = 0
    for lineno, parts in _significant_lines(path):
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise ValueError(f"{path}:{lineno}: expected header 'n <count>'")
            try:
                n = int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad vertex count") from None
            if n < 0:
                raise ValueError(f"{path}:{lineno}: negative vertex count")
            rows = [0] * n
            continue
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'u v'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-integer vertex id") from None
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"{path}:{lineno}: vertex id out of range")
        if u == v:
            raise ValueError(f"{path}:{lineno}: self-loop")
        if (rows[u] >> v) & 1:
            raise ValueError(f"{path}:{lineno}: duplicate edge ({u}, {v})")
        rows[u] |= 1 << v
        rows[v] |= 1 << u
        m += 1
    if n is None:
        raise ValueError(f"{path}: missing header line")
    return Graph(n, rows, m)


def write_colouring(chi: EdgeColouring, path: str, comment: str | None = None) -> None:
    with open(path, "w") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"r {chi.r}\n")
        for (u, v), c in sorted(chi.items()):
            fh.write(f"{u} {v} {c}\n")


def read_colouring(path: str, n: int | None = None) -> EdgeColouring:
    r = None
    mapping: dict[tuple[int, int], int] = {}
    max_id = -1
    for lineno, parts in _significant_lines(path):
        if r is None:
            if len(parts) != 2 or parts[0] != "r":
                raise ValueError(f"{path}:{lineno}: expected header 'r <count>'")
            try:
                r = int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad colour count") from None
            if r < 2:
                raise ValueError(f"{path}:{lineno}: colour count must be >= 2")
            continue
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'u v c'")
        try:
            u, v, c = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-integer field") from None
        if u == v:
            raise ValueError(f"{path}:{lineno}: self-loop")
        if n is not None and not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"{path}:{lineno}: vertex id out of range")
        if not 0 <= c < r:
            raise ValueError(f"{path}:{lineno}: colour out of range")
        key = (u, v) if u < v else (v, u)
        if key in mapping:
            raise ValueError(f"{path}:{lineno}: duplicate edge {key}")
        mapping[key] = c
        max_id = max(max_id, u, v)
    if r is None:
        raise ValueError(f"{path}: missing header line")
    universe = n if n is not None else max_id + 1
    return EdgeColouring(universe, r, mapping)
