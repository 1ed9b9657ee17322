"""Placing a square grid inside a one-coloured cycle of surviving sets.

The level chain ends with a usable pair along every host edge; stringing
those pairs around a one-coloured host cycle leaves m vertex sets in which
an m x m grid can be embedded row by row.  Cell (i, j) goes to set
(i + j) mod m, so the right-hand neighbour and the cell below both land in
the next set of the cycle, and every row visits every set exactly once.

Each placed vertex banks a candidate set inside the next cycle set; the row
below is threaded through those banks after two cleaning passes, a degree
filter against the occupied vertices and a backward connectivity filter.
The finished grid is checked by independent code that knows nothing about
how the rows were built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from monogrid.blowup import BlowupGraph
from monogrid.graphs import (
    EdgeColouring,
    Graph,
    VertexSet,
    colour_subgraph,
    neighbours_in,
)
from monogrid.pipeline import CycleCertificate, PipelineResult, _derived_seed
from monogrid.regularity import (
    BadSetError,
    RegParams,
    RegVerdict,
    compute_bad_set,
    sampled_lower_regular,
)

DEFAULT_SUBSET_TRIES = 10
DEFAULT_VERTEX_BUDGET = 50


class EmbedFailure(Exception):
    """A row could not be placed or a cleaning pass lost too much.

    Carries the stage name, the grid row (None for context-level failures),
    the position within the row (or the set index, depending on the stage),
    a human-readable detail string and the verdicts of the last regularity
    checks that were consulted.
    """

    def __init__(self, stage: str, detail: str = "", row: int | None = None,
                 position: int | None = None,
                 verdicts: list[RegVerdict] | None = None):
        self.stage = stage
        self.detail = detail
        self.row = row
        self.position = position
        self.verdicts = verdicts or []
        at = ""
        if row is not None:
            at += f" in row {row}"
        if position is not None:
            at += f" at position {position}"
        msg = f"{stage} failed{at}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "row": self.row,
            "position": self.position,
            "detail": self.detail,
            "verdicts": [v.to_json() for v in self.verdicts],
        }


@dataclass
class EmbedContext:
    """Frozen surroundings for one grid embedding.

    sets[t] are the cycle sets, bad[t] the audited bad vertices inside
    them, G the working graph: the chosen colour's edges restricted to the
    union of the sets.  s is the blow-up part size the allowances are
    quoted against, which may exceed the actual set sizes when the chain
    shrank its parts.
    """

    sets: list[VertexSet]
    bad: list[VertexSet]
    colour: int
    G: Graph
    params: RegParams
    s: int

    def __post_init__(self):
        if len(self.sets) < 2:
            raise ValueError("a grid needs at least two cycle sets")
        if len(self.bad) != len(self.sets):
            raise ValueError("one bad set per cycle set")
        union = 0
        for t, (U, B) in enumerate(zip(self.sets, self.bad)):
            if U.n != self.G.n or B.n != self.G.n:
                raise ValueError("set universe does not match the graph")
            if (B & U) != B:
                raise ValueError(f"bad set {t} leaves its cycle set")
            if union & U.bits:
                raise ValueError("cycle sets overlap")
            union |= U.bits

    @property
    def m(self) -> int:
        return len(self.sets)

    @property
    def candidate_size(self) -> int:
        """ceil(alpha * s * p / 4), the working size of every banked set."""
        a = Fraction(self.params.alpha)
        return math.ceil(a * self.s * Fraction(self.params.p) / 4)

    @property
    def filter_slack(self) -> int:
        """How many vertices the degree filter may drop, ceil(alpha s p / 16)."""
        a = Fraction(self.params.alpha)
        return math.ceil(a * self.s * Fraction(self.params.p) / 16)

    @property
    def backward_cut(self) -> int:
        a = Fraction(self.params.alpha)
        return math.ceil(a * self.s * Fraction(self.params.p) / 8)

    @property
    def q_target(self) -> int:
        """Occupied sets are padded to exactly ceil(2 eps s) before filtering."""
        return math.ceil(2 * Fraction(self.params.eps) * self.s)

    def free(self, t: int) -> VertexSet:
        """Cycle set t with its bad vertices removed."""
        return self.sets[t] - self.bad[t]

    def validate(self) -> None:
        """The allowance invariants, beyond the structural checks."""
        sizes = {U.size for U in self.sets}
        if len(sizes) != 1:
            raise AssertionError(f"cycle sets have mixed sizes {sorted(sizes)}")
        allowance = Fraction(self.params.eps) * self.s
        for t, B in enumerate(self.bad):
            if B.size > allowance:
                raise AssertionError(
                    f"bad set {t} has {B.size} vertices, allowance "
                    f"{float(allowance):.1f}"
                )
        # Q stays under 2 eps s only while a full row costs at most eps s.
        if Fraction(self.params.delta) > Fraction(self.params.eps):
            raise AssertionError("delta above eps would overflow the occupied sets")


@dataclass
class RowState:
    """One embedded grid row plus the material for the next one.

    images[j] is the vertex at cell (index, j).  family[j] is the banked
    candidate set for cell (index + 1, j), drawn from the neighbours of
    images[j] one cycle set further on.  occupied[t] is indexed by cycle
    set and holds the bad vertices plus every image placed so far.
    """

    index: int
    images: list[int]
    family: list[VertexSet]
    occupied: list[VertexSet]
    stats: dict = field(default_factory=dict)


@dataclass
class GridEmbedding:
    """A placed a x b grid, cells keyed (row, column), plus its colour."""

    a: int
    b: int
    colour: int
    image: dict[tuple[int, int], int]

    def cell(self, i: int, j: int) -> int:
        return self.image[(i, j)]

    def to_json(self) -> dict:
        cells = [[i, j, v] for (i, j), v in sorted(self.image.items())]
        return {"a": self.a, "b": self.b, "colour": self.colour, "cells": cells}


def _rng(seed: int, *key: int):
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    )


def _check_pair(ctx: EmbedContext, A: VertexSet, B: VertexSet, trials: int,
                seed: int) -> RegVerdict:
    """One (eps, alpha p) sampled check in the working graph."""
    effective_p = Fraction(ctx.params.alpha) * Fraction(ctx.params.p)
    return sampled_lower_regular(ctx.G, A, B, Fraction(ctx.params.eps),
                                 effective_p, trials, seed)


def seed_first_row(ctx: EmbedContext, seed: int, *,
                   subset_tries: int = DEFAULT_SUBSET_TRIES,
                   vertex_budget: int = DEFAULT_VERTEX_BUDGET,
                   check_trials: int = 1,
                   audit_trials: int = 1) -> RowState:
    """Embed row 0 and bank the candidate family for row 1.

    The opening pair (set 0 minus bad, set 1 minus bad) is audited directly
    at (2 eps', alpha p) with eps' the inheritance level; the first vertex
    only needs a large enough degree into the audited set.  Later positions
    draw their vertex from the previous position's bank, so row edges come
    for free, and every accepted vertex banks a fresh candidate set that
    passes the forward check (against the next-but-one set minus bad) and
    the link check (against the previous bank).

    Vertices are tried in ascending id, at most vertex_budget per position,
    with subset_tries seeded draws each.  Exhausting a position raises an
    EmbedFailure naming it and carrying the last failing verdicts.
    """
    m = ctx.m
    cand = ctx.candidate_size
    free = [ctx.free(t) for t in range(m)]

    if free[0] and free[1]:
        audit_eps = 2 * Fraction(ctx.params.eps_inherit)
        effective_p = Fraction(ctx.params.alpha) * Fraction(ctx.params.p)
        opening = sampled_lower_regular(ctx.G, free[0], free[1], audit_eps,
                                        effective_p, audit_trials,
                                        _derived_seed(seed, 3))
        if not opening.passed:
            raise EmbedFailure(
                "first-row-audit", row=0, position=0, verdicts=[opening],
                detail="the opening pair fails its direct regularity check",
            )

    images: list[int] = []
    family: list[VertexSet] = []
    stats = {"vertices_tried": 0, "subsets_drawn": 0, "checks": 0}
    for j in range(m):
        pool = free[0] if j == 0 else family[j - 1]
        target = free[(j + 1) % m]
        forward = free[(j + 2) % m]
        placed = False
        last: list[RegVerdict] = []
        tried = 0
        for v in pool:
            if tried >= vertex_budget:
                break
            tried += 1
            stats["vertices_tried"] += 1
            hood = neighbours_in(ctx.G, v, target)
            if hood.size < cand:
                continue
            for t in range(subset_tries):
                stats["subsets_drawn"] += 1
                drawn = hood.sample(cand, _rng(seed, 1, j, v, t))
                checks = [_check_pair(ctx, drawn, forward, check_trials,
                                      _derived_seed(seed, 2, j, v, t))]
                if j > 0:
                    checks.append(_check_pair(ctx, family[j - 1], drawn,
                                              check_trials,
                                              _derived_seed(seed, 4, j, v, t)))
                stats["checks"] += len(checks)
                if all(c.passed for c in checks):
                    images.append(v)
                    family.append(drawn)
                    placed = True
                    break
                last = checks
            if placed:
                break
        if not placed:
            raise EmbedFailure(
                "first-row", row=0, position=j, verdicts=last,
                detail=f"no vertex qualified after trying {tried} "
                       f"(pool {pool.size}, target {target.size})",
            )
    occupied = [ctx.bad[t].add(images[t]) for t in range(m)]
    return RowState(0, images, family, occupied, stats)


def filter_well_connected(S: VertexSet, U_next: VertexSet, Q_next: VertexSet,
                          ctx: EmbedContext) -> VertexSet:
    """Keep the members of S with enough forward degree left.

    Q_next is padded with the lowest-id vertices of U_next outside it until
    it holds exactly ceil(2 eps s) vertices; the survivors are those whose
    degree into the remainder still reaches the candidate size.  Losing
    more than ceil(alpha s p / 16) members is an error.
    """
    target = ctx.q_target
    if Q_next.size > target:
        raise EmbedFailure(
            "occupied-overflow",
            detail=f"|Q| = {Q_next.size} exceeds the padding target {target}",
        )
    room = U_next - Q_next
    pad = target - Q_next.size
    if room.size < pad:
        raise EmbedFailure(
            "well-connected-filter",
            detail=f"cannot pad Q to {target}: only {room.size} vertices left",
        )
    avail = room - room.lowest(pad)
    cand = ctx.candidate_size
    kept = 0
    for v in S:
        if (ctx.G.row(v) & avail.bits).bit_count() >= cand:
            kept |= 1 << v
    out = VertexSet(ctx.G.n, kept)
    dropped = S.size - out.size
    if dropped > ctx.filter_slack:
        raise EmbedFailure(
            "well-connected-filter",
            detail=f"dropped {dropped} of {S.size} members, "
                   f"tolerance {ctx.filter_slack}",
        )
    return out


def backward_filter(s_prime: list[VertexSet], ctx: EmbedContext) -> list[VertexSet]:
    """Prune a filtered family so every member can reach the next bank.

    The last bank is cut to its lowest candidate_size - ceil(alpha s p / 8)
    ids; walking backwards, each earlier bank keeps the vertices with at
    least one neighbour in the pruned successor.  Any bank falling below
    the cut size is an error naming its index.
    """
    cut = ctx.candidate_size - ctx.backward_cut
    out: list[VertexSet | None] = [None] * len(s_prime)
    last = s_prime[-1]
    if last.size < cut:
        raise EmbedFailure(
            "backward-filter", position=len(s_prime) - 1,
            detail=f"final bank has {last.size} members, need {cut}",
        )
    out[-1] = last.lowest(cut)
    for j in range(len(s_prime) - 2, -1, -1):
        succ = out[j + 1].bits
        kept = 0
        for v in s_prime[j]:
            if ctx.G.row(v) & succ:
                kept |= 1 << v
        pruned = VertexSet(ctx.G.n, kept)
        if pruned.size < cut:
            raise EmbedFailure(
                "backward-filter", position=j,
                detail=f"retained {pruned.size} of {s_prime[j].size} members, "
                       f"need {cut}",
            )
        out[j] = pruned
    return out  # type: ignore[return-value]


def embed_row(ctx: EmbedContext, prev: RowState, seed: int, *,
              subset_tries: int = DEFAULT_SUBSET_TRIES,
              vertex_budget: int = DEFAULT_VERTEX_BUDGET,
              check_trials: int = 1) -> RowState:
    """Thread the next row through the banks the previous row left behind.

    The banks are pruned of occupied vertices, degree-filtered, and
    backward-filtered; the row itself is then a left-to-right walk picking
    the lowest available id at each position, with backtracking when a
    position cannot also bank a fresh candidate set for the row below.
    Fresh banks avoid the occupied sets as they stand before this row, so
    a later row can only ever collide with the single vertex this row adds
    to each cycle set, and the pruning pass removes exactly that.
    """
    m = ctx.m
    i = prev.index + 1
    cand = ctx.candidate_size
    occ = prev.occupied
    for t in range(m):
        if occ[t].size > ctx.q_target:
            raise EmbedFailure(
                "occupied-overflow", row=i, position=t,
                detail=f"occupied set {t} holds {occ[t].size} vertices, "
                       f"cap {ctx.q_target}",
            )

    def set_at(j: int) -> int:
        return (i + j) % m

    try:
        working = [prev.family[j] - occ[set_at(j)] for j in range(m)]
        filtered = [
            filter_well_connected(working[j], ctx.sets[set_at(j + 1)],
                                  occ[set_at(j + 1)], ctx)
            for j in range(m)
        ]
        pruned = backward_filter(filtered, ctx)
    except EmbedFailure as e:
        raise EmbedFailure(e.stage, e.detail, row=i,
                           position=e.position, verdicts=e.verdicts) from None

    images: list[int | None] = [None] * m
    banks: list[VertexSet | None] = [None] * m
    stats = {"vertices_tried": 0, "subsets_drawn": 0, "checks": 0,
             "backtracks": 0}
    budget = [vertex_budget * m]
    deepest = {"position": 0, "verdicts": [], "detail": "no options"}

    def note(j: int, detail: str, verdicts: list[RegVerdict]) -> None:
        if j >= deepest["position"]:
            deepest.update(position=j, detail=detail, verdicts=verdicts)

    def attempt(j: int) -> bool:
        if j == 0:
            options = pruned[0]
        else:
            options = VertexSet(ctx.G.n,
                                ctx.G.row(images[j - 1]) & pruned[j].bits)
        if not options:
            note(j, "no neighbour survives in the pruned bank", [])
            return False
        target = set_at(j + 1)
        avail = ctx.sets[target] - occ[target]
        forward = ctx.free(set_at(j + 2))
        for v in options:
            if budget[0] <= 0:
                note(j, "search budget exhausted", [])
                return False
            budget[0] -= 1
            stats["vertices_tried"] += 1
            hood = neighbours_in(ctx.G, v, avail)
            # the degree filter ran against a padded, therefore smaller, set
            assert hood.size >= cand
            for t in range(subset_tries):
                stats["subsets_drawn"] += 1
                drawn = hood.sample(cand, _rng(seed, 4, i, j, v, t))
                checks = [_check_pair(ctx, drawn, forward, check_trials,
                                      _derived_seed(seed, 5, i, j, v, t))]
                if j > 0:
                    checks.append(_check_pair(ctx, banks[j - 1], drawn,
                                              check_trials,
                                              _derived_seed(seed, 6, i, j, v, t)))
                stats["checks"] += len(checks)
                if not all(c.passed for c in checks):
                    note(j, f"bank rejected at vertex {v}", checks)
                    continue
                images[j] = v
                banks[j] = drawn
                if j + 1 == m or attempt(j + 1):
                    return True
                stats["backtracks"] += 1
                images[j] = None
                banks[j] = None
        return False

    if not attempt(0):
        raise EmbedFailure(
            "row-path", row=i, position=deepest["position"],
            detail=deepest["detail"], verdicts=deepest["verdicts"],
        )
    placed = [v for v in images if v is not None]
    assert len(placed) == m
    occupied = [occ[t] for t in range(m)]
    for j, v in enumerate(placed):
        occupied[set_at(j)] = occupied[set_at(j)].add(v)
    return RowState(i, placed, banks, occupied, stats)  # type: ignore[arg-type]


def build_context(bg: BlowupGraph, chi: EdgeColouring, result: PipelineResult,
                  cycle: CycleCertificate, params: RegParams, seed: int = 0, *,
                  badset_draws: int = 2, badset_trials: int = 1,
                  badset_cap: int = 0) -> EmbedContext:
    """Assemble the cycle sets, working graph and bad sets for one embedding."""
    m = len(cycle.vertices)
    cycle.validate(bg.host, result.phi, 2, max(2, m))
    sets = []
    for x in cycle.vertices:
        if x not in result.final_sets:
            raise ValueError(f"no surviving set for host vertex {x}")
        sets.append(result.final_sets[x])

    union = 0
    for U in sets:
        union |= U.bits
    coloured = colour_subgraph(bg.gamma, chi, cycle.colour)
    rows = [coloured.row(v) & union if (union >> v) & 1 else 0
            for v in range(coloured.n)]
    G = Graph(coloured.n, rows)

    bad = []
    for t in range(m):
        try:
            bad.append(compute_bad_set(
                bg, G, sets[(t + 1) % m], sets[(t + 2) % m], sets[t],
                params.eps, params.alpha, params.p,
                draws=badset_draws, seed=_derived_seed(seed, 17, t),
                checker_trials=badset_trials, checker_cap=badset_cap,
            ))
        except BadSetError as e:
            raise EmbedFailure("bad-set", str(e), position=t) from e

    ctx = EmbedContext(sets, bad, cycle.colour, G, params, bg.part_size)
    ctx.validate()
    return ctx


def embed_grid(bg: BlowupGraph, chi: EdgeColouring, result: PipelineResult,
               cycle: CycleCertificate, params: RegParams, seed: int = 0, *,
               subset_tries: int = DEFAULT_SUBSET_TRIES,
               vertex_budget: int = DEFAULT_VERTEX_BUDGET,
               check_trials: int = 1, audit_trials: int = 1,
               badset_draws: int = 2, badset_trials: int = 1,
               badset_cap: int = 0) -> GridEmbedding:
    """Embed the full square grid along a one-coloured host cycle.

    The grid side equals the cycle length, which must in turn match the
    plan's slice of the part size, delta * s.  Rows are seeded and threaded
    one at a time; failures from the row machinery propagate with their
    row and position attached.
    """
    m = len(cycle.vertices)
    side = Fraction(params.delta) * bg.part_size
    if Fraction(m) != side:
        raise ValueError(
            f"cycle length {m} does not match the planned grid side "
            f"{float(side):g}"
        )
    ctx = build_context(bg, chi, result, cycle, params, seed,
                        badset_draws=badset_draws, badset_trials=badset_trials,
                        badset_cap=badset_cap)
    row = seed_first_row(ctx, _derived_seed(seed, 40, 0),
                         subset_tries=subset_tries,
                         vertex_budget=vertex_budget,
                         check_trials=check_trials, audit_trials=audit_trials)
    rows = [row]
    for i in range(1, m):
        row = embed_row(ctx, row, _derived_seed(seed, 40, i),
                        subset_tries=subset_tries,
                        vertex_budget=vertex_budget,
                        check_trials=check_trials)
        rows.append(row)
    image = {}
    for i, state in enumerate(rows):
        for j, v in enumerate(state.images):
            image[(i, j)] = v
    return GridEmbedding(m, m, cycle.colour, image)


def verify_grid_embedding(gamma: Graph, chi: EdgeColouring,
                          emb: GridEmbedding) -> tuple[bool, list[str]]:
    """Independent check of a finished grid: totality, injectivity, edges.

    Walks every cell and every one of the 2ab - a - b grid edges directly
    on the supplied graph and colouring; returns a flag and the list of
    violations found, one line each.
    """
    violations = []
    seen: dict[int, tuple[int, int]] = {}
    for i in range(emb.a):
        for j in range(emb.b):
            if (i, j) not in emb.image:
                violations.append(f"cell ({i}, {j}) has no image")
                continue
            v = emb.image[(i, j)]
            if not 0 <= v < gamma.n:
                violations.append(f"cell ({i}, {j}) maps outside the graph")
                continue
            if v in seen:
                violations.append(
                    f"cells {seen[v]} and ({i}, {j}) share vertex {v}"
                )
            else:
                seen[v] = (i, j)
    for key in emb.image:
        i, j = key
        if not (0 <= i < emb.a and 0 <= j < emb.b):
            violations.append(f"cell ({i}, {j}) lies outside the grid")

    def check_edge(c1: tuple[int, int], c2: tuple[int, int]) -> None:
        if c1 not in emb.image or c2 not in emb.image:
            return
        u, v = emb.image[c1], emb.image[c2]
        if not (0 <= u < gamma.n and 0 <= v < gamma.n) or u == v:
            return
        if not gamma.has_edge(u, v):
            violations.append(
                f"grid edge {c1}-{c2} maps to the non-edge ({u}, {v})"
            )
            return
        try:
            col = chi.colour(u, v)
        except ValueError:
            violations.append(f"grid edge {c1}-{c2} maps to an uncoloured edge")
            return
        if col != emb.colour:
            violations.append(
                f"grid edge {c1}-{c2} has colour {col}, want {emb.colour}"
            )

    for i in range(emb.a):
        for j in range(emb.b):
            if j + 1 < emb.b:
                check_edge((i, j), (i, j + 1))
            if i + 1 < emb.a:
                check_edge((i, j), (i + 1, j))
    return not violations, violations


# ---------------------------------------------------------------------------
# file format
#
# Embedding file: header "grid a b colour c", then one "i j vertex" line per
# cell.  Blank lines and "#" comments are ignored.


def write_embedding(emb: GridEmbedding, path: str,
                    comment: str | None = None) -> None:
    with open(path, "w") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"grid {emb.a} {emb.b} colour {emb.colour}\n")
        for (i, j), v in sorted(emb.image.items()):
            fh.write(f"{i} {j} {v}\n")


def read_embedding(path: str) -> GridEmbedding:
    header = None
    image: dict[tuple[int, int], int] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if header is None:
                if (len(parts) != 5 or parts[0] != "grid"
                        or parts[3] != "colour"):
                    raise ValueError(
                        f"{path}:{lineno}: expected header 'grid a b colour c'"
                    )
                try:
                    header = (int(parts[1]), int(parts[2]), int(parts[4]))
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: non-integer header field"
                    ) from None
                if header[0] < 1 or header[1] < 1 or header[2] < 0:
                    raise ValueError(f"{path}:{lineno}: bad grid dimensions")
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'i j vertex'")
            try:
                i, j, v = (int(x) for x in parts)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer cell") from None
            if not (0 <= i < header[0] and 0 <= j < header[1]):
                raise ValueError(f"{path}:{lineno}: cell outside the grid")
            if (i, j) in image:
                raise ValueError(f"{path}:{lineno}: duplicate cell ({i}, {j})")
            if v < 0:
                raise ValueError(f"{path}:{lineno}: negative vertex id")
            image[(i, j)] = v
    if header is None:
        raise ValueError(f"{path}: missing header line")
    return GridEmbedding(header[0], header[1], header[2], image)
