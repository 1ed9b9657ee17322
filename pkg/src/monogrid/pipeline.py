"""The level chain: from a coloured blow-up to regular pairs along every host edge.

The host's edges are split into at most Delta+1 matchings by a constructive
proper edge colouring.  Level i processes matching i: every edge of it gets
the majority colour of its current pair and a density-increment search for a
lower-regular sub-pair at that level's parameters; every host vertex the
matching misses shrinks by the level's factor anyway, so the chain sizes
stay aligned.  After each level a sampled audit re-checks the pairs settled
at earlier levels, because slicing guarantees are asymptotic and this module
refuses to assume them silently.

The upshot of a complete run is an edge colouring of the host plus one
final set per host vertex such that every host edge's final pair passes a
lower-regularity check in its assigned colour.
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
    _edges_between,
    _iter_bits,
    colour_subgraph,
)
from monogrid.hosts import HostGraph
from monogrid.regularity import (
    EXACT_CAP,
    EpsSchedule,
    FindResult,
    RegParams,
    RegVerdict,
    check_lower_regular,
    find_lower_regular_pair,
)


# ---------------------------------------------------------------------------
# matching decomposition


@dataclass(frozen=True)
class MatchingDecomposition:
    matchings: list[list[tuple[int, int]]]

    def validate(self, H: HostGraph) -> None:
        seen = set()
        for matching in self.matchings:
            touched = set()
            for u, v in matching:
                if not H.graph.has_edge(u, v):
                    raise AssertionError(f"({u}, {v}) is not a host edge")
                if u in touched or v in touched:
                    raise AssertionError(f"({u}, {v}) collides within its matching")
                touched.update((u, v))
                key = (min(u, v), max(u, v))
                if key in seen:
                    raise AssertionError(f"edge {key} appears twice")
                seen.add(key)
        if len(seen) != H.graph.edge_count:
            raise AssertionError("matchings do not cover the edge set")
        if len(self.matchings) > H.max_degree + 1:
            raise AssertionError("too many matchings")


def _proper_edge_colouring(G: Graph) -> dict[tuple[int, int], int]:
    """Misra-Gries style proper edge colouring with at most max_degree+1 colours.

    Maintains a fan of neighbours, inverts an alternating two-colour path,
    then rotates a fan prefix.  Quadratic and simple; hosts are small.
    """
    ncol = max(1, G.max_degree()) + 1
    col: dict[tuple[int, int], int] = {}
    # per-vertex colour multiset: a path inversion or fan rotation briefly
    # parks one colour on two edges of a vertex, so plain sets desync
    used: list[dict[int, int]] = [{} for _ in range(G.n)]

    def key(u: int, v: int) -> tuple[int, int]:
        return (u, v) if u < v else (v, u)

    def get(u: int, v: int) -> int | None:
        return col.get(key(u, v))

    def assign(u: int, v: int, c: int) -> None:
        old = col.get(key(u, v))
        for x in (u, v):
            if old is not None:
                if used[x][old] == 1:
                    del used[x][old]
                else:
                    used[x][old] -= 1
            used[x][c] = used[x].get(c, 0) + 1
        col[key(u, v)] = c

    def free(v: int) -> int:
        for c in range(ncol):
            if c not in used[v]:
                return c
        raise AssertionError("no free colour; degree bound violated")

    for u, v in G.edges():
        # maximal fan at u starting from v
        fan = [v]
        fanset = {v}
        while True:
            last = fan[-1]
            ext = None
            for w in G.neighbours(u):
                cw = get(u, w)
                if cw is None or w in fanset:
                    continue
                if cw not in used[last]:
                    ext = w
                    break
            if ext is None:
                break
            fan.append(ext)
            fanset.add(ext)
        c = free(u)
        d = free(fan[-1])
        if c != d:
            # walk the d/c alternating path from u, then flip it; properness
            # makes each step unique, so the walk cannot double back
            path = []
            at, want = u, d
            while True:
                nxt = None
                for w in G.neighbours(at):
                    if get(at, w) == want:
                        nxt = w
                        break
                if nxt is None:
                    break
                path.append((at, nxt))
                at = nxt
                want = c if want == d else d
            for idx, (a, b) in enumerate(path):
                # the walk alternates d, c, d, ...; the flip swaps the two
                assign(a, b, c if idx % 2 == 0 else d)
        # rotate at the first vertex where d is free AND the prefix is still
        # a fan; the inversion may have recoloured a fan edge, so fan-ness
        # has to be rechecked, not assumed
        w_idx = None
        for i, fw in enumerate(fan):
            if i > 0 and get(u, fan[i]) in used[fan[i - 1]]:
                break
            if d not in used[fw]:
                w_idx = i
                break
        if w_idx is None:
            raise AssertionError("fan rotation found no slot; colouring bug")
        # shift colours towards u's end of the fan, last edge first, so no
        # colour ever sits on two edges at u while the books are open
        shifted = [get(u, fan[j + 1]) for j in range(w_idx)]
        assign(u, fan[w_idx], d)
        for j in reversed(range(w_idx)):
            assign(u, fan[j], shifted[j])
    return col


def matching_decomposition(H: HostGraph) -> MatchingDecomposition:
    """Partition E(H) into at most max_degree+1 matchings."""
    col = _proper_edge_colouring(H.graph)
    classes: dict[int, list[tuple[int, int]]] = {}
    for edge, c in col.items():
        classes.setdefault(c, []).append(edge)
    matchings = [sorted(classes[c]) for c in sorted(classes)]
    out = MatchingDecomposition(matchings)
    out.validate(H)
    return out


# ---------------------------------------------------------------------------
# majority colour


def majority_colour(bg: BlowupGraph, chi: EdgeColouring, A: VertexSet,
                    B: VertexSet) -> int:
    """The colour with the most edges between A and B; ties to the lowest index."""
    counts = [0] * chi.r
    bbits = B.bits
    for u in A:
        for v in _iter_bits(bg.gamma.row(u) & bbits):
            counts[chi.colour(u, v)] += 1
    total = sum(counts)
    if total == 0:
        raise ValueError("empty pair: no edges to take a majority over")
    best = max(range(chi.r), key=lambda c: (counts[c], -c))
    assert counts[best] * chi.r >= total
    return best


# ---------------------------------------------------------------------------
# the chain


class PipelineFailure(Exception):
    """A level could not complete; carries exactly where and why."""

    def __init__(self, stage: str, level: int, edge: tuple[int, int] | None,
                 detail):
        self.stage = stage
        self.level = level
        self.edge = edge
        self.detail = detail
        at = f" at host edge {edge}" if edge else ""
        super().__init__(f"{stage} failed on level {level}{at}")


@dataclass
class EdgeRecord:
    edge: tuple[int, int]
    level: int
    colour: int
    precondition_ok: bool
    verdict: RegVerdict
    find_checks: int

    def to_json(self) -> dict:
        return {
            "edge": list(self.edge),
            "level": self.level,
            "colour": self.colour,
            "precondition_ok": self.precondition_ok,
            "verdict": self.verdict.to_json(),
            "find_checks": self.find_checks,
        }


@dataclass
class AuditRecord:
    level: int
    edge: tuple[int, int]
    eps: Fraction
    verdict: RegVerdict

    def to_json(self) -> dict:
        return {
            "after_level": self.level,
            "edge": list(self.edge),
            "eps": float(self.eps),
            "verdict": self.verdict.to_json(),
        }


@dataclass
class ChainState:
    chains: dict[int, list[VertexSet]]

    def current(self, x: int) -> VertexSet:
        return self.chains[x][-1]

    def assert_cardinalities(self, schedule: EpsSchedule) -> None:
        for x, chain in self.chains.items():
            for j in range(1, len(chain)):
                want = math.ceil(schedule.lam_at(j) * chain[j - 1].size)
                if chain[j].size != want:
                    raise AssertionError(
                        f"chain for host vertex {x} has size {chain[j].size} "
                        f"at level {j}, want {want}"
                    )
                if (chain[j] & chain[j - 1]) != chain[j]:
                    raise AssertionError(f"chain for host vertex {x} is not nested")


@dataclass
class PipelineResult:
    phi: EdgeColouring
    final_sets: dict[int, VertexSet]
    chain: ChainState
    edge_log: list[EdgeRecord]
    audit_log: list[AuditRecord]
    decomposition: MatchingDecomposition

    def to_json(self) -> dict:
        return {
            "phi": [[u, v, c] for (u, v), c in sorted(self.phi.items())],
            "final_sets": {
                str(x): U.to_list() for x, U in sorted(self.final_sets.items())
            },
            "edges": [rec.to_json() for rec in self.edge_log],
            "audits": [rec.to_json() for rec in self.audit_log],
            "matchings": [sorted(map(list, m)) for m in
                          self.decomposition.matchings],
        }


def _derived_seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return int(ss.generate_state(1)[0])


def regular_subgraph(
    bg: BlowupGraph,
    chi: EdgeColouring,
    params: RegParams,
    schedule: EpsSchedule,
    seed: int = 0,
    find_budget: int = 60,
    check_trials: int = 24,
    audit_trials: int = 8,
    check_cap: int = EXACT_CAP,
) -> PipelineResult:
    """Run the full level chain over the host's matching decomposition.

    Raises PipelineFailure the moment a density-increment search or an
    inheritance audit fails; the exception names the level, the edge, and
    the best verdict seen.  check_cap is forwarded to every regularity
    check: pairs at or under it are checked exactly, pass 0 to stay sampled
    at every size (bench-scale slicing shrinks pairs into the regime where
    tiny subsets genuinely break lower-regularity, so exact checking there
    condemns every candidate).
    """
    H = bg.host
    chi.validate_total(bg.gamma)
    levels = len(schedule)
    if levels != H.max_degree + 1:
        raise ValueError(
            f"schedule has {levels} levels, host degree bound wants "
            f"{H.max_degree + 1}"
        )
    decomp = matching_decomposition(H)
    matchings = list(decomp.matchings) + [
        [] for _ in range(levels - len(decomp.matchings))
    ]

    chain = ChainState({x: [bg.part(x)] for x in H.graph.vertices()})
    phi_map: dict[tuple[int, int], int] = {}
    edge_log: list[EdgeRecord] = []
    audit_log: list[AuditRecord] = []
    colour_cache: dict[int, Graph] = {}
    settled: list[tuple[tuple[int, int], int]] = []  # (edge, colour)
    lam = params.lam

    def colour_graph(c: int) -> Graph:
        if c not in colour_cache:
            colour_cache[c] = colour_subgraph(bg.gamma, chi, c)
        return colour_cache[c]

    for level in range(1, levels + 1):
        eps_i = schedule.eps_at(level)
        lam_i = schedule.lam_at(level)
        matched: set[int] = set()
        for x, y in matchings[level - 1]:
            Ux, Uy = chain.current(x), chain.current(y)
            e_here = _edges_between(bg.gamma, Ux, Uy)
            mass = len(Ux) * len(Uy) * params.p
            precondition_ok = (1 - lam) * mass <= e_here <= (1 + lam) * mass
            c = majority_colour(bg, chi, Ux, Uy)
            G_c = colour_graph(c)
            try:
                found = find_lower_regular_pair(
                    G_c, Ux, Uy, eps_i, params.alpha, params.p, lam_i,
                    budget=find_budget,
                    seed=_derived_seed(seed, level, x, y),
                    check_trials=check_trials,
                    cap=check_cap,
                )
            except ValueError as err:
                raise PipelineFailure("majority-density", level, (x, y),
                                      str(err)) from err
            if not found.passed:
                raise PipelineFailure("regular-pair-search", level, (x, y),
                                      found)
            U1, U2 = found.pair
            chain.chains[x].append(U1)
            chain.chains[y].append(U2)
            matched.update((x, y))
            phi_map[(min(x, y), max(x, y))] = c
            settled.append(((x, y), c))
            edge_log.append(EdgeRecord((x, y), level, c, precondition_ok,
                                       found.verdict, found.checks_used))
        for x in H.graph.vertices():
            if x not in matched:
                cur = chain.current(x)
                target = math.ceil(lam_i * cur.size)
                chain.chains[x].append(cur.lowest(target))
        chain.assert_cardinalities(schedule)

        # audit every pair settled at an earlier level (and this one) at the
        # regularity the next level will rely on
        audit_eps = schedule.eps_at(min(level + 1, levels))
        for (x, y), c in settled:
            Ux, Uy = chain.current(x), chain.current(y)
            verdict = check_lower_regular(
                colour_graph(c), Ux, Uy, audit_eps,
                params.alpha * Fraction(params.p), audit_trials,
                _derived_seed(seed, 91, level, x, y), cap=check_cap,
            )
            audit_log.append(AuditRecord(level, (x, y), audit_eps, verdict))
            if not verdict.passed:
                raise PipelineFailure("inheritance-audit", level, (x, y),
                                      verdict)

    phi = EdgeColouring(H.graph.n, chi.r, phi_map)
    phi.validate_total(H.graph)
    final = {x: chain.current(x) for x in H.graph.vertices()}
    return PipelineResult(phi, final, chain, edge_log, audit_log, decomp)


# ---------------------------------------------------------------------------
# monochromatic cycles in the host colouring


@dataclass(frozen=True)
class CycleCertificate:
    colour: int
    vertices: list[int]

    def validate(self, H: HostGraph, phi: EdgeColouring,
                 l_min: int, l_max: int) -> None:
        ell = len(self.vertices)
        if not l_min <= ell <= l_max:
            raise AssertionError(f"cycle length {ell} outside [{l_min}, {l_max}]")
        if len(set(self.vertices)) != ell:
            raise AssertionError("cycle repeats a vertex")
        for i in range(ell):
            u, v = self.vertices[i], self.vertices[(i + 1) % ell]
            if not H.graph.has_edge(u, v):
                raise AssertionError(f"({u}, {v}) is not a host edge")
            if phi.colour(u, v) != self.colour:
                raise AssertionError(f"({u}, {v}) has the wrong colour")

    def to_json(self) -> dict:
        return {"colour": self.colour, "vertices": list(self.vertices)}


def find_mono_cycle(H: HostGraph, phi: EdgeColouring, l_min: int, l_max: int,
                    budget: int = 500_000) -> CycleCertificate | None:
    """Longest-first search for a single-colour cycle with length in range.

    Tries lengths from l_max down, each colour class in turn, by a
    backtracking walk that pins the smallest cycle vertex first.  Returns
    None if the budget runs out or no such cycle exists; hosts carry no
    guarantee of one.
    """
    if not 3 <= l_min <= l_max <= H.graph.n:
        raise ValueError("need 3 <= l_min <= l_max <= |V(H)|")
    classes = [colour_subgraph(H.graph, phi, c) for c in range(phi.r)]
    spent = 0
    for ell in range(l_max, l_min - 1, -1):
        for c in range(phi.r):
            found, cost = _cycle_of_length(classes[c], ell, budget - spent)
            spent += cost
            if found is None:
                continue
            out = CycleCertificate(c, found)
            out.validate(H, phi, l_min, l_max)
            return out
    return None


def _cycle_of_length(G: Graph, ell: int, budget: int):
    """Cycle on exactly ell vertices, or None; second slot is nodes spent."""
    spent = 0
    for start in G.vertices():
        if G.degree(start) < 2:
            continue
        found, spent = _extend_cycle(G, start, [start], 1 << start, ell,
                                     [spent, budget])
        if found is not None or spent >= budget:
            return found, spent
    return None, spent


def _extend_cycle(G: Graph, start: int, path: list[int], on_path: int,
                  ell: int, counter: list[int]):
    # counter = [spent, budget]
    if len(path) == ell:
        if G.has_edge(path[-1], start):
            return list(path), counter[0]
        return None, counter[0]
    for w in G.neighbours(path[-1]):
        if w <= start or (on_path >> w) & 1:
            continue
        counter[0] += 1
        if counter[0] >= counter[1]:
            return None, counter[0]
        path.append(w)
        got = _extend_cycle(G, start, path, on_path | (1 << w), ell, counter)
        if got[0] is not None:
            return got
        path.pop()
    return None, counter[0]
