"""Lower-regularity machinery for sparse bipartite pairs.

A pair (A, B) is lower-regular at (eps, p) when every pair of subsets taking
at least an eps fraction of each side still has density at least (1-eps)p.
Everything here revolves around that predicate: an exact checker for tiny
sides, a sampled falsifier for real ones, the slicing arithmetic that
transfers regularity to large sub-pairs, a density-increment search that
digs a regular pair out of any dense enough pair, the level schedule that
strings searches along a host path, and the empirical bad-set audit used by
the embedder.

Checks compare exact Fraction densities against exact Fraction thresholds,
so a verdict never depends on float rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable

import numpy as np

from monogrid.blowup import BlowupGraph
from monogrid.graphs import Graph, VertexSet, pair_density

EXACT_CAP = 16

EXACT = "exact"
SAMPLED = "sampled"


@dataclass(frozen=True)
class RegParams:
    """Parameter bundle tying the whole construction together.

    alpha is the guaranteed colour-density fraction, eps the target
    regularity, eps_inherit the looser level the pipeline hands to
    inheritance audits, lam the uniformity slack and shrink factor, delta
    the slice fraction used by the grid plan, c the density constant with
    p = c / sqrt(part size).
    """

    r: int
    max_degree: int
    eps: Fraction
    eps_inherit: Fraction
    alpha: Fraction
    lam: Fraction
    delta: Fraction
    c: float
    p: float

    def __post_init__(self):
        if self.r < 2:
            raise ValueError("need at least 2 colours")
        if self.max_degree < 2:
            raise ValueError("degree bound must be at least 2")
        if not 0 < self.eps < Fraction(1, 2):
            raise ValueError("eps must lie in (0, 1/2)")
        if not 0 < self.lam <= 1:
            raise ValueError("lam must lie in (0, 1]")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.delta > min(self.eps / 4, self.lam / 4):
            raise ValueError("delta must not exceed min(eps/4, lam/4)")
        if not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")

    @classmethod
    def defaults(cls, r: int, host_scale: int, s: int, lam: Fraction,
                 c: float = 6.0, max_degree: int = 2) -> "RegParams":
        """The canonical parameter choices, given r colours and a host scale."""
        alpha = Fraction(1, 2 * r)
        eps = alpha / 256
        delta = min(Fraction(1, 4 * host_scale), eps / 4, Fraction(lam) / 4)
        return cls(
            r=r,
            max_degree=max_degree,
            eps=eps,
            eps_inherit=eps / 4,
            alpha=alpha,
            lam=Fraction(lam),
            delta=delta,
            c=c,
            p=min(1.0, c / math.sqrt(s)),
        )


@dataclass(frozen=True)
class RegVerdict:
    mode: str  # exact | sampled
    passed: bool
    threshold: Fraction
    witness: tuple[VertexSet, VertexSet] | None = None
    witness_density: Fraction | None = None
    trials: int | None = None

    def to_json(self) -> dict:
        out: dict = {
            "mode": self.mode,
            "passed": self.passed,
            "threshold": float(self.threshold),
        }
        if self.trials is not None:
            out["trials"] = self.trials
        if self.witness is not None:
            U1, U2 = self.witness
            out["witness"] = {
                "left": U1.to_list(),
                "right": U2.to_list(),
                "density": float(self.witness_density),
                "density_exact": str(self.witness_density),
            }
        return out


def recheck_witness(G: Graph, A: VertexSet, B: VertexSet, eps,
                    verdict: RegVerdict) -> bool:
    """Exact re-validation of a failed verdict's witness, independent of mode."""
    if verdict.passed or verdict.witness is None:
        return False
    U1, U2 = verdict.witness
    eps = Fraction(eps)
    if (U1 & A) != U1 or (U2 & B) != U2:
        return False
    if U1.size < eps * A.size or U2.size < eps * B.size:
        return False
    return pair_density(G, U1, U2) < verdict.threshold


def _subset_sizes(eps: Fraction, na: int, nb: int) -> tuple[int, int]:
    return max(1, math.ceil(eps * na)), max(1, math.ceil(eps * nb))


def exact_lower_regular(G: Graph, A: VertexSet, B: VertexSet, eps, p,
                        cap: int = EXACT_CAP) -> RegVerdict:
    """Exhaustive lower-regularity check over exact-size subset pairs.

    Only subsets of size exactly ceil(eps|A|) x ceil(eps|B|) are enumerated:
    a uniformly random exact-size sub-pair of any larger violating pair has
    expected density equal to the violating density, so some exact-size pair
    violates too, and the reduction loses nothing.  For each left subset the
    adversarial right subset is just the ceil(eps|B|) vertices of smallest
    degree into it, which kills the inner enumeration.
    """
    if not A or not B or not A.isdisjoint(B):
        raise ValueError("need disjoint non-empty sides")
    if len(A) > cap or len(B) > cap:
        raise ValueError(
            f"sides of size {len(A)}x{len(B)} exceed the exact cap {cap}; "
            "use the sampled check"
        )
    eps = Fraction(eps)
    threshold = (1 - eps) * Fraction(p)
    k1, k2 = _subset_sizes(eps, len(A), len(B))
    b_ids = B.to_list()
    b_rows = [G.row(b) for b in b_ids]
    for combo in combinations(A.to_list(), k1):
        bits1 = 0
        for a in combo:
            bits1 |= 1 << a
        degs = sorted(
            ((b_rows[i] & bits1).bit_count(), b_ids[i]) for i in range(len(b_ids))
        )
        worst = degs[:k2]
        edge_sum = sum(d for d, _ in worst)
        if Fraction(edge_sum, k1 * k2) < threshold:
            U1 = VertexSet(G.n, bits1)
            U2 = VertexSet.from_ids(G.n, [b for _, b in worst])
            return RegVerdict(EXACT, False, threshold, (U1, U2),
                              Fraction(edge_sum, k1 * k2))
    return RegVerdict(EXACT, True, threshold)


def _lowest_by_degree(G: Graph, pool: list[int], into_bits: int, k: int) -> list[int]:
    return sorted(pool, key=lambda v: ((G.row(v) & into_bits).bit_count(), v))[:k]


def sampled_lower_regular(G: Graph, A: VertexSet, B: VertexSet, eps, p,
                          trials: int, seed: int) -> RegVerdict:
    """Randomized falsifier: samples exact-size subset pairs, half biased low.

    The biased half peels from the low-degree end (sample the left subset
    among the 2k lowest-degree-into-B vertices, then the right subset among
    the 2k lowest-degree vertices into the chosen left subset), the rest is
    uniform.  A pass is one-sided; a fail carries an exactly checkable
    witness.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if not A or not B or not A.isdisjoint(B):
        raise ValueError("need disjoint non-empty sides")
    eps = Fraction(eps)
    threshold = (1 - eps) * Fraction(p)
    k1, k2 = _subset_sizes(eps, len(A), len(B))
    a_ids = A.to_list()
    b_ids = B.to_list()
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    biased = trials // 2

    def verdict_for(u1: VertexSet, u2: VertexSet) -> RegVerdict | None:
        d = pair_density(G, u1, u2)
        if d < threshold:
            return RegVerdict(SAMPLED, False, threshold, (u1, u2), d, trials)
        return None

    for t in range(trials):
        if t < biased:
            pool1 = _lowest_by_degree(G, a_ids, B.bits, min(2 * k1, len(a_ids)))
            pick1 = rng.choice(len(pool1), size=k1, replace=False)
            U1 = VertexSet.from_ids(G.n, [pool1[int(i)] for i in pick1])
            pool2 = _lowest_by_degree(G, b_ids, U1.bits, min(2 * k2, len(b_ids)))
            pick2 = rng.choice(len(pool2), size=k2, replace=False)
            U2 = VertexSet.from_ids(G.n, [pool2[int(i)] for i in pick2])
        else:
            U1 = A.sample(k1, rng)
            U2 = B.sample(k2, rng)
        bad = verdict_for(U1, U2)
        if bad is not None:
            return bad
    return RegVerdict(SAMPLED, True, threshold, trials=trials)


def check_lower_regular(G: Graph, A: VertexSet, B: VertexSet, eps, p,
                        trials: int, seed: int,
                        cap: int = EXACT_CAP) -> RegVerdict:
    """Exact when both sides fit under the cap, sampled otherwise."""
    if len(A) <= cap and len(B) <= cap:
        return exact_lower_regular(G, A, B, eps, p, cap)
    return sampled_lower_regular(G, A, B, eps, p, trials, seed)


def slicing_parameters(eps, delta):
    """Regularity level guaranteed for sub-pairs of relative size >= delta."""
    if not 0 < eps < delta:
        raise ValueError("need 0 < eps < delta")
    return eps / delta


# ---------------------------------------------------------------------------
# density-increment search


@dataclass(frozen=True)
class FindResult:
    passed: bool
    pair: tuple[VertexSet, VertexSet]
    verdict: RegVerdict
    checks_used: int
    restarts: int


def _keep_best(G: Graph, part: VertexSet, partner_bits: int, k: int,
               banned: int) -> VertexSet:
    """The k members with highest degree into partner_bits; banned ones go first."""
    ranked = sorted(
        part,
        key=lambda v: (
            ((1 << v) & banned) != 0,  # banned sorts last among keepers
            -((G.row(v) & partner_bits).bit_count()),
            v,
        ),
    )
    return VertexSet.from_ids(part.n, ranked[:k])


def find_lower_regular_pair(
    G_c: Graph,
    V1: VertexSet,
    V2: VertexSet,
    eps,
    alpha,
    p,
    lam_target,
    budget: int = 200,
    seed: int = 0,
    check_trials: int = 64,
    cap: int = EXACT_CAP,
) -> FindResult:
    """Density-increment search for a lower-regular pair at (eps, alpha*p).

    Starting from the full pair, repeatedly test the current pair trimmed to
    the target size; on failure, move within the current pair to the densest
    of the three complements of the returned witness, re-trimmed to equal
    sizes.  When the walk bottoms out below the target size, restart from
    the top with every witness vertex seen so far pushed to the back of the
    trim order.  All tie-breaks are by vertex id, so runs are reproducible.
    """
    if len(V1) != len(V2):
        raise ValueError("sides must have equal size")
    eps = Fraction(eps)
    alpha = Fraction(alpha)
    effective_p = alpha * Fraction(p)
    if pair_density(G_c, V1, V2) < effective_p:
        raise ValueError("pair is too sparse for the density-increment search")
    target = math.ceil(Fraction(lam_target) * len(V1))
    if target < 1:
        raise ValueError("lam_target too small: empty target")

    checks = 0
    restarts = 0
    banned = 0
    best: tuple[Fraction, FindResult] | None = None
    cur1, cur2 = V1, V2

    while checks < budget:
        U1 = _keep_best(G_c, cur1, cur2.bits, target, banned)
        U2 = _keep_best(G_c, cur2, U1.bits, target, banned)
        verdict = check_lower_regular(G_c, U1, U2, eps, effective_p,
                                      check_trials, seed + checks, cap)
        checks += 1
        if verdict.passed:
            return FindResult(True, (U1, U2), verdict, checks, restarts)
        W1, W2 = verdict.witness
        score = verdict.witness_density
        if best is None or score > best[0]:
            best = (score, FindResult(False, (U1, U2), verdict, checks, restarts))
        banned |= W1.bits | W2.bits

        options = []
        for cand1, cand2 in ((W1, cur2 - W2), (cur1 - W1, W2),
                             (cur1 - W1, cur2 - W2)):
            size = min(len(cand1), len(cand2))
            if size < target or not cand1 or not cand2:
                continue
            options.append((pair_density(G_c, cand1, cand2), cand1, cand2))
        if options:
            _, nxt1, nxt2 = max(options, key=lambda o: (o[0], -len(o[1])))
            size = min(len(nxt1), len(nxt2))
            cur1 = _keep_best(G_c, nxt1, nxt2.bits, size, banned)
            cur2 = _keep_best(G_c, nxt2, cur1.bits, size, banned)
        else:
            # walked below the target size: restart from the top, with the
            # witnesses seen so far pushed out of the trims first
            restarts += 1
            cur1, cur2 = V1, V2

    assert best is not None
    return best[1]


# ---------------------------------------------------------------------------
# level schedule


@dataclass(frozen=True)
class EpsSchedule:
    """Per-level (eps_i, lam_i), level 1 first; level count is max_degree + 1."""

    levels: list[tuple[Fraction, Fraction]]

    @property
    def product_lam(self) -> Fraction:
        out = Fraction(1)
        for _, lam_i in self.levels:
            out *= lam_i
        return out

    def eps_at(self, i: int) -> Fraction:
        return self.levels[i - 1][0]

    def lam_at(self, i: int) -> Fraction:
        return self.levels[i - 1][1]

    def __len__(self) -> int:
        return len(self.levels)


def quarter_rule(eps, alpha) -> Fraction:
    """Default shrink rule: a constant quarter at every level."""
    return Fraction(1, 4)


def identity_rule(eps, alpha) -> Fraction:
    """No shrink; useful when the parts are to be kept whole."""
    return Fraction(1)


def eps_schedule(eps, max_degree: int, alpha,
                 lam_rule: Callable = quarter_rule) -> EpsSchedule:
    """Build the level ladder downward from the target regularity.

    The top level carries the target eps; each step down multiplies by that
    level's shrink factor, so that slicing a level-i pair by lam_{i+1}
    recovers exactly the level-(i+1) regularity.
    """
    if max_degree < 2:
        raise ValueError("degree bound must be at least 2")
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError("eps must lie in (0, 1/2)")
    levels_rev: list[tuple[Fraction, Fraction]] = []
    eps_i = eps
    for _ in range(max_degree + 1):
        lam_i = Fraction(lam_rule(eps_i, alpha))
        if not 0 < lam_i <= 1:
            raise ValueError(f"shrink rule returned {lam_i}, outside (0, 1]")
        levels_rev.append((eps_i, lam_i))
        eps_i = eps_i * lam_i
    return EpsSchedule(list(reversed(levels_rev)))


# ---------------------------------------------------------------------------
# bad-set audit


class BadSetError(Exception):
    """The audited bad set exceeded its allowance."""

    def __init__(self, bad: VertexSet, limit: Fraction):
        self.bad = bad
        self.limit = limit
        super().__init__(
            f"inheritance audit failed: |B| = {bad.size} exceeds the "
            f"allowance {float(limit):.1f}"
        )


def compute_bad_set(
    bg: BlowupGraph,
    G_c: Graph,
    V1: VertexSet,
    V2: VertexSet,
    ambient: VertexSet,
    eps,
    alpha,
    p,
    draws: int = 20,
    seed: int = 0,
    checker_trials: int = 1,
    checker_cap: int = 0,
) -> VertexSet:
    """Audit which ambient vertices inherit regularity into (V1, V2).

    For each v in ambient, draw `draws` subsets of its blow-up neighbourhood
    in V1 of size ceil(alpha |V1| p / 4) (and partner subsets for a sampled
    w), and mark v bad if any (N_v, V2) or (N_v, N_w) check fails at
    (eps, alpha p) in the colour graph.  Vertices without enough neighbours
    to fill a subset are bad automatically.  Raises when the bad set
    outgrows eps * |ambient|.

    The inner checks run in sampled mode with `checker_trials` trials; their
    power is a deliberate calibration knob.  Exhaustive checking of the tiny
    drawn neighbourhoods (pass checker_cap=EXACT_CAP to get it) condemns
    every vertex at realistic densities, because minimum subset densities
    concentrate only for subsets far larger than the drawn ones.
    """
    if draws < 1:
        raise ValueError("need at least one draw per vertex")
    eps = Fraction(eps)
    alpha = Fraction(alpha)
    effective_p = alpha * Fraction(p)
    size = math.ceil(alpha * len(V1) * Fraction(p) / 4)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    amb_ids = ambient.to_list()
    bad_bits = 0

    def neighbourhood(v: int, side: VertexSet) -> VertexSet:
        return VertexSet(bg.gamma.n, bg.gamma.row(v) & side.bits & ~(1 << v))

    for v in amb_ids:
        nv_full = neighbourhood(v, V1)
        if nv_full.size < size:
            bad_bits |= 1 << v
            continue
        is_bad = False
        for d in range(draws):
            Nv = nv_full.sample(size, rng)
            check_seed = seed + 1 + v * 1009 + d
            one_sided = check_lower_regular(G_c, Nv, V2, eps, effective_p,
                                            checker_trials, check_seed,
                                            cap=checker_cap)
            if not one_sided.passed:
                is_bad = True
                break
            w = amb_ids[int(rng.integers(len(amb_ids)))]
            nw_full = neighbourhood(w, V2)
            if nw_full.size < size:
                continue
            Nw = nw_full.sample(size, rng)
            two_sided = check_lower_regular(G_c, Nv, Nw, eps, effective_p,
                                            checker_trials, check_seed + 500009,
                                            cap=checker_cap)
            if not two_sided.passed:
                is_bad = True
                break
        if is_bad:
            bad_bits |= 1 << v
    bad = VertexSet(bg.gamma.n, bad_bits)
    limit = eps * len(ambient)
    if bad.size > limit:
        raise BadSetError(bad, limit)
    return bad
