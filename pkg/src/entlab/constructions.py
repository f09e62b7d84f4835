"""Explicit constructions: difference-graph colorings, separated block
families, the SL(2) subgroup tower with its coset-coordinate action, and the
experiments built on them.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .algebra import (FieldTower, FiniteGroup, SL2Group, coset_representatives,
                      element_order, sl2_enumerate)
from .dynamics import ActionTable, folner_average
from .entropy import EpsEntropyResult, eps_entropy_bracket
from .errors import BudgetError
from .spaces import FiniteProbSpace, Partition, Semimetric, cut_semimetric, dyadic_sum


# -- difference graphs and separated families -----------------------------------


@dataclass(frozen=True)
class DifferenceGraph:
    """Undirected graph on a window: g ~ h iff g h^-1 or h g^-1 lies in the
    forbidden set.  Max degree is at most 2|K|."""

    vertices: tuple
    adjacency: dict

    def degree(self, v) -> int:
        return len(self.adjacency[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency.values()), default=0)


def difference_graph(window: Sequence[Hashable], forbidden: Iterable[Hashable],
                     mul: Callable, inv: Callable) -> DifferenceGraph:
    """Build the forbidden-quotient graph on the window.

    `mul` and `inv` are the ambient group operations; the window may live in
    any group (integers under addition, tuples, group element indices...).
    The identity must not be forbidden, otherwise adjacency is meaningless.
    """
    window = list(window)
    forbidden = set(forbidden)
    if len(set(window)) != len(window):
        raise ValueError("window contains repeats")
    identity = None
    if window:
        g = window[0]
        identity = mul(g, inv(g))
    if identity in forbidden:
        raise ValueError("the identity element must not be in the forbidden set")
    adj = {v: set() for v in window}
    for i, g in enumerate(window):
        for h in window[i + 1:]:
            if mul(g, inv(h)) in forbidden or mul(h, inv(g)) in forbidden:
                adj[g].add(h)
                adj[h].add(g)
    return DifferenceGraph(tuple(window), adj)


def greedy_coloring(graph: DifferenceGraph) -> dict:
    """First-fit coloring in vertex order; uses at most max_degree + 1 colors."""
    colors: dict = {}
    for v in graph.vertices:
        taken = {colors[u] for u in graph.adjacency[v] if u in colors}
        c = 0
        while c in taken:
            c += 1
        colors[v] = c
    return colors


@dataclass(frozen=True)
class SeparatedFamily:
    """Blocks partitioning a window such that no within-block quotient g h^-1
    hits the forbidden set; at most 2|K| + 1 blocks."""

    window: tuple
    forbidden: frozenset
    blocks: tuple[tuple, ...]

    def check(self, mul: Callable, inv: Callable) -> None:
        flat = [g for b in self.blocks for g in b]
        if sorted(map(repr, flat)) != sorted(map(repr, self.window)):
            raise AssertionError("blocks do not partition the window")
        if len(self.blocks) > 2 * len(self.forbidden) + 1:
            raise AssertionError("too many blocks")
        for block in self.blocks:
            for i, g in enumerate(block):
                for h in block[i + 1:]:
                    if mul(g, inv(h)) in self.forbidden or mul(h, inv(g)) in self.forbidden:
                        raise AssertionError(f"pair ({g},{h}) violates separation")


def separated_family(window: Sequence[Hashable], forbidden: Iterable[Hashable],
                     mul: Callable, inv: Callable) -> SeparatedFamily:
    """Color classes of the greedy coloring of the difference graph."""
    graph = difference_graph(window, forbidden, mul, inv)
    colors = greedy_coloring(graph)
    by_color: dict[int, list] = {}
    for v in graph.vertices:
        by_color.setdefault(colors[v], []).append(v)
    blocks = tuple(tuple(by_color[c]) for c in sorted(by_color))
    fam = SeparatedFamily(tuple(window), frozenset(forbidden), blocks)
    fam.check(mul, inv)
    return fam


def choose_index_sequence(window_sizes: Sequence[int], phi: Sequence[float],
                          r_sizes: Sequence[int]) -> list[int]:
    """Piecewise-constant, non-decreasing chain index i(n).

    i(n) is the largest chain position whose color bound stays below
    sqrt(|F_n| / phi(n)); 0 means "no forbidden set yet" (bound 1).  Requires
    |F_n| / phi(n) non-decreasing over the horizon.
    """
    if len(window_sizes) != len(phi):
        raise ValueError("window sizes and phi must share a horizon")
    if any(p <= 0 for p in phi) or any(s <= 0 for s in window_sizes):
        raise ValueError("sizes and phi must be positive")
    ratios = [s / p for s, p in zip(window_sizes, phi)]
    for a, b in zip(ratios, ratios[1:]):
        if b < a - 1e-12:
            raise ValueError("|F_n|/phi(n) must be non-decreasing over the horizon")
    out = []
    for ratio in ratios:
        bound = math.sqrt(ratio)
        i = 0
        while i < len(r_sizes) and r_sizes[i] <= bound:
            i += 1
        out.append(i)
    for a, b in zip(out, out[1:]):
        assert a <= b
    return out


# -- the subgroup tower action ---------------------------------------------------


class TowerAction:
    """Uniform self-space of the top group of an SL(2) subgroup tower, with
    the coset coordinates of every atom.

    Atoms are the elements of the top group G_depth; component i of an atom g
    is the coset-representative coordinate produced by peeling g = h * c
    against G_{i-1}, bottom level last.  Left translation by any subgroup G_m
    leaves components above m untouched.
    """

    def __init__(self, p: int, depth: int, groups: list[SL2Group],
                 coset_reps: list[list[int]], atom_cap: int):
        self.p = p
        self.depth = depth
        self.groups = groups
        self.group = groups[-1]
        self.coset_reps = coset_reps
        if self.group.n > atom_cap:
            raise BudgetError(
                f"tower top group has {self.group.n} elements, over the atom cap {atom_cap}")
        self.space = FiniteProbSpace.uniform(self.group.n)
        self._embed_maps = [_embedding_map(groups[k], groups[k + 1])
                            for k in range(depth - 1)]
        self.components = self._build_components()
        self._action: ActionTable | None = None

    def _build_components(self) -> np.ndarray:
        comps = np.empty((self.group.n, self.depth), dtype=np.int32)
        decomp: list[np.ndarray] = []  # per level k >= 1: atom -> (sub element, rep position)
        for k in range(1, self.depth):
            gk, gk1 = self.groups[k - 1], self.groups[k]
            emb = self._embed_maps[k - 1]
            table = np.full((gk1.n, 2), -1, dtype=np.int32)
            for pos, c in enumerate(self.coset_reps[k]):
                for h in range(gk.n):
                    g = gk1.mul(int(emb[h]), c)
                    table[g] = (h, pos)
            if np.any(table < 0):
                raise AssertionError("coset decomposition did not cover the group")
            decomp.append(table)
        for atom in range(self.group.n):
            g = atom
            for k in range(self.depth - 1, 0, -1):
                h, pos = decomp[k - 1][g]
                comps[atom, k] = pos
                g = int(h)
            comps[atom, 0] = g
        return comps

    def component_sizes(self) -> tuple[int, ...]:
        return tuple(len(reps) for reps in self.coset_reps)

    def subgroup_indices(self, m: int) -> tuple[int, ...]:
        """Indices inside the top group of the embedded subgroup G_m."""
        idx = np.arange(self.groups[m - 1].n)
        for k in range(m - 1, self.depth - 1):
            idx = self._embed_maps[k][idx]
        return tuple(int(i) for i in idx)

    def action(self) -> ActionTable:
        """Left translation of the top group on itself (cached)."""
        if self._action is None:
            self._action = ActionTable.left_translation(self.group)
            # share the tower's space object so metric/action spaces agree
            self._action = ActionTable(self.group, self.space,
                                       self._action.perms, validate=False)
        return self._action

    def truncate(self, m: int) -> "TowerAction":
        """The depth-m tower over the same groups."""
        if not 1 <= m <= self.depth:
            raise ValueError("truncation depth out of range")
        if m == self.depth:
            return self
        return TowerAction(self.p, m, self.groups[:m], self.coset_reps[:m],
                           atom_cap=self.group.n)

    def __repr__(self) -> str:
        return f"TowerAction(p={self.p}, depth={self.depth}, atoms={self.group.n})"


def _embedding_map(small: SL2Group, big: SL2Group) -> np.ndarray:
    """Index map of the entry-wise field inclusion SL(2,q) -> SL(2,q^2)."""
    out = np.empty(small.n, dtype=np.int32)
    for i in range(small.n):
        m = small.element(i)
        out[i] = big.index_of_matrix((m.a, m.b, m.c, m.d))
    return out


def sl2_tower_action(p: int, depth: int, *, atom_cap: int = 10_000,
                     group_cap: int = 10**6) -> TowerAction:
    """Tower G_1 < ... < G_depth with G_n = SL(2, p^(2^(n-1))), coordinates by
    right-coset representatives; C_1 is all of G_1."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    tower = FieldTower(p, depth - 1)
    groups = [sl2_enumerate(tower, k, max_order=group_cap) for k in range(depth)]
    reps: list[list[int]] = [list(range(groups[0].n))]
    for k in range(1, depth):
        emb = _embedding_map(groups[k - 1], groups[k])
        reps.append(coset_representatives(groups[k], emb.tolist()))
    return TowerAction(p, depth, groups, reps, atom_cap=atom_cap)


def component_partition(tower: TowerAction, r: int) -> Partition:
    """Atoms partitioned by their first r coordinates."""
    if not 1 <= r <= tower.depth:
        raise ValueError("prefix length out of range")
    prefix = tower.components[:, :r]
    sizes = tower.component_sizes()[:r]
    labels = np.zeros(tower.group.n, dtype=np.int64)
    for i, size in enumerate(sizes):
        labels = labels * size + prefix[:, i]
    return Partition(tower.space, labels)


def component_metric(tower: TowerAction, r: int) -> Semimetric:
    """sum_{i<=r} 2^-i * cut(first i coordinates); a metric when r = depth."""
    parts = [component_partition(tower, i) for i in range(1, r + 1)]
    metric, separating = dyadic_sum(parts)
    if r == tower.depth and not separating:
        raise AssertionError("full coordinate prefix must separate atoms")
    return metric


# -- transversal partitions and invariant semimetrics ----------------------------


def transversal_partition(group: FiniteGroup, g0: int, *, order: int | None = None,
                          space: FiniteProbSpace | None = None) -> Partition:
    """Label each element by its position along its <g0>-orbit, counted from
    the canonically least orbit element.

    Every cell meets every orbit exactly once, and left translation by g0
    shifts labels cyclically.
    """
    p = element_order(group, g0)
    if order is not None and p != order:
        raise ValueError(f"g0 has order {p}, expected {order}")
    if space is None:
        space = FiniteProbSpace.uniform(group.n)
    elif space.n != group.n:
        raise ValueError("space size must match the group")
    labels = np.full(group.n, -1, dtype=np.int64)
    seen = np.zeros(group.n, dtype=bool)
    for x in range(group.n):
        if seen[x]:
            continue
        orbit = [x]
        y = group.mul(g0, x)
        while y != x:
            orbit.append(y)
            y = group.mul(g0, y)
        base = min(orbit)
        start = orbit.index(base)
        for j in range(len(orbit)):
            labels[orbit[(start + j) % len(orbit)]] = j
        seen[orbit] = True
    return Partition(space, labels)


def left_invariant_semimetric(group: FiniteGroup, root: Sequence[float], *,
                              space: FiniteProbSpace | None = None) -> Semimetric:
    """Shortest-path closure of d(x, y) = root[x^-1 y]; left-invariant by
    construction.

    The root must vanish at the identity and be symmetric under inversion.
    """
    root = np.asarray(root, dtype=float)
    if root.shape != (group.n,):
        raise ValueError("need one root value per group element")
    if np.any(root < 0):
        raise ValueError("root values must be non-negative")
    e = group.identity
    if root[e] != 0:
        raise ValueError("root must vanish at the identity")
    inv_idx = np.array([group.inv(i) for i in range(group.n)])
    if not np.allclose(root, root[inv_idx], atol=1e-12):
        raise ValueError("root must be symmetric under inversion")
    # Dijkstra from the identity over the complete weighted Cayley graph
    dist = np.full(group.n, np.inf)
    dist[e] = 0.0
    done = np.zeros(group.n, dtype=bool)
    heap: list[tuple[float, int]] = [(0.0, e)]
    idx = np.arange(group.n)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        # neighbours v with step weight root[u^-1 v]; u^-1 v over all v is a row
        row = group.mul_row(group.inv(u), idx)
        cand = d + root[row]
        better = cand < dist - 1e-15
        for v in np.flatnonzero(better).tolist():
            dist[v] = cand[v]
            heapq.heappush(heap, (float(cand[v]), v))
    closed = dist
    if space is None:
        space = FiniteProbSpace.uniform(group.n)
    mat = np.empty((group.n, group.n))
    for x in range(group.n):
        row = group.mul_row(group.inv(x), idx)
        mat[x] = closed[row]
    mat = 0.5 * (mat + mat.T)
    return Semimetric(space, mat, validate=False)


def word_metric_root(group: FiniteGroup, generators: Iterable[int]) -> np.ndarray:
    """Unit weights on the symmetrised generating set, a large finite weight
    elsewhere; path closure then yields the word metric."""
    gens = set(generators)
    gens |= {group.inv(g) for g in gens}
    gens.discard(group.identity)
    if not gens:
        raise ValueError("need at least one non-identity generator")
    root = np.full(group.n, float(group.n), dtype=float)
    root[list(gens)] = 1.0
    root[group.identity] = 0.0
    return root


def unipotent_generators(group: SL2Group) -> list[int]:
    """Upper/lower unipotent matrices over 1 and, beyond the prime field, the
    adjoined root; generates SL(2, q) for the tower levels used here."""
    tower, level = group.tower, group.level
    # 1 plus every adjoined square root (index-preserving embeddings make the
    # root of level j+1 sit at index p^(2^j) of any higher level)
    units = [1] + [tower.p ** (2**j) for j in range(level)]
    gens = []
    for u in units:
        gens.append(group.index_of_matrix((1, u, 0, 1)))
        gens.append(group.index_of_matrix((1, 0, u, 1)))
    return gens


# -- experiments -----------------------------------------------------------------


def _build_sl2(q: int, *, group_cap: int = 10**6) -> SL2Group:
    """SL(2, q) for q = p^(2^k); other prime powers are outside the tower."""
    if q < 3:
        raise ValueError(f"q must be an odd prime power, got {q}")
    p = q
    for d in range(2, q + 1):
        if d * d > q:
            break
        if q % d == 0:
            p = d
            break
    m, val = 0, 1
    while val < q:
        val *= p
        m += 1
    if val != q:
        raise ValueError(f"q = {q} is not a power of the prime {p}")
    k = m.bit_length() - 1
    if 2**k != m:
        raise ValueError(f"q = {q} = {p}^{m} is not reachable by quadratic extensions")
    tower = FieldTower(p, k)
    return sl2_enumerate(tower, k, max_order=group_cap)


@dataclass(frozen=True)
class InvariantEntropyRow:
    q: int
    recipe: str
    epsilon: float
    diam: float
    lower_bits: float
    upper_bits: float
    log2_q: float
    hypothesis_ok: bool
    exact: bool


@dataclass(frozen=True)
class InvariantEntropyReport:
    rows: tuple[InvariantEntropyRow, ...]
    empirical_c: float | None


def invariant_metric_entropy_table(qs: Sequence[int], eps: float,
                                   recipes: Sequence[str] = ("word", "discrete"), *,
                                   exact_cap: int = 24, seed: int = 0,
                                   group_cap: int = 10**6) -> InvariantEntropyReport:
    """Entropy of left-invariant semimetrics on SL(2, q), normalised to
    diameter one, against log2 q.

    Rows whose metric fails the diameter > 3 eps hypothesis are flagged, not
    asserted.  The report carries the empirical constant min H / log2 q over
    the valid rows.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for q in qs:
        group = _build_sl2(q, group_cap=group_cap)
        space = FiniteProbSpace.uniform(group.n)
        for recipe in recipes:
            rho = _invariant_metric(group, recipe, rng, space)
            diam = rho.diameter()
            if diam > 0 and abs(diam - 1.0) > 1e-12:
                rho = Semimetric(space, rho.matrix / diam, validate=False)
                diam = 1.0
            res = eps_entropy_bracket(space, rho, eps, exact_cap=exact_cap)
            rows.append(InvariantEntropyRow(
                q=q, recipe=recipe, epsilon=eps, diam=diam,
                lower_bits=res.lower_bits, upper_bits=res.upper_bits,
                log2_q=math.log2(q), hypothesis_ok=diam > 3 * eps, exact=res.exact))
    valid = [r for r in rows if r.hypothesis_ok]
    c_emp = min((r.lower_bits / r.log2_q for r in valid), default=None)
    return InvariantEntropyReport(tuple(rows), c_emp)


def _invariant_metric(group: SL2Group, recipe: str, rng, space) -> Semimetric:
    if recipe == "discrete":
        root = np.ones(group.n)
        root[group.identity] = 0.0
        return left_invariant_semimetric(group, root, space=space)
    if recipe == "word":
        gens = unipotent_generators(group)
        if len(group.subgroup_closure(gens)) != group.n:
            raise AssertionError("unipotent set fails to generate; recipe broken")
        return left_invariant_semimetric(group, word_metric_root(group, gens), space=space)
    if recipe == "random":
        inv_idx = np.array([group.inv(i) for i in range(group.n)])
        raw = rng.uniform(0.2, 1.0, size=group.n)
        root = 0.5 * (raw + raw[inv_idx])
        root[group.identity] = 0.0
        return left_invariant_semimetric(group, root, space=space)
    raise ValueError(f"unknown metric recipe {recipe!r}")


@dataclass(frozen=True)
class TowerGapRow:
    p: int
    level: int
    order: int
    epsilon: float
    lower_bits: float
    upper_bits: float
    log2_order: float
    log2_q: float
    exact: bool


def tower_entropy_profile(p: int, depth: int, eps_grid: Sequence[float], *,
                          atom_cap: int = 10_000, exact_cap: int = 24,
                          horizon: int | None = None) -> list[TowerGapRow]:
    """Per-level entropy of the averaged coordinate metric.

    Level n uses the depth-n system: the self-space of G_n, the dyadic
    coordinate metric of that depth, averaged over the whole of G_n.  Cells of
    equal full prefix have diameter zero, so the upper bracket never exceeds
    log2 |G_n|.
    """
    horizon = depth if horizon is None else horizon
    if horizon > depth:
        raise ValueError("horizon exceeds tower depth")
    full = sl2_tower_action(p, depth, atom_cap=atom_cap)
    rows = []
    for n in range(1, horizon + 1):
        sub = full.truncate(n)
        rho = component_metric(sub, n)
        action = sub.action()
        avg = folner_average(action, range(sub.group.n), rho)
        q_n = p ** (2 ** (n - 1))
        for eps in eps_grid:
            res = eps_entropy_bracket(sub.space, avg, eps, exact_cap=exact_cap)
            rows.append(TowerGapRow(
                p=p, level=n, order=sub.group.n, epsilon=eps,
                lower_bits=res.lower_bits, upper_bits=res.upper_bits,
                log2_order=math.log2(sub.group.n), log2_q=math.log2(q_n),
                exact=res.exact))
    return rows


@dataclass(frozen=True)
class TransversalGapReport:
    rows: tuple[TowerGapRow, ...]
    empirical_c: float | None


def transversal_entropy_table(qs: Sequence[int], eps: float = 0.25, *,
                              exact_cap: int = 150,
                              group_cap: int = 10**6) -> TransversalGapReport:
    """Entropy at threshold eps^2 of the group-averaged transversal cut metric
    on SL(2, q), against log2 q.

    The partition labels positions along unipotent orbits, its cut metric is
    averaged over the whole group (an invariant semimetric of mean at least
    (p-1)/2p), and the entropy bracket is reported per q.
    """
    rows = []
    for q in qs:
        group = _build_sl2(q, group_cap=group_cap)
        p = group.tower.p
        action = ActionTable.left_translation(group)
        g0 = group.index_of_matrix((1, 1, 0, 1))
        part = transversal_partition(group, g0, order=p, space=action.space)
        rho = cut_semimetric(part)
        avg = folner_average(action, range(group.n), rho)
        res = eps_entropy_bracket(action.space, avg, eps * eps, exact_cap=exact_cap)
        rows.append(TowerGapRow(
            p=p, level=group.level + 1, order=group.n, epsilon=eps * eps,
            lower_bits=res.lower_bits, upper_bits=res.upper_bits,
            log2_order=math.log2(group.n), log2_q=math.log2(q), exact=res.exact))
    c_emp = min((r.lower_bits / r.log2_q for r in rows), default=None)
    return TransversalGapReport(tuple(rows), c_emp)


@dataclass(frozen=True)
class GrowthTrialRow:
    p: int
    trial: int
    set_size: int
    square_size: int
    cube_size: int
    generates: bool
    saturated: bool


@dataclass(frozen=True)
class GrowthReport:
    rows: tuple[GrowthTrialRow, ...]
    fitted_exponent: float | None  # log-log slope of |A^3| against |A|


def triple_product_experiment(ps: Sequence[int], trials: int = 20, *,
                              seed: int = 0) -> GrowthReport:
    """Random generating sets of SL(2, p): exact product-set growth, with the
    log-log slope fitted over the unsaturated trials."""
    from .algebra import triple_product_size

    rng = np.random.default_rng(seed)
    rows = []
    for p in ps:
        tower = FieldTower(p, 0)
        group = sl2_enumerate(tower, 0)
        for t in range(trials):
            subset = _random_generating_set(group, rng)
            g = triple_product_size(group, subset)
            rows.append(GrowthTrialRow(p, t, g.size, g.square, g.cube,
                                       g.generates, g.cube == group.n))
    pts = [(math.log2(r.set_size), math.log2(r.cube_size))
           for r in rows if not r.saturated and r.set_size > 1]
    slope = None
    if len({x for x, _ in pts}) >= 2:
        xs = np.array([x for x, _ in pts])
        ys = np.array([y for _, y in pts])
        slope = float(np.polyfit(xs, ys, 1)[0])
    return GrowthReport(tuple(rows), slope)


def _random_generating_set(group: FiniteGroup, rng) -> list[int]:
    while True:
        size = int(rng.integers(2, 6))
        subset = sorted(set(rng.integers(0, group.n, size=size).tolist()))
        if len(subset) < 2:
            continue
        if len(group.subgroup_closure(subset)) == group.n:
            return subset
