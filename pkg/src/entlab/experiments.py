"""Seeded experiment suites and CSV output shared by the CLI and the tests.

Every CSV begins with a single comment line echoing the configuration and the
package version, then a header row; bodies are deterministic functions of
(config, seed).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .algebra import FiniteGroup, sl2_enumerate, FieldTower
from .constructions import difference_graph, greedy_coloring, separated_family
from .dynamics import ActionTable, folner_average, translate_semimetric
from .entropy import (eps_entropy_exact, eps_entropy_greedy_upper,
                      eps_entropy_packing_lower)
from .spaces import (FiniteProbSpace, Partition, Semimetric, combine,
                     cut_semimetric, l1_norm, m_norm, refine, shannon_entropy)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], config: dict) -> None:
    echo = " ".join(f"{k}={v}" for k, v in sorted(config.items()))
    with open(path, "w", newline="") as fh:
        fh.write(f"# config: {echo} | version={__version__}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    return v


# -- random instances ------------------------------------------------------------


def random_space(rng, n: int, uniform: bool = False) -> FiniteProbSpace:
    if uniform:
        return FiniteProbSpace.uniform(n)
    masses = rng.dirichlet(np.full(n, 2.0))
    masses = np.maximum(masses, 1e-4)
    masses = masses / masses.sum()
    return FiniteProbSpace(masses)


def random_partition(rng, space: FiniteProbSpace, max_cells: int) -> Partition:
    m = int(rng.integers(2, max_cells + 1))
    labels = rng.integers(0, m, size=space.n)
    return Partition(space, labels)


def random_cut_combination(rng, space: FiniteProbSpace, k: int,
                           max_cells: int = 4) -> tuple[Semimetric, list[Partition], np.ndarray]:
    """Convex combination of k random cut semimetrics (all values <= 1)."""
    parts = [random_partition(rng, space, max_cells) for _ in range(k)]
    weights = rng.dirichlet(np.full(k, 1.5))
    weights = np.maximum(weights, 1e-3)
    weights = weights / weights.sum()
    rho = combine(weights, [cut_semimetric(p) for p in parts])
    return rho, parts, weights


# -- entropy sandwich -------------------------------------------------------------


@dataclass(frozen=True)
class SuiteResult:
    name: str
    trials: int
    violations: int
    rows: tuple

    @property
    def passed(self) -> bool:
        return self.violations == 0


def sandwich_suite(trials: int = 500, eps_grid: Sequence[float] = (0.05, 0.1, 0.2, 0.3, 0.5),
                   *, seed: int = 0, max_atoms: int = 12) -> SuiteResult:
    """packing <= exact <= greedy on random cut-combination instances."""
    rng = np.random.default_rng(seed)
    rows, violations = [], 0
    for t in range(trials):
        n = int(rng.integers(3, max_atoms + 1))
        space = random_space(rng, n, uniform=bool(rng.integers(0, 2)))
        rho, _, _ = random_cut_combination(rng, space, int(rng.integers(1, 5)))
        for eps in eps_grid:
            low = eps_entropy_packing_lower(space, rho, eps)
            exact = eps_entropy_exact(space, rho, eps)
            up = eps_entropy_greedy_upper(space, rho, eps)
            ok = low.k_lower <= exact.k_upper <= up.k_upper
            violations += not ok
            rows.append((t, n, eps, low.lower_bits, exact.upper_bits, up.upper_bits, ok))
    return SuiteResult("sandwich", trials * len(eps_grid), violations, tuple(rows))


# -- lemma suites -----------------------------------------------------------------


def lowerbound_lemma_suite(trials: int = 200, *, seed: int = 0,
                           max_atoms: int = 12) -> SuiteResult:
    """Convex combination rho~ of k <= 4 semimetrics bounded by one: some
    component satisfies H_{2 sqrt(eps)}(rho_m) <= H_eps(rho~)."""
    rng = np.random.default_rng(seed)
    rows, violations = [], 0
    for t in range(trials):
        n = int(rng.integers(3, max_atoms + 1))
        space = random_space(rng, n, uniform=bool(rng.integers(0, 2)))
        k = int(rng.integers(1, 5))
        metrics = [random_cut_combination(rng, space, int(rng.integers(1, 4)))[0]
                   for _ in range(k)]
        weights = rng.dirichlet(np.full(k, 1.0))
        weights = np.maximum(weights, 1e-3)
        weights = weights / weights.sum()
        mix = combine(weights, metrics)
        eps = float(rng.uniform(0.02, 0.25))
        h_mix = eps_entropy_exact(space, mix, eps)
        h_parts = [eps_entropy_exact(space, m, min(2 * math.sqrt(eps), 1.0))
                   for m in metrics]
        ok = any(h.k_upper <= h_mix.k_upper for h in h_parts)
        violations += not ok
        rows.append((t, n, k, eps, h_mix.upper_bits,
                     min(h.upper_bits for h in h_parts), ok))
    return SuiteResult("lowerbound", trials, violations, tuple(rows))


def partitions_lemma_suite(trials: int = 200, *, seed: int = 0,
                           max_atoms: int = 12) -> SuiteResult:
    """H(join)/k against the entropy of the averaged cut metric plus the
    explicit epsilon terms, base-2 throughout."""
    rng = np.random.default_rng(seed)
    rows, violations = [], 0
    for t in range(trials):
        n = int(rng.integers(3, max_atoms + 1))
        space = random_space(rng, n, uniform=bool(rng.integers(0, 2)))
        k = int(rng.integers(1, 5))
        m_cells = int(rng.integers(2, 5))
        parts = [random_partition(rng, space, m_cells) for _ in range(k)]
        joined = refine(*parts)
        rho = combine(np.full(k, 1.0 / k), [cut_semimetric(p) for p in parts])
        eps = float(rng.uniform(0.01, 0.49))
        h_eps = eps_entropy_exact(space, rho, eps).upper_bits
        m_bound = max(p.m for p in parts)
        lhs = shannon_entropy(joined) / k
        rhs = (h_eps / k + 2 * eps * math.log2(m_bound)
               - eps * math.log2(eps) - (1 - eps) * math.log2(1 - eps) + 1.0 / k)
        ok = lhs <= rhs + 1e-9
        violations += not ok
        rows.append((t, n, k, m_bound, eps, lhs, rhs, ok))
    return SuiteResult("partitions", trials, violations, tuple(rows))


def mnorm_lemma_suite(trials: int = 100, *, seed: int = 0,
                      max_atoms: int = 8) -> SuiteResult:
    """Pairs with m-norm distance below eps^2/32: the eps-cover of the first
    is never finer than the eps/4-cover of the second (cell counts)."""
    rng = np.random.default_rng(seed)
    rows, violations = [], 0
    done = 0
    while done < trials:
        n = int(rng.integers(3, max_atoms + 1))
        space = random_space(rng, n, uniform=bool(rng.integers(0, 2)))
        rho1, _, _ = random_cut_combination(rng, space, int(rng.integers(1, 4)))
        eps = float(rng.uniform(0.15, 0.8))
        bound = eps * eps / 32.0
        bump, _, _ = random_cut_combination(rng, space, 1)
        delta = float(rng.uniform(0.05, 0.9)) * bound  # keeps the hypothesis satisfiable
        rho2 = Semimetric(space, rho1.matrix + delta * bump.matrix, validate=False)
        dist = m_norm(space, rho1.matrix - rho2.matrix)
        if dist >= bound:
            continue
        k1 = eps_entropy_exact(space, rho1, eps).k_upper
        k2 = eps_entropy_exact(space, rho2, eps / 4.0).k_upper
        ok = k1 <= k2
        violations += not ok
        rows.append((done, n, eps, dist, bound, k1, k2, ok))
        done += 1
    return SuiteResult("mnorm", trials, violations, tuple(rows))


# -- averaging identities -----------------------------------------------------------


def _random_action_instance(rng) -> tuple[FiniteGroup, ActionTable, Semimetric]:
    """Measure-preserving instance: disjoint quotient orbits of a small group,
    orbit masses random but constant along each orbit."""
    kind = int(rng.integers(0, 3))
    if kind == 0:
        group = FiniteGroup.cyclic(int(rng.integers(2, 9)))
    elif kind == 1:
        group = FiniteGroup.direct_product(
            FiniteGroup.cyclic(int(rng.integers(2, 4))),
            FiniteGroup.cyclic(int(rng.integers(2, 4))))
    else:
        group = sl2_enumerate(FieldTower(3, 0), 0)
    # atoms: a few coset spaces G/H for random cyclic subgroups H
    orbits: list[list[tuple[int, ...]]] = []
    for _ in range(int(rng.integers(1, 4))):
        h = group.subgroup_closure([int(rng.integers(0, group.n))])
        cosets: list[tuple[int, ...]] = []
        seen = set()
        for g in range(group.n):
            if g in seen:
                continue
            coset = tuple(sorted(group.mul(x, g) for x in h))
            seen.update(coset)
            cosets.append(coset)
        orbits.append(cosets)
    n_atoms = sum(len(o) for o in orbits)
    weights = rng.dirichlet(np.full(len(orbits), 2.0))
    masses = np.concatenate([np.full(len(o), w / len(o))
                             for o, w in zip(orbits, weights)])
    space = FiniteProbSpace(masses / masses.sum())
    atom_of: dict[tuple[int, int], int] = {}
    base = 0
    lookup = []
    for oi, cosets in enumerate(orbits):
        index_of = {c: base + i for i, c in enumerate(cosets)}
        lookup.append((cosets, index_of))
        base += len(cosets)

    def act(g: int, atom: int) -> int:
        for cosets, index_of in lookup:
            first = index_of[cosets[0]]
            if first <= atom < first + len(cosets):
                coset = cosets[atom - first]
                moved = tuple(sorted(group.mul(x, group.inv(g)) for x in coset))
                return index_of[moved]
        raise AssertionError

    action = ActionTable.from_function(group, space, act)
    rho, _, _ = random_cut_combination(rng, space, int(rng.integers(1, 4)))
    return group, action, rho


def averaging_suite(trials: int = 100, *, seed: int = 0) -> SuiteResult:
    """Block decomposition of the window average and L1 preservation, both to
    1e-9, on random measure-preserving instances."""
    rng = np.random.default_rng(seed)
    rows, violations = [], 0
    for t in range(trials):
        group, action, rho = _random_action_instance(rng)
        size = int(rng.integers(1, group.n + 1))
        window = sorted(rng.choice(group.n, size=size, replace=False).tolist())
        cuts = sorted(rng.choice(len(window), size=int(rng.integers(0, min(3, len(window)))),
                                 replace=False).tolist())
        bounds = [0] + [c + 1 for c in cuts if 0 < c + 1 < len(window)] + [len(window)]
        blocks = [tuple(window[a:b]) for a, b in zip(bounds, bounds[1:]) if a < b]
        avg = folner_average(action, window, rho)
        recombined = np.zeros_like(avg.matrix)
        for block in blocks:
            part = folner_average(action, block, rho)
            recombined += (len(block) / len(window)) * part.matrix
        decomp_err = float(np.abs(avg.matrix - recombined).max())
        l1_err = abs(l1_norm(avg) - l1_norm(rho))
        translated = [l1_norm(translate_semimetric(action, g, rho)) for g in window]
        mean_err = abs(l1_norm(avg) - float(np.mean(translated)))
        ok = decomp_err <= 1e-9 and l1_err <= 1e-9 and mean_err <= 1e-9
        violations += not ok
        rows.append((t, group.name, action.space.n, len(window), len(blocks),
                     decomp_err, l1_err, ok))
    return SuiteResult("averaging", trials, violations, tuple(rows))


# -- coloring windows ----------------------------------------------------------------


def coloring_suite(windows: int = 50, *, seed: int = 0) -> SuiteResult:
    """Random (window, forbidden set) pairs in Z, Z^2 and SL(2,3): proper
    coloring, block bound 2|K|+1, exhaustive separation check."""
    rng = np.random.default_rng(seed)
    sl2 = sl2_enumerate(FieldTower(3, 0), 0)
    ambients = [
        ("Z", lambda a, b: a + b, lambda a: -a,
         lambda: list(range(-int(rng.integers(3, 10)), int(rng.integers(4, 12))))),
        ("Z2", lambda a, b: (a[0] + b[0], a[1] + b[1]), lambda a: (-a[0], -a[1]),
         lambda: [(x, y) for x in range(int(rng.integers(2, 5)))
                  for y in range(int(rng.integers(2, 5)))]),
        ("SL(2,3)", sl2.mul, sl2.inv,
         lambda: sorted(rng.choice(sl2.n, size=int(rng.integers(6, 20)),
                                   replace=False).tolist())),
    ]
    rows, violations = [], 0
    for t in range(windows):
        name, mul, inv, make_window = ambients[t % len(ambients)]
        window = make_window()
        identity = mul(window[0], inv(window[0]))
        pool = {mul(g, inv(h)) for g in window for h in window} - {identity}
        k_size = int(rng.integers(1, 4))
        pool_list = sorted(pool, key=repr)
        picks = rng.choice(len(pool_list), size=min(k_size, len(pool_list)),
                           replace=False)
        forbidden = set()
        for i in picks.tolist():
            forbidden.add(pool_list[i])
            forbidden.add(inv(pool_list[i]))
        graph = difference_graph(window, forbidden, mul, inv)
        colors = greedy_coloring(graph)
        proper = all(colors[u] != colors[v] for u in graph.vertices
                     for v in graph.adjacency[u])
        n_colors = len(set(colors.values()))
        bound = 2 * len(forbidden) + 1
        degree_ok = graph.max_degree() <= 2 * len(forbidden)
        fam = separated_family(window, forbidden, mul, inv)
        try:
            fam.check(mul, inv)
            separated = True
        except AssertionError:
            separated = False
        ok = proper and n_colors <= bound and degree_ok and separated
        violations += not ok
        rows.append((t, name, len(window), len(forbidden), graph.max_degree(),
                     n_colors, bound, ok))
    return SuiteResult("coloring", windows, violations, tuple(rows))
