"""Epsilon-entropy of a semimetric on a finite probability space.

H_eps = log2 k where k is the least number of cells of diameter < eps that
cover everything except an exceptional set of mass < eps.  Both inequalities
are strict.  Three routes are provided:

* `eps_entropy_exact`      -- minimal k, by decomposing the "distance < eps"
                              graph into connected components, computing per
                              component the trade-off between removed mass and
                              clique-cover size, and merging the trade-offs
                              under the global mass budget;
* `eps_entropy_greedy_upper`  -- mass-greedy ball cover, upper bound;
* `eps_entropy_packing_lower` -- separated-set packing, lower bound.

Strict threshold comparisons carry a guard band of 1e-12 so that float mass
sums sitting on a boundary (six atoms of 1/24 against eps = 0.25, say) behave
like their exact rational values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SearchBudgetError
from .spaces import FiniteProbSpace, Semimetric

THRESHOLD_SLACK = 1e-12


def strictly_below(a: float, b: float) -> bool:
    """Strict threshold comparison with the solver's guard band."""
    return a < b - THRESHOLD_SLACK


@dataclass(frozen=True)
class EpsEntropyResult:
    """Bracket (or exact value) of an epsilon-entropy computation.

    `witness`, when present, is (X0, C1, ..., Ck): the exceptional atom set
    followed by the covering cells, matching k = k_upper.
    """

    epsilon: float
    lower_bits: float
    upper_bits: float
    exact: bool
    k_lower: int
    k_upper: int
    witness: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.lower_bits > self.upper_bits + 1e-12:
            raise ValueError("lower bound exceeds upper bound")
        if self.exact and self.k_lower != self.k_upper:
            raise ValueError("exact result must have equal cell counts")

    @property
    def bits(self) -> float:
        if not self.exact:
            raise ValueError("bracket result has no single value; use lower/upper")
        return self.upper_bits


def _check_eps(eps: float) -> None:
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"epsilon must be in (0, 1], got {eps}")


def _bits(k: int) -> float:
    return math.log2(max(k, 1))


def eps_entropy_packing_lower(space: FiniteProbSpace, rho: Semimetric,
                              eps: float) -> EpsEntropyResult:
    """Greedy separated set, largest masses first; members light enough to hide
    in the exceptional set (smallest masses, total < eps) are discounted."""
    _check_eps(eps)
    n = space.n
    m = rho.matrix
    masses = space.masses
    close = m < eps - THRESHOLD_SLACK
    order = np.lexsort((np.arange(n), -masses))
    chosen: list[int] = []
    for i in order.tolist():
        if all(not close[i, s] for s in chosen):
            chosen.append(i)
    by_mass = sorted(chosen, key=lambda s: (masses[s], s))
    removable, acc = 0, 0.0
    for s in by_mass:
        if strictly_below(acc + masses[s], eps):
            acc += masses[s]
            removable += 1
        else:
            break
    k = max(len(chosen) - removable, 1)
    return EpsEntropyResult(eps, _bits(k), _bits(n), False, k, n, None)


def eps_entropy_greedy_upper(space: FiniteProbSpace, rho: Semimetric,
                             eps: float) -> EpsEntropyResult:
    """Cover by balls of radius eps/2 (shrunk by 1e-9 against float boundary
    ties) around centres of maximal uncovered mass; stop once the residual
    mass fits the exceptional set.  A residual of diameter < eps is emitted as
    one final cell."""
    _check_eps(eps)
    n = space.n
    m = rho.matrix
    masses = space.masses
    radius = 0.5 * eps * (1.0 - 1e-9)
    ball = m <= radius
    uncovered = np.ones(n, dtype=bool)
    cells: list[tuple[int, ...]] = []
    while True:
        res_mass = float(masses[uncovered].sum())
        if strictly_below(res_mass, eps):
            break
        idx = np.flatnonzero(uncovered)
        sub = m[np.ix_(idx, idx)]
        if not idx.size or sub.max(initial=0.0) < eps - THRESHOLD_SLACK:
            cells.append(tuple(idx.tolist()))
            uncovered[idx] = False
            break
        scores = ball[:, uncovered] @ masses[uncovered]
        centre = int(np.argmax(scores))
        new = uncovered & ball[centre]
        cells.append(tuple(np.flatnonzero(new).tolist()))
        uncovered &= ~ball[centre]
    x0 = tuple(np.flatnonzero(uncovered).tolist())
    k = len(cells)
    return EpsEntropyResult(eps, 0.0, _bits(k), False, 1, k, (x0, *cells))


def _components(close: np.ndarray) -> list[list[int]]:
    n = close.shape[0]
    seen = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in np.flatnonzero(close[v] & ~seen).tolist():
                seen[u] = True
                stack.append(u)
        comps.append(sorted(comp))
    return comps


def _greedy_cover_count(verts: list[int], close: np.ndarray) -> int:
    cliques: list[list[int]] = []
    for v in verts:
        for cl in cliques:
            if all(close[v, u] for u in cl):
                cl.append(v)
                break
        else:
            cliques.append([v])
    return len(cliques)


class _Budget:
    def __init__(self, nodes: int):
        self.left = nodes

    def spend(self) -> None:
        self.left -= 1
        if self.left < 0:
            raise SearchBudgetError("exact epsilon-entropy search exceeded its node budget")


def _component_frontier(verts: list[int], close: np.ndarray, masses: np.ndarray,
                        mass_eps: float, budget: _Budget):
    """Pareto trade-offs (mass removed, cliques used) for one component.

    Returns entries (mass, k, removed atoms, cliques); every entry has minimal
    mass for its clique count and counts run down from the zero-removal cover.
    """
    sub = close[np.ix_(verts, verts)]
    if sub.all():
        total = float(masses[verts].sum())
        entries = [(0.0, 1, (), (tuple(verts),))]
        if strictly_below(total, mass_eps):
            entries.append((total, 0, tuple(verts), ()))
        return entries
    # most-constrained vertices first: fewest close neighbours inside the component
    order = sorted(verts, key=lambda v: (int(close[v, verts].sum()), v))
    ub = _greedy_cover_count(order, close)
    best: dict[int, tuple[float, tuple, tuple]] = {}

    cliques: list[list[int]] = []
    removed: list[int] = []

    def record(rmass: float) -> None:
        k = len(cliques)
        cur = best.get(k)
        if cur is None or rmass < cur[0] - 1e-18:
            best[k] = (rmass, tuple(removed),
                       tuple(tuple(cl) for cl in cliques))

    def dfs(i: int, rmass: float) -> None:
        budget.spend()
        if len(cliques) > ub:
            return
        if i == len(order):
            record(rmass)
            return
        v = order[i]
        for cl in cliques:
            if all(close[v, u] for u in cl):
                cl.append(v)
                dfs(i + 1, rmass)
                cl.pop()
        if len(cliques) < ub:
            cliques.append([v])
            dfs(i + 1, rmass)
            cliques.pop()
        if strictly_below(rmass + masses[v], mass_eps):
            removed.append(v)
            dfs(i + 1, rmass + float(masses[v]))
            removed.pop()

    dfs(0, 0.0)
    entries = [(m, k, rem, cls) for k, (m, rem, cls) in best.items()]
    # keep the Pareto frontier: ascending k, strictly decreasing mass
    entries.sort(key=lambda e: e[1])
    frontier = []
    best_mass = math.inf
    for m, k, rem, cls in sorted(entries, key=lambda e: e[1]):
        if m < best_mass - 1e-18:
            frontier.append((m, k, rem, cls))
            best_mass = m
    frontier.sort(key=lambda e: e[0])
    return frontier


def eps_entropy_exact(space: FiniteProbSpace, rho: Semimetric, eps: float, *,
                      cap: int = 24, mass_eps: float | None = None,
                      node_budget: int = 5_000_000) -> EpsEntropyResult:
    """Minimal k over all decompositions into an exceptional set of mass <
    mass_eps (default eps) and cells of diameter < eps.

    `mass_eps` decouples the two thresholds; it exists so the scale
    equivariance of the diameter constraint can be tested on its own.
    """
    _check_eps(eps)
    n = space.n
    if n > cap:
        raise ValueError(f"exact solver instance has {n} atoms, over the cap {cap}")
    budget_eps = eps if mass_eps is None else mass_eps
    masses = space.masses
    m = rho.matrix
    if mass_eps is None:
        low = eps_entropy_packing_lower(space, rho, eps)
        up = eps_entropy_greedy_upper(space, rho, eps)
        if low.k_lower == up.k_upper:
            k = low.k_lower
            return EpsEntropyResult(eps, _bits(k), _bits(k), True, k, k, up.witness)
    close = m < eps - THRESHOLD_SLACK
    np.fill_diagonal(close, True)
    budget = _Budget(node_budget)
    frontiers = [_component_frontier(comp, close, masses, budget_eps, budget)
                 for comp in _components(close)]
    # knapsack over components: per clique count keep the least removed mass
    states: dict[int, tuple[float, list]] = {0: (0.0, [])}
    for frontier in frontiers:
        nxt: dict[int, tuple[float, list]] = {}
        for k0, (m0, picks) in states.items():
            for m1, k1, rem, cls in frontier:
                tot = m0 + m1
                if not strictly_below(tot, budget_eps):
                    continue
                k = k0 + k1
                cur = nxt.get(k)
                if cur is None or tot < cur[0] - 1e-18:
                    nxt[k] = (tot, picks + [(rem, cls)])
        # drop dominated clique counts
        states = {}
        best_mass = math.inf
        for k in sorted(nxt):
            tot, picks = nxt[k]
            if tot < best_mass - 1e-18:
                states[k] = (tot, picks)
                best_mass = tot
    k_best = min(states)
    _, picks = states[k_best]
    x0: list[int] = []
    cells: list[tuple[int, ...]] = []
    for rem, cls in picks:
        x0.extend(rem)
        cells.extend(cls)
    cells.sort(key=lambda c: c[0])
    witness = (tuple(sorted(x0)), *cells)
    k = max(k_best, 1)
    return EpsEntropyResult(eps, _bits(k), _bits(k), True, k, k, witness)


def eps_entropy_bracket(space: FiniteProbSpace, rho: Semimetric, eps: float, *,
                        exact_cap: int = 24,
                        node_budget: int = 5_000_000) -> EpsEntropyResult:
    """Exact value when the space fits under `exact_cap`, packing/greedy
    bracket otherwise."""
    if space.n <= exact_cap:
        return eps_entropy_exact(space, rho, eps, cap=exact_cap, node_budget=node_budget)
    low = eps_entropy_packing_lower(space, rho, eps)
    up = eps_entropy_greedy_upper(space, rho, eps)
    if low.k_lower == up.k_upper:
        k = low.k_lower
        return EpsEntropyResult(eps, _bits(k), _bits(k), True, k, k, up.witness)
    return EpsEntropyResult(eps, low.lower_bits, up.upper_bits, False,
                            low.k_lower, up.k_upper, up.witness)


def check_decomposition(space: FiniteProbSpace, rho: Semimetric, eps: float,
                        witness, *, mass_eps: float | None = None) -> bool:
    """Validate a witness against the decomposition rules (same guard band)."""
    budget_eps = eps if mass_eps is None else mass_eps
    x0, *cells = witness
    all_atoms = sorted(x0) + sorted(a for c in cells for a in c)
    if sorted(all_atoms) != list(range(space.n)):
        return False
    if not (len(x0) == 0 or strictly_below(float(space.masses[list(x0)].sum()), budget_eps)):
        return False
    for cell in cells:
        if not cell:
            return False
        idx = list(cell)
        if rho.matrix[np.ix_(idx, idx)].max(initial=0.0) >= eps - THRESHOLD_SLACK:
            return False
    return True


def witness_to_csv(result: EpsEntropyResult, path) -> None:
    """Atom -> cell id table; cell 0 is the exceptional set."""
    import csv as _csv

    if result.witness is None:
        raise ValueError("result carries no witness")
    with open(path, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["atom", "cell"])
        assignments: list[tuple[int, int]] = []
        for cell_id, atoms in enumerate(result.witness):
            assignments.extend((a, cell_id) for a in atoms)
        for atom, cell_id in sorted(assignments):
            w.writerow([atom, cell_id])
