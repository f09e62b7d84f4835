"""Finite group actions on finite spaces and averaged-metric entropy.

Conventions: an action table stores one atom permutation per group element
with perm[g][x] = index of g.x; the pullback of a semimetric is
(g^-1 rho)(x, y) = rho(gx, gy); the Bernoulli shift acts by
(g.x)(h) = x(g^-1 h).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .algebra import FiniteGroup
from .entropy import EpsEntropyResult, eps_entropy_bracket
from .errors import BudgetError
from .spaces import (FiniteProbSpace, Partition, Semimetric, _require_same_space,
                     refine, shannon_entropy)

# full homomorphism validation up to this group size, sampled above
_FULL_CHECK_GROUP = 1000


class ActionTable:
    """Measure-preserving action of a finite group on a finite space."""

    def __init__(self, group: FiniteGroup, space: FiniteProbSpace,
                 perms: np.ndarray, validate: bool = True):
        perms = np.asarray(perms, dtype=np.int32)
        if perms.shape != (group.n, space.n):
            raise ValueError("need one permutation row per group element")
        self.group = group
        self.space = space
        self.perms = perms
        if validate:
            self._validate()

    def _validate(self) -> None:
        n, g_n = self.space.n, self.group.n
        ident = np.arange(n)
        for row in self.perms:
            if not np.array_equal(np.sort(row), ident):
                raise ValueError("action row is not a permutation")
        if not np.array_equal(self.perms[self.group.identity], ident):
            raise ValueError("identity must act trivially")
        for row in self.perms:
            if not np.allclose(self.space.masses[row], self.space.masses, atol=1e-12):
                raise ValueError("action does not preserve atom masses")
        if g_n <= _FULL_CHECK_GROUP:
            hs = np.arange(g_n)
            for g in range(g_n):
                lhs = self.perms[self.group.mul_row(g, hs)]
                rhs = self.perms[g][self.perms[hs]]
                if not np.array_equal(lhs, rhs):
                    raise ValueError(f"homomorphism law fails at element {g}")
        else:
            rng = np.random.default_rng(0)
            for g, h in rng.integers(0, g_n, size=(256, 2)).tolist():
                gh = self.group.mul(g, h)
                if not np.array_equal(self.perms[gh], self.perms[g][self.perms[h]]):
                    raise ValueError(f"homomorphism law fails at sampled pair ({g},{h})")

    @classmethod
    def from_function(cls, group: FiniteGroup, space: FiniteProbSpace,
                      act: Callable[[int, int], int], validate: bool = True) -> "ActionTable":
        perms = np.array([[act(g, x) for x in range(space.n)]
                          for g in range(group.n)], dtype=np.int32)
        return cls(group, space, perms, validate=validate)

    @classmethod
    def left_translation(cls, group: FiniteGroup, validate: bool = True) -> "ActionTable":
        """The group acting on itself (atoms = elements, uniform mass)."""
        space = FiniteProbSpace.uniform(group.n)
        idx = np.arange(group.n)
        perms = np.vstack([group.mul_row(g, idx) for g in range(group.n)]).astype(np.int32)
        return cls(group, space, perms, validate=validate)

    def permutation(self, g: int) -> np.ndarray:
        return self.perms[g]

    def __repr__(self) -> str:
        return f"ActionTable({self.group.name} on {self.space.n} atoms)"


@dataclass
class FolnerFamily:
    """Nested finite windows F_1 <= ... <= F_N, optionally with disjoint
    blocks partitioning each window."""

    group: FiniteGroup
    sets: list[tuple[int, ...]]
    blocks: list[list[tuple[int, ...]]] | None = None

    def __post_init__(self):
        self.sets = [tuple(sorted(set(s))) for s in self.sets]
        if not self.sets or any(not s for s in self.sets):
            raise ValueError("windows must be non-empty")
        for a, b in zip(self.sets, self.sets[1:]):
            if not set(a) <= set(b):
                raise ValueError("windows must be nested")
        if self.blocks is not None:
            if len(self.blocks) != len(self.sets):
                raise ValueError("need one block list per window")
            cooked = []
            for window, blocks in zip(self.sets, self.blocks):
                blocks = [tuple(sorted(set(b))) for b in blocks]
                flat = [g for b in blocks for g in b]
                if len(flat) != len(set(flat)) or set(flat) != set(window):
                    raise ValueError("blocks must partition their window")
                cooked.append(blocks)
            self.blocks = cooked

    @property
    def horizon(self) -> int:
        return len(self.sets)

    def window(self, n: int) -> tuple[int, ...]:
        """1-based window access, F_1 ... F_horizon."""
        if not 1 <= n <= self.horizon:
            raise ValueError(f"window index {n} outside horizon {self.horizon}")
        return self.sets[n - 1]


def translate_semimetric(action: ActionTable, g: int, rho: Semimetric) -> Semimetric:
    """(g^-1 rho)(x, y) = rho(gx, gy)."""
    _require_same_space(action.space, rho.space)
    p = action.perms[g]
    return Semimetric(rho.space, rho.matrix[np.ix_(p, p)], validate=False)


def folner_average(action: ActionTable, window: Iterable[int],
                   rho: Semimetric) -> Semimetric:
    """Arithmetic mean of the pullbacks of rho over the window."""
    _require_same_space(action.space, rho.space)
    window = list(window)
    if not window:
        raise ValueError("cannot average over an empty window")
    acc = np.zeros_like(rho.matrix)
    for g in window:
        p = action.perms[g]
        acc += rho.matrix[np.ix_(p, p)]
    acc /= len(window)
    return Semimetric(rho.space, acc, validate=False)


def averaged_metric_entropy(action: ActionTable, folner: FolnerFamily,
                            rho: Semimetric, n: int, eps: float, *,
                            exact_cap: int = 24) -> EpsEntropyResult:
    """Epsilon-entropy of the window-n average (exact or bracketed by size)."""
    avg = folner_average(action, folner.window(n), rho)
    return eps_entropy_bracket(action.space, avg, eps, exact_cap=exact_cap)


def averaged_entropy_profile(action: ActionTable, folner: FolnerFamily,
                             rho: Semimetric, eps_grid: Sequence[float],
                             horizon: int | None = None, *,
                             exact_cap: int = 24) -> list[dict]:
    """Rows (n, |F_n|, epsilon, lower_bits, upper_bits, exact) over the grid."""
    horizon = folner.horizon if horizon is None else horizon
    rows = []
    for n in range(1, horizon + 1):
        window = folner.window(n)
        avg = folner_average(action, window, rho)
        for eps in eps_grid:
            res = eps_entropy_bracket(action.space, avg, eps, exact_cap=exact_cap)
            rows.append({"n": n, "window_size": len(window), "epsilon": eps,
                         "lower_bits": res.lower_bits, "upper_bits": res.upper_bits,
                         "exact": res.exact})
    return rows


def refined_orbit_partition(action: ActionTable, window: Iterable[int],
                            part: Partition) -> Partition:
    """Common refinement of the pullbacks g^-1 xi, g in the window, where
    (g^-1 xi)(x) = xi(gx)."""
    _require_same_space(action.space, part.space)
    window = list(window)
    if not window:
        raise ValueError("window must be non-empty")
    pulled = [Partition(part.space, part.labels[action.perms[g]]) for g in window]
    return refine(*pulled)


def block_entropy_rate(action: ActionTable, part: Partition,
                       blocks: Sequence[Iterable[int]]) -> float:
    """min over blocks of H(join of pullbacks over the block) / |block|, bits
    per group element."""
    blocks = [list(b) for b in blocks]
    if not blocks or any(not b for b in blocks):
        raise ValueError("need non-empty blocks")
    return min(shannon_entropy(refined_orbit_partition(action, b, part)) / len(b)
               for b in blocks)


@dataclass(frozen=True)
class SequentialEntropyRow:
    n: int
    rate: float
    per_block: tuple[float, ...]


def sequential_entropy_profile(action: ActionTable, part: Partition,
                               folner: FolnerFamily,
                               horizon: int | None = None) -> list[SequentialEntropyRow]:
    """Finite-horizon table of block entropy rates; no extrapolation."""
    if folner.blocks is None:
        raise ValueError("the family carries no blocks")
    horizon = folner.horizon if horizon is None else horizon
    if horizon > folner.horizon:
        raise ValueError("horizon exceeds the family")
    rows = []
    for n in range(1, horizon + 1):
        blocks = folner.blocks[n - 1]
        vals = tuple(
            shannon_entropy(refined_orbit_partition(action, b, part)) / len(b)
            for b in blocks)
        rows.append(SequentialEntropyRow(n, min(vals), vals))
    return rows


@dataclass
class BernoulliShift:
    space: FiniteProbSpace
    action: ActionTable
    coordinate_partition: Partition


def bernoulli_shift(group: FiniteGroup, alphabet: int, *,
                    cap: int = 2**20) -> BernoulliShift:
    """Shift action on alphabet-valued functions on the group with uniform
    product measure; the partition by the value at the identity comes along."""
    if alphabet < 1:
        raise ValueError("alphabet must have at least one symbol")
    n_atoms = alphabet ** group.n
    if n_atoms > cap:
        raise BudgetError(f"{alphabet}^{group.n} = {n_atoms} atoms exceed the cap {cap}")
    space = FiniteProbSpace.uniform(n_atoms)
    weights = alphabet ** np.arange(group.n, dtype=np.int64)
    digits = (np.arange(n_atoms, dtype=np.int64)[:, None] // weights[None, :]) % alphabet
    perms = np.empty((group.n, n_atoms), dtype=np.int32)
    hs = np.arange(group.n)
    for g in range(group.n):
        sigma = np.array([group.mul(group.inv(g), int(h)) for h in hs])
        perms[g] = digits[:, sigma] @ weights
    action = ActionTable(group, space, perms)
    coord = Partition(space, digits[:, group.identity])
    return BernoulliShift(space, action, coord)


@dataclass(frozen=True)
class GrowthComparison:
    """Finite-horizon growth-order report.  HEURISTIC: a finite grid cannot
    decide asymptotic order; this is a reading aid, never a proof."""

    rows: tuple[tuple[float, float, int, float], ...]  # (eps_a, eps_b, n, ratio)
    summary: tuple[tuple[float, float, float], ...]    # (eps_a, best eps_b, max ratio)
    heuristic: bool = True


def growth_compare(profile_a: Sequence[tuple], profile_b: Sequence[tuple]) -> GrowthComparison:
    """Ratio table value_a(n, eps) / value_b(n, delta) over the shared n range.

    Profiles are sequences of (n, value) or (n, eps, value) tuples.
    """

    def normalise(profile):
        grid: dict[float, dict[int, float]] = {}
        for row in profile:
            if len(row) == 2:
                n, val = row
                eps = 0.0
            else:
                n, eps, val = row
            grid.setdefault(float(eps), {})[int(n)] = float(val)
        return grid

    ga, gb = normalise(profile_a), normalise(profile_b)
    if not ga or not gb:
        raise ValueError("profiles must be non-empty")
    rows = []
    summary = []
    for eps_a, table_a in sorted(ga.items()):
        best = None
        for eps_b, table_b in sorted(gb.items()):
            common = sorted(set(table_a) & set(table_b))
            if not common:
                continue
            ratios = []
            for n in common:
                denom = table_b[n]
                ratio = float("inf") if denom == 0 else table_a[n] / denom
                rows.append((eps_a, eps_b, n, ratio))
                ratios.append(ratio)
            peak = max(ratios)
            if best is None or peak < best[1]:
                best = (eps_b, peak)
        if best is None:
            raise ValueError("profiles share no grid points")
        summary.append((eps_a, best[0], best[1]))
    return GrowthComparison(tuple(rows), tuple(summary))
