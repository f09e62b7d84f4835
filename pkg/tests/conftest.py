"""Shared oracles and generators for the test suite.

The brute-force epsilon-entropy oracle below enumerates every exceptional
subset and every set partition of the remainder; it shares only the strict
threshold convention with the production solver, not its search structure.
"""

import itertools

import numpy as np
import pytest

from entlab.entropy import THRESHOLD_SLACK, strictly_below
from entlab.spaces import FiniteProbSpace, Partition, Semimetric, combine, cut_semimetric


def brute_eps_entropy(space, rho, eps):
    """Minimal cell count by exhaustive enumeration; only for tiny spaces."""
    n = space.n
    assert n <= 8, "oracle is exponential twice over"
    masses = space.masses
    m = rho.matrix
    best = None
    atoms = list(range(n))
    for r in range(n + 1):
        for x0 in itertools.combinations(atoms, r):
            if x0 and not strictly_below(float(masses[list(x0)].sum()), eps):
                continue
            rest = [a for a in atoms if a not in set(x0)]
            k = _min_diam_cover(rest, m, eps)
            if best is None or k < best:
                best = k
    return max(best, 1)


def _min_diam_cover(rest, m, eps):
    if not rest:
        return 0
    best = [len(rest)]
    cells = []

    def fits(cell, v):
        return all(m[v, u] < eps - THRESHOLD_SLACK for u in cell)

    def rec(i):
        if len(cells) >= best[0]:
            return
        if i == len(rest):
            best[0] = len(cells)
            return
        v = rest[i]
        for cell in cells:
            if fits(cell, v):
                cell.append(v)
                rec(i + 1)
                cell.pop()
        cells.append([v])
        rec(i + 1)
        cells.pop()

    rec(0)
    return best[0]


def random_instance(rng, max_atoms=12, uniform=None, k_max=4):
    """Random cut-combination semimetric on a random space."""
    n = int(rng.integers(3, max_atoms + 1))
    if uniform is None:
        uniform = bool(rng.integers(0, 2))
    if uniform:
        space = FiniteProbSpace.uniform(n)
    else:
        masses = rng.dirichlet(np.full(n, 2.0))
        masses = np.maximum(masses, 1e-4)
        space = FiniteProbSpace(masses / masses.sum())
    k = int(rng.integers(1, k_max + 1))
    parts = [Partition(space, rng.integers(0, int(rng.integers(2, 5)), size=n))
             for _ in range(k)]
    w = rng.dirichlet(np.full(k, 1.5))
    w = np.maximum(w, 1e-3)
    rho = combine(w / w.sum(), [cut_semimetric(p) for p in parts])
    return space, rho


@pytest.fixture(scope="session")
def sl2_3():
    from entlab.algebra import FieldTower, sl2_enumerate

    return sl2_enumerate(FieldTower(3, 1), 0)


@pytest.fixture(scope="session")
def sl2_9():
    from entlab.algebra import FieldTower, sl2_enumerate

    return sl2_enumerate(FieldTower(3, 1), 1)
