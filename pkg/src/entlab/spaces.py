"""Finite probability spaces, partitions, entropy and semimetrics.

All entropies are in bits.  A semimetric is a dense symmetric matrix with
zero diagonal satisfying the triangle inequality; points at distance zero
are allowed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

MASS_TOL = 1e-12
TRIANGLE_TOL = 1e-9

# Full O(N^3) triangle validation is automatic up to this size; above it the
# caller opts in via validate=True or Semimetric.validate().
_AUTO_VALIDATE_N = 200


class FiniteProbSpace:
    """Atoms 0..n-1 with non-negative masses summing to one."""

    def __init__(self, masses: Sequence[float], exact_masses: Sequence[Fraction] | None = None):
        self.masses = np.asarray(masses, dtype=float).copy()
        if self.masses.ndim != 1 or self.masses.size == 0:
            raise ValueError("masses must be a non-empty vector")
        if np.any(self.masses < 0):
            raise ValueError("masses must be non-negative")
        if abs(float(self.masses.sum()) - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {self.masses.sum()}, not 1")
        self.n = int(self.masses.size)
        self.exact_masses = list(exact_masses) if exact_masses is not None else None
        if self.exact_masses is not None:
            if len(self.exact_masses) != self.n or sum(self.exact_masses) != 1:
                raise ValueError("exact masses must match and sum to exactly 1")

    @classmethod
    def uniform(cls, n: int) -> "FiniteProbSpace":
        return cls(np.full(n, 1.0 / n), [Fraction(1, n)] * n)

    def compatible(self, other: "FiniteProbSpace") -> bool:
        return self is other or (self.n == other.n
                                 and np.allclose(self.masses, other.masses, atol=MASS_TOL))

    def __repr__(self) -> str:
        return f"FiniteProbSpace(n={self.n})"


def _require_same_space(a: FiniteProbSpace, b: FiniteProbSpace) -> None:
    if not a.compatible(b):
        raise ValueError("operands live on different probability spaces")


class Partition:
    """Cell labels per atom; labels are canonicalised to 0..m-1 in order of
    first appearance."""

    def __init__(self, space: FiniteProbSpace, labels: Sequence[int]):
        labels = np.asarray(labels)
        if labels.shape != (space.n,):
            raise ValueError("one label per atom required")
        remap: dict[int, int] = {}
        canon = np.empty(space.n, dtype=np.int32)
        for i, lab in enumerate(labels.tolist()):
            canon[i] = remap.setdefault(lab, len(remap))
        self.space = space
        self.labels = canon
        self.m = len(remap)

    @classmethod
    def trivial(cls, space: FiniteProbSpace) -> "Partition":
        return cls(space, np.zeros(space.n, dtype=int))

    @classmethod
    def singletons(cls, space: FiniteProbSpace) -> "Partition":
        return cls(space, np.arange(space.n))

    def cells(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.labels == c) for c in range(self.m)]

    def cell_masses(self) -> np.ndarray:
        return np.bincount(self.labels, weights=self.space.masses, minlength=self.m)

    def cell_masses_exact(self) -> list[Fraction] | None:
        if self.space.exact_masses is None:
            return None
        out = [Fraction(0)] * self.m
        for i, lab in enumerate(self.labels.tolist()):
            out[lab] += self.space.exact_masses[i]
        return out

    def __eq__(self, other) -> bool:
        return (isinstance(other, Partition) and self.space.compatible(other.space)
                and np.array_equal(self.labels, other.labels))

    def __repr__(self) -> str:
        return f"Partition(m={self.m}, n={self.space.n})"


def shannon_entropy(part: Partition) -> float:
    """-sum mu(c) log2 mu(c) over cells, with 0 log 0 = 0."""
    exact = part.cell_masses_exact()
    if exact is not None:
        return -sum(float(m) * np.log2(float(m)) for m in exact if m > 0)
    m = part.cell_masses()
    m = m[m > 0]
    return float(-(m * np.log2(m)).sum())


def refine(*parts: Partition) -> Partition:
    """Common refinement; cells are the non-empty intersections."""
    if not parts:
        raise ValueError("need at least one partition")
    space = parts[0].space
    acc = parts[0].labels.astype(np.int64)
    for p in parts[1:]:
        _require_same_space(space, p.space)
        acc = acc * p.m + p.labels
    return Partition(space, acc)


class Semimetric:
    """Dense symmetric kernel with zero diagonal and the triangle inequality."""

    def __init__(self, space: FiniteProbSpace, matrix: np.ndarray, validate: bool | None = None):
        matrix = np.asarray(matrix, dtype=float).copy()
        if matrix.shape != (space.n, space.n):
            raise ValueError("matrix shape must match the space")
        if np.any(matrix < -TRIANGLE_TOL):
            raise ValueError("semimetric values must be non-negative")
        if np.abs(matrix - matrix.T).max(initial=0.0) > TRIANGLE_TOL:
            raise ValueError("matrix is not symmetric")
        if np.abs(np.diagonal(matrix)).max(initial=0.0) > TRIANGLE_TOL:
            raise ValueError("diagonal is not zero")
        np.fill_diagonal(matrix, 0.0)
        np.clip(matrix, 0.0, None, out=matrix)
        self.space = space
        self.matrix = matrix
        if validate or (validate is None and space.n <= _AUTO_VALIDATE_N):
            self.validate()

    def validate(self, tol: float = TRIANGLE_TOL) -> None:
        """Full triangle-inequality scan, O(n^3)."""
        m = self.matrix
        for k in range(self.space.n):
            detour = m[:, k][:, None] + m[k, :][None, :]
            if np.any(m > detour + tol):
                i, j = np.unravel_index(np.argmax(m - detour), m.shape)
                raise ValueError(
                    f"triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})")

    def diameter(self) -> float:
        return float(self.matrix.max(initial=0.0))

    def value(self, i: int, j: int) -> float:
        return float(self.matrix[i, j])

    def is_metric(self) -> bool:
        off = self.matrix + np.eye(self.space.n)
        return bool((off > 0).all())

    def __repr__(self) -> str:
        return f"Semimetric(n={self.space.n}, diam={self.diameter():.4g})"


def cut_semimetric(part: Partition) -> Semimetric:
    """0 within a cell, 1 across cells."""
    lab = part.labels
    mat = (lab[:, None] != lab[None, :]).astype(float)
    return Semimetric(part.space, mat, validate=False)


def combine(weights: Sequence[float], metrics: Sequence[Semimetric]) -> Semimetric:
    """Convex combination; preserves the triangle inequality automatically."""
    if len(weights) != len(metrics) or not metrics:
        raise ValueError("need matching non-empty weights and metrics")
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    if abs(w.sum() - 1.0) > MASS_TOL:
        raise ValueError(f"weights sum to {w.sum()}, not 1")
    space = metrics[0].space
    acc = np.zeros((space.n, space.n))
    for wi, mi in zip(w, metrics):
        _require_same_space(space, mi.space)
        acc += wi * mi.matrix
    return Semimetric(space, acc, validate=False)


def dyadic_sum(parts: Sequence[Partition]) -> tuple[Semimetric, bool]:
    """sum_i 2^-i * cut(xi_i); second value tells whether the partitions
    jointly separate atoms (making the sum a metric)."""
    if not parts:
        raise ValueError("need at least one partition")
    space = parts[0].space
    acc = np.zeros((space.n, space.n))
    for i, p in enumerate(parts, start=1):
        _require_same_space(space, p.space)
        acc += 2.0**-i * (p.labels[:, None] != p.labels[None, :])
    separating = refine(*parts).m == space.n
    return Semimetric(space, acc, validate=False), separating


def l1_norm(rho: Semimetric) -> float:
    """Mean distance sum_{x,y} mu(x) mu(y) rho(x,y)."""
    mu = rho.space.masses
    return float(mu @ rho.matrix @ mu)


def m_norm(space: FiniteProbSpace, kernel: np.ndarray, *, cap: int = 16,
           tol: float = 1e-8) -> float:
    """Least L1 mass of a semimetric dominating |kernel|, solved exactly as a
    linear program over all triangle inequalities.

    The feasible set is never empty (the constant matrix at max|kernel| is a
    semimetric), so solver failure is a bug, not an input condition.
    """
    n = space.n
    if n > cap:
        raise ValueError(f"m_norm instance has {n} atoms, over the cap {cap}")
    if np.any(space.masses <= 0):
        raise ValueError("m_norm requires strictly positive atom masses")
    kernel = np.asarray(kernel, dtype=float)
    if kernel.shape != (n, n):
        raise ValueError("kernel shape must match the space")
    if np.abs(kernel - kernel.T).max(initial=0.0) > TRIANGLE_TOL:
        raise ValueError("kernel must be symmetric")
    if np.abs(np.diagonal(kernel)).max(initial=0.0) > TRIANGLE_TOL:
        raise ValueError("kernel must have zero diagonal")
    if n == 1:
        return 0.0
    from scipy.optimize import linprog

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pos = {p: k for k, p in enumerate(pairs)}
    mu = space.masses
    c = np.array([2.0 * mu[i] * mu[j] for i, j in pairs])
    bounds = [(abs(kernel[i, j]), None) for i, j in pairs]
    rows = []
    for (i, j) in pairs:
        for k in range(n):
            if k == i or k == j:
                continue
            row = np.zeros(len(pairs))
            row[pos[(i, j)]] = 1.0
            row[pos[(min(i, k), max(i, k))]] = -1.0
            row[pos[(min(j, k), max(j, k))]] = -1.0
            rows.append(row)
    a_ub = np.array(rows) if rows else None
    b_ub = np.zeros(len(rows)) if rows else None
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": min(tol, 1e-8) * 1e-1,
                           "dual_feasibility_tolerance": min(tol, 1e-8) * 1e-1})
    if not res.success:
        raise RuntimeError(f"m_norm LP failed unexpectedly: {res.message}")
    return float(res.fun)


# -- CSV interfaces ------------------------------------------------------------


def space_to_csv(space: FiniteProbSpace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["atom", "mass"])
        for i, m in enumerate(space.masses.tolist()):
            w.writerow([i, repr(m)])


def space_from_csv(path) -> FiniteProbSpace:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    masses = [float(r[1]) for r in rows[1:]]
    return FiniteProbSpace(masses)


def semimetric_to_csv(rho: Semimetric, path) -> None:
    n = rho.space.n
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["atom"] + [str(j) for j in range(n)])
        for i in range(n):
            w.writerow([i] + [repr(v) for v in rho.matrix[i].tolist()])


def semimetric_from_csv(path, space: FiniteProbSpace | None = None) -> Semimetric:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    body = rows[1:]
    mat = np.array([[float(v) for v in r[1:]] for r in body])
    if space is None:
        space = FiniteProbSpace.uniform(mat.shape[0])
    return Semimetric(space, mat)


def partition_to_csv(part: Partition, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["atom", "label"])
        for i, lab in enumerate(part.labels.tolist()):
            w.writerow([i, lab])


def partition_from_csv(path, space: FiniteProbSpace | None = None) -> Partition:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    labels = [int(r[1]) for r in rows[1:]]
    if space is None:
        space = FiniteProbSpace.uniform(len(labels))
    return Partition(space, labels)
