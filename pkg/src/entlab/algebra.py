"""Finite field towers and the matrix groups built on them.

The chain F_p < F_{p^2} < F_{p^4} < ... is realised by repeated quadratic
extension: level k+1 adjoins a square root of the first non-square of level
k.  An element of level k is a coefficient vector of length 2^k over F_p,
packed into a single integer index with the constant coefficient least
significant.  With that packing the inclusion of one level into the next is
literally index-preserving, which keeps subgroup towers such as
SL(2, F_q) < SL(2, F_{q^2}) cheap to work with.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import BudgetError

# Largest field size for which dense add/mul index tables are precomputed.
_TABLE_MAX = 2048


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class FieldTower:
    """Iterated quadratic extensions of F_p, levels 0..depth.

    Level k is the field with p**(2**k) elements.  Elements are addressed by
    integer index; `coeffs` unpacks an index into base-p digits (constant
    coefficient first).
    """

    def __init__(self, p: int, depth: int = 0):
        if not _is_prime(p) or p == 2:
            raise ValueError(f"p must be an odd prime, got {p}")
        if depth < 0:
            raise ValueError("depth must be non-negative")
        if p ** (2**depth) >= 2**62:
            raise ValueError(f"field of size {p}**{2**depth} is not index-addressable")
        self.p = p
        self.depth = depth
        self.sizes = [p ** (2**k) for k in range(depth + 1)]
        self._add_tables: dict[int, np.ndarray] = {}
        self._mul_tables: dict[int, np.ndarray] = {}
        self._inv_tables: dict[int, np.ndarray] = {}
        self.nonsquares: list[int] = []
        self._build_level0_tables()
        for k in range(depth):
            self.nonsquares.append(self._first_nonsquare(k))
            if self.sizes[k + 1] <= _TABLE_MAX:
                self._build_extension_tables(k + 1)

    # -- table construction -------------------------------------------------

    def _build_level0_tables(self) -> None:
        p = self.p
        if p > _TABLE_MAX:
            return
        idx = np.arange(p, dtype=np.int64)
        self._add_tables[0] = ((idx[:, None] + idx[None, :]) % p).astype(np.int32)
        self._mul_tables[0] = ((idx[:, None] * idx[None, :]) % p).astype(np.int32)
        inv = np.zeros(p, dtype=np.int32)
        for i in range(1, p):
            inv[i] = pow(i, p - 2, p)
        self._inv_tables[0] = inv

    def _build_extension_tables(self, k: int) -> None:
        # x = a + b*t with t^2 = r, index = a + b*q_prev; combine the previous
        # level's tables by block structure.
        ql = self.sizes[k - 1]
        q = self.sizes[k]
        r = self.nonsquares[k - 1]
        addl = self._add_tables[k - 1]
        mull = self._mul_tables[k - 1]
        idx = np.arange(q, dtype=np.int64)
        a, b = idx % ql, idx // ql
        aa, ab = a[:, None], a[None, :]
        ba, bb = b[:, None], b[None, :]
        self._add_tables[k] = (addl[aa, ab] + addl[ba, bb].astype(np.int64) * ql).astype(np.int32)
        re_part = addl[mull[aa, ab], mull[r, mull[ba, bb]]]
        im_part = addl[mull[aa, bb], mull[ba, ab]]
        self._mul_tables[k] = (re_part + im_part.astype(np.int64) * ql).astype(np.int32)
        mul = self._mul_tables[k]
        inv = np.zeros(q, dtype=np.int32)
        inv[1:] = np.argmax(mul[1:] == 1, axis=1)
        self._inv_tables[k] = inv

    def _first_nonsquare(self, k: int) -> int:
        for i in range(self.sizes[k]):
            if not self.is_square(k, i):
                return i
        raise AssertionError("finite field of odd order must contain a non-square")

    # -- index arithmetic ----------------------------------------------------

    def size(self, level: int) -> int:
        return self.sizes[level]

    def _split(self, level: int, i: int) -> tuple[int, int]:
        ql = self.sizes[level - 1]
        return i % ql, i // ql

    def add(self, level: int, i: int, j: int) -> int:
        tab = self._add_tables.get(level)
        if tab is not None:
            return int(tab[i, j])
        if level == 0:
            return (i + j) % self.p
        ql = self.sizes[level - 1]
        a1, b1 = self._split(level, i)
        a2, b2 = self._split(level, j)
        return self.add(level - 1, a1, a2) + self.add(level - 1, b1, b2) * ql

    def neg(self, level: int, i: int) -> int:
        if level == 0:
            return (-i) % self.p
        ql = self.sizes[level - 1]
        a, b = self._split(level, i)
        return self.neg(level - 1, a) + self.neg(level - 1, b) * ql

    def sub(self, level: int, i: int, j: int) -> int:
        return self.add(level, i, self.neg(level, j))

    def mul(self, level: int, i: int, j: int) -> int:
        tab = self._mul_tables.get(level)
        if tab is not None:
            return int(tab[i, j])
        if level == 0:
            return (i * j) % self.p
        ql = self.sizes[level - 1]
        r = self.nonsquares[level - 1]
        a1, b1 = self._split(level, i)
        a2, b2 = self._split(level, j)
        re = self.add(level - 1, self.mul(level - 1, a1, a2),
                      self.mul(level - 1, r, self.mul(level - 1, b1, b2)))
        im = self.add(level - 1, self.mul(level - 1, a1, b2),
                      self.mul(level - 1, b1, a2))
        return re + im * ql

    def inv(self, level: int, i: int) -> int:
        if i == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        tab = self._inv_tables.get(level)
        if tab is not None:
            return int(tab[i])
        if level == 0:
            return pow(i, self.p - 2, self.p)
        # (a + b t)^-1 = (a - b t) / (a^2 - r b^2), norm taken one level down
        ql = self.sizes[level - 1]
        r = self.nonsquares[level - 1]
        a, b = self._split(level, i)
        norm = self.sub(level - 1, self.mul(level - 1, a, a),
                        self.mul(level - 1, r, self.mul(level - 1, b, b)))
        ninv = self.inv(level - 1, norm)
        return self.mul(level - 1, a, ninv) + self.mul(level - 1, self.neg(level - 1, b), ninv) * ql

    def pow(self, level: int, i: int, e: int) -> int:
        if e < 0:
            return self.pow(level, self.inv(level, i), -e)
        acc, base = 1, i
        while e:
            if e & 1:
                acc = self.mul(level, acc, base)
            base = self.mul(level, base, base)
            e >>= 1
        return acc

    def is_square(self, level: int, i: int) -> bool:
        if i == 0:
            return True
        return self.pow(level, i, (self.sizes[level] - 1) // 2) == 1

    # -- coefficient vectors and embeddings -----------------------------------

    def coeffs(self, level: int, i: int) -> tuple[int, ...]:
        out = []
        for _ in range(2**level):
            out.append(i % self.p)
            i //= self.p
        return tuple(out)

    def from_coeffs(self, level: int, coeffs: Sequence[int]) -> int:
        if len(coeffs) != 2**level:
            raise ValueError(f"level {level} needs {2 ** level} coefficients")
        i = 0
        for c in reversed(coeffs):
            i = i * self.p + (c % self.p)
        return i

    def embed_index(self, i: int, level_from: int, level_to: int) -> int:
        """Coefficient-padding inclusion; index-preserving by construction."""
        if level_to < level_from:
            raise ValueError("cannot embed downwards")
        if not 0 <= i < self.sizes[level_from]:
            raise ValueError("index out of range for source level")
        return i

    def element(self, level: int, value: int | Sequence[int] = 0) -> "FieldElement":
        if isinstance(value, (list, tuple)):
            idx = self.from_coeffs(level, value)
        else:
            idx = int(value) % self.sizes[level]
        return FieldElement(self, level, idx)

    def __repr__(self) -> str:
        return f"FieldTower(p={self.p}, depth={self.depth})"


def field_create(p: int, depth: int) -> FieldTower:
    """Build the tower F_p < F_{p^2} < ... < F_{p^(2^depth)}."""
    return FieldTower(p, depth)


@dataclass(frozen=True, slots=True)
class FieldElement:
    """Element of one level of a FieldTower, addressed by packed index."""

    tower: FieldTower
    level: int
    index: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.tower.coeffs(self.level, self.index)

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.tower is not self.tower:
                raise ValueError("elements belong to different towers")
            if other.level != self.level:
                raise ValueError("elements belong to different levels; embed explicitly")
            return other
        if isinstance(other, int):
            return FieldElement(self.tower, self.level, other % self.tower.p)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.tower, self.level, self.tower.add(self.level, self.index, o.index))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.tower, self.level, self.tower.neg(self.level, self.index))

    def __sub__(self, other):
        o = self._coerce(other)
        return FieldElement(self.tower, self.level, self.tower.sub(self.level, self.index, o.index))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        o = self._coerce(other)
        return FieldElement(self.tower, self.level, self.tower.mul(self.level, self.index, o.index))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return self * FieldElement(self.tower, self.level, self.tower.inv(self.level, o.index))

    def __pow__(self, e: int):
        return FieldElement(self.tower, self.level, self.tower.pow(self.level, self.index, e))

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = FieldElement(self.tower, self.level, other % self.tower.p)
        return (isinstance(other, FieldElement) and other.tower is self.tower
                and other.level == self.level and other.index == self.index)

    def __lt__(self, other: "FieldElement") -> bool:
        o = self._coerce(other)
        return self.index < o.index

    def __hash__(self) -> int:
        return hash((id(self.tower), self.level, self.index))

    def is_square(self) -> bool:
        return self.tower.is_square(self.level, self.index)

    def embed(self, level: int) -> "FieldElement":
        return FieldElement(self.tower, level,
                            self.tower.embed_index(self.index, self.level, level))

    def __repr__(self) -> str:
        return f"GF({self.tower.p}^{2 ** self.level}){list(self.coeffs)}"


def field_embed(x: FieldElement, level: int) -> FieldElement:
    """Embed a tower element into a higher level of the same tower."""
    return x.embed(level)


@dataclass(frozen=True, slots=True)
class Mat2:
    """2x2 matrix over one tower level, entries stored as field indices."""

    tower: FieldTower
    level: int
    a: int
    b: int
    c: int
    d: int

    @classmethod
    def from_entries(cls, tower: FieldTower, level: int, entries: Sequence[int]) -> "Mat2":
        a, b, c, d = (int(e) % tower.sizes[level] for e in entries)
        return cls(tower, level, a, b, c, d)

    @classmethod
    def identity(cls, tower: FieldTower, level: int) -> "Mat2":
        return cls(tower, level, 1, 0, 0, 1)

    @property
    def entries(self) -> tuple[FieldElement, FieldElement, FieldElement, FieldElement]:
        t, lv = self.tower, self.level
        return (FieldElement(t, lv, self.a), FieldElement(t, lv, self.b),
                FieldElement(t, lv, self.c), FieldElement(t, lv, self.d))

    def det_index(self) -> int:
        t, lv = self.tower, self.level
        return t.sub(lv, t.mul(lv, self.a, self.d), t.mul(lv, self.b, self.c))

    def __mul__(self, other: "Mat2") -> "Mat2":
        if other.tower is not self.tower or other.level != self.level:
            raise ValueError("matrices live over different fields")
        t, lv = self.tower, self.level
        m, ad = t.mul, t.add
        return Mat2(t, lv,
                    ad(lv, m(lv, self.a, other.a), m(lv, self.b, other.c)),
                    ad(lv, m(lv, self.a, other.b), m(lv, self.b, other.d)),
                    ad(lv, m(lv, self.c, other.a), m(lv, self.d, other.c)),
                    ad(lv, m(lv, self.c, other.b), m(lv, self.d, other.d)))

    def inverse(self) -> "Mat2":
        # valid for determinant 1
        t, lv = self.tower, self.level
        if self.det_index() != 1:
            raise ValueError("inverse formula requires determinant 1")
        return Mat2(t, lv, self.d, t.neg(lv, self.b), t.neg(lv, self.c), self.a)

    def key(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __lt__(self, other: "Mat2") -> bool:
        return self.key() < other.key()

    def __repr__(self) -> str:
        return f"Mat2[{self.a},{self.b};{self.c},{self.d}]@q={self.tower.sizes[self.level]}"


class _LazyElements(Sequence):
    """Sequence facade constructing group elements on demand."""

    def __init__(self, n: int, fn: Callable[[int], object]):
        self._n = n
        self._fn = fn

    def __len__(self) -> int:
        return self._n

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self._fn(j) for j in range(*i.indices(self._n))]
        if i < 0:
            i += self._n
        if not 0 <= i < self._n:
            raise IndexError(i)
        return self._fn(i)


class FiniteGroup:
    """Finite group as an indexed element list with index-based oracles.

    Elements are addressed 0..n-1 in a fixed canonical order; `mul` and `inv`
    work on indices.  A dense Cayley table is cached for groups up to
    `cayley_cap` elements, larger groups multiply on demand.
    """

    def __init__(self, n: int, element_fn: Callable[[int], object], mul_fn, *,
                 identity: int | None = None, inv_array: np.ndarray | None = None,
                 table: np.ndarray | None = None, name: str = "G",
                 cayley_cap: int = 10_000, validate: bool = True):
        self.n = n
        self.name = name
        self._element_fn = element_fn
        self._mul_fn = mul_fn
        self._table = table
        if table is None and mul_fn is None:
            raise ValueError("need a multiplication oracle or a Cayley table")
        if table is None and n <= cayley_cap and mul_fn is not None:
            self._table = self._build_table()
        self.identity = self._find_identity() if identity is None else identity
        self._inv = inv_array
        if self._inv is None:
            self._inv = self._compute_inverses()
        if validate:
            self.validate()

    # -- construction helpers -------------------------------------------------

    def _build_table(self) -> np.ndarray:
        tab = np.empty((self.n, self.n), dtype=np.int32)
        for i in range(self.n):
            tab[i] = self.mul_row(i, np.arange(self.n))
        return tab

    def _find_identity(self) -> int:
        # the identity is the unique idempotent
        for i in range(self.n):
            if self.mul(i, i) == i:
                return i
        raise ValueError("no identity element found")

    def _compute_inverses(self) -> np.ndarray:
        e = self.identity
        if self._table is not None:
            return np.argmax(self._table == e, axis=1).astype(np.int32)
        inv = np.empty(self.n, dtype=np.int32)
        for i in range(self.n):
            for j in range(self.n):
                if self.mul(i, j) == e:
                    inv[i] = j
                    break
            else:
                raise ValueError(f"element {i} has no right inverse")
        return inv

    def validate(self) -> None:
        """Check identity law (full), inverses (full) and associativity (sampled)."""
        e = self.identity
        js = np.arange(self.n)
        if not (np.array_equal(self.mul_row(e, js), js)
                and all(self.mul(j, e) == j for j in range(min(self.n, 2048)))):
            raise ValueError("identity law fails")
        for i in range(self.n):
            j = int(self._inv[i])
            if self.mul(i, j) != e or self.mul(j, i) != e:
                raise ValueError(f"element {i} lacks a two-sided inverse")
        rng = np.random.default_rng(0)
        if self.n**3 <= 4096:
            triples = [(a, b, c) for a in range(self.n) for b in range(self.n) for c in range(self.n)]
        else:
            triples = rng.integers(0, self.n, size=(256, 3)).tolist()
        for a, b, c in triples:
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                raise ValueError(f"associativity fails on ({a},{b},{c})")

    # -- group oracles ---------------------------------------------------------

    def __len__(self) -> int:
        return self.n

    @property
    def elements(self) -> Sequence:
        return _LazyElements(self.n, self._element_fn)

    def element(self, i: int):
        return self._element_fn(i)

    def mul(self, i: int, j: int) -> int:
        if self._table is not None:
            return int(self._table[i, j])
        return self._mul_fn(i, j)

    def mul_row(self, i: int, js: np.ndarray) -> np.ndarray:
        """Vectorised products i * js."""
        if self._table is not None:
            return self._table[i, np.asarray(js)]
        return np.array([self._mul_fn(i, int(j)) for j in np.asarray(js)], dtype=np.int32)

    def inv(self, i: int) -> int:
        return int(self._inv[i])

    def power(self, i: int, e: int) -> int:
        if e < 0:
            return self.power(self.inv(i), -e)
        acc, base = self.identity, i
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            e >>= 1
        return acc

    def order_of(self, i: int) -> int:
        m, x = 1, i
        while x != self.identity:
            x = self.mul(x, i)
            m += 1
            if m > self.n:
                raise AssertionError("order exceeds group size; oracle broken")
        return m

    def subgroup_closure(self, seed: Iterable[int]) -> frozenset[int]:
        """Smallest subgroup containing `seed` (product closure suffices)."""
        members = set(seed)
        frontier = list(members)
        gens = sorted(members)
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.mul(x, g)
                if y not in members:
                    members.add(y)
                    frontier.append(y)
        members.add(self.identity)
        return frozenset(members)

    def check_subgroup(self, subset: Iterable[int]) -> None:
        """Raise with a witness pair if `subset` is not a subgroup."""
        sub = sorted(set(subset))
        inside = set(sub)
        if not sub:
            raise ValueError("empty subset is not a subgroup")
        if self.identity not in inside:
            raise ValueError("subset misses the identity")
        for i in sub:
            if self.inv(i) not in inside:
                raise ValueError(f"subset not inverse-closed: witness {i}")
        for i in sub:
            row = self.mul_row(i, np.array(sub))
            for j, prod in zip(sub, row.tolist()):
                if prod not in inside:
                    raise ValueError(f"subset not product-closed: witness ({i},{j})")

    def __repr__(self) -> str:
        return f"{self.name} (order {self.n})"

    # -- stock constructions ----------------------------------------------------

    @classmethod
    def from_table(cls, table: np.ndarray, elements: Sequence | None = None,
                   name: str = "G") -> "FiniteGroup":
        table = np.asarray(table, dtype=np.int32)
        n = table.shape[0]
        elems = list(elements) if elements is not None else list(range(n))
        return cls(n, lambda i: elems[i], None, table=table, name=name)

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        idx = np.arange(n, dtype=np.int64)
        table = ((idx[:, None] + idx[None, :]) % n).astype(np.int32)
        return cls.from_table(table, name=f"Z/{n}")

    @classmethod
    def direct_product(cls, g: "FiniteGroup", h: "FiniteGroup") -> "FiniteGroup":
        nh = h.n

        def mul(i: int, j: int) -> int:
            return g.mul(i // nh, j // nh) * nh + h.mul(i % nh, j % nh)

        elems = [(a, b) for a in range(g.n) for b in range(h.n)]
        return cls(g.n * h.n, lambda i: elems[i], mul, name=f"{g.name}x{h.name}")


class SL2Group(FiniteGroup):
    """SL(2, F_q) enumerated in lexicographic order of (a, b, c, d) indices."""

    def __init__(self, tower: FieldTower, level: int, *, cayley_cap: int = 10_000):
        self.tower = tower
        self.level = level
        self.q = tower.sizes[level]
        q = self.q
        A, B, C, D = _sl2_entry_arrays(tower, level)
        self._A, self._B, self._C, self._D = A, B, C, D
        n = len(A)
        keys = ((A.astype(np.int64) * q + B) * q + C) * q + D
        order = np.argsort(keys, kind="stable")
        self._sorted_keys = keys[order]
        self._sorted_pos = order.astype(np.int32)
        self._key_of = keys

        def element_fn(i: int) -> Mat2:
            return Mat2(tower, level, int(A[i]), int(B[i]), int(C[i]), int(D[i]))

        e_idx = self._lookup_one(((1 * q + 0) * q + 0) * q + 1)
        inv_keys = ((D.astype(np.int64) * q + _neg_arr(tower, level, B)) * q
                    + _neg_arr(tower, level, C)) * q + A
        inv_array = self._lookup_many(inv_keys)
        super().__init__(n, element_fn, self._mul_idx, identity=e_idx,
                         inv_array=inv_array, name=f"SL(2,{q})", cayley_cap=cayley_cap)

    def _lookup_one(self, key: int) -> int:
        pos = int(np.searchsorted(self._sorted_keys, key))
        if pos >= len(self._sorted_keys) or self._sorted_keys[pos] != key:
            raise KeyError(f"matrix key {key} not in group")
        return int(self._sorted_pos[pos])

    def _lookup_many(self, keys: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self._sorted_keys, keys)
        if not np.array_equal(self._sorted_keys[pos], keys):
            raise KeyError("some products fell outside the group; arithmetic broken")
        return self._sorted_pos[pos]

    def _mul_idx(self, i: int, j: int) -> int:
        t, lv = self.tower, self.level
        A, B, C, D = self._A, self._B, self._C, self._D
        a = t.add(lv, t.mul(lv, A[i], A[j]), t.mul(lv, B[i], C[j]))
        b = t.add(lv, t.mul(lv, A[i], B[j]), t.mul(lv, B[i], D[j]))
        c = t.add(lv, t.mul(lv, C[i], A[j]), t.mul(lv, D[i], C[j]))
        d = t.add(lv, t.mul(lv, C[i], B[j]), t.mul(lv, D[i], D[j]))
        return self._lookup_one(((int(a) * self.q + int(b)) * self.q + int(c)) * self.q + int(d))

    def mul_row(self, i: int, js: np.ndarray) -> np.ndarray:
        if self._table is not None:
            return self._table[i, np.asarray(js)]
        js = np.asarray(js)
        t, lv, q = self.tower, self.level, self.q
        MUL, ADD = t._mul_tables.get(lv), t._add_tables.get(lv)
        if MUL is None:
            return super().mul_row(i, js)
        A, B, C, D = self._A[js], self._B[js], self._C[js], self._D[js]
        a1, b1, c1, d1 = int(self._A[i]), int(self._B[i]), int(self._C[i]), int(self._D[i])
        a = ADD[MUL[a1, A], MUL[b1, C]].astype(np.int64)
        b = ADD[MUL[a1, B], MUL[b1, D]]
        c = ADD[MUL[c1, A], MUL[d1, C]]
        d = ADD[MUL[c1, B], MUL[d1, D]]
        return self._lookup_many(((a * q + b) * q + c) * q + d)

    def index_of_matrix(self, entries: Sequence[int]) -> int:
        a, b, c, d = entries
        return self._lookup_one(((int(a) * self.q + int(b)) * self.q + int(c)) * self.q + int(d))


def _neg_arr(tower: FieldTower, level: int, arr: np.ndarray) -> np.ndarray:
    return np.array([tower.neg(level, int(x)) for x in arr], dtype=np.int32)


def _sl2_entry_arrays(tower: FieldTower, level: int):
    """Entry indices of all determinant-1 matrices, lexicographic in (a,b,c,d)."""
    q = tower.sizes[level]
    A, B, C, D = [], [], [], []
    # a = 0: need bc = -1, d free
    for b in range(1, q):
        c = tower.neg(level, tower.inv(level, b))
        for d in range(q):
            A.append(0); B.append(b); C.append(c); D.append(d)
    # a != 0: d = (1 + bc) / a
    for a in range(1, q):
        ainv = tower.inv(level, a)
        for b in range(q):
            for c in range(q):
                d = tower.mul(level, ainv, tower.add(level, 1, tower.mul(level, b, c)))
                A.append(a); B.append(b); C.append(c); D.append(d)
    return (np.array(A, dtype=np.int32), np.array(B, dtype=np.int32),
            np.array(C, dtype=np.int32), np.array(D, dtype=np.int32))


def sl2_enumerate(tower: FieldTower, level: int, *, max_order: int = 10**6,
                  cayley_cap: int = 10_000) -> SL2Group:
    """Enumerate SL(2, F_q) for q = p^(2^level); errors if q(q^2-1) > max_order."""
    q = tower.sizes[level]
    order = q * (q * q - 1)
    if order > max_order:
        raise BudgetError(
            f"SL(2,{q}) has q(q^2-1) = {order} elements, over the budget {max_order}")
    return SL2Group(tower, level, cayley_cap=cayley_cap)


def element_order(group: FiniteGroup, g: int) -> int:
    """Least m >= 1 with g^m = e."""
    return group.order_of(g)


def coset_representatives(group: FiniteGroup, subgroup: Iterable[int]) -> list[int]:
    """One representative per right coset H*g, the canonically least element.

    The representative of H itself comes first; the rest follow in ascending
    order of their least elements.
    """
    sub = sorted(set(subgroup))
    group.check_subgroup(sub)
    seen = np.zeros(group.n, dtype=bool)
    rep_h = sub[0]
    coset = np.array([group.mul(h, rep_h) for h in sub])
    seen[coset] = True
    reps = [rep_h]
    for g in range(group.n):
        if not seen[g]:
            coset = np.array([group.mul(h, g) for h in sub])
            seen[coset] = True
            reps.append(g)
    if len(reps) * len(sub) != group.n:
        raise AssertionError("cosets do not partition the group")
    return reps


@dataclass(frozen=True)
class ProductGrowth:
    size: int
    square: int
    cube: int
    generates: bool


def triple_product_size(group: FiniteGroup, subset: Iterable[int]) -> ProductGrowth:
    """Exact |A|, |A^2|, |A^3| and whether <A> is the whole group."""
    a = sorted(set(subset))
    if not a:
        raise ValueError("subset must be non-empty")
    a_arr = np.array(a)
    sq = set()
    for i in a:
        sq.update(group.mul_row(i, a_arr).tolist())
    cube = set()
    for i in sorted(sq):
        cube.update(group.mul_row(i, a_arr).tolist())
    generates = len(group.subgroup_closure(a)) == group.n
    return ProductGrowth(len(a), len(sq), len(cube), generates)
