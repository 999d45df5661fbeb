"""Free k-step nilpotent Lie algebras on a Hall basis.

Basis elements are Hall trees on the letters ``x1 .. xr``.  A tree is either
a letter or a pair ``(left, right)`` and the Hall condition used here is

* ``left < right`` in the basis order, and
* if ``right = (p, q)`` is itself a bracket then ``p <= left``.

The basis order is degree-major, then lexicographic on the foliage (the
word of letters read left to right).  With this convention the degree-2
elements are ``[x_i, x_j]`` with ``i < j`` in lexicographic order.
Brackets of basis elements are rewritten into the Hall basis with
antisymmetry and the Jacobi identity; everything of degree above ``k``
is zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactq import to_rational

MAX_DIMENSION = 10 ** 5


def mobius(n: int) -> int:
    result, p, m = 1, 2, n
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    if m > 1:
        result = -result
    return result


def witt_number(r: int, d: int) -> int:
    """Dimension of the degree-d component of the free Lie algebra on r letters."""
    total = sum(mobius(e) * r ** (d // e) for e in range(1, d + 1) if d % e == 0)
    return total // d


def graded_dims(r: int, k: int) -> list[int]:
    return [witt_number(r, d) for d in range(1, k + 1)]


@dataclass(frozen=True)
class BasisElement:
    id: int
    degree: int
    # (generator index,) for letters, (left_id, right_id) for brackets
    kind: str
    children: tuple[int, ...]
    foliage: tuple[int, ...]

    @property
    def is_generator(self) -> bool:
        return self.kind == "generator"


@dataclass(eq=False)
class FreeNilAlgebra:
    r: int
    k: int
    basis: list[BasisElement]
    structure: dict[tuple[int, int], dict[int, Fraction]] = field(repr=False)
    _index: dict[tuple, int] = field(repr=False)
    _names: list[str] = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def dims(self) -> list[int]:
        out = [0] * self.k
        for b in self.basis:
            out[b.degree - 1] += 1
        return out

    def generator(self, i: int) -> int:
        """Basis id of the generator x_i (1-based)."""
        return i - 1

    def z(self, i: int, j: int) -> int:
        """Basis id of [x_i, x_j] for i < j (1-based)."""
        return self._index[("bracket", i - 1, j - 1)]

    def name(self, idx: int) -> str:
        return self._names[idx]

    def lookup(self, left: int, right: int) -> int | None:
        return self._index.get(("bracket", left, right))

    def bracket_ids(self, i: int, j: int) -> dict[int, Fraction]:
        return self.structure.get((i, j), {})

    def element(self, coords: Sequence) -> "AlgebraElement":
        return AlgebraElement(self, tuple(to_rational(c) for c in coords))

    def basis_vector(self, idx: int, coeff=1) -> "AlgebraElement":
        c = [Fraction(0)] * self.dim
        c[idx] = to_rational(coeff)
        return AlgebraElement(self, tuple(c))

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, (Fraction(0),) * self.dim)

    def descriptor(self) -> dict:
        return {"r": self.r, "k": self.k, "dims": self.dims, "basis": list(self._names)}


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    algebra: FreeNilAlgebra
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) != self.algebra.dim:
            raise ValueError(f"expected {self.algebra.dim} coordinates, got {len(self.coords)}")

    def _check(self, other: "AlgebraElement") -> None:
        if other.algebra is not self.algebra:
            raise ValueError("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra, tuple(x + y for x, y in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra, tuple(x - y for x, y in zip(self.coords, other.coords)))

    def __neg__(self):
        return AlgebraElement(self.algebra, tuple(-x for x in self.coords))

    def __rmul__(self, c):
        c = to_rational(c)
        return AlgebraElement(self.algebra, tuple(c * x for x in self.coords))

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return other.algebra is self.algebra and other.coords == self.coords

    def __hash__(self):
        return hash(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def support(self) -> dict[int, Fraction]:
        return {i: c for i, c in enumerate(self.coords) if c}


def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    x._check(y)
    alg = x.algebra
    out = [Fraction(0)] * alg.dim
    xs, ys = x.support(), y.support()
    for i, ci in xs.items():
        for j, cj in ys.items():
            for l, c in alg.bracket_ids(i, j).items():
                out[l] += ci * cj * c
    return AlgebraElement(alg, tuple(out))


def center_basis(alg: FreeNilAlgebra) -> list[BasisElement]:
    return [b for b in alg.basis if b.degree == alg.k]


def _foliage_name(b: BasisElement, basis: list[BasisElement]) -> str:
    if b.is_generator:
        return f"x{b.children[0]}"
    left, right = b.children
    return f"[{_foliage_name(basis[left], basis)},{_foliage_name(basis[right], basis)}]"


def _hall_elements(r: int, k: int) -> list[tuple]:
    """Hall trees of degree <= k, as (degree, foliage, kind, children)."""
    by_degree: dict[int, list[tuple]] = {1: [(1, (i,), "generator", (i,)) for i in range(1, r + 1)]}
    # position in the final order, assigned degree by degree
    order: dict[tuple, int] = {}
    flat: list[tuple] = []

    def key(t):
        return (t[0], t[1])

    def place(level):
        level.sort(key=key)
        for t in level:
            order[(t[2], t[3])] = len(flat)
            flat.append(t)

    place(by_degree[1])
    for d in range(2, k + 1):
        level = []
        for dl in range(1, d):
            dr = d - dl
            for left in by_degree[dl]:
                lpos = order[(left[2], left[3])]
                for right in by_degree[dr]:
                    rpos = order[(right[2], right[3])]
                    if not lpos < rpos:
                        continue
                    if right[2] == "bracket":
                        # right = (p, q): need p <= left
                        if not right[3][0] <= lpos:
                            continue
                    level.append((d, left[1] + right[1], "bracket", (lpos, rpos)))
        by_degree[d] = level
        place(level)
    return flat


def build_algebra(r: int, k: int) -> FreeNilAlgebra:
    if r < 2 or k < 2:
        raise ValueError(f"need r >= 2 and k >= 2, got r={r}, k={k}")
    if sum(graded_dims(r, k)) > MAX_DIMENSION:
        raise ValueError(f"L_({r},{k}) has dimension above the {MAX_DIMENSION} guard")
    raw = _hall_elements(r, k)
    basis = []
    index: dict[tuple, int] = {}
    for idx, (deg, fol, kind, children) in enumerate(raw):
        if kind == "generator":
            basis.append(BasisElement(idx, deg, kind, (children[0],), fol))
        else:
            basis.append(BasisElement(idx, deg, kind, children, fol))
            index[("bracket",) + children] = idx
    names = [_foliage_name(b, basis) for b in basis]
    alg = FreeNilAlgebra(r, k, basis, {}, index, names)
    _fill_structure(alg)
    return alg


def _fill_structure(alg: FreeNilAlgebra) -> None:
    basis, k = alg.basis, alg.k
    memo: dict[tuple[int, int], dict[int, Fraction]] = {}

    def add_into(acc, vec, c):
        for l, v in vec.items():
            s = acc.get(l, 0) + c * v
            if s:
                acc[l] = s
            else:
                acc.pop(l, None)

    def br_vec(u: dict, v: dict) -> dict:
        acc: dict[int, Fraction] = {}
        for i, ci in u.items():
            for j, cj in v.items():
                add_into(acc, rewrite(i, j), ci * cj)
        return acc

    def rewrite(i: int, j: int) -> dict[int, Fraction]:
        key = (i, j)
        if key in memo:
            return memo[key]
        if i == j or basis[i].degree + basis[j].degree > k:
            res = {}
        elif i > j:
            res = {l: -c for l, c in rewrite(j, i).items()}
        else:
            right = basis[j]
            hall = alg.lookup(i, j)
            if hall is not None:
                res = {hall: Fraction(1)}
            else:
                # right = (p, q) with p > i: [t,[p,q]] = [[t,p],q] + [p,[t,q]]
                p, q = right.children
                res = br_vec(rewrite(i, p), {q: Fraction(1)})
                add_into(res, br_vec({p: Fraction(1)}, rewrite(i, q)), 1)
        memo[key] = res
        return res

    n = len(basis)
    for i in range(n):
        for j in range(n):
            v = rewrite(i, j)
            if v:
                alg.structure[(i, j)] = dict(v)


def hall_words_bruteforce(r: int, d: int) -> list[str]:
    """All Hall trees of degree d, by exhaustive enumeration of binary trees.

    Independent of :func:`build_algebra`: every binary bracketing of every
    word is generated and filtered with the Hall conditions, using the
    degree-then-foliage order computed from scratch.
    """
    trees: dict[int, list] = {1: [("x", i) for i in range(1, r + 1)]}
    for e in range(2, d + 1):
        trees[e] = [(t1, t2) for s in range(1, e) for t1 in trees[s] for t2 in trees[e - s]]

    def foliage(t):
        return (t[1],) if t[0] == "x" else foliage(t[0]) + foliage(t[1])

    def deg(t):
        return len(foliage(t))

    def less(s, t):
        return (deg(s), foliage(s)) < (deg(t), foliage(t))

    def is_hall(t) -> bool:
        if t[0] == "x":
            return True
        left, right = t
        if not (is_hall(left) and is_hall(right) and less(left, right)):
            return False
        if right[0] != "x":
            p = right[0]
            if less(left, p):
                return False
        return True

    def show(t):
        return f"x{t[1]}" if t[0] == "x" else f"[{show(t[0])},{show(t[1])}]"

    return [show(t) for t in trees[d] if is_hall(t)]
