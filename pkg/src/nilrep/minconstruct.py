"""Minimal faithful representations of free 2-step nilpotent Lie algebras.

Pipeline for rank r >= 4:

1. ``(a, b) = integer_square_roots(r(r-1)/2)``.
2. A sequence of a x 2 matrices A_i (plus one extra A') and 2 x b matrices
   B_j whose triangular family of products A_i B_j (j <= i) is a basis of
   the a x b matrices.  Either sampled at random or built by the inductive
   construction in :func:`recursive_sab`.
3. Shift and scale into X_i = eps^i A_i, Y_i = B_i so that the commutator
   blocks X_i Y_j - X_j Y_i are independent.
4. Place X_i, Y_i on the superdiagonal of a type (a, 2, b) block matrix.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .exactq import (
    MODULUS,
    RatMatrix,
    bareiss_rank,
    is_independent,
    modular_full_column_rank_batch,
    rational_to_str,
    _integer_row,
)
from .freenil import build_algebra
from .rep import (
    BlockProfile,
    GradedRep,
    build_heisenberg,
    build_pi1,
    ceil_sqrt,
    extend_generators,
    is_faithful,
    is_homomorphism,
)

EXHAUSTIVE_LIMIT = 10 ** 6
SAMPLED_SUBSETS = 10 ** 4
BASE_CASE_MAX = 4


class CertificationError(RuntimeError):
    """A construction that must be certified failed its exact check."""


class AttemptsExhausted(RuntimeError):
    pass


# -- arithmetic on (a, b) ------------------------------------------------------

@dataclass(frozen=True)
class SqrtPair:
    a: int
    b: int


@dataclass(frozen=True)
class TriangularRep:
    n: int
    i0: int


def integer_square_roots(n: int) -> SqrtPair:
    if n < 1:
        raise ValueError("n must be positive")
    a = ceil_sqrt(n)
    b = a - 1 if a * (a - 1) >= n else a
    return SqrtPair(a, b)


def triangular_rep(m: int) -> TriangularRep:
    if m < 0:
        raise ValueError("m must be non-negative")
    n = (math.isqrt(8 * m + 1) - 1) // 2
    return TriangularRep(n, m - n * (n + 1) // 2)


def sab_conditions(a: int, b: int) -> bool:
    if a == b + 1:
        return True
    if a == b:
        return triangular_rep(a * b).i0 <= b
    return False


# -- sequences -----------------------------------------------------------------

@dataclass(eq=False)
class SabSequence:
    a: int
    b: int
    n: int
    i0: int
    A: list[RatMatrix]
    A_prime: RatMatrix
    B: list[RatMatrix]

    def a_list(self) -> list[RatMatrix]:
        """A_1, ..., A_i0, A', A_(i0+1), ..., A_n."""
        return self.A[:self.i0] + [self.A_prime] + self.A[self.i0:]

    def products(self) -> list[RatMatrix]:
        out = []
        for i in range(1, self.n + 1):
            out.extend(self.A[i - 1] @ self.B[j - 1] for j in range(1, i + 1))
            if i == self.i0:
                out.extend(self.A_prime @ self.B[j - 1] for j in range(1, self.i0 + 1))
        return out

    def columns(self) -> list[tuple]:
        return [m.column(c) for m in self.a_list() for c in range(2)]

    def to_json(self) -> dict:
        return {
            "a": self.a, "b": self.b, "n": self.n, "i0": self.i0,
            "A": [m.to_json() for m in self.A],
            "A_prime": self.A_prime.to_json(),
            "B": [m.to_json() for m in self.B],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SabSequence":
        return cls(
            int(obj["a"]), int(obj["b"]), int(obj["n"]), int(obj["i0"]),
            [RatMatrix.from_json(m) for m in obj["A"]],
            RatMatrix.from_json(obj["A_prime"]),
            [RatMatrix.from_json(m) for m in obj["B"]],
        )


def _check_shapes(seq: SabSequence) -> None:
    tri = triangular_rep(seq.a * seq.b)
    if (tri.n, tri.i0) != (seq.n, seq.i0):
        raise ValueError(f"(n, i0) = ({seq.n}, {seq.i0}) is not the triangular representation of {seq.a * seq.b}")
    if len(seq.A) != seq.n or len(seq.B) != seq.n:
        raise ValueError("sequence lengths must equal n")
    for m in seq.A + [seq.A_prime]:
        if m.shape != (seq.a, 2):
            raise ValueError(f"A-matrix of shape {m.shape}, expected {(seq.a, 2)}")
    for m in seq.B:
        if m.shape != (2, seq.b):
            raise ValueError(f"B-matrix of shape {m.shape}, expected {(2, seq.b)}")


def verify_sab(seq: SabSequence) -> bool:
    """True iff the triangular family of products is a basis of the a x b matrices."""
    _check_shapes(seq)
    prods = seq.products()
    if len(prods) != seq.a * seq.b:
        raise CertificationError(f"{len(prods)} products for a {seq.a}x{seq.b} space")
    return is_independent(prods)


@dataclass(frozen=True)
class ColumnCheck:
    ok: bool
    mode: str  # "exhaustive" or "probabilistic"
    subsets_checked: int
    size: int


def _integer_columns(cols: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    return [_integer_row(c)[0] for c in cols]


def _subsets_independent(cols: list[list[int]], subsets: np.ndarray) -> bool:
    residues = np.array([[x % MODULUS for x in c] for c in cols], dtype=np.int64)
    chunk = 20000
    for start in range(0, len(subsets), chunk):
        part = subsets[start:start + chunk]
        # (batch, rows, size): the chosen columns side by side
        stacked = np.transpose(residues[part], (0, 2, 1))
        ok = modular_full_column_rank_batch(stacked)
        for bad in np.nonzero(~ok)[0]:
            rows = [list(cols[c]) for c in part[bad]]
            if bareiss_rank(rows) < len(rows):
                return False
    return True


def check_column_property(seq: SabSequence, size: int | None = None, seed: int = 0) -> ColumnCheck:
    """Every ``size``-subset of the columns of the A-matrices is independent.

    Exhaustive when there are at most 10**6 subsets, otherwise 10**4 seeded
    random subsets are tested and the result is marked probabilistic.
    """
    size = seq.b if size is None else size
    cols = _integer_columns(seq.columns())
    count = len(cols)
    if size > count:
        return ColumnCheck(True, "exhaustive", 0, size)
    if any(not any(c) for c in cols):
        return ColumnCheck(False, "exhaustive", 0, size)
    if size > seq.a:
        return ColumnCheck(False, "exhaustive", 0, size)
    total = math.comb(count, size)
    if total <= EXHAUSTIVE_LIMIT:
        subsets = np.array(list(itertools.combinations(range(count), size)), dtype=np.int64)
        return ColumnCheck(_subsets_independent(cols, subsets), "exhaustive", total, size)
    rng = random.Random(seed)
    subsets = np.array([sorted(rng.sample(range(count), size)) for _ in range(SAMPLED_SUBSETS)], dtype=np.int64)
    return ColumnCheck(_subsets_independent(cols, subsets), "probabilistic", SAMPLED_SUBSETS, size)


def verify_column_property(seq: SabSequence, size: int | None = None) -> bool:
    return check_column_property(seq, size).ok


# -- random construction ---------------------------------------------------------

def attempt_seed(seed, attempt: int) -> str:
    return f"{seed}:{attempt}"


def _random_matrix(rng: random.Random, rows: int, cols: int, bound: int) -> RatMatrix:
    return RatMatrix(rows, cols, [rng.randint(-bound, bound) for _ in range(rows * cols)])


def sample_sab(a: int, b: int, rng: random.Random, bound: int) -> SabSequence:
    tri = triangular_rep(a * b)
    A = [_random_matrix(rng, a, 2, bound) for _ in range(tri.n + 1)]
    B = [_random_matrix(rng, 2, b, bound) for _ in range(tri.n)]
    ap = A[tri.i0]
    A = A[:tri.i0] + A[tri.i0 + 1:]
    return SabSequence(a, b, tri.n, tri.i0, A, ap, B)


@dataclass
class RandomSabResult:
    seq: SabSequence
    attempts: int
    column_check: ColumnCheck | None


def random_sab_with_stats(a: int, b: int, seed=0, entry_bound: int = 99, max_attempts: int = 25,
                          check_columns: bool = True, column_size: int | None = None) -> RandomSabResult:
    if a < 1 or b < 1:
        raise ValueError("a and b must be positive")
    for attempt in range(max_attempts):
        rng = random.Random(attempt_seed(seed, attempt))
        seq = sample_sab(a, b, rng, entry_bound)
        if not verify_sab(seq):
            continue
        col = None
        if check_columns:
            col = check_column_property(seq, column_size)
            if not col.ok:
                continue
        return RandomSabResult(seq, attempt + 1, col)
    raise AttemptsExhausted(f"no verified S_({a},{b}) sequence in {max_attempts} attempts (bound {entry_bound})")


def random_sab(a: int, b: int, seed=0, entry_bound: int = 99, max_attempts: int = 25,
               check_columns: bool = True, column_size: int | None = None) -> SabSequence:
    """Seeded random sequence passing :func:`verify_sab` (and the column property)."""
    return random_sab_with_stats(a, b, seed, entry_bound, max_attempts, check_columns, column_size).seq


# -- inductive construction -------------------------------------------------------

@dataclass
class TraceStep:
    a: int
    b: int
    n: int
    i0: int
    case: str
    i1: int | None = None
    child: tuple[int, int] | None = None
    certified: bool = False
    perturbation: int | None = None
    column_mode: str | None = None
    note: str | None = None

    def to_json(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def recursion_case(a: int, b: int) -> tuple[str, int, int, int | None]:
    """(case label, child a, child b, pivot i1) for the inductive step at (a, b)."""
    tri = triangular_rep(a * b)
    n, i0 = tri.n, tri.i0
    if a <= BASE_CASE_MAX:
        return "base", a, b, None
    if a == b + 1:
        i1 = 2 * b - i0
        if i1 < n:
            return "a=b+1, 2b-i0<n", b, b - 1, i1
        return "a=b+1, 2b-i0>=n", b, b, b - i0
    if a == b and i0 < b:
        return "a=b, i0<b", b, b - 1, b - i0
    if a == b and i0 == b:
        return "a=b=i0", b, b - 1, 0
    raise ValueError(f"({a}, {b}) violates the S_ab conditions")


def _lift(seq: SabSequence, pad: int, i1: int, a: int, b: int, special_A: RatMatrix | None,
          A_prime: RatMatrix) -> SabSequence:
    """Transpose-and-reverse a child sequence into one for (a, b).

    Child B-matrices become padded A-matrices and child A-matrices become
    B-matrices, both in reverse order, with the child A' placed at the
    pivot position i1.  ``i1 == 0`` means no pivot row.
    """
    tri = triangular_rep(a * b)
    n = tri.n
    tA, tB = seq.A, seq.B

    def At(idx):  # child A_idx, 1-based
        return tA[idx - 1]

    def Bt(idx):
        return tB[idx - 1]

    B, A = [], []
    for i in range(1, n + 1):
        if i < i1:
            B.append(At(n - i).T)
            A.append(Bt(n - i).T.pad_rows(pad))
        elif i == i1:
            B.append(seq.A_prime.T)
            A.append(special_A)
        else:
            B.append(At(n + 1 - i).T)
            A.append(Bt(n + 1 - i).T.pad_rows(pad))
    return SabSequence(a, b, n, tri.i0, A, A_prime, B)


def _special_matrices(case: str, a: int, i0: int, i1: int, repaired: bool) -> tuple[RatMatrix | None, RatMatrix]:
    """Unit-pattern matrices filling the padded bottom rows."""
    if case == "a=b+1, 2b-i0<n":
        if not repaired:
            special = RatMatrix.unit(a, 2, a - 2, 1)
            prime = RatMatrix.unit(a, 2, a - 2, 0) + RatMatrix.unit(a, 2, a - 1, 0)
            return special, prime
        # The larger of the two product groups gets the full 2x2 identity in
        # the bottom rows so that the groups are not confined to b-dimensional
        # subspaces; the smaller one keeps a single unit entry.
        identity = RatMatrix.unit(a, 2, a - 2, 0) + RatMatrix.unit(a, 2, a - 1, 1)
        single = RatMatrix.unit(a, 2, a - 2, 1)
        if i0 >= i1:
            return single, identity
        return identity, RatMatrix.unit(a, 2, a - 2, 0)
    special = RatMatrix.unit(a, 2, a - 1, 1) if i1 else None
    return special, RatMatrix.unit(a, 2, a - 1, 0)


def generic_point(seq: SabSequence, seed, column_size: int, max_tries: int = 25,
                  bound: int = 9) -> tuple[SabSequence, int, ColumnCheck]:
    """Move a certified sequence to a nearby point that also has the column property.

    Both conditions are Zariski open and ``seq`` lies in the first one, so
    ``seq + t R`` satisfies both for all but finitely many t.
    """
    rng = random.Random(f"generic:{seed}:{seq.a}x{seq.b}")
    R = sample_sab(seq.a, seq.b, rng, bound)
    for t in range(1, max_tries + 1):
        cand = SabSequence(
            seq.a, seq.b, seq.n, seq.i0,
            [x + y.scale(t) for x, y in zip(seq.A, R.A)],
            seq.A_prime + R.A_prime.scale(t),
            [x + y.scale(t) for x, y in zip(seq.B, R.B)],
        )
        if not verify_sab(cand):
            continue
        col = check_column_property(cand, column_size)
        if col.ok:
            return cand, t, col
    raise CertificationError(f"no generic point near the ({seq.a},{seq.b}) sequence in {max_tries} tries")


_BASE_CACHE: dict[tuple[int, int], SabSequence] = {}


def base_sequence(a: int, b: int) -> SabSequence:
    """Seeded random base case with both the basis and the column property (cached)."""
    key = (a, b)
    if key not in _BASE_CACHE:
        _BASE_CACHE[key] = random_sab(a, b, seed=f"base-{a}x{b}", entry_bound=9, max_attempts=200,
                                      check_columns=True, column_size=a)
    return _BASE_CACHE[key]


@dataclass
class RecursiveResult:
    seq: SabSequence
    trace: list[TraceStep] = field(default_factory=list)


def recursive_sab_with_trace(a: int, b: int, repair: bool = True, seed=0) -> RecursiveResult:
    """Inductive construction of an S_ab sequence, certified at every level.

    Each level builds the explicit witness from a generic child sequence and
    checks it exactly.  If the literal unit pattern of the two-row case
    fails, the repaired pattern is used instead and the trace says so.
    """
    if a < b:
        raise ValueError("need a >= b")
    if not sab_conditions(a, b) and a > BASE_CASE_MAX:
        raise ValueError(f"({a}, {b}) violates the S_ab conditions")
    trace: list[TraceStep] = []
    seq = _recurse(a, b, trace, repair, seed)
    return RecursiveResult(seq, trace)


def _recurse(a: int, b: int, trace: list[TraceStep], repair: bool, seed) -> SabSequence:
    case, ca, cb, i1 = recursion_case(a, b)
    tri = triangular_rep(a * b)
    if case == "base":
        seq = base_sequence(a, b)
        step = TraceStep(a, b, tri.n, tri.i0, case, certified=verify_sab(seq), column_mode="exhaustive")
        trace.append(step)
        if not step.certified:
            raise CertificationError(f"base case ({a},{b}) failed certification")
        return seq

    child = _recurse(ca, cb, trace, repair, seed)
    # The lift needs every b-subset of child columns independent (child columns live in K^b).
    if trace[-1].case != "base":
        child, t, col = generic_point(child, seed, column_size=b)
        trace[-1].perturbation = t
        trace[-1].column_mode = col.mode
    pad = 2 if case == "a=b+1, 2b-i0<n" else 1
    step = TraceStep(a, b, tri.n, tri.i0, case, i1=i1, child=(ca, cb))
    special, prime = _special_matrices(case, a, tri.i0, i1, repaired=False)
    seq = _lift(child, pad, i1, a, b, special, prime)
    if verify_sab(seq):
        step.certified = True
    elif repair and case == "a=b+1, 2b-i0<n":
        special, prime = _special_matrices(case, a, tri.i0, i1, repaired=True)
        seq = _lift(child, pad, i1, a, b, special, prime)
        step.certified = verify_sab(seq)
        step.note = "literal unit pattern failed; repaired two-row pattern used"
    trace.append(step)
    if not step.certified:
        raise CertificationError(
            f"inductive step at ({a},{b}) [{case}] failed certification; trace: "
            + "; ".join(f"{s.a}x{s.b}:{s.case}:{'ok' if s.certified else 'FAIL'}" for s in trace)
        )
    return seq


def recursive_sab(a: int, b: int) -> SabSequence:
    return recursive_sab_with_trace(a, b).seq


# -- from products to a representation ------------------------------------------

@dataclass(eq=False)
class XYSequence:
    r: int
    X: list[RatMatrix]
    Y: list[RatMatrix]
    epsilon: Fraction

    def z(self, i: int, j: int) -> RatMatrix:
        """X_i Y_j - X_j Y_i (1-based)."""
        return self.X[i - 1] @ self.Y[j - 1] - self.X[j - 1] @ self.Y[i - 1]

    def z_family(self) -> list[RatMatrix]:
        return [self.z(i, j) for i in range(2, self.r + 1) for j in range(1, i)]

    def is_independent(self) -> bool:
        return is_independent(self.z_family())


def primes() -> Iterable[int]:
    found: list[int] = []
    c = 2
    while True:
        if all(c % p for p in found if p * p <= c):
            found.append(c)
            yield c
        c += 1


def build_xy(r: int, seq: SabSequence, epsilon_candidates: Iterable | None = None) -> XYSequence:
    if seq.n < r - 1:
        raise ValueError(f"sequence has n={seq.n}, need at least r-1={r - 1}")
    a, b = seq.a, seq.b
    A = [RatMatrix.zeros(a, 2)] + list(seq.A[:r - 1])
    Bs = list(seq.B[:r - 1]) + [RatMatrix.zeros(2, b)]
    candidates = primes() if epsilon_candidates is None else epsilon_candidates
    for eps in candidates:
        eps = Fraction(eps)
        if eps == 0:
            continue
        X = [A[i - 1].scale(eps ** i) for i in range(1, r + 1)]
        xy = XYSequence(r, X, list(Bs), eps)
        if xy.is_independent():
            return xy
        if epsilon_candidates is None and eps > 1000:
            break
    raise AttemptsExhausted("no epsilon made the commutator blocks independent")


def assemble(xy: XYSequence) -> GradedRep:
    a, b = xy.X[0].rows, xy.Y[0].cols
    alg = build_algebra(xy.r, 2)
    gens = [[xy.X[i], xy.Y[i]] for i in range(xy.r)]
    rep = extend_generators(alg, BlockProfile((a, 2, b)), gens)
    hom, _ = is_homomorphism(rep)
    faithful, witness = is_faithful(rep)
    if not (hom and faithful):
        raise CertificationError(f"assembled representation failed certification: {witness}")
    return rep


@dataclass
class Construction:
    rep: GradedRep
    strategy: str
    seed: object
    epsilon: Fraction | None = None
    attempts: int | None = None
    pair: SqrtPair | None = None
    trace: list[TraceStep] | None = None

    def certificate(self) -> dict:
        return {
            "strategy": self.strategy,
            "seed": self.seed,
            "pair": [self.pair.a, self.pair.b] if self.pair else None,
            "det_nonzero": True,
            "epsilon": rational_to_str(self.epsilon) if self.epsilon is not None else None,
            "attempts": self.attempts,
            "trace": [s.to_json() for s in self.trace] if self.trace else None,
        }


def construct(r: int, strategy: str = "random", seed=1, entry_bound: int = 99,
              max_attempts: int = 25) -> Construction:
    if r < 2:
        raise ValueError("r must be at least 2")
    if strategy not in ("random", "recursive"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if r == 2:
        return Construction(build_heisenberg(), strategy, seed)
    if r == 3:
        return Construction(build_pi1(3), strategy, seed)
    pair = integer_square_roots(r * (r - 1) // 2)
    trace = None
    attempts = None
    if strategy == "random":
        # The column property only matters for inputs to the inductive step.
        res = random_sab_with_stats(pair.a, pair.b, seed, entry_bound, max_attempts, check_columns=False)
        seq, attempts = res.seq, res.attempts
    else:
        rec = recursive_sab_with_trace(pair.a, pair.b, seed=seed)
        seq, trace = rec.seq, rec.trace
    xy = build_xy(r, seq)
    rep = assemble(xy)
    return Construction(rep, strategy, seed, xy.epsilon, attempts, pair, trace)


def build_minimal(r: int, strategy: str = "random", seed=1) -> GradedRep:
    return construct(r, strategy, seed).rep
