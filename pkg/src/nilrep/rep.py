"""Graded nilrepresentations of free nilpotent Lie algebras.

A representation is given by generator images placed on the first block
superdiagonal of a block profile ``(a_0, ..., a_k)``.  Every other basis
image is the iterated commutator following its Hall bracketing; a strictly
block-triangular matrix algebra with k+1 blocks is k-step nilpotent, so
the extension is always a homomorphism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactq import (
    RatMatrix,
    ShapeError,
    block_matrix,
    commutator,
    kernel_vector,
    rows_independent,
)
from .freenil import FreeNilAlgebra, build_algebra, center_basis


@dataclass(frozen=True)
class BlockProfile:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ValueError(f"block profile needs >= 2 positive sizes, got {self.dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def k(self) -> int:
        return len(self.dims) - 1

    @property
    def total(self) -> int:
        return sum(self.dims)

    def offsets(self) -> list[int]:
        out = [0]
        for d in self.dims:
            out.append(out[-1] + d)
        return out

    def type_triple(self) -> tuple[int, int, int] | None:
        return tuple(self.dims) if len(self.dims) == 3 else None


@dataclass(eq=False)
class GradedRep:
    algebra: FreeNilAlgebra
    profile: BlockProfile
    gen_images: list[list[RatMatrix]]
    basis_images: list[RatMatrix] = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.profile.total

    def generator_matrix(self, i: int) -> RatMatrix:
        """Full matrix of the generator x_i (1-based)."""
        return self.basis_images[self.algebra.generator(i)]

    def image(self, coords: Sequence) -> RatMatrix:
        """Image of the algebra element with the given basis coordinates."""
        n = self.dimension
        acc = [Fraction(0)] * (n * n)
        for c, m in zip(coords, self.basis_images):
            c = Fraction(c)
            if c:
                for idx, x in enumerate(m.entries):
                    if x:
                        acc[idx] += c * x
        return RatMatrix(n, n, acc)

    def top_right(self, m: RatMatrix) -> RatMatrix:
        off = self.profile.offsets()
        return m.submatrix(0, self.profile.dims[0], off[-2], off[-1])

    def to_json(self, include_images: bool = False) -> dict:
        out = {
            "r": self.algebra.r,
            "k": self.algebra.k,
            "profile": list(self.profile.dims),
            "generators": [[blk.to_json() for blk in blocks] for blocks in self.gen_images],
        }
        if include_images:
            # stored images are checked as given by a later verify
            out["images"] = [m.to_json() for m in self.basis_images]
        return out


def _check_blocks(alg: FreeNilAlgebra, profile: BlockProfile, gen_images) -> list[list[RatMatrix]]:
    if profile.k != alg.k:
        raise ShapeError(f"profile has {profile.k + 1} blocks but the algebra is {alg.k}-step")
    if len(gen_images) != alg.r:
        raise ShapeError(f"expected images for {alg.r} generators, got {len(gen_images)}")
    out = []
    for i, blocks in enumerate(gen_images, start=1):
        blocks = list(blocks)
        if len(blocks) != alg.k:
            raise ShapeError(f"generator x{i}: expected {alg.k} blocks, got {len(blocks)}")
        for j, blk in enumerate(blocks, start=1):
            want = (profile.dims[j - 1], profile.dims[j])
            if blk.shape != want:
                raise ShapeError(f"generator x{i} block {j}: shape {blk.shape}, expected {want}")
        out.append(blocks)
    return out


def extend_generators(alg: FreeNilAlgebra, profile, gen_images) -> GradedRep:
    if not isinstance(profile, BlockProfile):
        profile = BlockProfile(tuple(profile))
    gen_images = _check_blocks(alg, profile, gen_images)
    dims = profile.dims
    images: list[RatMatrix] = []
    for b in alg.basis:
        if b.is_generator:
            blocks = gen_images[b.children[0] - 1]
            images.append(block_matrix({(j - 1, j): blk for j, blk in enumerate(blocks, start=1)}, dims, dims))
        else:
            left, right = b.children
            images.append(commutator(images[left], images[right]))
    return GradedRep(alg, profile, gen_images, images)


def rep_from_json(obj: dict) -> GradedRep:
    """Load a representation; an ``images`` list, if present, replaces the extension."""
    r, k = int(obj["r"]), int(obj["k"])
    alg = build_algebra(r, k)
    gens = [[RatMatrix.from_json(blk) for blk in blocks] for blocks in obj["generators"]]
    rep = extend_generators(alg, BlockProfile(tuple(obj["profile"])), gens)
    if "images" in obj:
        images = [RatMatrix.from_json(m) for m in obj["images"]]
        n = rep.dimension
        if len(images) != alg.dim or any(m.shape != (n, n) for m in images):
            raise ShapeError(f"expected {alg.dim} images of shape {n}x{n}")
        rep.basis_images = images
    return rep


def generators_match(rep: GradedRep) -> tuple[bool, dict | None]:
    """Do the stored generator images equal the block placement of the generator blocks?"""
    dims = rep.profile.dims
    for i, blocks in enumerate(rep.gen_images, start=1):
        placed = block_matrix({(j - 1, j): blk for j, blk in enumerate(blocks, start=1)}, dims, dims)
        if placed != rep.generator_matrix(i):
            return False, {"generator": rep.algebra.name(rep.algebra.generator(i))}
    return True, None


def is_homomorphism(rep: GradedRep) -> tuple[bool, dict | None]:
    """Exact check of pi([b_i, b_j]) == [pi(b_i), pi(b_j)] over all basis pairs."""
    alg = rep.algebra
    imgs = rep.basis_images
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            lhs = commutator(imgs[i], imgs[j]).nonzeros()
            expected = alg.bracket_ids(i, j)
            acc: dict = {}
            for l, c in expected.items():
                for idx, x in imgs[l].nonzeros().items():
                    acc[idx] = acc.get(idx, 0) + c * x
            ok = {idx: x for idx, x in acc.items() if x} == lhs
            if not ok:
                return False, {"pair": [alg.name(i), alg.name(j)], "ids": [i, j]}
    return True, None


def is_nilpotent(rep: GradedRep) -> bool:
    k = rep.algebra.k
    return all(m.power(k + 1).is_zero() for m in rep.basis_images)


def _independence_witness(rep: GradedRep, ids: list[int]) -> tuple[bool, dict | None]:
    rows = [rep.basis_images[i].entries for i in ids]
    if rows_independent(rows):
        return True, None
    vec = kernel_vector(rows)
    alg = rep.algebra
    combo = {alg.name(i): str(c) for i, c in zip(ids, vec) if c}
    return False, {"vanishing_combination": combo}


def is_faithful(rep: GradedRep, full_check: bool = False) -> tuple[bool, dict | None]:
    """Faithfulness by injectivity on the center (degree-k part).

    A nonzero kernel is an ideal of a nilpotent algebra and so meets the
    center.  With ``full_check`` the images of the whole basis are tested
    instead and the two verdicts must agree.
    """
    center_ids = [b.id for b in center_basis(rep.algebra)]
    verdict, witness = _independence_witness(rep, center_ids)
    if full_check:
        full, full_witness = _independence_witness(rep, list(range(rep.algebra.dim)))
        if full != verdict:
            raise AssertionError("center criterion and full injectivity disagree")
        if not verdict and witness is None:
            witness = full_witness
    return verdict, witness


@dataclass
class RepReport:
    is_homomorphism: bool
    is_faithful: bool
    dimension: int
    type_triple: tuple[int, int, int] | None = None
    witness: dict | None = None

    @property
    def ok(self) -> bool:
        return self.is_homomorphism and self.is_faithful

    def to_json(self) -> dict:
        return {
            "is_homomorphism": self.is_homomorphism,
            "is_faithful": self.is_faithful,
            "dimension": self.dimension,
            "type_triple": list(self.type_triple) if self.type_triple else None,
            "witness": self.witness,
        }


def certify(rep: GradedRep, full_check: bool = False) -> RepReport:
    hom, hom_witness = is_homomorphism(rep)
    if hom:
        faithful, faith_witness = is_faithful(rep, full_check=full_check)
    else:
        faithful, faith_witness = False, None
    witness = None
    if not hom:
        witness = {"homomorphism": hom_witness}
    elif not faithful:
        witness = {"faithfulness": faith_witness}
    return RepReport(hom, faithful, rep.dimension, rep.profile.type_triple(), witness)


# -- classical constructions -------------------------------------------------

def _skew_rep(r: int, upper_rows: int, upper_of, lower_of) -> GradedRep:
    """Type (upper_rows, 1, lower_cols) rep with unit entries.

    ``upper_of(i)`` is the row of the middle column set for x_i and
    ``lower_of(i)`` the column of the middle row; either may be None.
    """
    lower_cols = upper_rows
    alg = build_algebra(r, 2)
    gens = []
    for i in range(1, r + 1):
        u, w = upper_of(i), lower_of(i)
        upper = RatMatrix.unit(upper_rows, 1, u, 0) if u is not None else RatMatrix.zeros(upper_rows, 1)
        lower = RatMatrix.unit(1, lower_cols, 0, w) if w is not None else RatMatrix.zeros(1, lower_cols)
        gens.append([upper, lower])
    return extend_generators(alg, BlockProfile((upper_rows, 1, lower_cols)), gens)


def build_pi0(r: int) -> GradedRep:
    """The standard type (r, 1, r) representation of dimension 2r + 1.

    x_i sits in row i of the middle column and in the middle row at the
    column holding x_i in the order x_r, ..., x_1.
    """
    if r < 2:
        raise ValueError("r must be at least 2")
    return _skew_rep(r, r, lambda i: i - 1, lambda i: r - i)


def build_pi1(r: int) -> GradedRep:
    """Type (r-1, 1, r-1) representation of dimension 2r - 1.

    Same pattern as :func:`build_pi0` with x_r dropped from the middle
    column and x_1 dropped from the middle row.
    """
    if r < 2:
        raise ValueError("r must be at least 2")
    return _skew_rep(
        r, r - 1,
        lambda i: i - 1 if i <= r - 1 else None,
        lambda i: r - i if i >= 2 else None,
    )


def build_heisenberg() -> GradedRep:
    alg = build_algebra(2, 2)
    one, zero = RatMatrix.from_rows([[1]]), RatMatrix.from_rows([[0]])
    return extend_generators(alg, BlockProfile((1, 1, 1)), [[one, zero], [zero, one]])


# -- bounds --------------------------------------------------------------------

def ceil_sqrt(n: int) -> int:
    if n <= 0:
        return 0
    s = math.isqrt(n)
    return s if s * s == n else s + 1


def ceil_two_sqrt(n: int) -> int:
    """ceil(2 * sqrt(n)) for a non-negative integer n."""
    return ceil_sqrt(4 * n)


def schur_bound(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    return ceil_two_sqrt(n - 1)


def type_feasible(a: int, p: int, b: int, r: int) -> bool:
    return r <= p * min(a, b) + 1 and r * (r - 1) // 2 <= a * b


def mu_formula(r: int) -> int:
    if r < 2:
        raise ValueError("r must be at least 2")
    if r == 2:
        return 3
    if r == 3:
        return 5
    return ceil_sqrt(2 * r * (r - 1)) + 2


def mu_branches(r: int) -> dict:
    return {
        "sqrt_branch": ceil_sqrt(2 * r * (r - 1)) + 2,
        "small_branch": 2 * r - 1 if r <= 5 else None,
    }
