import random
from fractions import Fraction

import pytest

from nilrep.exactq import RatMatrix, ShapeError, is_independent
from nilrep.freenil import build_algebra
from nilrep.rep import (
    BlockProfile,
    build_heisenberg,
    build_pi0,
    build_pi1,
    certify,
    extend_generators,
    generators_match,
    is_faithful,
    is_homomorphism,
    is_nilpotent,
    mu_formula,
    rep_from_json,
    schur_bound,
    type_feasible,
)

MU_TABLE = {2: 3, 3: 5, 4: 7, 5: 9, 6: 10, 7: 12, 8: 13, 9: 14, 10: 16,
            11: 17, 12: 19, 13: 20, 14: 22, 15: 23, 16: 24}


def random_rep(alg, profile, rng, bound=2):
    dims = profile.dims
    gens = [[RatMatrix(dims[j - 1], dims[j], [rng.randint(-bound, bound) for _ in range(dims[j - 1] * dims[j])])
             for j in range(1, alg.k + 1)] for _ in range(alg.r)]
    return extend_generators(alg, profile, gens)


def pi0_display(r):
    """The generic pi0 matrix written out entrywise from x_i and z_ij."""
    n = 2 * r + 1

    def image(x, z):
        m = [[Fraction(0)] * n for _ in range(n)]
        for i in range(1, r + 1):
            m[i - 1][r] = x[i]            # middle column, row i
            m[r][r + 1 + (r - i)] = x[i]  # middle row, x_r first
        for i in range(1, r + 1):
            for j in range(i + 1, r + 1):
                # [x_i, x_j] pairs row i with the column of x_j, and row j with that of x_i
                m[i - 1][r + 1 + (r - j)] += z[(i, j)]
                m[j - 1][r + 1 + (r - i)] -= z[(i, j)]
        return RatMatrix.from_rows(m)

    return image


def test_profile_basics():
    p = BlockProfile((3, 1, 3))
    assert p.k == 2 and p.total == 7
    assert p.offsets() == [0, 3, 4, 7]
    assert p.type_triple() == (3, 1, 3)
    with pytest.raises(ValueError):
        BlockProfile((3, 0, 3))


def test_extend_zero():
    alg = build_algebra(3, 2)
    zero = [[RatMatrix.zeros(2, 1), RatMatrix.zeros(1, 2)] for _ in range(3)]
    rep = extend_generators(alg, (2, 1, 2), zero)
    assert all(m.is_zero() for m in rep.basis_images)
    ok, witness = is_faithful(rep)
    assert not ok and witness["vanishing_combination"]


def test_heisenberg():
    rep = build_heisenberg()
    assert rep.basis_images[2] == RatMatrix.unit(3, 3, 0, 2)
    assert certify(rep).ok


def test_shape_errors():
    alg = build_algebra(2, 2)
    with pytest.raises(ShapeError):
        extend_generators(alg, (1, 1, 1), [[RatMatrix.zeros(1, 1), RatMatrix.zeros(1, 1)]])
    with pytest.raises(ShapeError):
        extend_generators(alg, (1, 1, 1), [[RatMatrix.zeros(2, 1), RatMatrix.zeros(1, 1)]] * 2)
    with pytest.raises(ShapeError):
        extend_generators(alg, (1, 1, 1, 1), [[RatMatrix.zeros(1, 1)] * 3] * 2)


def test_center_image_is_block_commutator():
    alg = build_algebra(4, 2)
    rng = random.Random(8)
    rep = random_rep(alg, BlockProfile((3, 2, 2)), rng, bound=5)
    up = [g[0] for g in rep.gen_images]
    low = [g[1] for g in rep.gen_images]
    for i in range(1, 5):
        for j in range(i + 1, 5):
            expected = up[i - 1] @ low[j - 1] - up[j - 1] @ low[i - 1]
            assert rep.top_right(rep.basis_images[alg.z(i, j)]) == expected


def test_perturbed_image_gives_pair_witness():
    rep = build_pi0(3)
    alg = rep.algebra
    zid = alg.z(1, 2)
    bumped = rep.basis_images[zid] + RatMatrix.unit(7, 7, 0, 6)
    rep.basis_images = rep.basis_images[:zid] + [bumped] + rep.basis_images[zid + 1:]
    ok, witness = is_homomorphism(rep)
    assert not ok
    assert witness["pair"] == ["x1", "x2"]
    report = certify(rep)
    assert not report.ok and report.witness["homomorphism"]["ids"] == [0, 1]


@pytest.mark.parametrize("r", range(2, 13))
def test_pi0(r):
    rep = build_pi0(r)
    assert rep.dimension == 2 * r + 1
    assert rep.profile.dims == (r, 1, r)
    report = certify(rep, full_check=True)
    assert report.ok and report.witness is None
    assert is_nilpotent(rep)


@pytest.mark.parametrize("r", range(2, 13))
def test_pi1(r):
    rep = build_pi1(r)
    assert rep.dimension == 2 * r - 1
    assert rep.profile.dims == (r - 1, 1, r - 1)
    assert certify(rep, full_check=True).ok


@pytest.mark.parametrize("r", [2, 3, 5])
def test_pi0_matches_display(r):
    rep = build_pi0(r)
    alg = rep.algebra
    rng = random.Random(r)
    display = pi0_display(r)
    for _ in range(5):
        x = {i: Fraction(rng.randint(-9, 9)) for i in range(1, r + 1)}
        z = {(i, j): Fraction(rng.randint(-9, 9)) for i in range(1, r + 1) for j in range(i + 1, r + 1)}
        coords = [x[i] for i in range(1, r + 1)] + [z[(i, j)] for i in range(1, r + 1) for j in range(i + 1, r + 1)]
        assert rep.image(coords) == display(x, z)


def test_pi0_z12_single_skew_pair():
    rep = build_pi0(4)
    alg = rep.algebra
    corner = rep.top_right(rep.basis_images[alg.z(1, 2)])
    assert sorted(corner.nonzeros().values()) == [-1, 1]
    others = [rep.top_right(rep.basis_images[alg.z(i, j)]) for i in range(1, 5) for j in range(i + 1, 5)]
    assert is_independent(others)


def test_pi1_small_cases():
    assert build_pi1(3).dimension == mu_formula(3)
    assert build_pi1(4).dimension == 7
    assert build_pi1(2).dimension == 3


def test_type_feasible():
    assert type_feasible(3, 1, 3, 4)
    assert not type_feasible(2, 1, 2, 4)
    for r in range(2, 12):
        best = min(a + b + 1 for a in range(1, 2 * r) for b in range(1, 2 * r) if type_feasible(a, 1, b, r))
        assert best == 2 * r - 1


def test_schur_bound_examples():
    assert schur_bound(1) == 0
    assert schur_bound(10) == 6
    assert schur_bound(45) == 14
    with pytest.raises(ValueError):
        schur_bound(0)


def test_schur_bound_exact_ceiling():
    for n in range(1, 3000):
        s = schur_bound(n)
        assert s * s >= 4 * (n - 1)
        assert s == 0 or (s - 1) * (s - 1) < 4 * (n - 1)


def test_mu_table():
    assert {r: mu_formula(r) for r in range(2, 17)} == MU_TABLE
    for r in range(4, 17):
        assert mu_formula(r) >= schur_bound(r * (r - 1) // 2)


def test_json_round_trip_and_images():
    rep = build_pi1(4)
    again = rep_from_json(rep.to_json())
    assert again.basis_images == rep.basis_images
    stored = rep_from_json(rep.to_json(include_images=True))
    assert generators_match(stored) == (True, None)
    obj = rep.to_json(include_images=True)
    obj["images"][0]["entries"][3] = "5"
    broken = rep_from_json(obj)
    ok, witness = generators_match(broken)
    assert not ok and witness == {"generator": "x1"}


@pytest.mark.parametrize("r,k", [(2, 2), (3, 2), (4, 2), (5, 2), (2, 3), (3, 3), (2, 4)])
def test_every_extension_is_homomorphism(r, k):
    alg = build_algebra(r, k)
    rng = random.Random(r * 10 + k)
    for _ in range(5):
        profile = BlockProfile(tuple(rng.randint(1, 3) for _ in range(k + 1)))
        rep = random_rep(alg, profile, rng)
        assert is_homomorphism(rep)[0]
        assert is_nilpotent(rep)


@pytest.mark.parametrize("r,k", [(2, 2), (3, 2), (2, 3), (3, 3), (2, 4)])
def test_faithfulness_criteria_agree(r, k):
    alg = build_algebra(r, k)
    rng = random.Random(f"agree:{r}:{k}")
    verdicts = set()
    for _ in range(40):
        profile = BlockProfile(tuple(rng.randint(1, 3) for _ in range(k + 1)))
        rep = random_rep(alg, profile, rng, bound=rng.choice([0, 1, 2]))
        # full_check raises if the two criteria disagree
        verdicts.add(is_faithful(rep, full_check=True)[0])
    assert verdicts == {True, False}
