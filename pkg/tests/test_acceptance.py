"""Acceptance criteria, one test each.  Every test prints a single
``ACCEPTANCE <n> PASS|FAIL`` line (visible with ``pytest -v``) and then
asserts the same condition."""

import itertools
import json
import random
import time
from fractions import Fraction

import pytest

from nilrep.cli import main
from nilrep.exactq import RatMatrix, is_independent, rank
from nilrep.freenil import build_algebra, graded_dims, hall_words_bruteforce
from nilrep.minconstruct import (
    construct,
    integer_square_roots,
    random_sab,
    recursive_sab_with_trace,
    verify_sab,
)
from nilrep.rep import (
    BlockProfile,
    build_pi0,
    build_pi1,
    certify,
    extend_generators,
    is_faithful,
    mu_formula,
)
from nilrep.searchk import SearchConfig, search_min_dim

MU_TABLE = {2: 3, 3: 5, 4: 7, 5: 9, 6: 10, 7: 12, 8: 13, 9: 14, 10: 16,
            11: 17, 12: 19, 13: 20, 14: 22, 15: 23, 16: 24}
SUITE_6 = [(2, 2), (3, 2), (4, 2), (5, 2), (2, 3), (3, 3), (2, 4)]


@pytest.fixture
def verdict(capsys):
    def record(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return record


def cli_json(tmp_path, name, *argv):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def naive_rank(rows):
    m = [[Fraction(x) for x in row] for row in rows]
    rk = 0
    for c in range(len(m[0])):
        piv = next((i for i in range(rk, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        for i in range(len(m)):
            if i != rk and m[i][c] != 0:
                f = m[i][c] / m[rk][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[rk])]
        rk += 1
    return rk


def test_criterion_1_mu_table(tmp_path, verdict):
    start = time.monotonic()
    bad = []
    for r in range(4, 17):
        code, path = cli_json(tmp_path, f"rep{r}.json", "construct", "--r", str(r), "--seed", "1")
        obj = json.loads(path.read_text())
        checks = obj["certificate"]["checks"]
        if code != 0 or obj["report"]["dimension"] != MU_TABLE[r] or not (
                checks["is_homomorphism"] and checks["is_faithful"]):
            bad.append(r)
    elapsed = time.monotonic() - start
    verdict(1, not bad and elapsed < 120,
            f"construct r=4..16 matches the table, mismatches {bad}, {elapsed:.1f}s")


def test_criterion_2_small_ranks(verdict):
    dims = {}
    for r in (2, 3):
        rep = construct(r, seed=1).rep
        dims[r] = (rep.dimension, certify(rep, full_check=True).ok)
    verdict(2, dims == {2: (3, True), 3: (5, True)}, f"(dimension, certified) {dims}")


def test_criterion_3_classical(verdict):
    bad = []
    for r in range(2, 13):
        p0, p1 = build_pi0(r), build_pi1(r)
        if not (p0.dimension == 2 * r + 1 and certify(p0, full_check=True).ok):
            bad.append(("pi0", r))
        if not (p1.dimension == 2 * r - 1 and certify(p1, full_check=True).ok):
            bad.append(("pi1", r))
    verdict(3, not bad, f"pi0/pi1 for r=2..12, failures {bad}")


def test_criterion_4_recursive_vs_random(verdict):
    start = time.monotonic()
    pairs = sorted({(p.a, p.b) for r in range(4, 17) for p in [integer_square_roots(r * (r - 1) // 2)]})
    bad = []
    for a, b in pairs:
        rec = recursive_sab_with_trace(a, b)
        if not (verify_sab(rec.seq) and all(step.certified for step in rec.trace)):
            bad.append(("recursive", a, b))
        if not verify_sab(random_sab(a, b, seed=1)):
            bad.append(("random", a, b))
    elapsed = time.monotonic() - start
    verdict(4, not bad and elapsed < 60, f"pairs {pairs}, failures {bad}, {elapsed:.1f}s")


def test_criterion_5_rank_oracle(verdict):
    rng = random.Random(5)
    mismatches = 0
    for _ in range(500):
        rows, cols = rng.randint(1, 8), rng.randint(1, 8)
        m = [[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)]
        if rows > 2 and rng.random() < 0.5:
            i, j, l = rng.sample(range(rows), 3)
            c = rng.randint(-3, 3)
            m[i] = [x + c * y for x, y in zip(m[j], m[l])]
        if rank(RatMatrix.from_rows(m)) != naive_rank(m):
            mismatches += 1
    verdict(5, mismatches == 0, f"500 random matrices, {mismatches} rank mismatches")


def _bracket(alg, u, v):
    out = {}
    for i, ci in u.items():
        for j, cj in v.items():
            for l, c in alg.bracket_ids(i, j).items():
                out[l] = out.get(l, 0) + ci * cj * c
    return {l: c for l, c in out.items() if c}


def _sum(*vs):
    out = {}
    for v in vs:
        for l, c in v.items():
            out[l] = out.get(l, 0) + c
    return {l: c for l, c in out.items() if c}


def test_criterion_6_algebra_properties(verdict):
    failures = []
    for r, k in SUITE_6:
        alg = build_algebra(r, k)
        n = alg.dim
        for i, j in itertools.product(range(n), repeat=2):
            if _sum(alg.bracket_ids(i, j), alg.bracket_ids(j, i)):
                failures.append(("antisymmetry", r, k, i, j))
        for i, j, l in itertools.product(range(n), repeat=3):
            bi, bj, bl = {i: 1}, {j: 1}, {l: 1}
            if _sum(_bracket(alg, bi, _bracket(alg, bj, bl)), _bracket(alg, bj, _bracket(alg, bl, bi)),
                    _bracket(alg, bl, _bracket(alg, bi, bj))):
                failures.append(("jacobi", r, k, i, j, l))
    for r in range(2, 5):
        for k in range(2, 5):
            if graded_dims(r, k) != [len(hall_words_bruteforce(r, d)) for d in range(1, k + 1)]:
                failures.append(("dims", r, k))
    verdict(6, not failures, f"antisymmetry, Jacobi and Hall counts, failures {failures[:5]}")


@pytest.mark.parametrize("r,k,bound", [(2, 3, 6), (3, 3, 9), (2, 4, 8)])
def test_criterion_7_step_three_four(tmp_path, verdict, r, k, bound):
    start = time.monotonic()
    code, path = cli_json(tmp_path, "search.json", "search", "--r", str(r), "--k", str(k), "--seed", "1",
                          "--time-limit", "300")
    elapsed = time.monotonic() - start
    obj = json.loads(path.read_text())
    ok = code == 0 and obj["best_dim"] <= bound and obj["trials_run"] <= 10 ** 4 and elapsed < 300
    verdict(7, ok, f"L_({r},{k}) best_dim {obj.get('best_dim')} <= {bound}, "
                   f"{obj.get('trials_run')} trials, {elapsed:.1f}s")


def test_criterion_8_faithfulness_equivalence(verdict):
    disagreements, counts = [], {}
    for r, k in SUITE_6:
        alg = build_algebra(r, k)
        rng = random.Random(f"criterion8:{r}:{k}")
        seen = set()
        for _ in range(100):
            dims = tuple(rng.randint(1, 4) for _ in range(k + 1))
            bound = rng.choice([0, 1, 1, 2, 3])
            gens = [[RatMatrix(dims[j - 1], dims[j], [rng.randint(-bound, bound) for _ in range(dims[j - 1] * dims[j])])
                     for j in range(1, k + 1)] for _ in range(r)]
            rep = extend_generators(alg, BlockProfile(dims), gens)
            center, _ = is_faithful(rep)
            full = is_independent(rep.basis_images)
            seen.add(center)
            if center != full:
                disagreements.append((r, k, dims))
        counts[(r, k)] = sorted(seen)
    verdict(8, not disagreements, f"100 trials per algebra, disagreements {disagreements}, verdicts seen {counts}")


def test_criterion_9_lower_bound_guard(verdict):
    below = []
    for r in range(2, 17):
        for strategy in ("random", "recursive"):
            rep = construct(r, strategy=strategy, seed=1).rep
            if certify(rep).ok and rep.dimension < mu_formula(r):
                below.append((strategy, r, rep.dimension))
    for r in range(2, 6):
        res = search_min_dim(SearchConfig(r, 2, trials_per_profile=100))
        if res.best_dim < mu_formula(r):
            below.append(("search", r, res.best_dim))
    verdict(9, not below, f"no certified L_(r,2) rep below mu_formula, violations {below}")


def test_criterion_10_determinism(tmp_path, verdict):
    commands = [
        ["dim", "--r", "3", "--k", "3"],
        ["mu", "--r", "9"],
        ["construct", "--r", "9", "--seed", "3"],
        ["construct", "--r", "8", "--strategy", "recursive"],
        ["sab", "--a", "6", "--b", "5", "--strategy", "recursive"],
        ["sab", "--a", "5", "--b", "5", "--seed", "2"],
        ["search", "--r", "2", "--k", "4", "--seed", "7"],
    ]
    differ = []
    for idx, argv in enumerate(commands):
        blobs = []
        for rep in range(2):
            main([*argv, "--out", str(tmp_path / f"{idx}_{rep}.json")])
            blobs.append((tmp_path / f"{idx}_{rep}.json").read_bytes())
        if blobs[0] != blobs[1]:
            differ.append(argv[0])
    rep_file = tmp_path / "2_0.json"
    outs = []
    for rep in range(2):
        main(["verify", str(rep_file), "--out", str(tmp_path / f"v{rep}.json")])
        outs.append((tmp_path / f"v{rep}.json").read_bytes())
    if outs[0] != outs[1]:
        differ.append("verify")
    verdict(10, not differ, f"{len(commands) + 1} commands repeated, differing {differ}")
