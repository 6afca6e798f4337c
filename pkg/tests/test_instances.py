from fractions import Fraction as F

import numpy as np
import pytest

from groupfair import (
    Allocation,
    Instance,
    Notion,
    SetSystem,
    brute_min_bicolor,
    certify,
    eval_bicolor,
    eval_multicolor,
    exhaustive_optimum,
    gen_cd_lower_instance,
    gen_hardness_fairdiv,
    gen_prop_lower_instance,
    gen_setsplit_gadget,
    gen_wdisc_lower,
    hadamard_amplify,
    planted_hardness_instance,
    planted_setsplit,
    random_instance,
    random_rational_instance,
    split_coloring_from_solution,
    sylvester_hadamard,
    w_matrix,
)
from groupfair.instances import expansion_sample, random_regular_bipartite, wdisc_target

import oracles


# ---------------------------------------------------------------- Hadamard

def test_sylvester_small_orders():
    assert sylvester_hadamard(1).tolist() == [[1]]
    assert sylvester_hadamard(2).tolist() == [[1, 1], [1, -1]]


@pytest.mark.parametrize("order", [4, 8, 32])
def test_sylvester_orthogonal_and_normalized(order):
    H = sylvester_hadamard(order)
    assert np.array_equal(H @ H.T, order * np.eye(order, dtype=np.int64))
    assert np.all(H[0] == 1) and np.all(H[:, 0] == 1)


def test_sylvester_rejects_bad_order():
    for bad in (0, 3, 12):
        with pytest.raises(ValueError):
            sylvester_hadamard(bad)


def test_w_matrix_examples():
    assert w_matrix(sylvester_hadamard(2)).tolist() == [[1, 1], [1, 0]]
    assert w_matrix(sylvester_hadamard(4)).tolist() == [
        [1, 1, 1, 1], [1, 0, 1, 0], [1, 1, 0, 0], [1, 0, 0, 1]]
    assert np.array_equal(gen_wdisc_lower(2), w_matrix(sylvester_hadamard(2)))


@pytest.mark.parametrize("order", [2, 4, 8, 16, 32])
def test_wz_closed_form(order):
    # ||W z||^2 = (n/4) ((z_1 + sum z)^2 + sum_{i>=2} z_i^2), checked exactly
    Wi = (1 + sylvester_hadamard(order)) // 2
    rng = np.random.default_rng(order)
    for _ in range(20):
        z = [F(int(v), 7) for v in rng.integers(-20, 21, order)]
        Wz = [sum(int(a) * b for a, b in zip(row, z)) for row in Wi]
        assert sum(v * v for v in Wz) == oracles.wz_norm_sq_exact(order, z)


@pytest.mark.parametrize("order", [4, 8, 16, 32])
def test_wz_quarter_bound(order):
    W = gen_wdisc_lower(order)
    z = np.random.default_rng(0).standard_normal((1000, order))
    lhs = np.sum((z @ W.T) ** 2, axis=1)
    rhs = order / 4 * np.sum(z[:, 1:] ** 2, axis=1)
    assert np.all(lhs >= rhs * (1 - 1e-9))


def test_wz_full_constant_fails_for_unit_vector():
    # n = 2, z = e_2: ||W z||^2 = 1 while n * z_2^2 = 2
    Wz = gen_wdisc_lower(2) @ np.array([0.0, 1.0])
    assert float(Wz @ Wz) == 1.0


def test_wdisc_first_row_bound():
    W = gen_wdisc_lower(16)
    rng = np.random.default_rng(1)
    for _ in range(50):
        x = rng.integers(0, 2, 16)
        for p in (0.5, 0.25):
            assert abs(p * 16 - x.sum()) <= eval_bicolor(W, x, p) + 1e-12


def test_wdisc_target():
    assert wdisc_target(16, 0.5) is None
    assert wdisc_target(32, 0.5) == pytest.approx(np.sqrt(2.0))


# ---------------------------------------------------------------- lower-bound instances

def test_cd_lower_zero_matrix():
    inst = gen_cd_lower_instance(np.zeros((2, 3)), 3)
    assert inst.group_sizes == (2, 2, 2)
    assert certify(inst, Allocation([0, 2, 1]))[Notion.CD].c == 0


def test_cd_lower_all_ones_pair():
    inst = gen_cd_lower_instance(np.ones((1, 2)), 2)
    assert certify(inst, Allocation([0, 1]))[Notion.CD].c == 0


def test_cd_lower_w4_matches_oracle():
    A = w_matrix(sylvester_hadamard(4)).astype(int).astype(object)
    inst = gen_cd_lower_instance(np.vectorize(F, otypes=[object])(A), 2)
    res = exhaustive_optimum(inst, Notion.CD)
    expected = oracles.optimum_values(inst.utilities, inst.group_sizes)["cd"]
    assert res.c == expected
    # positive discrepancy rules out an exactly balanced allocation
    assert brute_min_bicolor(w_matrix(sylvester_hadamard(4)))[1] > 0
    assert res.c >= 1


def test_gen_rejects_out_of_range():
    with pytest.raises(ValueError):
        gen_cd_lower_instance([[1.5]], 2)
    with pytest.raises(ValueError):
        gen_prop_lower_instance([[-0.1]], 2)
    with pytest.raises(ValueError):
        gen_cd_lower_instance([[0.5]], 1)


def test_prop_lower_all_ones():
    inst = gen_prop_lower_instance(np.ones((2, 6)), 3)
    assert inst.group_sizes == (4, 1, 1)
    assert np.all(inst.utilities[2:4] == 0) and np.all(inst.utilities[4:] == 1)
    alloc = Allocation([0, 0, 0, 0, 1, 2])
    rep = certify(inst, alloc)[Notion.PROP]
    for g in (1, 2):
        size = int(np.sum(alloc.assignment == g))
        assert size >= inst.m / inst.k - rep.c


def test_prop_lower_tiny_optimum():
    inst = gen_prop_lower_instance(np.array([[F(1), F(0)]], dtype=object), 2)
    assert inst.group_sizes == (2, 1) and inst.n == 3
    res = exhaustive_optimum(inst, Notion.PROP)
    assert res.c == oracles.optimum_values(inst.utilities, inst.group_sizes)["prop"]


def test_prop_lower_uniform_bundle_size_bound():
    A = gen_wdisc_lower(8)[:, :6]
    inst = gen_prop_lower_instance(A, 2)
    rng = np.random.default_rng(0)
    for _ in range(30):
        alloc = Allocation(rng.integers(0, 2, 6))
        c = certify(inst, alloc)[Notion.PROP].c
        assert np.sum(alloc.assignment == 1) >= inst.m / inst.k - c


# ---------------------------------------------------------------- set splitting gadget

def test_set_system_validation():
    with pytest.raises(ValueError):
        SetSystem(6, ((0, 1, 2),))
    with pytest.raises(ValueError):
        SetSystem(4, ((0, 1, 2, 9),))
    S = SetSystem(8, ((0, 1, 2, 3), (0, 4, 5, 6)))
    assert S.N == 2 and S.d == 2
    assert S.unsplit({0, 1}) == [1]


def test_planted_system_is_split():
    S, T = planted_setsplit(20, 30, seed=3)
    assert S.unsplit(T) == []
    assert all(len(s) == 4 for s in S.subsets)


def test_regular_bipartite_is_regular():
    E = random_regular_bipartite(10, 3, np.random.default_rng(0))
    assert len(E) == 30
    assert np.all(np.bincount(E[:, 0], minlength=10) == 3)
    assert np.all(np.bincount(E[:, 1], minlength=10) == 3)


def test_gadget_k2_is_C():
    S, _ = planted_setsplit(8, 2, seed=0)
    g = gen_setsplit_gadget(S, 2, 2, seed=0)
    assert np.array_equal(g.B, g.C)


@pytest.mark.parametrize("k", [2, 3, 5])
def test_gadget_norm_invariants(k):
    S, _ = planted_setsplit(8, 2, seed=0)
    g = gen_setsplit_gadget(S, k, 2, seed=0)
    assert g.B.shape == (2 * 2, 8 + (k - 2) * 2)
    assert np.all(g.B.sum(axis=1) == k)
    assert np.all(g.B.sum(axis=0) <= float(g.column_bound))
    assert g.column_bound == max(F(2 * S.d, 2), F(2))
    assert g.gamma == pytest.approx(1 / (8 * S.d * k))


def test_gadget_rejects_bad_parameters():
    S, _ = planted_setsplit(8, 2, seed=0)
    with pytest.raises(ValueError):
        gen_setsplit_gadget(S, 1, 2)
    with pytest.raises(ValueError):
        gen_setsplit_gadget(S, 3, 0)


def test_single_subset_split():
    S = SetSystem(4, ((0, 1, 2, 3),))
    g = gen_setsplit_gadget(S, 2, 1)
    chi = split_coloring_from_solution({0, 1}, g)
    assert eval_multicolor(g.B.astype(object) * F(1), 2, chi) == 0
    # the complement also splits every subset
    chi2 = split_coloring_from_solution({2, 3}, g)
    assert np.array_equal(g.B @ (chi2 == 1), np.ones(len(g.B)))


def test_split_coloring_reports_unsplit_subset():
    S = SetSystem(8, ((0, 1, 2, 3), (4, 5, 6, 7)))
    g = gen_setsplit_gadget(S, 3, 1)
    with pytest.raises(ValueError, match="subset 1"):
        split_coloring_from_solution({0, 1, 4}, g)


def test_planted_k4_exact_zero():
    S, T = planted_setsplit(16, 10, seed=0)
    g = gen_setsplit_gadget(S, 4, 3, seed=0)
    chi = split_coloring_from_solution(T, g)
    exact_B = np.vectorize(F, otypes=[object])(g.B)
    assert eval_multicolor(exact_B, 4, chi) == 0


def test_amplify_zero_and_range():
    assert np.all(hadamard_amplify(np.zeros((3, 4))) == 0)
    S, _ = planted_setsplit(8, 2, seed=0)
    g = gen_setsplit_gadget(S, 3, 2, seed=0)
    A = hadamard_amplify(g, exact=True)
    assert A.shape[0] == 4
    assert all(0 <= v <= 1 for v in A.flat)
    assert np.allclose(hadamard_amplify(g).astype(float), A.astype(float))


def test_amplify_pads_to_power_of_two():
    S, _ = planted_setsplit(8, 3, seed=1)
    g = gen_setsplit_gadget(S, 3, 2, seed=1)
    A = hadamard_amplify(g)
    assert A.shape[0] == 8
    assert np.allclose(A, gen_wdisc_lower(8)[:, :6] @ g.B / float(g.column_bound))


@pytest.mark.parametrize("k", [2, 3])
def test_hardness_pipeline(k):
    inst, chi, g, A = planted_hardness_instance(12, 6, k, 2, seed=k)
    assert eval_multicolor(A, k, chi) == 0
    assert inst.group_sizes == (A.shape[0],) * k
    assert certify(inst, Allocation(chi))[Notion.CD].c == 0


def test_hardness_small_all_ones():
    inst = gen_hardness_fairdiv(np.ones((1, 2)), 2)
    assert certify(inst, Allocation([1, 0]))[Notion.CD].c == 0


def test_expansion_sample_positive():
    S, _ = planted_setsplit(40, 64, seed=0)
    g = gen_setsplit_gadget(S, 3, 4, seed=0)
    assert 0 < expansion_sample(g, samples=50, gamma=0.5) <= 1


# ---------------------------------------------------------------- random

def test_random_instance_reproducible():
    a = random_instance((2, 3), 10, seed=4)
    b = random_instance((2, 3), 10, seed=4)
    assert np.array_equal(a.utilities, b.utilities)
    assert not np.array_equal(a.utilities, random_instance((2, 3), 10, seed=5).utilities)


def test_random_instance_empty_and_bernoulli():
    assert random_instance((1, 1), 0).m == 0
    B = random_instance((3, 3), 50, seed=1, distribution="bernoulli", q=0.3).utilities
    assert set(np.unique(B)) <= {0.0, 1.0}
    with pytest.raises(ValueError):
        random_instance((1, 1), 3, distribution="normal")


def test_random_instance_mean():
    U = random_instance((50, 50), 200, seed=0).utilities
    assert abs(U.mean() - 0.5) <= 0.05


def test_random_rational_instance_is_exact():
    inst = random_rational_instance((1, 2), 5, seed=0)
    assert inst.exact and all(isinstance(v, F) for v in inst.utilities.flat)
    assert isinstance(inst, Instance)
