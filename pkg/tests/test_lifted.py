import math

import numpy as np
import pytest

from idivnmf import (
    FactorPair,
    collapse,
    factor_projection,
    has_marginal,
    i_div_tensor,
    is_product,
    marginal_projection,
    pythagorean_residual_factor,
    pythagorean_residual_marginal,
    tensor_from_pair,
)

from helpers import (
    batched_div,
    rand_interior_pair,
    rand_member_with_marginal,
    rand_prob_matrix,
    rand_prob_tensor,
)


@pytest.fixture
def small_pair():
    return FactorPair([[0.5], [0.5]], [[0.4, 0.6]])


class TestTensorFromPair:
    def test_rank_one_products(self, small_pair):
        t = tensor_from_pair(small_pair)
        assert t.shape == (2, 1, 2)
        assert np.allclose(t.ravel(), [0.2, 0.3, 0.2, 0.3], atol=1e-15)

    def test_diagonal_support(self):
        pair = FactorPair(np.diag([0.3, 0.7]), np.eye(2))
        t = tensor_from_pair(pair)
        nz = np.argwhere(t > 0)
        assert all(i == l == j for i, l, j in nz)

    def test_probability_tensor(self):
        rng = np.random.default_rng(1)
        pair = rand_interior_pair(rng, 4, 3, 5)
        assert tensor_from_pair(pair).sum() == pytest.approx(1.0, abs=1e-12)

    def test_collapse_matches_matrix_product(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            pair = rand_interior_pair(rng, 3, 2, 4)
            assert np.max(np.abs(collapse(tensor_from_pair(pair)) - pair.product())) < 1e-14


class TestCollapse:
    def test_example_values(self, small_pair):
        assert np.allclose(
            collapse(tensor_from_pair(small_pair)), [[0.2, 0.3], [0.2, 0.3]], atol=1e-15
        )

    def test_inner_size_one_squeezes(self):
        rng = np.random.default_rng(3)
        t = rng.uniform(0, 1, size=(3, 1, 4))
        assert np.array_equal(collapse(t), t[:, 0, :])


class TestMarginalProjection:
    def test_consistent_marginal_is_fixed(self):
        rng = np.random.default_rng(4)
        pair = rand_interior_pair(rng, 3, 2, 3)
        t = tensor_from_pair(pair)
        p = collapse(t)
        assert np.max(np.abs(marginal_projection(p, t) - t)) < 1e-15

    def test_inner_size_one_is_deterministic(self, small_pair):
        p = np.array([[0.3, 0.2], [0.1, 0.4]])
        proj = marginal_projection(p, tensor_from_pair(small_pair))
        assert np.allclose(proj[:, 0, :], p, atol=1e-15)

    def test_marginal_preserved(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            p = rand_prob_matrix(rng, 3, 4)
            q = tensor_from_pair(rand_interior_pair(rng, 3, 2, 4))
            assert has_marginal(marginal_projection(p, q), p, tol=1e-12).ok

    def test_zero_fibers_follow_reference(self):
        # collapsed zero entries zero out whole fibers, even against p > 0
        p = np.array([[0.5, 0.5]])
        q = np.array([[[0.6, 0.0], [0.4, 0.0]]])
        proj = marginal_projection(p, q)
        assert np.all(proj[:, :, 1] == 0.0)

    def test_beats_random_members(self):
        rng = np.random.default_rng(6)
        p = rand_prob_matrix(rng, 2, 2)
        q = tensor_from_pair(rand_interior_pair(rng, 2, 2, 2))
        best = i_div_tensor(marginal_projection(p, q), q)
        members = np.stack(
            [rand_member_with_marginal(rng, p, 2, low=0.01) for _ in range(200)]
        )
        # vectorized batch for the bulk of the samples
        raw = rng.uniform(0.01, 1.0, size=(100_000, 2, 2, 2))
        bulk = raw * (p / raw.sum(axis=2))[:, :, None, :]
        values = np.concatenate([batched_div(members, q), batched_div(bulk, q)])
        assert best <= values.min() + 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            marginal_projection(np.full((2, 2), 0.25), np.full((3, 1, 2), 1 / 6))


class TestFactorProjection:
    def test_idempotent_on_product_tensors(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            pair = rand_interior_pair(rng, 3, 2, 4)
            back = factor_projection(tensor_from_pair(pair))
            assert np.max(np.abs(back.left - pair.left)) < 1e-14
            assert np.max(np.abs(back.right - pair.right)) < 1e-14

    def test_uniform_tensor(self):
        t = np.full((2, 2, 2), 0.125)
        pair = factor_projection(t)
        assert np.allclose(pair.left, 0.25, atol=1e-15)
        assert np.allclose(pair.right, 0.5, atol=1e-15)

    def test_zero_mass_rows_become_uniform(self):
        t = np.zeros((2, 2, 2))
        t[:, 0, :] = 0.25
        pair = factor_projection(t)
        assert np.allclose(pair.right[1], [0.5, 0.5], atol=1e-15)
        assert np.allclose(pair.left[:, 1], 0.0, atol=1e-15)

    def test_beats_random_product_tensors(self):
        rng = np.random.default_rng(8)
        t = rand_prob_tensor(rng, 2, 2, 2)
        best = i_div_tensor(t, tensor_from_pair(factor_projection(t)))
        lefts = rng.uniform(0.01, 1.0, size=(100_000, 2, 2))
        lefts /= lefts.sum(axis=(1, 2))[:, None, None]
        rights = rng.uniform(0.01, 1.0, size=(100_000, 2, 2))
        rights /= rights.sum(axis=2, keepdims=True)
        products = lefts[:, :, :, None] * rights[:, None, :, :]
        with np.errstate(divide="ignore"):
            terms = t * np.log(t / products) - t + products
        values = terms.sum(axis=(1, 2, 3))
        assert best <= values.min() + 1e-12


class TestMembership:
    def test_projection_output_is_member(self):
        rng = np.random.default_rng(9)
        p = rand_prob_matrix(rng, 3, 3)
        q = tensor_from_pair(rand_interior_pair(rng, 3, 2, 3))
        ok, dev = has_marginal(marginal_projection(p, q), p, tol=1e-12)
        assert ok and dev <= 1e-12

    def test_inconsistent_tensor_is_not_member(self):
        rng = np.random.default_rng(10)
        p = rand_prob_matrix(rng, 3, 3)
        q = tensor_from_pair(rand_interior_pair(rng, 3, 2, 3))
        assert not has_marginal(q, p, tol=1e-9).ok

    def test_perturbation_against_tolerance(self):
        rng = np.random.default_rng(11)
        p = rand_prob_matrix(rng, 2, 2)
        member = rand_member_with_marginal(rng, p, 2)
        member = member.copy()
        member[0, 0, 0] += 1e-6
        assert not has_marginal(member, p, tol=1e-9).ok
        assert has_marginal(member, p, tol=1e-5).ok

    def test_product_tensor_recognized(self):
        rng = np.random.default_rng(12)
        t = tensor_from_pair(rand_interior_pair(rng, 3, 2, 3))
        ok, res = is_product(t, tol=1e-12)
        assert ok and res <= 1e-12

    def test_generic_projection_is_not_product(self):
        rng = np.random.default_rng(13)
        p = rand_prob_matrix(rng, 2, 2)
        q = tensor_from_pair(rand_interior_pair(rng, 2, 2, 2))
        proj = marginal_projection(p, q)
        check = is_product(proj, tol=1e-9)
        assert not check.ok
        assert check.residual > 1e-9

    def test_rank_one_lands_in_both_sets(self):
        # rank-one target at inner size one: the projection factors exactly
        rng = np.random.default_rng(14)
        row = rng.uniform(0.1, 1.0, 3)
        col = rng.uniform(0.1, 1.0, 3)
        p = np.outer(row / row.sum(), col / col.sum())
        q = tensor_from_pair(rand_interior_pair(rng, 3, 1, 3))
        proj = marginal_projection(p, q)
        assert has_marginal(proj, p, tol=1e-12).ok
        assert is_product(proj, tol=1e-12).ok

    def test_exact_factorization_certificate(self):
        # data that factors at inner size k yields a tensor in both sets
        rng = np.random.default_rng(15)
        pair = rand_interior_pair(rng, 4, 2, 4)
        p = pair.product()
        t = tensor_from_pair(pair)
        assert has_marginal(t, p, tol=1e-12).ok
        assert is_product(t, tol=1e-12).ok


class TestPythagoreanRules:
    def test_marginal_rule_at_projection(self):
        rng = np.random.default_rng(16)
        p = rand_prob_matrix(rng, 2, 2)
        q = tensor_from_pair(rand_interior_pair(rng, 2, 2, 2))
        proj = marginal_projection(p, q)
        assert pythagorean_residual_marginal(p, proj, q) < 1e-14

    def test_marginal_rule_random_members(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            p = rand_prob_matrix(rng, 2, 2)
            q = tensor_from_pair(rand_interior_pair(rng, 2, 2, 2))
            member = rand_member_with_marginal(rng, p, 2)
            assert pythagorean_residual_marginal(p, member, q) <= 1e-12

    def test_both_sets_point(self):
        rng = np.random.default_rng(18)
        pair = rand_interior_pair(rng, 3, 2, 3)
        t = tensor_from_pair(pair)
        p = collapse(t)
        assert pythagorean_residual_marginal(p, t, t) < 1e-14
        assert pythagorean_residual_factor(t, t) < 1e-14

    def test_factor_rule_random(self):
        rng = np.random.default_rng(19)
        for _ in range(50):
            t = rand_prob_tensor(rng, 2, 2, 2)
            q = tensor_from_pair(rand_interior_pair(rng, 2, 2, 2))
            assert pythagorean_residual_factor(t, q) <= 1e-12

    def test_factor_rule_with_zero_slice(self):
        rng = np.random.default_rng(20)
        t = rand_prob_tensor(rng, 3, 3, 3)
        t[:, 1, :] = 0.0
        t /= t.sum()
        q = tensor_from_pair(rand_interior_pair(rng, 3, 3, 3))
        assert pythagorean_residual_factor(t, q) <= 1e-12

    def test_support_inconsistency_reported(self):
        # member puts mass where the reference has none: left side infinite
        p = np.array([[0.5, 0.5]])
        member = np.array([[[0.25, 0.25], [0.25, 0.25]]])
        q = np.array([[[0.5, 0.0], [0.5, 0.0]]])
        res = pythagorean_residual_marginal(p, member, q)
        assert res == 0.0 or math.isinf(res)

    def test_thousand_instances(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            m = int(rng.integers(2, 7))
            n = int(rng.integers(2, 7))
            k = int(rng.integers(1, min(m, n, 3) + 1))
            p = rand_prob_matrix(rng, m, n)
            q = tensor_from_pair(rand_interior_pair(rng, m, k, n))
            member = rand_member_with_marginal(rng, p, k)
            d = i_div_tensor(member, q)
            bound = 1e-10 * max(1.0, d)
            assert pythagorean_residual_marginal(p, member, q) <= bound
            assert pythagorean_residual_factor(member, q) <= bound
