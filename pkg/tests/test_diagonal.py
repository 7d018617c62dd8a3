import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _strategies import spaces, vectors
from fremlinlab import (
    DiagonalElement,
    DimensionError,
    NormedLatticeSpace,
    TensorElement,
    basis_vector,
    diagonal_map,
    eval_norm,
    half_power_product,
    ioc_residual,
    quotient_norm_dual,
    quotient_norm_primal,
    split_offdiagonal,
    verify_main_isometry,
)

L2 = NormedLatticeSpace.lp(2, 2)
L4 = NormedLatticeSpace.lp(2, 4)
L1 = NormedLatticeSpace.lp(2, 1)


def diag(space, d):
    return DiagonalElement(space, np.asarray(d, dtype=float))


# --- structure --------------------------------------------------------------


def test_split_examples():
    u = TensorElement.elementary(L2, L2, [1, 0], [0, 1])
    d, rest = split_offdiagonal(u)
    assert not d.diag.any() and np.array_equal(rest.coeffs, u.coeffs)
    u = TensorElement.elementary(L2, L2, [1, 0], [1, 0])
    d, rest = split_offdiagonal(u)
    assert np.array_equal(d.embed().coeffs, u.coeffs) and not rest.coeffs.any()


@given(spaces(max_dim=4), st.data())
def test_split_reconstructs(space, data):
    x = data.draw(vectors(space.dim))
    y = data.draw(vectors(space.dim))
    u = TensorElement.elementary(space, space, x, y)
    d, rest = split_offdiagonal(u)
    assert np.array_equal(d.diag, x * y)
    assert np.array_equal((d.embed() + rest).coeffs, u.coeffs)
    assert not np.diag(rest.coeffs).any()


def test_split_rejects_non_square():
    with pytest.raises(DimensionError):
        split_offdiagonal(TensorElement.zero(L2, NormedLatticeSpace.lp(3, 2)))
    with pytest.raises(DimensionError):
        split_offdiagonal(TensorElement.zero(L2, L4))


def test_diagonal_map_examples():
    assert np.array_equal(diagonal_map(L2, [1, 0]).coeffs, [[1, 0], [0, 0]])
    assert np.array_equal(diagonal_map(L2, [-1, 0]).coeffs, [[-1, 0], [0, 0]])
    assert np.array_equal(diagonal_map(L2, [1, -2]).coeffs, [[1, 2], [-2, -4]])


@given(spaces(max_dim=4), st.data())
def test_positive_diagonal_is_captured(space, data):
    u = np.abs(data.draw(vectors(space.dim)))
    d, _ = split_offdiagonal(diagonal_map(space, np.sqrt(u)))
    assert np.allclose(d.diag, u, rtol=1e-15, atol=0)


def test_diagonal_element_is_frozen():
    d = diag(L2, [1, 2])
    with pytest.raises(ValueError):
        d.diag[0] = 5.0
    assert d.to_dict()["diag"] == [1.0, 2.0]


# --- quotient norms ---------------------------------------------------------


def test_zero_class():
    assert float(quotient_norm_dual(diag(L2, [0, 0]))) == 0.0
    assert float(quotient_norm_primal(diag(L2, [0, 0]))) == 0.0


def test_primal_examples():
    assert float(quotient_norm_primal(diag(L2, [1, 1]))) == pytest.approx(2.0, rel=1e-3)
    sp = NormedLatticeSpace.interlace(2, 2, 1, 0.8)
    assert float(quotient_norm_primal(diag(sp, [1, 0]))) == pytest.approx(1.0, rel=1e-3)


@pytest.mark.parametrize(
    "space, d, expected",
    [
        (L4, [1, 1], math.sqrt(2)),
        (L1, [1, 1], 2.0),
        (NormedLatticeSpace.lp(3, 3), [1, -2, 0.5], float(np.sum(np.abs([1, -2, 0.5]) ** 1.5) ** (1 / 1.5))),
        (NormedLatticeSpace.lp(3, 1.5), [1, -2, 0.5], 3.5),
        (L2, [0.3, -4], 4.3),
    ],
)
def test_dual_closed_forms(space, d, expected):
    q = quotient_norm_dual(diag(space, d))
    assert q.lower <= q.upper
    assert float(q) == pytest.approx(expected, rel=1e-3)


def test_dimension_limits():
    big = NormedLatticeSpace.lp(9, 2)
    with pytest.raises(DimensionError):
        quotient_norm_dual(diag(big, np.ones(9)))
    with pytest.raises(DimensionError):
        quotient_norm_primal(diag(NormedLatticeSpace.lp(7, 2), np.ones(7)))


@given(spaces(min_dim=2, max_dim=2), st.data())
@settings(max_examples=6)
def test_dual_below_primal(space, data):
    d = data.draw(vectors(space.dim, -3, 3))
    if np.abs(d).max() < 1e-3:
        return
    dual = quotient_norm_dual(diag(space, d))
    primal = quotient_norm_primal(diag(space, d), starts=4)
    assert dual.value <= primal.value + dual.tol + primal.tol + 1e-9
    assert abs(dual.value - primal.value) <= 1e-2 * max(1.0, dual.value)


@given(spaces(min_dim=2, max_dim=3), st.data())
@settings(max_examples=15)
def test_homomorphism_on_disjoint_vectors(space, data):
    # the classes add: (x+y)(x)|x+y| - x(x)|x| - y(x)|y| lies in the ideal
    z = data.draw(vectors(space.dim, -3, 3))
    mask = np.arange(space.dim) % 2 == 0
    x, y = np.where(mask, z, 0.0), np.where(mask, 0.0, z)
    whole = diagonal_map(space, x + y)
    parts = diagonal_map(space, x).coeffs + diagonal_map(space, y).coeffs
    diff = TensorElement(space, space, whole.coeffs - parts)
    scale = float(quotient_norm_dual(split_offdiagonal(whole)[0]))
    assert ioc_residual(diff) <= 1e-2 * max(scale, 1e-12)
    summed = DiagonalElement(space, np.diag(parts))
    assert float(quotient_norm_dual(summed)) == pytest.approx(scale, rel=1e-2, abs=1e-12)


# --- main isometry ----------------------------------------------------------


@pytest.mark.parametrize("space, x, expected", [(L4, [1, 1], math.sqrt(2)), (L1, [1, 1], 2.0)])
def test_isometry_examples(space, x, expected):
    r = verify_main_isometry(space, x)
    assert r.passed
    for v in (r.seminorm_value, r.quotient_primal, r.quotient_dual):
        assert v == pytest.approx(expected, rel=1e-3)
    vals = [r.seminorm_value, r.quotient_primal, r.quotient_dual]
    assert r.max_discrepancy == pytest.approx(max(vals) - min(vals), abs=0)


@pytest.mark.parametrize(
    "space",
    [NormedLatticeSpace.interlace(2, 1, 2, 1), NormedLatticeSpace.weighted_lp(3, [2, 1])],
)
def test_isometry_on_atoms(space):
    r = verify_main_isometry(space, basis_vector(2, 0))
    expected = eval_norm(space, basis_vector(2, 0)) ** 2
    for v in (r.seminorm_value, r.quotient_primal, r.quotient_dual):
        assert v == pytest.approx(expected, rel=1e-3)
    assert r.to_dict()["passed"] is True


# --- the off-diagonal ideal -------------------------------------------------


@given(spaces(max_dim=3), st.data())
@settings(max_examples=25)
def test_antisymmetric_tensors_are_in_ideal(space, data):
    x = data.draw(vectors(space.dim))
    y = data.draw(vectors(space.dim))
    u = TensorElement.elementary(space, space, x, y) - TensorElement.elementary(space, space, y, x)
    assert ioc_residual(u) <= 1e-6 * max(eval_norm(space, x) * eval_norm(space, y), 1e-300)


@given(spaces(max_dim=3), st.data())
@settings(max_examples=25)
def test_root_product_difference_is_in_ideal(space, data):
    x = np.abs(data.draw(vectors(space.dim)))
    y = np.abs(data.draw(vectors(space.dim)))
    z = half_power_product(x, y)
    u = TensorElement.elementary(space, space, x, y) - TensorElement.elementary(space, space, z, z)
    assert ioc_residual(u) <= 1e-6 * max(1.0, eval_norm(space, x) * eval_norm(space, y))


def test_root_product_with_mixed_signs_leaves_ideal():
    # x_1 y_1 < 0: the diagonal entry x_1 y_1 - |x_1 y_1| does not vanish
    x, y = np.array([1.0, 0.0]), np.array([-1.0, 0.0])
    z = half_power_product(x, y)
    u = TensorElement.elementary(L2, L2, x, y) - TensorElement.elementary(L2, L2, z, z)
    assert ioc_residual(u) == pytest.approx(2.0, rel=1e-6)


def test_diagonal_atom_is_not_in_ideal():
    u = TensorElement.elementary(L2, L2, [1, 0], [1, 0])
    assert ioc_residual(u) == pytest.approx(1.0, rel=1e-9)
