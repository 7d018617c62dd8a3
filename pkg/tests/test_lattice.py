import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from _oracles import dual_norm_2d, dual_norm_2d_ternary, norm_fn
from _strategies import space_and_vectors, spaces
from fremlinlab import (
    DimensionError,
    HomogeneousFunction,
    NormedLatticeSpace,
    apply_homogeneous,
    basis_vector,
    eval_dual_norm,
    eval_norm,
    half_power_product,
    is_disjoint,
    signed_power,
)
from fremlinlab.lattice import join, meet, modulus


# --- norms ------------------------------------------------------------------


@pytest.mark.parametrize(
    "space, x, expected",
    [
        (NormedLatticeSpace.lp(2, 2), (3, 4), 5.0),
        (NormedLatticeSpace.lp(3, 1), (1, -2, 3), 6.0),
        (NormedLatticeSpace.interlace(2, 1, 2, 1), (1, 1), 2.0),
        (NormedLatticeSpace.lp(3, math.inf), (1, -7, 3), 7.0),
        (NormedLatticeSpace.weighted_lp(2, (1, 4)), (3, 2), 5.0),
        (NormedLatticeSpace.weighted_lp(math.inf, (1, 4)), (3, -2), 8.0),
    ],
)
def test_eval_norm_examples(space, x, expected):
    assert eval_norm(space, x) == pytest.approx(expected, rel=1e-15)


def test_norm_zero_only_at_zero():
    sp = NormedLatticeSpace.interlace(3, 2, 1, 0.5)
    assert eval_norm(sp, np.zeros(3)) == 0.0
    assert eval_norm(sp, [0, 1e-300, 0]) > 0.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(dim=2, family="lp", p=0.5),
        dict(dim=0, family="lp", p=2),
        dict(dim=2, family="weighted_lp", p=2, weights=(1.0, 0.0)),
        dict(dim=2, family="weighted_lp", p=2, weights=(1.0,)),
        dict(dim=2, family="interlace", p=2, q=1, c=-1.0),
        dict(dim=2, family="bogus", p=2),
    ],
)
def test_invalid_parameters(kwargs):
    with pytest.raises(ValueError):
        NormedLatticeSpace(**kwargs)


def test_dimension_mismatch():
    sp = NormedLatticeSpace.lp(3, 2)
    with pytest.raises(DimensionError):
        eval_norm(sp, [1, 2])
    with pytest.raises(DimensionError):
        eval_dual_norm(sp, [1, 2])
    with pytest.raises(DimensionError):
        half_power_product([1, 2], [1, 2, 3])


@pytest.mark.parametrize(
    "space, y, expected",
    [
        (NormedLatticeSpace.lp(2, 2), (3, 4), 5.0),
        (NormedLatticeSpace.lp(2, 1), (2, -7), 7.0),
        (NormedLatticeSpace.lp(2, 4), (1, 1), 2**0.75),
        (NormedLatticeSpace.lp(2, math.inf), (2, -7), 9.0),
        (NormedLatticeSpace.weighted_lp(math.inf, (2, 4)), (2, -8), 3.0),
    ],
)
def test_dual_norm_examples(space, y, expected):
    assert eval_dual_norm(space, y) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "desc",
    [
        {"family": "lp", "p": 4},
        {"family": "lp", "p": 1.5},
        {"family": "weighted_lp", "p": 3, "weights": [1, 2]},
        {"family": "interlace", "p": 2, "q": 1, "c": 0.8},
        {"family": "interlace", "p": 1.5, "q": 4, "c": 1.7},
    ],
)
@pytest.mark.parametrize("y", [(1.0, 1.0), (0.3, -2.0), (5.0, 0.1)])
def test_dual_norm_matches_sphere_scan(desc, y):
    sp = NormedLatticeSpace.from_dict({**desc, "dim": 2})
    ref = dual_norm_2d(norm_fn(desc), y)
    assert eval_dual_norm(sp, y) == pytest.approx(ref, rel=1e-8)


P_GRID = [1.0, 1.5, 2.0, 3.0, 4.0, math.inf]


@given(
    st.sampled_from(P_GRID),
    st.sampled_from(P_GRID),
    st.floats(0.3, 2.0),
    st.tuples(st.floats(0.0, 5.0), st.floats(0.0, 5.0)),
)
def test_interlace_dual_norm_is_exact(p, q, c, y):
    sp = NormedLatticeSpace.interlace(2, p, q, c)
    ref = dual_norm_2d_ternary(sp.norm, y)
    assert eval_dual_norm(sp, y) == pytest.approx(ref, rel=1e-9, abs=1e-12)


@given(spaces(max_dim=5, min_dim=3), st.integers(0, 2**32 - 1))
def test_lmo_beats_random_feasible_points(sp, seed):
    rng = np.random.default_rng(seed)
    Y = rng.random((8, sp.dim))
    X = sp.lmo(Y)
    assert np.all(sp.norm(X) <= 1.0 + 1e-12)
    P = rng.dirichlet(np.full(sp.dim, 0.5), size=4000)
    P /= sp.norm(P)[:, None]
    assert np.all((X * Y).sum(axis=1) >= (Y @ P.T).max(axis=1) * (1.0 - 1e-12))


@given(space_and_vectors(k=2))
def test_norm_axioms(data):
    sp, x, y = data
    nx, ny = eval_norm(sp, x), eval_norm(sp, y)
    assert eval_norm(sp, x + y) <= nx + ny + 1e-12 * (1 + nx + ny)
    assert eval_norm(sp, -2.5 * x) == pytest.approx(2.5 * nx, rel=1e-12, abs=1e-300)
    # monotone: shrinking |x| coordinatewise cannot increase the norm
    z = x * np.linspace(0, 1, sp.dim)
    assert eval_norm(sp, z) <= nx * (1 + 1e-12)
    assert eval_norm(sp, np.abs(x)) == nx


@given(space_and_vectors(k=2))
def test_dual_pairing_bound(data):
    sp, x, y = data
    assert float(x @ y) <= eval_norm(sp, x) * eval_dual_norm(sp, y) * (1 + 1e-7) + 1e-12


@given(space_and_vectors(k=2))
def test_dual_norm_is_monotone_norm(data):
    sp, x, y = data
    dx, dy = eval_dual_norm(sp, x), eval_dual_norm(sp, y)
    assert eval_dual_norm(sp, x + y) <= (dx + dy) * (1 + 1e-7) + 1e-12
    assert eval_dual_norm(sp, 0.5 * x) <= dx * (1 + 1e-7)


@given(spaces())
def test_basis_vectors_have_positive_norm(sp):
    assert np.all(sp.basis_norms() > 0)


@given(spaces())
def test_space_json_roundtrip(sp):
    back = NormedLatticeSpace.from_json(sp.to_json())
    assert back == sp
    json.loads(sp.to_json())


# --- functional calculus ----------------------------------------------------


@pytest.mark.parametrize("t, p, expected", [(-4, 0.5, -2.0), (-2, 2, -4.0), (0, 3, 0.0), (0, 0.5, 0.0), (9, 0.5, 3.0)])
def test_signed_power_examples(t, p, expected):
    assert signed_power(t, p) == expected


def test_signed_power_rejects_nonpositive_exponent():
    with pytest.raises(ValueError):
        signed_power(1.0, 0.0)


@given(st.floats(-1e6, 1e6), st.floats(0.1, 5))
def test_signed_power_is_odd(t, p):
    assert signed_power(-t, p) == -signed_power(t, p)


def test_apply_homogeneous_examples():
    x = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(apply_homogeneous(HomogeneousFunction.coordinate(1, 0), [x]), x)
    pyth = HomogeneousFunction(2, lambda s, t: np.sqrt(s * s + t * t))
    assert np.array_equal(apply_homogeneous(pyth, [[3, 0], [0, 4]]), [3.0, 4.0])
    mx = HomogeneousFunction(2, np.maximum)
    assert np.array_equal(apply_homogeneous(mx, [[1, 5], [2, 3]]), [2.0, 5.0])


def test_apply_homogeneous_arity_mismatch():
    with pytest.raises(ValueError):
        apply_homogeneous(HomogeneousFunction.p_sum(2.0), [[1.0, 2.0]])
    with pytest.raises(DimensionError):
        apply_homogeneous(HomogeneousFunction.p_sum(2.0), [[1.0, 2.0], [1.0]])


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_p_sum_is_homogeneous(p):
    assert HomogeneousFunction.p_sum(p).check_homogeneous()


def test_check_homogeneous_detects_failure():
    f = HomogeneousFunction(1, lambda t: t * t)
    assert not f.check_homogeneous()


@given(space_and_vectors(k=2))
def test_calculus_is_lattice_homomorphism_in_f(data):
    # tau(f v g) = tau(f) v tau(g) for fixed arguments
    _, x, y = data
    f = HomogeneousFunction.p_sum(2.0)
    g = HomogeneousFunction(2, lambda s, t: s - t)
    fg = HomogeneousFunction(2, lambda s, t: np.maximum(f(s, t), g(s, t)))
    lhs = apply_homogeneous(fg, [x, y])
    rhs = join(apply_homogeneous(f, [x, y]), apply_homogeneous(g, [x, y]))
    assert np.array_equal(lhs, rhs)


def test_half_power_product_examples():
    assert np.array_equal(half_power_product([4, -9], [1, 1]), [2.0, -3.0])
    assert np.array_equal(half_power_product([1, 0], [0, 1]), [0.0, 0.0])
    x = np.array([2.0, -3.0, 0.0, 0.7])
    assert np.allclose(half_power_product(x, np.abs(x)), x, rtol=1e-15)


@given(space_and_vectors(k=2))
def test_abs_of_root_product(data):
    _, x, y = data
    assert np.array_equal(np.abs(half_power_product(x, y)), half_power_product(np.abs(x), np.abs(y)))


@given(space_and_vectors(k=2))
def test_root_product_norm_bound(data):
    sp, x, y = data
    lhs = eval_norm(sp, half_power_product(x, y))
    assert lhs <= math.sqrt(eval_norm(sp, x) * eval_norm(sp, y)) + 1e-12


@given(space_and_vectors(k=3))
def test_distributivity(data):
    _, x1, x2, y = data
    lhs = half_power_product(x1 + x2, y)
    rhs = apply_homogeneous(HomogeneousFunction.p_sum(2.0), [half_power_product(x1, y), half_power_product(x2, y)])
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10)


@given(space_and_vectors(k=1), st.sampled_from([1.0, 1.5, 2.0, 3.0, 7.0]))
def test_p_sum_of_disjoint_positives_is_sum(data, p):
    _, x = data
    mask = np.arange(len(x)) % 2 == 0
    a, b = np.where(mask, np.abs(x), 0), np.where(mask, 0, np.abs(x))
    assert is_disjoint(a, b)
    s = apply_homogeneous(HomogeneousFunction.p_sum(p), [a, b])
    assert np.allclose(s, a + b, rtol=1e-14, atol=0)
    assert np.all(s >= 0)


@pytest.mark.parametrize(
    "x, y, expected",
    [((1, 0, 2), (0, 3, 0), True), ((1, 1), (0, 1), False), ((0, 0), (5, -1), True)],
)
def test_is_disjoint_examples(x, y, expected):
    assert is_disjoint(x, y) is expected


def test_is_disjoint_has_no_tolerance():
    assert not is_disjoint([1e-300, 1.0], [1.0, 0.0])


def test_lattice_operations_coordinatewise():
    x, y = np.array([1.0, -2.0, 3.0]), np.array([0.0, 4.0, -5.0])
    assert np.array_equal(meet(x, y), [0.0, -2.0, -5.0])
    assert np.array_equal(join(x, y), [1.0, 4.0, 3.0])
    assert np.array_equal(modulus(y), [0.0, 4.0, 5.0])
    assert np.array_equal(basis_vector(3, 1), [0.0, 1.0, 0.0])
