import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hammax.fields import (
    OperatorField,
    constant_field,
    delta_field,
    random_psd_field,
    schatten_norm,
)
from hammax.groups import GroupSpec
from hammax.norms import (
    l1_norm_positive,
    linear_domination_check,
    linf_col_norm,
    linf_norm_field,
    linf_norm_general,
    linf_norm_positive,
    weak_linf_norm_diag,
    weak_sup_norm,
)


def psd_batch(N, n, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((N, n, n)) + 1j * rng.standard_normal((N, n, n))
    return g.conj().transpose(0, 2, 1) @ g


# -- exact special cases -------------------------------------------------------


def test_single_entry_is_schatten_norm():
    x = psd_batch(1, 3, 0)
    for p in (1.0, 1.5, 2.0, 3.0):
        cert = linf_norm_positive(x, p)
        exact = schatten_norm(x[0], p)
        assert cert.dual_value <= exact + 1e-9
        assert cert.primal_value >= exact - 1e-9
        assert cert.gap <= 1e-4 * cert.primal_value


def test_p_infinity_closed_form():
    xs = psd_batch(5, 3, 1)
    cert = linf_norm_positive(xs, np.inf)
    top = float(np.linalg.eigvalsh(xs).max())
    assert cert.primal_value == pytest.approx(top, abs=1e-12)
    assert cert.gap == 0.0
    # witness t*I sits above every entry
    assert np.linalg.eigvalsh(cert.witness_a[None] - xs).min() > -1e-10


def test_diagonal_family_is_entrywise_sup():
    diags = np.array([[3.0, 1.0], [2.0, 2.5], [0.5, 0.5]])
    xs = np.array([np.diag(d) for d in diags]).astype(complex)
    for p in (1.0, 2.0, 4.0):
        cert = linf_norm_positive(xs, p)
        sup = diags.max(axis=0)
        assert cert.primal_value == pytest.approx((sup**p).sum() ** (1 / p), rel=1e-14)
        assert cert.gap == 0.0


def test_commuting_family_matches_sorted_oracle():
    """Rotated simultaneously-diagonalizable data: exact to 1e-8."""
    rng = np.random.default_rng(2)
    n, N = 4, 6
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(g)
    diags = rng.uniform(0.0, 3.0, size=(N, n))
    xs = np.array([Q @ np.diag(d) @ Q.conj().T for d in diags])
    for p in (1.0, 1.5, 2.0, 3.0):
        cert = linf_norm_positive(xs, p)
        exact = (diags.max(axis=0) ** p).sum() ** (1 / p)
        assert abs(cert.primal_value - exact) < 1e-8
        assert abs(cert.dual_value - exact) < 1e-8


def test_two_projections_at_45_degrees():
    # classic noncommutative example: the l_1(l_infty) norm of projections
    # onto span(e1) and span(e1+e2)/sqrt(2) is 1 + sin(pi/4), strictly
    # between the commutative guesses 1 and 2
    P1 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    v = np.array([1.0, 1.0]) / math.sqrt(2)
    P2 = np.outer(v, v).astype(complex)
    cert = linf_norm_positive(np.array([P1, P2]), 1.0)
    exact = 1.0 + math.sin(math.pi / 4)
    assert cert.dual_value <= exact + 1e-9
    assert cert.primal_value >= exact - 1e-9
    assert abs(cert.primal_value - exact) < 1e-3


# -- barrier solver contracts ----------------------------------------------------


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("seed", [3, 4])
def test_duality_gap_certified(p, seed):
    xs = psd_batch(6, 3, seed)
    cert = linf_norm_positive(xs, p)
    assert cert.converged
    assert cert.gap >= -1e-12
    assert cert.gap <= 1e-4 * cert.primal_value
    # the witness is feasible: a >= every x_n
    gaps = np.linalg.eigvalsh(cert.witness_a[None] - xs)
    assert gaps.min() > -1e-9 * cert.primal_value


def test_witness_y_is_dual_feasible():
    xs = psd_batch(4, 2, 7)
    p = 2.0
    cert = linf_norm_positive(xs, p)
    y = cert.witness_y
    assert y is not None
    assert np.linalg.eigvalsh(y).min() > -1e-12
    total = y.sum(axis=0)
    assert schatten_norm(total, 2.0) <= 1.0 + 1e-9  # p' = 2
    # dual value = sum tr(y_n x_n)
    val = float(np.real(np.einsum("kij,kji->", y, xs)))
    assert val == pytest.approx(cert.dual_value, rel=1e-9)


def test_homogeneity_and_monotonicity():
    xs = psd_batch(4, 3, 8)
    p = 1.5
    base = linf_norm_positive(xs, p).primal_value
    scaled = linf_norm_positive(2.5 * xs, p).primal_value
    assert scaled == pytest.approx(2.5 * base, rel=1e-3)
    bigger = linf_norm_positive(np.concatenate([xs, psd_batch(1, 3, 9)]), p)
    assert bigger.dual_value >= base * (1 - 1e-3) - bigger.gap


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([1.0, 2.0, 3.0]))
def test_sandwiched_by_l1_and_max(seed, p):
    # max_n ||x_n||_p <= ||(x_n)||_{L_p(l_infty)} <= ||sum_n x_n||_p
    xs = psd_batch(4, 2, seed)
    cert = linf_norm_positive(xs, p)
    lo = max(schatten_norm(x, p) for x in xs)
    hi = l1_norm_positive(xs, p)
    assert cert.primal_value >= lo - 1e-8
    assert cert.dual_value <= hi + 1e-8


def test_rejects_non_psd_and_bad_p():
    xs = psd_batch(2, 2, 10)
    xs[0] -= 3.0 * np.eye(2)
    with pytest.raises(ValueError):
        linf_norm_positive(xs, 2.0)
    with pytest.raises(ValueError):
        linf_norm_positive(psd_batch(2, 2, 10), 0.9)


def test_general_split_upper_bounds_hermitian_case():
    rng = np.random.default_rng(11)
    xs = rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2))
    xs = (xs + xs.conj().transpose(0, 2, 1)) / 2
    cert = linf_norm_general(xs, 2.0)
    assert cert.upper_bound_only
    assert cert.primal_value >= max(schatten_norm(x, 2.0) for x in xs) - 1e-8


# -- column norms ------------------------------------------------------------------


def test_col_norm_single_entry():
    xs = psd_batch(1, 3, 12)
    assert linf_col_norm(xs, 4.0) == pytest.approx(schatten_norm(xs[0], 4.0), rel=1e-3)


def test_col_norm_requires_p_geq_2():
    with pytest.raises(ValueError):
        linf_col_norm(psd_batch(2, 2, 13), 1.5)


# -- weak-type quasi-norm ------------------------------------------------------------


def test_weak_sup_norm_hand_example():
    # values 4,2,1: candidates 4*1, 2*2, 1*3 -> 4
    assert weak_sup_norm(np.array([1.0, 4.0, 2.0]), 1.0) == 4.0
    assert weak_sup_norm(np.array([1.0, 4.0, 2.0]), np.inf) == 4.0
    assert weak_sup_norm(np.zeros(3), 1.0) == 0.0


def test_weak_sup_norm_p2():
    v = np.array([3.0, 3.0, 1.0])
    # 3*1, 3*sqrt(2), 1*sqrt(3)
    assert weak_sup_norm(v, 2.0) == pytest.approx(3.0 * math.sqrt(2))


def test_weak_linf_norm_diag_matches_scalar_reduction():
    diags = np.random.default_rng(14).uniform(0, 1, size=(5, 6))
    xs = np.array([np.diag(d) for d in diags]).astype(complex)
    assert weak_linf_norm_diag(xs, 1.0) == pytest.approx(
        weak_sup_norm(diags.max(axis=0), 1.0)
    )
    with pytest.raises(ValueError):
        weak_linf_norm_diag(psd_batch(3, 3, 15), 1.0)


def test_weak_norm_below_strong_norm():
    diags = np.random.default_rng(16).uniform(0, 1, size=(4, 8))
    weak = weak_sup_norm(diags.max(axis=0), 2.0)
    strong = (diags.max(axis=0) ** 2).sum() ** 0.5
    assert weak <= strong + 1e-12


# -- domination ---------------------------------------------------------------------


def test_linear_domination_holds_for_averages():
    xs = psd_batch(4, 2, 17)
    z = np.array([[0.25, 0.25, 0.25, 0.25], [1.0, 0.0, 0.0, 0.0]])
    assert linear_domination_check(xs, z, 2.0)
    with pytest.raises(ValueError):
        linear_domination_check(xs, -z, 2.0)


# -- field-level problems --------------------------------------------------------------


def test_field_norm_single_support_point_reduces_to_matrix_case():
    spec = GroupSpec(m=1, d=3)
    xs = psd_batch(3, 2, 18)
    fields = []
    for x in xs:
        vals = np.zeros((spec.size, 2, 2), dtype=complex)
        vals[5] = x
        fields.append(OperatorField(spec, vals))
    res = linf_norm_field(fields, 2.0)
    cert = linf_norm_positive(xs, 2.0)
    assert res.primal_value == pytest.approx(cert.primal_value, rel=1e-9)
    assert res.dual_value <= res.primal_value + 1e-12


def test_field_norm_constant_fields_scale_by_group_size():
    spec = GroupSpec(m=1, d=3)
    xs = psd_batch(3, 2, 19)
    fields = [constant_field(spec, x) for x in xs]
    p = 2.0
    res = linf_norm_field(fields, p)
    cert = linf_norm_positive(xs, p)
    assert res.primal_value == pytest.approx(
        spec.size ** (1 / p) * cert.primal_value, rel=1e-9
    )


def test_field_norm_p_infinity():
    spec = GroupSpec(m=1, d=2)
    f = random_psd_field(spec, 2, np.random.default_rng(20))
    res = linf_norm_field([f], np.inf)
    assert res.primal_value == pytest.approx(
        float(np.linalg.eigvalsh(f.values).max())
    )


def test_field_norm_delta_scalar_sorting_oracle():
    # scalar delta field: per-point problems are 1x1, so the norm is an
    # explicit l_p combination of pointwise sups
    spec = GroupSpec(m=1, d=4)
    from hammax.kernels import sphere_kernel
    from hammax.fields import convolve

    f = delta_field(spec, n=1)
    fields = [convolve(sphere_kernel(spec, k), f) for k in range(1, spec.d + 1)]
    res = linf_norm_field(fields, 2.0)
    sup = np.max(np.abs(np.stack([g.values[:, 0, 0] for g in fields])), axis=0)
    assert res.primal_value == pytest.approx(np.linalg.norm(sup), rel=1e-12)
    assert res.gap <= 1e-10
