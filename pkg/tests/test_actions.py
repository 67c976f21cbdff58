import numpy as np
import pytest

from hammax.actions import (
    CommutingAutomorphismFamily,
    CommutingUnitaryAction,
    act,
    column_norm_audit,
    ergodic_Mk,
    intertwining_error,
    kadison_schwarz_gap,
    multi_average_Nk,
    random_action,
    transfer_field,
    transference_audit,
    trivial_action,
)
from hammax.fields import convolve
from hammax.groups import GroupSpec
from hammax.kernels import sphere_kernel


@pytest.fixture
def action():
    return random_action(GroupSpec(m=2, d=3), 2, seed=5)


def rand_matrix(n, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def test_generators_commute_and_have_right_order(action):
    spec = action.spec
    for i, U in enumerate(action.unitaries):
        # order divides m+1
        power = np.linalg.matrix_power(U, spec.q)
        assert np.abs(power - np.eye(2)).max() < 1e-10
        for V in action.unitaries[i + 1:]:
            assert np.abs(U @ V - V @ U).max() < 1e-10


def test_action_is_group_homomorphism(action):
    spec = action.spec
    rng = np.random.default_rng(0)
    x = rand_matrix(2, 1)
    for _ in range(10):
        u = rng.integers(0, spec.q, size=spec.d)
        v = rng.integers(0, spec.q, size=spec.d)
        lhs = act(action, u, act(action, v, x))
        rhs = act(action, spec.add(u, v), x)
        assert np.abs(lhs - rhs).max() < 1e-10


def test_random_action_is_seeded():
    spec = GroupSpec(m=1, d=4)
    a = random_action(spec, 3, seed=7)
    b = random_action(spec, 3, seed=7)
    c = random_action(spec, 3, seed=8)
    assert all(np.array_equal(x, y) for x, y in zip(a.unitaries, b.unitaries))
    assert any(not np.allclose(x, y) for x, y in zip(a.unitaries, c.unitaries))


def test_rejects_non_unitary_generators():
    spec = GroupSpec(m=1, d=1)
    with pytest.raises(ValueError):
        CommutingUnitaryAction(spec, [np.array([[2.0, 0.0], [0.0, 1.0]])])


def test_trivial_action_fixes_everything():
    spec = GroupSpec(m=2, d=2)
    a = trivial_action(spec, 2)
    x = rand_matrix(2, 2)
    for k in range(spec.d + 1):
        assert np.abs(ergodic_Mk(a, x, k) - x).max() < 1e-14


# -- ergodic averages --------------------------------------------------------------


def test_Mk_is_unital_trace_preserving_positive(action):
    n = action.n
    for k in range(action.spec.d + 1):
        assert np.abs(ergodic_Mk(action, np.eye(n, dtype=complex), k) - np.eye(n)).max() < 1e-12
        g = rand_matrix(n, k + 3)
        x = g.conj().T @ g
        out = ergodic_Mk(action, x, k)
        assert abs(np.trace(out) - np.trace(x)) < 1e-10
        assert np.linalg.eigvalsh((out + out.conj().T) / 2).min() > -1e-10


def test_multi_average_equals_sphere_average(action):
    fam = CommutingAutomorphismFamily(action)
    x = rand_matrix(2, 9)
    for k in range(action.spec.d + 1):
        assert np.abs(
            multi_average_Nk(fam, x, k) - ergodic_Mk(action, x, k)
        ).max() < 1e-12


def test_out_of_range_k_rejected(action):
    with pytest.raises(ValueError):
        ergodic_Mk(action, np.eye(2, dtype=complex), action.spec.d + 1)


# -- transference -------------------------------------------------------------------


def test_orbit_field_starts_at_x(action):
    x = rand_matrix(2, 11)
    f = transfer_field(action, x)
    assert np.abs(f.values[0] - x).max() < 1e-14


def test_intertwining_exact(action):
    x = rand_matrix(2, 12)
    for k in range(1, action.spec.d + 1):
        assert intertwining_error(action, x, k) < 1e-10 * np.abs(x).max()


def test_orbit_field_convolution_is_equivariant(action):
    # T_k maps orbit fields to orbit fields of the averaged element
    spec = action.spec
    x = rand_matrix(2, 13)
    f = transfer_field(action, x)
    k = 2
    Tkf = convolve(sphere_kernel(spec, k), f)
    g = transfer_field(action, ergodic_Mk(action, x, k))
    assert np.abs(Tkf.values - g.values).max() < 1e-10


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_transference_inequality(p):
    action = random_action(GroupSpec(m=1, d=3), 2, seed=3)
    rng = np.random.default_rng(21)
    for _ in range(3):
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        rep = transference_audit(action, g.conj().T @ g, p)
        assert rep["passed"], rep


def test_transference_audit_reports_consistent_values():
    action = random_action(GroupSpec(m=1, d=2), 2, seed=4)
    g = rand_matrix(2, 22)
    rep = transference_audit(action, g.conj().T @ g, 2.0)
    assert rep["lhs_dual"] <= rep["lhs"] + 1e-12
    assert rep["bound"] <= rep["rhs"]


# -- Kadison-Schwarz ----------------------------------------------------------------


def test_kadison_schwarz_nonnegative_samples(action):
    rng = np.random.default_rng(30)
    for _ in range(25):
        x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        k = int(rng.integers(0, action.spec.d + 1))
        assert kadison_schwarz_gap(action, x, k) >= -1e-10


def test_kadison_schwarz_zero_at_k0(action):
    x = rand_matrix(2, 31)
    assert abs(kadison_schwarz_gap(action, x, 0)) < 1e-12


# -- column norms ---------------------------------------------------------------------


def test_column_norm_audit_factorizes(action):
    g = rand_matrix(2, 32)
    rep = column_norm_audit(action, g.conj().T @ g, 4.0)
    assert rep["factorization_ok"]
    assert rep["ratio"] >= 0.0
    assert rep["max_factor_norm"] <= 1.0 + 1e-6


def test_column_norm_audit_rejects_small_p(action):
    with pytest.raises(ValueError):
        column_norm_audit(action, np.eye(2, dtype=complex), 2.0)
