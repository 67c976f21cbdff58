"""Commuting unitary actions of Z_{m+1}^d on matrix algebras.

Actions are realized as inner automorphisms alpha_u(x) = U^u x (U^u)* by d
commuting unitaries of order dividing m+1 sharing a common eigenbasis; all
group-law and order constraints are then exact by construction.  The
ergodic sphere averages, the orbit field f(s) = alpha_{-s} x and the
transference / Kadison-Schwarz audits live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from hammax.fields import OperatorField, schatten_norm
from hammax.groups import GroupSpec, enumerate_sphere, sphere_size
from hammax.kernels import sphere_kernel
from hammax.fields import convolve
from hammax.norms import linf_norm_positive, linf_norm_field


@dataclass
class CommutingUnitaryAction:
    """d commuting n x n unitaries, each of order dividing m+1."""

    spec: GroupSpec
    unitaries: list[np.ndarray]

    def __post_init__(self):
        if len(self.unitaries) != self.spec.d:
            raise ValueError("need one unitary per coordinate")
        self.unitaries = [np.asarray(U, dtype=complex) for U in self.unitaries]
        n = self.unitaries[0].shape[0]
        eye = np.eye(n)
        for U in self.unitaries:
            if U.shape != (n, n):
                raise ValueError("unitaries must share a common dimension")
            if np.abs(U @ U.conj().T - eye).max() > 1e-10:
                raise ValueError("generator is not unitary")
        # cache U_i^w for w in 0..m
        self._powers = []
        for U in self.unitaries:
            pw = [eye.astype(complex)]
            for _ in range(self.spec.m):
                pw.append(pw[-1] @ U)
            self._powers.append(pw)

    @property
    def n(self) -> int:
        return self.unitaries[0].shape[0]

    def word(self, u) -> np.ndarray:
        """U^u = prod_i U_i^{u(i)}."""
        u = np.asarray(u, dtype=np.int64) % self.spec.q
        return reduce(
            lambda acc, iw: acc @ self._powers[iw[0]][iw[1]],
            enumerate(u),
            np.eye(self.n, dtype=complex),
        )


def random_action(spec: GroupSpec, n: int, seed: int) -> CommutingUnitaryAction:
    """Seeded commuting action: U_i = V D_i V* with Haar V and root-of-unity D_i."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(g)
    V = Q * (np.diag(R) / np.abs(np.diag(R)))[None, :]  # phase-fixed Haar unitary
    xi = np.exp(2j * np.pi / spec.q)
    unitaries = []
    for _ in range(spec.d):
        exponents = rng.integers(0, spec.q, size=n)
        D = np.diag(xi**exponents)
        unitaries.append(V @ D @ V.conj().T)
    return CommutingUnitaryAction(spec=spec, unitaries=unitaries)


def trivial_action(spec: GroupSpec, n: int) -> CommutingUnitaryAction:
    return CommutingUnitaryAction(spec, [np.eye(n, dtype=complex)] * spec.d)


def act(action: CommutingUnitaryAction, u, x: np.ndarray) -> np.ndarray:
    """alpha_u(x) = U^u x (U^u)*."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (action.n, action.n):
        raise ValueError(f"expected a {action.n} x {action.n} matrix, got {x.shape}")
    W = action.word(u)
    return W @ x @ W.conj().T


def ergodic_Mk(action: CommutingUnitaryAction, x: np.ndarray, k: int) -> np.ndarray:
    """Sphere average of the orbit: (1/|{|u|=k}|) sum_{|u|=k} alpha_u(x)."""
    spec = action.spec
    if not 0 <= k <= spec.d:
        raise ValueError(f"k = {k} out of range [0, {spec.d}]")
    x = np.asarray(x, dtype=complex)
    if k == 0:
        return x.copy()
    acc = np.zeros_like(x)
    for u in enumerate_sphere(spec, k):
        acc += act(action, u, x)
    return acc / sphere_size(spec, k)


class CommutingAutomorphismFamily:
    """The commuting family L_i = alpha_{e_i} induced by a unitary action."""

    def __init__(self, action: CommutingUnitaryAction):
        self.action = action

    def apply_multi(self, exponents, x: np.ndarray) -> np.ndarray:
        """L^n x = L_1^{n_1} ... L_d^{n_d} x."""
        return act(self.action, exponents, x)


def multi_average_Nk(
    fam: CommutingAutomorphismFamily, x: np.ndarray, k: int
) -> np.ndarray:
    """Multi-index ergodic average over |n| = k; equals ergodic_Mk."""
    spec = fam.action.spec
    if not 0 <= k <= spec.d:
        raise ValueError(f"k = {k} out of range [0, {spec.d}]")
    x = np.asarray(x, dtype=complex)
    if k == 0:
        return x.copy()
    acc = np.zeros_like(x)
    for n in enumerate_sphere(spec, k):
        acc += fam.apply_multi(n, x)
    return acc / sphere_size(spec, k)


def transfer_field(action: CommutingUnitaryAction, x: np.ndarray) -> OperatorField:
    """The orbit field f(s) = alpha_{-s}(x)."""
    spec = action.spec
    x = np.asarray(x, dtype=complex)
    vals = np.empty((spec.size, action.n, action.n), dtype=complex)
    for s in range(spec.size):
        coords = spec.coords_of(s)
        vals[s] = act(action, spec.negate(coords), x)
    return OperatorField(spec, vals)


def intertwining_error(
    action: CommutingUnitaryAction, x: np.ndarray, k: int
) -> float:
    """Max |alpha_{-s} M_k x - (T_k f)(s)| over s, for f the orbit field."""
    spec = action.spec
    f = transfer_field(action, x)
    Tkf = convolve(sphere_kernel(spec, k), f)
    Mk = ergodic_Mk(action, x, k)
    err = 0.0
    for s in range(spec.size):
        coords = spec.coords_of(s)
        lhs = act(action, spec.negate(coords), Mk)
        err = max(err, float(np.abs(lhs - Tkf.values[s]).max()))
    return err


def transference_audit(
    action: CommutingUnitaryAction, x: np.ndarray, p: float, slack: float = 1e-6
) -> dict:
    """Check the transference inequality for a PSD x.

    LHS = ||(M_k x)_{1<=k<=d}||_{L_p(M; l_infty)} must satisfy
    LHS <= size^{-1/p} ||(T_k f)_k||_{L_p(N; l_infty)} for f the orbit field.
    The dual (lower) value is used on the left and the primal (upper) value
    on the right, so solver gaps cannot flip a true inequality.
    """
    spec = action.spec
    x = np.asarray(x, dtype=complex)
    Mks = np.array([ergodic_Mk(action, x, k) for k in range(1, spec.d + 1)])
    lhs_cert = linf_norm_positive(Mks, p)
    f = transfer_field(action, x)
    fields = [convolve(sphere_kernel(spec, k), f) for k in range(1, spec.d + 1)]
    rhs = linf_norm_field(fields, p)
    bound = spec.size ** (-1.0 / p) * rhs.primal_value if not np.isinf(p) else rhs.primal_value
    ok = lhs_cert.dual_value <= bound + slack
    return {
        "passed": bool(ok),
        "lhs": lhs_cert.primal_value,
        "lhs_dual": lhs_cert.dual_value,
        "rhs": rhs.primal_value,
        "bound": bound,
        "inconclusive": not (lhs_cert.converged),
    }


def kadison_schwarz_gap(
    action: CommutingUnitaryAction, x: np.ndarray, k: int
) -> float:
    """Min eigenvalue of M_k(x* x) - M_k(x)* M_k(x); >= 0 up to roundoff."""
    x = np.asarray(x, dtype=complex)
    lhs = ergodic_Mk(action, x.conj().T @ x, k)
    Mk = ergodic_Mk(action, x, k)
    gap = lhs - Mk.conj().T @ Mk
    return float(np.linalg.eigvalsh((gap + gap.conj().T) / 2).min())


def column_norm_audit(
    action: CommutingUnitaryAction, x: np.ndarray, p: float, tol: float = 1e-6
) -> dict:
    """Empirical column-l_infty constant and the factorization route check.

    Computes ||(M_k x)_k||_{L_p(l_infty^c)} / ||x||_p and verifies that with
    b the l_infty witness for (M_k(x* x))_k at p/2, each M_k(x) factors in
    least squares as y_k b^{1/2} with ||y_k||_infty <= 1 + tol.
    """
    if p <= 2:
        raise ValueError("column audit requires p > 2")
    spec = action.spec
    x = np.asarray(x, dtype=complex)
    Mks = [ergodic_Mk(action, x, k) for k in range(1, spec.d + 1)]
    grams = np.array([M.conj().T @ M for M in Mks])
    cert = linf_norm_positive(np.array(
        [ergodic_Mk(action, x.conj().T @ x, k) for k in range(1, spec.d + 1)]
    ), p / 2)
    col_norm = np.sqrt(
        linf_norm_positive(grams, p / 2).primal_value
    )
    xnorm = schatten_norm(x, p)
    b = cert.witness_a
    lam, V = np.linalg.eigh(b)
    lam = np.clip(lam, 0.0, None)
    b_half_pinv = (V * np.where(lam > 1e-12 * lam.max(initial=1.0),
                                1.0 / np.sqrt(np.where(lam > 0, lam, 1.0)), 0.0)[None, :]) @ V.conj().T
    y_norms = [schatten_norm(M @ b_half_pinv, np.inf) for M in Mks]
    return {
        "ratio": col_norm / xnorm if xnorm > 0 else 0.0,
        "col_norm": col_norm,
        "x_norm": xnorm,
        "factorization_ok": bool(max(y_norms) <= 1.0 + tol),
        "max_factor_norm": max(y_norms),
        "inconclusive": not cert.converged,
    }
