"""Vector-valued noncommutative norms with primal/dual certificates.

For a finite sequence of PSD matrices (x_n) the l_infty norm at exponent p
is the least ||a||_p over Hermitian a dominating every x_n in the Loewner
order; its dual is sup sum tr(x_n y_n) over PSD y_n with ||sum y_n||_p' <= 1.

The solver follows the central path of the barrier

    (1/p) tr(a^p)  -  mu * sum_n logdet(a - x_n)

by damped Newton steps.  At the central point the barrier multipliers
y_n = mu (a - x_n)^{-1} are PSD and sum to the norm gradient a^{p-1}, whose
Schatten-p' norm is 1 after scaling, so every stage yields an exactly
feasible dual certificate and the measured gap is trustworthy.  mu is
reduced until the gap meets the requested tolerance.

Field-level problems decouple per group point (domination in
l_infty(group) (x) M_n is pointwise), so a field norm is the l_p
combination of per-point matrix problems.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from hammax.fields import OperatorField, schatten_norm

DEFAULT_GAP_TOL = 1e-4
FEAS_TOL = 1e-9
MAX_STAGES = 60


class SolverError(RuntimeError):
    """Raised when the norm solver cannot reach the requested gap."""


@dataclass
class MaxNormCertificate:
    """Primal/dual bracket for an l_infty norm computation."""

    primal_value: float
    dual_value: float
    witness_a: np.ndarray | None = None
    witness_y: np.ndarray | None = None
    iterations: int = 0
    converged: bool = True
    upper_bound_only: bool = False

    @property
    def gap(self) -> float:
        return self.primal_value - self.dual_value

    def to_json(self) -> str:
        return json.dumps(
            {
                "primal": self.primal_value,
                "dual": self.dual_value,
                "gap": self.gap,
                "iterations": self.iterations,
                "converged": self.converged,
                "upper_bound_only": self.upper_bound_only,
            }
        )


# -- small utilities --------------------------------------------------------


def _as_psd_batch(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=complex)
    if xs.ndim == 2:
        xs = xs[None]
    if xs.ndim != 3 or xs.shape[1] != xs.shape[2]:
        raise ValueError(f"expected a sequence of square matrices, got {xs.shape}")
    herm_err = np.abs(xs - xs.conj().transpose(0, 2, 1)).max()
    if herm_err > 1e-10 * max(1.0, np.abs(xs).max()):
        raise ValueError("entries must be Hermitian")
    return (xs + xs.conj().transpose(0, 2, 1)) / 2


def _is_diagonal_batch(xs: np.ndarray, tol: float = 1e-13) -> bool:
    n = xs.shape[1]
    if n == 1:
        return True
    mask = ~np.eye(n, dtype=bool)
    scale = max(1.0, np.abs(xs).max())
    return bool(np.abs(xs[:, mask]).max(initial=0.0) <= tol * scale)


def _pnorm_vec(v: np.ndarray, p: float) -> float:
    v = np.abs(v)
    if np.isinf(p):
        return float(v.max(initial=0.0))
    return float((v**p).sum() ** (1.0 / p))


def _conjugate(p: float) -> float:
    if np.isinf(p):
        return 1.0
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


# -- Hermitian parameterization ---------------------------------------------


def _herm_basis(n: int) -> np.ndarray:
    """Real basis of Hermitian n x n matrices: n diagonal, then re/im pairs."""
    mats = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        mats.append(e)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            e[j, i] = 1.0
            mats.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1j
            e[j, i] = -1j
            mats.append(e)
    return np.array(mats)


def _grad_to_params(g: np.ndarray, basis: np.ndarray) -> np.ndarray:
    # df = tr(G da); component along basis element E is Re tr(G E)
    return np.real(np.einsum("ij,aji->a", g, basis))


# -- barrier solver ----------------------------------------------------------


def _power_phi(lam: np.ndarray, q: float) -> np.ndarray:
    """Divided-difference table of t -> t^q on the eigenvalues."""
    lq = lam**q
    diff = lam[:, None] - lam[None, :]
    num = lq[:, None] - lq[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(np.abs(diff) > 1e-12 * max(1.0, lam.max()), num / diff, 0.0)
    same = np.abs(diff) <= 1e-12 * max(1.0, lam.max())
    deriv = q * lam ** (q - 1.0)
    phi[same] = ((deriv[:, None] + deriv[None, :]) / 2)[same]
    return phi


def _barrier_state(a: np.ndarray, xs: np.ndarray, p: float, mu: float):
    """Value, gradient matrix and auxiliary data; None if a infeasible."""
    n = a.shape[0]
    gaps = a[None] - xs
    chols = []
    for g in gaps:
        try:
            chols.append(np.linalg.cholesky(g))
        except np.linalg.LinAlgError:
            return None
    lam, V = np.linalg.eigh(a)
    if lam[0] <= 0:
        return None
    invs = np.array([np.linalg.inv(g) for g in gaps])
    invs = (invs + invs.conj().transpose(0, 2, 1)) / 2
    logdets = sum(2.0 * np.log(np.real(np.diag(c))).sum() for c in chols)
    obj = (lam**p).sum() / p - mu * logdets
    a_pow = (V * (lam ** (p - 1.0))[None, :]) @ V.conj().T
    grad = a_pow - mu * invs.sum(axis=0)
    grad = (grad + grad.conj().T) / 2
    return {"obj": obj, "grad": grad, "lam": lam, "V": V, "invs": invs}


def _newton_direction(state, xs, p, mu, basis):
    """Solve H delta = -grad in the real Hermitian parameter basis."""
    lam, V = state["lam"], state["V"]
    B = basis.shape[0]
    # objective Hessian via the Frechet derivative of t -> t^{p-1}
    phi = _power_phi(lam, p - 1.0)
    Et = V.conj().T @ basis @ V  # (B, n, n)
    Hobj = np.real(np.einsum("ij,aij,bji->ab", phi, Et, Et))
    # barrier Hessian: mu * tr(M E_a M E_b) per constraint
    Hbar = np.zeros((B, B))
    for M in state["invs"]:
        ME = M @ basis  # (B, n, n)
        Hbar += np.real(np.einsum("aij,bji->ab", ME, ME))
    H = Hobj + mu * Hbar
    g = _grad_to_params(state["grad"], basis)
    try:
        delta = np.linalg.solve(H + 1e-14 * np.eye(B), -g)
    except np.linalg.LinAlgError:
        delta = -g
    return delta, g


def _minimize_barrier(a0, xs, p, mu, basis, max_iter=80):
    """Damped Newton descent of the barrier; returns the central point."""
    a = a0
    state = _barrier_state(a, xs, p, mu)
    if state is None:
        raise SolverError("infeasible starting point")
    for _ in range(max_iter):
        delta, g = _newton_direction(state, xs, p, mu, basis)
        decrement = -float(g @ delta)
        if decrement <= 1e-12 * max(1.0, abs(state["obj"])):
            break
        step_mat = np.tensordot(delta, basis, axes=(0, 0))
        t = 1.0
        for _ in range(50):
            cand = a + t * step_mat
            cand_state = _barrier_state(cand, xs, p, mu)
            if cand_state is not None and cand_state["obj"] <= state["obj"] - 0.25 * t * decrement:
                break
            t *= 0.5
        else:
            break
        a, state = cand, cand_state
    return a, state


def _certificate_at(a, xs, p, mu):
    lam = np.linalg.eigvalsh(a)
    primal = _pnorm_vec(lam, p)
    y_raw = mu * np.array([np.linalg.inv(a - x) for x in xs])
    y_raw = (y_raw + y_raw.conj().transpose(0, 2, 1)) / 2
    Y = y_raw.sum(axis=0)
    s = _pnorm_vec(np.linalg.eigvalsh(Y), _conjugate(p))
    if s <= 0:
        return primal, 0.0, y_raw
    y = y_raw / s
    dual = float(np.real(np.einsum("kij,kji->", xs, y)))
    return primal, dual, y


def _solve_barrier(xs: np.ndarray, p: float, gap_tol: float) -> MaxNormCertificate:
    N, n, _ = xs.shape
    scale = float(np.linalg.eigvalsh(xs).max())
    xs_s = xs / scale
    basis = _herm_basis(n)
    a = 2.0 * np.eye(n, dtype=complex)
    mu = 1.0 / (N * n)
    best_primal, best_dual = math.inf, 0.0
    witness_a, witness_y = a, None
    iters = 0
    for _ in range(MAX_STAGES):
        a, _state = _minimize_barrier(a, xs_s, p, mu, basis)
        iters += 1
        primal, dual, y = _certificate_at(a, xs_s, p, mu)
        if primal < best_primal:
            best_primal, witness_a = primal, a.copy()
        if dual > best_dual:
            best_dual, witness_y = dual, y.copy()
        if best_primal - best_dual <= gap_tol * best_primal:
            break
        mu *= 0.1
    converged = best_primal - best_dual <= gap_tol * best_primal
    return MaxNormCertificate(
        primal_value=best_primal * scale,
        dual_value=best_dual * scale,
        witness_a=witness_a * scale,
        witness_y=witness_y,
        iterations=iters,
        converged=converged,
    )


# -- exact special cases ------------------------------------------------------


def _linf_diagonal_exact(xs: np.ndarray, p: float) -> MaxNormCertificate:
    """Exact norm for simultaneously diagonal PSD input: entrywise sup."""
    diags = np.real(np.einsum("kii->ki", xs))
    sup = diags.max(axis=0)
    value = _pnorm_vec(sup, p)
    a = np.diag(sup.astype(complex))
    return MaxNormCertificate(
        primal_value=value, dual_value=value, witness_a=a, witness_y=None
    )


def _commuting_eigenbasis(xs: np.ndarray, tol: float = 1e-12) -> np.ndarray | None:
    """Common unitary eigenbasis of a commuting Hermitian batch, or None.

    Tries the eigenbasis of a generic fixed-coefficient combination; if it
    diagonalizes every entry the family commutes and the l_infty problem
    collapses to the scalar (diagonal) case.
    """
    N, n, _ = xs.shape
    # deterministic "generic" coefficients
    coeff = np.cos(np.arange(1, N + 1, dtype=float))
    combo = np.einsum("k,kij->ij", coeff, xs)
    _, V = np.linalg.eigh(combo)
    rotated = V.conj().T @ xs @ V
    off = rotated.copy()
    idx = np.arange(n)
    off[:, idx, idx] = 0.0
    scale = max(1.0, float(np.abs(xs).max()))
    if np.abs(off).max(initial=0.0) <= tol * scale:
        return V
    return None


def _linf_inf_exact(xs: np.ndarray) -> MaxNormCertificate:
    """p = infinity closed form: max_n lambda_max(x_n), witness a = t I."""
    t = float(np.linalg.eigvalsh(xs).max())
    n = xs.shape[1]
    return MaxNormCertificate(
        primal_value=t, dual_value=t, witness_a=t * np.eye(n, dtype=complex)
    )


# -- public operations --------------------------------------------------------


def linf_norm_positive(
    xs,
    p: float,
    gap_tol: float = DEFAULT_GAP_TOL,
    use_diagonal_fastpath: bool = True,
) -> MaxNormCertificate:
    """||(x_n)||_{L_p(M_n; l_infty)} for PSD matrices x_n, with certificates."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    xs = _as_psd_batch(xs)
    min_eig = float(np.linalg.eigvalsh(xs).min())
    if min_eig < -FEAS_TOL * max(1.0, np.abs(xs).max()):
        raise ValueError("entries must be PSD")
    if float(np.abs(xs).max(initial=0.0)) == 0.0:
        n = xs.shape[1]
        return MaxNormCertificate(0.0, 0.0, np.zeros((n, n), dtype=complex))
    if np.isinf(p):
        return _linf_inf_exact(xs)
    if use_diagonal_fastpath:
        if _is_diagonal_batch(xs):
            return _linf_diagonal_exact(xs, p)
        V = _commuting_eigenbasis(xs)
        if V is not None:
            cert = _linf_diagonal_exact(
                np.where(np.eye(xs.shape[1], dtype=bool), V.conj().T @ xs @ V, 0.0), p
            )
            a = V @ cert.witness_a @ V.conj().T
            return MaxNormCertificate(
                primal_value=cert.primal_value,
                dual_value=cert.dual_value,
                witness_a=a,
                witness_y=None,
            )
    return _solve_barrier(xs, p, gap_tol)


def linf_norm_general(xs, p: float, **kw) -> MaxNormCertificate:
    """Upper estimate for non-PSD sequences via the four-way positive split.

    Each entry is split pointwise into Hermitian/anti-Hermitian positive
    and negative spectral parts; the triangle inequality then gives an
    upper bound.  Tightness is not claimed (flagged upper_bound_only).
    """
    xs = np.asarray(xs, dtype=complex)
    adj = xs.conj().transpose(0, 2, 1)
    herm = (xs + adj) / 2
    anti = (xs - adj) / (2j)
    total, gap = 0.0, 0.0
    for h in (herm, anti):
        lam, V = np.linalg.eigh(h)
        for sign in (1.0, -1.0):
            part = (V * np.clip(sign * lam, 0.0, None)[:, None, :]) @ V.conj().transpose(0, 2, 1)
            if np.abs(part).max(initial=0.0) == 0.0:
                continue
            cert = linf_norm_positive(part, p, **kw)
            total += cert.primal_value
            gap += cert.gap
    return MaxNormCertificate(
        primal_value=total,
        dual_value=total - gap,
        upper_bound_only=True,
    )


def l1_norm_positive(xs, p: float) -> float:
    """||(x_n)||_{L_p(l_1)} = ||sum_n x_n||_p for PSD entries."""
    xs = _as_psd_batch(xs)
    return schatten_norm(xs.sum(axis=0), p)


def linf_col_norm(xs, p: float, **kw) -> float:
    """Column l_infty norm: sqrt of the l_infty norm of (x* x) at p/2."""
    if p < 2:
        raise ValueError(f"column norm requires p >= 2, got {p}")
    xs = np.asarray(xs, dtype=complex)
    if xs.ndim == 2:
        xs = xs[None]
    grams = xs.conj().transpose(0, 2, 1) @ xs
    cert = linf_norm_positive(grams, p / 2 if not np.isinf(p) else math.inf, **kw)
    return math.sqrt(cert.primal_value)


def weak_sup_norm(sup_values: np.ndarray, p: float) -> float:
    """sup_lam lam * |{v > lam}|^{1/p} for a vector of nonnegative scalars."""
    v = np.sort(np.abs(np.asarray(sup_values, dtype=float).ravel()))[::-1]
    if v.size == 0 or v[0] == 0.0:
        return 0.0
    counts = np.arange(1, v.size + 1, dtype=float)
    if np.isinf(p):
        return float(v[0])
    return float((v * counts ** (1.0 / p)).max())


def weak_linf_norm_diag(xs, p: float) -> float:
    """Weak-type maximal quasi-norm for simultaneously diagonal data.

    For commuting entries the optimal compression projection at level lam
    is the indicator of {sup_k |x_k| <= lam}, so the quasi-norm reduces to
    sorting the pointwise sup.  Non-commuting input is rejected.
    """
    xs = np.asarray(xs, dtype=complex)
    if xs.ndim == 2:  # sequence of scalar vectors
        sup = np.abs(xs).max(axis=0)
        return weak_sup_norm(sup, p)
    if xs.ndim != 3:
        raise ValueError(f"unsupported input shape {xs.shape}")
    if not _is_diagonal_batch(xs):
        raise ValueError("weak-type norm implemented only for commuting (diagonal) data")
    diags = np.abs(np.einsum("kii->ki", xs))
    return weak_sup_norm(diags.max(axis=0), p)


def linear_domination_check(xs, z, p: float, slack: float = 1e-6, **kw) -> bool:
    """Verify ||sup+ sum_k z_{nk} x_k||_p <= sup_n(sum_k z_nk) ||sup+ x||_p."""
    xs = _as_psd_batch(xs)
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("weights must be nonnegative")
    mixed = np.einsum("nk,kij->nij", z, xs)
    lhs = linf_norm_positive(mixed, p, **kw)
    rhs = linf_norm_positive(xs, p, **kw)
    bound = z.sum(axis=1).max() * rhs.primal_value
    return lhs.primal_value <= bound + slack + lhs.gap + rhs.gap


# -- field-level problems ------------------------------------------------------


@dataclass
class FieldMaxNormResult:
    """Field-level l_infty norm, assembled from per-point matrix problems."""

    primal_value: float
    dual_value: float
    point_primals: np.ndarray = dc_field(repr=False, default=None)
    witness: OperatorField | None = dc_field(repr=False, default=None)

    @property
    def gap(self) -> float:
        return self.primal_value - self.dual_value


def linf_norm_field(
    fields: list[OperatorField],
    p: float,
    gap_tol: float = DEFAULT_GAP_TOL,
    use_diagonal_fastpath: bool = True,
) -> FieldMaxNormResult:
    """||(f_n)||_{L_p(N; l_infty)} for positive fields on a common group.

    Pointwise domination decouples the problem, so the field norm is the
    l_p combination over group points of the per-point matrix norms (and
    the same combination of dual values is a valid field-level dual value).
    """
    if not fields:
        raise ValueError("empty field sequence")
    spec = fields[0].spec
    n = fields[0].n
    stacked = np.stack([f.values for f in fields], axis=1)  # (size, N, n, n)
    if np.isinf(p):
        top = float(np.linalg.eigvalsh(stacked).max())
        return FieldMaxNormResult(top, top)
    primals = np.zeros(spec.size)
    duals = np.zeros(spec.size)
    witness_vals = np.zeros((spec.size, n, n), dtype=complex)
    for s in range(spec.size):
        cert = linf_norm_positive(
            stacked[s], p, gap_tol=gap_tol, use_diagonal_fastpath=use_diagonal_fastpath
        )
        primals[s] = cert.primal_value
        duals[s] = cert.dual_value
        if cert.witness_a is not None:
            witness_vals[s] = cert.witness_a
    primal = _pnorm_vec(primals, p)
    dual = _pnorm_vec(duals, p)
    return FieldMaxNormResult(
        primal_value=primal,
        dual_value=dual,
        point_primals=primals,
        witness=OperatorField(spec, witness_vals),
    )
