"""Acceptance gate: one test (and one printed pass/fail line) per criterion.

Each test re-derives its quantity from the public API at the stated
tolerance; nothing here relies on fixtures from the unit suites.
"""

import math
import time

import numpy as np
import pytest

from hammax.actions import (
    intertwining_error,
    kadison_schwarz_gap,
    random_action,
    transference_audit,
)
from hammax.fields import (
    constant_field,
    convolve,
    field_norm,
    random_field,
    random_psd_field,
    schatten_norm,
)
from hammax.groups import (
    GroupSpec,
    forward_transform,
    inverse_transform,
    naive_forward_transform,
)
from hammax.kernels import (
    best_domination_search,
    distant_domination_constant,
    sphere_kernel,
)
from hammax.maximal import (
    cesaro_family,
    eta_noise,
    family_smoothed,
    family_T,
    identity_audit,
    l2_multiplier_bound,
    local_range,
    verify_nu_identity,
)
from hammax.norms import linf_norm_field, linf_norm_positive, weak_sup_norm

from math import comb


def report(name: str, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_fourier_unitarity_and_roundtrip():
    start = time.time()
    worst = 0.0
    cases = [(m, d) for m in (1, 2, 3, 7) for d in range(1, 13) if (m + 1) ** d <= 4096]
    for m, d in cases:
        spec = GroupSpec(m=m, d=d)
        n = min(4, 1 + (m + d) % 4)
        rng = np.random.default_rng(m * 100 + d)
        vals = rng.standard_normal((spec.size, n, n)) + 1j * rng.standard_normal(
            (spec.size, n, n)
        )
        fhat = forward_transform(vals, spec)
        worst = max(
            worst,
            np.abs(inverse_transform(fhat, spec) - vals).max() / np.abs(vals).max(),
            abs(np.linalg.norm(fhat) - np.linalg.norm(vals)) / np.linalg.norm(vals),
        )
    spec = GroupSpec(m=2, d=5)
    rng = np.random.default_rng(0)
    vals = rng.standard_normal((spec.size, 2, 2)) + 1j * rng.standard_normal(
        (spec.size, 2, 2)
    )
    fast = forward_transform(vals, spec)
    naive = naive_forward_transform(vals, spec)
    worst = max(worst, np.abs(fast - naive).max() / np.abs(naive).max())
    elapsed = time.time() - start
    report(
        "fourier_unitarity_roundtrip",
        worst < 1e-10 and elapsed < 10.0,
        f"max rel err {worst:.2e} over {len(cases)} groups in {elapsed:.1f}s",
    )


def test_noise_multiplier_formula():
    worst = 0.0
    for m, d in ((1, 8), (2, 5)):
        spec = GroupSpec(m=m, d=d)
        f = random_field(spec, 2, np.random.default_rng(d))
        for eta in (0.1, 0.3, m / (m + 1)):
            a = eta_noise(f, eta, route="kernel")
            b = eta_noise(f, eta, route="symbol")
            worst = max(worst, np.abs(a.values - b.values).max() / np.abs(f.values).max())
    report("noise_multiplier_formula", worst < 1e-10, f"max rel err {worst:.2e}")


def test_nu_mixture_identity():
    worst_sym = worst_mass = 0.0
    for m in (1, 2):
        for P in (0.1, 0.25, m / (m + 1)):
            rep = verify_nu_identity(m, P, 32)
            worst_sym = max(worst_sym, rep["max_abs_error"])
            worst_mass = max(worst_mass, abs(rep["mass_error"]))
    report(
        "nu_mixture_identity",
        worst_sym <= 1e-6 and worst_mass <= 1e-9,
        f"symbol err {worst_sym:.2e}, mass err {worst_mass:.2e}",
    )


def test_cesaro_identities_and_identifications():
    worst = 0.0
    worst_id = 0.0
    for m, d in ((1, 8), (2, 5)):
        spec = GroupSpec(m=m, d=d)
        for n in (1, 2):
            f = random_field(spec, n, np.random.default_rng(10 * m + n))
            for t in (1, 2, 3):
                for beta in (0.0, 0.7, -0.7):
                    rep = identity_audit(f, t, beta)
                    worst = max(worst, max(rep.values()))
            scale = np.abs(f.values).max()
            T = family_T(f, local_range(spec))
            fam = cesaro_family(f, -1.0)
            worst_id = max(
                worst_id,
                max(np.abs(S.values - Tk.values).max() for S, Tk in zip(fam["M"], T))
                / scale,
            )
            TM = family_smoothed(f, "local")
            fam0 = cesaro_family(f, 0.0)
            worst_id = max(
                worst_id,
                max(np.abs(S.values - g.values).max() for S, g in zip(fam0["M"], TM))
                / scale,
            )
            famd = cesaro_family(f, -1.0, mode="distant")
            worst_id = max(
                worst_id,
                max(
                    np.abs(
                        famd["M"][k].values
                        - convolve(sphere_kernel(spec, spec.d - k), f).values
                    ).max()
                    for k in range(len(famd["M"]))
                )
                / scale,
            )
    report(
        "cesaro_identities",
        worst < 1e-8 and worst_id < 1e-12,
        f"identity err {worst:.2e}, identification err {worst_id:.2e}",
    )


def test_young_inequality():
    excess = 0.0
    spec = GroupSpec(m=1, d=5)
    rng = np.random.default_rng(42)
    for _ in range(50):
        f = random_psd_field(spec, 2, rng)
        for p in (1.0, 1.5, 2.0, 3.0, math.inf):
            base = field_norm(f, p)
            for k in range(spec.d + 1):
                out = field_norm(convolve(sphere_kernel(spec, k), f), p)
                excess = max(excess, out / base - 1.0)
    report("young_inequality", excess <= 1e-10, f"max relative excess {excess:.2e}")


def test_norm_solver_certificates():
    rng = np.random.default_rng(11)
    worst_gap = 0.0
    for _ in range(6):
        N = int(rng.integers(2, 9))
        n = int(rng.integers(2, 5))
        g = rng.standard_normal((N, n, n)) + 1j * rng.standard_normal((N, n, n))
        xs = g.conj().transpose(0, 2, 1) @ g
        for p in (1.0, 1.5, 2.0, 3.0):
            cert = linf_norm_positive(xs, p)
            worst_gap = max(worst_gap, cert.gap / cert.primal_value)
    # commutative agreement
    n, N = 4, 6
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(g)
    diags = rng.uniform(0.0, 3.0, size=(N, n))
    xs = np.array([Q @ np.diag(dd) @ Q.conj().T for dd in diags])
    comm_err = 0.0
    for p in (1.0, 1.5, 2.0, 3.0):
        exact = (diags.max(axis=0) ** p).sum() ** (1 / p)
        comm_err = max(
            comm_err, abs(linf_norm_positive(xs, p).primal_value - exact)
        )
    # p = infinity closed form
    inf_cert = linf_norm_positive(xs, math.inf)
    inf_err = abs(inf_cert.primal_value - float(np.linalg.eigvalsh(xs).max()))
    report(
        "norm_solver",
        worst_gap <= 1e-4 and comm_err < 1e-8 and inf_err < 1e-12,
        f"max rel gap {worst_gap:.2e}, commutative err {comm_err:.2e}, "
        f"p=inf err {inf_err:.2e}",
    )


def test_kadison_schwarz_positivity():
    worst = 0.0
    for m, d, n in ((1, 4, 3), (2, 3, 2)):
        spec = GroupSpec(m=m, d=d)
        rng = np.random.default_rng(100 * m + d)
        for i in range(100):
            action = random_action(spec, n, seed=i % 7)
            x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            k = int(rng.integers(0, d + 1))
            worst = min(worst, kadison_schwarz_gap(action, x, k))
    report(
        "kadison_schwarz",
        worst >= -1e-10,
        f"min eigenvalue gap {worst:.2e} over 200 triples",
    )


def test_transference():
    spec = GroupSpec(m=1, d=3)
    rng = np.random.default_rng(5)
    worst_int = 0.0
    margin = 0.0
    for i in range(20):
        action = random_action(spec, 2, seed=i)
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        x = g.conj().T @ g
        for k in range(1, spec.d + 1):
            worst_int = max(worst_int, intertwining_error(action, x, k) / np.abs(x).max())
        for p in (1.5, 2.0, 4.0):
            rep = transference_audit(action, x, p)
            margin = max(margin, rep["lhs_dual"] - rep["bound"])
    report(
        "transference",
        worst_int < 1e-10 and margin <= 1e-6,
        f"intertwining err {worst_int:.2e}, worst inequality margin {margin:.2e}",
    )


def test_dimension_free_evidence():
    start = time.time()
    p = 2.0
    ratios = {}
    for family in ("delta", "sphere_indicator", "random_psd", "constant"):
        vals = []
        for d in range(4, 11):
            spec = GroupSpec(m=1, d=d)
            from hammax.cli import make_field

            f = make_field(spec, family, 2, 42)
            res = linf_norm_field(family_T(f)[1:], p)
            vals.append(res.primal_value / field_norm(f, p))
        ratios[family] = vals
        assert max(vals) <= 2.0 * vals[0], (family, vals)
    bound_vals = [l2_multiplier_bound(GroupSpec(m=1, d=d), 1) for d in range(2, 17)]
    anchor = l2_multiplier_bound(GroupSpec(m=1, d=4), 1)
    elapsed = time.time() - start
    ok = (
        all(max(v) <= 2.0 * v[0] for v in ratios.values())
        and max(bound_vals) <= 2.0 * anchor
        and elapsed < 600.0
    )
    detail = (
        "E_2(d) spans "
        + ", ".join(f"{k}:[{min(v):.3f},{max(v):.3f}]" for k, v in ratios.items())
        + f"; square-fn bound max {max(bound_vals):.3f} vs 2x anchor "
        f"{2 * anchor:.3f}; {elapsed:.0f}s"
    )
    report("dimension_free_evidence", ok, detail)


def test_weak_type_growth():
    prev = 0.0
    ok = True
    vals = []
    for d in (6, 8, 10, 12, 14):
        spec = GroupSpec(m=1, d=d)
        wt = spec.weight_table().reshape(spec.size)
        sup = np.zeros(spec.size)
        for k in range(d + 1):
            sup = np.maximum(sup, sphere_kernel(spec, k).weights[wt])
        W = weak_sup_norm(sup, 1.0)
        ratio = W / math.sqrt(d)
        vals.append((d, W, ratio))
        ok = ok and (1.0 <= ratio <= 2.0) and W >= prev - 1e-12
        ok = ok and abs(W - 2**d / comb(d, d // 2)) < 1e-9
        prev = W
    report(
        "weak_type_growth",
        ok,
        "; ".join(f"d={d}: W={W:.3f}, W/sqrt(d)={r:.3f}" for d, W, r in vals),
    )


def test_domination_sweeps():
    ok = True
    details = []
    for m in (1, 2):
        per_d = {}
        for d in range(4, 13):
            spec = GroupSpec(m=m, d=d)
            top = local_range(spec)
            cs = [best_domination_search(spec, K)["C_star"] for K in range(top + 1)]
            cds = [distant_domination_constant(spec, L) for L in range(top + 1)]
            ok = ok and all(map(math.isfinite, cs + cds))
            per_d[d] = max(max(cs), max(cds))
        anchor = per_d[8]
        ok = ok and max(per_d.values()) <= 2.0 * anchor
        details.append(f"m={m}: max C {max(per_d.values()):.3f} vs 2x d=8 {2 * anchor:.3f}")
    report("domination_sweeps", ok, "; ".join(details))
