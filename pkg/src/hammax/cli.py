"""Command-line driver: verification suite, dimension sweeps, weak-type
witness, and domination-constant sweeps, with CSV/JSON provenance.

Subcommands:
  verify      run the invariant suite, emit a JSON report (exit 1 on failure)
  sweep       empirical maximal constants E_p(d) across dimensions -> CSV
  weak11      scalar weak-(1,1) value W(d) and W(d)/sqrt(d) -> CSV
  domination  pointwise kernel-domination constants across d -> CSV

Every CSV row carries the build id and a hash of the scientific config, so
downstream plots can be tied back to the exact run that produced them.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import subprocess
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

import hammax
import hammax.maximal as maximal
from hammax.actions import (
    intertwining_error,
    kadison_schwarz_gap,
    random_action,
    transference_audit,
)
from hammax.fields import (
    OperatorField,
    constant_field,
    convolve,
    delta_field,
    field_norm,
    random_field,
    random_psd_field,
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
    ergodic_J,
    family_smoothed,
    family_T,
    identity_audit,
    l2_multiplier_bound,
    local_range,
    noise_operator,
    verify_nu_identity,
)
from hammax.norms import linf_norm_field, linf_norm_positive, weak_sup_norm

# complex entries a single field may hold: (m+1)^d * n^2
MEMORY_BUDGET = 2**27

CSV_COLUMNS = "m,d,n,p,family,quantity,value,gap,seed,build_id,config_hash"

FAMILIES = ("delta", "sphere_indicator", "random_psd", "constant")


@dataclasses.dataclass
class ExperimentConfig:
    m: int = 1
    d_min: int = 6
    d_max: int = 6
    n: int = 2
    p_list: tuple = (2.0,)
    t_list: tuple = (1,)
    seed: int = 42
    family: str = "random_psd"
    gap_tol: float = 1e-4
    out: str | None = None
    fault_inject: str | None = None

    def validate(self):
        if self.m < 1:
            raise UsageError(f"m must be >= 1, got {self.m}")
        if self.d_min > self.d_max:
            raise UsageError(f"empty d range [{self.d_min}, {self.d_max}]")
        if self.d_min < 1:
            raise UsageError(f"d must be >= 1, got {self.d_min}")
        if self.n < 1:
            raise UsageError(f"n must be >= 1, got {self.n}")
        if self.family not in FAMILIES:
            raise UsageError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if any(p < 1 for p in self.p_list):
            raise UsageError("every p must be >= 1")

    @property
    def d_range(self) -> range:
        return range(self.d_min, self.d_max + 1)

    def hash(self) -> str:
        """Hash of the scientific fields (paths and fault flags excluded)."""
        payload = dataclasses.asdict(self)
        payload.pop("out")
        payload.pop("fault_inject")
        payload["p_list"] = [repr(float(p)) for p in self.p_list]
        payload["t_list"] = [int(t) for t in self.t_list]
        blob = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


class UsageError(ValueError):
    pass


def build_id() -> str:
    """git-describe-style identifier of the running code, best effort."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True,
            text=True,
            cwd=Path(__file__).resolve().parent,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except OSError:
        pass
    return f"hammax-{hammax.__version__}"


def memory_ok(spec: GroupSpec, n: int) -> bool:
    return spec.size * n * n <= MEMORY_BUDGET


def make_field(spec: GroupSpec, family: str, n: int, seed: int) -> OperatorField:
    if family == "delta":
        return delta_field(spec, n)
    if family == "constant":
        return constant_field(spec, np.eye(n))
    if family == "sphere_indicator":
        radius = max(1, spec.d // (spec.m + 1))
        vals = np.zeros((spec.size, n, n), dtype=complex)
        weights = spec.weight_table().reshape(spec.size)
        vals[weights == radius] = np.eye(n)
        return OperatorField(spec, vals)
    if family == "random_psd":
        return random_psd_field(spec, n, np.random.default_rng(seed))
    raise UsageError(f"unknown family {family!r}")


# -- CSV plumbing -----------------------------------------------------------


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


class CsvSink:
    def __init__(self, config: ExperimentConfig, command: str):
        self.rows: list[str] = []
        self.config = config
        self.build = build_id()
        self.chash = config.hash()
        self.command = command

    def add(self, *, m, d, n, p, family, quantity, value, gap=None, seed=None):
        cells = [m, d, n, p, family, quantity, value, gap, seed, self.build, self.chash]
        self.rows.append(",".join(_fmt(c) for c in cells))

    def render(self) -> str:
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        lines = [f"# hammax {self.command} generated={stamp}", CSV_COLUMNS]
        lines.extend(self.rows)
        return "\n".join(lines) + "\n"

    def write(self):
        text = self.render()
        if self.config.out:
            Path(self.config.out).write_text(text)
        else:
            sys.stdout.write(text)


# -- verify -----------------------------------------------------------------


def _inject_fault(name: str):
    if name == "cesaro":
        pristine = maximal.cesaro_coeffs

        def corrupted(alpha, N):
            table = pristine(alpha, N)
            vals = table.values.copy()
            vals[-1] += 1e-3
            return maximal.CesaroTable(alpha=table.alpha, values=vals)

        maximal.cesaro_coeffs = corrupted
        return
    raise UsageError(f"unknown fault {name!r}")


def _check(name, value, tol, warning=None):
    entry = {
        "name": name,
        "max_error": float(value),
        "tolerance": tol,
        "passed": bool(value <= tol),
    }
    if warning:
        entry["warning"] = warning
    return entry


def run_verify(config: ExperimentConfig) -> dict:
    if config.fault_inject:
        _inject_fault(config.fault_inject)
    spec = GroupSpec(m=config.m, d=config.d_min)
    if not memory_ok(spec, config.n):
        raise UsageError(f"(m+1)^d * n^2 exceeds the memory budget at d={spec.d}")
    rng = np.random.default_rng(config.seed)
    rho = spec.m / (spec.m + 1)
    checks = []

    f = random_field(spec, config.n, rng)
    # transform round trip + Parseval
    fhat = forward_transform(f.values, spec)
    round_err = np.abs(inverse_transform(fhat, spec) - f.values).max() / np.abs(
        f.values
    ).max()
    pars_err = abs(np.linalg.norm(fhat) - np.linalg.norm(f.values)) / np.linalg.norm(
        f.values
    )
    checks.append(_check("fourier_roundtrip", max(round_err, pars_err), 1e-10))
    if spec.size <= 1024:
        naive_err = np.abs(naive_forward_transform(f.values, spec) - fhat).max()
        checks.append(_check("fourier_fast_vs_naive", naive_err / np.abs(fhat).max(), 1e-10))

    # noise multiplier formula, both routes
    err = 0.0
    for eta in (0.1, 0.3, rho):
        a = eta_noise(f, eta, route="kernel")
        b = eta_noise(f, eta, route="symbol")
        err = max(err, np.abs(a.values - b.values).max() / np.abs(f.values).max())
    checks.append(_check("eta_multiplier_formula", err, 1e-10))

    # semigroup additivity
    ab = noise_operator(noise_operator(f, 0.3), 0.45)
    err = np.abs(ab.values - noise_operator(f, 0.75).values).max() / np.abs(
        f.values
    ).max()
    checks.append(_check("noise_semigroup", err, 1e-10))

    # J_P route coherence
    err = 0.0
    for P in (0.1, rho):
        a = ergodic_J(f, P, route="symbol")
        b = ergodic_J(f, P, route="kernel")
        err = max(err, np.abs(a.values - b.values).max() / np.abs(f.values).max())
    checks.append(_check("ergodic_J_routes", err, 1e-9))

    # nu_P mixture identity
    err = mass = 0.0
    for P in (0.1, 0.25, rho):
        rep = verify_nu_identity(config.m, P, 32)
        err = max(err, rep["max_abs_error"])
        mass = max(mass, abs(rep["mass_error"]))
    checks.append(_check("nu_identity", err, 1e-6))
    checks.append(_check("nu_mass", mass, 1e-9))

    # Cesaro identities
    worst = {
        "difference_law": 0.0,
        "summation_by_parts": 0.0,
        "imaginary_convolution": 0.0,
        "abel_shift": 0.0,
    }
    n_max = min(local_range(spec), 6)
    for t in config.t_list:
        for beta in (0.0, 0.7, -0.7):
            rep = identity_audit(f, int(t), beta, n_max=n_max)
            for key in worst:
                worst[key] = max(worst[key], rep[key])
    for key, val in worst.items():
        checks.append(_check(f"cesaro_{key}", val, 1e-8))

    # identifications against the plain families
    T = family_T(f, local_range(spec))
    fam = cesaro_family(f, -1.0)
    err = max(
        np.abs(S.values - Tk.values).max() for S, Tk in zip(fam["M"], T)
    ) / np.abs(f.values).max()
    checks.append(_check("identify_M_minus1_T", err, 1e-12))
    TM = family_smoothed(f, "local")
    fam0 = cesaro_family(f, 0.0)
    err = max(
        np.abs(S.values - g.values).max() for S, g in zip(fam0["M"], TM)
    ) / np.abs(f.values).max()
    checks.append(_check("identify_M0_TM", err, 1e-12))
    famd = cesaro_family(f, -1.0, mode="distant")
    err = max(
        np.abs(famd["M"][k].values - convolve(sphere_kernel(spec, spec.d - k), f).values).max()
        for k in range(len(famd["M"]))
    ) / np.abs(f.values).max()
    checks.append(_check("identify_N_minus1_T_distant", err, 1e-12))

    # Young inequality for the sphere measures
    fp = random_psd_field(spec, config.n, rng)
    excess = 0.0
    for p in (1.0, 1.5, 2.0, 3.0, math.inf):
        base = field_norm(fp, p)
        for k in range(spec.d + 1):
            excess = max(
                excess, field_norm(convolve(sphere_kernel(spec, k), fp), p) / base - 1.0
            )
    checks.append(_check("young_contractivity", excess, 1e-10))

    # ergodic side: intertwining, Kadison-Schwarz, transference
    aspec = GroupSpec(m=config.m, d=min(config.d_min, 3))
    action = random_action(aspec, config.n, seed=config.seed)
    g = rng.standard_normal((config.n, config.n)) + 1j * rng.standard_normal(
        (config.n, config.n)
    )
    err = max(intertwining_error(action, g, k) for k in range(1, aspec.d + 1))
    checks.append(_check("transference_intertwining", err / np.abs(g).max(), 1e-10))

    ks_spec = GroupSpec(m=config.m, d=min(config.d_min, 4))
    ks_action = random_action(ks_spec, config.n, seed=config.seed + 1)
    worst_gap = 0.0
    for _ in range(20):
        h = rng.standard_normal((config.n, config.n)) + 1j * rng.standard_normal(
            (config.n, config.n)
        )
        k = int(rng.integers(0, ks_spec.d + 1))
        worst_gap = max(worst_gap, -kadison_schwarz_gap(ks_action, h, k))
    checks.append(_check("kadison_schwarz", worst_gap, 1e-10))

    warnings = []
    margin = 0.0
    for i in range(5):
        h = rng.standard_normal((config.n, config.n)) + 1j * rng.standard_normal(
            (config.n, config.n)
        )
        x = h.conj().T @ h
        for p in config.p_list:
            rep = transference_audit(action, x, float(p))
            margin = max(margin, rep["lhs_dual"] - rep["bound"])
            if rep["inconclusive"]:
                warnings.append(f"transference instance {i} at p={p}: solver inconclusive")
    checks.append(_check("transference_inequality", margin, 1e-6))

    # solver duality gap on random PSD batches
    rel_gap = 0.0
    for _ in range(3):
        h = rng.standard_normal((6, 3, 3)) + 1j * rng.standard_normal((6, 3, 3))
        xs = h.conj().transpose(0, 2, 1) @ h
        for p in config.p_list:
            if math.isinf(float(p)):
                continue
            cert = linf_norm_positive(xs, float(p), gap_tol=config.gap_tol)
            rel_gap = max(rel_gap, cert.gap / cert.primal_value)
            if not cert.converged:
                warnings.append(f"solver inconclusive at p={p}")
    checks.append(_check("solver_duality_gap", rel_gap, config.gap_tol))

    report = {
        "build_id": build_id(),
        "config_hash": config.hash(),
        "config": dataclasses.asdict(config),
        "checks": checks,
        "warnings": warnings,
        "passed": all(c["passed"] for c in checks),
    }
    return report


def cmd_verify(config: ExperimentConfig) -> int:
    report = run_verify(config)
    text = json.dumps(report, indent=2) + "\n"
    if config.out:
        Path(config.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if report["passed"] else 1


# -- sweep --------------------------------------------------------------------


def run_sweep(config: ExperimentConfig, sink: CsvSink):
    for d in config.d_range:
        spec = GroupSpec(m=config.m, d=d)
        common = dict(m=config.m, d=d, n=config.n, family=config.family,
                      seed=config.seed)
        if not memory_ok(spec, config.n):
            for p in config.p_list:
                sink.add(p=float(p), quantity="skipped_memory_guard", value=0.0,
                         **common)
            continue
        f = make_field(spec, config.family, config.n, config.seed)
        base = {float(p): field_norm(f, float(p)) for p in config.p_list}
        T = family_T(f)[1:]  # k = 1..d
        TM = family_smoothed(f, "local")
        TD = family_smoothed(f, "distant")
        for p in sorted(base):
            for quantity, fam in (("E_p", T), ("E_p_smoothed_local", TM),
                                  ("E_p_smoothed_distant", TD)):
                res = linf_norm_field(fam, p, gap_tol=config.gap_tol)
                sink.add(p=p, quantity=quantity, value=res.primal_value / base[p],
                         gap=res.gap / res.primal_value if res.primal_value else 0.0,
                         **common)
            for t in config.t_list:
                sink.add(p=p, quantity=f"l2_multiplier_bound_t{int(t)}",
                         value=l2_multiplier_bound(spec, int(t)), **common)


# -- weak11 ---------------------------------------------------------------------


def run_weak11(config: ExperimentConfig, sink: CsvSink):
    for d in config.d_range:
        spec = GroupSpec(m=config.m, d=d)
        common = dict(m=config.m, d=d, n=1, family="delta", seed=config.seed)
        if not memory_ok(spec, 1):
            sink.add(p=1.0, quantity="skipped_memory_guard", value=0.0, **common)
            continue
        weights = spec.weight_table().reshape(spec.size)
        sup = np.zeros(spec.size)
        for k in range(spec.d + 1):
            kern = sphere_kernel(spec, k).weights
            sup = np.maximum(sup, kern[weights])
        W = weak_sup_norm(sup, 1.0)
        sink.add(p=1.0, quantity="W", value=W, **common)
        sink.add(p=1.0, quantity="W_over_sqrt_d", value=W / math.sqrt(d), **common)


# -- domination -------------------------------------------------------------------


def run_domination(config: ExperimentConfig, sink: CsvSink):
    for d in config.d_range:
        spec = GroupSpec(m=config.m, d=d)
        common = dict(m=config.m, d=d, n=1, family="kernel", seed=config.seed)
        worst = 0.0
        for K in range(local_range(spec) + 1):
            rep = best_domination_search(spec, K)
            sink.add(p=1.0, quantity=f"C_star_K{K}", value=rep["C_star"], **common)
            sink.add(p=1.0, quantity=f"P_star_K{K}", value=rep["P_star"], **common)
            worst = max(worst, rep["C_star"])
        sink.add(p=1.0, quantity="C_star_max", value=worst, **common)
        worst_distant = 0.0
        for L in range(local_range(spec) + 1):
            c = distant_domination_constant(spec, L)
            sink.add(p=1.0, quantity=f"C_distant_L{L}", value=c, **common)
            worst_distant = max(worst_distant, c)
        sink.add(p=1.0, quantity="C_distant_max", value=worst_distant, **common)


# -- argument handling ----------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hammax",
        description="Spherical maximal means on Z_(m+1)^d: verification and sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify", "sweep", "weak11", "domination"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--m", type=int)
        p.add_argument("--d-min", type=int, dest="d_min")
        p.add_argument("--d-max", type=int, dest="d_max")
        p.add_argument("--n", type=int)
        p.add_argument("--p", type=float, action="append", dest="p_list",
                       help="repeatable; accepts inf")
        p.add_argument("--seed", type=int)
        p.add_argument("--family", choices=FAMILIES)
        p.add_argument("--out", type=str)
        p.add_argument("--fault-inject", dest="fault_inject",
                       help="corrupt a named component (test only)")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        unknown = set(data) - {f.name for f in dataclasses.fields(ExperimentConfig)}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key in ("m", "d_min", "d_max", "n", "p_list", "seed", "family", "out",
                "fault_inject"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if "p_list" in data:
        data["p_list"] = tuple(float(p) for p in data["p_list"])
    if "t_list" in data:
        data["t_list"] = tuple(int(t) for t in data["t_list"])
    config = ExperimentConfig(**data)
    config.validate()
    return config


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args)
        if args.command == "verify":
            return cmd_verify(config)
        sink = CsvSink(config, args.command)
        if args.command == "sweep":
            run_sweep(config, sink)
        elif args.command == "weak11":
            run_weak11(config, sink)
        elif args.command == "domination":
            run_domination(config, sink)
        sink.write()
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
