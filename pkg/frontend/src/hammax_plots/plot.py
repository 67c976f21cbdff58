"""Turn hammax CSV output into per-(p, m, quantity) figures.

The CSV contract is the one emitted by the hammax command-line driver: an
optional leading comment line, then the header
``m,d,n,p,family,quantity,value,gap,seed,build_id,config_hash`` and one row
per measured quantity.  Each (p, m, quantity) group becomes one figure of
value vs d with the solver gap as error bars, named after the group and the
config hash so a plot can always be traced back to the run that produced
it.  Output is deterministic: fixed style, no timestamps embedded.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

REQUIRED_COLUMNS = [
    "m", "d", "n", "p", "family", "quantity", "value", "gap", "seed",
    "build_id", "config_hash",
]

# sorted-filename style keeps reruns byte-identical
matplotlib.rcParams["svg.hashsalt"] = "hammax-plots"


class SchemaError(ValueError):
    pass


@dataclass
class SweepTable:
    """Parsed CSV rows keyed by the fixed schema."""

    rows: list[dict]

    @classmethod
    def read(cls, csv_path: str | Path) -> "SweepTable":
        path = Path(csv_path)
        try:
            lines = [
                ln for ln in path.read_text().splitlines() if not ln.startswith("#")
            ]
        except OSError as exc:
            raise SchemaError(f"cannot read {path}: {exc}") from exc
        reader = csv.DictReader(lines)
        missing = set(REQUIRED_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise SchemaError(f"missing columns: {sorted(missing)}")
        rows = []
        for raw in reader:
            row = dict(raw)
            for key in ("m", "d", "n"):
                row[key] = int(row[key])
            row["p"] = float(row["p"])
            row["value"] = float(row["value"])
            if not math.isfinite(row["value"]):
                raise SchemaError(f"non-finite value in row {raw}")
            row["gap"] = float(row["gap"]) if row["gap"] else 0.0
            rows.append(row)
        if not rows:
            raise SchemaError(f"{path} holds no data rows")
        return cls(rows=rows)

    def groups(self) -> dict[tuple, list[dict]]:
        """Rows bucketed by (p, m, quantity), each sorted by d."""
        out: dict[tuple, list[dict]] = {}
        for row in self.rows:
            out.setdefault((row["p"], row["m"], row["quantity"]), []).append(row)
        for rows in out.values():
            rows.sort(key=lambda r: r["d"])
        return out


def _fmt_p(p: float) -> str:
    return "inf" if math.isinf(p) else format(p, "g").replace(".", "_")


def plot_constants(csv_path: str | Path, out_dir: str | Path, fmt: str = "png") -> list[Path]:
    """One figure per (p, m, quantity); returns the written paths."""
    if fmt not in ("png", "svg"):
        raise SchemaError(f"unsupported format {fmt!r}")
    table = SweepTable.read(csv_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for (p, m, quantity), rows in sorted(table.groups().items(), key=str):
        chash = rows[0]["config_hash"]
        ds = [r["d"] for r in rows]
        vals = [r["value"] for r in rows]
        gaps = [r["gap"] * r["value"] for r in rows]
        fig, ax = plt.subplots(figsize=(5.0, 3.4), dpi=120)
        ax.errorbar(ds, vals, yerr=gaps, marker="o", capsize=3, lw=1.2)
        ax.set_xlabel("d")
        ax.set_ylabel(quantity)
        ax.set_title(f"{quantity}  (p={format(p, 'g')}, m={m})")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        name = f"{quantity}_p{_fmt_p(p)}_m{m}_{chash}.{fmt}"
        target = out / name
        metadata = {"Date": None} if fmt == "svg" else {}
        fig.savefig(target, metadata=metadata)
        plt.close(fig)
        written.append(target)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hammax-plots", description="Render figures from a hammax sweep CSV"
    )
    parser.add_argument("csv_path")
    parser.add_argument("out_dir")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    args = parser.parse_args(argv)
    try:
        written = plot_constants(args.csv_path, args.out_dir, fmt=args.format)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
