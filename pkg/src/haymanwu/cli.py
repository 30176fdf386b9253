"""Command-line entry point: ``haymanwu <scenario> [--config ...] [--seed ...] [--out ...]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import SCENARIOS, ConfigError, load_config
from .experiments import RUNNERS
from .wos import BACKEND

SCHEMA_VERSION = "1.0"
CSV_COLUMNS = ("scenario", "id", "measured", "bound", "margin", "runtime_ms")

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

log = logging.getLogger("haymanwu")


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="haymanwu", description="Sharp-constant experiments for preimage lengths of lines and circles.")
    ap.add_argument("scenario", choices=SCENARIOS + ("all",))
    ap.add_argument("--config", type=Path, help="TOML file overriding the defaults")
    ap.add_argument("--seed", type=_u64, help="64-bit seed (overrides the config)")
    ap.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    ap.add_argument("--instances", type=int, help="instance count for the randomised scenarios")
    ap.add_argument("--svg", action="store_true", help="also write SVG drawings")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _fmt(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def results_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in sorted(rows, key=lambda r: (r.scenario, r.id)):
        w.writerow([r.scenario, r.id, _fmt(r.measured), _fmt(r.bound), _fmt(r.margin), f"{r.runtime_ms:.3f}"])
    return buf.getvalue()


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


def exit_code(rows) -> int:
    """1 if any bound is violated, else 3 on any numeric failure, else 0."""
    status = {r.classify() for r in rows}
    if "violation" in status:
        return EXIT_VIOLATION
    if status & {"numeric_failure", "mismatch", "hypothesis_violation"}:
        return EXIT_NUMERIC
    return EXIT_OK


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config, seed=args.seed, instances=args.instances)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    cfg.write(out / "config.resolved.json")
    started = datetime.now(timezone.utc)
    names = SCENARIOS if args.scenario == "all" else (args.scenario,)
    results, rows = {}, []
    timings = {}
    for name in names:
        log.info("running %s", name)
        t0 = time.perf_counter()
        res = RUNNERS[name](cfg, svg=args.svg)
        timings[name] = time.perf_counter() - t0
        results[name] = res
        rows += res.rows
        for rel, text in sorted(res.artifacts.items()):
            path = out / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
    code = exit_code(rows)
    (out / "results.csv").write_text(results_csv(rows))
    report = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "seed": cfg.seed,
        "exit_code": code,
        "scenarios": {
            name: {
                "summary": res.summary,
                "min_margin": res.min_margin,
                "counts": {s: sum(r.classify() == s for r in res.rows) for s in sorted({r.classify() for r in res.rows})},
                "rows": [r.to_dict() | {"runtime_ms": None} for r in sorted(res.rows, key=lambda r: r.id)],
            }
            for name, res in results.items()
        },
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n")
    meta = {
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "scenario_seconds": timings,
        "argv": list(sys.argv if argv is None else argv),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wos_backend": BACKEND,
    }
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    for name, res in results.items():
        bad = [r for r in res.rows if r.classify() != "ok"]
        print(f"{name}: {len(res.rows)} rows, min margin {res.min_margin:.6g}, {len(bad)} not ok")
        for r in bad[:10]:
            print(f"  {r.id}: {r.classify()} measured={r.measured:.12g} bound={r.bound:.12g}")
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
