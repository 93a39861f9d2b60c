"""``soficlab`` command line: generate, analyze, compare, report.

Exit codes: 0 completed (measurement outcomes are data), 2 malformed input,
3 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .actions import finite_core, good_set
from .amenability import amenable_mass_estimate, folner_search, hyperfinite_partition
from .coarse import compare_families
from .errors import ConvergenceError, ResourceLimitError
from .groups import ball_elements
from .io import CONSTRUCTIONS, build_family, read_family, read_manifest, write_family
from .local_stats import ball_distribution, bs_defect, code_hash
from .spectral import cheeger_sweep, laplacian, spectral_gap

logger = logging.getLogger("soficlab")

EXIT_INPUT = 2
EXIT_RESOURCE = 3

TASKS = (
    "good_set",
    "finite_core",
    "bs_defect",
    "ball_distribution",
    "spectral_gap",
    "folner_search",
    "hyperfinite_partition",
    "amenable_mass_estimate",
)
_ALIASES = {"amenable_mass": "amenable_mass_estimate"}


def _num(x) -> str:
    if x is None:
        return ""
    return f"{float(x):.12g}"


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# generate


def _stage_size_estimate(construction: str, params: dict, group: str | None) -> int:
    sizes = params.get("sizes", [])
    if not sizes:
        return 0
    if construction in ("quotient", "folner"):
        d = int((group or "FreeAbelian:1").partition(":")[2] or 1)
        return max(sizes) ** d
    if construction == "mixed":
        return max(sizes) * int(params.get("b", 2))
    return max(sizes)


def cmd_generate(args) -> int:
    cfg = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
    construction = args.construction or cfg.get("construction")
    if construction is None:
        raise ValueError("--construction is required (or 'construction' in --config)")
    params = dict(cfg.get("params", {}))
    if args.sizes is not None:
        params["sizes"] = args.sizes
    for key in ("k", "a", "b", "girth_target"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    group = args.group or cfg.get("group")
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    if not params.get("sizes"):
        raise ValueError("--sizes is required")
    if args.cap_vertices is not None:
        est = _stage_size_estimate(construction, params, group)
        if est > args.cap_vertices:
            raise ResourceLimitError(f"largest stage would have {est} vertices, cap is {args.cap_vertices}",
                                     cap=args.cap_vertices)
    # an unmet girth target is logged as a warning by the generator; exit stays 0
    family = build_family(construction, params, seed, group)
    path = write_family(family, args.out_dir)
    print(path)
    return 0


# analyze


def _task_rows(task: str, family, args) -> tuple[list[str], list[list]]:
    graphs = family.graphs
    needs_action = task in ("good_set", "finite_core", "bs_defect")
    if needs_action and family.model is None:
        logger.warning("task %s needs a group model; family is graph-only, writing header only", task)
        graphs = []
    rows: list[list] = []
    if task == "good_set":
        header = ["stage", "n", "F_radius", "F_size", "good", "defect", "defect_exact"]
        F = ball_elements(family.model, args.f_radius) if graphs else []
        for i, st in enumerate(family.stages if graphs else []):
            rep = good_set(st, F)
            rows.append([i, st.n, args.f_radius, len(rep.F), rep.size, _num(rep.defect), str(rep.defect)])
    elif task == "finite_core":
        header = ["stage", "n", "F_radius", "F_size", "defect", "core_size", "core_bound"]
        F = ball_elements(family.model, args.f_radius) if graphs else []
        for i, st in enumerate(family.stages if graphs else []):
            rep = good_set(st, F)
            core = int(finite_core(st, F).sum())
            rows.append([i, st.n, args.f_radius, len(rep.F), _num(rep.defect), core,
                         st.n - len(rep.F) * (st.n - rep.size)])
    elif task == "bs_defect":
        header = ["stage", "n", "radius", "defect", "defect_exact"]
        for i, g in enumerate(graphs):
            d = bs_defect(g, args.radius, family.model, cap=args.cap_code)
            rows.append([i, g.n, args.radius, _num(d), str(d)])
    elif task == "ball_distribution":
        header = ["stage", "radius", "code_hash", "frequency"]
        for i, g in enumerate(graphs):
            dist = ball_distribution(g, args.radius, cap=args.cap_code)
            for code, freq in dist.ranked():
                rows.append([i, args.radius, code_hash(code), _num(freq)])
    elif task == "spectral_gap":
        header = ["stage", "n", "R", "lambda2", "h_hat", "d_max"]
        for i, g in enumerate(graphs):
            L = laplacian(g, args.R)
            k = L.components()[0]
            lam = spectral_gap(L, k) if g.n > k else None
            h = cheeger_sweep(L).h if k == 1 and g.n > 1 else None
            rows.append([i, g.n, args.R, _num(lam), _num(h), L.d_max])
    elif task == "folner_search":
        header = ["stage", "R", "eps", "witness_size", "ratio"]
        for i, g in enumerate(graphs):
            w = folner_search(g, args.R, args.eps, seed=args.seed)
            rows.append([i, args.R, _num(args.eps), w.size if w else 0, _num(w.ratio) if w else ""])
    elif task == "hyperfinite_partition":
        header = ["stage", "n", "K", "parts", "max_part", "cut", "cut_fraction"]
        for i, g in enumerate(graphs):
            p = hyperfinite_partition(g, args.K)
            rows.append([i, g.n, args.K, len(p.parts), max(len(x) for x in p.parts), p.cut, _num(p.cut / g.n)])
    elif task == "amenable_mass_estimate":
        header = ["stage", "r", "amenable_mass"]
        for i, g in enumerate(graphs):
            # only defined for degree <= 3; other stages get an empty cell
            try:
                mass = _num(amenable_mass_estimate([g], args.radius)[0])
            except ValueError as exc:
                logger.warning("amenable_mass_estimate skipped for stage %d: %s", i, exc)
                mass = ""
            rows.append([i, args.radius, mass])
    else:
        raise ValueError(f"unknown task {task!r}")
    return header, rows


def cmd_analyze(args) -> int:
    tasks = [_ALIASES.get(t.strip(), t.strip()) for t in args.tasks.split(",") if t.strip()]
    unknown = [t for t in tasks if t not in TASKS]
    if unknown:
        raise ValueError(f"unknown task(s) {unknown}; known: {', '.join(TASKS)}")
    family = read_family(args.manifest)
    if args.cap_vertices is not None and max(family.sizes) > args.cap_vertices:
        raise ResourceLimitError(f"stage with {max(family.sizes)} vertices exceeds cap {args.cap_vertices}",
                                 cap=args.cap_vertices)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for task in tasks:
        header, rows = _task_rows(task, family, args)
        _write_csv(out / f"{task}.csv", header, rows)
        print(out / f"{task}.csv")
    meta = {
        "manifest": str(Path(args.manifest).name),
        "construction": read_manifest(args.manifest).get("construction"),
        "tasks": tasks,
        "radius": args.radius,
        "R": args.R,
        "eps": args.eps,
        "K": args.K,
        "f_radius": args.f_radius,
    }
    (out / "analysis.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return 0


# compare


def _read_witnesses(wdir: Path, family) -> list[np.ndarray]:
    out = []
    for i, n in enumerate(family.sizes):
        path = wdir / f"stage_{i:03d}.map"
        try:
            arr = np.array([int(t) for t in path.read_text().split()], dtype=np.int64)
        except (OSError, ValueError) as exc:
            raise ValueError(f"corrupt witness file {path}: {exc}") from exc
        if arr.size != n:
            raise ValueError(f"corrupt witness file {path}: expected {n} entries, found {arr.size}")
        out.append(arr)
    return out


def cmd_compare(args) -> int:
    fx, fy = read_family(args.manifest_x), read_family(args.manifest_y)
    witnesses = None
    if args.witness_dir:
        if len(fx) != len(fy):
            raise ValueError(f"stage count mismatch: {len(fx)} vs {len(fy)}")
        witnesses = _read_witnesses(Path(args.witness_dir), fx)
        for i, (w, n) in enumerate(zip(witnesses, fy.sizes)):
            if (w < 0).any() or (w >= n).any():
                raise ValueError(f"corrupt witness file stage_{i:03d}.map: target index out of range")
    verdict = compare_families(fx, fy, witnesses, profile_radius=args.radius)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = verdict.to_text()
    (out / "verdict.txt").write_text(text + "\n")
    if verdict.per_stage:
        header = list(verdict.per_stage[0])
        rows = [[_num(v) if isinstance(v, float) else v for v in rec.values()] for rec in verdict.per_stage]
        _write_csv(out / "compare.csv", header, rows)
    print(text)
    return 0


# report


def cmd_report(args) -> int:
    src = Path(args.dir)
    files = sorted(src.glob("*.csv"))
    if not files:
        raise ValueError(f"no CSV files in {src}")
    lines = [f"# soficlab report v{__version__}"]
    meta = src / "analysis.json"
    if meta.exists():
        for k, v in sorted(json.loads(meta.read_text()).items()):
            lines.append(f"# {k}: {json.dumps(v, sort_keys=True)}")
    for f in files:
        lines.append(f"# file: {f.name}")
        lines.extend(f.read_text().splitlines())
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="soficlab", description="Finite sofic approximations and their coarse geometry.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build an approximation family and write manifest + stage files")
    g.add_argument("--construction", choices=CONSTRUCTIONS)
    g.add_argument("--config", help="JSON file with construction, group, params, seed")
    g.add_argument("--group", help="group model, e.g. FreeAbelian:2")
    g.add_argument("--sizes", type=_ints, help="comma-separated moduli / box sides / stage sizes")
    g.add_argument("--k", type=int, help="generator count for the random construction")
    g.add_argument("--a", type=int, help="cycle components per stage (mixed)")
    g.add_argument("--b", type=int, help="total components per stage (mixed)")
    g.add_argument("--girth-target", dest="girth_target", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--out-dir", required=True)
    g.add_argument("--cap-vertices", type=int)
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="run measurement tasks on a family, one CSV per task")
    a.add_argument("manifest")
    a.add_argument("--tasks", required=True, help=f"comma-separated; any of {', '.join(TASKS)}")
    a.add_argument("--radius", type=int, default=2, help="ball radius r")
    a.add_argument("--f-radius", type=int, default=None, help="F = B_r(e) radius for good_set/finite_core")
    a.add_argument("--R", type=int, default=1, help="entourage radius")
    a.add_argument("--eps", type=float, default=0.1)
    a.add_argument("--K", type=int, default=8, help="part size cap for hyperfinite_partition")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out-dir", required=True)
    a.add_argument("--cap-vertices", type=int)
    a.add_argument("--cap-code", type=int, default=512, help="vertex cap for canonical ball codes")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("compare", help="verify QI witnesses or compare invariant profiles")
    c.add_argument("manifest_x")
    c.add_argument("manifest_y")
    c.add_argument("--witness-dir")
    c.add_argument("--radius", type=int, default=4, help="ball-growth radius for profiles")
    c.add_argument("--out-dir", required=True)
    c.set_defaults(func=cmd_compare)

    r = sub.add_parser("report", help="concatenate CSVs with a metadata header")
    r.add_argument("dir")
    r.add_argument("--output")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "f_radius", 0) is None:
        args.f_radius = args.radius
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
