"""Family manifests (JSON) and stage files (plain text).

Stage files start with ``n <count>``.  Permutation stages then carry one
``perm <symbol> i_0 ... i_{n-1}`` line per generator; edge-list stages carry
``directed 0|1`` followed by ``u v s`` lines.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .actions import AlmostAction
from .generators import (
    ApproximationFamily,
    folner_approximation,
    mixed_family,
    quotient_approximation,
    random_permutation_family,
)
from .graph import LabeledGraph
from .groups import GroupModel, model_from_spec, parse_model

FORMAT_VERSION = 1
CONSTRUCTIONS = ("quotient", "folner", "random", "mixed")


def _jsonable(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_stage(stage, path: Path) -> None:
    lines = [f"n {stage.n}"]
    if isinstance(stage, AlmostAction):
        for s in stage.model.symbols:
            lines.append(f"perm {s} " + " ".join(map(str, stage.perms[s].tolist())))
    else:
        lines.append(f"directed {int(stage.directed)}")
        lines.extend(f"{u} {v} {s}" for u, v, s in stage.edges())
    Path(path).write_text("\n".join(lines) + "\n")


def read_stage(path: Path, model: GroupModel | None, labels=None):
    path = Path(path)
    try:
        lines = [ln.split() for ln in path.read_text().splitlines() if ln.strip()]
        if not lines or lines[0][0] != "n":
            raise ValueError("missing 'n <count>' header")
        n = int(lines[0][1])
        if len(lines) > 1 and lines[1][0] == "perm":
            if model is None:
                raise ValueError("permutation stage needs a group model")
            perms = {}
            for row in lines[1:]:
                if row[0] != "perm":
                    raise ValueError(f"unexpected line {' '.join(row)!r}")
                perms[row[1]] = [int(x) for x in row[2:]]
                if len(perms[row[1]]) != n:
                    raise ValueError(f"permutation for {row[1]} has wrong length")
            return AlmostAction(model, perms)
        if len(lines) < 2 or lines[1][0] != "directed":
            raise ValueError("missing 'directed' line in edge-list stage")
        directed = bool(int(lines[1][1]))
        edges = [(int(u), int(v), s) for u, v, s in lines[2:]]
        return LabeledGraph(n, edges, labels=labels, directed=directed)
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: {exc}") from exc


def write_family(family: ApproximationFamily, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ext = "edges" if family.graph_only else "perm"
    stages = []
    for i, (st, meta) in enumerate(zip(family.stages, family.meta)):
        name = f"stage_{i:03d}.{ext}"
        write_stage(st, out / name)
        stages.append({"index": i, "size": st.n, "file": name, "meta": _jsonable(meta)})
    labels = list(family.stages[0].labels) if family.graph_only and family.stages else None
    manifest = {
        "format_version": FORMAT_VERSION,
        "group": family.model.spec() if family.model is not None else None,
        "construction": _jsonable(family.construction),
        "labels": labels,
        "stages": stages,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(path) -> dict:
    path = Path(path)
    try:
        manifest = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: cannot read manifest ({exc})") from exc
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {manifest.get('format_version')!r}")
    sizes = [s["size"] for s in manifest.get("stages", [])]
    if manifest.get("construction", {}).get("kind") != "random" and any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"{path}: stage sizes must be strictly increasing")
    return manifest


def read_family(path) -> ApproximationFamily:
    path = Path(path)
    manifest = read_manifest(path)
    model = model_from_spec(manifest["group"]) if manifest.get("group") else None
    stages, meta = [], []
    for entry in manifest["stages"]:
        st = read_stage(path.parent / entry["file"], model, manifest.get("labels"))
        if st.n != entry["size"]:
            raise ValueError(f"{entry['file']}: size {st.n} disagrees with manifest ({entry['size']})")
        stages.append(st)
        meta.append(dict(entry.get("meta", {})))
    return ApproximationFamily(model, stages, meta, manifest.get("construction", {}))


def build_family(construction: str, params: dict, seed: int = 0, group: str | dict | None = None) -> ApproximationFamily:
    """Dispatch a construction spec to the generators."""
    if construction not in CONSTRUCTIONS:
        raise ValueError(f"unknown construction {construction!r}; choose from {CONSTRUCTIONS}")
    sizes = list(params.get("sizes", []))
    if construction in ("quotient", "folner"):
        model = model_from_spec(group) if isinstance(group, dict) else parse_model(group or "FreeAbelian:1")
        if construction == "quotient":
            fam = quotient_approximation(model, params.get("moduli", sizes))
        else:
            fam = folner_approximation(model, params.get("box_sizes", sizes))
        fam.construction["seed"] = seed
        return fam
    if construction == "random":
        return random_permutation_family(int(params.get("k", 2)), sizes, seed=seed)
    return mixed_family(
        int(params.get("a", 1)),
        int(params.get("b", 2)),
        sizes,
        girth_target=int(params.get("girth_target", 8)),
        seed=seed,
    )


def regenerate(manifest_path) -> ApproximationFamily:
    manifest = read_manifest(manifest_path)
    c = manifest["construction"]
    return build_family(c["kind"], c.get("params", {}), c.get("seed", 0), manifest.get("group"))
