"""Command-line interface: fibered, generate, ph, obstruction, diagnose, cut-unfold, sweep."""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import datasets, diagnostics, topology
from .assembly import circle_to_turns
from .bundle import DiscreteCocycle
from .cover import Cover, Nerve
from .data_model import (ConfigError, DatasetError, PipelineConfig, euclidean_distances,
                         load_dataset, read_matrix_csv, seeded_rng, write_json,
                         write_matrix_csv)
from .obstructions import obstruction_report
from .pipeline import PipelineError, cut_unfold_dataset, run_fibered

CONFIG_FLAGS = {
    "seed": "seed", "k": "k", "e": "e", "d": "d", "r": "r", "dim": "D",
    "fiber_scale": "fiber_scale", "n_iter": "n_iter", "normalization": "normalization_mode",
    "reach": "reach", "cover_start": "cover_start",
}


class Artifacts:
    """Tracks files written by one command so a failure can remove them."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.written = []

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.written.append(p)
        return p

    def cleanup(self):
        for p in self.written:
            if p.exists():
                p.unlink()

    def names(self) -> list:
        return [p.name for p in self.written]


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(art: Artifacts, argv: list, config, inputs: dict, t0: float, seed):
    path = art.path("manifest.json")
    write_json(path, {
        "command": ["fibered"] + list(argv),
        "config_digest": None if config is None else config.digest(),
        "inputs": {k: {"path": str(v), "sha256": file_digest(v)} for k, v in inputs.items() if v},
        "outputs": [n for n in art.names() if n != "manifest.json"],
        "wall_clock_s": time.time() - t0,
        "seed": seed,
    })


def parse_magnitude(text: str, eps: float) -> float:
    """'0.3' is absolute; '2eps' is twice the median pairwise distance."""
    text = str(text).strip()
    if text.endswith("eps"):
        factor = text[:-3].strip()
        return (float(factor) if factor else 1.0) * eps
    return float(text)


# ---------------------------------------------------------------- parsers


def _add_dataset_flags(p, base_required=True):
    p.add_argument("--points", help="points CSV, one point per row")
    p.add_argument("--distances", help="distance matrix CSV")
    p.add_argument("--base", required=base_required, help="base-map CSV, n rows x D columns")


def _add_config_flags(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--seed", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--e", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--dim", type=int, help="manual target dimension D")
    p.add_argument("--fiber-scale", type=float)
    p.add_argument("--n-iter", type=int)
    p.add_argument("--normalization", choices=["global", "per-chart"])
    p.add_argument("--reach", type=float, help="override the estimated reach")
    p.add_argument("--cover-start", type=int)
    p.add_argument("--noise", help="distance noise magnitude (absolute, or e.g. 2eps)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fibered", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fibered", help="run the full reduction")
    _add_dataset_flags(p)
    _add_config_flags(p)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("cut-unfold", help="cut a circular base and reduce with D = r + 1")
    _add_dataset_flags(p)
    _add_config_flags(p)
    p.add_argument("--cut", type=float, default=0.0, help="cut point in turns, [0, 1)")
    p.add_argument("--band", type=float, default=0.02, help="gluing band width in turns")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset")
    p.add_argument("name", choices=sorted(datasets.GENERATORS))
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("ph", help="Vietoris-Rips persistence diagram")
    p.add_argument("--points")
    p.add_argument("--distances")
    p.add_argument("--field", type=int, choices=[2, 3], default=2)
    p.add_argument("--maxdim", type=int, default=2)
    p.add_argument("--knn", type=int, default=15, help="0 uses the input metric directly")
    p.add_argument("--landmarks", type=int, default=400)
    p.add_argument("--threshold", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("obstruction", help="first Stiefel-Whitney class of a cocycle dump")
    p.add_argument("--cocycle", required=True)
    p.add_argument("--nerve", required=True)
    p.add_argument("--epsilon", type=float, default=2.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("diagnose", help="kappa and per-chart distortion of an embedding")
    p.add_argument("--points")
    p.add_argument("--distances")
    p.add_argument("--embedding", required=True)
    p.add_argument("--cover")
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="grid over k or noise magnitude")
    _add_dataset_flags(p)
    _add_config_flags(p)
    p.add_argument("--axis", choices=["k", "noise"], required=True)
    p.add_argument("--values", nargs="+", required=True)
    p.add_argument("--knn", type=int, default=15)
    p.add_argument("--landmarks", type=int, default=200)
    p.add_argument("--out-dir", required=True)
    return ap


def config_from_args(args, **extra) -> PipelineConfig:
    data = _read_json(args.config) if getattr(args, "config", None) else {}
    for flag, key in CONFIG_FLAGS.items():
        val = getattr(args, flag, None)
        if val is not None:
            data[key] = val.replace("-", "_") if key == "normalization_mode" else val
    data.update(extra)
    return PipelineConfig.from_dict(data)


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _load(args):
    if not args.points and not args.distances:
        raise DatasetError("need --points or --distances")
    return load_dataset(args.points, args.distances, args.base)


def _apply_noise(data, text, seed):
    if not text:
        return data, 0.0
    eps = diagnostics.median_distance(data.distances)
    mag = parse_magnitude(text, eps)
    noisy = diagnostics.inject_distance_noise(data.distances, mag, seeded_rng(seed, "noise"))
    return data.with_distances(noisy), mag


# ---------------------------------------------------------------- commands


def _write_run(art: Artifacts, result, mask=None, extra=None):
    coords = result.embedding.coords
    header = [f"x{i}" for i in range(coords.shape[1])]
    if mask is not None:
        coords = np.column_stack([coords, mask.astype(float)])
        header.append("glue")
    write_matrix_csv(art.path("embedding.csv"), coords, header)
    write_json(art.path("embedding.json"), result.embedding.provenance)
    diag = result.diagnostics()
    diag.update(extra or {})
    write_json(art.path("diagnostics.json"), diag)
    cov = result.cover.to_json()
    write_json(art.path("cover.json"), cov)
    nerve = result.nerve.to_json()
    nerve["n_points"] = result.partition.weights.shape[0]
    write_json(art.path("nerve.json"), nerve)
    write_json(art.path("cocycle.json"), result.omega.to_json())


def cmd_fibered(args, argv) -> int:
    t0 = time.time()
    config = config_from_args(args)
    data = _load(args)
    data, mag = _apply_noise(data, args.noise, config.seed)
    art = Artifacts(args.out_dir)
    try:
        result = run_fibered(data, config)
        _write_run(art, result, extra={"noise_magnitude": mag})
        write_manifest(art, argv, config,
                       {"points": args.points, "distances": args.distances, "base": args.base},
                       t0, config.seed)
    except BaseException:
        art.cleanup()
        raise
    print(f"D = {result.target_dim}, w1 trivial = {result.w1_trivial}, "
          f"tau = {result.tau:.4g}, final objective = {result.alignment.final_objective:.4g}")
    return 0


def cmd_cut_unfold(args, argv) -> int:
    t0 = time.time()
    data = _load(args)
    # reach of the cut interval is undefined; default to the radius of the cut circle
    extra = {"cut_unfold": True}
    if args.reach is None and not (args.config and "reach" in _read_json(args.config)):
        extra["reach"] = 1.0 / (2 * np.pi)
    config = config_from_args(args, **extra)
    data, mag = _apply_noise(data, args.noise, config.seed)
    cut, mask = cut_unfold_dataset(data, args.cut, args.band)
    art = Artifacts(args.out_dir)
    try:
        result = run_fibered(cut, config)
        _write_run(art, result, mask=mask,
                   extra={"cut_point": args.cut, "band": args.band, "noise_magnitude": mag})
        write_manifest(art, argv, config,
                       {"points": args.points, "distances": args.distances, "base": args.base},
                       t0, config.seed)
    except BaseException:
        art.cleanup()
        raise
    print(f"D = {result.target_dim}, {int(mask.sum())} points flagged near the cut")
    return 0


def cmd_generate(args, argv) -> int:
    spec = datasets.GeneratorSpec(args.name, args.n, args.seed)
    data = spec.build()
    art = Artifacts(args.out_dir)
    try:
        write_matrix_csv(art.path("points.csv"), data.points)
        write_matrix_csv(art.path("base.csv"), data.base_image)
        write_json(art.path("metadata.json"), {
            "generator": args.name, "n": args.n, "seed": args.seed,
            "ambient_dim": data.points.shape[1],
            "suggested_d": datasets.DEFAULT_LOCAL_DIM[args.name],
            "base_turns": circle_to_turns(data.base_image).tolist(),
        })
    except BaseException:
        art.cleanup()
        raise
    print(f"wrote {args.n} {args.name} points to {args.out_dir}")
    return 0


def _metric(args) -> np.ndarray:
    if args.distances:
        return read_matrix_csv(args.distances, "distances")
    if args.points:
        return euclidean_distances(read_matrix_csv(args.points, "points"))
    raise DatasetError("need --points or --distances")


def cmd_ph(args, argv) -> int:
    d = _metric(args)
    if args.knn > 0:
        pd, _, idx = topology.geodesic_pd(d, args.field, args.knn, args.landmarks,
                                          args.maxdim, args.seed, args.threshold)
    else:
        idx = topology.landmark_subsample(d, min(args.landmarks, d.shape[0]),
                                          seeded_rng(args.seed, "landmarks"))
        pd = topology.vietoris_rips_pd(d[np.ix_(idx, idx)], args.maxdim, args.field,
                                       args.threshold)
    write_json(args.out, pd.to_json())
    counts = {q: len(pd.in_dim(q)) for q in range(args.maxdim + 1)}
    print(f"{len(idx)} landmarks, classes per dimension: {counts}")
    return 0


def cmd_obstruction(args, argv) -> int:
    with open(args.nerve) as fh:
        nj = json.load(fh)
    with open(args.cocycle) as fh:
        omega = DiscreteCocycle.from_json(json.load(fh))
    if "n_points" not in nj:
        raise DatasetError("nerve JSON lacks n_points")
    report = obstruction_report(Nerve.from_json(nj), omega, int(nj["n_points"]), args.epsilon)
    write_json(args.out, report.to_json())
    print(f"death = {report.death:.4g}, w1 trivial = {report.w1_trivial}")
    return 0


def cmd_diagnose(args, argv) -> int:
    d_x = _metric(args)
    emb = read_matrix_csv(args.embedding, "embedding")
    with open(args.embedding) as fh:
        first = fh.readline().strip().split(",")
    if first and first[-1] == "glue":
        emb = emb[:, :-1]
    d_y = euclidean_distances(emb)
    if args.cover:
        with open(args.cover) as fh:
            membership = Cover.from_json(json.load(fh)).membership
    else:
        membership = []
    report = diagnostics.diagnose(d_x, d_y, membership)
    write_json(args.out, report.to_json())
    print(f"kappa min = {report.kappa.min():.4g}, averages = {report.averages()}")
    return 0


def cmd_sweep(args, argv) -> int:
    t0 = time.time()
    base_config = config_from_args(args)
    data = _load(args)
    eps = diagnostics.median_distance(data.distances)
    root = Path(args.out_dir)
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    for value in args.values:
        cell = root / f"{args.axis}_{value}"
        art = Artifacts(cell)
        row = {"value": value}
        try:
            if args.axis == "k":
                config = dataclasses.replace(base_config, k=int(value))
                cell_data = data
            else:
                config = base_config
                mag = parse_magnitude(value, eps)
                cell_data = data.with_distances(diagnostics.inject_distance_noise(
                    data.distances, mag, seeded_rng(config.seed, "noise")))
                row["magnitude"] = mag
            result = run_fibered(cell_data, config)
            d_y = euclidean_distances(result.embedding.coords)
            # distortion against the clean metric: noisy pairs clamped at 0 would dominate
            rep = diagnostics.diagnose(data.distances, d_y, result.cover.membership)
            _, score, _ = topology.geodesic_pd(d_y, 2, args.knn, args.landmarks, 1, config.seed)
            avg = rep.averages()
            row.update({
                "final_objective": result.alignment.final_objective,
                "w1_trivial": result.w1_trivial,
                "target_dim": result.target_dim,
                "dim1_gap": score.gap_after(1, 1),
                "avg_worst_case": avg["worst_case"],
                "avg_sigma": avg["sigma"],
                "status": "ok",
            })
            _write_run(art, result, extra={"cell": row})
            write_manifest(art, argv + ["--cell", str(value)], config,
                           {"points": args.points, "distances": args.distances,
                            "base": args.base}, t0, config.seed)
        except Exception as exc:           # a failed cell is recorded, the sweep goes on
            art.cleanup()
            row["status"] = f"failed: {exc}"
        rows.append(row)
        print(f"{args.axis} = {value}: {row['status']}")
    cols = ["value", "magnitude", "final_objective", "w1_trivial", "target_dim", "dim1_gap",
            "avg_worst_case", "avg_sigma", "status"]
    with open(root / "summary.csv", "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(row.get(c, "")) for c in cols) + "\n")
    return 0 if all(r["status"] == "ok" for r in rows) else 1


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    s = str(v)
    return '"' + s.replace('"', "'") + '"' if "," in s else s


COMMANDS = {
    "fibered": cmd_fibered, "cut-unfold": cmd_cut_unfold, "generate": cmd_generate,
    "ph": cmd_ph, "obstruction": cmd_obstruction, "diagnose": cmd_diagnose,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, argv)
    except (DatasetError, ConfigError, PipelineError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
