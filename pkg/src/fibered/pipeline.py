"""End-to-end fiberwise reduction of one dataset."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import assembly, bundle, cover, local_models, obstructions
from .data_model import Dataset, PipelineConfig, seeded_rng


class PipelineError(RuntimeError):
    """A subroutine failed; the message starts with the subroutine name."""


@dataclass
class FiberedResult:
    embedding: assembly.Embedding
    config: PipelineConfig
    cover: cover.Cover
    partition: cover.PartitionOfUnity
    nerve: cover.Nerve
    charts: list
    tau: float
    target_dim: int
    omega: bundle.DiscreteCocycle
    theta: bundle.DiscreteCocycle
    alignment: bundle.AlignmentResult
    normal_frames: list
    obstruction: Optional[obstructions.ObstructionReport] = None
    sync: Optional[bundle.SyncSigns] = None
    holonomy: Optional[int] = None
    fiber_scales: Optional[np.ndarray] = None
    runtime_ms: float = 0.0
    stage_ms: dict = field(default_factory=dict)

    @property
    def w1_trivial(self) -> Optional[bool]:
        return None if self.obstruction is None else self.obstruction.w1_trivial

    def diagnostics(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "config_digest": self.config.digest(),
            "tau": self.tau,
            "target_dim": self.target_dim,
            "w1_trivial": self.w1_trivial,
            "objective_trace": [[int(n), float(v)] for n, v in self.alignment.objective_trace],
            "final_objective": self.alignment.final_objective,
            "initial_objective": self.alignment.initial_objective,
            "runtime_ms": self.runtime_ms,
            "stage_ms": self.stage_ms,
            "cover_radius": self.cover.cover_radius,
            "nerve_edges": len(self.nerve.edges),
            "nerve_total_weight": self.nerve.total_weight,
            "fiber_normalization": [float(s) for s in np.unique(self.fiber_scales)],
            "kernel_warnings": int(sum(c.kernel_warning for c in self.charts)),
            "procrustes_degenerate": self.omega.n_degenerate,
            "holonomy": self.holonomy,
            "sign_sync": None if self.sync is None else [int(x) for x in self.sync.vertex_signs],
            "degenerate_resamples": self.alignment.degenerate_resamples,
            "obstruction": None if self.obstruction is None else self.obstruction.to_json(),
        }


class _Stage:
    def __init__(self, name: str, timings: dict):
        self.name, self.timings = name, timings

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.name] = 1000.0 * (time.perf_counter() - self.t0)
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(f"{self.name}: {exc}") from exc
        return False


def run_fibered(data: Dataset, config: PipelineConfig) -> FiberedResult:
    t0 = time.perf_counter()
    timings = {}
    r = config.fiber_rank
    e = config.e
    base = data.base_image
    with _Stage("EstNormFiberCoordinates", timings):
        if r <= 0:
            raise local_models.ChartError("fiber rank zero")
    with _Stage("CoverAndPartitionUnity", timings):
        cov = cover.build_cover(base, config.k, config.cover_start)
        pou = cover.partition_of_unity(cov, base)
    with _Stage("Nerve", timings):
        nerve = cover.build_nerve(cov)
    with _Stage("LocalLinearRepresentation", timings):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            charts = local_models.build_charts(data.distances, base, cov, e, config.d, r)
        charts, scales = local_models.normalize_fibers(charts, config.normalization_mode)
    with _Stage("EstReach", timings):
        if config.reach is not None:
            tau = float(config.reach)
        else:
            tau = bundle.estimate_reach(cov.center_points, [c.tangent_frame for c in charts])
    with _Stage("EstCocycles", timings):
        omega = bundle.data_cocycle(charts, nerve)
    report = None
    holo = None
    with _Stage("Obstruction", timings):
        if e == 1 and not config.cut_unfold:
            report = obstructions.obstruction_report(nerve, omega, data.n_points)
            if base.shape[1] >= 2:
                cyc = obstructions.circle_cycle(cov.center_points)
                if all(nerve.weight(a, b) > 0 for a, b in zip(cyc, cyc[1:] + cyc[:1])):
                    holo = obstructions.holonomy(omega, cyc)
        if config.D is not None:
            D = config.D
        elif config.cut_unfold:
            D = bundle.choose_target_dimension(r, e, True, cut_unfold=True)
        else:
            if report is None:
                raise bundle.BundleError("automatic D selection needs e = 1; set D manually")
            D = bundle.choose_target_dimension(r, e, report.w1_trivial)
        if D - e < r:
            raise bundle.BundleError(f"target dimension {D} leaves no room for rank-{r} fibers")
    with _Stage("EstTangAndNormBun", timings):
        padded = [local_models.pad_normal_frame(c.tangent_frame, c.normal_frame, D)
                  for c in charts]
        normals = [a for _, a in padded]
        theta = bundle.normal_cocycle(normals, nerve)
    sync = None
    square = (D == r + e)
    with _Stage("AlignFibers", timings):
        rng = seeded_rng(config.seed, "align_fibers")
        if square:
            sync, theta_s = bundle.synchronize_signs(nerve, omega, theta)
            res = bundle.align_fibers(nerve, omega, theta_s, r, D, e, config.n_iter, rng,
                                      special=True)
            res.frames = bundle.unsync_frames(res.frames, sync)
        else:
            res = bundle.align_fibers(nerve, omega, theta, r, D, e, config.n_iter, rng)
    with _Stage("Assemble", timings):
        prov = {"config_digest": config.digest(), "tau": tau,
                "fiber_scale": config.fiber_scale, "D": D}
        emb = assembly.assemble(charts, pou, res.frames, normals, base, tau,
                                config.fiber_scale, prov)
    out = FiberedResult(
        embedding=emb, config=config, cover=cov, partition=pou, nerve=nerve, charts=charts,
        tau=tau, target_dim=D, omega=omega, theta=theta, alignment=res,
        normal_frames=normals, obstruction=report, sync=sync, holonomy=holo,
        fiber_scales=scales, stage_ms=timings)
    out.runtime_ms = 1000.0 * (time.perf_counter() - t0)
    return out


def cut_unfold_dataset(data: Dataset, cut_point: float, band: float = 0.02):
    """Replace a planar circular base map by its cut interval coordinate."""
    turns = assembly.circle_to_turns(data.base_image)
    interval, mask = assembly.cut_unfold(turns, cut_point, band)
    return data.with_base(interval), mask
