"""Figure rendering: spacetime strips, nearest-type maps, log-log fits,
and E V vs density curves.

Layout is fixed and randomness-free, so re-rendering the same inputs
produces identical images.  Cars are blue, spots red/orange, ties grey.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from parkfig.io import (
    SchemaError,
    read_series,
    read_snapshot,
    read_summary,
    read_sweep,
)

JOB_KINDS = ("spacetime_1d", "nearest_type_map", "loglog_fit", "ev_vs_p")

CAR_BLUE = "#1f77b4"
SPOT_RED = "#d62728"
DARK_BLUE = (8 / 255, 81 / 255, 156 / 255)
DARK_ORANGE = (166 / 255, 54 / 255, 3 / 255)
LIGHT_BLUE = (158 / 255, 202 / 255, 225 / 255)
LIGHT_ORANGE = (253 / 255, 174 / 255, 107 / 255)
GREY = (0.74, 0.74, 0.74)
WHITE = (1.0, 1.0, 1.0)


class RenderError(ValueError):
    """A job cannot be rendered (bad inputs, nothing to plot, missing fit)."""


@dataclass(frozen=True)
class PlotJob:
    kind: str
    inputs: dict | list
    output: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in JOB_KINDS:
            raise RenderError(f"unknown job kind {self.kind!r}; choose from {JOB_KINDS}")


@dataclass(frozen=True)
class RenderResult:
    output: str
    meta: dict


def _fig(width_px: int, height_px: int):
    dpi = 100
    return plt.figure(figsize=(width_px / dpi, height_px / dpi), dpi=dpi)


def _save(fig, output: str) -> None:
    Path(output).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output)
    plt.close(fig)


def _as_list(inputs) -> list:
    if isinstance(inputs, list):
        return inputs
    raise RenderError(f"this job kind needs a list of input files, got {type(inputs).__name__}")


def _as_dict(inputs, keys: tuple[str, ...]) -> dict:
    if not isinstance(inputs, dict):
        raise RenderError(f"this job kind needs an inputs object with keys {keys}")
    missing = set(keys) - set(inputs)
    if missing:
        raise RenderError(f"inputs missing {sorted(missing)}")
    return inputs


# ---------------------------------------------------------------------------
# spacetime strip (1D snapshots stacked bottom-to-top)


def _render_spacetime_1d(job: PlotJob) -> RenderResult:
    paths = _as_list(job.inputs)
    if not paths:
        raise RenderError("spacetime_1d needs at least one snapshot file")
    snaps = [read_snapshot(p) for p in paths]
    n = None
    rows = []
    for p, snap in zip(paths, snaps):
        if snap.ndim != 1:
            raise RenderError(f"{p}: spacetime_1d needs 1D snapshots, got {snap.ndim}D")
        if n is None:
            n = len(snap.coords)
        elif len(snap.coords) != n:
            raise RenderError(f"{p}: snapshot size changed mid-stack")
        row = np.tile(np.array(WHITE), (n, 1))
        order = np.argsort(snap.coords[:, 0])
        vacant = (snap.spot_status[order] == "vacant")
        cars = snap.unparked_count[order] > 0
        row[vacant] = matplotlib.colors.to_rgb(SPOT_RED)
        row[cars] = matplotlib.colors.to_rgb(CAR_BLUE)
        rows.append(row)
    img = np.stack(rows)  # time runs upward with origin="lower"
    width = int(job.options.get("width_px", 1200))
    height = max(240, int(width * img.shape[0] / max(img.shape[1], 1) * 0.75))
    fig = _fig(width, min(height, 1600))
    ax = fig.add_subplot(111)
    ax.imshow(img, origin="lower", aspect="auto", interpolation="nearest")
    ax.set_xlabel("site")
    ax.set_ylabel("time (bottom to top)")
    _save(fig, job.output)
    return RenderResult(job.output, {"times": len(rows), "sites": n})


# ---------------------------------------------------------------------------
# nearest-type maps (2D panels)


_LABEL_BASE = {
    "closer_to_car": LIGHT_BLUE,
    "closer_to_spot": LIGHT_ORANGE,
    "tie": GREY,
}


def _render_nearest_map(job: PlotJob) -> RenderResult:
    paths = _as_list(job.inputs)
    if not paths:
        raise RenderError("nearest_type_map needs at least one snapshot file")
    snaps = [read_snapshot(p) for p in paths]
    for p, snap in zip(paths, snaps):
        if snap.ndim != 2:
            raise RenderError(f"{p}: nearest_type_map needs 2D snapshots, got {snap.ndim}D")
    width = int(job.options.get("width_px", 1200))
    panel = width // len(snaps)
    fig = _fig(width, panel)
    for k, snap in enumerate(snaps):
        lx, ly = snap.side(0), snap.side(1)
        img = np.tile(np.array(WHITE), (ly, lx, 1))
        x, y = snap.coords[:, 0], snap.coords[:, 1]
        for label, color in _LABEL_BASE.items():
            mask = snap.nearest_label == label
            img[y[mask], x[mask]] = color
        nonempty = snap.nearest_label == "non_empty"
        car_site = nonempty & (snap.unparked_count > 0)
        spot_site = nonempty & ~car_site
        img[y[car_site], x[car_site]] = DARK_BLUE
        img[y[spot_site], x[spot_site]] = DARK_ORANGE
        ax = fig.add_subplot(1, len(snaps), k + 1)
        ax.imshow(img, origin="lower", interpolation="nearest")
        ax.set_xticks([])
        ax.set_yticks([])
    _save(fig, job.output)
    return RenderResult(job.output, {"panels": len(snaps)})


# ---------------------------------------------------------------------------
# log-log series with the summary's regression line


def _render_loglog_fit(job: PlotJob) -> RenderResult:
    inputs = _as_dict(job.inputs, ("series", "summary"))
    series = read_series(inputs["series"])
    summary = read_summary(inputs["summary"])
    keep = (series.t >= 1) & (series.vbar > 0)
    if not keep.any():
        raise RenderError(
            f"{inputs['series']}: no rows with t >= 1 and vbar > 0; "
            "a log-log plot of an all-zero series is meaningless"
        )
    fit = summary.get("fit")
    if not fit:
        raise RenderError(f"{inputs['summary']}: summary has no fit block")
    t = series.t[keep].astype(float)
    v = series.vbar[keep]
    width = int(job.options.get("width_px", 1200))
    fig = _fig(width, int(width * 0.66))
    ax = fig.add_subplot(111)
    ax.loglog(t, v, color=SPOT_RED, lw=1.2, label="spatial mean visits")
    lo, hi = fit["window"]
    tw = np.linspace(max(lo, t.min()), min(hi, t.max()), 64)
    line = np.exp(fit["intercept"]) * tw ** fit["slope"]
    ax.loglog(tw, line, color=CAR_BLUE, lw=2.0,
              label=f"fit slope {fit['slope']:.4f} on [{lo}, {hi}]")
    ax.set_xlabel("t")
    ax.set_ylabel("mean visits per site")
    ax.legend()
    _save(fig, job.output)
    return RenderResult(job.output, {
        "slope": fit["slope"], "intercept": fit["intercept"],
        "n_points": int(keep.sum()),
        "fit_first": float(line[0]), "fit_last": float(line[-1]),
    })


# ---------------------------------------------------------------------------
# E V at absorption vs density


def _render_ev_vs_p(job: PlotJob) -> RenderResult:
    inputs = _as_dict(job.inputs, ("sweep",))
    sweep = read_sweep(inputs["sweep"])
    width = int(job.options.get("width_px", 1200))
    fig = _fig(width, int(width * 0.66))
    ax = fig.add_subplot(111)
    if len(sweep.replica_p):
        ax.plot(sweep.replica_p, sweep.replica_vbar, ".", color=GREY, ms=4,
                label="replicas")
    yerr = np.where(np.isnan(sweep.vbar_se), 0.0, sweep.vbar_se)
    ax.errorbar(sweep.p, sweep.vbar_mean, yerr=yerr, fmt="o-", color=CAR_BLUE,
                capsize=3, label="mean at absorption")
    ax.set_xlabel("car density p")
    ax.set_ylabel("mean visits per site at absorption")
    ax.legend()
    _save(fig, job.output)
    return RenderResult(job.output, {"grid_points": len(sweep.p)})


_RENDERERS = {
    "spacetime_1d": _render_spacetime_1d,
    "nearest_type_map": _render_nearest_map,
    "loglog_fit": _render_loglog_fit,
    "ev_vs_p": _render_ev_vs_p,
}


def render(job: PlotJob) -> RenderResult:
    """Render one job to its output image."""
    return _RENDERERS[job.kind](job)


# ---------------------------------------------------------------------------
# batches


@dataclass(frozen=True)
class BatchReport:
    results: list
    n_ok: int
    n_failed: int

    @property
    def ok(self) -> bool:
        return self.n_failed == 0


def job_from_dict(d: dict) -> PlotJob:
    unknown = set(d) - {"kind", "inputs", "output", "options"}
    if unknown:
        raise RenderError(f"unknown job keys {sorted(unknown)}")
    for key in ("kind", "inputs", "output"):
        if key not in d:
            raise RenderError(f"job is missing {key!r}")
    return PlotJob(kind=d["kind"], inputs=d["inputs"], output=d["output"],
                   options=d.get("options", {}))


def batch(manifest: dict, continue_on_error: bool = False) -> BatchReport:
    """Run every job in a manifest; fail fast or record per-job errors."""
    unknown = set(manifest) - {"format_version", "continue_on_error", "jobs"}
    if unknown:
        raise RenderError(f"unknown manifest keys {sorted(unknown)}")
    jobs = manifest.get("jobs", [])
    cont = bool(manifest.get("continue_on_error", continue_on_error))
    results = []
    n_ok = n_failed = 0
    for jd in jobs:
        try:
            job = job_from_dict(jd)
            res = render(job)
            results.append({"output": res.output, "ok": True, "meta": res.meta})
            n_ok += 1
        except (RenderError, SchemaError, OSError) as exc:
            if not cont:
                raise
            results.append({"output": jd.get("output"), "ok": False, "error": str(exc)})
            n_failed += 1
    return BatchReport(results=results, n_ok=n_ok, n_failed=n_failed)
