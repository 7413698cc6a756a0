"""Deterministic figure rendering from afcsim CSV/JSON artifacts.

Five figure kinds: comb (velocity comb), pap_afc (pulse sequence plus
detuning-domain comb), memory (boundary intensities plus space-time
map), sweep (efficiency families with design guide lines), ozmap
(transfer map with boundary overlays).  Rendering is read-only: guide
lines and scales come from the artifact files, never from recomputed
physics.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("comb", "pap_afc", "memory", "sweep", "ozmap")

# fixed style so identical inputs give identical bytes
_RC = {
    "figure.dpi": 150,
    "savefig.dpi": 150,
    "font.size": 9,
    "font.family": "DejaVu Sans",
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.2,
    "svg.hashsalt": "afcsim-plots",
}

TWO_PI = 2.0 * math.pi


class SchemaError(RuntimeError):
    """Input artifact does not match the documented schema."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    indir: str
    outpath: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")


def _read_csv(path: str, expected: list[str]) -> dict[str, np.ndarray]:
    if not os.path.exists(path):
        raise SchemaError(f"missing artifact {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if header != expected:
            raise SchemaError(f"{path}: header {header} != expected {expected}")
        rows = [[float(tok) for tok in row] for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    return {name: data[:, i] for i, name in enumerate(header)}


def _read_json(path: str) -> dict:
    if not os.path.exists(path):
        raise SchemaError(f"missing artifact {path}")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _check_manifest(indir: str) -> dict:
    manifest = _read_json(os.path.join(indir, "manifest.json"))
    if manifest.get("tool") != "afcsim":
        raise SchemaError(f"{indir}: manifest is not an afcsim run")
    return manifest


def _save(fig, outpath: str):
    ext = os.path.splitext(outpath)[1].lower()
    if ext not in (".png", ".svg"):
        raise SchemaError(f"output must be .png or .svg, got {outpath!r}")
    # strip variable metadata so identical inputs give identical bytes
    metadata = {"Software": None} if ext == ".png" else {"Date": None}
    fig.savefig(outpath, metadata=metadata)
    plt.close(fig)


def _mhz(x):
    return np.asarray(x) / TWO_PI / 1e6


def _render_comb(spec: FigureSpec) -> dict:
    data = _read_csv(os.path.join(spec.indir, "comb.csv"), ["v_m_s", "rho33", "weighted"])
    fig, ax = plt.subplots(figsize=(5.2, 3.2))
    ax.plot(data["v_m_s"], data["rho33"], color="#1a1a1a")
    ax.set_xlabel("velocity (m/s)")
    ax.set_ylabel(r"$\rho_{33}$ per atom")
    ax.set_ylim(bottom=0.0)
    ax.margins(x=0.02)
    _save(fig, spec.outpath)
    return {"path": spec.outpath, "points": int(data["v_m_s"].size)}


def _render_pap_afc(spec: FigureSpec) -> dict:
    manifest = _check_manifest(spec.indir)
    afc = _read_csv(os.path.join(spec.indir, "afc.csv"), ["delta_rad_s", "rho33"])
    pap = manifest["config"]["pap"]
    n, t_int, sigma = pap["n_pulses"], pap["t_int"], pap["sigma"]
    sigma_e = pap["sigma_e"]
    tau = (n - 1) * t_int
    t = np.linspace(-4 * sigma, tau + 4 * sigma, 200 * n)
    comb_factor = np.zeros_like(t)
    for l in range(n):
        comb_factor += np.exp(-((t - l * t_int) ** 2) / (2 * sigma**2))
    dump = np.exp(-(t**2) / (2 * sigma_e**2)) * comb_factor
    pump = np.exp(-((t - tau) ** 2) / (2 * sigma_e**2)) * comb_factor

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5.2, 5.0))
    ax1.plot(t * 1e6, dump, color="#20639b", label="dump")
    ax1.plot(t * 1e6, pump, color="#ed553b", label="pump")
    ax1.set_xlabel(r"time ($\mu$s)")
    ax1.set_ylabel(r"$\Omega/\Omega_0$")
    ax1.legend(frameon=False, loc="upper center", ncol=2)
    ax1.margins(x=0.02)

    ax2.plot(_mhz(afc["delta_rad_s"]), afc["rho33"], color="#1a1a1a")
    ax2.set_xlabel(r"$\delta/2\pi$ (MHz)")
    ax2.set_ylabel(r"$\rho_{33}$ per atom")
    ax2.set_ylim(bottom=0.0)
    ax2.margins(x=0.02)
    fig.subplots_adjust(hspace=0.35)
    _save(fig, spec.outpath)
    return {"path": spec.outpath, "n_pulses": n}


def _render_memory(spec: FigureSpec) -> dict:
    fld = _read_csv(os.path.join(spec.indir, "field.csv"), ["t_s", "i0", "iL"])
    st = _read_csv(os.path.join(spec.indir, "spacetime.csv"), ["z_m", "t_s", "i_scaled"])
    mem = _read_json(os.path.join(spec.indir, "memory.json"))

    peak = float(np.max(fld["i0"]))
    if peak <= 0:
        raise SchemaError("field.csv has no signal")
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5.2, 5.2))
    t_us = fld["t_s"] * 1e6
    ax1.plot(t_us, fld["i0"] / peak, color="#1a1a1a", label=r"$I(0,t)$")
    ax1.plot(t_us, fld["iL"] / peak, color="#888888", ls="--", label=r"$I(L,t)$")
    echo = mem["echo_time_s"] + mem["solver"]["t_c_s"]
    ax1.axvline(echo * 1e6, color="#ed553b", lw=0.8, ls=":")
    ax1.set_xlabel(r"time ($\mu$s)")
    ax1.set_ylabel("scaled intensity")
    ax1.legend(frameon=False)
    ax1.margins(x=0.02)
    label = (rf"$\eta_s$={mem['eta_s']:.3f}  $\eta_r$={mem['eta_r']:.3f}")
    ax1.text(0.02, 0.95, label, transform=ax1.transAxes, va="top")

    z = np.unique(st["z_m"])
    t = np.unique(st["t_s"])
    grid = st["i_scaled"].reshape(t.size, z.size)
    pm = ax2.pcolormesh(t * 1e6, z * 1e2, grid.T, cmap="inferno", shading="auto",
                        rasterized=True)
    fig.colorbar(pm, ax=ax2, label=r"$I(z,t)/I(0,t_c)$")
    ax2.set_xlabel(r"time ($\mu$s)")
    ax2.set_ylabel("z (cm)")
    fig.subplots_adjust(hspace=0.35)
    _save(fig, spec.outpath)
    return {"path": spec.outpath, "echo_time_s": mem["echo_time_s"]}


def _render_sweep(spec: FigureSpec) -> dict:
    path = os.path.join(spec.indir, "sweep.csv")
    if not os.path.exists(path):
        raise SchemaError(f"missing artifact {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = [[float(tok) for tok in row] for row in reader if row]
    if not header or not rows:
        raise SchemaError(f"{path}: empty sweep table")
    for needed in ("pap.delta0", "eta_s", "eta_r"):
        if needed not in header:
            raise SchemaError(f"{path}: missing column {needed}")
    data = np.asarray(rows)
    col = {name: data[:, i] for i, name in enumerate(header)}
    metrics = _read_json(os.path.join(spec.indir, "metrics.json"))
    cond = metrics["conditions"]
    knee_mhz = cond["threshold_delta0_rad_s"] / TWO_PI / 1e6
    opt_mhz = cond["finesse_delta0_rad_s"] / TWO_PI / 1e6

    families = np.unique(col["pap.n_pulses"]) if "pap.n_pulses" in col else [None]
    colors = ["#ed553b", "#20639b", "#e3b505", "#3caea3"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.6, 3.2))
    for i, fam in enumerate(families):
        sel = np.ones(data.shape[0], bool) if fam is None else col["pap.n_pulses"] == fam
        order = np.argsort(col["pap.delta0"][sel])
        x = col["pap.delta0"][sel][order] / 1e6
        lbl = None if fam is None else f"N={int(fam)}"
        ax1.plot(x, col["eta_s"][sel][order], "o-", color=colors[i % 4],
                 label=lbl, ms=3)
        ax2.plot(x, col["eta_r"][sel][order], "s-", color=colors[i % 4],
                 label=lbl, ms=3)
    ax1.axvline(knee_mhz, color="#555555", ls="--", lw=0.9)
    ax2.axvline(opt_mhz, color="#555555", ls="--", lw=0.9)
    ax1.set_ylabel(r"$\eta_s$")
    ax2.set_ylabel(r"$\eta_r$")
    for ax in (ax1, ax2):
        ax.set_xlabel(r"$\Delta^0/2\pi$ (MHz)")
        ax.set_ylim(0.0, 1.02)
        if families[0] is not None:
            ax.legend(frameon=False)
    fig.subplots_adjust(wspace=0.3)
    _save(fig, spec.outpath)
    return {"path": spec.outpath,
            "guide_knee_rad_s": cond["threshold_delta0_rad_s"],
            "guide_optimum_rad_s": cond["finesse_delta0_rad_s"]}


def _render_ozmap(spec: FigureSpec) -> dict:
    m = _read_csv(os.path.join(spec.indir, "ozmap.csv"),
                  ["delta_over_omega", "v_m_s", "rho33"])
    curves = _read_csv(os.path.join(spec.indir, "ozcurves.csv"),
                       ["delta_over_omega", "vs_plus", "vs_minus", "vp_plus", "vp_minus"])
    ratios = np.unique(m["delta_over_omega"])
    v = np.unique(m["v_m_s"])
    grid = m["rho33"].reshape(ratios.size, v.size)

    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    pm = ax.pcolormesh(ratios, v, grid.T, cmap="viridis", shading="auto",
                       rasterized=True, vmin=0.0)
    fig.colorbar(pm, ax=ax, label=r"$\rho_{33}$")
    for name, style in (("vs_plus", "-"), ("vs_minus", "-"),
                        ("vp_plus", "--"), ("vp_minus", "--")):
        y = curves[name]
        ax.plot(curves["delta_over_omega"], y, style, color="#ffffff", lw=1.0)
    ax.set_xlabel(r"$\Delta^0/\Omega_0$")
    ax.set_ylabel("velocity (m/s)")
    ax.set_ylim(v.min(), v.max())
    _save(fig, spec.outpath)
    return {"path": spec.outpath, "cells": int(grid.size)}


_RENDERERS = {
    "comb": _render_comb,
    "pap_afc": _render_pap_afc,
    "memory": _render_memory,
    "sweep": _render_sweep,
    "ozmap": _render_ozmap,
}


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns the output path and the guide values used."""
    _check_manifest(spec.indir)
    with matplotlib.rc_context(_RC):
        return _RENDERERS[spec.kind](spec)
