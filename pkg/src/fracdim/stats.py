"""Rank correlation between generalization gaps and dimension estimates.

Kendall's tau uses the plain sign-product form: tied pairs contribute
zero and the normalizer is always n-choose-2 (no tie correction).
The granulated coefficients fix one hyperparameter axis at a time,
average tau along the free axis, and then average the two axis values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NoValidSlices, TooFewPoints, ZeroVariance


@dataclass(frozen=True)
class GridRecord:
    """One training run reduced to what the statistics need."""

    lr: float
    batch_size: int
    seed: int
    gen_gap: float
    dim: float
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _paired(g, d) -> tuple[np.ndarray, np.ndarray]:
    g = np.asarray(g, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if g.shape != d.shape or g.ndim != 1:
        raise LengthMismatch(f"paired samples required, got {g.shape} and {d.shape}")
    if g.size < 2:
        raise TooFewPoints(f"need at least 2 observations, got {g.size}")
    return g, d


def kendall_tau(g, d) -> float:
    """Sign-product Kendall tau over all pairs, normalized by n-choose-2."""
    g, d = _paired(g, d)
    sg = np.sign(g[:, None] - g[None, :])
    sd = np.sign(d[:, None] - d[None, :])
    iu = np.triu_indices(g.size, k=1)
    concord = float((sg[iu] * sd[iu]).sum())
    return concord / math.comb(g.size, 2)


def _average_ranks(v: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing the average of their positions."""
    order = np.argsort(v, kind="stable")
    ranks = np.empty(v.size)
    sv = v[order]
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman_rho(g, d) -> float:
    """Pearson correlation of average ranks."""
    g, d = _paired(g, d)
    rg = _average_ranks(g)
    rd = _average_ranks(d)
    dg = rg - rg.mean()
    dd = rd - rd.mean()
    vg = float(dg @ dg)
    vd = float(dd @ dd)
    if vg == 0.0 or vd == 0.0:
        raise ZeroVariance("rank variance is zero; correlation undefined")
    return float(dg @ dd) / math.sqrt(vg * vd)


def granulated_kendall(records: list[GridRecord]) -> tuple[float, float, float, int]:
    """Granulated Kendall coefficients over a (possibly incomplete) grid.

    psi_lr averages tau along the learning-rate axis at each fixed batch
    size, psi_bs the transpose, and the headline value is their mean.
    Slices with fewer than 2 ok-records are skipped; the count of skipped
    slices is returned alongside (psi_lr, psi_bs, Psi).
    """
    ok = [r for r in records if r.ok]
    lrs = sorted({r.lr for r in ok})
    bss = sorted({r.batch_size for r in ok})
    skipped = 0

    def axis_mean(fixed_values, key_fixed, key_free) -> float | None:
        nonlocal skipped
        taus = []
        for fv in fixed_values:
            slice_recs = sorted(
                (r for r in ok if key_fixed(r) == fv), key=key_free
            )
            if len(slice_recs) < 2:
                skipped += 1
                continue
            taus.append(
                kendall_tau(
                    [r.gen_gap for r in slice_recs], [r.dim for r in slice_recs]
                )
            )
        return float(np.mean(taus)) if taus else None

    psi_lr = axis_mean(bss, lambda r: r.batch_size, lambda r: r.lr)
    psi_bs = axis_mean(lrs, lambda r: r.lr, lambda r: r.batch_size)
    if psi_lr is None or psi_bs is None:
        raise NoValidSlices(
            "no hyperparameter slice holds 2 or more successful records"
        )
    return psi_lr, psi_bs, 0.5 * (psi_lr + psi_bs), skipped


def correlation_report(records: list[GridRecord]) -> dict:
    """Per-seed correlation statistics and their mean/sd across seeds.

    Each seed's records form one grid; tau, rho and the granulated
    coefficients are computed per seed and then averaged, matching how
    multi-seed experiments report mean and standard deviation.
    """
    seeds = sorted({r.seed for r in records})
    per_seed = []
    for s in seeds:
        recs = [r for r in records if r.seed == s]
        ok = [r for r in recs if r.ok]
        if len(ok) < 2:
            continue
        g = [r.gen_gap for r in ok]
        d = [r.dim for r in ok]
        try:
            psi_lr, psi_bs, psi, skipped = granulated_kendall(recs)
        except NoValidSlices:
            continue
        try:
            rho = spearman_rho(g, d)
        except ZeroVariance:
            rho = float("nan")
        per_seed.append(
            {
                "seed": s,
                "tau": kendall_tau(g, d),
                "rho": rho,
                "psi_lr": psi_lr,
                "psi_bs": psi_bs,
                "Psi": psi,
                "skipped_slices": skipped,
            }
        )
    if not per_seed:
        raise NoValidSlices("no seed has 2 or more successful records")

    def agg(key: str) -> tuple[float, float]:
        vals = np.array([p[key] for p in per_seed])
        return float(vals.mean()), float(vals.std(ddof=0))

    report: dict = {}
    for key in ("rho", "tau", "psi_lr", "psi_bs", "Psi"):
        mean, sd = agg(key)
        report[key] = mean
        report[key + "_sd"] = sd
    report["skipped_slices"] = int(sum(p["skipped_slices"] for p in per_seed))
    report["per_seed"] = per_seed
    return report
