"""Experiment suites, run manifests and the report reader."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .config import ConfigError, RunConfig, parse_config
from .diagnostics import (
    VERDICT_HEADER,
    baum_katz_series,
    carleson_kronecker,
    dyadic_series,
    hunt_young_ratio,
    kolmogorov_weighted_bound,
    lln_trajectory,
    mismatch_counts,
    stoica_bounds,
)
from .distributions import (
    PointMass,
    Rademacher,
    ScaledFamily,
    SymmetricPareto,
    moment_abs,
    sample,
)
from .monte_carlo import (
    estimate_exceedance,
    estimate_exceedance_curve,
    with_dense_head,
    write_curves_csv,
)
from .oracle import DiscreteLaw, exact_prefix_max_distribution
from .rng import derive_seed, derive_seeds
from .sequence_engine import truncate_at_index, write_trajectory_csv

log = logging.getLogger(__name__)

OUTPUT_ENV = "DFTLAB_OUTPUT_DIR"
DEFAULT_OUTPUT = "dftlab_out"
MANIFEST = "manifest.json"

# per-suite seed domains, so suites never share replication streams
_DOMAIN = {s: i + 1 for i, s in enumerate(("lln", "rates", "dyadic", "carleson", "maximal", "bounds", "oracle"))}


class IntegrityError(RuntimeError):
    pass


@dataclass
class RunManifest:
    config: dict
    files: list[dict] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {"config": self.config, "files": self.files, "timings": self.timings, "meta": self.meta},
            indent=2,
            sort_keys=True,
        )


def _g(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _suite_master(cfg: RunConfig, suite: str, sub: int = 0) -> int:
    return derive_seed(cfg.master_seed, (_DOMAIN[suite] << 32) + sub)


def _aggregate(classes) -> str:
    classes = list(classes)
    if not classes:
        return "none"
    if all(c == classes[0] for c in classes):
        return classes[0]
    return "mixed(" + ",".join(classes) + ")"


# -- suites -------------------------------------------------------------------


def suite_rates(cfg: RunConfig, out: Path) -> list[Path]:
    grid = with_dense_head(cfg.n_grid.resolve(), cfg.option("dense_head"))
    curves, verdicts = [], []
    for i, t in enumerate(cfg.t_mode.resolve()):
        log.info("rates: t=%.6g (%d/%d)", t, i + 1, cfg.t_mode.count or len(cfg.t_mode.values))
        c = estimate_exceedance_curve(
            cfg.distribution, t, grid, cfg.epsilon, cfg.r, cfg.reps, _suite_master(cfg, "rates", i), p=cfg.p
        )
        curves.append(c)
        verdicts.append(baum_katz_series(c, cfg.p, cfg.r, cfg.option("tol"), cfg.option("margin")))
    write_curves_csv(out / "rates.csv", curves)
    _write_csv(out / "series_verdict.csv", VERDICT_HEADER, [v.verdict_row() for v in verdicts])
    return [out / "rates.csv", out / "series_verdict.csv"]


def suite_dyadic(cfg: RunConfig, out: Path) -> list[Path]:
    top = max(cfg.n_grid.resolve())
    grid = [1 << j for j in range(top.bit_length()) if (1 << j) <= top]
    curves, verdicts = [], []
    for i, t in enumerate(cfg.t_mode.resolve()):
        log.info("dyadic: t=%.6g", t)
        c = estimate_exceedance_curve(
            cfg.distribution, t, grid, cfg.epsilon, cfg.p, cfg.reps, _suite_master(cfg, "dyadic", i), p=cfg.p
        )
        curves.append(c)
        verdicts.append(
            dyadic_series(c.points, cfg.p, cfg.option("tol"), cfg.option("margin"),
                          label=f"dyadic[{cfg.distribution.label},t={t:.6g}]")
        )
    write_curves_csv(out / "dyadic.csv", curves)
    _write_csv(out / "dyadic_verdict.csv", VERDICT_HEADER, [v.verdict_row() for v in verdicts])
    return [out / "dyadic.csv", out / "dyadic_verdict.csv"]


def suite_lln(cfg: RunConfig, out: Path) -> list[Path]:
    grid = cfg.option("lln_n_grid")
    seeds = derive_seeds(_suite_master(cfg, "lln"), 0, cfg.option("lln_seeds"))
    rows = []
    for t in cfg.t_mode.resolve():
        log.info("lln: t=%.6g", t)
        tr = lln_trajectory(cfg.distribution, t, grid, seeds, cfg.p)
        q_n = tr.summary(1.0)
        q_p = tr.summary(1.0 / cfg.p)
        for j, n in enumerate(tr.n_grid):
            rows.append([cfg.distribution.label, _g(t), str(n), str(len(seeds)),
                         _g(q_n[1, j]), _g(q_n[0, j]), _g(q_n[2, j]),
                         _g(q_p[1, j]), _g(q_p[0, j]), _g(q_p[2, j])])
    _write_csv(out / "lln.csv",
               ["spec_label", "t", "n", "seeds", "median_over_n", "q10_over_n", "q90_over_n",
                "median_over_n_root_p", "q10_over_n_root_p", "q90_over_n_root_p"], rows)
    return [out / "lln.csv"]


def suite_carleson(cfg: RunConfig, out: Path) -> list[Path]:
    n = max(cfg.n_grid.resolve())
    ck = np.unique(np.round(np.geomspace(1, n, 64)).astype(np.int64))
    seeds = derive_seeds(_suite_master(cfg, "carleson"), 0, cfg.option("carleson_seeds"))
    rows = []
    for t in cfg.t_mode.resolve():
        for i, s in enumerate(seeds):
            ys, _ = truncate_at_index(sample(cfg.distribution, int(s), n))
            ck_res = carleson_kronecker(ys, t, ck)
            for k, w, a in zip(ck_res.k, ck_res.weighted, ck_res.averaged):
                rows.append((f"weighted[seed={i}]", t, k, w))
                rows.append((f"kronecker[seed={i}]", t, k, a))
    write_trajectory_csv(out / "carleson.csv", rows)
    return [out / "carleson.csv"]


def suite_maximal(cfg: RunConfig, out: Path) -> list[Path]:
    ns = cfg.option("maximal_n")
    reps = cfg.option("maximal_reps")
    rows, summary = [], []
    for i, n in enumerate(ns):
        log.info("maximal: n=%d", n)
        c = n ** (1.0 / cfg.r)
        seeds = derive_seeds(_suite_master(cfg, "maximal", i), 0, reps)
        ratios = []
        for j, s in enumerate(seeds):
            res = hunt_young_ratio(sample(cfg.distribution, int(s), n), c, n, 2 * n)
            ratios.append(res.ratio)
            rows.append([cfg.distribution.label, str(n), str(j), _g(res.integral), _g(res.rhs), _g(res.ratio)])
        ratios = np.array(ratios)
        summary.append([str(n), str(reps), _g(np.nanmin(ratios)), _g(np.nanmedian(ratios)),
                        _g(np.nanquantile(ratios, 0.99))])
    _write_csv(out / "maximal.csv", ["spec_label", "n", "rep", "integral", "rhs", "ratio"], rows)
    _write_csv(out / "maximal_summary.csv", ["n", "reps", "min_ratio", "median_ratio", "p99_ratio"], summary)
    return [out / "maximal.csv", out / "maximal_summary.csv"]


def expected_mismatch(spec, n: int) -> float:
    """sum_{k<=n} P(|X_k| > k), the mean number of entries truncation changes."""
    ks = np.arange(1, n + 1, dtype=np.float64)
    base, scale = (spec.base, spec.scale_at(ks)) if isinstance(spec, ScaledFamily) else (spec, np.ones_like(ks))
    y = ks / scale
    if isinstance(base, SymmetricPareto):
        probs = np.where(y < 1.0, 1.0, np.maximum(y, 1.0) ** (-base.alpha))
    elif isinstance(base, PointMass):
        probs = (abs(base.value) > y).astype(np.float64)
    else:  # unit-modulus laws
        probs = (y < 1.0).astype(np.float64)
    return math.fsum(probs)


def suite_bounds(cfg: RunConfig, out: Path) -> list[Path]:
    spec = cfg.distribution
    rows = []
    if math.isfinite(moment_abs(spec, 1.0)):
        kb = kolmogorov_weighted_bound(spec, cfg.option("kolmogorov_K"))
        for K, v in kb.checkpoints:
            rows.append(["kolmogorov", str(K), _g(v), _g(kb.bound), str(v <= kb.bound).lower()])
    sb = stoica_bounds(spec, cfg.p, cfg.r, cfg.option("stoica_N"))
    for m, a, b in zip(sb.n_marks, sb.second_moment, sb.first_moment):
        rows.append(["stoica_second", str(m), _g(a), "", ""])
        rows.append(["stoica_first", str(m), _g(b), "", ""])
    rows.append(["stoica_second_last_decade", str(sb.N), _g(sb.second_last_decade), "0.01",
                 str(sb.second_last_decade < 0.01).lower()])
    rows.append(["stoica_first_last_decade", str(sb.N), _g(sb.first_last_decade), "0.01",
                 str(sb.first_last_decade < 0.01).lower()])
    tn = cfg.option("truncation_n")
    seeds = derive_seeds(_suite_master(cfg, "bounds"), 0, cfg.option("truncation_seeds"))
    counts = mismatch_counts(spec, tn, seeds)
    mean = float(counts.mean())
    se = float(counts.std(ddof=1) / math.sqrt(counts.size)) if counts.size > 1 else math.nan
    expect = expected_mismatch(spec, tn)
    m1 = moment_abs(spec, 1.0)
    rows.append(["truncation_mean_vs_expected", str(tn), _g(mean), _g(expect),
                 str(abs(mean - expect) <= 3 * se if se > 0 else mean == expect).lower()])
    rows.append(["truncation_mean_vs_first_moment", str(tn), _g(mean), _g(m1), str(mean <= m1).lower()])
    _write_csv(out / "bounds.csv", ["check", "parameter", "value", "bound", "pass"], rows)
    return [out / "bounds.csv"]


def _oracle_law(spec) -> DiscreteLaw:
    if isinstance(spec, Rademacher):
        return DiscreteLaw.rademacher()
    if isinstance(spec, PointMass):
        return DiscreteLaw.point(spec.value)
    raise ConfigError("distribution", "the oracle suite needs an i.i.d. discrete law (Rademacher or PointMass)")


def oracle_threshold(dist, q: float) -> float:
    """A threshold strictly between support atoms, at mass quantile q of the prefix max."""
    vals = [v for v, _ in dist]
    cum = np.cumsum([m for _, m in dist])
    i = int(min(np.searchsorted(cum, q), len(vals) - 1))
    if i + 1 < len(vals):
        return 0.5 * (vals[i] + vals[i + 1])
    lo = vals[i - 1] if i > 0 else 0.0
    return 0.5 * (lo + vals[i])


def suite_oracle(cfg: RunConfig, out: Path) -> list[Path]:
    law = _oracle_law(cfg.distribution)
    ns = cfg.n_grid.resolve()
    ts = cfg.t_mode.resolve()
    count = cfg.option("oracle_configs")
    rows = []
    for j in range(count):
        n = ns[j % len(ns)]
        t = ts[(j // len(ns)) % len(ts)]
        dist = exact_prefix_max_distribution(law, t, n)
        thr = oracle_threshold(dist, (j + 0.5) / count)
        exact = math.fsum(m for v, m in dist if v > thr)
        est = estimate_exceedance(cfg.distribution, t, n, thr, cfg.reps, _suite_master(cfg, "oracle", j))
        covered = est.ci_low <= exact <= est.ci_high
        rows.append([str(j), str(n), _g(t), _g(thr), _g(exact), str(est.reps), str(est.hits), _g(est.p_hat),
                     _g(est.ci_low), _g(est.ci_high), str(covered).lower()])
    _write_csv(out / "oracle.csv",
               ["config", "n", "t", "threshold", "exact", "reps", "hits", "p_hat", "ci_low", "ci_high", "covered"],
               rows)
    return [out / "oracle.csv"]


SUITE_FUNCS = {
    "lln": suite_lln,
    "rates": suite_rates,
    "dyadic": suite_dyadic,
    "carleson": suite_carleson,
    "maximal": suite_maximal,
    "bounds": suite_bounds,
    "oracle": suite_oracle,
}


def resolve_output(cfg: RunConfig, override=None) -> Path:
    return Path(override or cfg.output_dir or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)


def run(cfg: RunConfig, output=None, threads: int | None = None) -> RunManifest:
    """Execute the configured suites; write one CSV per diagnostic plus manifest.json."""
    if isinstance(cfg, dict):
        cfg = parse_config(cfg)
    out = resolve_output(cfg, output)
    if "oracle" in cfg.suites:
        _oracle_law(cfg.distribution)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config=cfg.to_dict())
    for suite in cfg.suites:
        t0 = time.perf_counter()
        paths = SUITE_FUNCS[suite](cfg, out)
        manifest.timings[suite] = time.perf_counter() - t0
        for p in paths:
            manifest.files.append({"suite": suite, "path": p.name, "sha256": _sha256(p), "bytes": p.stat().st_size})
    manifest.meta = {
        "version": __version__,
        "backend": BACKEND,
        "threads": threads,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    (out / MANIFEST).write_text(manifest.to_json() + "\n")
    return manifest


def load_manifest(path) -> tuple[dict, Path]:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST
    if not path.exists():
        raise IntegrityError(f"manifest not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"manifest is not valid JSON: {exc}") from None
    base = path.parent
    for entry in data.get("files", []):
        f = base / entry["path"]
        if not f.exists():
            raise IntegrityError(f"listed file is missing: {f}")
        if _sha256(f) != entry["sha256"]:
            raise IntegrityError(f"checksum mismatch: {f}")
    return data, base


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def report_lines(manifest_path) -> list[str]:
    data, base = load_manifest(manifest_path)
    files = {e["path"] for e in data.get("files", [])}
    suites = data.get("config", {}).get("suites", [])
    if not suites:
        return ["no suites executed"]
    lines = []
    if "series_verdict.csv" in files:
        rows = _read_csv(base / "series_verdict.csv")
        for r in rows:
            lines.append(f"  {r['label']}: {r['classification']} (total={float(r['total']):.6g})")
        lines.insert(0, f"baum_katz: {_aggregate(r['classification'] for r in rows)}")
    if "dyadic_verdict.csv" in files:
        rows = _read_csv(base / "dyadic_verdict.csv")
        lines.append(f"dyadic: {_aggregate(r['classification'] for r in rows)}")
        lines.extend(f"  {r['label']}: {r['classification']}" for r in rows)
    if "oracle.csv" in files:
        rows = _read_csv(base / "oracle.csv")
        cov = sum(r["covered"] == "true" for r in rows)
        lines.append(f"oracle: {cov}/{len(rows)} Wilson intervals cover the exact probability")
    if "bounds.csv" in files:
        for r in _read_csv(base / "bounds.csv"):
            if r["pass"]:
                verdict = "pass" if r["pass"] == "true" else "fail"
                lines.append(f"bounds: {r['check']}[{r['parameter']}] value={float(r['value']):.6g} "
                             f"bound={float(r['bound']):.6g}: {verdict}")
    if "maximal_summary.csv" in files:
        rows = _read_csv(base / "maximal_summary.csv")
        floor_ok = all(float(r["min_ratio"]) >= 2 * math.pi - 1e-6 for r in rows)
        growth = float(rows[-1]["p99_ratio"]) / float(rows[0]["p99_ratio"])
        lines.append(f"hunt_young: ratio >= 2pi: {'pass' if floor_ok else 'fail'}; "
                     f"p99 growth n={rows[0]['n']}->{rows[-1]['n']}: {growth:.4g} "
                     f"({'pass' if growth <= 2 else 'fail'})")
    if "lln.csv" in files:
        rows = _read_csv(base / "lln.csv")
        by_t: dict[str, list[dict]] = {}
        for r in rows:
            by_t.setdefault(r["t"], []).append(r)
        for t, rs in by_t.items():
            a, b = rs[0], rs[-1]
            lines.append(f"lln[t={float(t):.6g}]: median |S_n|/n {float(a['median_over_n']):.4g} -> "
                         f"{float(b['median_over_n']):.4g}; median |S_n|/n^(1/p) "
                         f"{float(a['median_over_n_root_p']):.4g} -> {float(b['median_over_n_root_p']):.4g}")
    if "carleson.csv" in files:
        rows = _read_csv(base / "carleson.csv")
        kron = [r for r in rows if r["label"].startswith("kronecker")]
        ks = sorted({int(r["k"]) for r in kron})
        first = np.median([float(r["magnitude"]) for r in kron if int(r["k"]) == ks[len(ks) // 2]])
        last = np.median([float(r["magnitude"]) for r in kron if int(r["k"]) == ks[-1]])
        lines.append(f"carleson: median Kronecker average k={ks[len(ks) // 2]}: {first:.4g} -> k={ks[-1]}: {last:.4g}")
    return lines


def report(manifest_path) -> str:
    return "\n".join(report_lines(manifest_path))


__all__ = ["IntegrityError", "RunManifest", "expected_mismatch", "load_manifest", "report", "report_lines", "run"]
