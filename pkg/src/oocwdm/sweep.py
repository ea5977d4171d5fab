"""Grid evaluation, CSV output and plot-ready curve files.

CSV columns, in order (see ``COLUMNS``)::

    F, W, receiver, S, S2, plan, alphas, N, capacity, method, mode, pe,
    log10_pe, ci_low, ci_high, errors, trials, seed, config_hash, flags, error

Rows are sorted by (F, W, receiver, S, S2, plan order, N) and then by method
in the order analytic, exact, mc. Probabilities are written in scientific
notation with 17 significant digits; when a probability is below the float
range its text is rebuilt from log10_pe so that nothing prints as zero.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from fractions import Fraction
from itertools import groupby
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._logmath import log_fraction
from .analytic import (
    LN10,
    CcrConfig,
    InterferenceProfile,
    PicConfig,
    ber_ccr,
    ber_pic_paper,
)
from .config import METHODS, ChannelPlan, ReceiverSpec, SweepSpec
from .mcsim import LinkModel, enumerate_ccr_exact, enumerate_pic_exact, simulate_ccr, simulate_pic
from .ooc import CodeFamily, generate_family

_FLOAT_MIN_NORMAL = 2.2250738585072014e-308


@dataclass
class ResultRow:
    F: int
    W: int
    receiver: str
    S: int
    S2: int | None
    plan: str
    alphas: str
    N: int
    capacity: int
    method: str
    mode: str
    pe: float | None = None
    log10_pe: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    errors: int | None = None
    trials: int | None = None
    seed: int | None = None
    config_hash: str = ""
    flags: str = ""
    error: str = ""


COLUMNS = tuple(f.name for f in fields(ResultRow))
_PROB_COLUMNS = ("pe", "log10_pe", "ci_low", "ci_high")


@dataclass(frozen=True)
class GridPoint:
    index: int
    F: int
    W: int
    receiver: ReceiverSpec
    plan_index: int
    plan: ChannelPlan
    N: int


def grid_points(spec: SweepSpec) -> list[GridPoint]:
    """All grid points in output order; the index seeds each point's RNG substream."""
    recv = sorted(spec.receivers, key=lambda r: (r.kind, r.S, r.S2 or 0))
    pts = []
    for F, W in sorted(spec.codes):
        for r in recv:
            for k, plan in enumerate(spec.plans):
                for N in sorted(set(spec.users)):
                    pts.append(GridPoint(len(pts), F, W, r, k, plan, N))
    return pts


def point_seed(master: int, index: int) -> int:
    """64-bit seed of one grid point's substream."""
    ss = np.random.SeedSequence(master, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _family_for(spec: SweepSpec, F: int, W: int, cache: dict) -> CodeFamily:
    if spec.family is not None:
        return spec.family
    if (F, W) not in cache:
        cache[(F, W)] = generate_family(F, W)
    return cache[(F, W)]


def _evaluate(spec: SweepSpec, pt: GridPoint, method: str, chash: str, cache: dict) -> ResultRow:
    r = pt.receiver
    row = ResultRow(
        F=pt.F,
        W=pt.W,
        receiver=r.kind,
        S=r.S,
        S2=r.S2,
        plan=pt.plan.name,
        alphas=pt.plan.alpha_text,
        N=pt.N,
        capacity=(1 + len(pt.plan.alphas)) * pt.N,
        method=method,
        mode=spec.mode,
        config_hash=chash,
    )
    prof = InterferenceProfile(pt.plan.alphas)
    try:
        if r.kind == "ccr":
            cfg = CcrConfig(pt.F, pt.W, pt.N, r.S, strict=spec.strict)
            flags = list(cfg.flags)
            if method == "analytic":
                val = ber_ccr(cfg, prof)
                row.pe, row.log10_pe = val.value, val.log10_value
            elif method == "exact":
                _set_exact(row, enumerate_ccr_exact(cfg, prof))
            else:
                est = simulate_ccr(_link(spec, pt, cache), r.S, spec.trials, point_seed(spec.seed, pt.index))
                _set_estimate(row, est)
        else:
            cfg = PicConfig(pt.F, pt.W, pt.N, r.S, r.S2, strict=spec.strict)
            flags = list(cfg.flags)
            if method == "analytic":
                if len(prof) != 1:
                    raise _Skip("printed PIC formula covers exactly one adjacent channel")
                val = ber_pic_paper(cfg, prof.alphas[0])
                flags = list(val.flags)
                row.pe = val.value
                row.log10_pe = val.log10_value if val.value > 0 else (-math.inf if val.value == 0 else math.nan)
            elif method == "exact":
                _set_exact(row, enumerate_pic_exact(cfg, prof))
            else:
                est = simulate_pic(
                    _link(spec, pt, cache), r.S, r.S2, spec.trials, point_seed(spec.seed, pt.index)
                )
                _set_estimate(row, est)
        if method == "mc":
            flags.append(f"mc-{spec.mc_mode}")
        row.flags = ";".join(flags)
    except _Skip as exc:
        row.error = f"skipped: {exc}"
    except ValueError as exc:
        row.error = f"invalid: {exc}"
    return row


class _Skip(Exception):
    pass


def _link(spec: SweepSpec, pt: GridPoint, cache: dict) -> LinkModel:
    if spec.mc_mode == "code":
        fam = _family_for(spec, pt.F, pt.W, cache)
        return LinkModel.coded(fam, pt.N, pt.plan.alphas)
    return LinkModel.binomial(pt.F, pt.W, pt.N, pt.plan.alphas)


def _set_exact(row: ResultRow, x: Fraction) -> None:
    row.pe = float(x)
    row.log10_pe = log_fraction(x) / LN10


def _set_estimate(row: ResultRow, est) -> None:
    row.pe = est.ber
    row.log10_pe = math.log10(est.ber) if est.ber > 0 else -math.inf
    row.ci_low, row.ci_high = est.ci95_low, est.ci95_high
    row.errors, row.trials, row.seed = est.errors, est.trials, est.seed


def _evaluate_point(args) -> list[ResultRow]:
    spec, pt, chash = args
    cache: dict = {}
    return [_evaluate(spec, pt, m, chash, cache) for m in spec.methods]


def run_sweep(spec: SweepSpec, out_dir: str | Path | None = None, plots: bool | None = None) -> list[ResultRow]:
    """Evaluate every grid point with every requested method.

    A failing point yields a row with the ``error`` column set; the sweep
    itself never aborts. With ``out_dir`` the CSV (and, unless disabled,
    the plot data) is written there.
    """
    pts = grid_points(spec)
    chash = spec.config_hash()
    jobs = [(spec, pt, chash) for pt in pts]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            chunks = list(pool.map(_evaluate_point, jobs))
    else:
        chunks = [_evaluate_point(job) for job in jobs]
    rows = sort_rows([row for chunk in chunks for row in chunk], spec)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(rows, out / spec.csv_name)
        if spec.plotdata if plots is None else plots:
            good = [r for r in rows if not r.error]
            if good:
                emit_plotdata(good, spec.group_by or default_group_by(good), out / "plotdata")
    return rows


def sort_rows(rows: Iterable[ResultRow], spec: SweepSpec | None = None) -> list[ResultRow]:
    plan_rank = {p.name: i for i, p in enumerate(spec.plans)} if spec else {}
    method_rank = {m: i for i, m in enumerate(METHODS)}

    def key(r: ResultRow):
        return (
            r.F,
            r.W,
            r.receiver,
            r.S,
            r.S2 or 0,
            plan_rank.get(r.plan, len(plan_rank)),
            r.plan,
            r.N,
            method_rank.get(r.method, len(method_rank)),
        )

    return sorted(rows, key=key)


# -- CSV ----------------------------------------------------------------------

def format_prob(value: float | None, log10_value: float | None = None) -> str:
    """17 significant digits; values below the float range are rebuilt from log10."""
    if value is None:
        return ""
    if math.isnan(value):
        return "nan"
    if log10_value is None or (value != 0 and abs(value) >= _FLOAT_MIN_NORMAL):
        return f"{value:.16e}"
    if value == 0 and (log10_value is None or log10_value == -math.inf):
        return f"{0.0:.16e}"
    exp10 = math.floor(log10_value)
    mant = 10 ** (log10_value - exp10)
    if mant >= 9.9999999999999995:
        mant, exp10 = 1.0, exp10 + 1
    return f"{mant:.16f}e{exp10:+03d}"


def _format_log(x: float | None) -> str:
    if x is None:
        return ""
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.16e}"


def row_cells(row: ResultRow) -> list[str]:
    cells = []
    for name, v in zip(COLUMNS, astuple(row)):
        if name == "pe":
            cells.append(format_prob(v, row.log10_pe))
        elif name == "log10_pe":
            cells.append(_format_log(v))
        elif name in ("ci_low", "ci_high"):
            cells.append(format_prob(v))
        else:
            cells.append("" if v is None else str(v))
    return cells


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(row_cells(r))
    return buf.getvalue()


def write_csv(rows: Sequence[ResultRow], path: str | Path) -> None:
    Path(path).write_bytes(rows_to_csv(rows).encode("utf-8"))


_INT_COLUMNS = {"F", "W", "S", "S2", "N", "capacity", "errors", "trials", "seed"}


def read_csv(path: str | Path) -> list[ResultRow]:
    return parse_csv(Path(path).read_text(encoding="utf-8"))


def parse_csv(text: str) -> list[ResultRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for rec in reader:
        kw = {}
        for k in COLUMNS:
            v = rec[k]
            if k in _INT_COLUMNS:
                kw[k] = int(v) if v != "" else None
            elif k in _PROB_COLUMNS:
                kw[k] = float(v) if v != "" else None
            else:
                kw[k] = v
        out.append(ResultRow(**kw))
    return out


# -- plot data ----------------------------------------------------------------

_CURVE_KEYS = ("F", "W", "receiver", "S", "S2", "plan", "method", "mode")


def default_group_by(rows: Sequence[ResultRow]) -> tuple[str, ...]:
    varying = tuple(k for k in _CURVE_KEYS if len({getattr(r, k) for r in rows}) > 1)
    return varying or ("plan",)


def emit_plotdata(rows: Sequence[ResultRow], group_by: Sequence[str], out_dir: str | Path) -> list[Path]:
    """Write one ``N log10_pe`` file per curve plus ``manifest.json``.

    Raises ValueError for unknown grouping keys or when a curve would hold
    two values at the same N. Strict-mode analytic CCR curves are checked to
    be nondecreasing in N.
    """
    if not rows:
        raise ValueError("no rows to plot")
    group_by = tuple(group_by)
    unknown = [k for k in group_by if k not in COLUMNS]
    if unknown or not group_by:
        raise ValueError(f"grouping keys {unknown or list(group_by)} are not row fields {COLUMNS}")
    usable = [r for r in rows if not r.error and r.log10_pe is not None]

    def gkey(r):
        return tuple(getattr(r, k) for k in group_by)

    def sortable(t):
        return tuple((v is None, "" if v is None else v) for v in t)

    curves = []
    for key, grp in groupby(sorted(usable, key=lambda r: (sortable(gkey(r)), r.N)), key=gkey):
        pts = list(grp)
        ns = [r.N for r in pts]
        if len(set(ns)) != len(ns):
            varying = [k for k in _CURVE_KEYS if k not in group_by and len({getattr(r, k) for r in pts}) > 1]
            raise ValueError(f"curve {dict(zip(group_by, key))} has repeated N; also group by {varying}")
        if all(r.method == "analytic" and r.receiver == "ccr" and r.mode == "strict" for r in pts):
            for a, b in zip(pts, pts[1:]):
                if b.log10_pe < a.log10_pe - 1e-12 * max(1.0, abs(a.log10_pe)):
                    raise ValueError(f"curve {dict(zip(group_by, key))} decreases in N at N={b.N}")
        curves.append((key, pts))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"group_by": list(group_by), "columns": ["N", "log10_pe"], "curves": []}
    paths = []
    for idx, (key, pts) in enumerate(curves):
        name = f"curve_{idx:03d}.dat"
        lines = ["# N log10_pe"] + [f"{r.N} {_format_log(r.log10_pe)}" for r in pts]
        (out / name).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
        manifest["curves"].append(
            {"file": name, "coords": {k: v for k, v in zip(group_by, key)}, "points": len(pts)}
        )
        paths.append(out / name)
    mpath = out / "manifest.json"
    mpath.write_bytes((json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    return paths + [mpath]
