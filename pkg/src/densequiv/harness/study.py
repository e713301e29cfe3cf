"""Rate studies, partition dumps and one-shot bound reports."""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..approximation import ApproxErrors, build_hat_basis, error_functionals
from ..bounds import BOUND_FIELDS, carter_bound, theorem1_total
from ..partition import build_partition
from .config import m_from_rule

RATE_FIELDS = ("n", "m", "member", "H", "A", "B", "step1", "step4", "carter", "total")
SLOPE_FIELDS = ("column", "axis", "member", "fixed", "points", "slope", "r2", "status")
PARTITION_FIELDS = ("cell_index", "lower", "upper", "barycenter", "cell_mass", "measured_mass", "w_j")

_CONTEXT = {}


def _context(config):
    """Measure and battery for ``config``, rebuilt once per process."""
    key = repr(config)
    if key not in _CONTEXT:
        measure = config.build_measure()
        _CONTEXT.clear()
        _CONTEXT[key] = (measure, config.build_battery(measure), {})
    return _CONTEXT[key]


def _partition(config, m):
    measure, _, parts = _context(config)
    if m not in parts:
        parts[m] = build_partition(measure, m)
    return parts[m]


def _errors_task(args):
    config, index, m = args
    _, battery, _ = _context(config)
    e = error_functionals(battery[index], _partition(config, m))
    return e.H, e.A, e.B


def map_tasks(func, tasks, workers):
    """Ordered map, serial or over a process pool; results never depend on ``workers``."""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(func, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    status: str


def fit_loglog(x, y, floor=1e-13):
    """OLS fit of ``log y`` on ``log x``; ``status`` is ``degenerate`` when ``y`` has no usable scale."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.unique(x).size < 2 or np.any(~np.isfinite(y)) or np.any(y <= floor):
        return SlopeFit(math.nan, math.nan, math.nan, "degenerate")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss if ss > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), float(r2), "ok")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, fields, rows, gnuplot=False):
    """Write ``rows`` (dicts) with header ``fields``; ``gnuplot`` gives a whitespace layout with a ``#`` header."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        if gnuplot:
            fh.write("# " + " ".join(fields) + "\n")
            for r in rows:
                fh.write(" ".join(_fmt(r[k]) for k in fields) + "\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(fields)
            for r in rows:
                w.writerow([_fmt(r[k]) for k in fields])
    return path


@dataclass(frozen=True)
class RateStudy:
    rows: list
    slopes: list
    bounds: list


def run_rate_study(config):
    """Error functionals and bound terms for every ``(n, m, member)`` plus fitted slopes."""
    measure, battery, _ = _context(config)
    schedule = config.schedule()
    ms = sorted({m for _, m in schedule})
    tasks = [(config, i, m) for m in ms for i in range(len(battery))]
    results = map_tasks(_errors_task, tasks, config.workers)
    err = {(t[1], t[2]): r for t, r in zip(tasks, results)}

    rows = []
    for n, m in schedule:
        sq = math.sqrt(n)
        carter = carter_bound(m, n, config.C_R)
        for i, f in enumerate(battery):
            H, A, B = err[(i, m)]
            rows.append({"n": n, "m": m, "member": f.name, "H": H, "A": A, "B": B,
                         "step1": sq * H, "step4": 2 * sq * (A + B), "carter": carter,
                         "total": sq * (H + A + B) + carter})

    slopes = []
    listed = set(config.m_list)
    for i, f in enumerate(battery):
        for n in config.n_grid:
            sel = [r for r in rows if r["n"] == n and r["member"] == f.name and r["m"] in listed]
            if len(sel) < 2:
                continue
            for col in ("H", "A", "B"):
                fit = fit_loglog([r["m"] for r in sel], [r[col] for r in sel])
                slopes.append(_slope_row(col, "m", f.name, f"n={n}", len(sel), fit))
            break  # H, A, B do not depend on n
        if config.m_rule is not None and len(config.n_grid) >= 2:
            sel = [next(r for r in rows if r["n"] == n and r["m"] == m_from_rule(n, config.m_rule)
                        and r["member"] == f.name) for n in config.n_grid]
            for col in ("step1", "step4", "carter", "total"):
                fit = fit_loglog([r["n"] for r in sel], [r[col] for r in sel])
                slopes.append(_slope_row(col, "n", f.name, f"rho={config.m_rule!r}", len(sel), fit))

    bounds = []
    for n, m in schedule:
        errors = [ApproxErrors(*err[(i, m)]) for i in range(len(battery))]
        bounds.append(theorem1_total(battery, _partition(config, m), n, config.C_R, errors=errors).row())
    return RateStudy(rows, slopes, bounds)


def _slope_row(col, axis, member, fixed, points, fit):
    return {"column": col, "axis": axis, "member": member, "fixed": fixed, "points": points,
            "slope": fit.slope, "r2": fit.r2, "status": fit.status}


def write_rate_study(study, out, gnuplot=False):
    ext = ".dat" if gnuplot else ".csv"
    return [
        write_csv(os.path.join(out, "rate_study" + ext), RATE_FIELDS, study.rows, gnuplot),
        write_csv(os.path.join(out, "rate_slopes" + ext), SLOPE_FIELDS, study.slopes, gnuplot),
        write_csv(os.path.join(out, "bounds" + ext), BOUND_FIELDS, study.bounds, gnuplot),
    ]


def partition_table(measure, m):
    """One row per cell: edges, barycenter, masses and hat normalisation ``w_j``."""
    part = build_partition(measure, m)
    w = build_hat_basis(part).masses if m >= 2 else np.ones(1)
    return [{"cell_index": j + 1, "lower": float(part.edges[j]), "upper": float(part.edges[j + 1]),
             "barycenter": float(part.barycenters[j]), "cell_mass": float(part.cell_mass),
             "measured_mass": float(part.measured_masses[j]), "w_j": float(w[j])}
            for j in range(m)]


def bound_report(config, n, m):
    measure, battery, _ = _context(config)
    return theorem1_total(battery, _partition(config, m), n, config.C_R)
