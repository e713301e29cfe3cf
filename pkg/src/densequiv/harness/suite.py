"""Verification suite and kernel demonstration."""
from __future__ import annotations

import math
import os
import time
import zlib
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .. import families
from ..approximation import (build_hat_basis, cell_integrals, cell_masses, error_functionals,
                             hat_density, lemma_l2_bound, l2_distance_sq, sqrt_cell_integrals, sqrt_hat)
from ..bounds import step1_bound, step4_parts, theorem1_total
from ..divergences import (DensityFactor, gaussian_tv_bound, gaussian_tv_exact, l1_and_hellinger,
                           NormalFactor, tv_monte_carlo_product)
from ..experiments import GridSpec, cell_probabilities, sample_increments, sample_multinomial
from ..kernels import (build_y_star_path, cell_probability_discrepancy, compound_kernel_draws,
                       grouping_statistic, kernel_marginal_cdf, y_star_construction_covariance,
                       y_star_theoretical_moments)
from ..measure import (DensityParameter, check_class_membership, exponential, power_law,
                       sample_from_density, uniform)
from ..partition import build_partition
from .study import _context, _partition, fit_loglog, map_tasks, write_csv
from .config import m_from_rule

SUITE_FIELDS = ("name", "status", "value", "threshold")
KS_CRIT_01 = 1.628  # asymptotic Kolmogorov critical value at alpha = 0.01


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # pass | fail | skip
    value: float
    threshold: float
    runtime: float = 0.0
    detail: str = ""


@dataclass(frozen=True)
class SuiteReport:
    checks: tuple

    @property
    def passed(self):
        return not any(c.status == "fail" for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if c.status == "fail"]

    def rows(self):
        return [{"name": c.name, "status": c.status, "value": c.value, "threshold": c.threshold}
                for c in self.checks]


def check_seed(config, name):
    """Per-check seed, a pure function of the study seed and the check name."""
    ss = np.random.SeedSequence([config.seed % (1 << 63), zlib.crc32(name.encode())])
    return int(ss.generate_state(2, np.uint64)[0])


def _le(name, value, threshold, detail=""):
    ok = bool(np.isfinite(value) and value <= threshold)
    return CheckResult(name, "pass" if ok else "fail", float(value), float(threshold), detail=detail)


def _skip(name, why):
    return CheckResult(name, "skip", math.nan, math.nan, detail=why)


def _builtins(config):
    return [("config", config.build_measure()), ("uniform", uniform()),
            ("power_law", power_law(2.0, 1.0)), ("exponential", exponential(1.0))]


def _ks(x, cdf):
    x = np.sort(np.asarray(x))
    F = cdf(x)
    k = np.arange(1, x.size + 1) / x.size
    return float(max(np.max(k - F), np.max(F - (k - 1.0 / x.size))))


def _chi2_pvalue(counts, probs):
    exp = counts.sum() * np.asarray(probs)
    return float(stats.chisquare(counts, exp).pvalue)


# --- measure ---------------------------------------------------------------

def c_quantile_roundtrip(config, name):
    worst = 0.0
    for _, meas in _builtins(config):
        x = meas.quantile(np.linspace(0.01, 0.99, 100))
        back = meas.quantile(meas.cdf(x) / meas.total_mass)
        worst = max(worst, float(np.max(np.abs(back - x) / np.maximum(1.0, np.abs(x)))))
    return _le(name, worst, 1e-11)


def c_power_law_mass(config, name):
    worst = max(abs(power_law(a, L).total_mass - L ** a / a) / (L ** a / a)
                for a in (0.5, 1.0, 2.0, 3.5) for L in (1.0, 2.5))
    return _le(name, worst, 1e-9)


def c_sampler_ks(config, name):
    meas = config.build_measure()
    N = config.verify["gof_draws"]
    x = sample_from_density(meas, families.constant(meas), N, check_seed(config, name))
    ks = _ks(x, lambda t: meas.cdf(t) / meas.total_mass)
    return _le(name, ks, KS_CRIT_01 / math.sqrt(N))


def c_membership(config, name):
    measure, battery, _ = _context(config)
    f = next(f for f in battery if name.endswith("[" + f.name + "]"))
    rep = check_class_membership(f, measure)
    value = max(f.kappa - rep.f_min, rep.f_max - f.M, 0.0)
    return CheckResult(name, "pass" if rep.passed else "fail", value, 0.0,
                       detail=f"h1={rep.h1_ok} normalized={rep.normalized_ok} holder={rep.holder_ok}")


# --- partition -------------------------------------------------------------

def c_cell_mass(config, name):
    worst = 0.0
    for _, meas in _builtins(config):
        for m in (2, 8, 64):
            p = build_partition(meas, m)
            worst = max(worst, float(np.max(np.abs(p.measured_masses - p.cell_mass)) / p.cell_mass))
    return _le(name, worst, 1e-8)


def c_telescoping(config, name):
    meas = config.build_measure()
    p = build_partition(meas, 16)
    cdf = np.concatenate([[0.0], meas.cdf(p.breakpoints), [meas.total_mass]])
    return _le(name, abs(np.diff(cdf).sum() - meas.total_mass) / meas.total_mass, 1e-14)


def c_refinement(config, name):
    meas = config.build_measure()
    worst = 0.0
    for m in (4, 8, 16):
        a, b = build_partition(meas, m), build_partition(meas, 2 * m)
        d = np.abs(b.breakpoints[1::2] - a.breakpoints) / np.maximum(1.0, np.abs(a.breakpoints))
        worst = max(worst, float(d.max()))
    return _le(name, worst, 1e-10)


def c_uniform_closed_form(config, name):
    meas = config.build_measure()
    if config.measure_family != "uniform":
        return _skip(name, "measure is not uniform")
    a, b = meas.interval.lower, meas.interval.upper
    worst = 0.0
    for m in (3, 8, 50):
        p = build_partition(meas, m)
        v = a + np.arange(1, m) * (b - a) / m
        mid = a + (np.arange(m) + 0.5) * (b - a) / m
        worst = max(worst, float(np.max(np.abs(p.breakpoints - v))), float(np.max(np.abs(p.barycenters - mid))))
    return _le(name, worst, 1e-10)


def c_mesh_monotone(config, name):
    meas = config.build_measure()
    if not meas.interval.is_compact:
        return _skip(name, "interval is not compact")
    ell = [build_partition(meas, m).finite_mesh for m in (8, 16, 32)]
    return _le(name, max(ell[1] - ell[0], ell[2] - ell[1]), 0.0)


# --- approximation ---------------------------------------------------------

def _grid(meas, size=10_000):
    return meas.quantile(np.linspace(0.0, 1.0, size))


def c_partition_of_unity(config, name):
    meas = config.build_measure()
    basis = build_hat_basis(build_partition(meas, 16))
    s = basis.partition.cell_mass * basis.values(_grid(meas)).sum(axis=-1)
    return _le(name, float(np.max(np.abs(s - 1.0))), 1e-9)


def c_interpolation(config, name):
    meas = config.build_measure()
    part = build_partition(meas, 12)
    vals = np.linspace(0.5, 1.5, 12) * part.cell_mass
    fh = hat_density(vals, part)
    err = float(np.max(np.abs(fh(part.barycenters) - vals / part.cell_mass)))
    if config.measure_family == "uniform":
        a = meas.interval.lower
        slope = lambda x: 1.0 + 0.3 * (np.asarray(x) - a)  # noqa: E731
        nu = cell_masses(slope, part)
        err = max(err, float(np.max(np.abs(hat_density(nu, part)(part.barycenters) - slope(part.barycenters)))))
    return _le(name, err, 1e-10)


def c_constant_vanish(config, name):
    meas = config.build_measure()
    e = error_functionals(families.constant(meas), build_partition(meas, 16))
    return _le(name, max(e.H, e.A, e.B), 1e-10)


def c_sqrt_hat(config, name):
    measure, battery, _ = _context(config)
    part = build_partition(measure, 16)
    basis = build_hat_basis(part)
    x = _grid(measure, 2000)
    worst = 0.0
    for f in battery:
        a = sqrt_hat(f, part)(x)
        b = basis.values(x) @ sqrt_cell_integrals(f, part)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return _le(name, worst, 1e-10)


def c_lemma(config, name):
    measure, battery, _ = _context(config)
    if not measure.interval.is_compact:
        return _skip(name, "interval is not compact")
    worst = -math.inf
    for f in battery:
        if f.holder is None:
            continue
        gamma, K = f.holder
        for m in (8, 16, 32):
            part = _partition(config, m)
            fhat = hat_density(cell_masses(f, part), part)
            lhs = l2_distance_sq(f, fhat, measure, points=part.barycenters)
            worst = max(worst, lhs / lemma_l2_bound(gamma, K, f.M, part))
    if worst == -math.inf:
        return _skip(name, "no member declares Holder constants")
    return _le(name, worst, 1.0)


def c_h_slope(config, name):
    measure, battery, _ = _context(config)
    ms = sorted(config.m_list)
    if len(ms) < 2:
        return _skip(name, "fewer than two listed m")
    f = next(f for f in battery if name.endswith("[" + f.name + "]"))
    H = [error_functionals(f, _partition(config, m)).H for m in ms]
    fit = fit_loglog(ms, H)
    if fit.status == "degenerate":
        return _skip(name, "degenerate")
    ok = -1.7 <= fit.slope <= -1.3
    return CheckResult(name, "pass" if ok else "fail", fit.slope, -1.3, detail=f"r2={fit.r2:.6f}")


# --- experiments -----------------------------------------------------------

def _first_member(config):
    measure, battery, _ = _context(config)
    return measure, battery[0]


def c_grouping_gof(config, name):
    measure, f = _first_member(config)
    part = _partition(config, config.verify["kernel_m"])
    x = sample_from_density(measure, f, config.verify["gof_draws"], check_seed(config, name))
    counts = grouping_statistic(x, part)
    p = _chi2_pvalue(counts, cell_probabilities(f, part))
    return CheckResult(name, "pass" if p > 1e-3 else "fail", p, 1e-3)


def c_gaussian_leg(config, name):
    measure, battery, _ = _context(config)
    n = 1000
    worst = 0.0
    for f in battery:
        for m in (8, 32):
            part = _partition(config, m)
            gam = cell_probabilities(f, part)
            roots = sqrt_cell_integrals(f, part)
            lhs = np.sum((2 * np.sqrt(n * gam) - 2 * math.sqrt(n) / math.sqrt(part.cell_mass) * roots) ** 2)
            rhs = 4 * n * error_functionals(f, part).B ** 2
            worst = max(worst, abs(lhs - rhs) / max(rhs, 1e-300) if rhs > 0 else abs(lhs))
    return _le(name, worst, 1e-8)


def c_sampler_determinism(config, name):
    measure, f = _first_member(config)
    seed = check_seed(config, name)
    part = _partition(config, 8)
    a = (sample_from_density(measure, f, 1000, seed), sample_multinomial(cell_probabilities(f, part), 50, seed, 10),
         sample_increments(f, part, 50, seed, 10))
    b = (sample_from_density(measure, f, 1000, seed), sample_multinomial(cell_probabilities(f, part), 50, seed, 10),
         sample_increments(f, part, 50, seed, 10))
    same = all(np.array_equal(u, v) for u, v in zip(a, b))
    return CheckResult(name, "pass" if same else "fail", 0.0 if same else 1.0, 0.0)


# --- kernels ---------------------------------------------------------------

def _fhat_parameter(f, part):
    fh = hat_density(cell_masses(f, part), part)
    return fh, DensityParameter(fh, float(fh.values.min()), float(fh.values.max()), None, "fhat")


def c_composition(config, name):
    measure, f = _first_member(config)
    part = _partition(config, config.verify["kernel_m"])
    fh, par = _fhat_parameter(f, part)
    x = sample_from_density(measure, par, config.verify["gof_draws"], check_seed(config, name))
    p = cell_integrals(fh, part)
    pv = _chi2_pvalue(grouping_statistic(x, part), p / p.sum())
    return CheckResult(name, "pass" if pv > 1e-3 else "fail", pv, 1e-3)


def c_compound_ks(config, name):
    measure, f = _first_member(config)
    v = config.verify
    basis = build_hat_basis(_partition(config, v["kernel_m"]))
    fh, _ = _fhat_parameter(f, basis.partition)
    p = cell_integrals(fh, basis.partition)
    x = compound_kernel_draws(p, v["kernel_n"], basis, v["kernel_draws"], check_seed(config, name))
    ks = _ks(x, lambda t: kernel_marginal_cdf(p, basis, t))
    return _le(name, ks, KS_CRIT_01 / math.sqrt(v["kernel_draws"]))


def c_covariance_identity(config, name):
    measure = config.build_measure()
    basis = build_hat_basis(build_partition(measure, 8))
    t = measure.quantile(np.linspace(0.02, 0.98, 25))
    lhs = basis.partition.cell_mass * basis.cumulative(t).sum(axis=-1)
    return _le(name, float(np.max(np.abs(lhs - measure.cdf(t)))), 1e-8)


def c_ystar_moments(config, name):
    measure, f = _first_member(config)
    v = config.verify
    n, m, paths = v["ystar_n"], v["ystar_m"], v["paths"]
    basis = build_hat_basis(_partition(config, m))
    pairs = _moment_pairs(measure)
    times = np.unique(np.concatenate([pairs[:, 0], pairs[:, 1]]))
    seed = check_seed(config, name)
    inc = sample_increments(f, basis.partition, n, seed, size=paths)
    Y = build_y_star_path(inc, basis, n, GridSpec(times), seed + 1).values
    worst = 0.0
    for s, t in pairs:
        a, b = Y[:, np.searchsorted(times, s)], Y[:, np.searchsorted(times, t)]
        prod = (a - a.mean()) * (b - b.mean())
        se = prod.std(ddof=1) / math.sqrt(paths)
        worst = max(worst, abs(prod.mean() - float(y_star_construction_covariance(basis, n, s, t))) / se)
    return _le(name, worst, 4.0)


def _moment_pairs(measure):
    q = measure.quantile(np.array([0.25, 0.5, 0.75, 1.0]) if measure.interval.is_compact
                         else np.array([0.25, 0.5, 0.75, 0.95]))
    return np.array([(t, t) for t in q] + [(q[0], q[2]), (q[0], q[1]), (q[1], q[3]), (q[0], q[3])])


def c_ystar_variance_formula(config, name):
    measure = config.build_measure()
    basis = build_hat_basis(build_partition(measure, 8))
    if basis.normalization_defect > 1e-8:
        return _skip(name, "hat masses differ from one")
    pairs = _moment_pairs(measure)
    n = 100
    got = np.array([y_star_construction_covariance(basis, n, s, t) for s, t in pairs])
    want = measure.cdf(np.minimum(pairs[:, 0], pairs[:, 1])) / (4 * n)
    return _le(name, float(np.max(np.abs(got - want) / want)), 1e-8)


# --- divergences -----------------------------------------------------------

def c_l1_hellinger(config, name):
    measure, battery, _ = _context(config)
    part = _partition(config, 8)
    worst = -math.inf
    for f in battery:
        fh = hat_density(cell_masses(f, part), part)
        l1, h = l1_and_hellinger(f, fh, measure, points=part.barycenters)
        worst = max(worst, 0.5 * l1 - h)
    return _le(name, worst, 1e-12)


def gaussian_points(count, seed):
    """Latin-hypercube points over means in [-2, 2]^2 and variance ratios in [0.5, 2]."""
    sampler = stats.qmc.LatinHypercube(d=3, seed=np.random.default_rng(seed))
    u = sampler.random(count)
    mu1, mu2 = -2 + 4 * u[:, 0], -2 + 4 * u[:, 1]
    ratio = 0.5 * 4.0 ** u[:, 2]
    return mu1, np.ones(count), mu2, np.sqrt(ratio)


def c_gaussian_tv(config, name):
    mu1, s1, mu2, s2 = gaussian_points(config.verify["tv_points"], check_seed(config, name))
    violations = sum(gaussian_tv_exact(*p) > min(1.0, gaussian_tv_bound(*p)) + 1e-15
                     for p in zip(mu1, s1, mu2, s2))
    return _le(name, float(violations), 0.0)


def c_mc_identical(config, name):
    measure, f = _first_member(config)
    fac = DensityFactor(measure, f)
    r = tv_monte_carlo_product([fac] * 5, [fac] * 5, 2000, check_seed(config, name))
    se = r.standard_error if r.standard_error > 0 else 0.0
    return _le(name, abs(r.value), 3 * se)


def c_tensorization(config, name):
    measure, battery, _ = _context(config)
    part = _partition(config, 8)
    worst = -math.inf
    for f in battery:
        h2 = error_functionals(f, part).H ** 2
        for n in (1, 10, 100, 1000):
            worst = max(worst, (2 - 2 * (1 - h2 / 2) ** n) - n * h2)
    return _le(name, worst, 1e-15)


# --- bounds ----------------------------------------------------------------

def c_bounds_vanish(config, name):
    measure, battery, _ = _context(config)
    part = _partition(config, 8)
    bad = 0
    for f in [families.constant(measure)] + list(battery):
        e = error_functionals(f, part)
        s1, (a4, b4) = step1_bound(f, part, 100, e), step4_parts(f, part, 100, e)
        values = (s1, a4, b4)
        bad += any(v < 0 for v in values)
        bad += (s1 > 1e-9) != (e.H > 1e-11) or (a4 + b4 > 1e-9) != (e.A + e.B > 1e-11)
    return _le(name, bad, 0)


def c_step1_domination(config, name):
    measure, battery, _ = _context(config)
    v = config.verify
    n, part = v["step1_n"], _partition(config, v["step1_m"])
    worst = -math.inf
    for i, f in enumerate(battery):
        _, fh = _fhat_parameter(f, part)
        P, Q = DensityFactor(measure, f), DensityFactor(measure, fh)
        r = tv_monte_carlo_product([P] * n, [Q] * n, v["mc_reps"], check_seed(config, f"{name}:{i}"))
        worst = max(worst, r.value - 3 * r.standard_error - step1_bound(f, part, n))
    return _le(name, worst, 0.0)


def c_gaussian_leg_tv(config, name):
    measure, battery, _ = _context(config)
    n = 1000
    worst = -math.inf
    for f in battery:
        for m in (8, 32):
            part = _partition(config, m)
            d = 2 * np.sqrt(n * cell_probabilities(f, part)) - \
                2 * math.sqrt(n / part.cell_mass) * sqrt_cell_integrals(f, part)
            tv = float(gaussian_tv_exact(0.0, 1.0, float(np.linalg.norm(d)), 1.0))
            worst = max(worst, tv - step4_parts(f, part, n)[1])
    return _le(name, worst, 1e-8)


def c_schedule(config, name):
    if config.m_rule is None or len(config.n_grid) < 2:
        return _skip(name, "no rule-based schedule")
    measure, battery, _ = _context(config)
    totals = [theorem1_total(battery, _partition(config, m_from_rule(n, config.m_rule)), n, config.C_R).total
              for n in config.n_grid]
    return _le(name, float(np.max(np.diff(totals))), -1e-15)


CHECKS = {
    "measure.quantile_roundtrip": c_quantile_roundtrip,
    "measure.power_law_mass": c_power_law_mass,
    "measure.sampler_ks": c_sampler_ks,
    "partition.cell_mass": c_cell_mass,
    "partition.telescoping": c_telescoping,
    "partition.refinement": c_refinement,
    "partition.uniform_closed_form": c_uniform_closed_form,
    "partition.mesh_monotone": c_mesh_monotone,
    "approximation.partition_of_unity": c_partition_of_unity,
    "approximation.interpolation": c_interpolation,
    "approximation.constant_vanish": c_constant_vanish,
    "approximation.sqrt_hat_consistency": c_sqrt_hat,
    "approximation.l2_lemma": c_lemma,
    "experiments.grouping_gof": c_grouping_gof,
    "experiments.gaussian_leg_identity": c_gaussian_leg,
    "experiments.determinism": c_sampler_determinism,
    "kernels.composition_gof": c_composition,
    "kernels.compound_ks": c_compound_ks,
    "kernels.covariance_identity": c_covariance_identity,
    "kernels.ystar_variance_formula": c_ystar_variance_formula,
    "kernels.ystar_moments_mc": c_ystar_moments,
    "divergences.l1_le_hellinger": c_l1_hellinger,
    "divergences.gaussian_tv_bound": c_gaussian_tv,
    "divergences.mc_identical": c_mc_identical,
    "divergences.tensorization": c_tensorization,
    "bounds.nonnegative_vanish": c_bounds_vanish,
    "bounds.step1_domination": c_step1_domination,
    "bounds.gaussian_leg": c_gaussian_leg_tv,
    "bounds.schedule_decreasing": c_schedule,
}
PER_MEMBER = {"measure.membership": c_membership, "approximation.h_slope": c_h_slope}


def check_names(config):
    measure, battery, _ = _context(config)
    names = list(CHECKS)
    for prefix in PER_MEMBER:
        names += [f"{prefix}[{f.name}]" for f in battery]
    return names


def _run_check(args):
    config, name = args
    func = CHECKS.get(name) or PER_MEMBER[name.split("[", 1)[0]]
    start = time.perf_counter()
    try:
        res = func(config, name)
    except Exception as exc:  # a crashing check is a failed check
        res = CheckResult(name, "fail", math.nan, math.nan, detail=f"{type(exc).__name__}: {exc}")
    return CheckResult(res.name, res.status, res.value, res.threshold,
                       time.perf_counter() - start, res.detail)


def run_verification_suite(config, only=None):
    names = check_names(config)
    if only is not None:
        names = [n for n in names if any(n.startswith(o) for o in only)]
    results = map_tasks(_run_check, [(config, n) for n in names], config.workers)
    return SuiteReport(tuple(results))


def write_suite(report, out, gnuplot=False):
    ext = ".dat" if gnuplot else ".csv"
    path = write_csv(os.path.join(out, "verify" + ext), SUITE_FIELDS, report.rows(), gnuplot)
    # timings vary run to run, so they stay out of the CSV
    with open(os.path.join(out, "verify_runtime.txt"), "w") as fh:
        for c in report.checks:
            fh.write(f"{c.name} {c.runtime:.3f}s\n")
    return path


# --- kernel demo -------------------------------------------------------------

KS_FIELDS = ("member", "n", "m", "draws", "ks_statistic", "critical_value", "max_normalization_defect",
             "cell_probability_discrepancy", "passed")
DIAG_FIELDS = ("cell_index", "masses", "f_masses", "fhat_masses")
MOMENT_FIELDS = ("s", "t", "mean_mc", "mean_theory", "cov_mc", "cov_construction", "cov_theory",
                 "standard_error", "z", "passed")


@dataclass(frozen=True)
class KernelDemo:
    ks: dict
    diagnostics: list
    moments: list

    @property
    def passed(self):
        return self.ks["passed"] and all(r["passed"] for r in self.moments)


def run_kernel_demo(config):
    """Kernel-draw KS, ``Y*`` moments and hat-mass diagnostics for the first battery member."""
    measure, battery, _ = _context(config)
    f = battery[0]
    k = config.kernel_demo
    basis = build_hat_basis(_partition(config, k["m"]))
    part = basis.partition
    diag = cell_probability_discrepancy(f, basis)
    fh = hat_density(diag.f_masses, part)
    p = cell_integrals(fh, part)
    x = compound_kernel_draws(p, k["n"], basis, k["draws"], check_seed(config, "kernel_demo.ks"))
    ks = _ks(x, lambda t: kernel_marginal_cdf(p, basis, t))
    crit = KS_CRIT_01 / math.sqrt(k["draws"])
    ks_row = {"member": f.name, "n": k["n"], "m": k["m"], "draws": k["draws"], "ks_statistic": ks,
              "critical_value": crit, "max_normalization_defect": diag.max_normalization_defect,
              "cell_probability_discrepancy": diag.cell_probability_discrepancy, "passed": ks <= crit}
    diag_rows = [{"cell_index": j + 1, "masses": float(diag.masses[j]), "f_masses": float(diag.f_masses[j]),
                  "fhat_masses": float(diag.fhat_masses[j])} for j in range(part.m)]

    n, paths = k["ystar_n"], k["paths"]
    times = np.array(sorted(float(t) for t in k["times"].replace(",", " ").split()))
    if measure.interval.is_compact:
        times = measure.interval.lower + times * (measure.interval.upper - measure.interval.lower)
    seed = check_seed(config, "kernel_demo.ystar")
    inc = sample_increments(f, part, n, seed, size=paths)
    Y = build_y_star_path(inc, basis, n, GridSpec(times), seed + 1).values
    mean_th, _ = y_star_theoretical_moments(f, basis, n, times)
    pairs = [(i, i) for i in range(times.size)] + [(i, j) for i in range(times.size) for j in range(i + 1, times.size)]
    moment_rows = []
    for i, j in pairs:
        a, b = Y[:, i], Y[:, j]
        prod = (a - a.mean()) * (b - b.mean())
        se = float(prod.std(ddof=1) / math.sqrt(paths))
        cc = float(y_star_construction_covariance(basis, n, times[i], times[j]))
        z = (float(prod.mean()) - cc) / se
        moment_rows.append({"s": float(times[i]), "t": float(times[j]), "mean_mc": float(b.mean()),
                            "mean_theory": float(mean_th[j]), "cov_mc": float(prod.mean()),
                            "cov_construction": cc, "cov_theory": float(measure.cdf(times[i])) / (4 * n),
                            "standard_error": se, "z": z, "passed": abs(z) < 4})
    return KernelDemo(ks_row, diag_rows, moment_rows)


def write_kernel_demo(demo, out, gnuplot=False):
    ext = ".dat" if gnuplot else ".csv"
    return [write_csv(os.path.join(out, "kernel_ks" + ext), KS_FIELDS, [demo.ks], gnuplot),
            write_csv(os.path.join(out, "kernel_diagnostics" + ext), DIAG_FIELDS, demo.diagnostics, gnuplot),
            write_csv(os.path.join(out, "ystar_moments" + ext), MOMENT_FIELDS, demo.moments, gnuplot)]
