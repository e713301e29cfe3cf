"""The eleven acceptance criteria, each at its stated tolerance and time budget."""
import math
import time

import numpy as np
import pytest
from scipy import stats

from densequiv import (DensityParameter, GridSpec, build_hat_basis, build_partition, build_y_star_path,
                       carter_bound, cell_integrals, cell_masses, compound_kernel_draws, error_functionals,
                       exponential, families, gaussian_tv_bound, gaussian_tv_exact, hat_density,
                       l2_distance_sq, power_law, sample_increments, step1_bound, theorem1_total,
                       tv_monte_carlo_product, uniform, DensityFactor)
from densequiv.harness.cli import main
from densequiv.harness.config import m_from_rule
from densequiv.harness.suite import gaussian_points

from acceptance_log import record
from oracles import gaussian_tv, integrate

KS_CRIT_01 = 1.628


def sin_member(measure=None):
    return families.sinusoidal(measure or uniform(), 0.3, 1.0, name="sin")


def uniform_cells(m):
    v = np.linspace(0.0, 1.0, m + 1)
    return v, 0.5 * (v[1:] + v[:-1])


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_criterion_01_partition_cell_masses():
    # closed-form CDFs, independent of the package tables
    cases = {
        "uniform": (uniform(), lambda x: x, 1.0),
        "power_law(2)": (power_law(2.0), lambda x: x ** 2 / 2, 0.5),
        "power_law(0.5)": (power_law(0.5), lambda x: 2 * np.sqrt(x), 2.0),
        "exponential": (exponential(), lambda x: -np.expm1(-x), 1.0),
    }
    worst = 0.0
    with Timer() as t:
        for meas, cdf, total in cases.values():
            for m in (2, 8, 64):
                part = build_partition(meas, m)
                cum = np.concatenate([[0.0], cdf(part.breakpoints), [total]])
                dev = np.abs(np.diff(cum) - total / m) / (total / m)
                worst = max(worst, float(dev.max()))
    ok = record(1, "equal cell masses", worst < 1e-8, f"max rel deviation {worst:.2e} < 1e-8", t.elapsed, 5)
    assert ok


def test_criterion_02_partition_of_unity():
    grids = {"uniform": (uniform(), np.linspace(0.0, 1.0, 10_000)),
             "exponential": (exponential(), np.linspace(0.0, 40.0, 10_000))}
    worst = 0.0
    with Timer() as t:
        for meas, x in grids.values():
            basis = build_hat_basis(build_partition(meas, 16))
            s = basis.partition.cell_mass * basis.values(x).sum(axis=-1)
            worst = max(worst, float(np.max(np.abs(s - 1.0))))
    ok = record(2, "partition of unity", worst < 1e-9, f"max |sum - 1| {worst:.2e} < 1e-9", t.elapsed, 5)
    assert ok


def test_criterion_03_l2_lemma():
    battery = families.holder_battery(uniform(), 20)
    worst, cases = 0.0, 0
    with Timer() as t:
        for f in battery:
            gamma, K = f.holder
            assert gamma == 1.0 and K <= 2 and f.kappa >= 0.5 and f.M <= 2
            for m in (8, 16, 32):
                v, xs = uniform_cells(m)
                mu = ell = 1.0 / m
                nu = np.array([integrate(f, [a, b], sub=8) for a, b in zip(v[:-1], v[1:])])
                fhat = lambda x, nu=nu, xs=xs: np.interp(x, xs, nu / mu)  # noqa: E731
                lhs = integrate(lambda x: (f(x) - fhat(x)) ** 2, np.unique(np.concatenate([v, xs])), sub=8)
                part = build_partition(uniform(), m)
                pkg = l2_distance_sq(f, hat_density(cell_masses(f, part), part), uniform(), part.barycenters)
                np.testing.assert_allclose(pkg, lhs, rtol=1e-8)
                rhs = 2 * mu * (3 * K * ell ** (1 + gamma) + f.M * ell) ** 2 + 18 * K ** 2 * ell ** (2 + 2 * gamma)
                worst = max(worst, lhs / rhs)
                cases += 1
    ok = record(3, "L2 lemma inequality", worst <= 1.0,
                f"{cases} cases, max lhs/rhs {worst:.3e} <= 1", t.elapsed, 60)
    assert ok


def test_criterion_04_rate_slopes():
    ms = np.array([8, 16, 32, 64, 128])
    with Timer() as t:
        f = sin_member()
        errs = np.array([[getattr(error_functionals(f, build_partition(uniform(), m)), k) for k in "HAB"]
                         for m in ms])
        slopes = {k: float(np.polyfit(np.log(ms), np.log(errs[:, i]), 1)[0]) for i, k in enumerate("HAB")}
    inside = {k: -1.7 <= s <= -1.3 for k, s in slopes.items()}
    detail = ", ".join(f"{k} {s:.3f}{'' if inside[k] else ' (outside)'}" for k, s in slopes.items())
    ok = record(4, "log-log slopes in [-1.7, -1.3]", all(inside.values()), detail, t.elapsed, 60)
    assert ok, f"slopes outside the window: {slopes}"


def test_criterion_05_ystar_moments():
    n, m, paths = 100, 8, 200_000
    times = np.array([0.25, 0.5, 0.75, 1.0])
    with Timer() as t:
        basis = build_hat_basis(build_partition(uniform(), m))
        inc = sample_increments(sin_member(), basis.partition, n, 20240601, size=paths)
        Y = build_y_star_path(inc, basis, n, GridSpec(times), 20240602).values
        Yc = Y - Y.mean(axis=0)
        z = []
        for i, s in enumerate(times):
            sq = Yc[:, i] ** 2
            z.append(abs(sq.mean() - s / (4 * n)) / (sq.std(ddof=1) / math.sqrt(paths)))
        prod = Yc[:, 0] * Yc[:, 2]
        z.append(abs(prod.mean() - 0.25 / (4 * n)) / (prod.std(ddof=1) / math.sqrt(paths)))
    worst = max(z)
    ok = record(5, "Y* variance and covariance", worst < 4,
                "z-scores " + ", ".join(f"{v:.2f}" for v in z) + " < 4", t.elapsed, 120)
    assert ok


def mixture_cdf(p, m):
    """Exact CDF of ``sum_j p_j u_j`` on uniform [0, 1]: a piecewise-linear density with flat ends."""
    _, xs = uniform_cells(m)
    knots = np.concatenate([[0.0], xs, [1.0]])
    vals = np.interp(knots, xs, p * m)
    cum = np.concatenate([[0.0], np.cumsum(np.diff(knots) * 0.5 * (vals[1:] + vals[:-1]))])

    def cdf(x):
        k = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, knots.size - 2)
        d = np.interp(x, xs, p * m)
        return cum[k] + (x - knots[k]) * 0.5 * (vals[k] + d)
    return cdf


def test_criterion_06_kernel_marginal():
    n, m, draws = 200, 8, 100_000
    with Timer() as t:
        basis = build_hat_basis(build_partition(uniform(), m))
        fhat = hat_density(cell_masses(sin_member(), basis.partition), basis.partition)
        p = cell_integrals(fhat, basis.partition)
        x = np.sort(compound_kernel_draws(p, n, basis, draws, 20240603))
        F = mixture_cdf(p / p.sum(), m)(x)
        k = np.arange(1, draws + 1) / draws
        ks = float(max(np.max(k - F), np.max(F - k + 1 / draws)))
    crit = KS_CRIT_01 / math.sqrt(draws)
    ok = record(6, "compound kernel KS", ks < crit, f"KS {ks:.5f} < {crit:.5f}", t.elapsed, 60)
    assert ok


def test_criterion_07_gaussian_tv():
    mu1, s1, mu2, s2 = gaussian_points(1000, 20240604)
    with Timer() as t:
        exact = np.array([gaussian_tv_exact(*q) for q in zip(mu1, s1, mu2, s2)])
        bound = np.array([gaussian_tv_bound(*q) for q in zip(mu1, s1, mu2, s2)])
    violations = int(np.sum(exact > np.minimum(1.0, bound)))
    ref = np.array([gaussian_tv(*q) for q in zip(mu1, s1, mu2, s2)])
    err = float(np.max(np.abs(exact - ref)))
    ok = record(7, "Gaussian TV exact vs bound and oracle", violations == 0 and err < 1e-6,
                f"{violations} violations, max |exact - oracle| {err:.1e} < 1e-6", t.elapsed, 10)
    assert ok


def test_criterion_08_step1_domination():
    n, m, reps = 50, 32, 100_000
    meas = uniform()
    with Timer() as t:
        f = sin_member(meas)
        part = build_partition(meas, m)
        fh = hat_density(cell_masses(f, part), part)
        q = DensityParameter(fh, float(fh.values.min()), float(fh.values.max()), None, "fhat")
        r = tv_monte_carlo_product([DensityFactor(meas, f)] * n, [DensityFactor(meas, q)] * n, reps, 20240605)
        bound = step1_bound(f, part, n)
    ok = record(8, "step-1 Monte Carlo domination", r.value <= bound + 3 * r.standard_error,
                f"TV {r.value:.5f} <= {bound:.5f} + 3 SE ({r.standard_error:.1e})", t.elapsed, 120)
    assert ok


def test_criterion_09_gaussian_leg_identity():
    n = 1000
    battery = families.sinusoidal_battery(uniform()) + families.holder_battery(uniform(), 20)
    worst = 0.0
    with Timer() as t:
        for f in battery:
            for m in (8, 32):
                v, _ = uniform_cells(m)
                mu = 1.0 / m
                gam = np.array([integrate(f, [a, b], sub=4) for a, b in zip(v[:-1], v[1:])])
                rt = np.array([integrate(lambda x: np.sqrt(f(x)), [a, b], sub=4) for a, b in zip(v[:-1], v[1:])])
                lhs = np.sum((2 * np.sqrt(n * gam) - 2 * math.sqrt(n) / math.sqrt(mu) * rt) ** 2)
                B = error_functionals(f, build_partition(uniform(), m)).B
                worst = max(worst, abs(lhs - 4 * n * B ** 2) / (4 * n * B ** 2))
    ok = record(9, "Gaussian-leg identity", worst < 1e-8,
                f"{len(battery) * 2} cases, max rel error {worst:.1e} < 1e-8", t.elapsed, 10)
    assert ok


def test_criterion_10_theorem_assembly():
    ns = (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6)
    with Timer() as t:
        battery = families.sinusoidal_battery(uniform())
        totals = []
        for n in ns:
            m = math.ceil(round(n ** 0.4, 9))
            assert m == m_from_rule(n, 0.4)
            r = theorem1_total(battery, build_partition(uniform(), m), n, C_R=1.0)
            assert r.term_carter == pytest.approx(carter_bound(m, n))
            totals.append(r.total)
    ok = record(10, "bound total decreasing in n", bool(np.all(np.diff(totals) < 0)),
                "totals " + ", ".join(f"{v:.4f}" for v in totals), t.elapsed, 60)
    assert ok


def test_criterion_11_determinism(tmp_path):
    outputs = {}
    with Timer() as t:
        for workers in (1, 8):
            out = tmp_path / f"w{workers}"
            for cmd in ("rate-study", "verify"):
                assert main([cmd, "--seed", "20240601", "--workers", str(workers), "--out", str(out)]) == 0
            outputs[workers] = {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}
    same = outputs[1] == outputs[8] and len(outputs[1]) == 4
    ok = record(11, "byte-identical CSVs at 1 and 8 workers", same,
                f"{len(outputs[1])} files: " + ", ".join(outputs[1]), t.elapsed, 120)
    assert ok
