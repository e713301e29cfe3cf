"""Discretisation errors and the assembled bound for a smooth density on [0, 1].

Run: python demos/rate_study.py
"""
import math

import numpy as np

from densequiv import build_partition, error_functionals, families, theorem1_total, uniform

measure = uniform()
f = families.sinusoidal(measure, amplitude=0.3, frequency=1.0)

print("Error functionals for f = 1 + 0.3 sin(2 pi x)")
print(f"{'m':>5} {'H':>12} {'A':>12} {'B':>12}")
ms = np.array([8, 16, 32, 64, 128])
rows = []
for m in ms:
    e = error_functionals(f, build_partition(measure, m))
    rows.append((e.H, e.A, e.B))
    print(f"{m:>5} {e.H:12.4e} {e.A:12.4e} {e.B:12.4e}")

rows = np.array(rows)
for i, name in enumerate("HAB"):
    slope = np.polyfit(np.log(ms), np.log(rows[:, i]), 1)[0]
    print(f"log-log slope of {name} vs m: {slope:.3f}")
# H and A decay like m^-1.5 because of the two boundary cells; B is a
# cell-wise Jensen gap with no boundary term and decays like m^-2.

print("\nBound total with m = ceil(n^0.4) for the sinusoidal battery")
battery = families.sinusoidal_battery(measure)
for n in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
    m = math.ceil(round(n ** 0.4, 9))
    r = theorem1_total(battery, build_partition(measure, m), n)
    print(f"n={n:>8} m={m:>4} discretisation={r.term_discretization:.4f} "
          f"carter={r.term_carter:.4f} total={r.total:.4f}")
