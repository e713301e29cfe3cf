"""Exact total variation between two normals against the Hellinger-type bound.

Run: python demos/gaussian_tv.py
"""
from densequiv import gaussian_hellinger_sq, gaussian_tv_bound, gaussian_tv_exact

pairs = [(0.0, 1.0, 0.5, 1.0), (0.0, 1.0, 0.0, 1.5), (0.0, 1.0, 2.0, 0.7), (-1.0, 0.5, 1.0, 2.0)]
print(f"{'mu1':>5} {'s1':>5} {'mu2':>5} {'s2':>5} {'TV':>9} {'bound':>9} {'H^2':>9}")
for p in pairs:
    print(f"{p[0]:5.1f} {p[1]:5.1f} {p[2]:5.1f} {p[3]:5.1f} "
          f"{gaussian_tv_exact(*p):9.5f} {min(1.0, gaussian_tv_bound(*p)):9.5f} {gaussian_hellinger_sq(*p):9.5f}")
