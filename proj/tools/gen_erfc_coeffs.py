#!/usr/bin/env python3
"""Generates the Chebyshev coefficients used by the vectorized erfc kernel.

For z >= 0 with t = 2/(2+z) and x = 2t - 1 in (-1, 1]:
    erfc(z) = t * exp(-z^2 + g(x)),   g(x) = sum_k c_k T_k(x)
The coefficients are computed at high precision from Chebyshev nodes.
"""
import sys

import mpmath as mp

mp.mp.dps = 60
TERMS = int(sys.argv[1]) if len(sys.argv) > 1 else 30
NODES = 128


def g(x):
    t = (x + 1) / 2
    z = 2 / t - 2
    return mp.log(mp.erfc(z) / t) + z * z


coeffs = []
for k in range(TERMS):
    s = mp.mpf(0)
    for j in range(NODES):
        theta = mp.pi * (j + mp.mpf(1) / 2) / NODES
        s += g(mp.cos(theta)) * mp.cos(k * theta)
    coeffs.append(2 * s / NODES)
coeffs[0] /= 2

print("// Generated by tools/gen_erfc_coeffs.py; do not edit.")
print("inline constexpr double kErfcCheb[%d] = {" % TERMS)
for c in coeffs:
    print("    %s," % mp.nstr(c, 20, min_fixed=-1, max_fixed=-1))
print("};")
