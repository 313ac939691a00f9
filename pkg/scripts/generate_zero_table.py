#!/usr/bin/env python3
"""Regenerate the bundled zeta-zero constants table.

For each nontrivial zero rho_i = 1/2 + i*z_i of the Riemann zeta function
this emits one line ``z a b`` where

    z = Im(rho_i)
    a = 1 / |rho_i * zeta'(rho_i)|
    b = -arg(rho_i * zeta'(rho_i))        (always in [-pi, pi))

All three are printed with 30 significant digits, computed with mpmath at
45-digit working precision.  Any arbitrary-precision package exposing
zeta, its derivative, and zero localization can reproduce the file; only
the printed digits are contractual.

Usage:  python3 scripts/generate_zero_table.py [count] [outfile]
"""

import sys
from multiprocessing import Pool

import mpmath as mp

DPS = 45
OUT_DIGITS = 30


def one_entry(i):
    mp.mp.dps = DPS
    rho = mp.zetazero(i)
    w = rho * mp.zeta(rho, derivative=1)
    a = 1 / abs(w)
    b = -mp.arg(w)  # arg in (-pi, pi] so b lands in [-pi, pi)
    fmt = lambda v: mp.nstr(v, OUT_DIGITS, strip_zeros=False)
    return i, f"{fmt(rho.imag)} {fmt(a)} {fmt(b)}"


def main():
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
    out = sys.argv[2] if len(sys.argv) > 2 else "src/mertens/data/zeros_2000.txt"
    with Pool() as pool:
        rows = dict(pool.imap_unordered(one_entry, range(1, count + 1), chunksize=25))
    with open(out, "w") as f:
        f.write("# Riemann zeta zero constants: z  a=1/|rho*zeta'(rho)|  b=-arg(rho*zeta'(rho))\n")
        f.write(f"# provenance: mpmath {mp.__version__}, dps={DPS}, printed to {OUT_DIGITS} significant digits\n")
        f.write(f"# count: {count}\n")
        for i in range(1, count + 1):
            f.write(rows[i] + "\n")
    print(f"wrote {count} entries to {out}")


if __name__ == "__main__":
    main()
