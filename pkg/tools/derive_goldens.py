"""Recompute the frozen reference values in tests/goldens/derived.json.

Everything here uses the standard library only (itertools, fractions) and
none of the package code, so the frozen numbers are an independent check.
Run with ``--write`` to overwrite the committed file; without it the script
prints a diff against the committed values.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
from fractions import Fraction
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "tests" / "goldens" / "derived.json"

ORDER = ["a", "c", "e", "b", "d", "f"]

# printed adjacency matrices, rows/columns ordered a, c, e, b, d, f
U_P = [
    [0, 0, 0, 0.0097 - 0.0315j, 0.0277 - 0.0055j, 0.0114 + 0.0218j],
    [0, 0, 0, -0.1110 + 0.0133j, -0.0367 - 0.0074j, 0.0066 + 0.0125j],
    [0, 0, 0, -0.0024 - 0.0382j, -0.0347 + 0.0959j, 0.0019 - 0.0328j],
    [0.0097 - 0.0315j, -0.1110 + 0.0133j, -0.0024 - 0.0382j, 0, 0, 0],
    [0.0277 - 0.0055j, -0.0367 - 0.0074j, -0.0347 + 0.0959j, 0, 0, 0],
    [0.0114 + 0.0218j, 0.0066 + 0.0125j, 0.0019 - 0.0328j, 0, 0, 0],
]
# the (e, b) entry is printed without its "i" once; the symmetric copy has it
U_H = [
    [0, 0.0277 - 0.0055j, 0.0114 + 0.0218j, 0.0097 - 0.0315j, 0, -0.1110 + 0.0133j],
    [0.0277 - 0.0055j, 0, 0, 0, -0.0367 - 0.0074j, -0.0024 - 0.0382j],
    [0.0114 + 0.0218j, 0, 0, -0.0347 + 0.0959j, 0.0019 - 0.0328j, 0],
    [0.0097 - 0.0315j, 0, -0.0347 + 0.0959j, 0, 0, 0],
    [0, -0.0367 - 0.0074j, 0.0019 - 0.0328j, 0, 0, 0.0066 + 0.0125j],
    [-0.1110 + 0.0133j, -0.0024 - 0.0382j, 0, 0, 0.0066 + 0.0125j, 0],
]


def pairings(idx):
    if not idx:
        yield []
        return
    first, rest = idx[0], idx[1:]
    for k, other in enumerate(rest):
        for tail in pairings(rest[:k] + rest[k + 1 :]):
            yield [(first, other)] + tail


def haf(u, idx):
    return sum(math.prod(u[i][j] for i, j in p) for p in pairings(list(idx)))


def perm(u, rows, cols):
    return sum(math.prod(u[r][c] for r, c in zip(rows, pi)) for pi in itertools.permutations(cols))


def histogram(u, bipartite):
    probs = {}
    for sub in itertools.combinations("abcdef", 4):
        idx = [ORDER.index(p) for p in sub]
        if bipartite:
            rows = [i for i in idx if i < 3]
            cols = [i for i in idx if i >= 3]
            amp = perm(u, rows, cols) if len(rows) == len(cols) else 0
        else:
            amp = haf(u, idx)
        probs["".join(sub)] = abs(amp) ** 2
    total = sum(probs.values())
    return {k: v / total for k, v in probs.items()}, total


def binom(m, n):
    return Fraction(math.comb(m, n))


def rates(m, n, p):
    p = Fraction(p)
    r_ss = binom(m, n) * p**n * (1 - p) ** (m - n)
    r_pi = binom(m, n) ** 2 * math.factorial(n) * p**n * (1 - p) ** (m * m - n)
    return {"R_BS": float(p**n), "R_SS": float(r_ss), "R_PI": float(r_pi), "ratio": float(r_pi / r_ss)}


def derive() -> dict:
    hp, tp = histogram(U_P, True)
    hh, th = histogram(U_H, False)
    return {
        "perm_histogram": hp,
        "perm_raw_total": tp,
        "haf_histogram": hh,
        "haf_raw_total": th,
        "perm_abcd_probability": abs(perm(U_P, [0, 1], [3, 4])) ** 2,
        "haf_abce_probability": abs(haf(U_H, [0, 3, 1, 2])) ** 2,
        "rates": {
            "13,3,0.01": rates(13, 3, Fraction(1, 100)),
            "12,5,0.01": rates(12, 5, Fraction(1, 100)),
            "3,2,0.01": rates(3, 2, Fraction(1, 100)),
        },
        # K_{4,4}: C(4,3)^2 six-path subsets, each with 3! perfect matchings
        "combinatorial_4_3": {"subsets": math.comb(4, 3) ** 2, "matchings": math.factorial(3)},
    }


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--write", action="store_true", help="overwrite the committed goldens")
    args = ap.parse_args()
    data = derive()
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if args.write:
        OUT.write_text(text)
        print(f"wrote {OUT}")
    elif OUT.exists() and OUT.read_text() == text:
        print("goldens up to date")
    else:
        print("goldens differ from the committed file; rerun with --write to replace them")


if __name__ == "__main__":
    main()
