#!/usr/bin/env python3
"""Standalone panel checker: parse a locus,allele,frequency CSV and verify
per-locus sums with exact decimal arithmetic.  Independent of the C++ parser.

Prints one line per locus plus a sha256 of the file; exits 1 on any problem.
"""
import csv
import hashlib
import sys
from collections import OrderedDict
from decimal import Decimal


def main(path):
    raw = open(path, "rb").read()
    sums = OrderedDict()
    counts = {}
    ok = True
    with open(path, newline="", encoding="utf-8-sig") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != ["locus", "allele", "frequency"]:
            print("bad header", header)
            return 1
        for row in reader:
            if not row:
                continue
            locus, allele, freq = row
            int(allele)
            value = Decimal(freq)
            if not (Decimal(0) < value <= Decimal(1)):
                print("bad frequency", row)
                ok = False
            sums[locus] = sums.get(locus, Decimal(0)) + value
            counts[locus] = counts.get(locus, 0) + 1
    for locus, total in sums.items():
        good = abs(total - 1) <= Decimal("1e-9")
        ok &= good
        print(f"{locus} alleles={counts[locus]} sum={total} {'ok' if good else 'BAD'}")
    print(f"loci={len(sums)} sha256={hashlib.sha256(raw).hexdigest()}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1] if len(sys.argv) > 1 else "data/default_panel.csv"))
