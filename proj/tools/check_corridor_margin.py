#!/usr/bin/env python3
"""Run `tiltrotor corridor` at two margins and check the margined area shrinks."""

import csv
import subprocess
import sys
import tempfile
from pathlib import Path


def area(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    total = 0.0
    for a, b in zip(rows, rows[1:]):
        w0 = float(a["upper_tilt_deg"]) - float(a["lower_tilt_deg"])
        w1 = float(b["upper_tilt_deg"]) - float(b["lower_tilt_deg"])
        total += 0.5 * (w0 + w1) * (float(b["v_ms"]) - float(a["v_ms"]))
    return total


def main():
    exe = sys.argv[1]
    margins = [float(m) for m in (sys.argv[2:] or ["0", "0.2"])]
    with tempfile.TemporaryDirectory() as tmp:
        areas = []
        for m in margins:
            out = Path(tmp) / f"corridor_{m}.csv"
            subprocess.run([exe, "corridor", "--margin", str(m), "-o", str(out)],
                           check=True, stdout=subprocess.DEVNULL)
            areas.append(area(out))
    for m, a in zip(margins, areas):
        print(f"margin {m:g}: margined area {a:.3f} deg*m/s")
    ok = all(b <= a for a, b in zip(areas, areas[1:]))
    print("PASS" if ok else "FAIL", "area non-increasing with margin")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
