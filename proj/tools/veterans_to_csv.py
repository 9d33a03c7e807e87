#!/usr/bin/env python3
"""Convert the Veterans' Administration lung cancer ARFF file to the dataset CSV layout.

Six features: treatment (standard 0, test 1), cell type as the integer code of
the original study (squamous 1, smallcell 2, adeno 3, large 4), Karnofsky
score, months from diagnosis, age, prior therapy (no 0, yes 1).

usage: veterans_to_csv.py veteran.arff data/veterans.csv
"""
import csv
import sys

CELLTYPE = {"squamous": 1, "smallcell": 2, "adeno": 3, "large": 4}


def main(src, dst):
    rows = []
    in_data = False
    with open(src) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            if line.lower() == "@data":
                in_data = True
                continue
            if in_data:
                rows.append([v.strip() for v in line.split(",")])
    out = []
    for treat, cell, days, status, karno, months, age, prior in rows:
        feats = [
            1.0 if treat == "test" else 0.0,
            float(CELLTYPE[cell]),
            float(karno),
            float(months),
            float(age),
            1.0 if prior == "yes" else 0.0,
        ]
        out.append(feats + [float(days), 1 if status == "dead" else 0])
    with open(dst, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([f"f{j}" for j in range(6)] + ["time", "event"])
        for r in out:
            w.writerow([f"{v:g}" if isinstance(v, float) else v for v in r])
    print(f"{len(out)} records, {sum(r[-1] for r in out)} events", file=sys.stderr)


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
