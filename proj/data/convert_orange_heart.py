"""Rebuild processed.cleveland.data from the Orange3 copy of the Cleveland table.

Orange ships the 303 Cleveland rows with categorical attributes spelled out
and the diagnosis collapsed to 0/1. This script restores the UCI numeric
coding. The `num` column therefore holds 0/1 rather than the original 0..4
severity grade; binary targets are unaffected (num > 0 -> 1).

usage: python3 convert_orange_heart.py heart_disease.tab > processed.cleveland.data
"""
import csv
import sys

CODES = {
    1: {"female": "0.0", "male": "1.0"},
    2: {"typical ang": "1.0", "atypical ang": "2.0", "non-anginal": "3.0", "asymptomatic": "4.0"},
    6: {"normal": "0.0", "ST-T abnormal": "1.0", "left vent hypertrophy": "2.0"},
    10: {"upsloping": "1.0", "flat": "2.0", "downsloping": "3.0"},
    12: {"normal": "3.0", "fixed defect": "6.0", "reversable defect": "7.0"},
}


def fmt(col, tok):
    if tok == "?":
        return "?"
    if col in CODES:
        return CODES[col][tok]
    if col == 13:
        return str(int(tok))
    return repr(float(tok))


def main(path):
    rows = list(csv.reader(open(path), delimiter="\t"))[3:]
    out = csv.writer(sys.stdout, lineterminator="\n")
    for r in rows:
        out.writerow([fmt(c, t) for c, t in enumerate(r)])


if __name__ == "__main__":
    main(sys.argv[1])
