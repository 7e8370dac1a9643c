#!/usr/bin/env python3
"""Reference computation for the golden preprocessing fixture.

Written independently of the C++ pipeline: it re-derives the cleaned triples,
the pipeline report and the merge-candidate review file from triples.csv,
merge_map.csv and abbreviations.csv using default settings
(min count 3, relabel to "other", similarity threshold 0.6, one consolidation
pass). Run it to regenerate the expected_* files:

    python3 oracle.py
"""

import csv
import json
import re
import sys
from collections import OrderedDict
from functools import lru_cache
from pathlib import Path

HERE = Path(__file__).resolve().parent

MIN_COUNT = 3
OTHER = "other"
THRESHOLD = 0.6


def norm(text):
    text = text.lower().replace("-", " ").replace("_", " ")
    return " ".join(text.split())


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [row for row in csv.reader(fh) if row]


def load_triples():
    triples = []
    for row in read_rows(HERE / "triples.csv"):
        subject, predicate, obj = row[0].strip(), norm(row[1]), row[2].strip()
        paper = row[3].strip() if len(row) > 3 and row[3].strip() else None
        source = row[4].strip() if len(row) > 4 and row[4].strip() else None
        triples.append([subject, predicate, obj, paper, source, 1])
    return triples


def weighted_counts(triples):
    counts = {}
    for t in triples:
        counts[t[1]] = counts.get(t[1], 0) + t[5]
    return counts


@lru_cache(maxsize=None)
def edit_distance(a, b):
    if not a:
        return len(b)
    if not b:
        return len(a)
    if a[0] == b[0]:
        return edit_distance(a[1:], b[1:])
    return 1 + min(edit_distance(a[1:], b), edit_distance(a, b[1:]),
                   edit_distance(a[1:], b[1:]))


def main():
    triples = load_triples()
    merge_map = {norm(r[0]): norm(r[1]) for r in read_rows(HERE / "merge_map.csv")}
    abbrev = {norm(r[0]): r[1].strip() for r in read_rows(HERE / "abbreviations.csv")}

    before = weighted_counts(triples)
    mass_in = sum(t[5] for t in triples)
    count_in = len(triples)

    # Stage I: rare relations below MIN_COUNT become OTHER.
    rare = sorted(p for p, c in before.items() if c < MIN_COUNT and p != OTHER)
    for t in triples:
        if t[1] in rare:
            t[1] = OTHER

    # Merge candidates are proposed over the labels entering stage II.
    labels = sorted({t[1] for t in triples})
    candidates = []
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            score = 1 - edit_distance(a, b) / max(len(a), len(b))
            if score >= THRESHOLD:
                candidates.append((a, b, score))
    candidates.sort(key=lambda c: (-c[2], c[0], c[1]))

    # Stage II: curated merge map.
    present = {t[1] for t in triples}
    merged = sorted(v for v in merge_map if v in present)
    for t in triples:
        t[1] = merge_map.get(t[1], t[1])

    # Stage III: exact-match dedup on normalized keys, summing multiplicity.
    kept = OrderedDict()
    for t in triples:
        key = (norm(t[0]), t[1], norm(t[2]))
        if key in kept:
            kept[key][5] += t[5]
        else:
            kept[key] = list(t)
    out = list(kept.values())
    duplicates_removed = len(triples) - len(out)

    # Stage IV: abbreviation coverage.
    missing = sorted({t[1] for t in out} - set(abbrev))

    report = {
        "relations_consolidated": len(rare),
        "relations_merged": len(merged),
        "duplicates_removed": duplicates_removed,
        "labels_missing_abbrev": len(missing),
        "missing_abbreviations": missing,
        "triples_in": count_in,
        "triples_out": len(out),
        "mass_in": mass_in,
        "mass_out": sum(t[5] for t in out),
        "frequency_before": before,
        "frequency_after": weighted_counts(out),
        "stages_run": [1, 2, 3, 4],
    }

    with open(HERE / "expected_report.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False))
        fh.write("\n")

    with open(HERE / "expected_triples.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for t in out:
            writer.writerow([t[0], t[1], t[2], t[3] or "", t[4] or "", t[5]])

    with open(HERE / "expected_merge_candidates.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for a, b, score in candidates:
            writer.writerow([a, b, "%.6f" % score])

    print("triples %d -> %d, duplicates removed %d, missing %s"
          % (count_in, len(out), duplicates_removed, missing), file=sys.stderr)


if __name__ == "__main__":
    main()
