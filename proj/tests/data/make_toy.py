#!/usr/bin/env python3
"""Regenerates tests/data/toy: a 30-node planted-partition graph with 3 classes
and 12 binary features, class c favouring features 4c..4c+3. Node 29 is isolated."""
import json
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent / "toy"
N, F, C = 30, 12, 3

rng = random.Random(2024)
labels = [i % C for i in range(N)]
edges = set()
for u in range(N - 1):
    for v in range(u + 1, N - 1):
        p = 0.35 if labels[u] == labels[v] else 0.03
        if rng.random() < p:
            edges.add((u, v))
features = []
for i in range(N):
    for j in range(F):
        p = 0.6 if j // 4 == labels[i] else 0.1
        if rng.random() < p:
            features.append((i, j))

order = list(range(N))
train = sorted([i for i in order if i < 2 * C])
val = sorted(order[2 * C:2 * C + 6])
test = sorted(order[2 * C + 6:])

OUT.mkdir(exist_ok=True)
meta = {"name": "toy", "num_classes": C, "num_features": F, "num_nodes": N}
(OUT / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
(OUT / "edges.csv").write_text("".join(f"{u},{v}\n" for u, v in sorted(edges)))
(OUT / "features.csv").write_text("".join(f"{i},{j},1\n" for i, j in features))
(OUT / "labels.csv").write_text("".join(f"{i},{labels[i]}\n" for i in range(N)))
split = {"test": test, "train": train, "val": val}
(OUT / "split.json").write_text(json.dumps(split, separators=(",", ":")) + "\n")
