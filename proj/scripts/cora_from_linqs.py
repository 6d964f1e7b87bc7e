#!/usr/bin/env python3
# Copyright 2026 The ptsearch Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds the bundled data/cora directory from the LINQS cora.content/cora.cites pair.

The LINQS release carries no train/val/test split, so one is drawn with a fixed
seed: 1000 test and 500 validation nodes, then either 20 labeled nodes per class
(splits.json) or every remaining node (splits.full.json, 1208 train nodes).
"""

import argparse
import json
import os
import random
import sys


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--content", required=True)
    ap.add_argument("--cites", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ids, rows, raw_labels = [], [], []
    with open(args.content) as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            ids.append(parts[0])
            rows.append(parts[1:-1])
            raw_labels.append(parts[-1])
    index = {pid: i for i, pid in enumerate(ids)}
    classes = sorted(set(raw_labels))
    labels = [classes.index(c) for c in raw_labels]
    n, d = len(ids), len(rows[0])

    raw_edges = 0
    edges = set()
    with open(args.cites) as f:
        for line in f:
            parts = line.split()
            if len(parts) != 2:
                continue
            raw_edges += 1
            u, v = index[parts[0]], index[parts[1]]
            if u == v:
                continue
            edges.add((min(u, v), max(u, v)))

    rng = random.Random(args.seed)
    perm = list(range(n))
    rng.shuffle(perm)
    test = sorted(perm[:1000])
    val = sorted(perm[1000:1500])
    rest = perm[1500:]
    per_class = {c: 0 for c in range(len(classes))}
    small_train = []
    for i in rest:
        if per_class[labels[i]] < 20:
            per_class[labels[i]] += 1
            small_train.append(i)

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "meta.json"), "w") as f:
        json.dump({"name": "cora", "num_nodes": n, "num_features": d,
                   "num_classes": len(classes)}, f)
    with open(os.path.join(args.out, "graph.edges"), "w") as f:
        for u, v in sorted(edges):
            f.write(f"{u} {v}\n")
    with open(os.path.join(args.out, "features.csv"), "w") as f:
        for r in rows:
            f.write(",".join(r) + "\n")
    with open(os.path.join(args.out, "labels.csv"), "w") as f:
        for y in labels:
            f.write(f"{y}\n")
    with open(os.path.join(args.out, "splits.json"), "w") as f:
        json.dump({"train": sorted(small_train), "val": val, "test": test}, f)
    with open(os.path.join(args.out, "splits.full.json"), "w") as f:
        json.dump({"train": sorted(rest), "val": val, "test": test}, f)

    json.dump({"N": n, "E_raw": raw_edges, "E_dedup": len(edges), "d": d,
               "c": len(classes)}, sys.stdout)
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
