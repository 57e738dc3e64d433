#!/usr/bin/env python3
"""Converts the Cora, Citeseer and Pubmed citation graphs into the layout read
by `cola` and the acceptance suite:

    data/<name>/edges.txt       one "u v" pair per line, 0-based
    data/<name>/attributes.csv  one dense row per node, no header

Two source layouts are accepted:

    Planetoid pickles   ind.<name>.{x,tx,allx,graph,test.index}
    LINQS archives      <name>.cites and <name>.content (Cora and Citeseer)

With --download the Planetoid files are fetched first; otherwise point
--source at a directory that already holds them.

    python3 tools/fetch_planetoid.py cora --source ~/planetoid/data
    python3 tools/fetch_planetoid.py citeseer pubmed --download
"""
import argparse
import pickle
import sys
import urllib.request
from pathlib import Path

import numpy as np
import scipy.sparse as sp

PLANETOID_URL = "https://github.com/kimiyoung/planetoid/raw/master/data"
PLANETOID_PARTS = ("x", "tx", "allx", "graph", "test.index")
EXPECTED_NODES = {"cora": 2708, "citeseer": 3327, "pubmed": 19717}


def download(name, dest):
    dest.mkdir(parents=True, exist_ok=True)
    for part in PLANETOID_PARTS:
        target = dest / f"ind.{name}.{part}"
        if target.exists():
            continue
        url = f"{PLANETOID_URL}/ind.{name}.{part}"
        print(f"fetching {url}", file=sys.stderr)
        urllib.request.urlretrieve(url, target)


def load_pickle(path):
    with open(path, "rb") as fh:
        return pickle.load(fh, encoding="latin1")


def from_planetoid(name, src):
    x, tx, allx, graph = (load_pickle(src / f"ind.{name}.{p}") for p in ("x", "tx", "allx", "graph"))
    del x
    test_index = [int(line) for line in (src / f"ind.{name}.test.index").read_text().split()]
    test_sorted = np.sort(test_index)
    tx = sp.lil_matrix(tx)
    if name == "citeseer":
        # Some test ids are isolated and absent from tx; pad them with zero rows.
        full = sp.lil_matrix((test_sorted[-1] - test_sorted[0] + 1, tx.shape[1]))
        full[test_sorted - test_sorted[0], :] = tx
        tx = full
    features = sp.vstack((sp.lil_matrix(allx), tx)).tolil()
    features[test_index, :] = features[test_sorted, :]
    n = features.shape[0]
    edges = set()
    for u, neighbours in graph.items():
        for v in neighbours:
            if u != v and u < n and v < n:
                edges.add((min(u, v), max(u, v)))
    return sorted(edges), features.toarray()


def from_linqs(name, src):
    ids, rows = {}, []
    for line in (src / f"{name}.content").read_text().splitlines():
        fields = line.split("\t")
        if len(fields) < 3:
            continue
        ids[fields[0]] = len(rows)
        rows.append([float(v) for v in fields[1:-1]])
    edges = set()
    for line in (src / f"{name}.cites").read_text().splitlines():
        fields = line.split()
        if len(fields) != 2 or fields[0] not in ids or fields[1] not in ids:
            continue
        u, v = ids[fields[0]], ids[fields[1]]
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return sorted(edges), np.asarray(rows)


def write(name, edges, features, out):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "edges.txt", "w") as fh:
        fh.write(f"# {name}: {features.shape[0]} nodes, {len(edges)} undirected edges\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")
    with open(out / "attributes.csv", "w") as fh:
        for row in features:
            fh.write(",".join(f"{v:.6g}" for v in row) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("names", nargs="+", choices=sorted(EXPECTED_NODES))
    ap.add_argument("--source", type=Path, default=Path("data/raw"), help="directory holding the raw files")
    ap.add_argument("--out", type=Path, default=Path("data"), help="output root")
    ap.add_argument("--download", action="store_true", help="fetch the Planetoid files into --source first")
    args = ap.parse_args()

    status = 0
    for name in args.names:
        if args.download:
            download(name, args.source)
        if (args.source / f"ind.{name}.graph").exists():
            edges, features = from_planetoid(name, args.source)
        elif (args.source / f"{name}.content").exists():
            edges, features = from_linqs(name, args.source)
        else:
            print(f"{name}: no Planetoid or LINQS files under {args.source}", file=sys.stderr)
            status = 1
            continue
        if features.shape[0] != EXPECTED_NODES[name]:
            print(f"{name}: warning: {features.shape[0]} nodes, expected {EXPECTED_NODES[name]}", file=sys.stderr)
        write(name, edges, features, args.out / name)
        print(f"{name}: {features.shape[0]} nodes, {features.shape[1]} attributes, {len(edges)} edges")
    return status


if __name__ == "__main__":
    sys.exit(main())
