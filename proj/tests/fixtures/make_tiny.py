"""Regenerates tests/fixtures/tiny: 100 nodes in 4 planted communities with
community-centred 8-dimensional attributes. No anomalies; `cola run` injects them."""
from pathlib import Path

import numpy as np

rng = np.random.default_rng(20240)
n, groups, f = 100, 4, 8
community = np.repeat(np.arange(groups), n // groups)
edges = set()
for i in range(n):
    for j in range(i + 1, n):
        p = 0.16 if community[i] == community[j] else 0.01
        if rng.random() < p:
            edges.add((i, j))
centres = rng.normal(0.0, 1.0, size=(groups, f))
x = centres[community] + 0.3 * rng.normal(size=(n, f))

out = Path(__file__).parent / "tiny"
out.mkdir(exist_ok=True)
with open(out / "edges.txt", "w") as fh:
    fh.write("# planted partition, 4 x 25 nodes\n")
    for i, j in sorted(edges):
        fh.write(f"{i} {j}\n")
with open(out / "attributes.csv", "w") as fh:
    for row in x:
        fh.write(",".join(f"{v:.6f}" for v in row) + "\n")
