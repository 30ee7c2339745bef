#!/usr/bin/env python3
"""Regenerate the bundled stand-in datasets.

The bundled `diabetes` and `german` files are synthetic stand-ins that match
the benchmark table's sample/feature counts and the familiar class balances
(diabetes 500/268, german 700/300). They are NOT the original datasets; run
scripts/fetch_datasets.sh to download the real files. Generation is
deterministic so the bundled bytes are reproducible.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "gsmm" / "datasets"

SPECS = {
    # name: (n_samples, n_features, n_positive, seed)
    "diabetes": (768, 8, 500, 20240501),
    "german": (1000, 24, 700, 20240502),
}


def make_one(name: str, n: int, d: int, n_pos: int, seed: int) -> str:
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(n, d))
    w = rng.normal(size=d)
    score = x @ w + 0.5 * rng.normal(size=n)
    order = np.argsort(-score, kind="stable")
    labels = np.full(n, -1, dtype=int)
    labels[order[:n_pos]] = 1
    lines = []
    for i in range(n):
        lab = "+1" if labels[i] == 1 else "-1"
        feats = " ".join(f"{j + 1}:{round(float(v), 6):g}" for j, v in enumerate(x[i]))
        lines.append(f"{lab} {feats}")
    return "\n".join(lines) + "\n"


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, (n, d, n_pos, seed) in SPECS.items():
        text = make_one(name, n, d, n_pos, seed)
        path = OUT_DIR / name
        path.write_text(text)
        print(f"wrote {path} ({n} samples, {d} features, +1:{n_pos}, -1:{n - n_pos})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
