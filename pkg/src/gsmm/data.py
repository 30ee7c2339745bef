"""LIBSVM text-format ingestion and dataset metadata.

The parser is deliberately strict: feature indices are 1-based and strictly
ascending within a row, malformed tokens are reported with line and column,
and values are parsed as 64-bit floats independent of locale. Serialization
uses shortest round-trip float formatting so parse -> write -> parse is
lossless.

No network access happens here; datasets resolve from an explicit path, a
data directory (argument or GSMM_DATA_DIR), or the two small bundled files.
scripts/fetch_datasets.sh documents the upstream URLs for the full set.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .core import DataError

__all__ = [
    "Dataset",
    "TABLE_COUNTS",
    "parse_libsvm",
    "write_libsvm",
    "normalize_labels",
    "take_subsample",
    "to_feature_matrix",
    "load_dataset",
]

# sample/feature counts of the nine benchmark datasets
TABLE_COUNTS = {
    "a9a": (32561, 123),
    "covtype": (581012, 54),
    "diabetes": (768, 8),
    "german": (1000, 24),
    "gisette": (6000, 5000),
    "ijcnn1": (141691, 22),
    "mushrooms": (8124, 112),
    "phishing": (11055, 68),
    "w8a": (49749, 300),
}

_BUNDLED = ("diabetes", "german")

_TOKEN = re.compile(r"\S+")


@dataclass(eq=False)
class Dataset:
    """Sparse sample rows plus labels.

    rows holds one (indices, values) pair per sample; indices are 1-based
    and strictly ascending. label_map records the raw-to-canonical label
    mapping once normalize_labels has run.
    """

    rows: list
    labels: np.ndarray
    n_features: int
    name: str = ""
    label_map: dict | None = field(default=None)

    @property
    def n_samples(self) -> int:
        return len(self.rows)


def parse_libsvm(source, n_features=None, name="") -> Dataset:
    """Parse LIBSVM text: `<label> <i>:<v> ...` per line; blanks and # comments skipped.

    n_features defaults to the maximum index seen; declare it when a subset
    may miss trailing features.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    rows = []
    labels = []
    max_idx = 0
    for ln, line in enumerate(source.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        toks = _TOKEN.finditer(line)
        label_tok = next(toks)
        try:
            lab = float(label_tok.group())
        except ValueError:
            raise DataError(
                f"line {ln}, column {label_tok.start() + 1}: "
                f"non-numeric label {label_tok.group()!r}"
            ) from None
        idxs = []
        vals = []
        prev = 0
        for t in toks:
            tok = t.group()
            col = t.start() + 1
            if ":" not in tok:
                raise DataError(
                    f"line {ln}, column {col}: malformed feature token {tok!r} "
                    "(expected index:value)"
                )
            si, sv = tok.split(":", 1)
            try:
                i = int(si)
            except ValueError:
                raise DataError(
                    f"line {ln}, column {col}: non-integer feature index {si!r}"
                ) from None
            if i < 1:
                raise DataError(f"line {ln}, column {col}: feature index must be >= 1, got {i}")
            if i <= prev:
                kind = "duplicate" if i == prev else "non-ascending"
                raise DataError(
                    f"line {ln}, column {col}: {kind} feature index {i} after {prev}"
                )
            try:
                v = float(sv)
            except ValueError:
                raise DataError(
                    f"line {ln}, column {col + len(si) + 1}: "
                    f"non-numeric feature value {sv!r}"
                ) from None
            idxs.append(i)
            vals.append(v)
            prev = i
        rows.append((np.asarray(idxs, dtype=np.int64), np.asarray(vals, dtype=float)))
        labels.append(lab)
        if prev > max_idx:
            max_idx = prev
    if n_features is None:
        n_features = max_idx
    elif max_idx > n_features:
        raise DataError(f"declared n_features={n_features} but saw feature index {max_idx}")
    return Dataset(rows=rows, labels=np.asarray(labels, dtype=float),
                   n_features=int(n_features), name=name)


def write_libsvm(d: Dataset) -> str:
    """Serialize back to LIBSVM text with lossless float formatting."""
    lines = []
    for (idx, val), lab in zip(d.rows, d.labels):
        parts = [repr(float(lab))]
        parts.extend(f"{int(i)}:{repr(float(v))}" for i, v in zip(idx, val))
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def normalize_labels(d: Dataset) -> Dataset:
    """Map the two raw labels to {-1, +1}: smaller raw value -> -1."""
    uniq = np.unique(d.labels)
    if uniq.size != 2:
        shown = ", ".join(repr(float(u)) for u in uniq[:6])
        raise DataError(
            f"expected exactly two distinct labels, found {uniq.size} ({shown})"
        )
    lo, hi = float(uniq[0]), float(uniq[1])
    labels = np.where(d.labels == lo, -1.0, 1.0)
    return Dataset(rows=d.rows, labels=labels, n_features=d.n_features,
                   name=d.name, label_map={lo: -1.0, hi: 1.0})


def take_subsample(d: Dataset, k: int, seed: int) -> Dataset:
    """Deterministic sample of k rows without replacement, original order kept."""
    n = d.n_samples
    if not (1 <= k <= n):
        raise DataError(f"subsample size must lie in [1, {n}], got {k}")
    idx = np.sort(np.random.default_rng(seed).choice(n, size=k, replace=False))
    rows = [d.rows[i] for i in idx]
    return Dataset(rows=rows, labels=d.labels[idx], n_features=d.n_features,
                   name=f"{d.name}[take={k},seed={seed}]" if d.name else d.name,
                   label_map=d.label_map)


def to_feature_matrix(d: Dataset):
    """CSR feature matrix (N x n_features) and the label vector."""
    lengths = np.array([len(idx) for idx, _ in d.rows], dtype=np.int64)
    indptr = np.concatenate(([0], np.cumsum(lengths)))
    if d.rows:
        indices = np.concatenate([idx - 1 for idx, _ in d.rows])
        data = np.concatenate([val for _, val in d.rows])
    else:
        indices = np.zeros(0, dtype=np.int64)
        data = np.zeros(0)
    mat = sp.csr_matrix((data, indices, indptr), shape=(d.n_samples, d.n_features))
    return mat, d.labels.copy()


def load_dataset(name_or_path, data_dir=None, n_features=None, check_counts=True) -> Dataset:
    """Resolve and load a dataset, normalizing labels to {-1, +1}.

    Resolution order: existing file path, then <data_dir>/<name>, then
    $GSMM_DATA_DIR/<name>, then the bundled copies (diabetes, german). When
    the resolved name matches a benchmark-table dataset, sample and feature
    counts are validated against the table unless check_counts is off.
    """
    p = Path(str(name_or_path))
    text = None
    if p.is_file():
        text = p.read_text()
        name = p.stem
    else:
        name = str(name_or_path)
        for root in (data_dir, os.environ.get("GSMM_DATA_DIR")):
            if root:
                cand = Path(root) / name
                if cand.is_file():
                    text = cand.read_text()
                    break
        if text is None:
            bundled = resources.files("gsmm").joinpath("datasets", name)
            if bundled.is_file():
                text = bundled.read_text()
        if text is None:
            raise DataError(
                f"dataset {name!r} not found: not an existing file, not under "
                f"--data-dir or $GSMM_DATA_DIR, and not bundled "
                f"(bundled: {', '.join(_BUNDLED)}); see scripts/fetch_datasets.sh "
                "for the upstream URLs"
            )
    d = parse_libsvm(text, n_features=n_features, name=name)
    d = normalize_labels(d)
    if check_counts and name in TABLE_COUNTS:
        want = TABLE_COUNTS[name]
        got = (d.n_samples, d.n_features)
        if got != want:
            raise DataError(
                f"dataset {name}: expected {want[0]} samples x {want[1]} features "
                f"per the benchmark table, got {got[0]} x {got[1]}"
            )
    return d
