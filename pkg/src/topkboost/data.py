"""Multilabel dataset ingestion and streaming.

Supported inputs: ARFF files with dense or sparse rows whose trailing
attributes are binary labels (the common distribution format for
multilabel benchmarks), and a canonical CSV interchange format with
header ``f1..fdim,l1..lm`` plus a small key-value sidecar (``<path>.meta``)
carrying name/m/dim/split.

Datasets are immutable after load. Streaming yields (features, relevant
set) pairs over one or more loops with an optional per-loop seeded
shuffle, so experiment order is reproducible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import ArffParseError, ContractError

MAX_LOOPS = 20


@dataclass(frozen=True)
class MultilabelDataset:
    name: str
    features: np.ndarray
    relevance: tuple[frozenset[int], ...]
    m: int
    split: str = "train"

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        feats.setflags(write=False)
        object.__setattr__(self, "features", feats)
        if feats.ndim != 2 or feats.shape[0] == 0:
            raise ContractError("feature matrix must be 2-d and non-empty")
        if len(self.relevance) != feats.shape[0]:
            raise ContractError("one relevance set per example required")
        if self.m < 2:
            raise ContractError("need at least two labels")
        if self.split not in ("train", "test"):
            raise ContractError("split tag must be 'train' or 'test'")
        for r in self.relevance:
            if any(l < 0 or l >= self.m for l in r):
                raise ContractError("relevance set contains out-of-range label")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def subset(self, indices, name: str | None = None, split: str | None = None):
        idx = np.asarray(indices, dtype=np.intp)
        return MultilabelDataset(
            name if name is not None else self.name,
            self.features[idx],
            tuple(self.relevance[int(i)] for i in idx),
            self.m,
            split if split is not None else self.split,
        )

    def label_cardinality(self) -> tuple[int, float, int]:
        sizes = [len(r) for r in self.relevance]
        return min(sizes), float(np.mean(sizes)), max(sizes)


# --------------------------------------------------------------------------
# ARFF


def _unquote(token: str) -> str:
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return token[1:-1]
    return token


def _split_attribute(rest: str) -> tuple[str, str]:
    """Split the remainder of an @attribute line into (name, type-spec)."""
    rest = rest.strip()
    if not rest:
        raise ValueError("missing attribute name")
    if rest[0] in "'\"":
        quote = rest[0]
        end = rest.find(quote, 1)
        if end < 0:
            raise ValueError("unterminated quoted attribute name")
        return rest[1:end], rest[end + 1 :].strip()
    parts = rest.split(None, 1)
    if len(parts) != 2:
        raise ValueError("attribute line needs a name and a type")
    return parts[0], parts[1].strip()


@dataclass
class _Attribute:
    name: str
    nominal: tuple[str, ...] | None = None  # None for numeric types


def _parse_value(token: str, attr: _Attribute, lineno: int) -> float:
    token = token.strip()
    if token == "?":
        raise ArffParseError("missing values ('?') are not supported", lineno)
    token = _unquote(token)
    try:
        return float(token)
    except ValueError:
        pass
    if attr.nominal is not None and token in attr.nominal:
        return float(attr.nominal.index(token))
    raise ArffParseError(f"cannot interpret value {token!r} for attribute {attr.name!r}", lineno)


def _looks_sparse(items: list[str]) -> bool:
    if not items:
        return True
    for it in items:
        parts = it.split()
        if len(parts) != 2:
            return False
        try:
            int(parts[0])
        except ValueError:
            return False
    return True


def parse_arff(
    source,
    labels: int | Sequence[str],
    name: str | None = None,
    split: str = "train",
) -> MultilabelDataset:
    """Parse a multilabel ARFF file or text.

    ``labels`` gives the trailing label attributes either as a count or as
    an explicit list of attribute names (which must form the trailing
    block). Dense rows may be bare or brace-wrapped; sparse rows are
    ``{index value, ...}`` with 0-based attribute indices and omitted
    entries equal to 0. Label values must be 0 or 1.
    """
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        text = Path(source).read_text()
        default_name = Path(source).stem
    else:
        text = str(source)
        default_name = "arff-data"

    relation = None
    attrs: list[_Attribute] = []
    rows: list[np.ndarray] = []
    in_data = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not in_data:
            lowered = line.lower()
            if lowered.startswith("@relation"):
                relation = _unquote(line[len("@relation") :])
                continue
            if lowered.startswith("@attribute"):
                try:
                    attr_name, spec = _split_attribute(line[len("@attribute") :])
                except ValueError as exc:
                    raise ArffParseError(str(exc), lineno) from None
                spec_l = spec.lower()
                if spec.startswith("{"):
                    if not spec.endswith("}"):
                        raise ArffParseError("unterminated nominal specification", lineno)
                    values = tuple(_unquote(v) for v in spec[1:-1].split(","))
                    attrs.append(_Attribute(attr_name, values))
                elif spec_l in ("numeric", "real", "integer"):
                    attrs.append(_Attribute(attr_name))
                else:
                    raise ArffParseError(f"unsupported attribute type {spec!r}", lineno)
                continue
            if lowered.startswith("@data"):
                if not attrs:
                    raise ArffParseError("@data before any @attribute", lineno)
                in_data = True
                continue
            raise ArffParseError(f"unrecognized header line {line!r}", lineno)
        rows.append(_parse_row(line, attrs, lineno))

    if not in_data:
        raise ArffParseError("no @data section found")
    if not rows:
        raise ArffParseError("no data rows found")

    if isinstance(labels, int):
        m = labels
        if not 0 < m < len(attrs):
            raise ArffParseError(f"label count {m} out of range for {len(attrs)} attributes")
    else:
        wanted = list(labels)
        names = [a.name for a in attrs]
        m = len(wanted)
        if m == 0 or names[-m:] != wanted:
            raise ArffParseError("label names must match the trailing attributes in order")

    dim = len(attrs) - m
    mat = np.stack(rows)
    feats = mat[:, :dim]
    label_block = mat[:, dim:]
    bad = (label_block != 0.0) & (label_block != 1.0)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise ArffParseError(
            f"non-binary value {label_block[i, j]!r} for label attribute {attrs[dim + j].name!r}"
        )
    relevance = tuple(
        frozenset(int(l) for l in np.flatnonzero(row)) for row in label_block
    )
    ds_name = name if name is not None else (relation or default_name)
    return MultilabelDataset(ds_name, feats, relevance, m, split)


def _parse_row(line: str, attrs: list[_Attribute], lineno: int) -> np.ndarray:
    braced = line.startswith("{") and line.endswith("}")
    body = line[1:-1] if braced else line
    items = [it for it in (p.strip() for p in body.split(",")) if it]
    if braced and _looks_sparse(items):
        vals = np.zeros(len(attrs))
        for it in items:
            idx_tok, val_tok = it.split()
            idx = int(idx_tok)
            if not 0 <= idx < len(attrs):
                raise ArffParseError(f"sparse index {idx} out of range", lineno)
            vals[idx] = _parse_value(val_tok, attrs[idx], lineno)
        return vals
    if len(items) != len(attrs):
        raise ArffParseError(
            f"row has {len(items)} values, expected {len(attrs)}", lineno
        )
    return np.array([_parse_value(tok, a, lineno) for tok, a in zip(items, attrs)])


# --------------------------------------------------------------------------
# Canonical CSV + sidecar


def _meta_path(path) -> Path:
    return Path(str(path) + ".meta")


def write_csv(ds: MultilabelDataset, path) -> None:
    """Write the canonical CSV plus its metadata sidecar.

    Floats are written with repr so a read-back reproduces the feature
    matrix bit for bit.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = [f"f{j + 1}" for j in range(ds.dim)] + [f"l{j + 1}" for j in range(ds.m)]
        writer.writerow(header)
        for i in range(ds.n):
            row = [repr(float(v)) for v in ds.features[i]]
            row += ["1" if l in ds.relevance[i] else "0" for l in range(ds.m)]
            writer.writerow(row)
    meta = ds.name, ds.m, ds.dim, ds.split
    _meta_path(path).write_text(
        "name={}\nm={}\ndim={}\nsplit={}\n".format(*meta)
    )


def read_csv(path, name: str | None = None, split: str | None = None) -> MultilabelDataset:
    """Read a canonical CSV; the sidecar supplies name/split when present."""
    path = Path(path)
    meta: dict[str, str] = {}
    mp = _meta_path(path)
    if mp.exists():
        for line in mp.read_text().splitlines():
            if "=" in line:
                key, _, val = line.partition("=")
                meta[key.strip()] = val.strip()
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ContractError(f"{path}: empty canonical CSV")
        dim = sum(1 for c in header if c.startswith("f"))
        m = sum(1 for c in header if c.startswith("l"))
        if dim + m != len(header) or m == 0:
            raise ContractError(f"{path}: header must be f1..fdim followed by l1..lm")
        feats, relevance = [], []
        for row in reader:
            if not row:
                continue
            if len(row) != dim + m:
                raise ContractError(f"{path}: row width {len(row)} != {dim + m}")
            feats.append([float(v) for v in row[:dim]])
            relevance.append(frozenset(j for j in range(m) if row[dim + j] == "1"))
    if "m" in meta and int(meta["m"]) != m:
        raise ContractError(f"{path}: sidecar m={meta['m']} disagrees with header m={m}")
    if "dim" in meta and int(meta["dim"]) != dim:
        raise ContractError(f"{path}: sidecar dim disagrees with header")
    return MultilabelDataset(
        name if name is not None else meta.get("name", path.stem),
        np.asarray(feats),
        tuple(relevance),
        m,
        split if split is not None else meta.get("split", "train"),
    )


def load_dataset(
    path,
    labels: int | Sequence[str] | None = None,
    name: str | None = None,
    split: str = "train",
) -> MultilabelDataset:
    """Load by extension: .arff needs ``labels``; .csv is self-describing."""
    p = Path(path)
    if p.suffix.lower() == ".arff":
        if labels is None:
            raise ContractError(f"{p}: label count or names required for ARFF input")
        return parse_arff(p, labels, name=name, split=split)
    return read_csv(p, name=name, split=split)


# --------------------------------------------------------------------------
# Streaming


@dataclass(frozen=True)
class StreamPlan:
    """How to traverse a dataset: loop count, per-loop shuffling, seed."""

    loops: int = 1
    shuffle_each_loop: bool = True
    seed: int | np.random.SeedSequence = 0

    def __post_init__(self):
        if not 1 <= self.loops <= MAX_LOOPS:
            raise ContractError(f"loops must lie in [1, {MAX_LOOPS}]")


def stream(ds: MultilabelDataset, plan: StreamPlan) -> Iterator[tuple[np.ndarray, frozenset[int]]]:
    """Yield (features, relevant set) over ``loops`` passes, deterministically."""
    seed = plan.seed
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.default_rng(ss)
    for _ in range(plan.loops):
        order = rng.permutation(ds.n) if plan.shuffle_each_loop else np.arange(ds.n)
        for i in order:
            yield ds.features[i], ds.relevance[int(i)]


def reduce_dataset(
    train: MultilabelDataset,
    test: MultilabelDataset,
    seed,
    n_train: int = 1500,
    n_test: int = 500,
    name: str = "m-reduced",
) -> tuple[MultilabelDataset, MultilabelDataset]:
    """Uniform without-replacement subsample respecting the split boundary.

    Train rows come from the train split and test rows from the test
    split, so no example crosses splits. Row order is preserved.
    """
    if train.n < n_train:
        raise ContractError(f"train split has {train.n} rows, need {n_train}")
    if test.n < n_test:
        raise ContractError(f"test split has {test.n} rows, need {n_test}")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.default_rng(ss)
    tr_idx = np.sort(rng.choice(train.n, size=n_train, replace=False))
    te_idx = np.sort(rng.choice(test.n, size=n_test, replace=False))
    return (
        train.subset(tr_idx, name=name, split="train"),
        test.subset(te_idx, name=name, split="test"),
    )
