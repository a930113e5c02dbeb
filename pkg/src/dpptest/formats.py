"""File formats: sample text files and the JSON forms of kernels,
distribution tables, candidate grids, and hard instances.

Sample files are plain text: a header line "# n=<n> m=<m> seed=<seed>"
followed by one subset per line as space-separated 1-based indices in
ascending order, with the literal "-" standing for the empty set. A
batch without a seed record writes "seed=-". All parse failures report
1-based line numbers.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import SampleFormatError
from .sampler import SampleBatch
from .subsets import mask_to_indices


def format_subset_line(mask: int) -> str:
    if mask == 0:
        return "-"
    return " ".join(str(i + 1) for i in mask_to_indices(mask))


def write_sample_file(path, batch: SampleBatch) -> None:
    seed = "-" if batch.seed is None else str(batch.seed)
    lines = [f"# n={batch.n} m={batch.m} seed={seed}"]
    lines.extend(format_subset_line(int(mask)) for mask in batch.subsets)
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_header(line: str) -> tuple[int, int, int | None]:
    parts = line.split()
    if len(parts) != 4 or parts[0] != "#":
        raise SampleFormatError(f"line 1: malformed header {line!r}")
    fields = {}
    for part in parts[1:]:
        key, _, value = part.partition("=")
        fields[key] = value
    try:
        n = int(fields["n"])
        m = int(fields["m"])
        seed = None if fields["seed"] == "-" else int(fields["seed"])
    except (KeyError, ValueError) as exc:
        raise SampleFormatError(f"line 1: malformed header {line!r}") from exc
    return n, m, seed


def read_sample_file(path) -> SampleBatch:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise SampleFormatError("line 1: empty sample file")
    n, m, seed = _parse_header(lines[0])
    if n < 1:
        raise SampleFormatError(f"line 1: invalid ground-set size n={n}")
    masks = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line == "-":
            masks.append(0)
            continue
        mask = 0
        prev = 0
        for token in line.split():
            try:
                idx = int(token)
            except ValueError as exc:
                raise SampleFormatError(
                    f"line {lineno}: non-integer index {token!r}"
                ) from exc
            if idx < 1 or idx > n:
                raise SampleFormatError(
                    f"line {lineno}: index {idx} outside [1, {n}]"
                )
            if idx <= prev:
                raise SampleFormatError(
                    f"line {lineno}: indices not strictly ascending at {idx}"
                )
            prev = idx
            mask |= 1 << (idx - 1)
        masks.append(mask)
    if len(masks) != m:
        raise SampleFormatError(
            f"line 1: header claims m={m} but file carries {len(masks)} subsets"
        )
    return SampleBatch(n=n, subsets=masks, seed=seed)


def write_json(path, obj: dict) -> None:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())
