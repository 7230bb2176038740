"""File formats: edge and label CSV/JSONL, detections, tweets, key=value params."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

from .energy import EnergyParams
from .graph import GroundTruth, InteractionGraph, IngestError, ingest_edges, ingest_labels
from .mincut import DetectionResult

EDGE_HEADER = ("src", "dst", "weight")
LABEL_HEADER = ("account_id", "label")


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _is_jsonl(path) -> bool:
    return Path(path).suffix.lower() in (".jsonl", ".ndjson", ".json")


def _numbered_csv(path, header: bool | None, first_field: str):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        first = True
        for row in reader:
            lineno = reader.line_num
            if not row or all(not f.strip() for f in row):
                continue
            if first:
                first = False
                if header or (header is None and row[0].strip().lower() == first_field):
                    continue
            yield lineno, [f.strip() for f in row]


def _parse_weight(text, lineno: int) -> int:
    try:
        return int(text)
    except (TypeError, ValueError):
        raise IngestError(f"line {lineno}: retweet count must be an integer, got {text!r}") from None


def _edge_records(path, header):
    if _is_jsonl(path):
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise IngestError(f"line {lineno}: invalid JSON ({exc.msg})") from None
                if not isinstance(obj, dict) or "src" not in obj or "dst" not in obj:
                    raise IngestError(f"line {lineno}: expected an object with 'src' and 'dst'")
                yield lineno, (obj["src"], obj["dst"], obj.get("weight", 1))
        return
    for lineno, row in _numbered_csv(path, header, "src"):
        if len(row) == 2:
            row = [*row, "1"]
        if len(row) != 3:
            raise IngestError(f"line {lineno}: expected 2 or 3 fields (src,dst[,weight]), got {len(row)}")
        yield lineno, (row[0], row[1], _parse_weight(row[2], lineno))


def read_edges(path, header: bool | None = None) -> InteractionGraph:
    return ingest_edges(_edge_records(path, header), numbered=True)


def write_edges(g: InteractionGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGE_HEADER)
        for src, dst, weight in g.iter_edges():
            w.writerow((src, dst, weight))


def read_labels(path, header: bool | None = None) -> GroundTruth:
    return ingest_labels(_numbered_csv(path, header, "account_id"), numbered=True)


def write_labels(truth: GroundTruth, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LABEL_HEADER)
        for account in truth:
            w.writerow((account, truth[account]))


def read_priors(path, header: bool | None = None, strength: float = 0.9) -> dict[str, float]:
    """Prior bot probabilities from ``account_id,value`` rows.

    ``value`` is a probability in (0, 1) or a label; ``bot`` maps to
    ``strength`` and ``human`` to ``1 - strength``.
    """
    priors: dict[str, float] = {}
    for lineno, row in _numbered_csv(path, header, "account_id"):
        if len(row) != 2:
            raise IngestError(f"line {lineno}: expected 2 fields (account_id,value), got {len(row)}")
        account, value = row
        token = value.lower()
        if token == "bot":
            p = strength
        elif token == "human":
            p = 1.0 - strength
        else:
            try:
                p = float(value)
            except ValueError:
                raise IngestError(f"line {lineno}: prior must be a probability or bot/human, got {value!r}") from None
        if not 0.0 < p < 1.0:
            raise IngestError(f"line {lineno}: prior for {account!r} must lie strictly in (0, 1), got {p}")
        priors[account] = p
    return priors


def write_detections(result: DetectionResult, g: InteractionGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for account in sorted(result.nodes):
            node = result.nodes[account]
            rec = {
                "account_id": account,
                "map_label": node.map_label,
                "p_bot": None if math.isnan(node.p_bot) else node.p_bot,
                "z_out": g.z_out.get(account, 0),
                "z_in": g.z_in.get(account, 0),
            }
            fh.write(json.dumps(rec) + "\n")


def read_detections(path) -> dict[str, dict]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or "account_id" not in rec:
                raise IngestError(f"line {lineno}: detection record needs 'account_id'")
            out[rec["account_id"]] = rec
    return out


def read_tweets(path) -> dict[str, list[str]]:
    """Hashtags per account from ``{"account_id": ..., "hashtags": [...]}`` lines."""
    tweets: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or not isinstance(rec.get("account_id"), str):
                raise IngestError(f"line {lineno}: expected an object with a string 'account_id'")
            tags = rec.get("hashtags", [])
            if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
                raise IngestError(f"line {lineno}: 'hashtags' must be a list of strings")
            tweets.setdefault(rec["account_id"], []).extend(tags)
    return tweets


def read_params_file(path) -> dict[str, float]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    allowed = set(EnergyParams.field_names())
    values: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in allowed:
                raise ValueError(f"{path}:{lineno}: unknown parameter {key!r}")
            try:
                values[key] = float(value)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: {key} must be a number, got {value!r}") from None
    return values


def write_params_file(params: EnergyParams, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in params.as_dict().items():
            fh.write(f"{key}={value!r}\n")
