"""Clip JSON serialization and the published-results reference table.

The clip format stores every float through repr, which round-trips binary64
exactly, so save -> load is bit-lossless. The reference table is a small CSV
(condition,level,model,subset,mpjpe,mpjre,mpjve) whose shipped fixture holds
the published per-artifact error levels used for comparison reports.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .skeleton import MotionClip, Skeleton

CLIP_SCHEMA_VERSION = "1"
SUBSETS = ("Up", "Low")


class ClipSchemaError(ValueError):
    """Clip JSON payload violates the documented schema."""


class ReferenceTableError(ValueError):
    """Reference CSV row cannot be parsed."""


def _reject_constant(token: str):
    raise ClipSchemaError(f"non-finite number {token!r} not allowed")


def save_clip_json(clip: MotionClip) -> bytes:
    doc = {
        "schema_version": CLIP_SCHEMA_VERSION,
        "name": clip.name,
        "framerate_hz": clip.framerate,
        "joints": [
            {
                "name": clip.skeleton.joint_names[j],
                "parent": int(clip.skeleton.parents[j]),
                "offset_m": [float(v) for v in clip.skeleton.rest_offsets[j]],
            }
            for j in range(clip.skeleton.n_joints)
        ],
        "frames": [
            {
                "root_t_m": [float(v) for v in clip.root_translations[t]],
                "quats_wxyz": [[float(v) for v in q] for q in clip.local_rotations[t]],
            }
            for t in range(len(clip))
        ],
    }
    return json.dumps(doc, allow_nan=False, indent=1).encode()


def load_clip_json(data: bytes | str) -> MotionClip:
    if isinstance(data, bytes):
        data = data.decode()
    try:
        doc = json.loads(data, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ClipSchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ClipSchemaError("top-level value must be an object")
    version = doc.get("schema_version")
    if version != CLIP_SCHEMA_VERSION:
        raise ClipSchemaError(
            f"unsupported schema_version {version!r}; this reader supports {CLIP_SCHEMA_VERSION!r}"
        )
    try:
        joints = doc["joints"]
        frames = doc["frames"]
        framerate = float(doc["framerate_hz"])
        name = str(doc.get("name", "clip"))
        skeleton = Skeleton(
            [j["name"] for j in joints],
            np.array([j["parent"] for j in joints]),
            np.array([j["offset_m"] for j in joints], dtype=float),
        )
        roots = np.array([f["root_t_m"] for f in frames], dtype=float)
        quats = np.array([f["quats_wxyz"] for f in frames], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ClipSchemaError(f"malformed clip document: {exc!r}") from exc
    if roots.size and not np.all(np.isfinite(roots)):
        raise ClipSchemaError("non-finite root translation")
    if quats.size and not np.all(np.isfinite(quats)):
        raise ClipSchemaError("non-finite rotation")
    try:
        return MotionClip(skeleton, framerate, roots, quats, name=name)
    except ValueError as exc:
        raise ClipSchemaError(f"invalid clip payload: {exc}") from exc


def load_clip(path: str | Path) -> MotionClip:
    """Load a clip from a .json or .bvh file, dispatching on the extension."""
    path = Path(path)
    if path.suffix.lower() == ".bvh":
        from .bvh import parse_bvh

        return parse_bvh(path.read_text(), name=path.stem)
    return load_clip_json(path.read_bytes())


@dataclass(frozen=True)
class ReferenceRow:
    condition: str
    level: float | None
    model: str
    subset: str
    mpjpe_cm: float
    mpjre_deg: float
    mpjve_cmps: float

    @property
    def key(self):
        return (self.condition, self.level, self.model, self.subset)


@dataclass
class ReferenceTable:
    rows: list[ReferenceRow]

    def __len__(self):
        return len(self.rows)

    def lookup(self, condition: str, level: float | None, model: str, subset: str) -> ReferenceRow | None:
        for row in self.rows:
            if row.key == (condition, level, model, subset):
                return row
        return None

    def mpjpe_total(self) -> float:
        return float(sum(r.mpjpe_cm for r in self.rows))


_HEADER = ["condition", "level", "model", "subset", "mpjpe", "mpjre", "mpjve"]


def load_reference_table(source: bytes | str | Path) -> ReferenceTable:
    """Parse a reference CSV. Empty input yields an empty table."""
    if isinstance(source, Path):
        text = source.read_text()
    elif isinstance(source, bytes):
        text = source.decode()
    else:
        text = source
    if not text.strip():
        return ReferenceTable([])
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if [h.strip() for h in header] != _HEADER:
        raise ReferenceTableError(f"unexpected header {header!r}, expected {_HEADER!r}")
    rows = []
    for i, raw in enumerate(reader):
        if not raw or all(not c.strip() for c in raw):
            continue
        if len(raw) != len(_HEADER):
            raise ReferenceTableError(f"row {i}: expected {len(_HEADER)} fields, got {len(raw)}")
        condition, level_s, model, subset = (c.strip() for c in raw[:4])
        if subset not in SUBSETS:
            raise ReferenceTableError(f"row {i}: unknown subset {subset!r}")
        try:
            level = float(level_s) if level_s else None
            metrics = [float(c) for c in raw[4:]]
        except ValueError as exc:
            raise ReferenceTableError(f"row {i}: malformed number ({exc})") from None
        if any(m < 0 for m in metrics):
            raise ReferenceTableError(f"row {i}: negative metric value")
        rows.append(ReferenceRow(condition, level, model, subset, *metrics))
    return ReferenceTable(rows)


def paper_reference_table() -> ReferenceTable:
    """The reference table shipped with the package."""
    data = resources.files("avatarbench").joinpath("data/reference_table1.csv").read_bytes()
    return load_reference_table(data)


def reference_checksum() -> float:
    """Transcription guard: the recorded sum of every MPJPE cell in the fixture."""
    text = resources.files("avatarbench").joinpath("data/reference_table1.mpjpe_checksum.txt").read_text()
    return float(text.strip())
