"""BVH motion-capture text format: parsing and serialization.

Supported grammar: HIERARCHY / ROOT / JOINT / OFFSET / CHANNELS / End Site /
MOTION / Frames: / Frame Time:. Rotation channels may appear in any order
(per joint) and are interpreted intrinsically in the declared order.
Position channels are honored on the root and ignored elsewhere. The
serializer always emits ZXY rotation channels and full-precision (repr)
numbers, so parse(serialize(clip)) is lossless for positions and recovers
rotations to well below 0.01 degrees.

Joints come back in file (depth-first) order, which is always topologically
sorted but may differ from the source clip's ordering; match joints by name
when comparing clips across a round trip.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation as ScipyRotation

from . import rotations as rot
from .skeleton import MotionClip, Skeleton

_ROTATION_CHANNELS = {"Xrotation": "X", "Yrotation": "Y", "Zrotation": "Z"}
_POSITION_CHANNELS = {"Xposition": 0, "Yposition": 1, "Zposition": 2}


class BvhParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class _Cursor:
    """Line-based scanner that remembers 1-based line numbers."""

    def __init__(self, text: str):
        self.raw = text.splitlines()
        self.pos = 0

    def peek(self):
        while self.pos < len(self.raw):
            stripped = self.raw[self.pos].strip()
            if stripped:
                return stripped
            self.pos += 1
        return None

    def next(self, expectation: str):
        line = self.peek()
        if line is None:
            raise BvhParseError(f"unexpected end of file, expected {expectation}", len(self.raw))
        self.pos += 1
        return line

    @property
    def line_no(self) -> int:
        return self.pos  # pos already advanced past the line just consumed


def parse_bvh(text: str, offset_scale: float = 1.0, name: str = "bvh") -> MotionClip:
    """Parse BVH text into a MotionClip.

    offset_scale rescales offsets and position channels (0.01 converts files
    authored in centimeters to meters).
    """
    cur = _Cursor(text)
    if cur.next("HIERARCHY") != "HIERARCHY":
        raise BvhParseError("expected HIERARCHY", cur.line_no)

    names: list[str] = []
    parents: list[int] = []
    offsets: list[np.ndarray] = []
    channels: list[list[str]] = []

    def parse_offset() -> np.ndarray:
        line = cur.next("OFFSET")
        parts = line.split()
        if parts[0] != "OFFSET" or len(parts) != 4:
            raise BvhParseError("expected OFFSET x y z", cur.line_no)
        try:
            return np.array([float(p) for p in parts[1:]])
        except ValueError:
            raise BvhParseError("malformed OFFSET number", cur.line_no) from None

    def parse_channels() -> list[str]:
        line = cur.next("CHANNELS")
        parts = line.split()
        if parts[0] != "CHANNELS" or len(parts) < 2:
            raise BvhParseError("expected CHANNELS", cur.line_no)
        try:
            count = int(parts[1])
        except ValueError:
            raise BvhParseError("malformed CHANNELS count", cur.line_no) from None
        listed = parts[2:]
        if len(listed) != count:
            raise BvhParseError(f"CHANNELS lists {len(listed)} names, declared {count}", cur.line_no)
        n_rot = 0
        for ch in listed:
            if ch in _ROTATION_CHANNELS:
                n_rot += 1
            elif ch not in _POSITION_CHANNELS:
                raise BvhParseError(f"unknown channel name {ch!r}", cur.line_no)
        if n_rot not in (0, 3):
            raise BvhParseError(f"expected 0 or 3 rotation channels, got {n_rot}", cur.line_no)
        return listed

    def expect(token: str):
        line = cur.next(token)
        if line != token:
            raise BvhParseError(f"expected {token!r}, got {line!r}", cur.line_no)

    def parse_joint(parent: int):
        header = cur.next("ROOT or JOINT")
        parts = header.split(None, 1)
        if parts[0] not in ("ROOT", "JOINT") or len(parts) != 2:
            raise BvhParseError(f"expected ROOT/JOINT declaration, got {header!r}", cur.line_no)
        if parts[0] == "ROOT" and parent != -1:
            raise BvhParseError("ROOT inside a joint block", cur.line_no)
        index = len(names)
        names.append(parts[1].strip())
        parents.append(parent)
        expect("{")
        offsets.append(parse_offset())
        channels.append(parse_channels())
        while True:
            nxt = cur.peek()
            if nxt is None:
                raise BvhParseError("unexpected end of file inside joint block", cur.line_no)
            if nxt.startswith("JOINT"):
                parse_joint(index)
            elif nxt == "End Site":
                cur.next("End Site")
                expect("{")
                parse_offset()
                expect("}")
            elif nxt == "}":
                cur.next("}")
                return
            else:
                raise BvhParseError(f"unexpected line in joint block: {nxt!r}", cur.line_no + 1)

    parse_joint(-1)

    motion = cur.next("MOTION")
    if motion != "MOTION":
        raise BvhParseError(f"missing MOTION section (got {motion!r})", cur.line_no)
    frames_line = cur.next("Frames:")
    if not frames_line.startswith("Frames:"):
        raise BvhParseError("expected 'Frames: N'", cur.line_no)
    try:
        n_frames = int(frames_line.split(":", 1)[1])
    except ValueError:
        raise BvhParseError("malformed frame count", cur.line_no) from None
    if n_frames < 1:
        raise BvhParseError("clip must contain at least one frame", cur.line_no)
    time_line = cur.next("Frame Time:")
    if not time_line.startswith("Frame Time:"):
        raise BvhParseError("expected 'Frame Time: s'", cur.line_no)
    try:
        frame_time = float(time_line.split(":", 1)[1])
    except ValueError:
        raise BvhParseError("malformed frame time", cur.line_no) from None
    if frame_time <= 0:
        raise BvhParseError("frame time must be positive", cur.line_no)

    total_channels = sum(len(ch) for ch in channels)
    values = np.empty((n_frames, total_channels))
    for f in range(n_frames):
        line = cur.peek()
        if line is None:
            raise BvhParseError(f"expected {n_frames} frames, file ends after {f}", len(cur.raw))
        cur.next("frame data")
        parts = line.split()
        if len(parts) != total_channels:
            raise BvhParseError(
                f"frame {f} has {len(parts)} values, expected {total_channels}", cur.line_no
            )
        try:
            values[f] = [float(p) for p in parts]
        except ValueError:
            raise BvhParseError(f"malformed number in frame {f}", cur.line_no) from None
    if cur.peek() is not None:
        raise BvhParseError(f"more frame lines than the declared {n_frames}", cur.line_no + 1)

    j = len(names)
    offsets_arr = np.stack(offsets) * offset_scale
    root_offset = offsets_arr[0].copy()
    offsets_arr[0] = 0.0

    quats = np.tile(rot.identity(), (n_frames, j, 1))
    root_positions = np.zeros((n_frames, 3))
    col = 0
    for k in range(j):
        ch = channels[k]
        rot_order = ""
        rot_cols = []
        for c, ch_name in enumerate(ch):
            if ch_name in _ROTATION_CHANNELS:
                rot_order += _ROTATION_CHANNELS[ch_name]
                rot_cols.append(col + c)
            elif k == 0:
                root_positions[:, _POSITION_CHANNELS[ch_name]] = values[:, col + c]
        if rot_order:
            angles = values[:, rot_cols]
            q = ScipyRotation.from_euler(rot_order, angles, degrees=True).as_quat()
            quats[:, k] = rot.canonicalize(q[:, [3, 0, 1, 2]])
        col += len(ch)

    root_translations = root_offset + root_positions * offset_scale
    skeleton = Skeleton(names, np.array(parents), offsets_arr)
    return MotionClip(skeleton, 1.0 / frame_time, root_translations, quats, name=name)


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize_bvh(clip: MotionClip) -> str:
    """Serialize a clip to BVH text (ZXY rotation order, depth-first joints)."""
    skel = clip.skeleton
    dfs_order: list[int] = []
    lines: list[str] = ["HIERARCHY"]

    def write_joint(j: int, depth: int):
        dfs_order.append(j)
        pad = "  " * depth
        kind = "ROOT" if j == 0 else "JOINT"
        lines.append(f"{pad}{kind} {skel.joint_names[j]}")
        lines.append(pad + "{")
        off = skel.rest_offsets[j]
        lines.append(f"{pad}  OFFSET {_fmt(off[0])} {_fmt(off[1])} {_fmt(off[2])}")
        if j == 0:
            lines.append(
                f"{pad}  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation"
            )
        else:
            lines.append(f"{pad}  CHANNELS 3 Zrotation Xrotation Yrotation")
        kids = skel.children(j)
        if not kids:
            lines.append(f"{pad}  End Site")
            lines.append(pad + "  {")
            lines.append(f"{pad}    OFFSET 0.0 0.0 0.0")
            lines.append(pad + "  }")
        for c in kids:
            write_joint(c, depth + 1)
        lines.append(pad + "}")

    write_joint(0, 0)

    lines.append("MOTION")
    lines.append(f"Frames: {len(clip)}")
    lines.append(f"Frame Time: {_fmt(1.0 / clip.framerate)}")

    n = len(clip)
    angles = np.empty((n, skel.n_joints, 3))
    for k in range(skel.n_joints):
        q = clip.local_rotations[:, k][:, [1, 2, 3, 0]]
        angles[:, k] = ScipyRotation.from_quat(q).as_euler("ZXY", degrees=True)
    for f in range(n):
        fields = [_fmt(v) for v in clip.root_translations[f]]
        for k in dfs_order:
            fields.extend(_fmt(v) for v in angles[f, k])
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"
