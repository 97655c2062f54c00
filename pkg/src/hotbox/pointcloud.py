"""Point-cloud ingest, voxel downsampling, and chunked publishing.

Frames come from XYZ text files (line 1: `XYZ1 <count> <has_color:0|1>`,
then one `x y z [r g b]` row per point). The voxel grid is anchored at the
world origin with half-open cells [k*leaf, (k+1)*leaf) so bucketing is
deterministic and independent of the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from hotbox.messages import Envelope, Header
from hotbox.kinematics import _kernels

DEFAULT_LEAF = 0.01
DEFAULT_MAX_POINTS_PER_MSG = 4096
CLOUD_TOPIC = "/cloud/points"


class ParseError(ValueError):
    """kind: magic | truncated | nonfinite | syntax."""

    def __init__(self, kind, detail="", expected=None, got=None, row=None):
        self.kind = kind
        self.expected = expected
        self.got = got
        self.row = row
        super().__init__(f"{kind}: {detail}" if detail else kind)


class ParamError(ValueError):
    pass


@dataclass
class PointCloudFrame:
    header: Header = field(default_factory=Header)
    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    colors: Optional[np.ndarray] = None  # (n, 3) uint8 or None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if self.colors is not None:
            self.colors = np.asarray(self.colors, dtype=np.uint8).reshape(-1, 3)
            if len(self.colors) != len(self.points):
                raise ValueError("colors length must match points length")

    def __len__(self):
        return len(self.points)


def parse_xyz(data) -> PointCloudFrame:
    """Parse an XYZ frame file (bytes or text)."""
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError("syntax", str(e)) from None
    lines = data.splitlines()
    if not lines:
        raise ParseError("magic", "empty input")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "XYZ1":
        raise ParseError("magic", f"bad header line {lines[0]!r}")
    try:
        count = int(head[1])
        has_color = int(head[2])
    except ValueError:
        raise ParseError("magic", f"bad header line {lines[0]!r}") from None
    if count < 0 or has_color not in (0, 1):
        raise ParseError("magic", f"bad header values {lines[0]!r}")

    rows = [ln for ln in lines[1:] if ln.strip()]
    if len(rows) < count:
        raise ParseError("truncated", f"expected {count} rows, got {len(rows)}", expected=count, got=len(rows))
    if len(rows) > count:
        raise ParseError("syntax", f"expected {count} rows, got {len(rows)} (trailing data)")

    width = 6 if has_color else 3
    points = np.zeros((count, 3))
    colors = np.zeros((count, 3), dtype=np.uint8) if has_color else None
    for i, ln in enumerate(rows):
        parts = ln.split()
        if len(parts) != width:
            raise ParseError("syntax", f"row {i}: expected {width} columns, got {len(parts)}", row=i)
        try:
            x, y, z = float(parts[0]), float(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError("syntax", f"row {i}: bad number", row=i) from None
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise ParseError("nonfinite", f"row {i}", row=i)
        points[i] = (x, y, z)
        if has_color:
            try:
                r, g, b = int(parts[3]), int(parts[4]), int(parts[5])
            except ValueError:
                raise ParseError("syntax", f"row {i}: bad color", row=i) from None
            if not all(0 <= c <= 255 for c in (r, g, b)):
                raise ParseError("syntax", f"row {i}: color out of range", row=i)
            colors[i] = (r, g, b)
    return PointCloudFrame(points=points, colors=colors)


def write_xyz(frame: PointCloudFrame) -> str:
    has_color = frame.colors is not None
    out = [f"XYZ1 {len(frame)} {1 if has_color else 0}"]
    for i in range(len(frame)):
        x, y, z = (float(v) for v in frame.points[i])
        if has_color:
            r, g, b = (int(v) for v in frame.colors[i])
            out.append(f"{x!r} {y!r} {z!r} {r} {g} {b}")
        else:
            out.append(f"{x!r} {y!r} {z!r}")
    return "\n".join(out) + "\n"


def voxel_downsample(frame: PointCloudFrame, leaf: float) -> PointCloudFrame:
    """One centroid per occupied voxel, ordered by lexicographic voxel index."""
    if not (isinstance(leaf, (int, float)) and math.isfinite(leaf) and leaf > 0):
        raise ParamError(f"leaf must be positive, got {leaf!r}")
    n = len(frame)
    if n == 0:
        return PointCloudFrame(header=frame.header, points=np.zeros((0, 3)), colors=None if frame.colors is None else np.zeros((0, 3), np.uint8))
    keys = np.floor(frame.points / leaf).astype(np.int64)
    order = np.lexsort((keys[:, 2], keys[:, 1], keys[:, 0])).astype(np.int64)
    has_cols = frame.colors is not None
    cols = frame.colors.astype(np.float64) if has_cols else np.zeros((0, 3))
    cent, cmean, _counts = _kernels.voxel_accumulate(order, keys, frame.points, cols, has_cols)
    out_colors = None
    if has_cols:
        out_colors = np.clip(np.rint(cmean), 0, 255).astype(np.uint8)
    return PointCloudFrame(header=frame.header, points=cent, colors=out_colors)


def publish_cloud(frame: PointCloudFrame, max_points_per_msg: int = DEFAULT_MAX_POINTS_PER_MSG):
    """Split a frame into publish envelopes on the cloud topic.

    Every chunk carries (frame_seq, chunk i, of N) and the last-chunk flag;
    an empty frame still yields one empty chunk so consumers can clear.
    """
    if max_points_per_msg < 1:
        raise ParamError("max_points_per_msg must be >= 1")
    n = len(frame)
    total = max(1, math.ceil(n / max_points_per_msg))
    envs = []
    for i in range(total):
        lo = i * max_points_per_msg
        hi = min(n, lo + max_points_per_msg)
        msg = {
            "frame_seq": int(frame.header.seq),
            "chunk": i,
            "of": total,
            "last": i == total - 1,
            "points": [[float(x), float(y), float(z)] for x, y, z in frame.points[lo:hi]],
        }
        if frame.colors is not None:
            msg["colors"] = [[int(r), int(g), int(b)] for r, g, b in frame.colors[lo:hi]]
        envs.append(Envelope(op="publish", topic=CLOUD_TOPIC, msg=msg))
    return envs


def reassemble_chunks(payloads) -> PointCloudFrame:
    """Join chunk payloads (any order) back into a frame; the inverse of
    publish_cloud for a single frame_seq."""
    if not payloads:
        raise ValueError("no chunks")
    chunks = sorted(payloads, key=lambda p: p["chunk"])
    seqs = {p["frame_seq"] for p in chunks}
    if len(seqs) != 1:
        raise ValueError(f"chunks from multiple frames: {sorted(seqs)}")
    of = chunks[0]["of"]
    if [c["chunk"] for c in chunks] != list(range(of)):
        raise ValueError("missing or duplicate chunks")
    points = [p for c in chunks for p in c["points"]]
    colors = None
    if any("colors" in c for c in chunks):
        colors = [col for c in chunks for col in c.get("colors", [])]
        if len(colors) != len(points):
            raise ValueError("colors length != points length")
    frame_seq = chunks[0]["frame_seq"]
    return PointCloudFrame(
        header=Header(seq=frame_seq),
        points=np.array(points, dtype=np.float64).reshape(-1, 3),
        colors=np.array(colors, dtype=np.uint8).reshape(-1, 3) if colors is not None else None,
    )
