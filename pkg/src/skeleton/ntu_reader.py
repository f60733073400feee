"""
NTU RGB+D .skeleton reader and writer

Layout: a frame-count line, then per frame a body-count line and per body a header
line (bodyID and nine tracking fields), a joint-count line and one line per joint
whose first three fields are x y z.
"""
import logging
import re
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import EmptyFile, MalformedRecord, NonNumericField
from .graph import SkeletonGraph, build_ntu_graph
from .sequence import SkeletonSequence

logger = logging.getLogger(__name__)

BODY_HEADER_FIELDS = 10
JOINT_FIELDS = 12
ACTION_PATTERN = re.compile(r'A(\d{3})')


class _Lines:
    """Line cursor that reports 1-based line numbers"""

    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next_fields(self, what: str) -> Tuple[List[str], int]:
        if self.pos >= len(self.lines):
            raise MalformedRecord(f"file ended while reading {what}", self.pos + 1)
        line_no = self.pos + 1
        fields = self.lines[self.pos].split()
        self.pos += 1
        return fields, line_no

    def next_int(self, what: str) -> int:
        fields, line_no = self.next_fields(what)
        if len(fields) != 1:
            raise MalformedRecord(f"expected a single {what}, found {len(fields)} fields", line_no)
        try:
            value = int(fields[0])
        except ValueError:
            raise NonNumericField(f"{what} '{fields[0]}' is not an integer", line_no)
        if value < 0:
            raise MalformedRecord(f"{what} is negative", line_no)
        return value

    def trailing_content(self) -> Optional[int]:
        for i in range(self.pos, len(self.lines)):
            if self.lines[i].strip():
                return i + 1
        return None


def _decode(text: Union[bytes, str]) -> str:
    if isinstance(text, bytes):
        return text.decode('utf-8', errors='strict')
    return text


def parse_ntu_skeleton(
    text: Union[bytes, str],
    graph: Optional[SkeletonGraph] = None,
    label: Optional[int] = None,
) -> List[SkeletonSequence]:
    """
    Parse one .skeleton file
    Args:
        text: File contents
        graph: Skeleton topology (defaults to the NTU graph)
        label: Action label attached to every body
    Returns:
        One sequence per tracked body, ordered by first appearance
    """
    graph = graph or build_ntu_graph()
    text = _decode(text)
    if not text.strip():
        raise EmptyFile("skeleton file is empty")

    cursor = _Lines(text)
    num_frames = cursor.next_int("frame count")
    if num_frames < 2:
        raise MalformedRecord(f"need at least 2 frames, found {num_frames}", 1)

    bodies: Dict[str, np.ndarray] = {}
    order: List[str] = []
    for t in range(num_frames):
        num_bodies = cursor.next_int("body count")
        for _ in range(num_bodies):
            header, line_no = cursor.next_fields("body header")
            if len(header) != BODY_HEADER_FIELDS:
                raise MalformedRecord(
                    f"body header has {len(header)} fields, expected {BODY_HEADER_FIELDS}", line_no)
            body_id = header[0]
            num_joints = cursor.next_int("joint count")
            if num_joints != graph.num_joints:
                raise MalformedRecord(
                    f"joint count {num_joints} does not match the {graph.num_joints}-joint skeleton",
                    cursor.pos)
            if body_id not in bodies:
                # bodies that appear mid-clip stay zero before their first frame
                bodies[body_id] = np.zeros((3, num_frames, graph.num_joints))
                order.append(body_id)
            coords = bodies[body_id]
            for v in range(num_joints):
                fields, line_no = cursor.next_fields("joint line")
                if len(fields) < 3 or len(fields) > JOINT_FIELDS:
                    raise MalformedRecord(
                        f"joint line has {len(fields)} fields, expected 3 to {JOINT_FIELDS}", line_no)
                try:
                    xyz = [float(f) for f in fields[:3]]
                except ValueError:
                    raise NonNumericField(f"non-numeric coordinate in '{' '.join(fields[:3])}'", line_no)
                if not all(np.isfinite(xyz)):
                    raise NonNumericField("non-finite coordinate", line_no)
                coords[:, t, v] = xyz

    extra = cursor.trailing_content()
    if extra is not None:
        raise MalformedRecord("unexpected content after the last frame", extra)

    return [SkeletonSequence(data=bodies[b], graph=graph, label=label) for b in order]


def format_ntu_skeleton(sequences: Sequence[SkeletonSequence]) -> bytes:
    """
    Write sequences as one .skeleton file, one body per sequence, every body in every frame
    """
    if not sequences:
        raise ValueError("nothing to write")
    num_frames = sequences[0].shape[1]
    out = [str(num_frames)]
    for t in range(num_frames):
        out.append(str(len(sequences)))
        for b, seq in enumerate(sequences):
            body_id = 72057594037930000 + b
            out.append(f"{body_id} 0 0 0 0 0 0 0.0 0.0 2")
            out.append(str(seq.shape[2]))
            for v in range(seq.shape[2]):
                x, y, z = (repr(float(c)) for c in seq.data[:, t, v])
                out.append(f"{x} {y} {z} 0 0 0 0 0 0 0 0 2")
    return ('\n'.join(out) + '\n').encode('utf-8')


def action_label(path: Union[str, Path]) -> Optional[int]:
    """Zero-based action class from an NTU file name such as S001C001P001R001A050"""
    match = ACTION_PATTERN.search(Path(path).stem)
    return int(match.group(1)) - 1 if match else None


def read_skeleton_file(path: Union[str, Path], graph: Optional[SkeletonGraph] = None) -> List[SkeletonSequence]:
    path = Path(path)
    try:
        return parse_ntu_skeleton(path.read_bytes(), graph=graph, label=action_label(path))
    except MalformedRecord as e:
        raise type(e)(f"{path}: {e}") from None
    except EmptyFile:
        raise EmptyFile(f"{path}: skeleton file is empty") from None


def iter_skeleton_paths(root: Union[str, Path]) -> Iterator[Path]:
    root = Path(root)
    if root.is_file():
        yield root
        return
    yield from sorted(root.rglob('*.skeleton'))
