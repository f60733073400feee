"""
Mask preview renderer
Draws the joint x frame grid of one masked view as a small PNG
"""
import io
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

from PIL import Image, ImageDraw

from ..utils import atomic_write_bytes

Color = Tuple[int, int, int]


class MaskPreviewRenderer:
    """Renders which joints (rows) and frames (columns) a mask removes"""

    def __init__(self, cell: int = 6, header: int = 3, motion_height: int = 12):
        """
        Args:
            cell: Pixel size of one joint/frame cell
            header: Height of the colored mode bar on top
            motion_height: Height of the motion-score strip below the grid (0 to omit)
        """
        self.cell = cell
        self.header = header
        self.motion_height = motion_height

    def render(
        self,
        mode: str,
        num_joints: int,
        num_frames: int,
        joints: Iterable[int] = (),
        frames: Iterable[int] = (),
        degrees: Optional[Sequence[int]] = None,
        motion: Optional[Sequence[float]] = None,
    ) -> Image.Image:
        joints, frames = set(joints), set(frames)
        width = num_frames * self.cell
        strip = self.motion_height if motion is not None else 0
        height = self.header + num_joints * self.cell + strip
        img = Image.new('RGB', (width, height), (0, 0, 0))
        draw = ImageDraw.Draw(img)
        color = self._get_mode_color(mode)

        # mode bar
        draw.rectangle([(0, 0), (width - 1, self.header - 1)], fill=color)

        top_degree = max(degrees) if degrees else 1
        for v in range(num_joints):
            base = self._joint_shade(degrees[v] if degrees else 1, top_degree)
            for t in range(num_frames):
                if v in joints and t in frames:
                    fill = (255, 0, 255)
                elif v in joints or t in frames:
                    fill = color
                else:
                    fill = base
                x0 = t * self.cell
                y0 = self.header + v * self.cell
                draw.rectangle([(x0, y0), (x0 + self.cell - 2, y0 + self.cell - 2)], fill=fill)

        if motion is not None and len(motion):
            peak = max(max(motion), 1e-12)
            bottom = height - 1
            for t, score in enumerate(motion):
                bar = int(round((self.motion_height - 2) * score / peak))
                x0 = t * self.cell
                draw.rectangle([(x0, bottom - bar), (x0 + self.cell - 2, bottom)], fill=(255, 200, 0))
        return img

    def save(self, img: Image.Image, path: Union[str, Path], scale: int = 1) -> Path:
        """Write a PNG atomically, optionally upscaled without smoothing"""
        if scale > 1:
            img = img.resize((img.width * scale, img.height * scale), Image.NEAREST)
        buffer = io.BytesIO()
        img.save(buffer, format='PNG')
        return atomic_write_bytes(path, buffer.getvalue())

    def _joint_shade(self, degree: int, top_degree: int) -> Color:
        level = 40 + int(80 * degree / max(top_degree, 1))
        return (level, level, level)

    def _get_mode_color(self, mode: str) -> Color:
        """Color per masking strategy"""
        colors = {
            'HDSM': (255, 0, 0),
            'LDSM': (0, 255, 0),
            'HMTM': (0, 128, 255),
            'LMTM': (0, 255, 200),
        }
        return colors.get(mode.upper(), (128, 128, 128))
