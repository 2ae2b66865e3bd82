"""Binary PGM (P5) / PPM (P6) image files"""

import io
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from app.core.exceptions import ImageDecodeError
from app.core.service.atomic import atomic_write_bytes
from app.imaging.schema import Image
from app.utils.logger import get_logger

logger = get_logger(__name__)

_MODES = {"L": 1, "RGB": 3}


def load_image(path: str | Path) -> Image:
    """
    Read an 8-bit P5/P6 file into an Image with intensities k/255.

    Raises:
        ImageDecodeError: missing file, bad header, 16-bit data or truncated payload
    """
    path = Path(path)
    try:
        with PILImage.open(path, formats=["PPM"]) as handle:
            if handle.mode not in _MODES:
                raise ImageDecodeError(str(path), f"unsupported pixel mode {handle.mode}")
            handle.load()
            data = np.asarray(handle, dtype=np.uint8)
    except ImageDecodeError:
        raise
    except FileNotFoundError as exc:
        raise ImageDecodeError(str(path), "file not found") from exc
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise ImageDecodeError(str(path), str(exc) or exc.__class__.__name__) from exc
    return Image(data.astype(np.float64) / 255.0)


def encode_image(image: Image) -> bytes:
    levels = np.rint(image.pixels * 255.0).astype(np.uint8)
    if image.channels == 1:
        pil = PILImage.fromarray(levels[:, :, 0])
    else:
        pil = PILImage.fromarray(levels)
    buffer = io.BytesIO()
    pil.save(buffer, format="PPM")
    return buffer.getvalue()


def save_image(image: Image, path: str | Path) -> Path:
    """Write P5 for one channel, P6 for three; the write is atomic."""
    path = Path(path)
    atomic_write_bytes(path, encode_image(image))
    logger.debug("image_saved", path=str(path), width=image.width, height=image.height)
    return path
