"""Images, Netpbm I/O and proposal warping"""

from app.imaging.repository import load_image, save_image
from app.imaging.schema import Image, WarpConfig
from app.imaging.service import image_mean, quantize, subtract_mean, warp_region

__all__ = [
    "Image",
    "WarpConfig",
    "image_mean",
    "load_image",
    "quantize",
    "save_image",
    "subtract_mean",
    "warp_region",
]
