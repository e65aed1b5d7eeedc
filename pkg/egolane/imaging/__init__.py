from .hough import HoughLine, hough_lines, segment_support
from .morphology import morph, skeletonize
from .ncc import ncc
from .raster import BinaryMap, ColorImage, GrayImage, as_color, as_gray, to_u8
from .warp import Homography, valid_region, warp_ipm

__all__ = [
    "BinaryMap",
    "ColorImage",
    "GrayImage",
    "Homography",
    "HoughLine",
    "as_color",
    "as_gray",
    "hough_lines",
    "morph",
    "ncc",
    "segment_support",
    "skeletonize",
    "to_u8",
    "valid_region",
    "warp_ipm",
]
