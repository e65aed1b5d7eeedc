import numpy as np

from egolane.features import FeatureMaps
from models import CrosswalkResult, RoadSign


def remove_markings(
    maps: FeatureMaps,
    crosswalk: CrosswalkResult,
    signs: list[RoadSign],
    margin: int = 2,
) -> FeatureMaps:
    """Clear a detected crosswalk and every sign box (grown by `margin`) from all maps."""
    boxes = [s.bbox for s in signs]
    if crosswalk.detected and crosswalk.region is not None:
        boxes.append(crosswalk.region)
    if not boxes:
        return maps
    shape = maps.srf.shape
    mask = np.zeros(shape, dtype=bool)
    for box in boxes:
        grown = box.expanded(margin, shape)
        mask[grown.y:grown.y2, grown.x:grown.x2] = True
    return maps.cleared(mask)
