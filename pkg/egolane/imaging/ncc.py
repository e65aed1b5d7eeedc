import cv2
import numpy as np

_ZERO_VARIANCE = 1e-9


def ncc(a: np.ndarray, b: np.ndarray) -> float:
    """Zero-mean normalized cross-correlation of two same-size patches, in [-1, 1].

    A constant patch has no defined correlation; it scores 0.
    """
    if a.shape != b.shape:
        raise ValueError(f"ncc needs equal shapes, got {a.shape} and {b.shape}")
    fa = a.astype(np.float32)
    fb = b.astype(np.float32)
    if fa.std() < _ZERO_VARIANCE or fb.std() < _ZERO_VARIANCE:
        return 0.0
    score = cv2.matchTemplate(fa, fb, cv2.TM_CCOEFF_NORMED)[0, 0]
    return float(np.clip(score, -1.0, 1.0))
