"""Text formatting shared by the plain-text artifact formats"""

import math


def fmt_float(value: float) -> str:
    """Shortest-safe decimal form; 17 significant digits always round-trip a float64."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


def fmt_box(box: tuple[float, float, float, float]) -> str:
    return " ".join(fmt_float(v) for v in box)
