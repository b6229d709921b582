"""Shannon entropy primitives, numerically safe on boundary inputs.

All entropies are in bits (base-2 logarithms) and use the continuity
convention 0*log2(0) == 0.
"""

from __future__ import annotations

import math
from collections.abc import Iterable

from .errors import DomainError

# Inputs this far outside [0, 1] are floating-point slack from upstream
# arithmetic and get clamped; anything worse is rejected.
CLAMP_TOLERANCE = 1e-12

NORMALIZATION_TOLERANCE = 1e-9


def _clamped_probability(p: float, context: str) -> float:
    p = float(p)
    if p < 0.0:
        if p < -CLAMP_TOLERANCE:
            raise DomainError(f"{context}: probability {p!r} lies below 0")
        return 0.0
    if p > 1.0:
        if p > 1.0 + CLAMP_TOLERANCE:
            raise DomainError(f"{context}: probability {p!r} exceeds 1")
        return 1.0
    return p


def binary_entropy(p: float) -> float:
    """Entropy h(p) of a bit with bias ``p``, in bits.

    ``p`` may stray up to 1e-12 outside [0, 1] (clamped); beyond that a
    :class:`DomainError` identifies the offending value.
    """
    p = _clamped_probability(p, "binary_entropy")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def shannon_entropy(dist: Iterable[float]) -> float:
    """Entropy of a normalized discrete distribution, in bits.

    Raises :class:`DomainError` when an entry is not a probability or the
    entries do not sum to 1 within 1e-9 (the error reports the actual sum).
    """
    entries = [_clamped_probability(p, "shannon_entropy") for p in dist]
    total = math.fsum(entries)
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise DomainError(f"shannon_entropy: entries sum to {total!r}, expected 1")
    return -math.fsum(p * math.log2(p) for p in entries if p > 0.0)
