"""Input validation helpers shared by the protocol modules."""

from __future__ import annotations

import operator

from .errors import DomainError


def max_noise(d: int) -> float:
    """Largest depolarizing strength (d-1)/d at which the map stays physical."""
    return (d - 1) / d


def validate_dimension(d) -> int:
    try:
        d = operator.index(d)
    except TypeError:
        raise DomainError(f"dimension must be an integer, got {d!r}") from None
    if d < 2:
        raise DomainError(f"dimension must be at least 2, got {d}")
    return d


def validate_noise(d: int, q) -> float:
    q = float(q)
    bound = max_noise(d)
    if not 0.0 <= q <= bound:
        raise DomainError(
            f"noise probability {q!r} outside [0, (d-1)/d] = [0, {bound}] for d={d}"
        )
    return q


def validate_efficiency(xi) -> float:
    xi = float(xi)
    if not 0.0 < xi <= 1.0:
        raise DomainError(f"negotiation efficiency must lie in (0, 1], got {xi!r}")
    return xi
