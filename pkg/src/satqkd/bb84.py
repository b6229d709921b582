"""HD-BB84 key rate from the entropic-uncertainty / Fano bound, plus the
generic noise-tolerance root finder.

Both parties use two complete mutually unbiased d-dimensional bases. With
the basis overlap at its extreme value 1/d, the entropic uncertainty
relation and Fano's inequality give the sifted-pulse rate lower bound

    r >= log2(d) - 2 * (h(q) + q * log2(d - 1))

which is reported as the rate, clamped at zero and scaled by the
negotiation efficiency xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .entropy import binary_entropy
from .errors import DomainError, NumericError
from .validation import (
    max_noise,
    validate_dimension,
    validate_efficiency,
    validate_noise,
)

#: a rate at or below this many bits/pulse counts as "zero" for tolerances
ZERO_RATE_THRESHOLD = 1e-9


@dataclass(frozen=True)
class Bb84Params:
    """Carrier dimension d, depolarizing strength q, negotiation efficiency xi."""

    d: int
    q: float
    xi: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "d", validate_dimension(self.d))
        object.__setattr__(self, "q", validate_noise(self.d, self.q))
        object.__setattr__(self, "xi", validate_efficiency(self.xi))


def bb84_key_rate(params: Bb84Params) -> float:
    """Secret-key rate in bits per sifted pulse, clamped at zero."""
    d, q = params.d, params.q
    penalty = binary_entropy(q) + q * math.log2(d - 1)
    return params.xi * max(0.0, math.log2(d) - 2.0 * penalty)


def bb84_qber(params: Bb84Params) -> float:
    """Per-bit error probability under a balanced d-ary to binary mapping.

    A wrong symbol lands uniformly on the d - 1 alternatives and flips a
    given key bit with probability (d/2) / (d - 1), so the bit error is
    q * d / (2 * (d - 1)). This is a proxy: the protocol itself fixes no
    symbol-to-bit map.
    """
    return params.q * params.d / (2.0 * (params.d - 1))


def noise_tolerance(
    rate_fn: Callable[[float], float],
    d: int,
    threshold: float = ZERO_RATE_THRESHOLD,
    tol: float = 1e-6,
) -> float:
    """Smallest q at which ``rate_fn`` has (numerically) reached zero.

    ``rate_fn`` must be positive at q=0 and monotone non-increasing on
    [0, (d-1)/d]; the boundary is located by bracketing bisection to the
    absolute tolerance ``tol``.
    """
    d = validate_dimension(d)
    q_max = max_noise(d)
    rate_zero = rate_fn(0.0)
    if rate_zero <= 0.0:
        raise DomainError(f"no positive-rate region: rate at q=0 is {rate_zero!r}")
    rate_max = rate_fn(q_max)
    if rate_max > threshold:
        raise NumericError(
            "noise tolerance not bracketed: "
            f"rate(0.0)={rate_zero!r}, rate({q_max!r})={rate_max!r}"
        )
    lo, hi = 0.0, q_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rate_fn(mid) <= threshold:
            hi = mid
        else:
            lo = mid
    return hi
