"""HD-Ext-B92: observable statistics, eavesdropper entropy bound, key rate.

The protocol encodes bit 0 in a fixed computational-basis state (the key
state) and bit 1 in an equal superposition of the key state with one partner
basis state. Bob decodes with either a full computational measurement or a
partial projective check onto the superposition; outcomes that rule out the
unsent state are conclusive and form the raw key.

Under a depolarizing channel of strength q on d-dimensional carriers every
observable detection probability is a closed-form function of (d, q). The
asymptotic secret-key rate against collective attacks is

    rate = xi * max(0, S_bound - H_ab)

where S_bound lower-bounds the conditional von Neumann entropy of Alice's
raw bit given the eavesdropper's quantum memory, H_ab is the conditional
Shannon entropy of Alice's bit given Bob's, and xi is the negotiation
efficiency of the classical post-processing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .entropy import binary_entropy, shannon_entropy
from .errors import NumericError
from .validation import (
    validate_dimension,
    validate_efficiency,
    validate_noise,
)

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ObservableStats:
    """Detection probabilities of the protocol states under depolarizing noise.

    p_mm / p_nn / p_psipsi: the sent state is observed intact (all 1 - q).
    p_cross: one fixed wrong computational outcome is observed, q / (d - 1);
        the same value applies whichever protocol state was sent.
    p_conf: cross-basis confusion between the superposition state and either
        of its two computational components.
    """

    d: int
    q: float
    p_mm: float
    p_nn: float
    p_psipsi: float
    p_cross: float
    p_conf: float


def depolarizing_stats(d: int, q: float) -> ObservableStats:
    """Observable statistics for dimension ``d`` and noise ``q``."""
    d = validate_dimension(d)
    q = validate_noise(d, q)
    p_same = 1.0 - q
    p_cross = q / (d - 1)
    p_conf = 0.5 * (1.0 - q * d / (d - 1)) + q / (d - 1)
    return ObservableStats(
        d=d, q=q, p_mm=p_same, p_nn=p_same, p_psipsi=p_same,
        p_cross=p_cross, p_conf=p_conf,
    )


@dataclass(frozen=True)
class JointDistribution:
    """Joint distribution of Alice's and Bob's raw bits on conclusive rounds.

    M is the conclusive-round normalization; the four probabilities sum to 1.
    """

    p00: float
    p01: float
    p10: float
    p11: float
    M: float


def joint_distribution(stats: ObservableStats) -> JointDistribution:
    """Joint raw-bit distribution implied by the observable statistics.

    Bob's bit-0 outcome is "the superposition check misses", his bit-1
    outcome is "the computational measurement misses the key state", so each
    joint weight is one minus a retention probability and M normalizes the
    four weights to a distribution.
    """
    weights = (
        1.0 - stats.p_conf,    # sent key state,      check misses
        1.0 - stats.p_mm,      # sent key state,      computational miss
        1.0 - stats.p_psipsi,  # sent superposition,  check misses
        1.0 - stats.p_conf,    # sent superposition,  computational miss
    )
    M = 0.5 * math.fsum(weights)
    if M <= 0.0:
        raise NumericError(f"conclusive-round normalization M={M!r} is not positive")
    p00, p01, p10, p11 = (w / (2.0 * M) for w in weights)
    return JointDistribution(p00=p00, p01=p01, p10=p10, p11=p11, M=M)


def conditional_entropy_ab(joint: JointDistribution) -> float:
    """Conditional Shannon entropy of Alice's raw bit given Bob's, in bits."""
    h_joint = shannon_entropy((joint.p00, joint.p01, joint.p10, joint.p11))
    h_bob = binary_entropy(joint.p00 + joint.p10)
    # The joint entropy can undercut the marginal one only by rounding dust.
    return max(0.0, h_joint - h_bob)


@dataclass(frozen=True)
class EveBoundTerms:
    """Weights and overlaps feeding the eavesdropper entropy bound.

    Bob's conclusive computational outcomes fall into three classes: the key
    state itself (m), its superposition partner (n), and the d - 2 remaining
    outcomes (c), which share identical statistics and enter ``multiplicity``
    times. Each class carries the squared norms (k0, k1) of the
    eavesdropper's residual states attached to Alice's bit 0 / bit 1 and the
    real part of their overlap. M is the conclusive-round normalization.
    """

    k_c: tuple[float, float]
    k_m: tuple[float, float]
    k_n: tuple[float, float]
    re_c: float
    re_m: float
    re_n: float
    M: float
    multiplicity: int


def eve_bound_terms(stats: ObservableStats) -> EveBoundTerms:
    """Entropy-bound ingredients expressed in observable statistics only."""
    p_mm, p_cross, p_conf = stats.p_mm, stats.p_cross, stats.p_conf
    k_c = (p_cross, p_cross)
    k_m = (0.25 * p_mm, 0.25 * p_conf)
    k_n = (0.75 * p_cross, 0.75 * p_conf)
    re_c = (0.5 * p_cross + p_cross - 0.5 * p_cross) / _SQRT2
    re_m = (0.5 * p_mm + p_conf - 0.5 * p_cross) / (4.0 * _SQRT2)
    re_n = 3.0 * (0.5 * p_cross + p_conf - 0.5 * p_mm) / (4.0 * _SQRT2)
    return EveBoundTerms(
        k_c=k_c, k_m=k_m, k_n=k_n, re_c=re_c, re_m=re_m, re_n=re_n,
        M=joint_distribution(stats).M, multiplicity=stats.d - 2,
    )


def _class_entropy(k0: float, k1: float, re: float) -> float:
    # A vanishing residual state on either bit contributes no uncertainty.
    if k0 <= 0.0 or k1 <= 0.0:
        return 0.0
    total = k0 + k1
    spread = math.sqrt(max(0.0, (k0 - k1) ** 2 + 4.0 * re * re))
    delta = 0.5 + spread / (2.0 * total)
    # binary_entropy clamps the <=1e-12 float excursions delta can pick up.
    return binary_entropy(k0 / total) - binary_entropy(delta)


def von_neumann_lower_bound(terms: EveBoundTerms) -> float:
    """Lower bound on the eavesdropper-conditional entropy S(a|E), in bits."""
    contributions = (
        (terms.multiplicity, terms.k_c, terms.re_c),
        (1, terms.k_m, terms.re_m),
        (1, terms.k_n, terms.re_n),
    )
    total = 0.0
    for count, (k0, k1), re in contributions:
        if count:
            total += count * ((k0 + k1) / terms.M) * _class_entropy(k0, k1, re)
    return max(0.0, total)


def ext_b92_key_rate(d: int, q: float, xi: float = 1.0) -> float:
    """Asymptotic secret-key rate in bits per conclusive pulse.

    Negative entropy margins clamp to zero; the result scales linearly with
    the negotiation efficiency ``xi``.
    """
    xi = validate_efficiency(xi)
    stats = depolarizing_stats(d, q)
    s_bound = von_neumann_lower_bound(eve_bound_terms(stats))
    h_ab = conditional_entropy_ab(joint_distribution(stats))
    return xi * max(0.0, s_bound - h_ab)


def ext_b92_qber(d: int, q: float) -> float:
    """Probability that conclusive raw bits disagree, p01 + p10."""
    joint = joint_distribution(depolarizing_stats(d, q))
    return joint.p01 + joint.p10
