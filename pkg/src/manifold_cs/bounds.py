"""Closed-form covering and measurement-count bounds.

Every bound carries an explicit leading constant (big_o_constant, default 1)
because the asymptotic statements fix none; logs are natural.  These
evaluators are meant for dominance and scaling checks against built
dictionaries and covers, not as tight predictions.
"""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BoundParams:
    """Geometric and embedding parameters shared by the bound evaluators."""

    d: int  # intrinsic dimension
    V: float  # d-dimensional volume
    eps: float = 0.3  # embedding distortion target, in (0, 1/2)
    reach: float | None = None  # curvature/self-avoidance radius
    D: int | None = None  # ambient dimension (uniform bound only)
    J: int = 0  # finest dictionary scale
    C1: float = 1.0  # center separation constant
    big_o_constant: float = 1.0
    j0: int | None = None  # tube scale estimate, when known

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.V <= 0:
            raise ValueError("V must be positive")
        if not (0 < self.eps <= 0.5):
            # closed at 1/2: the closed forms are well defined there and the
            # half-distortion grid point is a common sizing input
            raise ValueError("eps must lie in (0, 1/2]")
        if self.reach is not None and self.reach <= 0:
            raise ValueError("reach must be positive")
        if self.C1 <= 0:
            raise ValueError("C1 must be positive")
        if self.big_o_constant <= 0:
            raise ValueError("big_o_constant must be positive")
        if self.J < 0:
            raise ValueError("J must be >= 0")


def _cover_factor(d):
    return (d / 2.0 + 1.0) ** (d / 2.0 + 1.0) / 2.0 ** (d / 2.0)


def cover_bound(params, delta):
    """Upper bound on the size of a minimal delta-cover of the manifold."""
    if params.reach is None:
        raise ValueError("cover_bound needs reach")
    if not (0 < delta < params.reach):
        raise ValueError("delta must lie in (0, reach); got delta=%g, reach=%g" % (delta, params.reach))
    return params.V * _cover_factor(params.d) / delta**params.d


def center_count_bound(params, j):
    """Upper bound on the number of dictionary cells at scale j.

    Valid for j above both the tube scale j0 and log2(C1/reach) - 2; the
    caller is responsible for that range (j0 is checked when params carry
    it).
    """
    if params.j0 is not None and j <= params.j0:
        raise ValueError("scale j=%d not above the tube scale j0=%d" % (j, params.j0))
    return (
        2.0 ** (params.d * (j + 1.5))
        / params.C1**params.d
        * params.V
        * (params.d / 2.0 + 1.0) ** (params.d / 2.0 + 1.0)
    )


def m_nonuniform(params):
    """Measurement count sufficient for the per-query recovery guarantee.

    ceil(c * (d eps^-2 (J + ln(d/eps)) + eps^-2 ln V)); independent of the
    ambient dimension.
    """
    c = params.big_o_constant
    inv2 = params.eps**-2
    value = c * (
        params.d * inv2 * (params.J + math.log(params.d / params.eps))
        + inv2 * math.log(params.V)
    )
    return max(1, math.ceil(value))


def m_uniform(params):
    """Measurement count sufficient for the uniform stability guarantee.

    ceil(c * (d eps^-2 ln(D/(eps reach)) + d eps^-2 J + eps^-2 ln V)); grows
    logarithmically with the ambient dimension.
    """
    if params.D is None or params.reach is None:
        raise ValueError("m_uniform needs both D and reach")
    c = params.big_o_constant
    inv2 = params.eps**-2
    value = c * (
        params.d * inv2 * math.log(params.D / (params.eps * params.reach))
        + params.d * inv2 * params.J
        + inv2 * math.log(params.V)
    )
    return max(1, math.ceil(value))


def scales_for_precision(delta, reach, constant=1.0):
    """Suggested finest scale J = ceil(c * log2(1/(delta * reach))).

    Substituting this J into m_nonuniform yields the alternative
    d log(d/(delta reach)) sizing; both forms are exposed rather than picking
    one as canonical.
    """
    if delta <= 0 or reach <= 0:
        raise ValueError("delta and reach must be positive")
    return max(0, math.ceil(constant * math.log2(1.0 / (delta * reach))))
