"""Parameter domain and regularity-regime classification.

The process is driven by a pair (alpha, gamma) with

    gamma in [0, 1),   alpha in (-1/2 + gamma/2, 1/2 + gamma/2),

which makes the self-similarity index H = alpha - gamma/2 + 1/2 land in
(0, 1).  The position of alpha relative to 1/2 decides which local-path
regime applies: rough sample paths for alpha < 1/2, an extra logarithmic
factor in the modulus at alpha = 1/2, and a continuously differentiable
path (with a rough derivative) for alpha > 1/2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError

# Width of the warning band around the critical index where regime
# classification is still exact but numerics start to degrade.
NEAR_CRITICAL_TOL = 1e-6


@dataclass(frozen=True)
class GfbmParams:
    """Validated parameter pair plus derived similarity indices.

    hurst is the self-similarity index of the process itself;
    hurst_deriv is the similarity index of the pathwise derivative and
    is meaningful only when alpha > 1/2.
    """

    alpha: float
    gamma: float
    hurst: float
    hurst_deriv: float


class RegimeKind(Enum):
    ROUGH = "rough"
    CRITICAL = "critical"
    SMOOTH = "smooth"


@dataclass(frozen=True)
class Regime:
    """Local-regularity regime of a validated parameter pair.

    local_exponent is alpha + 1/2 in the rough regime and, in the smooth
    regime, alpha - 1/2 which applies to the derivative path.  At the
    critical index the modulus carries a full logarithm instead of a
    square-root one, flagged by log_correction.
    """

    kind: RegimeKind
    local_exponent: float
    log_correction: bool


def validate(alpha: float, gamma: float) -> GfbmParams:
    """Check (alpha, gamma) against the open parameter domain.

    Raises DomainError naming the violated inequality and by how much.
    Boundary values are rejected: every downstream result assumes the
    open intervals.
    """
    alpha = float(alpha)
    gamma = float(gamma)
    if not (0.0 <= gamma < 1.0):
        side = gamma - 1.0 if gamma >= 1.0 else gamma
        raise DomainError(
            f"gamma={gamma} outside [0, 1): violates "
            f"{'gamma < 1' if gamma >= 1.0 else 'gamma >= 0'} by {abs(side):.3g}"
        )
    lo = -0.5 + gamma / 2.0
    hi = 0.5 + gamma / 2.0
    if not (lo < alpha < hi):
        if alpha <= lo:
            raise DomainError(
                f"alpha={alpha} violates alpha > gamma/2 - 1/2 = {lo} "
                f"by {lo - alpha:.3g} (boundary excluded)"
            )
        raise DomainError(
            f"alpha={alpha} violates alpha < gamma/2 + 1/2 = {hi} "
            f"by {alpha - hi:.3g} (boundary excluded)"
        )
    hurst = alpha - gamma / 2.0 + 0.5
    return GfbmParams(alpha=alpha, gamma=gamma, hurst=hurst, hurst_deriv=hurst - 1.0)


def validate_causal(alpha: float, gamma: float) -> GfbmParams:
    """Parameters for analyses restricted to the causal component.

    The causal component (and its derivative) is well defined on a wider
    alpha range than the full process: alpha in (-1/2, 3/2) with
    gamma in [0, 1).  The derived hurst field can then leave (0, 1); use
    ``validate`` whenever the full process is involved.
    """
    alpha = float(alpha)
    gamma = float(gamma)
    if not (0.0 <= gamma < 1.0):
        raise DomainError(f"gamma={gamma} outside [0, 1)")
    if not (-0.5 < alpha < 1.5):
        raise DomainError(f"alpha={alpha} outside (-1/2, 3/2) for the causal component")
    hurst = alpha - gamma / 2.0 + 0.5
    return GfbmParams(alpha=alpha, gamma=gamma, hurst=hurst, hurst_deriv=hurst - 1.0)


def classify(params: GfbmParams) -> Regime:
    """Classify the regularity regime of validated parameters.

    The case split is an exact comparison of the stored alpha with 1/2.
    Within NEAR_CRITICAL_TOL of the critical index (but not exactly at
    it) a warning is emitted; the regime is still rough or smooth.
    """
    a = params.alpha
    if a == 0.5:
        return Regime(kind=RegimeKind.CRITICAL, local_exponent=1.0, log_correction=True)
    if abs(a - 0.5) < NEAR_CRITICAL_TOL:
        warnings.warn(
            f"alpha={a} is within {NEAR_CRITICAL_TOL} of the critical index 1/2; "
            "numerical results degrade near the regime boundary",
            stacklevel=2,
        )
    if a < 0.5:
        return Regime(kind=RegimeKind.ROUGH, local_exponent=a + 0.5, log_correction=False)
    return Regime(kind=RegimeKind.SMOOTH, local_exponent=a - 0.5, log_correction=False)
