"""
Explicit round bounds the harness checks every rendezvous against.

ell is the larger of the two starting labels; only starting labels enter
the bounds, whatever labels the rest of the line carries.
"""

from agents import Algorithm, d_crit, first_epochs
from errors import PreconditionError
from numerics import log_star


CANON_FACTOR = 704
BOUND_HEADROOM = 4


def _ceil_log2(n: int) -> int:
    return (n - 1).bit_length()


def canon_bound(distance: int) -> int:
    return CANON_FACTOR * distance


def known_d_bound(distance: int, ell: int, kappa: int) -> int:
    """8 * D * kappa * log*(ell) + 12 * D."""
    return 8 * distance * kappa * log_star(ell) + 12 * distance


def no_d_epochs(distance: int, ell: int) -> int:
    """Number of epochs the unknown-distance envelope allows."""
    big_l = log_star(ell)
    return d_crit(distance) + max(
        2,
        _ceil_log2(big_l) + 2,
        _ceil_log2(12 * distance * distance) + 1,
    )


def no_d_envelope(distance: int, ell: int, kappa: int) -> int:
    """Total rounds of the first no_d_epochs(D, ell) epochs."""
    return first_epochs(no_d_epochs(distance, ell), log_star(ell), kappa)


def applicable_bound(algorithm: Algorithm, distance: int, ell: int, kappa: int) -> int:
    """
    Bound for one scenario.

    Raises:
        PreconditionError: If distance < 1, or ell < 2 for a label-driven algorithm
    """
    if distance < 1:
        raise PreconditionError(f"distance must be >= 1, got {distance}")
    algorithm = Algorithm(algorithm)
    if algorithm == Algorithm.CANON:
        return canon_bound(distance)
    if ell < 2:
        raise PreconditionError(f"ell must be >= 2, got {ell}")
    if algorithm == Algorithm.KNOWN_D:
        return known_d_bound(distance, ell, kappa)
    return no_d_envelope(distance, ell, kappa)


def default_round_budget(algorithm: Algorithm, distance: int, ell: int, kappa: int) -> int:
    """Round budget for a run: the bound with headroom, so regressions time out instead of hanging."""
    return BOUND_HEADROOM * applicable_bound(algorithm, distance, ell, kappa)
