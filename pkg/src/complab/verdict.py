"""Shared policy turning a sequence of annulus suprema into a tri-state verdict."""

import numpy as np

VANISH_LEVEL = 0.01
BOUNDED_LEVEL = 0.1
TREND_WINDOW = 3
STABILITY_RATIO = 2.0

VANISHING = "vanishing"
BOUNDED = "bounded"
BOUNDED_AWAY = "bounded-away"
INCONCLUSIVE = "inconclusive"


def thresholds():
    return {
        "vanish_level": VANISH_LEVEL,
        "bounded_level": BOUNDED_LEVEL,
        "trend_window": TREND_WINDOW,
        "stability_ratio": STABILITY_RATIO,
    }


def classify(sups, flagged=False, bounded_label=BOUNDED):
    """Verdict for suprema ordered toward the boundary.

    Vanishing: last value below ``VANISH_LEVEL`` and the last three values
    nonincreasing. Bounded: the last three values all above ``BOUNDED_LEVEL``
    with max/min at most ``STABILITY_RATIO``. Anything flagged or else is
    inconclusive.
    """
    s = np.asarray(sups, dtype=float)
    if flagged or s.size < TREND_WINDOW or not np.all(np.isfinite(s)):
        return INCONCLUSIVE
    tail = s[-TREND_WINDOW:]
    if tail[-1] < VANISH_LEVEL and np.all(np.diff(tail) <= 0):
        return VANISHING
    if tail.min() > BOUNDED_LEVEL and tail.max() / tail.min() <= STABILITY_RATIO:
        return bounded_label
    return INCONCLUSIVE
