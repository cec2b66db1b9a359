from typing import Callable, Dict, NamedTuple, Optional, Tuple

import numpy as np

from marl_avoidance.logging import logger
from marl_avoidance.nn.mlp import Params

LossFn = Callable[[Params], Tuple[float, Params]]

# denominators below this are treated as this; tiny gradients are compared absolutely
RELATIVE_FLOOR = 1e-5


class GradCheckResult(NamedTuple):
    """
    Outcome of one gradient check.

    ``worst`` is the accepted error: a coordinate that fails at step h is measured
    again at h/10 and the smaller of its two errors is accepted. ``worst_at_h``
    is the worst error with no retry at all, and ``retried`` counts the coordinates
    that needed the second step.
    """

    worst: float
    worst_at_h: float
    retried: int
    samples: int

    def describe(self, h: float) -> str:
        return (
            f"accepted error is min(err@h, err@h/10) per coordinate; worst err@h={self.worst_at_h:.3e} "
            f"(h={h:g}); {self.retried} of {self.samples} coordinates retried at h/10"
        )


def _relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), RELATIVE_FLOOR)


def _central_difference(fn: LossFn, values: np.ndarray, index: Tuple[int, ...], params: Params, h: float) -> float:
    original = values[index]
    values[index] = original + h
    plus = fn(params)[0]
    values[index] = original - h
    minus = fn(params)[0]
    values[index] = original
    return (plus - minus) / (2.0 * h)


def grad_check_detailed(
    fn: LossFn,
    params: Params,
    sample_count: int,
    h: float = 1e-5,
    rng: Optional[np.random.Generator] = None,
    perturb: float = 0.0,
    tolerance: float = 1e-4,
) -> GradCheckResult:
    """
    Compare fn's analytic gradient with central differences.

    Coordinates are drawn uniformly over all scalar coordinates of ``params``, which
    are perturbed in place and restored bit-exactly. ``perturb`` is added to
    every analytic entry (negative control). A coordinate whose error exceeds
    ``tolerance`` is measured again at h/10; a ReLU kink inside [x-h, x+h]
    makes the first difference meaningless.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    _, grads = fn(params)
    analytic: Dict[str, np.ndarray] = {name: np.array(g, copy=True) for name, g in grads.items()}
    names = sorted(name for name in params if params[name].size > 0)
    sizes = np.array([params[name].size for name in names])
    if sizes.sum() == 0:
        return GradCheckResult(worst=0.0, worst_at_h=0.0, retried=0, samples=0)

    worst = worst_at_h = 0.0
    retried = 0
    flat = rng.integers(0, sizes.sum(), size=sample_count)
    offsets = np.cumsum(sizes) - sizes
    for k in flat:
        slot = int(np.searchsorted(offsets, k, side="right") - 1)
        name = names[slot]
        index = np.unravel_index(int(k - offsets[slot]), params[name].shape)
        expected = float(analytic[name][index]) + perturb
        error = _relative_error(expected, _central_difference(fn, params[name], index, params, h))
        worst_at_h = max(worst_at_h, error)
        if error > tolerance:
            retried += 1
            retry = _relative_error(expected, _central_difference(fn, params[name], index, params, h / 10.0))
            error = min(error, retry)
        worst = max(worst, error)
    result = GradCheckResult(worst=worst, worst_at_h=worst_at_h, retried=retried, samples=sample_count)
    logger.debug(f"grad_check: worst relative error {worst:.3e}; {result.describe(h)}")
    return result


def grad_check(
    fn: LossFn,
    params: Params,
    sample_count: int,
    h: float = 1e-5,
    rng: Optional[np.random.Generator] = None,
    perturb: float = 0.0,
    tolerance: float = 1e-4,
) -> float:
    """Worst accepted relative error; see grad_check_detailed for the acceptance rule."""
    return grad_check_detailed(fn, params, sample_count, h=h, rng=rng, perturb=perturb, tolerance=tolerance).worst
