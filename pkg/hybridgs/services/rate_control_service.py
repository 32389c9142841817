"""
Rate control for the explicit representation.

Size before entropy coding is n * P_bit / 8 bytes; the downstream lossless
stage divides it by roughly L. Method 1 controls the primitive count through
progressive pruning, method 2 lowers every attribute bit depth uniformly.
"""
import logging
import math
from typing import Optional

from hybridgs.core.errors import DataError, InfeasibleRateError
from hybridgs.schemas.geometry import ScheduleInputs
from hybridgs.schemas.rate import DeltaPlan, DeltaStep, Method1Plan, RateModel
from hybridgs.services.sparsify_service import plan_schedule_from

logger = logging.getLogger(__name__)


def bits_per_primitive(model: RateModel) -> int:
    """P_bit = 3(BD_p + BD_s) + k_c BD_c + BD_o + k_r BD_r"""
    return model.p_bit


def estimate_size(model: RateModel, n: int) -> float:
    """Coded size estimate in bytes: n * P_bit / (8 L)."""
    if n < 0:
        raise DataError("primitive count must be non-negative")
    return n * model.p_bit / (8 * model.lossless_ratio)


def pre_codec_sizes(model: RateModel, n: int) -> dict[str, float]:
    """Bytes of each component before entropy coding: n * channels * BD / 8."""
    return {
        "position": n * 3 * model.bd_p / 8,
        "color": n * model.k_c * model.bd_c / 8,
        "opacity": n * model.bd_o / 8,
        "scale": n * 3 * model.bd_s / 8,
        "rotation": n * model.k_r * model.bd_r / 8,
    }


def plan_method1(
    budget: float,
    model: RateModel,
    n_top: int,
    schedule_inputs: Optional[ScheduleInputs] = None,
) -> Method1Plan:
    """
    Largest primitive count whose estimated size fits the budget.

    n_target = floor(B L 8 / P_bit), capped at n_top; pruning from n_top to
    n_target is spread over a progressive schedule.

    Args:
        budget: Target coded size B in bytes
        model: Rate model (bit depths, latent widths, L)
        n_top: Primitive count before pruning
        schedule_inputs: Time marks for the pruning schedule

    Returns:
        Method1Plan with n_target and the schedule

    Raises:
        InfeasibleRateError: If not even one primitive fits
    """
    if budget <= 0:
        raise DataError("target size must be positive")
    if model.p_bit == 0:
        raise DataError("rate model has zero bits per primitive")

    n_target = math.floor(budget * model.lossless_ratio * 8 / model.p_bit)
    # Settle floating-point edge cases against the size estimate itself
    while n_target > 0 and estimate_size(model, n_target) > budget:
        n_target -= 1
    while estimate_size(model, n_target + 1) <= budget:
        n_target += 1
    if n_target < 1:
        raise InfeasibleRateError(
            f"target {budget:.0f} B cannot hold a single primitive at {model.p_bit} bits"
        )

    n_target = min(n_target, n_top)
    schedule = plan_schedule_from(schedule_inputs or ScheduleInputs(), n_top, n_target)
    logger.info(f"[RATE] Method 1: keep {n_target} of {n_top} primitives for {budget:.0f} B")
    return Method1Plan(
        n_target=n_target,
        n_top=n_top,
        estimated_bytes=estimate_size(model, n_target),
        schedule=schedule,
    )


def delta_bits(model: RateModel, delta: int) -> int:
    """Bits saved per primitive by lowering every attribute bit depth by delta."""
    return delta * model.attribute_channels


def reduce_bit_depths(model: RateModel, delta: int) -> RateModel:
    """Lower BD_c, BD_o, BD_s, BD_r by delta, flooring each at 1."""
    lower = lambda bd: bd if bd == 0 else max(bd - delta, 1)  # noqa: E731
    return model.model_copy(
        update={
            "bd_c": lower(model.bd_c),
            "bd_o": lower(model.bd_o),
            "bd_s": lower(model.bd_s),
            "bd_r": lower(model.bd_r),
        }
    )


def plan_method2(budget: float, model: RateModel, n: int) -> DeltaPlan:
    """
    Smallest uniform attribute bit-depth reduction that meets the budget.

    Position bit depth is never touched. Each reduced bit depth is floored at 1.

    Returns:
        DeltaPlan with delta, reduced model and the progressive steps 0..delta

    Raises:
        InfeasibleRateError: If positions alone exceed the budget, or if the
            budget is unmet with every attribute at 1 bit
    """
    if budget <= 0:
        raise DataError("target size must be positive")

    position_floor = n * 3 * model.bd_p / (8 * model.lossless_ratio)
    if position_floor > budget:
        raise InfeasibleRateError(
            f"position rate {position_floor:.0f} B alone exceeds the target {budget:.0f} B; "
            f"bit-depth adaptation cannot reach it"
        )

    steps = []
    max_delta = max(model.bd_c, model.bd_o, model.bd_s, model.bd_r)
    for delta in range(max_delta + 1):
        reduced = reduce_bit_depths(model, delta)
        size = estimate_size(reduced, n)
        steps.append(DeltaStep(delta=delta, p_bit=reduced.p_bit, estimated_bytes=size))
        if size <= budget:
            logger.info(f"[RATE] Method 2: lower attribute bit depths by {delta} for {budget:.0f} B")
            return DeltaPlan(
                delta=delta,
                delta_p_bit=model.p_bit - reduced.p_bit,
                model=reduced,
                steps=steps,
            )
        if reduced.p_bit == reduce_bit_depths(model, delta + 1).p_bit:
            break

    raise InfeasibleRateError(
        f"target {budget:.0f} B is unmet even with every attribute at 1 bit"
    )


def measure_lossless_ratio(pre_codec_bytes: float, coded_bytes: int) -> float:
    """L measured from one encode pass."""
    if coded_bytes <= 0:
        raise DataError("coded size must be positive")
    return pre_codec_bytes / coded_bytes
