"""
Primitive sparsification: uniqueness on the integer lattice, least-importance
pruning and progressive pruning schedules.
"""
import logging
import math
from typing import Callable, Literal, Optional

import numpy as np
from scipy.special import log_expit

from hybridgs.core.errors import DataError, PruneAllError, ScheduleError
from hybridgs.models import GaussianCloud
from hybridgs.schemas.geometry import PruneEvent, PruneSchedule, ScheduleInputs

logger = logging.getLogger(__name__)

ImportanceFn = Callable[[GaussianCloud], np.ndarray]

DEFAULT_PRUNE_FRACTION = 0.001


def deduplicate(
    cloud: GaussianCloud,
    mode: Literal["largest", "first"] = "largest",
) -> tuple[GaussianCloud, np.ndarray]:
    """
    Keep one primitive per integer voxel.

    In "largest" mode the survivor maximizes V = S_x S_y S_z in the activated
    scale domain (equivalently the sum of log-scales); ties go to the lowest
    original index. "first" keeps the lowest original index regardless of size.

    Args:
        cloud: Cloud whose positions hold integer values
        mode: Survivor rule

    Returns:
        (deduplicated cloud in original order, sorted kept indices)

    Raises:
        DataError: If positions are not integer-valued
    """
    pos = cloud.positions
    if not np.array_equal(pos, np.round(pos)):
        raise DataError("deduplicate requires integer positions")

    n = cloud.n
    index = np.arange(n)
    if mode == "largest":
        size_key = -cloud.scale.sum(axis=1)
    else:
        size_key = np.zeros(n)
    order = np.lexsort((index, size_key, pos[:, 2], pos[:, 1], pos[:, 0]))
    sorted_pos = pos[order]
    first = np.ones(n, dtype=bool)
    first[1:] = np.any(sorted_pos[1:] != sorted_pos[:-1], axis=1)
    kept = np.sort(order[first])

    if kept.size < n:
        logger.info(f"[SPARSIFY] Uniqueness removed {n - kept.size} duplicated primitives")
    return cloud.select(kept), kept


def default_importance(cloud: GaussianCloud) -> np.ndarray:
    """
    log(sigmoid(opacity) * exp(s_x + s_y + s_z)): activated opacity times
    activated volume, in the log domain.
    """
    return log_expit(cloud.opacity[:, 0]) + cloud.scale.sum(axis=1)


def prune(
    cloud: GaussianCloud,
    count: int,
    importance: Optional[ImportanceFn] = None,
) -> tuple[GaussianCloud, np.ndarray]:
    """
    Remove the `count` least important primitives.

    Args:
        cloud: Input cloud
        count: Number to remove, 0 <= count < n
        importance: Scoring function; higher means more important

    Returns:
        (pruned cloud in original order, sorted removed indices)

    Raises:
        PruneAllError: If count >= n
    """
    if count < 0:
        raise DataError("prune count must be non-negative")
    if count >= cloud.n:
        raise PruneAllError(f"cannot prune {count} of {cloud.n} primitives")
    if count == 0:
        return cloud, np.empty(0, dtype=np.int64)

    scores = np.asarray((importance or default_importance)(cloud), dtype=np.float64)
    order = np.lexsort((np.arange(cloud.n), scores))
    removed = np.sort(order[:count])
    keep = np.ones(cloud.n, dtype=bool)
    keep[removed] = False
    return cloud.select(keep), removed


def pruning_step(n: int, fraction: float = DEFAULT_PRUNE_FRACTION) -> int:
    """Primitives removed per pruning event, ceil(fraction * n)."""
    return math.ceil(fraction * n)


def plan_schedule(
    T: int,
    T_d: int,
    T_p: int,
    T_u: int,
    I_p: int,
    n_top: int,
    n_target: int,
    T_top: Optional[int] = None,
) -> PruneSchedule:
    """
    Spread pruning from n_top down to n_target over the training timeline.

    F_p = floor((T - T_p)/I_p) events at epochs T_p + j*I_p, each removing
    N' = ceil((n_top - n_target)/F_p) primitives (the last ones only what remains).

    Raises:
        ScheduleError: If the time marks are out of order, n_target > n_top,
            or F_p < 1
    """
    if T_top is None:
        T_top = (T_d + T_p) // 2
    if not (T_d < T_top < T_p < T_u <= T):
        raise ScheduleError(
            f"time marks must satisfy T_d < T_top < T_p < T_u <= T, got "
            f"T_d={T_d} T_top={T_top} T_p={T_p} T_u={T_u} T={T}"
        )
    if I_p < 1:
        raise ScheduleError("pruning interval must be positive")
    if n_target > n_top:
        raise ScheduleError(f"n_target {n_target} exceeds n_top {n_top}")

    F_p = (T - T_p) // I_p
    if F_p < 1:
        raise ScheduleError(f"no pruning event fits: F_p = floor(({T} - {T_p})/{I_p}) = {F_p}")

    n_p = n_top - n_target
    per_event = math.ceil(n_p / F_p)
    events = []
    remaining = n_p
    if n_p > 0:
        for j in range(F_p):
            count = min(per_event, remaining)
            events.append(PruneEvent(epoch=T_p + j * I_p, count=count))
            remaining -= count

    return PruneSchedule(
        T=T, T_d=T_d, T_top=T_top, T_p=T_p, T_u=T_u, I_p=I_p,
        F_p=F_p, per_event_count=per_event,
        n_top=n_top, n_target=n_target, events=events,
    )


def plan_schedule_from(inputs: ScheduleInputs, n_top: int, n_target: int) -> PruneSchedule:
    return plan_schedule(
        inputs.T, inputs.T_d, inputs.T_p, inputs.T_u, inputs.I_p, n_top, n_target, inputs.T_top
    )


def apply_schedule(
    cloud: GaussianCloud,
    schedule: PruneSchedule,
    importance: Optional[ImportanceFn] = None,
) -> tuple[GaussianCloud, np.ndarray]:
    """
    Execute the pruning events in epoch order, re-scoring survivors each time.

    Returns:
        (pruned cloud, sorted original indices of every removed primitive)
    """
    n_top = cloud.n
    alive = np.arange(n_top)
    for event in sorted(schedule.events, key=lambda e: e.epoch):
        if event.count == 0:
            continue
        cloud, removed = prune(cloud, event.count, importance)
        keep = np.ones(alive.size, dtype=bool)
        keep[removed] = False
        alive = alive[keep]
        logger.debug(f"[SPARSIFY] Epoch {event.epoch}: pruned {event.count}, {cloud.n} remain")

    all_removed = np.setdiff1d(np.arange(n_top), alive)
    return cloud, all_removed
