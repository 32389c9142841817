import numpy as np
import pytest

from hybridgs.core.errors import DataError, PruneAllError, ScheduleError
from hybridgs.schemas.geometry import ScheduleInputs
from hybridgs.services.sparsify_service import (
    apply_schedule,
    deduplicate,
    default_importance,
    plan_schedule,
    plan_schedule_from,
    prune,
    pruning_step,
)
from tests.helpers import make_cloud


def _lattice_cloud(positions, scale_sums):
    cloud = make_cloud(len(positions))
    scale = np.repeat(np.asarray(scale_sums, dtype=np.float64)[:, None] / 3.0, 3, axis=1)
    return cloud.replace(positions=np.asarray(positions, dtype=np.float64), scale=scale)


# Uniqueness

def test_largest_primitive_survives():
    cloud = _lattice_cloud([[1, 2, 3], [1, 2, 3], [0, 0, 0]], [-3.0, 0.0, -1.0])
    out, kept = deduplicate(cloud)
    assert kept.tolist() == [1, 2]
    assert out.n == 2
    assert np.array_equal(out.positions, cloud.positions[[1, 2]])


def test_ties_keep_lowest_index():
    cloud = _lattice_cloud([[4, 4, 4], [4, 4, 4], [4, 4, 4]], [0.0, 0.0, 0.0])
    _, kept = deduplicate(cloud)
    assert kept.tolist() == [0]


def test_first_mode_ignores_size():
    cloud = _lattice_cloud([[1, 2, 3], [1, 2, 3]], [-3.0, 0.0])
    _, kept = deduplicate(cloud, mode="first")
    assert kept.tolist() == [0]


def test_unique_positions_untouched():
    cloud = _lattice_cloud([[0, 0, 0], [0, 0, 1], [1, 0, 0]], [0.0, 1.0, 2.0])
    out, kept = deduplicate(cloud)
    assert kept.tolist() == [0, 1, 2]
    assert out.equals(cloud)


def test_deduplicate_requires_integer_positions():
    cloud = _lattice_cloud([[0.5, 0, 0], [1, 0, 0]], [0.0, 0.0])
    with pytest.raises(DataError):
        deduplicate(cloud)


def test_deduplicated_positions_are_distinct():
    positions = np.random.default_rng(1).integers(-3, 4, size=(2000, 3))
    out, _ = deduplicate(_lattice_cloud(positions, np.zeros(2000)))
    assert np.unique(out.positions, axis=0).shape[0] == out.n


# Pruning

def test_transparent_primitive_is_pruned_first():
    cloud = make_cloud(1000)
    opacity = np.full((1000, 1), 2.0)
    opacity[417, 0] = -100.0
    cloud = cloud.replace(opacity=opacity, scale=np.zeros((1000, 3)))
    out, removed = prune(cloud, 1)
    assert removed.tolist() == [417]
    assert out.n == 999


def test_prune_zero_is_identity():
    cloud = make_cloud(50)
    out, removed = prune(cloud, 0)
    assert removed.size == 0
    assert out.equals(cloud)


def test_prune_everything_fails():
    with pytest.raises(PruneAllError):
        prune(make_cloud(10), 10)


def test_prune_with_custom_importance():
    cloud = make_cloud(20)
    _, removed = prune(cloud, 3, importance=lambda c: np.arange(c.n, dtype=float)[::-1])
    assert removed.tolist() == [17, 18, 19]


def test_default_importance_is_log_opacity_times_volume():
    cloud = make_cloud(50)
    volume = np.exp(cloud.scale.sum(axis=1))
    opacity = 1.0 / (1.0 + np.exp(-cloud.opacity[:, 0]))
    np.testing.assert_allclose(default_importance(cloud), np.log(opacity * volume), rtol=1e-12, atol=1e-12)

    extreme = cloud.replace(opacity=np.full((50, 1), -1e4), scale=np.full((50, 3), 500.0))
    assert np.isfinite(default_importance(extreme)).all()


@pytest.mark.parametrize("n, step", [(1000, 1), (1001, 2), (56_797, 57), (1, 1)])
def test_pruning_step(n, step):
    assert pruning_step(n) == step


# Schedules

def test_schedule_event_count():
    schedule = plan_schedule(70_000, 15_000, 36_000, 66_000, 2_500, n_top=10_000, n_target=3_500)
    assert schedule.F_p == 13
    assert schedule.per_event_count == 500
    assert [e.epoch for e in schedule.events] == [36_000 + j * 2_500 for j in range(13)]
    assert sum(e.count for e in schedule.events) == 6_500


def test_schedule_last_event_takes_remainder():
    schedule = plan_schedule(70_000, 15_000, 36_000, 66_000, 2_500, n_top=1_000, n_target=990)
    counts = [e.count for e in schedule.events]
    assert sum(counts) == 10
    assert max(counts) == 1


def test_schedule_without_pruning_is_empty():
    schedule = plan_schedule(70_000, 15_000, 36_000, 66_000, 2_500, n_top=5_000, n_target=5_000)
    assert schedule.per_event_count == 0
    assert schedule.events == []


def test_schedule_default_top_mark():
    schedule = plan_schedule_from(ScheduleInputs(), 100, 50)
    assert schedule.T_top == 25_500


@pytest.mark.parametrize("marks", [
    dict(T=70_000, T_d=36_000, T_p=36_000, T_u=66_000, I_p=2_500),
    dict(T=70_000, T_d=15_000, T_p=36_000, T_u=80_000, I_p=2_500),
    dict(T=37_000, T_d=15_000, T_p=36_000, T_u=37_000, I_p=2_500),
])
def test_schedule_rejects_bad_marks(marks):
    with pytest.raises(ScheduleError):
        plan_schedule(**marks, n_top=100, n_target=50)


def test_schedule_rejects_growth():
    with pytest.raises(ScheduleError):
        plan_schedule(70_000, 15_000, 36_000, 66_000, 2_500, n_top=100, n_target=101)


def test_apply_schedule_removes_the_difference():
    cloud = make_cloud(300)
    schedule = plan_schedule(70_000, 15_000, 36_000, 66_000, 2_500, n_top=300, n_target=170)
    out, removed = apply_schedule(cloud, schedule)
    assert out.n == 170
    assert removed.size == 130
    keep = np.setdiff1d(np.arange(300), removed)
    assert out.equals(cloud.select(keep))
