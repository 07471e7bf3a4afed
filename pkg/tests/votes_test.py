import logging
import math

import numpy as np
import pandas as pd
import pytest
from scipy import stats

import match_domain.votes as votes_module
from conftest import make_rectangle, make_regular_polygon
from core.errors import AcceptanceStarvationError, ConfigError
from match_domain.config import MODE_RM31, MODE_RMRA, MODE_T, VOTE_BLOCK_SIZE
from match_domain.votes import (
    VoteCloud,
    generate_cloud,
    vote_rm31,
    vote_rmra,
    vote_translation,
)
from shape_domain.geometry import RigidMotion, Translation, TriangleSoup, apply
from shape_domain.sampling import RandomSource, build_area_index


# --- A. Experimentos individuales ---

def test_translation_vote_is_b_minus_a(unit_square, l_shape):
    idxA, idxB = build_area_index(unit_square), build_area_index(l_shape)
    vote = vote_translation(idxA, idxB, RandomSource(4))
    a, b = vote.witness
    assert isinstance(vote.transform, Translation)
    assert vote.transform.tx == pytest.approx(b.x - a.x)
    assert vote.transform.ty == pytest.approx(b.y - a.y)


def test_rmra_vote_maps_a_to_b(unit_square, l_shape):
    idxA, idxB = build_area_index(unit_square), build_area_index(l_shape)
    rng = RandomSource(8)
    for _ in range(20):
        vote = vote_rmra(idxA, idxB, rng)
        a, b = vote.witness
        moved = apply(vote.transform, a)
        assert isinstance(vote.transform, RigidMotion)
        assert moved.x == pytest.approx(b.x, abs=1e-12)
        assert moved.y == pytest.approx(b.y, abs=1e-12)


def test_rm31_vote_maps_both_points(disk64):
    idx = build_area_index(disk64)
    rng = RandomSource(15)
    accepted = 0
    for _ in range(200):
        vote = vote_rm31(idx, idx, disk64, rng)
        if vote is None:
            continue
        accepted += 1
        a1, a2, b1, b2 = vote.witness
        for src, dst in ((a1, b1), (a2, b2)):
            moved = apply(vote.transform, src)
            assert moved.x == pytest.approx(dst.x, abs=1e-9)
            assert moved.y == pytest.approx(dst.y, abs=1e-9)
        assert math.dist(a1.as_tuple(), a2.as_tuple()) == pytest.approx(
            math.dist(b1.as_tuple(), b2.as_tuple()))
    assert accepted > 0


# --- B. Nubes ---

def test_cloud_shapes_and_ranges(unit_square):
    cloud = generate_cloud('t', unit_square, unit_square, 1000, seed=1)
    assert cloud.mode == MODE_T
    assert cloud.points.shape == (1000, 2)
    assert cloud.attempted == 1000 and cloud.rejected == 0
    assert np.all(np.abs(cloud.points) <= 1.0)

    rigid = generate_cloud('rmra', unit_square, unit_square, 1000, seed=1)
    assert rigid.mode == MODE_RMRA
    assert rigid.points.shape == (1000, 3)
    assert np.all((rigid.points[:, 0] >= -0.5) & (rigid.points[:, 0] < 0.5))


def test_cloud_reproducible_and_thread_independent(l_shape, unit_square):
    n = 2 * VOTE_BLOCK_SIZE + 123
    one = generate_cloud('rmra', l_shape, unit_square, n, seed=99, threads=1)
    again = generate_cloud('rmra', l_shape, unit_square, n, seed=99, threads=1)
    many = generate_cloud('rmra', l_shape, unit_square, n, seed=99, threads=4)
    np.testing.assert_array_equal(one.points, again.points)
    np.testing.assert_array_equal(one.points, many.points)


def test_prefix_property_across_sizes(unit_square):
    small = generate_cloud('t', unit_square, unit_square, 100, seed=5)
    large = generate_cloud('t', unit_square, unit_square, 5000, seed=5)
    np.testing.assert_array_equal(small.points, large.points[:100])


def test_seeds_differ(unit_square):
    a = generate_cloud('t', unit_square, unit_square, 100, seed=1)
    b = generate_cloud('t', unit_square, unit_square, 100, seed=2)
    assert not np.array_equal(a.points, b.points)


def test_translation_votes_of_tiny_triangle_stay_at_origin():
    tiny = TriangleSoup(np.array([[[0.0, 0.0], [1e-6, 0.0], [0.0, 1e-6]]]))
    cloud = generate_cloud('t', tiny, tiny, 2000, seed=6)
    assert np.all(np.hypot(cloud.points[:, 0], cloud.points[:, 1]) <= 2e-6)


def test_translation_votes_within_minkowski_support(unit_square):
    far = make_rectangle(5.0, 0.0, 1.0, 1.0)
    cloud = generate_cloud('t', unit_square, far, 5000, seed=7)
    tx, ty = cloud.points[:, 0], cloud.points[:, 1]
    assert np.all((tx >= 4.0) & (tx <= 6.0))
    assert np.all((ty >= -1.0) & (ty <= 1.0))


def test_rmra_angle_marginal_is_uniform(unit_square, l_shape):
    cloud = generate_cloud('rmra', unit_square, l_shape, 1_000_000, seed=13)
    observed, _ = np.histogram(cloud.points[:, 0], bins=50, range=(-0.5, 0.5))
    statistic = stats.chisquare(observed).statistic
    assert statistic < stats.chi2.ppf(0.999, 49)


def test_rm31_cloud_accounting(disk64):
    cloud = generate_cloud('rm31', disk64, disk64, 3000, seed=3)
    assert cloud.mode == MODE_RM31
    assert len(cloud) == 3000
    assert cloud.attempted >= 3000
    assert cloud.rejected == cloud.attempted - 3000
    assert 0.0 < cloud.acceptance_rate <= 1.0


def test_rm31_thread_independent(disk64):
    one = generate_cloud('rm31', disk64, disk64, 20000, seed=21, threads=1)
    many = generate_cloud('rm31', disk64, disk64, 20000, seed=21, threads=3)
    np.testing.assert_array_equal(one.points, many.points)
    assert one.attempted == many.attempted


def test_rm31_starvation(monkeypatch):
    monkeypatch.setattr(votes_module, 'RM31_MIN_ATTEMPT_CAP', 20000)
    monkeypatch.setattr(votes_module, 'RM31_ATTEMPTS_PER_VOTE_CAP', 10)
    big = make_regular_polygon(16, radius=10.0)
    tiny = make_rectangle(0.0, 0.0, 1e-3, 1e-3)
    with pytest.raises(AcceptanceStarvationError) as info:
        generate_cloud('rm31', big, tiny, 10, seed=0)
    assert info.value.attempted == 20000
    assert info.value.accepted == 0
    assert info.value.exit_code == 3


def test_rm31_cap_with_some_acceptances_returns_partial_cloud(monkeypatch, disk64, caplog):
    monkeypatch.setattr(votes_module, 'RM31_MIN_ATTEMPT_CAP', 100)
    monkeypatch.setattr(votes_module, 'RM31_ATTEMPTS_PER_VOTE_CAP', 1)
    with caplog.at_level(logging.WARNING):
        cloud = generate_cloud('rm31', disk64, disk64, 10000, seed=2)
    assert 0 < len(cloud) < 10000
    assert cloud.attempted == 10000
    assert cloud.rejected == 10000 - len(cloud)
    assert "RM3+1" in caplog.text


def test_invalid_requests(unit_square):
    with pytest.raises(ConfigError):
        generate_cloud('t', unit_square, unit_square, 0, seed=0)
    with pytest.raises(ConfigError):
        generate_cloud('similarity', unit_square, unit_square, 10, seed=0)


# --- C. VoteCloud ---

def test_vote_cloud_validation():
    with pytest.raises(ValueError):
        VoteCloud('t', np.zeros((3, 2)), attempted=4)
    with pytest.raises(ValueError):
        VoteCloud('rmra', np.zeros((3, 3)), attempted=4, rejected=1)


def test_vote_accessors():
    cloud = VoteCloud('rmra', np.array([[0.1, 1.0, 2.0], [-0.2, 3.0, 4.0]]), attempted=2)
    assert cloud.vote(1).transform == RigidMotion(-0.2, 3.0, 4.0)
    assert len(cloud.votes) == 2
    assert cloud.acceptance_rate == 1.0


def test_csv_export(tmp_path, unit_square):
    cloud = generate_cloud('t', unit_square, unit_square, 50, seed=7)
    path = tmp_path / "votes.csv"
    cloud.to_csv(path)
    frame = pd.read_csv(path)
    assert list(frame.columns) == ['mode', 'alpha', 'tx', 'ty']
    assert frame['alpha'].isna().all()
    assert (frame['mode'] == 'T').all()
    np.testing.assert_array_equal(frame[['tx', 'ty']].to_numpy(), cloud.points)


def test_csv_export_rigid(tmp_path, unit_square):
    cloud = generate_cloud('rmra', unit_square, unit_square, 50, seed=7)
    path = tmp_path / "votes.csv"
    cloud.to_csv(path)
    frame = pd.read_csv(path)
    np.testing.assert_array_equal(frame[['alpha', 'tx', 'ty']].to_numpy(), cloud.points)
