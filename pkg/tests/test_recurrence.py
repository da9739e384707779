import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from radtd.errors import ConfigError
from radtd.recurrence import (
    EmbeddingConfig,
    RecurrenceMatrix,
    embed,
    load_urp_csv,
    rqa_indicators,
    rqa_stack,
    save_urp_csv,
    save_urp_pgm,
    threshold_rp,
    urp,
    urp_stack,
    urp_to_image,
)


def brute_force_rqa(b, l_min=2, v_min=2):
    """Line enumeration straight from the definitions."""
    b = np.asarray(b, dtype=bool)
    n = b.shape[0]
    total = int(b.sum())
    rr = total / (n * n)

    on_diag_lines = 0
    for offset in range(-(n - 1), n):
        if offset == 0:
            continue
        run = 0
        for v in list(np.diagonal(b, offset)) + [False]:
            if v:
                run += 1
            else:
                if run >= l_min:
                    on_diag_lines += run
                run = 0
    off_points = total - int(np.trace(b))
    det = on_diag_lines / off_points if off_points else 0.0

    on_vertical = 0
    for j in range(n):
        run = 0
        for v in list(b[:, j]) + [False]:
            if v:
                run += 1
            else:
                if run >= v_min:
                    on_vertical += run
                run = 0
    lam = on_vertical / total if total else 0.0
    return rr, det, lam


def brute_force_urp(window, m, tau):
    z = np.asarray(window, dtype=np.float64).reshape(len(window), -1)
    n = len(z) - 1 - (m - 1) * tau
    vecs = [np.concatenate([z[j + i * tau] for i in range(m)]) for j in range(1, n + 1)]
    return np.array([[np.linalg.norm(a - b) for b in vecs] for a in vecs])


def test_embedding_skips_first_observation():
    phase = embed(np.arange(5.0), EmbeddingConfig(1, 1))
    np.testing.assert_array_equal(phase[:, 0], [1.0, 2.0, 3.0, 4.0])


def test_embedding_with_delay():
    phase = embed(np.arange(7.0), EmbeddingConfig(m=2, tau=2))
    # n = 7 - 1 - 2 = 4
    np.testing.assert_array_equal(phase, [[1, 3], [2, 4], [3, 5], [4, 6]])


def test_window_too_short_for_embedding():
    with pytest.raises(ConfigError):
        embed(np.arange(3.0), EmbeddingConfig(m=3, tau=1))


def test_urp_known_values():
    rm = urp(np.array([0.0, 0.0, 1.0, 3.0]), EmbeddingConfig())
    np.testing.assert_allclose(rm.entries, [[0, 1, 3], [1, 0, 2], [3, 2, 0]])
    assert rm.flatten().tolist() == [0, 1, 3, 1, 0, 2, 3, 2, 0]


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(8, 20), st.integers(1, 2)), elements=st.floats(-10, 10)),
    st.integers(1, 3),
    st.integers(1, 2),
)
def test_urp_matches_definition(window, m, tau):
    cfg = EmbeddingConfig(m, tau)
    rm = urp(window, cfg)
    np.testing.assert_allclose(rm.entries, brute_force_urp(window, m, tau), atol=1e-9)
    np.testing.assert_array_equal(rm.entries, rm.entries.T)
    np.testing.assert_array_equal(np.diag(rm.entries), 0.0)
    assert np.all(rm.entries >= 0)


def test_urp_stack_matches_single_urps():
    rng = np.random.default_rng(1)
    segments = rng.random((6, 15, 2))
    cfg = EmbeddingConfig(2, 1)
    stack = urp_stack(segments, cfg)
    for t in range(6):
        np.testing.assert_allclose(stack[t], urp(segments[t], cfg).entries, atol=1e-12)


def test_threshold_rp():
    rm = RecurrenceMatrix(np.array([[0.0, 0.5], [0.5, 0.0]]))
    assert threshold_rp(rm, 0.5).entries.all()
    assert threshold_rp(rm, 0.4).entries.tolist() == [[True, False], [False, True]]
    with pytest.raises(ConfigError):
        threshold_rp(rm, -1.0)


def test_rqa_all_true_matrix():
    ind = rqa_indicators(np.ones((3, 3), dtype=bool))
    assert ind.rr == 1.0
    # the two corner points sit on diagonals of length 1
    assert ind.det == pytest.approx(2.0 / 3.0)
    assert ind.lam == 1.0


def test_rqa_identity_matrix():
    ind = rqa_indicators(np.eye(5, dtype=bool))
    assert ind.rr == pytest.approx(0.2)
    assert ind.det == 0.0
    assert ind.lam == 0.0


def test_rqa_empty_matrix():
    assert rqa_indicators(np.zeros((4, 4), dtype=bool)).as_dict() == {"RR": 0.0, "DET": 0.0, "LAM": 0.0}


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 12).flatmap(lambda n: arrays(np.bool_, (n, n))), st.integers(2, 4), st.integers(2, 4))
def test_rqa_matches_line_enumeration(b, l_min, v_min):
    ours = rqa_stack(b, l_min, v_min)
    expected = brute_force_rqa(b, l_min, v_min)
    np.testing.assert_allclose(ours, expected, atol=1e-12)


def test_rqa_stack_batches():
    rng = np.random.default_rng(3)
    stack = rng.random((4, 9, 9)) < 0.4
    out = rqa_stack(stack)
    assert out.shape == (4, 3)
    for t in range(4):
        np.testing.assert_allclose(out[t], brute_force_rqa(stack[t]), atol=1e-12)


def test_rqa_rejects_short_lines():
    with pytest.raises(ConfigError):
        rqa_stack(np.eye(3, dtype=bool), l_min=1)


def test_urp_csv_round_trip(tmp_path):
    rm = urp(np.random.default_rng(0).random(15), EmbeddingConfig())
    path = tmp_path / "urp.csv"
    save_urp_csv(rm, path)
    np.testing.assert_array_equal(load_urp_csv(path).entries, rm.entries)


def test_urp_pgm_export(tmp_path):
    rm = urp(np.array([0.0, 0.0, 1.0, 3.0]), EmbeddingConfig())
    img = urp_to_image(rm)
    assert img.size == (3, 3)
    assert np.asarray(img).max() == 255 and np.asarray(img).min() == 0
    path = tmp_path / "urp.pgm"
    save_urp_pgm(rm, path)
    assert path.read_bytes().startswith(b"P5")


def test_urp_metric_properties_on_random_windows():
    rng = np.random.default_rng(17)
    segments = rng.normal(size=(1000, 15))
    stack = urp_stack(segments, EmbeddingConfig())
    np.testing.assert_array_equal(stack, np.transpose(stack, (0, 2, 1)))
    np.testing.assert_array_equal(np.diagonal(stack, axis1=1, axis2=2), 0.0)
    # bound[t, i, k, j] = d(i, k) + d(k, j)
    bound = stack[:, :, :, None] + stack[:, None, :, :]
    assert np.all(stack[:, :, None, :] <= bound + 1e-12)


def test_rqa_exhaustive_three_by_three():
    grids = np.array(list(itertools.product([False, True], repeat=9))).reshape(512, 3, 3)
    out = rqa_stack(grids)
    for t in range(512):
        np.testing.assert_allclose(out[t], brute_force_rqa(grids[t]), atol=1e-12)


@pytest.mark.slow
def test_rqa_random_binaries_four_to_six():
    rng = np.random.default_rng(23)
    for _ in range(1000):
        n = int(rng.integers(4, 7))
        b = rng.random((n, n)) < rng.uniform(0.1, 0.9)
        np.testing.assert_allclose(rqa_stack(b), brute_force_rqa(b), atol=1e-12)
