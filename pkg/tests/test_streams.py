import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyncoreset.coreset import ConfigError
from dyncoreset.streams import (Dataset, Delete, Insert, StreamSpec, gen_birch_like,
                                gen_insert_only, gen_random_window, gen_sliding_window,
                                gen_snake_window, make_stream, read_stream, replay_check,
                                write_stream)


def small(n=300, seed=0):
    return Dataset.from_points(np.random.default_rng(seed).normal(size=(n, 2)))


def test_insert_only():
    d = small(10)
    evs = list(gen_insert_only(d))
    assert [e.id for e in evs] == list(range(10))
    assert all(isinstance(e, Insert) for e in evs)


@given(st.integers(1, 60), st.integers(1, 60))
def test_sliding_window_counts(n, t):
    d = small(n)
    if t > n:
        with pytest.raises(ConfigError):
            list(gen_sliding_window(d, t))
        return
    evs = list(gen_sliding_window(d, t))
    assert len(evs) == 2 * n - t
    count, peak, final = replay_check(evs)
    assert peak == t and final == t
    # each delete removes the oldest live point
    dels = [e.id for e in evs if isinstance(e, Delete)]
    assert dels == list(range(n - t))


@given(st.integers(0, 1000), st.floats(0.2, 0.95))
def test_random_window_is_valid(seed, pi):
    d = small(200)
    evs = list(gen_random_window(d, pi, seed))
    replay_check(evs)
    assert sum(isinstance(e, Insert) for e in evs) == 200


def test_random_window_deterministic():
    d = small(100)
    a = [(type(e).__name__, e.id) for e in gen_random_window(d, 0.5, 4)]
    b = [(type(e).__name__, e.id) for e in gen_random_window(d, 0.5, 4)]
    assert a == b


def test_snake_window_oscillates():
    d = small(3000)
    evs = list(gen_snake_window(d, 200, 0.2, rng=1))
    live, sizes = 0, []
    for e in evs:
        live += -1 if isinstance(e, Delete) else 1
        sizes.append(live)
    replay_check(evs)
    assert max(sizes) == 200
    # after first reaching t the window drains to ceil(0.2 t), then refills
    first = sizes.index(200)
    low = first + next(i for i, v in enumerate(sizes[first:]) if v <= 40)
    assert sizes[low] == 40
    assert 200 in sizes[low:]


def test_snake_respects_event_cap():
    d = small(5000)
    evs = list(gen_snake_window(d, 100, max_events=777, rng=0))
    assert len(evs) == 777


def test_make_stream_dispatch_and_spec_errors():
    d = small(100)
    assert len(list(make_stream(d, StreamSpec("sliding_window", t=30)))) == 170
    assert len(list(make_stream(d, StreamSpec("insert_only", max_events=5)))) == 5
    with pytest.raises(ConfigError):
        StreamSpec("tumbling")
    with pytest.raises(ConfigError):
        StreamSpec("sliding_window", t=0)
    with pytest.raises(ConfigError):
        StreamSpec("random_window", pi=1.5)
    with pytest.raises(ConfigError):
        StreamSpec("snake_window", t=10, low_frac=1.0)


def test_replay_check_rejects_bad_streams():
    x = np.zeros(2)
    with pytest.raises(ValueError):
        replay_check([Insert(1, x), Delete(2)])
    with pytest.raises(ValueError):
        replay_check([Insert(1, x), Delete(1), Insert(1, x)])


def test_birch_like_generator():
    d = gen_birch_like(5000, 25, d=3, rng=7)
    assert d.points.shape == (5000, 3)
    assert np.array_equal(d.ids, np.arange(5000))
    assert set(np.unique(d.labels)) == set(range(25))
    # cluster members are consecutive
    assert np.all(np.diff(d.labels) >= 0)
    e = gen_birch_like(5000, 25, d=3, rng=7)
    assert np.array_equal(d.points, e.points)
    with pytest.raises(ConfigError):
        gen_birch_like(5, 10)


def test_stream_file_round_trip(tmp_path):
    d = Dataset.from_points(np.random.default_rng(0).normal(size=(50, 3)),
                            weights=np.linspace(1, 2, 50))
    evs = list(gen_random_window(d, 0.6, 2))
    p = tmp_path / "s.txt"
    write_stream(evs, p)
    back = list(read_stream(p))
    assert len(back) == len(evs)
    for a, b in zip(evs, back):
        assert type(a) is type(b) and a.id == b.id
        if isinstance(a, Insert):
            assert np.array_equal(a.point, b.point) and a.weight == b.weight


def test_stream_file_errors_name_the_line(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("I,0,1.0,2.0,3.0\nD,0\nX,1\n")
    with pytest.raises(ValueError, match=":3:"):
        list(read_stream(p))
