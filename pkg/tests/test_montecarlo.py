"""
Tests for seeding and the path-parallel worker pool.
"""

import numpy as np

from core.montecarlo import chunk_ranges, derive_seed, map_chunks, path_seeds, path_stream


def test_derive_seed_is_deterministic_and_distinct():
    assert derive_seed(11, 3) == derive_seed(11, 3)
    seeds = path_seeds(11, 100)
    assert len(set(seeds)) == 100
    assert path_seeds(11, 10, offset=5) == seeds[5:15]


def test_path_stream_tags_give_independent_streams():
    a = path_stream(42, 0).random(5)
    b = path_stream(42, 0).random(5)
    c = path_stream(42, 1).random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_chunk_ranges_cover_every_index():
    chunks = chunk_ranges(600, 256)
    assert [len(c) for c in chunks] == [256, 256, 88]
    assert [i for c in chunks for i in c] == list(range(600))


def test_map_chunks_does_not_depend_on_worker_count():
    def squares(chunk):
        return [i * i for i in chunk]

    serial = map_chunks(squares, 1000, workers=1, chunk_size=64)
    threaded = map_chunks(squares, 1000, workers=4, chunk_size=64)
    assert serial == threaded == [i * i for i in range(1000)]


def test_map_chunks_on_nothing():
    assert map_chunks(lambda chunk: list(chunk), 0, workers=2) == []
