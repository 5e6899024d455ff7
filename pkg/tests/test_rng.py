import numpy as np
import pytest

from cream.rng import Rng, stream_seed

# published SplitMix64 reference outputs
SEED_1234567 = [
    6457827717110365317,
    3203168211198807973,
    9817491932198370423,
    4593380528125082431,
    16408922859458223821,
]


def test_reference_vectors():
    r = Rng(1234567)
    assert [r.next_u64() for _ in range(5)] == SEED_1234567
    assert Rng(0).next_u64() == 0xE220A8397B1DCDAF


def test_uniform_array_matches_scalar_draws():
    a, b = Rng(99), Rng(99)
    arr = a.uniform_array((3, 4), -0.1, 0.1)
    scalar = np.array([-0.1 + 0.2 * b.random() for _ in range(12)]).reshape(3, 4)
    np.testing.assert_allclose(arr, scalar, rtol=0, atol=1e-17)
    assert a.state == b.state


def test_fork_is_pure_and_distinct():
    r = Rng(5)
    before = r.state
    c1, c2 = r.fork(0), r.fork(1)
    assert r.state == before
    assert c1.next_u64() != c2.next_u64()
    assert Rng(5).fork(3).next_u64() == Rng(5).fork(3).next_u64()


@pytest.mark.parametrize("n", [1, 2, 3, 7, 100])
def test_randbelow_range(n):
    r = Rng(11)
    draws = [r.randbelow(n) for _ in range(5000)]
    assert min(draws) >= 0 and max(draws) < n
    if n > 1:
        assert len(set(draws)) == n


def test_shuffle_is_permutation():
    items = list(range(50))
    Rng(3).shuffle(items)
    assert sorted(items) == list(range(50)) and items != list(range(50))


def test_stream_seeds():
    assert stream_seed(0b1000, 1) == 0b1001
    assert stream_seed(3, 2) == 1
