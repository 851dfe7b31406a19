import itertools

import numpy as np
import pytest

from edgeagg import shamir
from edgeagg.shamir import Share, reconstruct, split


def test_field_multiplication_matches_schoolbook(gf_table):
    a = np.arange(256)[:, None]
    b = np.arange(256)[None, :]
    assert np.array_equal(shamir.gf_mul(a, b), gf_table)


def test_inverse(gf_table):
    for a in range(1, 256):
        assert gf_table[a, shamir.gf_inv(a)] == 1


def test_threshold_one_copies_secret(rng):
    secret = rng.bytes(16)
    shares = split(secret, 1, 6, rng)
    assert all(s.payload == secret for s in shares)
    assert reconstruct(shares[3:4], 1) == secret


def test_indices_are_one_to_m(rng):
    assert [s.index for s in split(b"abc", 2, 9, rng)] == list(range(1, 10))


def test_reconstruct_from_two_subsets(rng):
    secret = rng.bytes(16)
    shares = split(secret, 3, 5, rng)
    by_index = {s.index: s for s in shares}
    assert reconstruct([by_index[i] for i in (1, 3, 5)], 3) == secret
    assert reconstruct([by_index[i] for i in (2, 4, 5)], 3) == secret


def test_roundtrip_random(rng):
    for _ in range(100):
        m = int(rng.integers(1, 11))
        t = int(rng.integers(1, m + 1))
        secret = rng.bytes(int(rng.integers(1, 33)))
        shares = split(secret, t, m, rng)
        assert reconstruct(shares, t) == secret


def test_every_t_subset_reconstructs(rng):
    secret = rng.bytes(16)
    shares = split(secret, 3, 7, rng)
    subsets = list(itertools.combinations(shares, 3))
    assert len(subsets) == 35
    assert all(reconstruct(s, 3) == secret for s in subsets)


def test_fewer_than_t_shares_do_not_reconstruct(rng):
    secret = rng.bytes(16)
    shares = split(secret, 3, 5, rng)
    with pytest.raises(ValueError):
        reconstruct(shares[:2], 3)


def _consistent_count(gf_table, known: list[tuple[int, int]], t: int, secret: int) -> int:
    """Number of degree-(t-1) polynomials with constant ``secret`` through ``known``."""
    coeffs = np.array(list(itertools.product(range(256), repeat=t - 1)), dtype=np.int64).reshape(-1, t - 1)
    ok = np.ones(len(coeffs), dtype=bool)
    for x, y in known:
        val = np.full(len(coeffs), secret, dtype=np.int64)
        xp = 1
        for c in range(t - 1):
            xp = gf_table[xp, x]
            val ^= gf_table[coeffs[:, c], xp]
        ok &= val == y
    return int(ok.sum())


@pytest.mark.parametrize("t", [2, 3])
def test_perfect_hiding_enumeration(gf_table, t, rng):
    # t-1 shares leave every secret equally likely: each is consistent with exactly one polynomial
    shares = split(bytes([rng.integers(256)]), t, t + 1, rng)
    known = [(s.index, s.payload[0]) for s in shares[: t - 1]]
    counts = {_consistent_count(gf_table, known, t, s) for s in range(256)}
    assert counts == {1}


def test_perfect_hiding_two_of_two(gf_table):
    # fix the share at index 1 to each value; every candidate secret fits exactly one line
    for y in (0, 77, 255):
        per_secret = [_consistent_count(gf_table, [(1, y)], 2, s) for s in range(256)]
        assert per_secret == [1] * 256


def test_split_errors(rng):
    with pytest.raises(ValueError):
        split(b"", 1, 1, rng)
    with pytest.raises(ValueError):
        split(b"x", 3, 2, rng)
    with pytest.raises(ValueError):
        split(b"x", 1, 256, rng)


def test_reconstruct_errors(rng):
    shares = split(b"ab", 2, 3, rng)
    with pytest.raises(ValueError):
        reconstruct([shares[0], shares[0]], 2)
    with pytest.raises(ValueError):
        reconstruct([shares[0], Share(2, b"abc")], 2)
    with pytest.raises(ValueError):
        reconstruct(shares[:1], 2)


def test_share_serialization():
    s = Share(7, b"\x01\x02\x03")
    assert s.to_bytes() == b"\x07\x01\x02\x03"
    assert Share.from_bytes(s.to_bytes()) == s
    with pytest.raises(ValueError):
        Share(0, b"x")


def test_os_randomness_path():
    secret = b"sixteen byte key"
    shares = split(secret, 2, 4)
    assert reconstruct(shares[1:3], 2) == secret
