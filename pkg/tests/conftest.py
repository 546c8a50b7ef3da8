import itertools

import numpy as np
import pytest

from fpresheaf.site import TruncatedSite


@pytest.fixture(scope="session")
def site():
    return TruncatedSite(2, 4)


@pytest.fixture(scope="session")
def site3():
    return TruncatedSite(2, 3)


@pytest.fixture(scope="session")
def site_p3():
    return TruncatedSite(3, 3)


# ---------------------------------------------------------------------------
# independent oracles shared by several test modules


def brute_subspaces(m: int, p: int) -> set:
    """All subspaces of F_p^m as frozensets of vectors, by spanning every subset."""
    vecs = list(itertools.product(range(p), repeat=m))
    spaces = {frozenset([(0,) * m])}
    frontier = set(spaces)
    while frontier:
        nxt = set()
        for S in frontier:
            for v in vecs:
                if v in S:
                    continue
                T = {tuple((a + c * b) % p for a, b in zip(s, v)) for s in S for c in range(p)}
                T = frozenset(T)
                if T not in spaces:
                    spaces.add(T)
                    nxt.add(T)
        frontier = nxt
    return spaces


def brute_rank(M, p: int) -> int:
    """Rank as log_p of the size of the column span."""
    M = np.asarray(M) % p
    if M.size == 0:
        return 0
    span = {tuple(int(x) for x in (M @ np.array(c)) % p) for c in itertools.product(range(p), repeat=M.shape[1])}
    r = 0
    while p**r < len(span):
        r += 1
    return r


def dickson_count(m: int) -> int:
    """#{(a, b) >= 0 : 2a + 3b = m}."""
    return sum(1 for a in range(m // 2 + 1) for b in range(m // 3 + 1) if 2 * a + 3 * b == m)
