import math

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def trial_factor(n: int) -> list[tuple[int, int]]:
    """Independent oracle: plain trial division."""
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def dk_naive(n: int, k: int) -> int:
    """Count ordered k-tuples with product n by recursion over divisors."""
    if k == 1:
        return 1
    return sum(dk_naive(n // d, k - 1) for d in range(1, n + 1) if n % d == 0)


@pytest.fixture
def sigma_minus1():
    return lambda h: sum(1 / d for d in range(1, h + 1) if h % d == 0)


__all__ = ["trial_factor", "dk_naive", "math"]
