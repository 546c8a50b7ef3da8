"""Degree-wise unstable algebra of a set presheaf at p = 2.

``(kappa X)^n`` is the space of natural maps X -> S^n, computed as
``hom(q_n F[X], S^n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from . import linfun as lf
from .presheaf import SetPresheaf, set_maps, underlying_sets
from .site import WindowExceeded


class RequiresP2(ValueError):
    pass


class Unsupported(ValueError):
    pass


@dataclass(frozen=True)
class PoincareSeries:
    dims: tuple[int, ...]

    def to_csv(self) -> str:
        return "n,dim\n" + "".join(f"{n},{d}\n" for n, d in enumerate(self.dims))


def _check(X: SetPresheaf, n: int) -> None:
    if X.site.p != 2:
        raise RequiresP2(f"kappa needs p = 2, got p = {X.site.p}")
    if not 0 <= n <= X.site.N:
        raise WindowExceeded(f"degree {n} outside the window 0..{X.site.N}")


def kappa_degree(X: SetPresheaf, n: int, linearized: lf.LinFunctor | None = None) -> int:
    _check(X, n)
    FX = linearized if linearized is not None else lf.linearize(X)
    return lf.nat_hom_dim(lf.q_n(FX, n).functor, lf.sym(X.site, n))


def kappa_direct(X: SetPresheaf, n: int) -> int:
    """Same dimension, from an exhaustive count of natural maps X -> sets(S^n)."""
    _check(X, n)
    count = len(set_maps(X, underlying_sets(lf.sym(X.site, n))))
    d = count.bit_length() - 1
    if 1 << d != count:
        raise AssertionError(f"map count {count} is not a power of 2")
    return d


def poincare(X: SetPresheaf, n_max: int) -> PoincareSeries:
    _check(X, n_max)
    FX = lf.linearize(X)
    return PoincareSeries(tuple(kappa_degree(X, n, FX) for n in range(n_max + 1)))


def dickson_degrees(n: int) -> tuple[int, ...]:
    if n not in (1, 2):
        raise Unsupported(f"Dickson oracle supports n in {{1, 2}}, got {n}")
    return tuple(2**n - 2**i for i in range(n - 1, -1, -1))


def dickson_dim(n: int, m: int) -> int:
    """Number of monomials of degree m in generators of degrees 2^n - 2^i."""
    degs = dickson_degrees(n)
    if m < 0:
        return 0
    bounds = [range(m // d + 1) for d in degs]
    return sum(1 for ex in product(*bounds) if sum(e * d for e, d in zip(ex, degs)) == m)


def grassmannian_kappa_dim(n: int, m: int) -> int:
    """Degree-m dimension of F + omega_n D(n), with omega_n the top invariant."""
    if m == 0:
        return 1
    return dickson_dim(n, m - (2**n - 1))
