"""Exact scalars, permutations, and the two sign engines.

Every sign that appears anywhere in the package is produced here, as an exact
integer +1/-1, from one of two exponent formulas: the Koszul exponent of a
permutation acting on graded tensor factors, and the inversion-pair exponent
delta used by the symmetrized bracket sums. Keeping both in one module makes
the sign conventions auditable in one sitting.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Scalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def ensure_scalar(value) -> Fraction:
    """Coerce ints/strings like '3/4' to Fraction; reject floats outright."""
    if isinstance(value, float):
        raise TypeError("floating point is banned; use Fraction or int")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact scalar: {value!r}")


class Permutation:
    """A permutation of {1..n}, stored one-indexed as its image list.

    images[i-1] = sigma(i).
    """

    __slots__ = ("images",)

    def __init__(self, images: Sequence[int]):
        images = tuple(images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"not a bijection of 1..{len(images)}: {images}")
        self.images = images

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for i, img in enumerate(self.images, start=1):
            inv[img - 1] = i
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self*other)(i) = self(other(i))."""
        if self.size != other.size:
            raise ValueError("size mismatch")
        return Permutation([self(other(i)) for i in range(1, self.size + 1)])

    def permute(self, items: Sequence) -> list:
        """Arrange items so position i holds items[sigma^{-1}(i)-1].

        This is the action on tuples matching x.sigma = (x_{sigma^{-1}(1)},...).
        """
        if len(items) != self.size:
            raise ValueError("size mismatch")
        inv = self.inverse()
        return [items[inv(i) - 1] for i in range(1, self.size + 1)]

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        return f"Permutation({list(self.images)})"

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(range(1, n + 1))

    @staticmethod
    def rotation(n: int, k: int = 1) -> "Permutation":
        """The cycle sending i to i+k (mod n, one-indexed)."""
        return Permutation([(i - 1 + k) % n + 1 for i in range(1, n + 1)])

    @staticmethod
    def all(n: int) -> Iterable["Permutation"]:
        import itertools

        for images in itertools.permutations(range(1, n + 1)):
            yield Permutation(images)


def koszul_exponent(perm: Permutation, degrees: Sequence[int]) -> int:
    """Exponent picked up by permuting graded factors (v_1,...,v_n) into
    (v_{sigma^{-1}(1)},...,v_{sigma^{-1}(n)}).

    Equals the sum of |v_a||v_b| over inversion pairs a<b with
    sigma(a) > sigma(b).
    """
    if len(degrees) != perm.size:
        raise ValueError("degree list does not match permutation size")
    total = 0
    n = perm.size
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            if perm(a) > perm(b):
                total += degrees[a - 1] * degrees[b - 1]
    return total


def koszul_sign(perm: Permutation, degrees: Sequence[int]) -> int:
    return -1 if koszul_exponent(perm, degrees) % 2 else 1


def reorder_sign(positions: Sequence[int], degrees: Sequence[int]) -> int:
    """Sign for rearranging a token list into the order given by positions.

    positions[k] is the (0-based) index, in the current list, of the token
    that ends up at slot k. Every index must appear exactly once. Signs come
    from counting inversion pairs weighted by the token degrees, i.e. the
    Koszul sign of the rearrangement.
    """
    n = len(positions)
    if sorted(positions) != list(range(n)):
        raise ValueError("positions must be a bijection of 0..n-1")
    total = 0
    for k in range(n):
        for m in range(k + 1, n):
            if positions[k] > positions[m]:
                total += degrees[positions[k]] * degrees[positions[m]]
    return -1 if total % 2 else 1


def delta_exponent(perm: Permutation, degrees: Sequence[int]) -> int:
    """The inversion-type exponent used by the symmetrized bracket sums.

    degrees[i-1] is the degree of f_i; the exponent is the sum of
    |f_{sigma_i}||f_{sigma_j}| over pairs i>j with sigma_i < sigma_j.
    """
    if len(degrees) != perm.size:
        raise ValueError("degree list does not match permutation size")
    total = 0
    n = perm.size
    for j in range(1, n + 1):
        for i in range(j + 1, n + 1):
            si, sj = perm(i), perm(j)
            if si < sj:
                total += degrees[si - 1] * degrees[sj - 1]
    return total


def delta_sign(perm: Permutation, degrees: Sequence[int]) -> int:
    return -1 if delta_exponent(perm, degrees) % 2 else 1


def sign_pow(exponent: int) -> int:
    return -1 if exponent % 2 else 1
