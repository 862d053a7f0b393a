"""Exact root-system and finite Weyl-group data for sl_n (type A_{n-1}).

Weights live in traceless epsilon-coordinates: the ambient basis e_1..e_n is
orthonormal, every stored weight has coordinates summing to zero (e.g. the
fundamental weights are built from ebar_i = e_i - (e_1+...+e_n)/n), and the
invariant form is the plain dot product.  All arithmetic is exact rational;
this module never touches floating point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction as Q
from typing import Iterable, Optional

MIN_RANK = 2
MAX_RANK = 8


def check_rank(n: int) -> int:
    if not (MIN_RANK <= n <= MAX_RANK):
        raise ValueError(f"rank n={n} outside supported range [{MIN_RANK}, {MAX_RANK}]")
    return n


class WeightVec:
    """A weight vector in epsilon-coordinates (length n, exact rationals)."""

    __slots__ = ("coords",)

    def __init__(self, coords: Iterable[Q | int]):
        self.coords = tuple(Q(c) for c in coords)

    @property
    def n(self) -> int:
        return len(self.coords)

    def __add__(self, other: "WeightVec") -> "WeightVec":
        _same_rank(self, other)
        return WeightVec(a + b for a, b in zip(self.coords, other.coords))

    def __sub__(self, other: "WeightVec") -> "WeightVec":
        _same_rank(self, other)
        return WeightVec(a - b for a, b in zip(self.coords, other.coords))

    def __neg__(self) -> "WeightVec":
        return WeightVec(-a for a in self.coords)

    def __rmul__(self, c) -> "WeightVec":
        return WeightVec(Q(c) * a for a in self.coords)

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightVec) and self.coords == other.coords

    def __hash__(self) -> int:
        return hash(self.coords)

    def __repr__(self) -> str:
        return f"WeightVec({list(self.coords)})"

    def is_traceless(self) -> bool:
        return sum(self.coords) == 0


def _same_rank(v: WeightVec, w: WeightVec) -> None:
    if v.n != w.n:
        raise ValueError(f"rank mismatch: {v.n} vs {w.n}")


def inner(v: WeightVec, w: WeightVec) -> Q:
    """Invariant bilinear form: the dot product in epsilon-coordinates."""
    _same_rank(v, w)
    return sum((a * b for a, b in zip(v.coords, w.coords)), Q(0))


@dataclass(frozen=True, order=True)
class Root:
    """Positive root e_i - e_j, 1 <= i < j <= n.

    The height j - i counts the simple-root summands: e_i - e_j is the sum of
    the simple roots with letters i, i+1, ..., j-1.
    """

    i: int
    j: int

    def __post_init__(self):
        if not (1 <= self.i < self.j):
            raise ValueError(f"not a positive root: ({self.i}, {self.j})")

    @property
    def height(self) -> int:
        return self.j - self.i

    @property
    def is_simple(self) -> bool:
        return self.j == self.i + 1

    def letters(self) -> range:
        """Simple-root letters i..j-1 making up this root."""
        return range(self.i, self.j)

    def weight(self, n: int) -> WeightVec:
        if self.j > n:
            raise ValueError(f"root {self} does not fit in rank {n}")
        coords = [Q(0)] * n
        coords[self.i - 1] = Q(1)
        coords[self.j - 1] = Q(-1)
        return WeightVec(coords)

    def __repr__(self) -> str:
        return f"Root({self.i},{self.j})"


def simple_root(i: int) -> Root:
    return Root(i, i + 1)


def highest_root(n: int) -> Root:
    check_rank(n)
    return Root(1, n)


def positive_roots(n: int) -> list[Root]:
    """All positive roots, sorted by (i, j)."""
    check_rank(n)
    return [Root(i, j) for i in range(1, n) for j in range(i + 1, n + 1)]


def as_root(v: WeightVec) -> Optional[Root]:
    """Recognize v as a positive root e_i - e_j, else None."""
    plus = [k for k, c in enumerate(v.coords, start=1) if c == 1]
    minus = [k for k, c in enumerate(v.coords, start=1) if c == -1]
    if len(plus) == 1 and len(minus) == 1 and plus[0] < minus[0]:
        if all(c in (0, 1, -1) for c in v.coords):
            return Root(plus[0], minus[0])
    return None


def root_inner(a: Root, b: Root) -> int:
    """(e_i - e_j, e_k - e_l) without leaving integer arithmetic."""
    d = lambda x, y: 1 if x == y else 0
    return d(a.i, b.i) - d(a.i, b.j) - d(a.j, b.i) + d(a.j, b.j)


def cartan(i: int, j: int) -> int:
    """Cartan pairing (alpha_i, alpha_j) of simple roots."""
    if i == j:
        return 2
    if abs(i - j) == 1:
        return -1
    return 0


def eps_bar(n: int, i: int) -> WeightVec:
    """Traceless image of e_i: e_i minus the average of all e_k."""
    check_rank(n)
    if not 1 <= i <= n:
        raise ValueError(f"index {i} out of range for rank {n}")
    avg = Q(1, n)
    return WeightVec(Q(1) - avg if k == i else -avg for k in range(1, n + 1))


def fundamental_weight(n: int, i: int) -> WeightVec:
    """omega_i = ebar_1 + ... + ebar_i; satisfies (omega_i, alpha_j) = delta_ij."""
    check_rank(n)
    if not 1 <= i <= n - 1:
        raise ValueError(f"fundamental-weight index {i} out of range for rank {n}")
    frac = Q(i, n)
    return WeightVec((Q(1) if k <= i else Q(0)) - frac for k in range(1, n + 1))


def dominant_weight(n: int, coeffs: Iterable[int]) -> WeightVec:
    """Integral weight sum(a_i * omega_i) from coefficients (a_1, ..., a_{n-1})."""
    coeffs = tuple(coeffs)
    check_rank(n)
    if len(coeffs) != n - 1:
        raise ValueError(f"need {n - 1} coefficients, got {len(coeffs)}")
    total = WeightVec([Q(0)] * n)
    for i, a in enumerate(coeffs, start=1):
        total = total + a * fundamental_weight(n, i)
    return total


def reflect(v: WeightVec, alpha: Root) -> WeightVec:
    """Reflection v - (v, alpha) alpha; acts on coordinates as the transposition (i j)."""
    aw = alpha.weight(v.n)
    return v - inner(v, aw) * aw


class Permutation:
    """Element of S_n acting on epsilon-indices: sigma(e_i) = e_{sigma(i)}."""

    __slots__ = ("images",)

    def __init__(self, images: Iterable[int]):
        images = tuple(images)
        n = len(images)
        if sorted(images) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of 1..{n}: {images}")
        self.images = images

    @property
    def n(self) -> int:
        return len(self.images)

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(range(1, n + 1))

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def compose(self, other: "Permutation") -> "Permutation":
        """(self . other)(i) = self(other(i))."""
        if self.n != other.n:
            raise ValueError("rank mismatch in composition")
        return Permutation(self.images[other.images[k] - 1] for k in range(self.n))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for k, img in enumerate(self.images, start=1):
            inv[img - 1] = k
        return Permutation(inv)

    def apply(self, v: WeightVec) -> WeightVec:
        """Push coordinates forward: entry at position sigma(i) comes from position i."""
        if self.n != v.n:
            raise ValueError("rank mismatch in permutation action")
        out = [Q(0)] * self.n
        for k in range(1, self.n + 1):
            out[self.images[k - 1] - 1] = v.coords[k - 1]
        return WeightVec(out)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __lt__(self, other: "Permutation") -> bool:
        return self.images < other.images

    def __repr__(self) -> str:
        return f"Permutation({list(self.images)})"


def perm_length(sigma: Permutation) -> int:
    """Inversion count = minimal word length in the simple transpositions."""
    im = sigma.images
    return sum(
        1
        for a in range(len(im))
        for b in range(a + 1, len(im))
        if im[a] > im[b]
    )


def root_reflection(n: int, alpha: Root) -> Permutation:
    """The transposition (i j) in S_n attached to the root e_i - e_j."""
    if alpha.j > n:
        raise ValueError(f"root {alpha} does not fit in rank {n}")
    images = list(range(1, n + 1))
    images[alpha.i - 1], images[alpha.j - 1] = alpha.j, alpha.i
    return Permutation(images)


def simple_reflection(n: int, i: int) -> Permutation:
    return root_reflection(n, simple_root(i))


def all_permutations(n: int) -> list[Permutation]:
    check_rank(n)
    return [Permutation(p) for p in itertools.permutations(range(1, n + 1))]


def root_decompositions(alpha: Root) -> list[tuple[Root, Root]]:
    """All ordered pairs (beta, gamma) of positive roots with beta + gamma = alpha.

    For e_i - e_j these are the splittings at an intermediate index k, taken in
    both orders, so a root of height h yields 2*(h-1) pairs.
    """
    pairs: list[tuple[Root, Root]] = []
    for k in range(alpha.i + 1, alpha.j):
        left, right = Root(alpha.i, k), Root(k, alpha.j)
        pairs.append((left, right))
        pairs.append((right, left))
    return pairs


class RootVec:
    """Root-lattice element gamma in simple-root coordinates (integers)."""

    __slots__ = ("coords",)

    def __init__(self, coords: Iterable[int]):
        self.coords = tuple(int(c) for c in coords)

    @property
    def rank(self) -> int:
        return len(self.coords) + 1

    @staticmethod
    def zero(n: int) -> "RootVec":
        return RootVec([0] * (n - 1))

    @property
    def size(self) -> int:
        """Sum of simple-root coordinates (can be negative)."""
        return sum(self.coords)

    def __add__(self, other: "RootVec") -> "RootVec":
        return RootVec(a + b for a, b in zip(self.coords, other.coords))

    def __sub__(self, other: "RootVec") -> "RootVec":
        return RootVec(a - b for a, b in zip(self.coords, other.coords))

    def minus_root(self, alpha: Root) -> "RootVec":
        coords = list(self.coords)
        for letter in alpha.letters():
            coords[letter - 1] -= 1
        return RootVec(coords)

    def weight(self) -> WeightVec:
        """Convert to epsilon-coordinates: entry k is c_k - c_{k-1}."""
        n = self.rank
        c = (0,) + self.coords + (0,)
        return WeightVec(Q(c[k] - c[k - 1]) for k in range(1, n + 1))

    def __eq__(self, other) -> bool:
        return isinstance(other, RootVec) and self.coords == other.coords

    def __hash__(self) -> int:
        return hash(self.coords)

    def __repr__(self) -> str:
        return f"RootVec({list(self.coords)})"
