"""Affine Weyl orbit machinery for the resolution complex.

A point of the orbit is lambda = sigma Lambda + r gamma, stored as the pair
(sigma, gamma); its degree is l(sigma) - 2|gamma|.  Edges step down by
m_alpha(lambda) along a positive root alpha; admissible edges raise the degree
by exactly one.  Pairs of admissible 2-chains with a common endpoint form
squares whose relative signature is an explicit power of eps_r = (-1)^(r+1),
and the global sign problem for d^2 = 0 reduces to a GF(2) linear system over
edge classes modulo a periodicity lattice.

Everything here is exact integer/rational arithmetic.  Step sizes, case tags
and kappa depend only on sigma; the signature also carries the translation
part of the point through the integer (m_alpha(lambda) - (lambda, alpha))/r =
kappa_alpha - (gamma, alpha).  For the rank-3 lattice (1, 2) that extra term
shifts by an even amount under lattice translations in every case, so the
constraints are well defined on edge classes; for other lattices a clashing
pair of same-class squares shows up as honest infeasibility.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Q
from typing import Iterable, Optional

from .rootsys import (
    Permutation,
    Root,
    RootVec,
    WeightVec,
    all_permutations,
    check_rank,
    dominant_weight,
    inner,
    perm_length,
    positive_roots,
    root_decompositions,
    root_inner,
    root_reflection,
)


class NotAdmissible(ValueError):
    """A requested chain step does not raise the degree by one."""


class NoPartner(ValueError):
    """(alpha, beta) = 2: the double step along a simple root has no partner."""


def eps_r(r: int) -> int:
    """The global sign (-1)^(r+1): +1 for odd r, -1 for even r."""
    return -1 if r % 2 == 0 else 1


class OrbitConfig:
    """Rank, level and dominant weight, with per-sigma caches.

    Requires r >= n + 2 and a strictly dominant integral Lambda with
    (Lambda, theta) < r, which forces 0 < (Lambda, alpha) < r for every
    positive root and hence 0 < m_alpha < r everywhere on the orbit.
    """

    def __init__(self, n: int, r: int, lam_coeffs: Iterable[int]):
        check_rank(n)
        self.n = n
        self.r = int(r)
        self.lam_coeffs = tuple(int(a) for a in lam_coeffs)
        if len(self.lam_coeffs) != n - 1:
            raise ValueError(f"need {n - 1} weight coefficients, got {len(self.lam_coeffs)}")
        if self.r < n + 2:
            raise ValueError(f"level r={r} below n+2={n + 2}")
        if any(a <= 0 for a in self.lam_coeffs):
            raise ValueError("weight must be strictly dominant (all coefficients > 0)")
        if sum(self.lam_coeffs) >= self.r:
            raise ValueError(
                f"(weight, highest root) = {sum(self.lam_coeffs)} must be < r = {self.r}"
            )
        self.lam = dominant_weight(n, self.lam_coeffs)
        self.roots = positive_roots(n)
        self._slam: dict[tuple[int, ...], WeightVec] = {}
        self._pairing: dict[tuple, int] = {}
        self._adm: dict[tuple, bool] = {}
        self._length: dict[tuple[int, ...], int] = {}
        self._reflections = {a: root_reflection(n, a) for a in self.roots}

    def sigma_lam(self, sigma: Permutation) -> WeightVec:
        key = sigma.images
        if key not in self._slam:
            self._slam[key] = sigma.apply(self.lam)
        return self._slam[key]

    def pairing(self, sigma: Permutation, alpha: Root) -> int:
        """(sigma Lambda, alpha) as an exact integer; never zero."""
        key = (sigma.images, alpha)
        c = self._pairing.get(key)
        if c is None:
            val = inner(self.sigma_lam(sigma), alpha.weight(self.n))
            c = int(val)
            if c != val or c == 0:
                raise RuntimeError(f"corrupt pairing {val} for {sigma}, {alpha}")
            self._pairing[key] = c
        return c

    def reflection(self, alpha: Root) -> Permutation:
        return self._reflections[alpha]

    def length(self, sigma: Permutation) -> int:
        key = sigma.images
        if key not in self._length:
            self._length[key] = perm_length(sigma)
        return self._length[key]

    def admissible(self, sigma: Permutation, alpha: Root) -> bool:
        key = (sigma.images, alpha)
        got = self._adm.get(key)
        if got is None:
            c = self.pairing(sigma, alpha)
            if c > 0:
                got = all(
                    self.pairing(sigma, b) < 0 or self.pairing(sigma, g) < 0
                    for b, g in root_decompositions(alpha)
                )
            else:
                got = all(
                    self.pairing(sigma, b) < 0 and self.pairing(sigma, g) < 0
                    for b, g in root_decompositions(alpha)
                )
            self._adm[key] = got
        return got


class OrbitPoint:
    """Orbit weight sigma Lambda + r gamma with cached degree."""

    __slots__ = ("cfg", "sigma", "gamma", "_weight", "_degree")

    def __init__(self, cfg: OrbitConfig, sigma: Permutation, gamma: RootVec):
        if gamma.rank != cfg.n or sigma.n != cfg.n:
            raise ValueError("rank mismatch in orbit point")
        self.cfg = cfg
        self.sigma = sigma
        self.gamma = gamma
        self._weight: Optional[WeightVec] = None
        self._degree: Optional[int] = None

    @property
    def weight(self) -> WeightVec:
        if self._weight is None:
            self._weight = self.cfg.sigma_lam(self.sigma) + self.cfg.r * self.gamma.weight()
        return self._weight

    @property
    def degree(self) -> int:
        if self._degree is None:
            self._degree = self.cfg.length(self.sigma) - 2 * self.gamma.size
        return self._degree

    def key(self) -> tuple:
        return (self.gamma.coords, self.sigma.images)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, OrbitPoint)
            and self.sigma == other.sigma
            and self.gamma == other.gamma
        )

    def __hash__(self) -> int:
        return hash((self.sigma.images, self.gamma.coords))

    def __repr__(self) -> str:
        return f"OrbitPoint(sigma={list(self.sigma.images)}, gamma={list(self.gamma.coords)})"


def start_point(cfg: OrbitConfig) -> OrbitPoint:
    """The base point Lambda itself (identity sigma, zero gamma)."""
    return OrbitPoint(cfg, Permutation.identity(cfg.n), RootVec.zero(cfg.n))


def degree(p: OrbitPoint) -> int:
    return p.degree


def m_alpha(p: OrbitPoint, alpha: Root) -> int:
    """Step size along alpha: the representative of (lambda, alpha) mod r in (0, r)."""
    c = p.cfg.pairing(p.sigma, alpha)
    m = c if c > 0 else c + p.cfg.r
    if not 0 < m < p.cfg.r:
        raise RuntimeError(f"step size {m} outside (0, {p.cfg.r})")
    return m


def lambda_alpha(p: OrbitPoint, alpha: Root) -> OrbitPoint:
    """The target of the alpha-edge: weight drops by m_alpha(p) * alpha."""
    c = p.cfg.pairing(p.sigma, alpha)
    sigma2 = p.cfg.reflection(alpha).compose(p.sigma)
    gamma2 = p.gamma if c > 0 else p.gamma.minus_root(alpha)
    return OrbitPoint(p.cfg, sigma2, gamma2)


def is_admissible(p: OrbitPoint, alpha: Root) -> bool:
    """Degree raises by exactly one along alpha.

    Decided by the sign pattern of (sigma Lambda, -) on the two-part splittings
    of alpha: with c = (sigma Lambda, alpha),
      c > 0: every splitting alpha = beta + gamma needs (sigma Lambda, beta) < 0
             or (sigma Lambda, gamma) < 0;
      c < 0: every splitting needs both pairings < 0.
    Simple roots split trivially and are always admissible.
    """
    return p.cfg.admissible(p.sigma, alpha)


def degree_step(p: OrbitPoint, alpha: Root) -> int:
    """deg(lambda^alpha) - deg(lambda), computed from lengths; lies in (0, 2*height)."""
    cfg = p.cfg
    c = cfg.pairing(p.sigma, alpha)
    diff = cfg.length(cfg.reflection(alpha).compose(p.sigma)) - cfg.length(p.sigma)
    return diff if c > 0 else diff + 2 * alpha.height


def kappa(p: OrbitPoint, alpha: Root) -> int:
    """0 if (sigma Lambda, alpha) > 0, else 1; equals (m_alpha - (sigma Lambda, alpha))/r."""
    return 0 if p.cfg.pairing(p.sigma, alpha) > 0 else 1


@dataclass(frozen=True)
class Window:
    """Finite truncation: gamma coordinates in [-gamma_bound, gamma_bound],
    optionally filtered to a degree range (inclusive)."""

    gamma_bound: int
    degree_range: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if self.gamma_bound < 0:
            raise ValueError("empty window: negative gamma bound")
        if self.degree_range is not None and self.degree_range[0] > self.degree_range[1]:
            raise ValueError("empty window: inverted degree range")


def enumerate_orbit(cfg: OrbitConfig, window: Window) -> list[OrbitPoint]:
    """All window points, ordered lexicographically by (gamma, sigma)."""
    b = window.gamma_bound
    coords_range = range(-b, b + 1)
    perms = all_permutations(cfg.n)
    points = []
    gammas = [[c] for c in coords_range]
    for _ in range(cfg.n - 2):
        gammas = [g + [c] for g in gammas for c in coords_range]
    for g in sorted(tuple(g) for g in gammas):
        gamma = RootVec(g)
        for sigma in perms:
            p = OrbitPoint(cfg, sigma, gamma)
            if window.degree_range is not None:
                lo, hi = window.degree_range
                if not lo <= p.degree <= hi:
                    continue
            points.append(p)
    return points


@dataclass(frozen=True)
class Edge:
    source: OrbitPoint
    alpha: Root
    target: OrbitPoint


def admissible_edges(cfg: OrbitConfig, points: list[OrbitPoint]) -> list[Edge]:
    return [
        Edge(p, a, lambda_alpha(p, a))
        for p in points
        for a in cfg.roots
        if is_admissible(p, a)
    ]


def _require_chain(p: OrbitPoint, alpha: Root, beta: Root) -> OrbitPoint:
    if not is_admissible(p, alpha):
        raise NotAdmissible(f"first step {alpha} not admissible at {p}")
    mid = lambda_alpha(p, alpha)
    if not is_admissible(mid, beta):
        raise NotAdmissible(f"second step {beta} not admissible at {mid}")
    return mid


def partner_square(p: OrbitPoint, alpha: Root, beta: Root) -> tuple[Root, Root, str]:
    """The unique partner 2-chain from p reaching the same endpoint, with case tag.

    Writing gamma_1 for the lower-letter segment and gamma_2 for the adjacent
    upper one, the tags are:
      perp            (alpha, beta) = 0, partner (beta, alpha);
      A+ B+ C+ D+     (alpha, beta) = -1 (disjoint adjacent segments);
      A- B- C- D-     (alpha, beta) = +1 (one root contains the other);
    and X+ pairs with X-.  For (alpha, beta) = -1 the partner is built from
    the step sizes m = m_alpha(p), m' = m_beta(p^alpha): the drop
    m alpha + m' beta regroups as m'(alpha+beta) + (m-m') alpha when m > m'
    and as (m'-m) beta + m (alpha+beta) when m < m'.
    """
    ip = root_inner(alpha, beta)
    if ip == 2:
        raise NoPartner(f"double step along {alpha}: no partner chain exists")
    mid = _require_chain(p, alpha, beta)

    if ip == 0:
        return beta, alpha, "perp"

    if ip == -1:
        m = m_alpha(p, alpha)
        mp = m_alpha(mid, beta)
        if m == mp:
            raise RuntimeError(f"equal step sizes {m} in adjacent chain at {p}")
        alpha_left = alpha.j == beta.i
        total = Root(min(alpha.i, beta.i), max(alpha.j, beta.j))
        if m > mp:
            out = (total, alpha, "A+" if alpha_left else "C+")
        else:
            out = (beta, total, "B+" if alpha_left else "D+")
    else:
        # ip == +1: containment, sharing exactly one end
        if alpha.i == beta.i and alpha.j > beta.j:
            out = (beta, Root(beta.j, alpha.j), "A-")
        elif alpha.j == beta.j and alpha.i > beta.i:
            out = (Root(beta.i, alpha.i), alpha, "B-")
        elif alpha.j == beta.j and alpha.i < beta.i:
            out = (beta, Root(alpha.i, beta.i), "C-")
        elif alpha.i == beta.i and alpha.j < beta.j:
            out = (Root(alpha.j, beta.j), alpha, "D-")
        else:  # pragma: no cover
            raise RuntimeError(f"unexpected containment pattern {alpha}, {beta}")

    alpha2, beta2, tag = out
    mid2 = _require_chain(p, alpha2, beta2)
    if lambda_alpha(mid, beta) != lambda_alpha(mid2, beta2):
        raise RuntimeError(f"partner endpoint mismatch at {p}: {alpha},{beta} vs {alpha2},{beta2}")
    return out


@dataclass(frozen=True)
class CommutingSquare:
    base: OrbitPoint
    alpha: Root
    beta: Root
    alpha2: Root
    beta2: Root
    tag: str


def make_square(p: OrbitPoint, alpha: Root, beta: Root) -> CommutingSquare:
    alpha2, beta2, tag = partner_square(p, alpha, beta)
    return CommutingSquare(p, alpha, beta, alpha2, beta2, tag)


def _gamma_pairing(gamma: RootVec, alpha: Root) -> int:
    """(gamma, alpha) for gamma in root coordinates, as an exact integer."""
    c = (0,) + gamma.coords + (0,)
    return (c[alpha.i] - c[alpha.i - 1]) - (c[alpha.j] - c[alpha.j - 1])


def signature(square: CommutingSquare) -> int:
    """Relative sign of the two chain compositions, as a power of eps_r.

    The case formulas are stated for the presentation whose first pair has
    (alpha, beta) = -1; a square handed over in the other presentation is
    flipped first (the sign is presentation independent since it squares
    to one).

    Each kappa enters through its translation-corrected form
    (m_alpha(lambda) - (lambda, alpha))/r = kappa - (gamma, alpha): the
    composite-root operators are pinned to the full weight, so moving the
    point by gamma drags extra eps_r periods into the comparison.  Dropping
    the gamma part would make the rank-3 window constraints unsatisfiable.
    """
    p = square.base
    if square.tag == "perp":
        return 1
    if square.tag.endswith("-"):
        a, a2 = square.alpha2, square.alpha
    else:
        a, a2 = square.alpha, square.alpha2

    def kap(root: Root) -> int:
        return kappa(p, root) - _gamma_pairing(p.gamma, root)

    letter = square.tag[0]
    if letter == "A":
        # a = gamma_1, a2 = gamma_1 + gamma_2; |gamma_2| = |a2| - |a|
        exp = kap(a) * (a2.height - a.height) * m_alpha(p, a2)
    elif letter == "B":
        # a = gamma_1, a2 = gamma_2
        exp = kap(a) * a2.height * m_alpha(p, a)
    elif letter == "C":
        # a = gamma_2, a2 = gamma_1 + gamma_2
        exp = (kap(a) + kap(a2)) * a.height * m_alpha(p, a2)
    elif letter == "D":
        # a = gamma_2, a2 = gamma_1
        exp = kap(a2) * a.height * m_alpha(p, a)
    else:
        raise ValueError(f"unknown case tag {square.tag}")
    return eps_r(p.cfg.r) ** exp


# ---------------------------------------------------------------------------
# Sign solving over GF(2)


def default_lattice(n: int) -> tuple[int, ...]:
    """Periodicity multipliers (d_1, ..., d_{n-1}): gamma is identified with
    gamma + sum(d_i Z alpha_i).  For n = 3 the solved case uses (1, 2),
    i.e. the weight lattice r Z alpha_1 + 2r Z alpha_2."""
    return (1, 2) if n == 3 else (1,) * (n - 1)


def _edge_class(p: OrbitPoint, alpha: Root, lattice: tuple[int, ...]) -> tuple:
    reduced = tuple(c % d for c, d in zip(p.gamma.coords, lattice))
    return (alpha.i, alpha.j, p.sigma.images, reduced)


class SignAssignment:
    """Signs on admissible-edge classes modulo the periodicity lattice."""

    def __init__(self, lattice: tuple[int, ...], classes: dict[tuple, int]):
        self.lattice = lattice
        self.classes = dict(classes)

    def sign(self, p: OrbitPoint, alpha: Root) -> int:
        key = _edge_class(p, alpha, self.lattice)
        try:
            return self.classes[key]
        except KeyError:
            raise KeyError(f"edge ({p}, {alpha}) has no solved class") from None


@dataclass
class SignSolveResult:
    feasible: bool
    lattice: tuple[int, ...]
    assignment: Optional[SignAssignment]
    certificate: Optional[list[dict]]
    stats: dict


def _square_descriptor(p: OrbitPoint, sq: CommutingSquare) -> dict:
    return {
        "gamma": list(p.gamma.coords),
        "sigma": list(p.sigma.images),
        "alpha": [sq.alpha.i, sq.alpha.j],
        "beta": [sq.beta.i, sq.beta.j],
        "alpha2": [sq.alpha2.i, sq.alpha2.j],
        "beta2": [sq.beta2.i, sq.beta2.j],
        "tag": sq.tag,
    }


def window_squares(cfg: OrbitConfig, points: list[OrbitPoint]):
    """Yield (square, all_corners_inside) for every admissible 2-chain with a
    partner, over every base point.  Each geometric square appears twice, once
    per presentation."""
    inside = {p.key() for p in points}
    for p in points:
        for alpha in cfg.roots:
            if not is_admissible(p, alpha):
                continue
            mid = lambda_alpha(p, alpha)
            for beta in cfg.roots:
                if root_inner(alpha, beta) == 2:
                    continue
                if not is_admissible(mid, beta):
                    continue
                sq = make_square(p, alpha, beta)
                end = lambda_alpha(mid, beta)
                mid2 = lambda_alpha(p, sq.alpha2)
                ok = (
                    mid.key() in inside
                    and end.key() in inside
                    and mid2.key() in inside
                )
                yield sq, ok


def solve_signs(
    cfg: OrbitConfig,
    window: Window,
    lattice: Optional[tuple[int, ...]] = None,
) -> SignSolveResult:
    """Set up and solve the square constraints as a GF(2) system.

    Unknowns are edge classes modulo the lattice; each interior square gives
    the relation s_beta(p^alpha) s_alpha(p) s_beta2(p^alpha2) s_alpha2(p)
    = -signature.  Squares with a corner outside the window are counted and
    skipped.  Infeasibility comes back as a certificate: a set of squares
    whose constraints XOR to 0 = 1.
    """
    if lattice is None:
        lattice = default_lattice(cfg.n)
    if len(lattice) != cfg.n - 1 or any(d < 1 for d in lattice):
        raise ValueError(f"bad lattice multipliers {lattice}")
    points = enumerate_orbit(cfg, window)

    class_ids: dict[tuple, int] = {}
    for p in points:
        for alpha in cfg.roots:
            if is_admissible(p, alpha):
                key = _edge_class(p, alpha, lattice)
                if key not in class_ids:
                    class_ids[key] = len(class_ids)

    rows: list[tuple[int, int]] = []  # (mask over classes, rhs bit)
    reps: list[dict] = []
    seen: dict[tuple[int, int], int] = {}
    n_squares = 0
    n_boundary = 0
    for sq, ok in window_squares(cfg, points):
        n_squares += 1
        if not ok:
            n_boundary += 1
            continue
        p = sq.base
        mid = lambda_alpha(p, sq.alpha)
        mid2 = lambda_alpha(p, sq.alpha2)
        mask = 0
        for q, a in ((p, sq.alpha), (mid, sq.beta), (p, sq.alpha2), (mid2, sq.beta2)):
            mask ^= 1 << class_ids[_edge_class(q, a, lattice)]
        sig = signature(sq)
        # (-1)^(x1+x2+x3+x4) must equal -signature
        rhs = 0 if sig == -1 else 1
        key = (mask, rhs)
        if key not in seen:
            seen[key] = len(rows)
            rows.append(key)
            reps.append(_square_descriptor(p, sq))
    stats = {
        "points": len(points),
        "edge_classes": len(class_ids),
        "chain_presentations_seen": n_squares,
        "boundary_skipped": n_boundary,
        "unique_constraints": len(rows),
    }

    feasible, solution, certificate_rows = _gf2_solve(rows, len(class_ids))
    if not feasible:
        cert = [reps[i] for i in certificate_rows]
        return SignSolveResult(False, lattice, None, cert, stats)
    classes = {key: (-1 if (solution >> idx) & 1 else 1) for key, idx in class_ids.items()}
    return SignSolveResult(True, lattice, SignAssignment(lattice, classes), None, stats)


def _gf2_solve(rows: list[tuple[int, int]], nvars: int):
    """Gauss-Jordan over GF(2) on int-bitset rows with provenance tracking.

    Returns (feasible, solution_bitmask, certificate_row_indices); free
    variables are set to 0.
    """
    basis: list[list[int]] = []  # [mask, rhs, provenance] with distinct pivots
    pivot_of: dict[int, int] = {}  # pivot bit -> index in basis
    for idx, (mask, rhs) in enumerate(rows):
        prov = 1 << idx
        # Basis rows are mutually reduced, so one pass over the pivots fully
        # reduces the incoming row (no xor reintroduces a pivot bit).
        for piv, bi in pivot_of.items():
            if (mask >> piv) & 1:
                row = basis[bi]
                mask ^= row[0]
                rhs ^= row[1]
                prov ^= row[2]
        if mask == 0:
            if rhs == 1:
                cert = [i for i in range(len(rows)) if (prov >> i) & 1]
                return False, 0, cert
            continue
        piv = mask.bit_length() - 1
        # eliminate this pivot from existing basis rows (Jordan step)
        for row in basis:
            if (row[0] >> piv) & 1:
                row[0] ^= mask
                row[1] ^= rhs
                row[2] ^= prov
        pivot_of[piv] = len(basis)
        basis.append([mask, rhs, prov])
    solution = 0
    for piv, bi in pivot_of.items():
        mask, rhs, _ = basis[bi]
        # non-pivot bits of mask are free variables, fixed to 0
        if rhs:
            solution |= 1 << piv
    return True, solution, []


def verify_d_squared(
    cfg: OrbitConfig,
    window: Window,
    assignment: SignAssignment,
) -> dict:
    """Check pairwise cancellation of signed squares under an assignment.

    Every interior admissible 2-chain with a partner must satisfy the square
    constraint; double steps along a simple root are counted separately (their
    cancellation relies on the vanishing r-th power, which is an operator
    fact taken as an axiom, not recomputed here).
    """
    points = enumerate_orbit(cfg, window)
    inside = {p.key() for p in points}
    violations: list[dict] = []
    checked = 0
    boundary = 0
    doubles = 0
    for p in points:
        for alpha in cfg.roots:
            if not is_admissible(p, alpha):
                continue
            mid = lambda_alpha(p, alpha)
            for beta in cfg.roots:
                if not is_admissible(mid, beta):
                    continue
                if root_inner(alpha, beta) == 2:
                    if not alpha.is_simple:  # pragma: no cover
                        raise RuntimeError("admissible double step along non-simple root")
                    doubles += 1
                    continue
                sq = make_square(p, alpha, beta)
                end = lambda_alpha(mid, beta)
                mid2 = lambda_alpha(p, sq.alpha2)
                if not (mid.key() in inside and end.key() in inside and mid2.key() in inside):
                    boundary += 1
                    continue
                checked += 1
                lhs = assignment.sign(mid, sq.beta) * assignment.sign(p, sq.alpha)
                rhs = assignment.sign(mid2, sq.beta2) * assignment.sign(p, sq.alpha2)
                if lhs != -signature(sq) * rhs:
                    violations.append(_square_descriptor(p, sq))
    return {
        "squares_checked": checked,
        "violations": violations,
        "nilpotent_doubles": doubles,
        "boundary_skipped": boundary,
    }
