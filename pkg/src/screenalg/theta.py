"""Truncated theta-function numerics and scalar coupling factors.

The central object is the odd quasi-periodic function

    [u] = x^(u^2/r - u) * T(x^(2u)),   T(z) = (z;q) (q/z;q) (q;q),  q = x^(2r),

where (z;q) is the q-Pochhammer product, truncated at a configurable depth.
[u] is odd, r-antiperiodic, and picks up an exponential factor under shifts
by tau = pi*i/log x.  Everything is evaluated by the defining products as
written; no argument reduction is performed, so the advertised periodicity
identities are genuine floating-point checks rather than tautologies.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple


class PoleError(ArithmeticError):
    """Evaluation requested exactly on a pole of a coupling function."""


class ThetaParams:
    """Evaluation parameters: base x in (0,1), level r, truncation depth."""

    __slots__ = ("x", "r", "trunc", "q", "tau")

    def __init__(self, x: float, r: int, trunc: int = 40):
        if not 0.0 < x < 1.0:
            raise ValueError(f"base x={x} outside (0, 1)")
        if int(r) != r or r < 1:
            raise ValueError(f"level r={r} must be a positive integer")
        if trunc < 1:
            raise ValueError(f"truncation depth {trunc} must be >= 1")
        self.x = float(x)
        self.r = int(r)
        self.trunc = int(trunc)
        self.q = self.x ** (2 * self.r)
        self.tau = math.pi * 1j / math.log(self.x)

    def __repr__(self) -> str:
        return f"ThetaParams(x={self.x}, r={self.r}, trunc={self.trunc})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, ThetaParams):
            return NotImplemented
        return (self.x, self.r, self.trunc) == (other.x, other.r, other.trunc)

    def __hash__(self) -> int:
        return hash((self.x, self.r, self.trunc))


@dataclass(frozen=True)
class ThetaValue:
    """A computed [u] together with a relative truncation-tail estimate."""

    __slots__ = ("value", "rel_error")

    value: complex
    rel_error: float


def qpoch(z: complex, q: complex, depth: int) -> complex:
    """Truncated q-Pochhammer product: prod_{i<depth} (1 - z q^i)."""
    if abs(q) >= 1:
        raise ValueError(f"|q| = {abs(q)} not inside the unit disk")
    out = 1.0 + 0.0j
    w = complex(z)
    for _ in range(depth):
        out *= 1.0 - w
        w *= q
    return out


def _theta_product(z: complex, q: float, depth: int) -> complex:
    return qpoch(z, q, depth) * qpoch(q / z, q, depth) * qpoch(q, q, depth)


def _tail_estimate(z_mag: float, q: float, depth: int) -> float:
    # dropped factors of the three products are 1 - w*q^i with
    # w in {z, q/z, q}; first-order tail, slightly conservative
    if z_mag == 0.0:
        return math.inf
    scale = z_mag + q / z_mag + 1.0
    return scale * q**depth / (1.0 - q)


def theta_u(u: complex, p: ThetaParams) -> ThetaValue:
    """[u] evaluated from the defining products.

    Zeros at u in rZ + tau Z are ordinary values.  The tail estimate grows
    like x^(2 Re u) for large negative Re u: the products are evaluated as
    written, so far-out arguments are honestly reported as ill-conditioned
    rather than silently reduced.
    """
    lx = math.log(p.x)
    z = cmath.exp(2 * u * lx)
    pref = cmath.exp((u * u / p.r - u) * lx)
    val = pref * _theta_product(z, p.q, p.trunc)
    return ThetaValue(val, _tail_estimate(abs(z), p.q, p.trunc))


def theta_z(z: complex, p: ThetaParams) -> ThetaValue:
    """[[z]] = [u] with z = x^(2u), u on the principal branch.

    Since x^(2r) is a positive real, [[z x^(2r)]] = -[[z]] holds exactly on
    the principal branch.
    """
    if z == 0:
        raise ValueError("[[z]] undefined at z = 0")
    u = cmath.log(z) / (2 * math.log(p.x))
    return theta_u(u, p)


class Couplings(NamedTuple):
    s: complex
    t: complex
    tau_j: complex
    tau_hat_j: complex


def couplings(z: complex, j: int, p: ThetaParams) -> Couplings:
    """The four scalar factors from normal-ordering adjacent currents.

    s pairs neighboring-index currents, t same-index ones; tau_j and
    tau_hat_j pair a current with the j-th weight field.  An exactly
    vanishing denominator raises PoleError; nearby evaluations return
    large finite values.
    """
    q = p.q
    x = p.x
    den_s = qpoch(x * z, q, p.trunc)
    if den_s == 0:
        raise PoleError(f"s(z) pole at z = {z}")
    s_val = qpoch(x ** (2 * p.r - 1) * z, q, p.trunc) / den_s

    den_t = qpoch(x ** (2 * p.r - 2) * z, q, p.trunc)
    if den_t == 0:
        raise PoleError(f"t(z) pole at z = {z}")
    t_val = (1 - z) * qpoch(x**2 * z, q, p.trunc) / den_t

    den_tau = 1 - z * x ** (j - p.r)
    if den_tau == 0:
        raise PoleError(f"tau_j(z) pole at z = {z} (j = {j})")
    tau_val = (1 - z * x ** (p.r + j - 2)) / den_tau

    den_hat = 1 - z * x ** (-p.r - j)
    if den_hat == 0:
        raise PoleError(f"tau_hat_j(z) pole at z = {z} (j = {j})")
    hat_val = (1 - z * x ** (p.r - j - 2)) / den_hat

    return Couplings(s_val, t_val, tau_val, hat_val)


def residue_const(p: ThetaParams) -> complex:
    """Regularized value of s at its contact point: the residue of
    s(1/z) dz/(2 pi i z) at z = x, equal to
    (x^(2(r-1)); x^(2r)) / (x^(2r); x^(2r))."""
    q = p.q
    return qpoch(p.x ** (2 * (p.r - 1)), q, p.trunc) / qpoch(q, q, p.trunc)


def lattice_distance(u: complex, p: ThetaParams) -> float:
    """Distance from u to the zero lattice rZ + tau Z of [u].

    Used by samplers to keep evaluation points away from zeros (and their
    reciprocals in denominators).  tau is purely imaginary, so the
    decomposition is coordinate-wise.
    """
    beta = u.imag / p.tau.imag
    a = round(u.real / p.r)
    b = round(beta)
    return abs(u - (a * p.r + b * p.tau))
