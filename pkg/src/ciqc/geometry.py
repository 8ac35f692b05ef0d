"""Numerical invariants and monodromy classification of complete intersections.

A complete intersection X_n(d) of multidegree d = (d_1, ..., d_r) in P^{n+r}
carries the invariants used everywhere downstream: the Fano index
a = n + r + 1 - sum(d), the products ell = prod d_i! and b = prod d_i^{d_i},
the Euler characteristic (computed from the adjunction generating function
(1+x)^{n+r+1} / prod(1+d_i x)), the rank m of the middle primitive cohomology,
and the Zariski closure of the monodromy group, which is orthogonal or
symplectic away from three exceptional families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from .errors import DomainError

ORTHOGONAL = "Orthogonal"
SYMPLECTIC = "Symplectic"
Z2 = "Z2"
WEYL_D = "WeylD"
WEYL_E6 = "WeylE6"


@dataclass(frozen=True)
class CIDescriptor:
    n: int
    d: Tuple[int, ...]
    r: int
    a: int              # Fano index
    ell: int            # prod d_i!
    b: int              # prod d_i^{d_i}
    chi: int            # topological Euler characteristic
    m: int              # rank of middle primitive cohomology
    exceptional: bool
    exceptional_case: str | None
    monodromy: str

    @property
    def degree(self) -> int:
        p = 1
        for di in self.d:
            p *= di
        return p

    def is_fano(self) -> bool:
        return self.a >= 1

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": list(self.d),
            "r": self.r,
            "a": self.a,
            "ell": self.ell,
            "b": self.b,
            "chi": self.chi,
            "m": self.m,
            "exceptional": self.exceptional,
            "exceptional_case": self.exceptional_case,
            "monodromy": self.monodromy,
        }


def _exceptional_case(n: int, d: Tuple[int, ...]) -> str | None:
    if d == (2,):
        return "quadric hypersurface X_n(2)"
    if d == (2, 2) and n % 2 == 0:
        return "even-dimensional intersection of two quadrics X_n(2,2)"
    if d == (3,) and n == 2:
        return "cubic surface X_2(3)"
    return None


def _chern_numbers(n: int, d: Tuple[int, ...]):
    """Coefficients kappa_j of x^j in (1+x)^{n+r+1} / prod(1+d_i x), j<=n."""
    r = len(d)
    top = n + r + 1
    series = [Fraction(math.comb(top, j)) for j in range(n + 1)]
    for di in d:
        # divide by (1 + di*x): out[j] = series[j] - di*out[j-1]
        out = [Fraction(0)] * (n + 1)
        for j in range(n + 1):
            out[j] = series[j] - (di * out[j - 1] if j else Fraction(0))
        series = out
    return series


def chern_integrals(desc: CIDescriptor):
    """Integrals of H^j c_{n-j}(TX) over X for j = 0..n.

    Entry j equals (prod d_i) * [x^{n-j}] ((1+x)^{n+r+1} / prod(1+d_i x));
    entry 0 is the Euler characteristic and entry n the degree of X.
    """
    kappa = _chern_numbers(desc.n, desc.d)
    deg = desc.degree
    out = []
    for j in range(desc.n + 1):
        v = deg * kappa[desc.n - j]
        if v.denominator != 1:
            raise DomainError("non-integral characteristic number")
        out.append(Fraction(v))
    return out


def describe(n: int, d) -> CIDescriptor:
    """Build the descriptor of X_n(d); accepts every n >= 1 and d_i >= 2.

    Downstream reconstruction operations impose their own Fano and
    non-exceptional hypotheses; this classification does not.
    """
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n}")
    d = tuple(sorted(int(x) for x in d))
    if not d or any(di < 2 for di in d):
        raise DomainError(f"every multidegree entry must be >= 2, got {d}")
    r = len(d)
    a = n + r + 1 - sum(d)
    ell = 1
    b = 1
    for di in d:
        ell *= math.factorial(di)
        b *= di ** di

    kappa = _chern_numbers(n, d)
    deg = 1
    for di in d:
        deg *= di
    chi_f = deg * kappa[n]
    if chi_f.denominator != 1:
        raise DomainError("non-integral Euler characteristic")
    chi = int(chi_f)

    m = (chi - (n + 1)) if n % 2 == 0 else -(chi - (n + 1))
    if m < 0:
        raise DomainError("negative primitive rank; invalid input")

    case = _exceptional_case(n, d)
    if case is None:
        monodromy = ORTHOGONAL if n % 2 == 0 else SYMPLECTIC
    elif d == (2,):
        monodromy = Z2
    elif d == (2, 2):
        monodromy = WEYL_D
    else:
        monodromy = WEYL_E6

    desc = CIDescriptor(n=n, d=d, r=r, a=a, ell=ell, b=b, chi=chi, m=m,
                        exceptional=case is not None, exceptional_case=case,
                        monodromy=monodromy)

    # exceptional primitive ranks have a closed classification; cross-check
    if case is not None:
        if d == (2,):
            expected = 1 if n % 2 == 0 else 0
        elif d == (2, 2):
            expected = n + 3
        else:
            expected = 6
        if m != expected:
            raise DomainError(
                f"primitive rank {m} disagrees with classification {expected}")
    return desc


def require_reconstruction_domain(desc: CIDescriptor, allow_quadric=False) -> None:
    """Common hypothesis of the reconstruction theory: Fano, dim >= 3,
    non-exceptional (optionally allowing quadrics for the J-series)."""
    if desc.n < 3:
        raise DomainError(
            f"dimension {desc.n} < 3: primitive-class data reduces to the "
            "divisor sector or is classical")
    if not desc.is_fano():
        raise DomainError(
            "non-Fano: all reconstruction trivial (index "
            f"a = {desc.a} <= 0)")
    if desc.exceptional and not (allow_quadric and desc.d == (2,)):
        raise DomainError(f"exceptional complete intersection: {desc.exceptional_case}")
