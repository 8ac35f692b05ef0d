"""Exact scalar, polynomial, truncated-series and linear-algebra substrate.

Every number in the package is a ``fractions.Fraction`` (re-exported here as
``Rational``); there is no floating point anywhere.  On top of that sit

* ``QPoly`` -- truncated polynomials in the formal degree variable q,
* ``TruncSeries`` -- sparse multivariate series in t^0..t^n and s with QPoly
  coefficients, truncated by total degree (and by an s-cap in odd dimensions),
* ``LinearSystem`` / ``solve_linear`` -- exact row reduction with kernel basis.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional

from .errors import ConfigurationError, DomainError

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(x) -> Fraction:
    """Coerce an int, string or Fraction to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rat(x)
    raise DomainError(f"cannot coerce {x!r} to a Rational")


def rat_str(x: Fraction) -> str:
    """Serialize a Rational as "p/q", or "p" when the denominator is 1."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rat(s: str) -> Fraction:
    """Parse the "p/q" / "p" string form back into a Rational."""
    s = s.strip()
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    return Fraction(int(s))


class QPoly:
    """Polynomial in the Novikov variable q, truncated above q^qmax.

    Coefficients are Rationals; zero coefficients are never stored and all
    exponents satisfy 0 <= k <= qmax.  Instances are immutable in practice:
    no method mutates self after construction.
    """

    __slots__ = ("coeffs", "qmax")

    def __init__(self, coeffs: Optional[dict] = None, qmax: int = 0):
        self.qmax = qmax
        clean = {}
        if coeffs:
            for k, c in coeffs.items():
                if k < 0:
                    raise DomainError("negative q exponent")
                c = rat(c)
                if k <= qmax and c != 0:
                    clean[k] = c
        self.coeffs = clean

    @staticmethod
    def const(c, qmax: int) -> "QPoly":
        return QPoly({0: rat(c)}, qmax)

    @staticmethod
    def zero(qmax: int) -> "QPoly":
        return QPoly({}, qmax)

    @staticmethod
    def q_power(k: int, qmax: int, c=ONE) -> "QPoly":
        return QPoly({k: rat(c)}, qmax)

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs.get(k, ZERO)

    def _check(self, other: "QPoly") -> None:
        if self.qmax != other.qmax:
            raise ConfigurationError(
                f"q-cap mismatch: {self.qmax} vs {other.qmax}")

    def __add__(self, other: "QPoly") -> "QPoly":
        self._check(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, ZERO) + c
        return QPoly(out, self.qmax)

    def __sub__(self, other: "QPoly") -> "QPoly":
        self._check(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, ZERO) - c
        return QPoly(out, self.qmax)

    def __neg__(self) -> "QPoly":
        return QPoly({k: -c for k, c in self.coeffs.items()}, self.qmax)

    def __mul__(self, other) -> "QPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        out = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = k1 + k2
                if k <= self.qmax:
                    out[k] = out.get(k, ZERO) + c1 * c2
        return QPoly(out, self.qmax)

    __rmul__ = __mul__

    def scale(self, c) -> "QPoly":
        c = rat(c)
        return QPoly({k: v * c for k, v in self.coeffs.items()}, self.qmax)

    def shift_q(self, k: int) -> "QPoly":
        """Multiply by q^k (terms beyond qmax are dropped)."""
        return QPoly({j + k: c for j, c in self.coeffs.items()}, self.qmax)

    def q_d_q(self) -> "QPoly":
        """Apply the derivation q d/dq."""
        return QPoly({k: k * c for k, c in self.coeffs.items()}, self.qmax)

    def eval_q1(self) -> Fraction:
        """Substitute q = 1 (output-side specialization only)."""
        return sum(self.coeffs.values(), ZERO)

    def with_qmax(self, qmax: int) -> "QPoly":
        return QPoly(self.coeffs, qmax)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = QPoly.const(other, self.qmax)
        return isinstance(other, QPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    def items(self):
        return sorted(self.coeffs.items())

    def to_json(self) -> list:
        return [[k, rat_str(c)] for k, c in self.items()]

    @staticmethod
    def from_json(data: Iterable, qmax: int) -> "QPoly":
        return QPoly({int(k): parse_rat(c) for k, c in data}, qmax)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in self.items():
            if k == 0:
                parts.append(rat_str(c))
            elif c == 1:
                parts.append(f"q^{k}" if k > 1 else "q")
            else:
                parts.append(f"{rat_str(c)}*q^{k}" if k > 1 else f"{rat_str(c)}*q")
        return " + ".join(parts)


class TruncSeries:
    """Sparse truncated series in t^0..t^{nt-1} and s with QPoly coefficients.

    ``nt`` is the number of t-variables; the s variable is always tracked as
    an extra exponent slot.  ``degree_cap`` bounds the total degree (t plus s)
    of stored monomials and ``s_cap`` optionally bounds the s-exponent, which
    implements the odd-dimensional nilpotency s^{m/2+1} = 0.

    Canonical monomial ordering is lexicographic on
    (s-degree, total t-degree, t-exponent tuple), which makes all derived
    output reproducible.
    """

    __slots__ = ("nt", "degree_cap", "s_cap", "qmax", "terms")

    def __init__(self, nt: int, degree_cap: int, qmax: int,
                 s_cap: Optional[int] = None, terms: Optional[dict] = None):
        self.nt = nt
        self.degree_cap = degree_cap
        self.s_cap = s_cap
        self.qmax = qmax
        self.terms = {}
        if terms:
            for key, coeff in terms.items():
                self._store(key, coeff)

    # keys are tuples (e_0, ..., e_{nt-1}, e_s)

    def _keep(self, key) -> bool:
        if sum(key) > self.degree_cap:
            return False
        if self.s_cap is not None and key[-1] > self.s_cap:
            return False
        return True

    def _store(self, key, coeff) -> None:
        if len(key) != self.nt + 1:
            raise ConfigurationError("exponent tuple has wrong length")
        if not isinstance(coeff, QPoly):
            coeff = QPoly.const(coeff, self.qmax)
        if coeff.qmax != self.qmax:
            raise ConfigurationError("coefficient q-cap mismatch")
        if not self._keep(key) or coeff.is_zero():
            return
        key = tuple(key)
        if key in self.terms:
            c = self.terms[key] + coeff
            if c.is_zero():
                del self.terms[key]
            else:
                self.terms[key] = c
        else:
            self.terms[key] = coeff

    def _check(self, other: "TruncSeries") -> None:
        if (self.nt, self.degree_cap, self.s_cap, self.qmax) != \
           (other.nt, other.degree_cap, other.s_cap, other.qmax):
            raise ConfigurationError("series cap/variable mismatch")

    def clone_empty(self) -> "TruncSeries":
        return TruncSeries(self.nt, self.degree_cap, self.qmax, self.s_cap)

    @staticmethod
    def zero(nt: int, degree_cap: int, qmax: int, s_cap=None) -> "TruncSeries":
        return TruncSeries(nt, degree_cap, qmax, s_cap)

    def monomial_key(self, t_exps: dict, s_exp: int = 0) -> tuple:
        key = [0] * (self.nt + 1)
        for i, e in t_exps.items():
            key[i] = e
        key[-1] = s_exp
        return tuple(key)

    def add_term(self, key, coeff) -> "TruncSeries":
        out = self.copy()
        out._store(tuple(key), coeff)
        return out

    def copy(self) -> "TruncSeries":
        out = self.clone_empty()
        out.terms = dict(self.terms)
        return out

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        out = self.copy()
        for key, c in other.terms.items():
            out._store(key, c)
        return out

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        out = self.copy()
        for key, c in other.terms.items():
            out._store(key, -c)
        return out

    def __neg__(self) -> "TruncSeries":
        out = self.clone_empty()
        for key, c in self.terms.items():
            out._store(key, -c)
        return out

    def scale(self, c) -> "TruncSeries":
        out = self.clone_empty()
        if isinstance(c, QPoly):
            for key, v in self.terms.items():
                out._store(key, v * c)
        else:
            c = rat(c)
            for key, v in self.terms.items():
                out._store(key, v.scale(c))
        return out

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        out = self.clone_empty()
        # canonical iteration order keeps coefficient assembly deterministic
        for k1, c1 in sorted(self.terms.items(), key=_mono_order_key):
            for k2, c2 in sorted(other.terms.items(), key=_mono_order_key):
                key = tuple(a + b for a, b in zip(k1, k2))
                if out._keep(key):
                    out._store(key, c1 * c2)
        return out

    def diff_t(self, i: int) -> "TruncSeries":
        """Partial derivative with respect to t^i."""
        if not 0 <= i < self.nt:
            raise DomainError(f"no t-variable of index {i}")
        out = self.clone_empty()
        for key, c in self.terms.items():
            if key[i] > 0:
                nk = list(key)
                nk[i] -= 1
                out._store(tuple(nk), c.scale(key[i]))
        return out

    def diff_s(self) -> "TruncSeries":
        out = self.clone_empty()
        for key, c in self.terms.items():
            if key[-1] > 0:
                nk = list(key)
                nk[-1] -= 1
                out._store(tuple(nk), c.scale(key[-1]))
        return out

    def constant_term(self) -> QPoly:
        key = (0,) * (self.nt + 1)
        return self.terms.get(key, QPoly.zero(self.qmax))

    def coefficient(self, t_exps: dict, s_exp: int = 0) -> QPoly:
        return self.terms.get(self.monomial_key(t_exps, s_exp),
                              QPoly.zero(self.qmax))

    def is_zero(self) -> bool:
        return not self.terms

    def max_total_degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def truncate_degree(self, cap: int) -> "TruncSeries":
        out = TruncSeries(self.nt, min(cap, self.degree_cap), self.qmax, self.s_cap)
        for key, c in self.terms.items():
            out._store(key, c)
        return out

    def recap(self, degree_cap: int, s_cap=None) -> "TruncSeries":
        """Re-store the terms under new caps (raising a cap marks the new
        orders as unknown-zero rather than computing them)."""
        out = TruncSeries(self.nt, degree_cap, self.qmax, s_cap)
        for key, c in self.terms.items():
            out._store(key, c)
        return out

    def drop_s_at_or_above(self, s_power: int) -> "TruncSeries":
        """Forget all monomials with s-exponent >= s_power (odd-mode slicing)."""
        out = self.clone_empty()
        for key, c in self.terms.items():
            if key[-1] < s_power:
                out._store(key, c)
        return out

    def s_slice(self, s_power: int) -> "TruncSeries":
        """Series of t-monomials multiplying s^s_power (s removed)."""
        out = TruncSeries(self.nt, self.degree_cap, self.qmax, None)
        for key, c in self.terms.items():
            if key[-1] == s_power:
                out._store(key[:-1] + (0,), c)
        return out

    def sorted_terms(self):
        return sorted(self.terms.items(), key=_mono_order_key)

    def __eq__(self, other) -> bool:
        return (isinstance(other, TruncSeries) and self.nt == other.nt
                and self.terms == other.terms)

    def to_json(self) -> dict:
        return {
            "nt": self.nt,
            "degree_cap": self.degree_cap,
            "s_cap": self.s_cap,
            "qmax": self.qmax,
            "terms": [
                {"monomial": list(key), "coefficient": c.to_json()}
                for key, c in self.sorted_terms()
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "TruncSeries":
        out = TruncSeries(int(data["nt"]), int(data["degree_cap"]),
                          int(data["qmax"]),
                          None if data.get("s_cap") is None else int(data["s_cap"]))
        for item in data["terms"]:
            key = tuple(int(e) for e in item["monomial"])
            out._store(key, QPoly.from_json(item["coefficient"], out.qmax))
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for key, c in self.sorted_terms():
            mono = []
            for i, e in enumerate(key[:-1]):
                if e == 1:
                    mono.append(f"t{i}")
                elif e > 1:
                    mono.append(f"t{i}^{e}")
            if key[-1] == 1:
                mono.append("s")
            elif key[-1] > 1:
                mono.append(f"s^{key[-1]}")
            m = "*".join(mono) if mono else "1"
            parts.append(f"({c!r})*{m}")
        return " + ".join(parts)


def _mono_order_key(item):
    key = item[0]
    return (key[-1], sum(key[:-1]), key[:-1])


def linear_substitute(series: TruncSeries, forms) -> TruncSeries:
    """Substitute each t-variable by a QPoly-linear combination of t-variables.

    ``forms[i]`` is a list of (j, QPoly) pairs meaning t_i -> sum c_j t_j.
    The s variable is untouched.  Used for the flat change of coordinates
    between the classical-power and quantum-power bases.
    """
    out = series.clone_empty()
    one = TruncSeries(series.nt, series.degree_cap, series.qmax, series.s_cap)
    one = one.add_term((0,) * (series.nt + 1), QPoly.const(1, series.qmax))

    form_series = []
    for i in range(series.nt):
        f = series.clone_empty()
        for j, c in forms[i]:
            key = [0] * (series.nt + 1)
            key[j] = 1
            f = f.add_term(tuple(key), c)
        form_series.append(f)

    # cache powers of each substituted variable
    powers = [[one] for _ in range(series.nt)]

    def power(i, e):
        while len(powers[i]) <= e:
            powers[i].append(powers[i][-1] * form_series[i])
        return powers[i][e]

    for key, coeff in series.sorted_terms():
        term = one
        for i, e in enumerate(key[:-1]):
            if e:
                term = term * power(i, e)
        if key[-1]:
            skey = [0] * (series.nt + 1)
            skey[-1] = key[-1]
            term = term * one.clone_empty().add_term(tuple(skey), QPoly.const(1, series.qmax))
        out = out + term.scale(coeff)
    return out


class LinearSystem:
    """Dense rectangular system A x = rhs over the Rationals."""

    def __init__(self, matrix, rhs):
        self.matrix = [[rat(c) for c in row] for row in matrix]
        self.rhs = [rat(c) for c in rhs]
        if len(self.matrix) != len(self.rhs):
            raise ConfigurationError("matrix and rhs sizes differ")
        widths = {len(row) for row in self.matrix}
        if len(widths) > 1:
            raise ConfigurationError("ragged matrix")


def solve_linear(sys: LinearSystem):
    """Exact reduced row echelon solve.

    Returns (particular, kernel, witness): ``particular`` is one solution or
    None when the system is inconsistent, in which case ``witness`` is the
    index of an original row whose reduced form reads 0 = nonzero.  ``kernel``
    is a basis of the homogeneous solution space, each vector normalized so
    its first nonzero entry is 1.

    Pivots are chosen among the nonzero candidates by largest absolute
    numerator, which keeps intermediate entries modest; exactness does not
    depend on the choice.
    """
    rows = len(sys.matrix)
    cols = len(sys.matrix[0]) if rows else 0
    aug = [list(sys.matrix[i]) + [sys.rhs[i]] for i in range(rows)]
    origin = list(range(rows))

    pivot_cols = []
    r = 0
    for c in range(cols):
        best = None
        for i in range(r, rows):
            if aug[i][c] != 0:
                if best is None or abs(aug[i][c].numerator) > abs(aug[best][c].numerator):
                    best = i
        if best is None:
            continue
        aug[r], aug[best] = aug[best], aug[r]
        origin[r], origin[best] = origin[best], origin[r]
        piv = aug[r][c]
        aug[r] = [v / piv for v in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivot_cols.append(c)
        r += 1
        if r == rows:
            break

    for i in range(r, rows):
        if aug[i][cols] != 0:
            return None, _kernel_basis(aug, pivot_cols, cols), origin[i]

    particular = [ZERO] * cols
    for i, c in enumerate(pivot_cols):
        particular[c] = aug[i][cols]
    return particular, _kernel_basis(aug, pivot_cols, cols), None


def _kernel_basis(aug, pivot_cols, cols):
    free = [c for c in range(cols) if c not in pivot_cols]
    basis = []
    for fc in free:
        vec = [ZERO] * cols
        vec[fc] = ONE
        for i, pc in enumerate(pivot_cols):
            vec[pc] = -aug[i][fc]
        first = next((v for v in vec if v != 0), None)
        if first is not None and first != 1:
            vec = [v / first for v in vec]
        basis.append(vec)
    return basis


def kernel_dimension(matrix) -> int:
    """Dimension of the null space of a Rational matrix."""
    if not matrix:
        return 0
    sysm = LinearSystem(matrix, [ZERO] * len(matrix))
    _, kernel, _ = solve_linear(sysm)
    return len(kernel)
