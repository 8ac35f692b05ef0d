"""Small quantum cohomology of a Fano complete intersection.

The descendant series J(q, z) at the origin is the hypergeometric series

    z * sum_d q^d  prod_j prod_{m=1}^{d_j d} (d_j H + m z)
                   / prod_{m=1}^{d} (H + m z)^{n+r+1}

expanded exactly over the classical basis H_0..H_n (for index 1 the series
is corrected by exp(-ell q / z)).  Everything else is derived from it:

* quantum multiplication by the degree generator, via the flat-section
  recursion D S_j = sum_c (H~ o H_j)^c S_c with D = z q d/dq + (H cup .),
  which is the divisor and string equations in operator form;
* the quantum powers H^0..H^n, the triangular change-of-basis matrices M, W
  between classical and quantum powers, and the pairing in the quantum-power
  basis together with its inverse;
* the origin jet of the ambient generating function F^(0), i.e. all of its
  partial derivatives at 0 in quantum-power coordinates, by a divisor step
  plus an index-raising identity obtained from the once-differentiated
  associativity constraint;
* the constant c(n,d) governing the contracted fourth derivatives.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from .errors import DomainError, InternalConsistencyError
from .exact import QPoly, Rational, TruncSeries
from .geometry import CIDescriptor, require_reconstruction_domain


def default_qmax(desc: CIDescriptor) -> int:
    """Enough q-orders for every origin formula used downstream."""
    return -(-2 * desc.n // desc.a) + 1  # ceil(2n/a) + 1


class ZJet:
    """Vector-valued Laurent jet in z: {z-power: vector over H_0..H_n}.

    Coefficient vectors have QPoly entries.  ``zmin``/``zmax`` are hard caps;
    ``floor`` tracks down to which z-power the jet is actually reliable
    (operations that consume a z-order raise it).
    """

    __slots__ = ("n", "qmax", "zmin", "zmax", "floor", "coeffs")

    def __init__(self, n: int, qmax: int, zmin: int, zmax: int,
                 floor: Optional[int] = None):
        self.n = n
        self.qmax = qmax
        self.zmin = zmin
        self.zmax = zmax
        self.floor = zmin if floor is None else floor
        self.coeffs: Dict[int, List[QPoly]] = {}

    def _zero_vec(self) -> List[QPoly]:
        return [QPoly.zero(self.qmax) for _ in range(self.n + 1)]

    def vec(self, zpow: int) -> List[QPoly]:
        return self.coeffs.get(zpow, self._zero_vec())

    def set_entry(self, zpow: int, h: int, value: QPoly) -> None:
        if zpow < self.zmin or zpow > self.zmax:
            return
        row = self.coeffs.setdefault(zpow, self._zero_vec())
        row[h] = row[h] + value

    def entry(self, zpow: int, h: int) -> QPoly:
        return self.vec(zpow)[h]

    def copy(self) -> "ZJet":
        out = ZJet(self.n, self.qmax, self.zmin, self.zmax, self.floor)
        out.coeffs = {z: list(v) for z, v in self.coeffs.items()}
        return out

    def __add__(self, other: "ZJet") -> "ZJet":
        out = self.copy()
        out.floor = max(self.floor, other.floor)
        for z, v in other.coeffs.items():
            for h, c in enumerate(v):
                if not c.is_zero():
                    out.set_entry(z, h, c)
        return out

    def __sub__(self, other: "ZJet") -> "ZJet":
        return self + other.scale_qpoly(QPoly.const(-1, self.qmax))

    def scale_qpoly(self, c: QPoly) -> "ZJet":
        out = ZJet(self.n, self.qmax, self.zmin, self.zmax, self.floor)
        for z, v in self.coeffs.items():
            out.coeffs[z] = [x * c for x in v]
        return out

    def shift_z(self, k: int) -> "ZJet":
        """Multiply by z^k."""
        out = ZJet(self.n, self.qmax, self.zmin, self.zmax,
                   max(self.floor + k, self.zmin))
        for z, v in self.coeffs.items():
            if self.zmin <= z + k <= self.zmax:
                out.coeffs[z + k] = list(v)
        return out

    def cup_h(self) -> "ZJet":
        """Cup product with the hyperplane class: H_i -> H_{i+1}."""
        out = ZJet(self.n, self.qmax, self.zmin, self.zmax, self.floor)
        for z, v in self.coeffs.items():
            row = self._zero_vec()
            for h in range(self.n):
                row[h + 1] = v[h]
            out.coeffs[z] = row
        return out

    def q_d_q(self) -> "ZJet":
        out = ZJet(self.n, self.qmax, self.zmin, self.zmax, self.floor)
        for z, v in self.coeffs.items():
            out.coeffs[z] = [x.q_d_q() for x in v]
        return out

    def is_zero_above(self, floor: int) -> bool:
        for z, v in self.coeffs.items():
            if z >= floor and any(not c.is_zero() for c in v):
                return False
        return True


def small_j(desc: CIDescriptor, qmax: Optional[int] = None,
            zorder: Optional[int] = None) -> ZJet:
    """Hypergeometric small J-series of X at the origin.

    The coefficient of z^{-k-1} H_{n-i} q^d, multiplied by deg X, is the
    one-point descendant < psi^k H_i >_{0,1,d}.  Quadrics are allowed here;
    the other exceptional families and non-Fano inputs are refused.
    """
    require_reconstruction_domain(desc, allow_quadric=True)
    if qmax is None:
        qmax = default_qmax(desc)
    if zorder is None:
        zorder = desc.n + 3
    n = desc.n
    zmin = -(zorder + 1)
    jet = ZJet(n, qmax, zmin, 1)

    for delta in range(qmax + 1):
        # numerator: prod_j prod_{m=1}^{d_j delta} (d_j H + m z), as a
        # polynomial in H (truncated at H^n) with integer z-coefficients
        num = [{0: Fraction(1)}] + [dict() for _ in range(n)]
        for dj in desc.d:
            for m in range(1, dj * delta + 1):
                new = [dict() for _ in range(n + 1)]
                for h in range(n + 1):
                    for zp, c in num[h].items():
                        # (d_j H) part
                        if h + 1 <= n:
                            new[h + 1][zp] = new[h + 1].get(zp, Fraction(0)) + dj * c
                        # (m z) part
                        new[h][zp + 1] = new[h].get(zp + 1, Fraction(0)) + m * c
                num = new
        # denominator factors (H + m z)^{-(n+r+1)} expanded binomially
        term = num
        top = n + desc.r + 1
        for m in range(1, delta + 1):
            inv = [dict() for _ in range(n + 1)]
            for j in range(n + 1):
                c = Fraction((-1) ** j * _binom(top - 1 + j, j), m ** (top + j))
                inv[j][-(top + j)] = c
            new = [dict() for _ in range(n + 1)]
            for h1 in range(n + 1):
                for zp1, c1 in term[h1].items():
                    for h2 in range(n + 1 - h1):
                        for zp2, c2 in inv[h2].items():
                            zp = zp1 + zp2
                            if zp + 1 >= zmin:  # final multiply by z below
                                d = new[h1 + h2]
                                d[zp] = d.get(zp, Fraction(0)) + c1 * c2
            term = new
        for h in range(n + 1):
            for zp, c in term[h].items():
                if zmin <= zp + 1 <= 1 and c != 0:
                    jet.set_entry(zp + 1, h, QPoly.q_power(delta, qmax, c))

    if desc.a == 1:
        # J = exp(-ell q / z) * I
        out = ZJet(n, qmax, zmin, 1)
        fact = 1
        for k in range(qmax + 1):
            if k:
                fact *= k
            coeff = QPoly.q_power(k, qmax, Fraction((-desc.ell) ** k, fact))
            shifted = jet.scale_qpoly(coeff).shift_z(-k)
            out = out + shifted
        out.floor = zmin
        jet = out
    return jet


def _binom(n: int, k: int) -> int:
    from math import comb
    return comb(n, k)


def one_point_descendant(desc: CIDescriptor, jet: ZJet, k: int, i: int) -> QPoly:
    """< psi^k H_i >_{0,1,*} as a polynomial in q, read off the J-series."""
    if not 0 <= i <= desc.n or k < 0:
        raise DomainError("descendant indices out of range")
    return jet.entry(-k - 1, desc.n - i).scale(desc.degree)


class QuantumRingData:
    """Quantum multiplication, power bases and pairings at the origin.

    multH is the matrix of quantum multiplication by the shifted degree
    generator (H, or H + ell q for index one) acting on the classical basis;
    powers[j] expresses the j-th quantum power in the classical basis; M and
    W are the mutually inverse triangular base-change matrices; g and ginv
    the pairing of quantum powers and its inverse.
    """

    def __init__(self, desc, qmax, multh, powers, mmat, wmat, g, ginv, smat, jfun):
        self.desc = desc
        self.qmax = qmax
        self.multH = multh
        self.powers = powers
        self.M = mmat
        self.W = wmat
        self.g = g
        self.ginv = ginv
        self.smat = smat
        self.jfun = jfun

    def two_point(self, i: int, j: int, k: int = 0) -> QPoly:
        """< H_i, psi^k H_j >_{0,2,*} from the stored flat sections."""
        return self.smat[i].entry(-k - 1, self.desc.n - j).scale(self.desc.degree)


def build_ring(desc: CIDescriptor, qmax: Optional[int] = None) -> QuantumRingData:
    require_reconstruction_domain(desc)
    if qmax is None:
        qmax = default_qmax(desc)
    n, a = desc.n, desc.a
    jet = small_j(desc, qmax, zorder=n + 3)
    s0 = jet.shift_z(-1)
    smat = [s0]
    cols_h: List[List[QPoly]] = []  # columns of multiplication by H itself

    for j in range(n + 1):
        t = smat[j].q_d_q().shift_z(1) + smat[j].cup_h()
        col = t.vec(0)
        for i in range(n + 1):
            for qk, c in col[i].items():
                if c != 0 and (i + qk * a != j + 1 or qk < 0):
                    raise InternalConsistencyError(
                        f"H * H_{j} has a term H_{i} q^{qk} violating the grading")
        cols_h.append(col)
        if j < n:
            nxt = t
            for c_idx in range(n + 1):
                coeff = col[c_idx]
                if c_idx == j + 1:
                    coeff = coeff - QPoly.const(1, qmax)
                if not coeff.is_zero():
                    nxt = nxt - smat[c_idx].scale_qpoly(coeff)
            nxt.floor = t.floor
            smat.append(nxt)
        else:
            resid = t
            for c_idx in range(n + 1):
                if not col[c_idx].is_zero():
                    resid = resid - smat[c_idx].scale_qpoly(col[c_idx])
            if not resid.is_zero_above(resid.floor):
                raise InternalConsistencyError(
                    "flat-section recursion failed to close at the top power")

    # multiplication by the shifted generator H~ (= H + ell q when a = 1)
    multh = [[cols_h[j][i] for j in range(n + 1)] for i in range(n + 1)]
    if a == 1:
        shift = QPoly.q_power(1, qmax, desc.ell)
        for i in range(n + 1):
            multh[i][i] = multh[i][i] + shift

    powers = [_unit_vector(n, qmax, 0)]
    for _ in range(n + 1):
        powers.append(_mat_vec(multh, powers[-1]))

    # ring relation H^{n+1} = b q H^{n+1-a}
    bq = QPoly.q_power(1, qmax, desc.b)
    expected = [v * bq for v in powers[n + 1 - a]]
    if powers[n + 1] != expected:
        raise InternalConsistencyError(
            "quantum ring relation H^{n+1} = b q H^{n+1-a} failed")

    # base change: powers[j][i] = coefficient of H_i in H^j
    pmat = [[powers[j][i] for j in range(n + 1)] for i in range(n + 1)]
    pinv = _invert_unipotent(pmat, qmax)
    wmat = _extract_graded(pmat, desc)
    mmat = _extract_graded(pinv, desc)
    _check_inverse_rational(wmat, mmat)

    g, ginv = pairings(desc, qmax)

    # the pairing formula must agree with the classical pairing of powers
    for e in range(n + 1):
        for f in range(n + 1):
            acc = QPoly.zero(qmax)
            for i in range(n + 1):
                j = n - i
                acc = acc + powers[e][i] * powers[f][j]
            if acc.scale(desc.degree) != g[e][f]:
                raise InternalConsistencyError(
                    f"pairing formula disagrees at ({e},{f})")

    return QuantumRingData(desc, qmax, multh, powers[: n + 1], mmat, wmat,
                           g, ginv, smat, jet)


def _unit_vector(n, qmax, idx):
    return [QPoly.const(1, qmax) if i == idx else QPoly.zero(qmax)
            for i in range(n + 1)]


def _mat_vec(mat, vec):
    n = len(vec)
    out = []
    for i in range(n):
        acc = QPoly.zero(vec[0].qmax)
        for j in range(n):
            if not (mat[i][j].is_zero() or vec[j].is_zero()):
                acc = acc + mat[i][j] * vec[j]
        out.append(acc)
    return out


def _invert_unipotent(mat, qmax):
    """Invert I + N where N has strictly positive q-degrees only."""
    n = len(mat)
    nil = [[mat[i][j] - (QPoly.const(1, qmax) if i == j else QPoly.zero(qmax))
            for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if nil[i][j].coefficient(0) != 0:
                raise InternalConsistencyError("base change is not unipotent")
    out = [[QPoly.const(1, qmax) if i == j else QPoly.zero(qmax)
            for j in range(n)] for i in range(n)]
    power = [row[:] for row in out]
    for k in range(1, qmax + 2):
        power = [[_dot(power[i], [nil[r][j] for r in range(n)])
                  for j in range(n)] for i in range(n)]
        if all(power[i][j].is_zero() for i in range(n) for j in range(n)):
            break
        sign = -1 if k % 2 else 1
        out = [[out[i][j] + power[i][j].scale(sign) for j in range(n)]
               for i in range(n)]
    return out


def _dot(row, col):
    acc = QPoly.zero(row[0].qmax)
    for x, y in zip(row, col):
        if not (x.is_zero() or y.is_zero()):
            acc = acc + x * y
    return acc


def _extract_graded(pm, desc) -> List[List[Rational]]:
    """Read the Rational matrix X_i^j with H-grading q^{(i-j)/a} off pm.

    pm[i][j] is the H_i coefficient of the j-th column vector; the result is
    indexed as X[i][j] with X[i][j] the coefficient at q^{(i-j)/a}.
    """
    n, a = desc.n, desc.a
    out = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        for j in range(n + 1):
            poly = pm[j][i]
            for qk, c in poly.items():
                if c == 0:
                    continue
                if j + qk * a != i:
                    raise InternalConsistencyError("graded base change violated")
                out[i][j] = c
    return out


def _check_inverse_rational(wmat, mmat):
    n = len(wmat)
    for i in range(n):
        for j in range(n):
            acc = sum((wmat[i][k] * mmat[k][j] for k in range(n)), Fraction(0))
            if acc != (1 if i == j else 0):
                raise InternalConsistencyError("W * M is not the identity")


def pairings(desc: CIDescriptor, qmax: Optional[int] = None):
    """Pairing g_{ef} of quantum powers and its inverse g^{ef}."""
    require_reconstruction_domain(desc)
    if qmax is None:
        qmax = default_qmax(desc)
    n, a, deg = desc.n, desc.a, desc.degree
    g = [[QPoly.zero(qmax) for _ in range(n + 1)] for _ in range(n + 1)]
    ginv = [[QPoly.zero(qmax) for _ in range(n + 1)] for _ in range(n + 1)]
    for e in range(n + 1):
        for f in range(n + 1):
            s = e + f - n
            if s >= 0 and s % a == 0:
                k = s // a
                g[e][f] = QPoly.q_power(k, qmax, Fraction(desc.b) ** k * deg)
            if e + f == n:
                ginv[e][f] = QPoly.const(Fraction(1, deg), qmax)
            elif e + f == n - a:
                ginv[e][f] = QPoly.q_power(1, qmax, Fraction(-desc.b, deg))
    # exact inverse check
    for e in range(n + 1):
        for h in range(n + 1):
            acc = QPoly.zero(qmax)
            for f in range(n + 1):
                acc = acc + g[e][f] * ginv[f][h]
            if acc != (1 if e == h else 0):
                raise InternalConsistencyError("pairing inverse check failed")
    return g, ginv


def qp_mult_single(desc: CIDescriptor, e: int, f: int, qmax: int) -> Tuple[int, QPoly]:
    """Quantum product of power-basis elements: H^e o H^f = b^k q^k H^c."""
    n, a = desc.n, desc.a
    c = e + f
    k = 0
    while c > n:
        c -= a
        k += 1
    return c, QPoly.q_power(k, qmax, Fraction(desc.b) ** k)


def quantum_product_qp(desc: CIDescriptor, u, v, qmax: int):
    """Product of two vectors given in quantum-power coordinates."""
    n = desc.n
    out = [QPoly.zero(qmax) for _ in range(n + 1)]
    for e in range(n + 1):
        if u[e].is_zero():
            continue
        for f in range(n + 1):
            if v[f].is_zero():
                continue
            c, w = qp_mult_single(desc, e, f, qmax)
            out[c] = out[c] + u[e] * v[f] * w
    return out


def classical_from_qp(ring: QuantumRingData, vec):
    n = ring.desc.n
    out = [QPoly.zero(ring.qmax) for _ in range(n + 1)]
    for j in range(n + 1):
        if vec[j].is_zero():
            continue
        for i in range(n + 1):
            out[i] = out[i] + ring.powers[j][i] * vec[j]
    return out


def qp_from_classical(ring: QuantumRingData, vec):
    n = ring.desc.n
    pmat = [[ring.powers[j][i] for j in range(n + 1)] for i in range(n + 1)]
    pinv = _invert_unipotent(pmat, ring.qmax)
    return _mat_vec(pinv, vec)


def c_constant(desc: CIDescriptor, ring: Optional[QuantumRingData] = None):
    """The constant c(n,d) from the M/W double sum, with the conjectured
    closed form sum_i (-1)^{i-1} (1/i!) (ell/b)^i reported alongside."""
    require_reconstruction_domain(desc)
    if ring is None:
        ring = build_ring(desc)
    n, a = desc.n, desc.a
    b = Fraction(desc.b)
    M, W = ring.M, ring.W
    total = Fraction(1)
    for k in range(1, n // a + 1):
        for l in range(0, n // a + 1):
            if n - (k + l) * a >= 0:
                total += Fraction(k) / b ** (k + l) * M[n - l * a][n - (k + l) * a] * W[n][n - l * a]
            if n - (k + l + 1) * a >= 0:
                total -= Fraction(k) / b ** (k + l) * M[n - (l + 1) * a][n - (k + l + 1) * a] * W[n - a][n - (l + 1) * a]
    conj = Fraction(0)
    fact = 1
    ratio = Fraction(desc.ell, desc.b)
    for i in range(1, n // a + 1):
        fact *= i
        conj += (-1) ** (i - 1) * ratio ** i / fact
    return total, conj, total == conj


# --- origin jet of the ambient generating function ------------------------


class AmbientOrigin:
    """All partial derivatives of F^(0) at the origin, quantum-power basis.

    Third derivatives come from the ring structure; an index containing 0 is
    handled by the string equation; an index 1 is removed by the divisor
    equation in the twisted coordinates; the remaining cases are raised from
    lower minimal index through the once-differentiated associativity
    constraint.  All values are exact polynomials in q.
    """

    def __init__(self, desc: CIDescriptor, ring: Optional[QuantumRingData] = None,
                 qmax: Optional[int] = None):
        require_reconstruction_domain(desc)
        self.desc = desc
        self.ring = ring if ring is not None else build_ring(desc, qmax)
        self.qmax = self.ring.qmax
        self._cache: Dict[Tuple[int, ...], QPoly] = {}
        self._phi_cache: Dict[Tuple[int, int], QPoly] = {}

    # -- building blocks

    def _three_point(self, a: int, b: int, c: int) -> QPoly:
        n, fa = self.desc.n, self.desc.a
        s = a + b + c - n
        if s < 0 or s % fa != 0:
            return QPoly.zero(self.qmax)
        k = s // fa
        return QPoly.q_power(k, self.qmax,
                             Fraction(self.desc.b) ** k * self.desc.degree)

    def _phi(self, s: int, i: int) -> QPoly:
        """Coefficient of tau^s d/d tau^i in the divisor vector field."""
        key = (s, i)
        if key in self._phi_cache:
            return self._phi_cache[key]
        n, a = self.desc.n, self.desc.a
        out = QPoly.zero(self.qmax)
        if s > i and (s - i) % a == 0:
            kl = (s - i) // a
            coeff = Fraction(0)
            for k in range(1, kl + 1):
                if i + k * a <= n:
                    coeff += k * self.ring.M[i + k * a][i] * self.ring.W[s][i + k * a]
            out = QPoly.q_power(kl, self.qmax, coeff)
        self._phi_cache[key] = out
        return out

    def _reduce_index(self, x: int) -> Tuple[int, QPoly]:
        """Reduce an extended power index into [0, n] with its b q factor."""
        n, a = self.desc.n, self.desc.a
        factor = QPoly.const(1, self.qmax)
        bq = QPoly.q_power(1, self.qmax, self.desc.b)
        while x > n:
            x -= a
            factor = factor * bq
        return x, factor

    def _pair_contract(self, left: Tuple[int, ...], right: Tuple[int, ...]) -> QPoly:
        """sum_{e,f} F_{left,e} g^{ef} F_{f,right} using the inverse pairing."""
        n, a = self.desc.n, self.desc.a
        deg = self.desc.degree
        acc = QPoly.zero(self.qmax)
        for e in range(n + 1):
            le = self.partial(left + (e,))
            if le.is_zero():
                continue
            f = n - e
            acc = acc + le * self.partial(right + (f,)).scale(Fraction(1, deg))
            f2 = n - a - e
            if f2 >= 0:
                acc = acc - le * self.partial(right + (f2,)).scale(
                    Fraction(self.desc.b, deg)).shift_q(1)
        return acc

    # -- the jet itself

    def partial(self, indices) -> QPoly:
        """F^(0) partial derivative at 0 w.r.t. the given tau indices."""
        key = tuple(sorted(int(i) for i in indices))
        if any(i < 0 or i > self.desc.n for i in key):
            raise DomainError("tau index out of range")
        if len(key) < 3:
            raise DomainError("only derivatives of order >= 3 are defined")
        if key in self._cache:
            return self._cache[key]
        if len(key) == 3:
            val = self._three_point(*key)
        elif key[0] == 0:
            val = QPoly.zero(self.qmax)  # string equation
        elif key[0] == 1:
            val = self._divisor_step(key)
        else:
            val = self._raise_step(key)
        self._cache[key] = val
        return val

    def _divisor_step(self, key: Tuple[int, ...]) -> QPoly:
        rest = key[1:]
        val = self.partial(rest).q_d_q()
        for pos, s in enumerate(rest):
            reduced = rest[:pos] + rest[pos + 1:]
            for i in range(s % self.desc.a, s, self.desc.a):
                phi = self._phi(s, i)
                if not phi.is_zero():
                    val = val + phi * self.partial(tuple(sorted(reduced + (i,))))
        return val

    def _raise_step(self, key: Tuple[int, ...]) -> QPoly:
        # key sorted ascending, min >= 2; lower the minimum through the
        # differentiated associativity identity
        amin = key[0]
        rest = list(key[1:])
        C, D = rest[0], rest[1]
        P = tuple(rest[2:])
        A = amin - 1

        def ext(x: int, tail: Tuple[int, ...]) -> QPoly:
            x0, factor = self._reduce_index(x)
            return factor * self.partial(tuple(sorted(tail + (x0,))))

        val = ext(A + C, (1, D) + P)
        val = val + ext(1 + D, (A, C) + P)
        val = val - ext(C + D, (A, 1) + P)
        # middle splits of P (both parts proper)
        if P:
            from itertools import combinations
            idx = range(len(P))
            for rsize in range(1, len(P)):
                for subset in combinations(idx, rsize):
                    p1 = tuple(P[i] for i in subset)
                    p2 = tuple(P[i] for i in idx if i not in subset)
                    val = val + self._pair_contract((A, C) + p1, (1, D) + p2)
                    val = val - self._pair_contract((A, 1) + p1, (C, D) + p2)
        return val

    def jet_series(self, degree: int, nt: Optional[int] = None) -> TruncSeries:
        """Assemble the tau-coordinate jet of F^(0) as a TruncSeries.

        Only terms of total degree 3..degree are included (the classical
        quadratic part plays no role in any differential equation used here).
        """
        n = self.desc.n
        nt = n + 1 if nt is None else nt
        out = TruncSeries(nt, degree, self.qmax)
        for key in _multisets(n, 3, degree):
            val = self.partial(key)
            if val.is_zero():
                continue
            mult = 1
            for i in set(key):
                mult *= _factorial(key.count(i))
            expo = [0] * (nt + 1)
            for i in key:
                expo[i] += 1
            out = out.add_term(tuple(expo), val.scale(Fraction(1, mult)))
        return out


@lru_cache(maxsize=None)
def _factorial(k: int) -> int:
    from math import factorial
    return factorial(k)


def _multisets(n: int, dmin: int, dmax: int):
    """All ascending index multisets over 0..n of sizes dmin..dmax."""
    out = []

    def rec(prefix, start, remaining):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for i in range(start, n + 1):
            rec(prefix + [i], i, remaining - 1)

    for size in range(dmin, dmax + 1):
        rec([], 0, size)
    return out


def low_point_terms(ring: QuantumRingData, degree_cap: int) -> TruncSeries:
    """Stable one- and two-point quantum terms of the ambient potential.

    The WDVV equations only see third derivatives, but the Euler/divisor
    identity holds for the full potential including the degree-positive
    one-point terms <H_i>_{0,1,d} and two-point terms <H_i, H_j>_{0,2,d}.
    Classical (degree-zero) low-point data is unstable and absent.
    """
    desc = ring.desc
    n, qmax = desc.n, ring.qmax
    out = TruncSeries(n + 1, degree_cap, qmax)
    for i in range(n + 1):
        one = ring.jfun.entry(-1, n - i).scale(desc.degree)
        one = QPoly({k: c for k, c in one.coeffs.items() if k >= 1}, qmax)
        if not one.is_zero():
            key = [0] * (n + 2)
            key[i] = 1
            out = out.add_term(tuple(key), one)
    for i in range(n + 1):
        for j in range(i, n + 1):
            two = ring.two_point(i, j)
            two = QPoly({k: c for k, c in two.coeffs.items() if k >= 1}, qmax)
            if two.is_zero():
                continue
            key = [0] * (n + 2)
            key[i] += 1
            key[j] += 1
            out = out.add_term(tuple(key),
                               two if i != j else two.scale(Fraction(1, 2)))
    return out


def f0_derivs(desc: CIDescriptor, ring: Optional[QuantumRingData] = None,
              kmax: Optional[int] = None):
    """Third derivatives F_{abc}(0) and contracted fourth derivatives
    sum_e F_{abce}(0) g^{e0} of the ambient potential, quantum-power basis.

    Returns (third, fourth0) where third[(a,b,c)] and fourth0[(a,b,c)] are
    QPoly values; entries that vanish by the congruence constraints are
    exact zeros.
    """
    require_reconstruction_domain(desc)
    origin = AmbientOrigin(desc, ring)
    n, a = desc.n, desc.a
    deg = desc.degree
    third = {}
    fourth0 = {}
    for key in _multisets(n, 3, 3):
        third[key] = origin.partial(key)
    for key in _multisets(n, 3, 3):
        acc = origin.partial(tuple(sorted(key + (n,)))).scale(Fraction(1, deg))
        if n - a >= 0:
            acc = acc - origin.partial(tuple(sorted(key + (n - a,)))).scale(
                Fraction(desc.b, deg)).shift_q(1)
        fourth0[key] = acc
    return third, fourth0
