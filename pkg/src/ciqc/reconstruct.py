"""Reconstruction of primitive-class data from the ambient origin structure.

The square-zero vector gamma = (H~^n - b q H~^{n-a}) / deg X is a common
eigenvector of the quantum multiplications at the origin; the quotient-ring
model C[w]/(w^{n+1} - b w^k) identifies the origin algebra with
C[eps]/(eps^k) + C^{n+1-k}, which splits the linear systems of the order-by-
order reconstruction.  On top of that sit the degree-2 jet of F^(1), the
quadratic satisfied by F^(2)(0) with its origin gradient, and the linear
coefficients that determine the higher s-derivatives for cubics and for odd
intersections of two quadrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import DomainError, InternalConsistencyError
from .exact import QPoly, Rational, TruncSeries, linear_substitute
from .geometry import CIDescriptor, require_reconstruction_domain
from .smallqh import (AmbientOrigin, QuantumRingData, build_ring,
                      quantum_product_qp)


def gamma_vector(desc: CIDescriptor, ring: Optional[QuantumRingData] = None):
    """The square-zero eigenvector gamma in the classical basis.

    All three structural properties are verified before returning:
    gamma o gamma = 0, H^a o gamma = lambda_a gamma with lambda_a = delta_a0,
    and (gamma, 1) = 1.
    """
    require_reconstruction_domain(desc)
    if ring is None:
        ring = build_ring(desc)
    n, a, qmax = desc.n, desc.a, ring.qmax
    inv = Fraction(1, desc.degree)
    gamma_qp = [QPoly.zero(qmax) for _ in range(n + 1)]
    gamma_qp[n] = QPoly.const(inv, qmax)
    gamma_qp[n - a] = QPoly.q_power(1, qmax, -desc.b * inv)

    square = quantum_product_qp(desc, gamma_qp, gamma_qp, qmax)
    if any(not c.is_zero() for c in square):
        raise InternalConsistencyError("gamma o gamma != 0")
    for e in range(n + 1):
        unit = [QPoly.const(1 if i == e else 0, qmax) for i in range(n + 1)]
        prod = quantum_product_qp(desc, unit, gamma_qp, qmax)
        expect = gamma_qp if e == 0 else [QPoly.zero(qmax)] * (n + 1)
        if prod != expect:
            raise InternalConsistencyError(f"gamma is not an eigenvector for H^{e}")

    gamma_cl = [QPoly.zero(qmax) for _ in range(n + 1)]
    for j in range(n + 1):
        if gamma_qp[j].is_zero():
            continue
        for i in range(n + 1):
            gamma_cl[i] = gamma_cl[i] + ring.powers[j][i] * gamma_qp[j]
    if gamma_cl[n].scale(desc.degree) != QPoly.const(1, qmax):
        raise InternalConsistencyError("(gamma, 1) != 1")
    return gamma_cl


# --- artin algebra model ----------------------------------------------------


def _poly_mod_reduce(coeffs: List[Fraction], n: int, k: int, b: Fraction):
    """Reduce a w-polynomial modulo w^{n+1} - b w^k."""
    out = list(coeffs)
    for d in range(len(out) - 1, n, -1):
        c = out[d]
        if c:
            out[d] = Fraction(0)
            out[d - (n + 1) + k] += c * b
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _poly_mul_mod(p, q, n, k, b):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, ci in enumerate(p):
        if ci:
            for j, cj in enumerate(q):
                if cj:
                    out[i + j] += ci * cj
    return _poly_mod_reduce(out, n, k, b)


def artin_iso(n: int, k: int, b: Rational) -> dict:
    """Verify the quotient-ring model C[w]/(w^{n+1} - b w^k).

    Checks eps^k = 0 for eps = w^{n-k+2} - b w, the closed form
    phi(eps^{k-1}) = (-1)^k b^{k-2} (w^n - b w^{k-1}) for k >= 2, and for
    k = 1 that w^{n+1} - b w is separable (the semisimple case).
    """
    b = Fraction(b)
    if b == 0:
        raise DomainError("b must be nonzero")
    if not (1 <= k <= n) or n < 2:
        raise DomainError("need 1 <= k <= n and n >= 2")
    eps = [Fraction(0)] * (n - k + 3)
    eps[n - k + 2] = Fraction(1)
    eps[1] = -b
    eps = _poly_mod_reduce(eps, n, k, b)

    power = [Fraction(1)]
    for _ in range(k):
        power = _poly_mul_mod(power, eps, n, k, b)
    eps_k_zero = all(c == 0 for c in power)

    report = {"n": n, "k": k, "b": b, "eps_k_zero": eps_k_zero,
              "eps_power_formula": None, "semisimple_distinct_roots": None}

    if k >= 2:
        power = [Fraction(1)]
        for _ in range(k - 1):
            power = _poly_mul_mod(power, eps, n, k, b)
        expected = [Fraction(0)] * (n + 1)
        sign = Fraction((-1) ** k) * b ** (k - 2)
        expected[n] += sign
        expected[k - 1] -= sign * b
        expected = _poly_mod_reduce(expected, n, k, b)
        width = max(len(power), len(expected))
        power += [Fraction(0)] * (width - len(power))
        expected += [Fraction(0)] * (width - len(expected))
        report["eps_power_formula"] = power == expected
    else:
        # w^{n+1} - b w has n+1 distinct roots iff gcd with derivative is 1
        p = [Fraction(0)] * (n + 2)
        p[n + 1] = Fraction(1)
        p[1] = -b
        dp = [i * c for i, c in enumerate(p)][1:]
        report["semisimple_distinct_roots"] = _poly_gcd_degree(p, dp) == 0
    return report


def _poly_gcd_degree(p, q):
    def norm(v):
        v = list(v)
        while v and v[-1] == 0:
            v.pop()
        return v

    p, q = norm(p), norm(q)
    while q:
        # polynomial remainder
        r = list(p)
        while len(r) >= len(q) and any(c != 0 for c in r):
            if r[-1] == 0:
                r.pop()
                continue
            f = r[-1] / q[-1]
            shift = len(r) - len(q)
            for i, c in enumerate(q):
                r[shift + i] -= f * c
            r = norm(r)
        p, q = q, norm(r)
    return len(p) - 1


# --- F^(1) ------------------------------------------------------------------


@dataclass
class F1Jet:
    desc: CIDescriptor
    constant: QPoly                 # -ell q for index 1, else 0
    quad: Dict[Tuple[int, int], QPoly]   # tau-basis second derivatives at 0
    tau_jet: TruncSeries
    t_jet: TruncSeries


def _tau_to_t_forms(ring: QuantumRingData):
    """tau^i as a linear combination of t-variables: tau^i = sum M_{i+ka}^i q^k t^{i+ka}."""
    desc = ring.desc
    n, a, qmax = desc.n, desc.a, ring.qmax
    forms = []
    for i in range(n + 1):
        form = []
        k = 0
        while i + k * a <= n:
            c = ring.M[i + k * a][i]
            if c != 0:
                form.append((i + k * a, QPoly.q_power(k, qmax, c)))
            k += 1
        forms.append(form)
    return forms


def f1_series(desc: CIDescriptor, ring: Optional[QuantumRingData] = None) -> F1Jet:
    """Degree-2 jet of F^(1), in quantum-power coordinates and converted to
    the classical coordinates.

    The linear part is tau^0 (string equation); the second derivatives come
    from the divisor vector field (entries with an index 1) and from the
    contracted fourth derivatives of F^(0) (all other entries).
    """
    require_reconstruction_domain(desc)
    if ring is None:
        ring = build_ring(desc)
    origin = AmbientOrigin(desc, ring)
    n, a, qmax = desc.n, desc.a, ring.qmax

    quad: Dict[Tuple[int, int], QPoly] = {}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            if i == 1:
                val = origin._phi(j, 0)
            else:
                # contracted-fourth-derivative route:
                # F^(1)_{ij}(0) = - sum_e F_{1,i-1,j,e}(0) g^{e0}
                val = -origin.partial((1, i - 1, j, n)).scale(Fraction(1, desc.degree))
                if n - a >= 0:
                    val = val + origin.partial(
                        tuple(sorted((1, i - 1, j, n - a)))
                    ).scale(Fraction(desc.b, desc.degree)).shift_q(1)
            quad[(i, j)] = val

    constant = QPoly.q_power(1, qmax, -desc.ell) if a == 1 else QPoly.zero(qmax)

    tau = TruncSeries(n + 1, 2, qmax)
    key0 = (0,) * (n + 2)
    if not constant.is_zero():
        tau = tau.add_term(key0, constant)
    lin = [0] * (n + 2)
    lin[0] = 1
    tau = tau.add_term(tuple(lin), QPoly.const(1, qmax))
    for (i, j), val in quad.items():
        if val.is_zero():
            continue
        key = [0] * (n + 2)
        key[i] += 1
        key[j] += 1
        # Taylor coefficient: F_{ij} for i != j, F_{ii}/2 on the diagonal
        tau = tau.add_term(tuple(key), val if i != j else val.scale(Fraction(1, 2)))

    t_jet = linear_substitute(tau, _tau_to_t_forms(ring))
    return F1Jet(desc, constant, quad, tau, t_jet)


# --- F^(2) ------------------------------------------------------------------


def _f1_pair_row(desc, ring, f1: F1Jet, c: int) -> QPoly:
    """sum_{e,f} F^(1)_{1e}(0) g^{ef} F^(1)_{fc}(0)."""
    n = desc.n
    qmax = ring.qmax
    acc = QPoly.zero(qmax)

    def quad(i, j):
        if i == 0 or j == 0:
            return QPoly.zero(qmax)
        key = (i, j) if i <= j else (j, i)
        return f1.quad[key]

    for e in range(n + 1):
        left = quad(1, e)
        if left.is_zero():
            continue
        for f in range(n + 1):
            gef = ring.ginv[e][f]
            if gef.is_zero():
                continue
            acc = acc + left * gef * quad(f, c)
    return acc


def f2_at_zero(desc: CIDescriptor, ring: Optional[QuantumRingData] = None,
               f1: Optional[F1Jet] = None) -> List[Fraction]:
    """All roots of the quadratic satisfied by F^(2)(0).

    Returns the root list sorted ascending, {0} when the admissibility
    degree (n-1)/a is not a positive integer or when the quadratic
    degenerates to F^2 = 0.
    """
    require_reconstruction_domain(desc)
    if ring is None:
        ring = build_ring(desc)
    if f1 is None:
        f1 = f1_series(desc, ring)
    n, a, qmax = desc.n, desc.a, ring.qmax
    if (n - 1) % a != 0:
        return [Fraction(0)]
    beta = (n - 1) // a

    A = ring.ginv[0][1].scale(Fraction(n - 1, a))
    B = QPoly.zero(qmax)
    for b in range(2, n + 1):
        g0b = ring.ginv[0][b]
        if g0b.is_zero():
            continue
        A = A - (g0b * f1.quad[(1, b - 1)]).scale(2)
        B = B + g0b * _f1_pair_row(desc, ring, f1, b - 1)

    a_coeff = A.coefficient(beta)
    b_coeff = B.coefficient(2 * beta)
    if A != QPoly.q_power(beta, qmax, a_coeff):
        raise InternalConsistencyError("quadratic A-coefficient not q-homogeneous")
    if B != QPoly.q_power(2 * beta, qmax, b_coeff):
        raise InternalConsistencyError("quadratic B-coefficient not q-homogeneous")
    if a_coeff == 0 and b_coeff == 0:
        return [Fraction(0)]
    disc = a_coeff * a_coeff - 4 * b_coeff
    root = _exact_sqrt(disc)
    if root is None:
        raise InternalConsistencyError("quadratic for F^(2)(0) has no rational root")
    sols = sorted({(-a_coeff - root) / 2, (-a_coeff + root) / 2})
    return sols


def _exact_sqrt(x: Fraction) -> Optional[Fraction]:
    if x < 0:
        return None
    num = math.isqrt(x.numerator)
    den = math.isqrt(x.denominator)
    if num * num == x.numerator and den * den == x.denominator:
        return Fraction(num, den)
    return None


@dataclass
class F2Jet:
    desc: CIDescriptor
    value: QPoly                    # F^(2)(0) with its q-grading
    tau_grad: List[QPoly]           # d/d tau^b at 0, b = 0..n
    t_grad: List[QPoly]             # d/d t^b at 0
    t_jet: TruncSeries              # constant + linear jet in t
    tau_jet: TruncSeries            # same jet in quantum-power coordinates


def f2_gradient(desc: CIDescriptor, f2zero: Rational,
                ring: Optional[QuantumRingData] = None,
                f1: Optional[F1Jet] = None) -> F2Jet:
    """Origin gradient of F^(2) for a chosen root of the quadratic."""
    require_reconstruction_domain(desc)
    if ring is None:
        ring = build_ring(desc)
    if f1 is None:
        f1 = f1_series(desc, ring)
    roots = f2_at_zero(desc, ring, f1)
    f2zero = Fraction(f2zero)
    if f2zero not in roots:
        raise DomainError(f"{f2zero} is not a root of the F^(2)(0) quadratic {roots}")
    n, a, qmax = desc.n, desc.a, ring.qmax

    if (n - 1) % a == 0 and f2zero != 0:
        beta = (n - 1) // a
        value = QPoly.q_power(beta, qmax, f2zero)
    else:
        value = QPoly.zero(qmax)

    tau_grad = [QPoly.zero(qmax) for _ in range(n + 1)]
    if (n - 1) % a == 0:
        tau_grad[1] = value.scale(Fraction(n - 1, a))
    for b in range(2, n + 1):
        tau_grad[b] = _f1_pair_row(desc, ring, f1, b - 1) \
            - (f1.quad[(1, b - 1)] * value).scale(2)

    t_grad = [QPoly.zero(qmax) for _ in range(n + 1)]
    for i in range(n + 1):
        for j in range(i % a, i + 1, a):
            c = ring.M[i][j]
            if c != 0 and not tau_grad[j].is_zero():
                t_grad[i] = t_grad[i] + tau_grad[j].scale(c).shift_q((i - j) // a)

    jet = TruncSeries(n + 1, 1, qmax)
    tau_jet = TruncSeries(n + 1, 1, qmax)
    if not value.is_zero():
        jet = jet.add_term((0,) * (n + 2), value)
        tau_jet = tau_jet.add_term((0,) * (n + 2), value)
    for i in range(n + 1):
        key = [0] * (n + 2)
        key[i] = 1
        if not t_grad[i].is_zero():
            jet = jet.add_term(tuple(key), t_grad[i])
        if not tau_grad[i].is_zero():
            tau_jet = tau_jet.add_term(tuple(key), tau_grad[i])
    return F2Jet(desc, value, tau_grad, t_grad, jet, tau_jet)


def f2_gradient_closed_form(desc: CIDescriptor, cval: Fraction) -> Dict[int, QPoly]:
    """Closed form for the gradient rows when F^(2)(0) = 0: the entry at b
    is c(n,d)^2/deg * b(d)^{(n+b-2)/a} q^{(n+b-2)/a} for b = 2-n mod a."""
    from .smallqh import default_qmax
    n, a = desc.n, desc.a
    qmax = default_qmax(desc)
    out = {}
    for b in range(0, n + 1):
        if b >= 2 and (b - (2 - desc.n)) % a == 0:
            k = (desc.n + b - 2) // a
            out[b] = QPoly.q_power(k, qmax,
                                   cval * cval / desc.degree * Fraction(desc.b) ** k)
        else:
            out[b] = QPoly.zero(qmax)
    return out


def f2_origin_residuals(desc: CIDescriptor, ring: QuantumRingData,
                        f1: F1Jet, f2jet: F2Jet):
    """Origin residuals of the order-2 expansion equations.

    Returns (mixed, pure): ``mixed[(a,b)]`` is the residual of

      -F1_{ae} g^{ef} F1_{fb} + F0_{abe} g^{ef} F2_f + 2 F1_{ab} F2
        - F2_a F1_b - F1_a F2_b

    at the origin for 1 <= a <= b <= n, and ``pure`` the residual of
    g^{0f} F2_f + F2 * F2.  Both must vanish for each admissible root.
    """
    origin = AmbientOrigin(desc, ring)
    n, qmax = desc.n, ring.qmax

    def f1q(i, j):
        if i == 0 or j == 0:
            return QPoly.zero(qmax)
        return f1.quad[(i, j) if i <= j else (j, i)]

    mixed = {}
    for a in range(1, n + 1):
        for b in range(a, n + 1):
            res = QPoly.zero(qmax)
            for e in range(n + 1):
                for f in range(n + 1):
                    gef = ring.ginv[e][f]
                    if gef.is_zero():
                        continue
                    res = res - f1q(a, e) * gef * f1q(f, b)
                    res = res + origin.partial((a, b, e)) * gef * f2jet.tau_grad[f]
            res = res + (f1q(a, b) * f2jet.value).scale(2)
            mixed[(a, b)] = res

    pure = f2jet.value * f2jet.value
    for f in range(n + 1):
        g0f = ring.ginv[0][f]
        if not g0f.is_zero():
            pure = pure + g0f * f2jet.tau_grad[f]
    return mixed, pure


# --- the split-basis eigen solver -------------------------------------------


@dataclass
class FrobeniusOrigin:
    """Origin Frobenius algebra data in the split basis.

    Basis order: u (unit of the nilpotent block), eps^1..eps^{k-1}, then the
    semisimple idempotents e_1..e_{n+1-k}, with k = n + 1 - a.  The common
    eigenvector is eps^{k-1}; multiplication eigenvalues are lambda_u = 1
    and zero elsewhere.
    """
    desc: CIDescriptor
    gamma: List[QPoly]

    @property
    def k(self) -> int:
        return self.desc.n + 1 - self.desc.a

    @property
    def semisimple_count(self) -> int:
        return self.desc.a

    def labels(self) -> List[tuple]:
        out = [("u",)]
        out += [("eps", j) for j in range(1, self.k)]
        out += [("e", j) for j in range(1, self.semisimple_count + 1)]
        return out


def frobenius_origin(desc: CIDescriptor,
                     ring: Optional[QuantumRingData] = None) -> FrobeniusOrigin:
    require_reconstruction_domain(desc)
    if ring is None:
        ring = build_ring(desc)
    gamma = gamma_vector(desc, ring)  # raises if any invariant fails
    return FrobeniusOrigin(desc, gamma)


def eigen_solve(origin: FrobeniusOrigin, rhs: Dict[tuple, Rational],
                euler: Optional[Rational] = None):
    """Solve C_{ab}^c x_c - lambda_a x_b - lambda_b x_a = rhs in the split
    basis, in the order the structure dictates.

    rhs maps equation labels to values: ("e", j) for the (e_j, e_j)
    equation, ("eps", j) for the (eps, eps^{j-1}) equation with j >= 2, and
    ("u",) for the (u, u) equation.  The eps-direction is not determined by
    these equations; it is taken from ``euler`` when supplied, otherwise the
    returned status says "needs Euler input".
    """
    k = origin.k
    x: Dict[tuple, Fraction] = {}
    for j in range(1, origin.semisimple_count + 1):
        x[("e", j)] = Fraction(rhs.get(("e", j), 0))
    for j in range(2, k):
        x[("eps", j)] = Fraction(rhs.get(("eps", j), 0))
    x[("u",)] = -Fraction(rhs.get(("u",), 0))
    if k >= 2:
        if euler is None:
            return x, "needs Euler input"
        x[("eps", 1)] = Fraction(euler)
    return x, "ok"


# --- higher-order coefficients ----------------------------------------------


@dataclass
class HigherKRecord:
    order: int              # the derivative F^(order)(0) being determined
    k: int                  # expansion index (order - 1)
    coefficient: Fraction
    admissible: bool        # Euler-filter admissibility of F^(order)(0) != 0
    determined: bool
    note: str


def higher_k_coeffs(desc: CIDescriptor, kmax: int) -> List[HigherKRecord]:
    """Linear coefficients determining F^(k+1)(0) for cubics and (2,2).

    For d = (3) the coefficient of F^(k+1)(0) is 9(k-1)/(n-1) - 3k, which
    vanishes only for the cubic threefold at order 4; for d = (2,2) it is
    4(k-1)/(n-1), never zero in range.
    """
    require_reconstruction_domain(desc)
    from .reduction import euler_beta
    if desc.d not in ((3,), (2, 2)):
        raise DomainError("closed recursion only available for d = (3) or (2,2)")
    out = []
    for order in range(3, kmax + 1):
        k = order - 1
        if desc.d == (3,):
            coeff = Fraction(9 * (k - 1), desc.n - 1) - 3 * k
        else:
            coeff = Fraction(4 * (k - 1), desc.n - 1)
        admissible = euler_beta(desc, order) is not None
        determined = coeff != 0
        note = ""
        if not determined:
            note = "unknown parameter F^(4)(0) for the cubic threefold"
        elif not admissible:
            note = "forced to vanish by the dimension filter"
        out.append(HigherKRecord(order, k, coeff, admissible, determined, note))
    return out
