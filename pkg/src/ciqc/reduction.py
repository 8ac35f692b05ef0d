"""Monodromy-reduced WDVV / Euler / quantum-differential system.

After packing the primitive coordinates into the single invariant s, the
genus-zero potential F(t^0..t^n, s) satisfies

    F_{abe} g^{ef} F_{sf} + 2 s F_{sab} F_{ss} = F_{sa} F_{sb},
    F_{se} g^{ef} F_{sf} + 2 s F_{ss}^2 = 0,
    E F = (3-n) F + a(n,d) * d/dt^1 (classical cubic form),

with both WDVV-type equations read modulo s^{m/2} in odd dimensions.  This
module evaluates residuals of these equations (and of their order-by-order
s-expansions) exactly; it never solves them -- the reconstruction module
drives solving, this one is the trusted checker.  It also carries the
J-function recursion that rebuilds descendant data from the potential.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial
from typing import Dict, List, Optional, Sequence

from .errors import DomainError
from .exact import QPoly, Rational, TruncSeries
from .geometry import CIDescriptor


def pack_s(desc: CIDescriptor, values: Sequence[Rational]) -> Rational:
    """Evaluate the invariant s on a primitive coordinate vector.

    Even dimensions use an orthonormal basis, s = sum v_i^2 / 2; odd
    dimensions a symplectic basis, s = - sum v_i v_{i+m/2}.
    """
    vals = [Fraction(v) for v in values]
    if len(vals) != desc.m:
        raise DomainError(f"expected {desc.m} primitive coordinates, got {len(vals)}")
    if desc.n % 2 == 0:
        return sum((v * v for v in vals), Fraction(0)) / 2
    half = desc.m // 2
    return -sum((vals[i] * vals[i + half] for i in range(half)), Fraction(0))


def classical_pairing_inverse(desc: CIDescriptor, qmax: int):
    """Inverse ambient Poincare pairing in the classical basis H_0..H_n."""
    n = desc.n
    inv = Fraction(1, desc.degree)
    g = [[QPoly.zero(qmax) for _ in range(n + 1)] for _ in range(n + 1)]
    for e in range(n + 1):
        g[e][n - e] = QPoly.const(inv, qmax)
    return g


class ReducedPotential:
    """A potential F(t^0..t^n, s) with its descriptor and parity mode."""

    def __init__(self, desc: CIDescriptor, F: TruncSeries,
                 ginv: Optional[List[List[QPoly]]] = None):
        if F.nt != desc.n + 1:
            raise DomainError("potential has the wrong number of t-variables")
        self.desc = desc
        self.odd = desc.n % 2 == 1
        if self.odd:
            cap = desc.m // 2
            if F.s_cap is None or F.s_cap > cap:
                F = _with_s_cap(F, cap)
        self.F = F
        self.ginv = ginv if ginv is not None else \
            classical_pairing_inverse(desc, F.qmax)

    @property
    def s_cutoff(self) -> Optional[int]:
        """Residuals are asserted only below this s-power in odd mode."""
        return self.desc.m // 2 if self.odd else None


def _with_s_cap(F: TruncSeries, cap: int) -> TruncSeries:
    out = TruncSeries(F.nt, F.degree_cap, F.qmax, cap)
    for key, c in F.terms.items():
        out = out.add_term(key, c)
    return out


def _contract(ginv, left: List[TruncSeries], right: List[TruncSeries]) -> TruncSeries:
    n = len(left) - 1
    acc = left[0].clone_empty()
    for e in range(n + 1):
        if left[e].is_zero():
            continue
        for f in range(n + 1):
            if ginv[e][f].is_zero() or right[f].is_zero():
                continue
            acc = acc + (left[e] * right[f]).scale(ginv[e][f])
    return acc


def wdvv_residuals(pot: ReducedPotential) -> Dict[str, object]:
    """Residuals of the reduced system and of the ambient WDVV of F^(0).

    Keys: 'eq_mixed' maps (a,b) to the residual of the first reduced
    equation, 'eq_pure' is the residual of the second, 'ambient' maps
    (a,b,c,d) to the ambient WDVV residual of F at s = 0.  In odd mode the
    first two are truncated below s^{m/2} before being reported.
    """
    F = pot.F
    n = pot.desc.n
    ginv = pot.ginv
    Fs = F.diff_s()
    Fss = Fs.diff_s()
    d1 = [F.diff_t(i) for i in range(n + 1)]
    ds1 = [Fs.diff_t(i) for i in range(n + 1)]
    skey = [0] * (n + 1) + [1]
    s_series = F.clone_empty().add_term(tuple(skey), QPoly.const(1, F.qmax))

    mixed = {}
    for a in range(n + 1):
        da = d1[a]
        for b in range(a, n + 1):
            dab = da.diff_t(b)
            third = [dab.diff_t(e) for e in range(n + 1)]
            res = _contract(ginv, third, ds1)
            res = res + (s_series * dab.diff_s() * Fss).scale(2)
            res = res - ds1[a] * ds1[b]
            if pot.s_cutoff is not None:
                res = res.drop_s_at_or_above(pot.s_cutoff)
            mixed[(a, b)] = res

    pure = _contract(ginv, ds1, ds1) + (s_series * Fss * Fss).scale(2)
    if pot.s_cutoff is not None:
        pure = pure.drop_s_at_or_above(pot.s_cutoff)

    ambient = {}
    f0 = F.s_slice(0)
    d3 = {}
    for a in range(n + 1):
        for b in range(a, n + 1):
            for e in range(n + 1):
                key = tuple(sorted((a, b, e)))
                if key not in d3:
                    d3[key] = f0.diff_t(key[0]).diff_t(key[1]).diff_t(key[2])
    for a in range(n + 1):
        for b in range(a, n + 1):
            for c in range(b, n + 1):
                for d in range(n + 1):
                    lhs = _contract(
                        ginv,
                        [d3[tuple(sorted((a, b, e)))] for e in range(n + 1)],
                        [d3[tuple(sorted((c, d, f)))] for f in range(n + 1)])
                    rhs = _contract(
                        ginv,
                        [d3[tuple(sorted((a, c, e)))] for e in range(n + 1)],
                        [d3[tuple(sorted((b, d, f)))] for f in range(n + 1)])
                    ambient[(a, b, c, d)] = lhs - rhs
    return {"eq_mixed": mixed, "eq_pure": pure, "ambient": ambient}


def euler_residual(pot: ReducedPotential, classical_cubic: TruncSeries) -> TruncSeries:
    """Residual of E F = (3-n) F + a(n,d) d/dt^1 c for the Euler field

        E = sum (1-i) t^i d/dt^i + (2-n) s d/ds + a(n,d) d/dt^1.

    E never touches q; the equation encodes the dimension axiom together
    with the divisor equation.
    """
    F = pot.F
    n = pot.desc.n
    acc = F.clone_empty()
    for i in range(n + 1):
        ti = [0] * (n + 2)
        ti[i] = 1
        mono = F.clone_empty().add_term(tuple(ti), QPoly.const(1, F.qmax))
        acc = acc + (mono * F.diff_t(i)).scale(1 - i)
    skey = [0] * (n + 1) + [1]
    smono = F.clone_empty().add_term(tuple(skey), QPoly.const(1, F.qmax))
    acc = acc + (smono * F.diff_s()).scale(2 - n)
    acc = acc + F.diff_t(1).scale(pot.desc.a)
    acc = acc - F.scale(3 - n)
    acc = acc - classical_cubic.diff_t(1).scale(pot.desc.a)
    return acc


def euler_beta(desc: CIDescriptor, k: int) -> Optional[Fraction]:
    """Degree beta = (k(n-2)-(n-3))/a forced on F^(k)(0); None when it is
    not a positive integer (so F^(k)(0) = 0 by the dimension filter)."""
    num = k * (desc.n - 2) - (desc.n - 3)
    if num <= 0 or num % desc.a != 0:
        return None
    return Fraction(num, desc.a)


def admissible_orders(desc: CIDescriptor, kmax: int) -> List[int]:
    return [k for k in range(1, kmax + 1) if euler_beta(desc, k) is not None]


def expand_order_k(jets: Sequence[TruncSeries], k: int, ginv,
                   odd_rank: Optional[int] = None):
    """Residuals of the s^{k-1}-coefficient equations of the reduced system.

    ``jets[i]`` is the t-jet of F^(i); k = 1 yields the square-zero pair
    (eigenvalue equation and isotropy of the gradient), k = 2 the equations
    governing F^(2).  In odd dimensions the expansion is only valid below
    the nilpotency order; k >= m - 1 is refused.

    Returns (mixed, pure): mixed maps (a,b) to a residual jet, pure is the
    residual jet of the second equation.
    """
    if k < 1:
        raise DomainError("expansion order must be >= 1")
    if odd_rank is not None and k >= odd_rank - 1:
        raise DomainError(
            f"order {k} not asserted in odd mode with primitive rank {odd_rank}")
    kk = k - 1  # the printed expansion index
    if len(jets) < kk + 2:
        raise DomainError(f"need jets F^(0)..F^({kk + 1})")
    cap = max(j.degree_cap for j in jets)
    jets = [j.recap(cap) for j in jets]
    nt = jets[0].nt
    n = nt - 1

    grad = [[jet.diff_t(i) for i in range(nt)] for jet in jets]

    mixed = {}
    for a in range(1, n + 1):
        for b in range(a, n + 1):
            res = jets[0].clone_empty()
            for j in range(0, kk + 1):
                third = [grad[j][a].diff_t(b).diff_t(e) for e in range(nt)]
                res = res + _contract(ginv, third, grad[kk - j + 1]).scale(
                    Fraction(1, factorial(j) * factorial(kk - j)))
            for j in range(1, kk + 1):
                res = res + (grad[j][a].diff_t(b) * jets[kk - j + 2]).scale(
                    Fraction(2, factorial(j - 1) * factorial(kk - j)))
            for j in range(1, kk + 2):
                res = res - (grad[j][a] * grad[kk - j + 2][b]).scale(
                    Fraction(1, factorial(j - 1) * factorial(kk - j + 1)))
            mixed[(a, b)] = res

    pure = jets[0].clone_empty()
    for j in range(1, kk + 2):
        pure = pure + _contract(ginv, grad[j], grad[kk + 2 - j]).scale(
            Fraction(1, factorial(j - 1) * factorial(kk + 1 - j)))
    for j in range(2, kk + 2):
        pure = pure + (jets[j] * jets[kk + 3 - j]).scale(
            Fraction(2, factorial(j - 2) * factorial(kk + 1 - j)))
    return mixed, pure


# --- brute-force expansion over primitive variables (equivalence oracle) --


def expand_to_full(F_red: TruncSeries, n: int, m: int) -> TruncSeries:
    """Substitute s = sum u_mu^2 / 2 (even orthonormal mode) into a reduced
    potential, producing a polynomial in t^0..t^n, u^1..u^m."""
    nt_full = n + 1 + m
    out = TruncSeries(nt_full, F_red.degree_cap, F_red.qmax)
    half = Fraction(1, 2)
    s_full = TruncSeries(nt_full, F_red.degree_cap, F_red.qmax)
    for mu in range(m):
        key = [0] * (nt_full + 1)
        key[n + 1 + mu] = 2
        s_full = s_full.add_term(tuple(key), QPoly.const(half, F_red.qmax))
    s_pows = [None, s_full]

    def s_power(e):
        while len(s_pows) <= e:
            s_pows.append(s_pows[-1] * s_full)
        return s_pows[e]

    for key, coeff in F_red.sorted_terms():
        new_key = list(key[:-1]) + [0] * m + [0]
        base = TruncSeries(nt_full, F_red.degree_cap, F_red.qmax)
        base = base.add_term(tuple(new_key), coeff)
        se = key[-1]
        out = out + (base if se == 0 else base * s_power(se))
    return out


def full_wdvv_residuals(F: TruncSeries, n: int, m: int, deg: Fraction):
    """All WDVV residuals of a polynomial potential in full even-mode
    variables: ambient pairing anti-diagonal with weight ``deg``, primitive
    pairing the identity."""
    nt = n + 1 + m
    qmax = F.qmax
    ginv = [[QPoly.zero(qmax) for _ in range(nt)] for _ in range(nt)]
    for e in range(n + 1):
        ginv[e][n - e] = QPoly.const(Fraction(1, deg), qmax)
    for mu in range(m):
        ginv[n + 1 + mu][n + 1 + mu] = QPoly.const(1, qmax)

    grad = [F.diff_t(i) for i in range(nt)]
    second = {}
    for a in range(nt):
        for b in range(a, nt):
            second[(a, b)] = grad[a].diff_t(b)

    def d3(a, b, e):
        key = tuple(sorted((a, b, e)))
        return second[(key[0], key[1])].diff_t(key[2])

    residuals = {}
    for a in range(nt):
        for b in range(a, nt):
            for c in range(b, nt):
                for d in range(c, nt):
                    lhs = _contract(ginv, [d3(a, b, e) for e in range(nt)],
                                    [d3(c, d, f) for f in range(nt)])
                    rhs = _contract(ginv, [d3(a, c, e) for e in range(nt)],
                                    [d3(b, d, f) for f in range(nt)])
                    res = lhs - rhs
                    if not res.is_zero():
                        residuals[(a, b, c, d)] = res
    return residuals


# --- J-function recursion --------------------------------------------------


def j_recursion(desc: CIDescriptor, f_jets: Sequence[TruncSeries],
                j0: Dict[int, TruncSeries], kmax: int, zmin: int,
                ginv=None) -> List[Dict[int, TruncSeries]]:
    """Reconstruct the s-expansion layers of an ambient J-component.

    ``f_jets[i]`` are t-jets of F^(i) (needed up to order kmax + 1) over the
    same coordinates as ``j0``, the s = 0 layer; ``ginv`` defaults to the
    classical ambient inverse pairing.  Layer k+1 is built as

      J^(k+1) = (1/z) [ sum_i C(k,i) F^(i+1)_b g^{bc} d_c J^(k-i)
                        + 2k sum_i C(k-1,i) F^(i+2) J^(k-i) ].
    """
    if len(f_jets) < kmax + 2:
        raise DomainError(f"need F-jets to order {kmax + 1}")
    n = desc.n
    cap = max([j.degree_cap for j in f_jets] + [s.degree_cap for s in j0.values()])
    f_jets = [j.recap(cap) for j in f_jets]
    j0 = {zp: s.recap(cap) for zp, s in j0.items()}
    if ginv is None:
        ginv = classical_pairing_inverse(desc, f_jets[0].qmax)
    grads = [[jet.diff_t(i) for i in range(n + 1)] for jet in f_jets]
    layers = [dict(j0)]
    for k in range(0, kmax):
        new: Dict[int, TruncSeries] = {}

        def add(zp, series):
            if zp < zmin or series.is_zero():
                return
            new[zp] = new.get(zp, series.clone_empty()) + series

        for i in range(0, k + 1):
            cki = comb(k, i)
            for zp, series in layers[k - i].items():
                for b in range(n + 1):
                    for c in range(n + 1):
                        if ginv[b][c].is_zero():
                            continue
                        term = (grads[i + 1][b] * series.diff_t(c)).scale(
                            ginv[b][c]).scale(cki)
                        add(zp - 1, term)
        if k >= 1:
            for i in range(0, k):
                c2 = 2 * k * comb(k - 1, i)
                for zp, series in layers[k - i].items():
                    add(zp - 1, (f_jets[i + 2] * series).scale(c2))
        layers.append(new)
    return layers


def primitive_j_layers(desc: CIDescriptor, f_jets: Sequence[TruncSeries],
                       kmax: int, zmin: int) -> List[Dict[int, TruncSeries]]:
    """s-expansion layers of exp(F_s / z), the scalar factor of the
    primitive sector J_a = g_{ab} t^b exp(F_s / z).

    With F_s = sum_k s^k F^(k+1) / k!, layer 0 is exp(F^(1)/z) and the
    higher layers follow from d/ds exp(F_s/z) = (F_ss / z) exp(F_s/z):

        (j+1) E_{j+1} = (1/z) sum_{i=0}^{j} F^(i+2) E_{j-i} / i!.
    """
    cap = max(j.degree_cap for j in f_jets)
    f_jets = [j.recap(cap) for j in f_jets]
    qmax = f_jets[0].qmax
    one = f_jets[0].clone_empty().add_term(
        (0,) * (f_jets[0].nt + 1), QPoly.const(1, qmax))
    e0: Dict[int, TruncSeries] = {0: one}
    power = one
    r = 1
    while -r >= zmin:
        power = power * f_jets[1]
        if power.is_zero():
            break
        e0[-r] = power.scale(Fraction(1, factorial(r)))
        r += 1
    layers: List[Dict[int, TruncSeries]] = [e0]
    for j in range(0, kmax):
        new: Dict[int, TruncSeries] = {}
        for i in range(0, j + 1):
            if i + 2 >= len(f_jets):
                continue
            for zp, series in layers[j - i].items():
                if zp - 1 < zmin:
                    continue
                term = (f_jets[i + 2] * series).scale(Fraction(1, factorial(i)))
                if not term.is_zero():
                    new[zp - 1] = new.get(zp - 1, term.clone_empty()) + term
        layers.append({zp: s.scale(Fraction(1, j + 1)) for zp, s in new.items()})
    return layers


def index_one_two_point_primitive(desc: CIDescriptor, kmax: int):
    """Two-point descendants <gamma_a psi^k, gamma_b>_{0,2,k+1} / g_{ab}
    for index-one targets, by the topological recursion induction
    (k+1) T_k = F^(1)(0) T_{k-1}, T_{-1} = 1, F^(1)(0) = -ell."""
    if desc.a != 1:
        raise DomainError("two-point primitive tower only forms for index 1")
    out = []
    t = Fraction(1)
    for k in range(0, kmax + 1):
        t = t * Fraction(-desc.ell, k + 1)
        out.append(t)
    return out
