"""Reduced WDVV/Euler system residuals, the s-packing, the full-variable
brute-force equivalence oracle, and the J-function recursion."""

import random
from fractions import Fraction

import pytest

from ciqc.errors import DomainError
from ciqc.exact import QPoly, TruncSeries, linear_substitute
from ciqc.geometry import describe
from ciqc.reconstruct import _tau_to_t_forms, f1_series, f2_at_zero, f2_gradient
from ciqc.reduction import (ReducedPotential, euler_beta,
                            expand_order_k, expand_to_full,
                            full_wdvv_residuals, euler_residual,
                            index_one_two_point_primitive, j_recursion,
                            pack_s, primitive_j_layers, wdvv_residuals)
from ciqc.smallqh import AmbientOrigin, build_ring, low_point_terms

SEED = 20240811

_cache = {}


def cubic4_data():
    if "c4" not in _cache:
        desc = describe(4, (3,))
        ring = build_ring(desc)
        origin = AmbientOrigin(desc, ring)
        _cache["c4"] = (desc, ring, origin)
    return _cache["c4"]


def test_pack_s_even():
    desc = describe(4, (3,))  # m = 22
    assert pack_s(desc, [0] * desc.m) == 0
    vals = [0] * desc.m
    vals[0] = vals[1] = vals[2] = 1
    assert pack_s(desc, vals) == Fraction(3, 2)


def test_pack_s_odd():
    desc = describe(3, (2, 2))  # m = 4, symplectic pairs (0,2), (1,3)
    vals = [0] * desc.m
    vals[0] = 1
    vals[desc.m // 2] = 1
    assert pack_s(desc, vals) == -1
    with pytest.raises(DomainError):
        pack_s(desc, [1, 2, 3])


def test_euler_beta_filter():
    # gcd(n-2, a) > 1 kills every order
    desc = describe(6, (2, 3))  # a = 4, gcd(4,4) = 4
    assert all(euler_beta(desc, k) is None for k in range(1, 12))
    # cubic threefold: beta(2) = (2*1-0)/2 = 1
    assert euler_beta(describe(3, (3,)), 2) == 1
    assert euler_beta(describe(5, (2, 3)), 2) is None  # (n-1)/a = 4/3


def assemble_reduced_potential(deg0=5, deg1=2):
    """F = F^(0) + s F^(1) for the cubic fourfold, in classical coordinates."""
    desc, ring, origin = cubic4_data()
    forms = _tau_to_t_forms(ring)
    f0_tau = origin.jet_series(deg0)
    f0_t = linear_substitute(f0_tau, forms)
    f1 = f1_series(desc, ring)
    cap = max(deg0, deg1 + 1)
    F = TruncSeries(desc.n + 1, cap, ring.qmax)
    for key, c in f0_t.terms.items():
        F = F.add_term(key, c)
    for key, c in f1.t_jet.terms.items():
        F = F.add_term(key[:-1] + (1,), c)
    return desc, ring, F, f0_t


def test_reduced_residuals_vanish_on_reconstructed_data():
    # F = F^(0) + s F^(1): the s^0 slice of the first reduced equation and
    # of the pure equation must vanish to the order the jets determine
    desc, ring, F, _ = assemble_reduced_potential()
    pot = ReducedPotential(desc, F)
    res = wdvv_residuals(pot)
    for (a, b), series in res["eq_mixed"].items():
        s0 = series.s_slice(0).truncate_degree(1)
        assert s0.is_zero(), (a, b, s0)
    # the pure equation at s^0: F^(1)_e g^{ef} F^(1)_f; its degree-2 part
    # already involves the (unknown) cubic terms of F^(1), so the quadratic
    # jet determines the residual only through degree 1
    pure0 = res["eq_pure"].s_slice(0).truncate_degree(1)
    assert pure0.is_zero()
    # ambient WDVV residual of the degree-5 jet through total degree 1
    for key, series in res["ambient"].items():
        assert series.truncate_degree(1).is_zero(), key


def test_reduced_residuals_detect_perturbation():
    desc, ring, F, _ = assemble_reduced_potential()
    key = [0] * (desc.n + 2)
    key[desc.n - 1] = 1
    key[-1] = 1  # tamper with the s t^{n-1} coefficient of F^(1)
    Fbad = F.add_term(tuple(key), QPoly.q_power(1, ring.qmax, 1))
    res = wdvv_residuals(ReducedPotential(desc, Fbad))
    hit = any(not series.s_slice(0).truncate_degree(1).is_zero()
              for series in res["eq_mixed"].values())
    hit = hit or not res["eq_pure"].s_slice(0).truncate_degree(1).is_zero()
    assert hit


def test_euler_residual_vanishes_and_detects():
    # the Euler identity sees the full potential, including the stable
    # one- and two-point quantum terms invisible to the WDVV equations
    desc, ring, F, f0_t = assemble_reduced_potential()
    low = low_point_terms(ring, F.degree_cap)
    Ffull = F
    for key, c in low.terms.items():
        Ffull = Ffull.add_term(key, c)
    pot = ReducedPotential(desc, Ffull)
    cubic = f0_t.clone_empty()
    for key, c in f0_t.terms.items():
        if sum(key) == 3:
            c0 = c.coefficient(0)
            if c0 != 0:
                cubic = cubic.add_term(key, QPoly.const(c0, ring.qmax))

    def window(series):
        # the jets determine the residual for t-degree <= 4 at s^0 (the
        # degree-5 jet feeds d/dt^1) and t-degree <= 1 at s^1
        kept = [key for key in series.terms
                if (key[-1] == 0 and sum(key) <= 4)
                or (key[-1] == 1 and sum(key[:-1]) <= 1)]
        return kept

    assert window(euler_residual(pot, cubic)) == []
    key = [0] * (desc.n + 2)
    key[2] = 1
    key[-1] = 1
    bad = ReducedPotential(desc, Ffull.add_term(tuple(key), QPoly.const(1, ring.qmax)))
    assert window(euler_residual(bad, cubic)) != []


def test_expand_order_one_reproduces_square_zero_equations():
    desc, ring, origin = cubic4_data()
    f1 = f1_series(desc, ring)
    f0_tau = origin.jet_series(4)
    mixed, pure = expand_order_k([f0_tau, f1.tau_jet], 1, ring.ginv)
    for key, series in mixed.items():
        assert series.truncate_degree(1).is_zero(), key
    assert pure.truncate_degree(1).is_zero()


def test_expand_order_one_detects_perturbation():
    desc, ring, origin = cubic4_data()
    f1 = f1_series(desc, ring)
    f0_tau = origin.jet_series(4)
    key = [0] * (desc.n + 2)
    key[1] = key[3] = 1
    bad = f1.tau_jet.add_term(tuple(key), QPoly.q_power(1, ring.qmax, 1))
    mixed, _ = expand_order_k([f0_tau, bad], 1, ring.ginv)
    assert any(not s.truncate_degree(1).is_zero() for s in mixed.values())


def test_expand_order_two_is_the_f2_equation():
    # pure equation at order 2, evaluated at the origin, is twice the
    # equation g^{0f} F2_f + F2^2 = 0; it vanishes for each root
    desc, ring, origin = cubic4_data()
    f1 = f1_series(desc, ring)
    f0_tau = origin.jet_series(3)
    for root in f2_at_zero(desc, ring, f1):
        f2 = f2_gradient(desc, root, ring, f1)
        _, pure = expand_order_k([f0_tau, f1.tau_jet, f2.tau_jet], 2, ring.ginv)
        assert pure.constant_term().is_zero(), root


def test_expand_order_refused_in_shallow_odd_mode():
    # a synthetic shallow odd rank: equations beyond the nilpotency order
    # are not asserted
    desc, ring, origin = cubic4_data()
    f1 = f1_series(desc, ring)
    f0_tau = origin.jet_series(3)
    with pytest.raises(DomainError):
        expand_order_k([f0_tau, f1.tau_jet], 1, ring.ginv, odd_rank=2)


# --- brute-force equivalence of full and reduced WDVV ----------------------


def random_reduced_poly(rng, nt, cap, max_deg, s_only_deg=1):
    s = TruncSeries(nt, cap, 0)
    for _ in range(8):
        key = [0] * (nt + 1)
        budget = rng.randrange(1, max_deg + 1)
        for _ in range(budget):
            key[rng.randrange(nt + 1)] += 1
        if key[-1] > s_only_deg:
            continue
        s = s.add_term(tuple(key), QPoly.const(Fraction(rng.randrange(-3, 4)), 0))
    return s


def classical_toy_cubic(nt, cap):
    # associative toy: F = (t0^2 t2)/2 + (t0 t1^2)/2 over ambient t0,t1,t2
    s = TruncSeries(nt, cap, 0)
    s = s.add_term((2, 0, 1, 0), QPoly.const(Fraction(1, 2), 0))
    s = s.add_term((1, 2, 0, 0), QPoly.const(Fraction(1, 2), 0))
    return s


def reduced_residuals_zero(desc_n, F, deg):
    """Evaluate the reduced equations of an abstract even toy directly."""
    nt = desc_n + 1
    ginv = [[QPoly.zero(0) for _ in range(nt)] for _ in range(nt)]
    for e in range(nt):
        ginv[e][desc_n - e] = QPoly.const(1, 0)

    Fs = F.diff_s()
    Fss = Fs.diff_s()
    skey = (0,) * nt + (1,)
    s_series = F.clone_empty().add_term(skey, QPoly.const(1, 0))
    ok = True
    for a in range(nt):
        for b in range(a, nt):
            dab = F.diff_t(a).diff_t(b)
            third = [dab.diff_t(e) for e in range(nt)]
            acc = dab.clone_empty()
            for e in range(nt):
                acc = acc + third[e] * Fs.diff_t(desc_n - e)
            acc = acc + (s_series * dab.diff_s() * Fss).scale(2)
            acc = acc - Fs.diff_t(a) * Fs.diff_t(b)
            ok = ok and acc.truncate_degree(deg).is_zero()
    acc = F.clone_empty()
    for e in range(nt):
        acc = acc + Fs.diff_t(e) * Fs.diff_t(desc_n - e)
    acc = acc + (s_series * Fss * Fss).scale(2)
    ok = ok and acc.truncate_degree(deg).is_zero()

    # ambient WDVV of the s = 0 slice
    f0 = F.s_slice(0)
    for a in range(nt):
        for b in range(nt):
            for c in range(nt):
                for d in range(nt):
                    lhs = F.clone_empty()
                    rhs = F.clone_empty()
                    for e in range(nt):
                        lhs = lhs + f0.diff_t(a).diff_t(b).diff_t(e) * \
                            f0.diff_t(desc_n - e).diff_t(c).diff_t(d)
                        rhs = rhs + f0.diff_t(a).diff_t(c).diff_t(e) * \
                            f0.diff_t(desc_n - e).diff_t(b).diff_t(d)
                    ok = ok and (lhs - rhs).truncate_degree(deg).is_zero()
    return ok


def test_full_vs_reduced_equivalence_synthetic_m3():
    """Brute-force oracle: expanding s = sum u^2/2 over m = 3 primitive
    variables, the full WDVV residuals vanish iff the reduced ones do."""
    n, m = 2, 3
    nt = n + 1
    cap = 4
    rng = random.Random(SEED)

    def full_zero(F_red, deg):
        F_full = expand_to_full(F_red, n, m)
        res = full_wdvv_residuals(F_full, n, m, Fraction(1))
        return all(series.truncate_degree(deg).is_zero()
                   for series in res.values())

    # a satisfying instance: s-independent associative classical cubic
    good = classical_toy_cubic(nt, cap)
    assert reduced_residuals_zero(n, good, cap - 3)
    assert full_zero(good, cap - 3)

    # the same cubic with an s-dependence no longer satisfies the system
    bad = good.add_term((0, 1, 0, 1), QPoly.const(1, 0))
    assert not reduced_residuals_zero(n, bad, cap - 3)
    assert not full_zero(bad, cap - 3)

    # random perturbations: the two residual systems vanish together
    agree = 0
    for _ in range(12):
        F_red = good + random_reduced_poly(rng, nt, cap, 3)
        lhs = reduced_residuals_zero(n, F_red, 0)
        rhs = full_zero(F_red, 0)
        assert lhs == rhs
        agree += 1
    assert agree == 12


def test_full_expansion_of_s_powers():
    # (s)^2 expands to (sum u^2/2)^2 with the right multinomials
    n, m = 1, 3
    F = TruncSeries(n + 1, 4, 0)
    F = F.add_term((0, 0, 2), QPoly.const(1, 0))
    full = expand_to_full(F, n, m)
    # coefficient of u1^4: 1/4; of u1^2 u2^2: 1/2
    assert full.coefficient({2: 4}) == QPoly.const(Fraction(1, 4), 0)
    assert full.coefficient({2: 2, 3: 2}) == QPoly.const(Fraction(1, 2), 0)


# --- J-recursion ------------------------------------------------------------


def test_primitive_layers_z1_coefficient_is_fs():
    # the z^{-1} coefficient of layer j of exp(F_s/z) is F^(j+1)/j!
    desc, ring, origin = cubic4_data()
    f1 = f1_series(desc, ring)
    f2 = f2_gradient(desc, 1, ring, f1)
    f3_placeholder = TruncSeries(desc.n + 1, 1, ring.qmax)
    jets = [origin.jet_series(3), f1.tau_jet, f2.tau_jet, f3_placeholder]
    layers = primitive_j_layers(desc, jets, 2, -3)
    f1r = f1.tau_jet.recap(3)
    assert layers[0][-1] == f1r
    assert layers[1][-1] == f2.tau_jet.recap(3)
    # layer 0, z^{-2}: (F^(1))^2/2
    assert layers[0][-2] == (f1r * f1r).scale(Fraction(1, 2))


def test_index_one_two_point_tower():
    desc = describe(4, (3, 3))
    assert desc.a == 1
    tower = index_one_two_point_primitive(desc, 3)
    ell = desc.ell
    assert tower[0] == Fraction(-ell, 1)
    assert tower[1] == Fraction(ell * ell, 2)
    assert tower[2] == Fraction(-ell ** 3, 6)
    # normalization C(1/z) = 1: the tower must match the coefficients of
    # exp(F^(1)(0)/z) with F^(1)(0) = -ell q
    import math
    for k, val in enumerate(tower):
        assert val == Fraction((-ell) ** (k + 1), math.factorial(k + 1))


def test_index_one_two_point_requires_index_one():
    with pytest.raises(DomainError):
        index_one_two_point_primitive(describe(4, (3,)), 2)


def test_j_recursion_layers_consistency():
    # ambient layer recursion on t-jets: layer 1 at z^{-1} must reproduce
    # F^(1)-gradient contractions of the layer-0 jet
    desc, ring, origin = cubic4_data()
    f1 = f1_series(desc, ring)
    f2 = f2_gradient(desc, 1, ring, f1)
    n = desc.n
    jets = [origin.jet_series(3), f1.tau_jet, f2.tau_jet]
    # layer 0 of J_a: take the t-linear seed g_{ac} tau^c at z^0
    seed = TruncSeries(n + 1, 3, ring.qmax)
    key = [0] * (n + 2)
    key[n] = 1
    seed = seed.add_term(tuple(key), QPoly.const(desc.degree, ring.qmax))
    layers = j_recursion(desc, jets, {0: seed}, kmax=1, zmin=-3, ginv=ring.ginv)
    out = layers[1]
    # J^(1) = (1/z) F^(1)_b g^{bc} d_c J^(0): with J^(0) = g_{an} tau^n both
    # sides are computable directly
    expect = seed.clone_empty()
    f1r = f1.tau_jet.recap(seed.degree_cap)
    for bb in range(n + 1):
        for c in range(n + 1):
            if ring.ginv[bb][c].is_zero():
                continue
            expect = expect + (f1r.diff_t(bb) * seed.diff_t(c)).scale(
                ring.ginv[bb][c])
    assert out[-1] == expect


def test_odd_mode_residuals_truncated_below_nilpotency():
    # X_3(2,2): m = 4, so residuals are asserted only below s^2; the
    # reconstructed F = F^(0) + s F^(1) obeys the reduced system there
    from ciqc.geometry import describe as _describe
    from ciqc.smallqh import AmbientOrigin as _AO, build_ring as _br
    from ciqc.reconstruct import f1_series as _f1, _tau_to_t_forms as _forms
    desc = _describe(3, (2, 2))
    ring = _br(desc)
    origin = _AO(desc, ring)
    f0_t = linear_substitute(origin.jet_series(5), _forms(ring))
    f1 = _f1(desc, ring)
    F = TruncSeries(desc.n + 1, 5, ring.qmax)
    for key, c in f0_t.terms.items():
        F = F.add_term(key, c)
    for key, c in f1.t_jet.terms.items():
        F = F.add_term(key[:-1] + (1,), c)
    pot = ReducedPotential(desc, F)
    assert pot.F.s_cap == desc.m // 2 == 2
    assert pot.s_cutoff == 2
    res = wdvv_residuals(pot)
    for key in res["eq_mixed"]:
        # the reported residual carries no monomial at or above s^{m/2}
        assert all(k[-1] < 2 for k in res["eq_mixed"][key].terms)
        assert res["eq_mixed"][key].s_slice(0).truncate_degree(1).is_zero()
    assert all(k[-1] < 2 for k in res["eq_pure"].terms)
    assert res["eq_pure"].s_slice(0).truncate_degree(1).is_zero()


def test_reduced_residuals_other_descriptors():
    # same vanishing on an odd cubic and the odd two-quadrics case
    from ciqc.geometry import describe as _describe
    from ciqc.smallqh import AmbientOrigin as _AO, build_ring as _br
    from ciqc.reconstruct import f1_series as _f1, _tau_to_t_forms as _forms
    for n, d in [(5, (3,)), (3, (2, 2))]:
        desc = _describe(n, d)
        ring = _br(desc)
        origin = _AO(desc, ring)
        f0_t = linear_substitute(origin.jet_series(4), _forms(ring))
        f1 = _f1(desc, ring)
        F = TruncSeries(desc.n + 1, 4, ring.qmax)
        for key, c in f0_t.terms.items():
            F = F.add_term(key, c)
        for key, c in f1.t_jet.terms.items():
            F = F.add_term(key[:-1] + (1,), c)
        pot = ReducedPotential(desc, F)
        res = wdvv_residuals(pot)
        for key, series in res["eq_mixed"].items():
            assert series.s_slice(0).truncate_degree(1).is_zero(), (n, d, key)
        assert res["eq_pure"].s_slice(0).truncate_degree(1).is_zero(), (n, d)
