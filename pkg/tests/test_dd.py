"""Tests for divided differences of the exponential function."""
import math

import numpy as np
import pytest

from permlcu import dd

LN2 = math.log(2.0)


def exp_dd_recursive(xs):
    """Independent oracle: Newton table recursion (distinct inputs only)."""
    xs = [complex(x) for x in xs]
    assert len({x for x in xs}) == len(xs), "recursive oracle needs distinct inputs"
    table = [np.exp(x) for x in xs]
    for j in range(1, len(xs)):
        table = [(table[i + 1] - table[i]) / (xs[i + j] - xs[i])
                 for i in range(len(table) - 1)]
    return table[0]


def random_inputs(rng, q, scale=10.0, kind=None):
    kind = rng.integers(0, 4) if kind is None else kind
    if kind == 0:  # complex ball
        xs = (rng.uniform(-1, 1, q + 1) + 1j * rng.uniform(-1, 1, q + 1)) * scale / 1.5
    elif kind == 1:  # purely imaginary
        xs = 1j * rng.uniform(-scale, scale, q + 1)
    elif kind == 2:  # purely real
        xs = rng.uniform(-scale, scale, q + 1) + 0.0j
    else:  # confluent: inject repeats
        xs = (rng.uniform(-1, 1, q + 1) + 1j * rng.uniform(-1, 1, q + 1)) * scale / 2
        if q >= 1:
            xs[rng.integers(0, q + 1)] = xs[0]
    return xs


def rel_err(a, b):
    scale = max(abs(a), abs(b))
    if scale < 1e-300:
        return abs(a - b)
    return abs(a - b) / scale


# --- exp_dd -----------------------------------------------------------------

def test_exp_dd_order_zero():
    assert dd.exp_dd([0.0]) == 1.0
    x = 0.7 - 0.2j
    assert rel_err(dd.exp_dd([x]), np.exp(x)) < 1e-15


def test_exp_dd_confluent_pair():
    x = 0.3 + 0.1j
    assert rel_err(dd.exp_dd([x, x]), np.exp(x)) < 1e-13


def test_exp_dd_zero_ln2():
    assert rel_err(dd.exp_dd([0.0, LN2]), 1.0 / LN2) < 1e-13


def test_exp_dd_fully_confluent_is_exp_over_factorial():
    x = -0.4 + 0.9j
    for q in range(6):
        val = dd.exp_dd([x] * (q + 1))
        assert rel_err(val, np.exp(x) / math.factorial(q)) < 1e-12


def test_exp_dd_matches_recursive_oracle():
    rng = np.random.default_rng(11)
    for _ in range(200):
        q = int(rng.integers(1, 9))
        xs = random_inputs(rng, q, kind=int(rng.integers(0, 3)))
        if len({complex(x) for x in xs}) < len(xs):
            continue
        # the recursion is only stable for well-separated inputs
        gaps = [abs(a - b) for i, a in enumerate(xs) for b in xs[i + 1:]]
        if min(gaps) < 0.5:
            continue
        assert rel_err(dd.exp_dd(xs), exp_dd_recursive(xs)) < 1e-9


def test_exp_dd_matches_bidiagonal_oracle():
    rng = np.random.default_rng(12)
    for _ in range(300):
        q = int(rng.integers(1, 9))
        xs = random_inputs(rng, q)
        assert rel_err(dd.exp_dd(xs), dd.exp_dd_oracle_bidiagonal(xs)) < 1e-10


def test_exp_dd_permutation_symmetry():
    rng = np.random.default_rng(13)
    for _ in range(200):
        q = int(rng.integers(1, 9))
        xs = random_inputs(rng, q)
        ref = dd.exp_dd(xs)
        perm = rng.permutation(q + 1)
        assert rel_err(dd.exp_dd(xs[perm]), ref) < 1e-10


def test_exp_dd_factor_out_property():
    rng = np.random.default_rng(14)
    for _ in range(200):
        q = int(rng.integers(1, 9))
        xs = random_inputs(rng, q)
        ref = dd.exp_dd(xs)
        shifted = np.concatenate([[0.0], xs[1:] - xs[0]])
        assert rel_err(np.exp(xs[0]) * dd.exp_dd(shifted), ref) < 1e-10


def test_exp_dd_fallback_large_spread():
    # beyond the series cutoff the bidiagonal route takes over; cross-check
    # against the high-spread recursive oracle on well-separated inputs
    xs = np.array([40.0 + 5j, -35.0 - 2j, 3.0 + 60j])
    assert rel_err(dd.exp_dd(xs), exp_dd_recursive(xs)) < 1e-9


def test_exp_dd_huge_imaginary_inputs():
    # interaction inputs scale like i*(energy gap + rate); rates can be ~1e6
    xs = np.array([3.5e5j, -2.1e5j, 0.0j])
    assert rel_err(dd.exp_dd(xs), exp_dd_recursive(xs)) < 1e-9


def test_exp_dd_rejects_nonfinite():
    with pytest.raises(ValueError):
        dd.exp_dd([np.inf])
    with pytest.raises(ValueError):
        dd.exp_dd([0.0, np.nan])
    with pytest.raises(ValueError):
        dd.exp_dd([])


# --- exp_dd_scaled ----------------------------------------------------------

def test_exp_dd_scaled_t_one_identity():
    xs = [0.2 + 0.4j, -0.1j]
    assert rel_err(dd.exp_dd_scaled(1.0, xs), dd.exp_dd(xs)) < 1e-15


def test_exp_dd_scaled_t_zero():
    assert dd.exp_dd_scaled(0.0, [5.0, 7.0, -1.0]) == 0.0
    assert dd.exp_dd_scaled(0.0, [5.0]) == 1.0


def test_exp_dd_scaled_first_order_integral():
    # oracle: e^{0.7[1,0]} = int_0^0.7 e^s ds = e^0.7 - 1
    t = 0.7
    s, w = np.linspace(0.0, t, 2001), None
    w = np.ones(2001)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    quad = float(np.sum(w * np.exp(s)) * (t / 2000) / 3.0)
    assert abs(quad - (math.exp(0.7) - 1.0)) < 1e-12
    assert rel_err(dd.exp_dd_scaled(t, [1.0, 0.0]), math.exp(0.7) - 1.0) < 1e-13
    assert rel_err(dd.exp_dd_scaled(t, [1.0, 0.0]), 1.0137527074704766) < 1e-12


def test_exp_dd_scaled_matches_scaling_identity():
    rng = np.random.default_rng(15)
    for _ in range(50):
        q = int(rng.integers(1, 6))
        xs = random_inputs(rng, q, scale=3.0)
        t = float(rng.uniform(-2, 2))
        lhs = dd.exp_dd_scaled(t, xs)
        rhs = t**q * dd.exp_dd(t * xs)
        assert rel_err(lhs, rhs) < 1e-12


# --- exp_dd_bound -----------------------------------------------------------

def test_bound_pure_imaginary_pair():
    for a in (0.3, 2.0, 17.0):
        assert abs(dd.exp_dd_bound([1j * a, 0.0]) - 1.0) < 1e-12


def test_bound_confluent_real_parts():
    assert rel_err(dd.exp_dd_bound([1 + 1j, 1 - 1j]), math.e) < 1e-12


def test_bound_dominates_value():
    rng = np.random.default_rng(16)
    for _ in range(1000):
        q = int(rng.integers(1, 9))
        xs = random_inputs(rng, q)
        assert abs(dd.exp_dd(xs)) <= dd.exp_dd_bound(xs) * (1 + 1e-12)


def test_bound_mean_value_form():
    rng = np.random.default_rng(17)
    for _ in range(200):
        q = int(rng.integers(1, 9))
        xs = random_inputs(rng, q)
        val = dd.exp_dd_bound(xs) * math.factorial(q)
        lo, hi = np.exp(xs.real.min()), np.exp(xs.real.max())
        assert lo * (1 - 1e-10) <= val <= hi * (1 + 1e-10)


def test_bound_monotone_in_real_inputs():
    rng = np.random.default_rng(18)
    for _ in range(100):
        q = int(rng.integers(1, 7))
        xs = rng.uniform(-5, 5, q + 1)
        base = dd.exp_dd_bound(xs)
        j = int(rng.integers(0, q + 1))
        xs[j] += float(rng.uniform(0.01, 2.0))
        assert dd.exp_dd_bound(xs) >= base * (1 - 1e-12)


# --- bidiagonal oracle ------------------------------------------------------

def test_oracle_trivial_values():
    assert rel_err(dd.exp_dd_oracle_bidiagonal([0.0]), 1.0) < 1e-15
    assert rel_err(dd.exp_dd_oracle_bidiagonal([0.0, LN2]), 1.0 / LN2) < 1e-13


def test_oracle_size_cap():
    with pytest.raises(dd.UnsupportedSizeError):
        dd.exp_dd_oracle_bidiagonal(np.zeros(33))


# --- simplex quadrature -----------------------------------------------------

def test_quadrature_single_exponent():
    assert rel_err(dd.hermite_genocchi_quadrature([1.0], 200), math.e - 1.0) < 1e-9
    assert rel_err(dd.hermite_genocchi_quadrature([0.0], 50), 1.0) < 1e-12
    assert rel_err(dd.hermite_genocchi_quadrature([1.0], 200),
                   dd.exp_dd([1.0, 0.0])) < 1e-9


def test_quadrature_second_order():
    lam = [0.3, -0.2j]
    x = [lam[0] + lam[1], lam[1], 0.0]
    val = dd.hermite_genocchi_quadrature(lam, 2000)
    assert rel_err(val, dd.exp_dd(x)) < 1e-6


def test_quadrature_third_order():
    rng = np.random.default_rng(19)
    for _ in range(3):
        lam = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)
        xs = [lam[j:].sum() for j in range(3)] + [0.0]
        val = dd.hermite_genocchi_quadrature(lam, 120)
        assert rel_err(val, dd.exp_dd(xs)) < 1e-6


def test_quadrature_guards():
    with pytest.raises(dd.UnsupportedSizeError):
        dd.hermite_genocchi_quadrature([1.0, 1.0, 1.0, 1.0], 100)
    with pytest.raises(ValueError):
        dd.hermite_genocchi_quadrature([1.0], 5)
    with pytest.raises(ValueError):
        dd.hermite_genocchi_quadrature([], 100)


# --- integral identities ----------------------------------------------------

def test_lemma_scaled_integral():
    # int_0^1 a^q e^{[a xs]} da = e^{[0, xs]}, midpoint rule on 1e4 points
    rng = np.random.default_rng(20)
    for _ in range(5):
        q = int(rng.integers(1, 5))
        xs = random_inputs(rng, q, scale=2.0, kind=0)
        n = 10_000
        a = (np.arange(n) + 0.5) / n
        rows = a[:, None] * xs[None, :]
        vals = a**q * dd.exp_dd_batch(rows)
        lhs = vals.sum() / n
        rhs = dd.exp_dd(np.concatenate([[0.0], xs]))
        assert rel_err(lhs, rhs) < 1e-6


def test_corollary_time_integral():
    # int_0^tau e^{t[xs]} dt = e^{tau[0, xs]}, composite Simpson in t
    rng = np.random.default_rng(21)
    for _ in range(5):
        q = int(rng.integers(1, 5))
        xs = random_inputs(rng, q, scale=2.0, kind=0)
        tau = float(rng.uniform(0.3, 1.5))
        n = 2000
        t = np.linspace(0.0, tau, n + 1)
        w = np.ones(n + 1)
        w[1:-1:2], w[2:-1:2] = 4.0, 2.0
        vals = np.array([dd.exp_dd_scaled(ti, xs) for ti in t])
        lhs = np.sum(w * vals) * (tau / n) / 3.0
        rhs = dd.exp_dd_scaled(tau, np.concatenate([[0.0], xs]))
        assert rel_err(lhs, rhs) < 1e-6


# --- batch consistency ------------------------------------------------------

def test_batch_matches_scalar():
    rng = np.random.default_rng(22)
    rows = np.array([random_inputs(rng, 4) for _ in range(64)])
    batch = dd.exp_dd_batch(rows)
    for i in range(64):
        assert rel_err(batch[i], dd.exp_dd(rows[i])) < 1e-12


def test_batch_mixed_fallback_rows():
    rows = np.array([
        [0.1 + 0.2j, -0.3j, 0.0],
        [45.0, -45.0, 0.0],        # spread beyond cutoff -> fallback
        [1e5j, -1e5j, 0.0],
    ])
    batch = dd.exp_dd_batch(rows)
    for i in range(3):
        assert rel_err(batch[i], dd.exp_dd_oracle_bidiagonal(rows[i])) < 1e-9
