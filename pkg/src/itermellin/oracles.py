"""Independent brute-force computations that validate the evaluation engine.

Everything here deliberately avoids the compiled-expression machinery it is
used to check (except where a formula's own terms are single completed
zeta values, which come from the length-1 engine): multiple quadratic sums
and multiple zeta values by direct summation with integral-comparison
tails, double Dirichlet series by direct summation, the hypergeometric
binding identity by quadrature, the real-analytic Eisenstein series by a
lattice theta function, and the double completed-zeta values by Eichler
integrals of holomorphic Eisenstein series.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gamma as complex_gamma

from .arith import factorial
from .ratfun import AffineForm
from .theta import GrowthBound, TailSeries, ThetaFunction, make_builtin_theta
from .words import Letter
from .quadrature import EvalParams, tail_word_integral
from . import engine

PI = math.pi


class SummationBudgetError(Exception):
    """The requested tolerance is unreachable within the term budget."""


# ---------------------------------------------------------------------------
# single and multiple zeta values by direct summation
# ---------------------------------------------------------------------------


def zeta_alternating(s: complex, terms: int = 48) -> complex:
    """zeta(s) for s != 1 via accelerated alternating summation."""
    n = terms
    d = ((3 + 2 * math.sqrt(2)) ** n + (3 - 2 * math.sqrt(2)) ** n) / 2
    b, c = -1.0, -d
    acc = 0.0 + 0.0j
    for k in range(n):
        c = b - c
        acc += c * complex(k + 1) ** (-complex(s))
        b *= (k + n) * (k - n) / ((k + 0.5) * (k + 1))
    eta = acc / d
    return eta / (1 - 2 ** (1 - complex(s)))


def _zeta_direct(k: float, cut: int = 20000) -> float:
    """zeta(k) for k > 1 by direct summation with a midpoint integral tail."""
    ns = np.arange(1, cut + 1, dtype=float)
    head = float(np.sum(ns**-k))
    c = cut + 0.5
    return head + c ** (1 - k) / (k - 1)


def mzv_sum(ns: Sequence[int], tol: float = 1e-8) -> float:
    """Multiple zeta value sum_{k1<...<kr} prod k_i^(-n_i); needs n_r >= 2.

    Direct cumulative summation; the final sum gets an integral-comparison
    tail using the inner sums' limits (depth <= 2 exactly, depth 3 with a
    cruder tail whose size is checked against tol).
    """
    ns = tuple(int(n) for n in ns)
    if not ns or ns[-1] < 2:
        raise ValueError("multiple zeta values require a final exponent >= 2")
    if any(n < 1 for n in ns):
        raise ValueError("exponents must be positive")
    r = len(ns)
    if r == 1:
        return _zeta_direct(ns[0])
    cut = 200000 if r == 2 else 4000
    ks = np.arange(1, cut + 1, dtype=float)
    inner = np.ones(cut)
    for n_i in ns[:-1]:
        # cumulative sum over k < next index
        layer = inner * ks ** float(-n_i)
        inner = np.concatenate(([0.0], np.cumsum(layer)[:-1]))
    b = ns[-1]
    head = float(np.sum(inner * ks ** float(-b)))
    c = cut + 0.5
    if r == 2:
        a = ns[0]
        if a >= 2:
            za = _zeta_direct(a)
            # inner(k) = zeta(a) - tail, tail ~ k^(1-a)/(a-1)
            tail = za * c ** (1 - b) / (b - 1) - c ** (2 - a - b) / ((a - 1) * (a + b - 2))
        else:
            g = 0.5772156649015329
            # inner(k) = ln k + g - 1/(2k) + O(k^-2)
            tail = (
                c ** (1 - b) * (math.log(c) / (b - 1) + 1.0 / (b - 1) ** 2)
                + g * c ** (1 - b) / (b - 1)
                - 0.5 * c**-b / b
            )
        estimate = 10.0 * c ** (-b - 1) * (1 + math.log(c))
    else:
        # inner sums converge (if their exponents allow); crude geometric tail
        tail = inner[-1] * c ** (1 - b) / (b - 1)
        estimate = abs(tail) * 5.0 / c + c ** (1 - b) / (b - 1) * 0.1
    if estimate > tol:
        raise SummationBudgetError(
            f"mzv tail estimate {estimate:.2e} above tol {tol:.1e}"
        )
    return head + tail


# ---------------------------------------------------------------------------
# multiple quadratic sums
# ---------------------------------------------------------------------------


def _inv_quad_integral(a: float, c2: float, k: int) -> float:
    """int_a^inf dx / (x^2 + c2)^k by the standard reduction formula."""
    c = math.sqrt(c2)
    val = (PI / 2 - math.atan(a / c)) / c
    for j in range(1, k):
        val = (2 * j - 1) / (2 * j * c2) * val - a / (
            2 * j * c2 * (a * a + c2) ** j
        )
    return val


def _inner_quadratic(c2: np.ndarray, k: int, cut: int) -> np.ndarray:
    """sum_{m>=1} (m^2 + c2)^-k with midpoint integral tail, vectorized."""
    ms = np.arange(1.0, cut + 1.0)
    out = np.zeros_like(c2)
    for lo in range(0, c2.size, 128):
        hi = min(lo + 128, c2.size)
        block = (ms[None, :] ** 2 + c2[lo:hi, None]) ** float(-k)
        out[lo:hi] = block.sum(axis=1)
    a = cut + 0.5
    tail = np.array([_inv_quad_integral(a, v, k) for v in c2])
    return out + tail


def q_sum(ks: Sequence[int], tol: float = 1e-8) -> float:
    """Multiple quadratic sum over n_i >= 1 of
    1/((n_1^2+...+n_r^2)^k1 ... (n_r^2)^kr), depth r <= 3.

    Nested summation; the innermost variable is summed with a closed-form
    integral-comparison tail, outer tails likewise by integral comparison.
    """
    ks = tuple(int(k) for k in ks)
    if not ks or any(k < 1 for k in ks):
        raise ValueError("quadratic sum exponents must be >= 1")
    r = len(ks)
    if r == 1:
        return _zeta_direct(2 * ks[0])
    if r == 2:
        k1, k2 = ks
        cut_m, cut_n = 4000, 4000
        n = np.arange(1.0, cut_n + 1.0)
        inner = _inner_quadratic(n**2, k1, cut_m)
        head = float(np.sum(inner * n ** float(-2 * k2)))
        # outer tail: integrate y -> (int_{1/2}^inf dx/(x^2+y^2)^k1) * y^(-2k2)
        xs, ws = leggauss(64)
        a = cut_n + 0.5
        tail = 0.0
        for lo, hi in ((a, 2 * a), (2 * a, 8 * a), (8 * a, 64 * a), (64 * a, 1024 * a)):
            ys = 0.5 * (xs + 1.0) * (hi - lo) + lo
            vals = np.array(
                [_inv_quad_integral(0.5, y * y, k1) * y ** (-2.0 * k2) for y in ys]
            )
            tail += float(np.dot(ws, vals)) * (hi - lo) / 2
        # beyond 1024a the integrand is below y^(1-2k1-2k2)
        rest_exp = 2 * k1 + 2 * k2 - 2
        rest = (1024 * a) ** (-rest_exp) / rest_exp * 2.0
        estimate = 4.0 / cut_m**3 + 4.0 / cut_n**3 + rest
        if estimate > tol:
            raise SummationBudgetError(
                f"q_sum budget reaches accuracy {estimate:.2e} > tol {tol:.1e}"
            )
        return head + tail
    if r == 3:
        k1, k2, k3 = ks
        cut = 220
        cut_m = 1500
        n2 = np.arange(1.0, cut + 1.0)
        n3 = np.arange(1.0, cut + 1.0)
        g2, g3 = np.meshgrid(n2, n3, indexing="ij")
        c2 = (g2**2 + g3**2).ravel()
        inner = _inner_quadratic(c2, k1, cut_m)
        weights = (c2 ** float(-k2)) * (g3.ravel() ** float(-2 * k3))
        head = float(np.sum(inner * weights))
        estimate = 20.0 / cut ** (2 * min(k2 + k3, k1 + k3) + 1) + 2.0 / cut_m**3
        if estimate > tol:
            raise SummationBudgetError(
                f"depth-3 q_sum accuracy {estimate:.2e} > tol {tol:.1e}"
            )
        return head
    raise ValueError("q_sum supports depth <= 3")


def reduce_d_to_q(ls: Sequence[int]) -> dict[tuple[int, ...], int]:
    """Integer coefficients c_a with pi^L * D(2 l_1, ..., 2 l_r) =
    sum_a c_a Q(a), L = l_1 + ... + l_r.

    Repeatedly integrates out the last simplex variable using the exact
    antiderivative of u^(n-1) exp(-c u), whose polynomial factor has
    integer coefficients (n-1)!/j!.
    """
    ls = tuple(int(l) for l in ls)
    if not ls or any(l < 1 for l in ls):
        raise ValueError("exponents must be positive integers")
    r = len(ls)
    # states: (beta, collected a_i for positions i..r) -> integer coefficient
    states: dict[tuple[int, tuple[int, ...]], int] = {(0, ()): 1}
    for i in range(r - 1, 0, -1):
        nxt: dict[tuple[int, tuple[int, ...]], int] = {}
        for (beta, avec), coeff in states.items():
            n = beta + ls[i]
            for j in range(n):
                key = (j, (n - j,) + avec)
                nxt[key] = nxt.get(key, 0) + coeff * factorial(n - 1) // factorial(j)
        states = nxt
    out: dict[tuple[int, ...], int] = {}
    for (beta, avec), coeff in states.items():
        n = beta + ls[0]
        key = (n,) + avec
        out[key] = out.get(key, 0) + coeff * factorial(n - 1)
    return out


# ---------------------------------------------------------------------------
# Dirichlet double series and the binding lemma
# ---------------------------------------------------------------------------


def dirichlet_double(
    a_fn: Callable[[int], float],
    b_fn: Callable[[int], float],
    k: int,
    s: complex,
    tol: float = 1e-8,
    growth_a: tuple[float, float] = (2.0, 3.0),
    growth_b: tuple[float, float] = (2.0, 3.0),
) -> tuple[complex, complex]:
    """D(f,g; k,s) = sum a_m b_n / (m^k (m+n)^s) and its completed version
    (2 pi)^(-k-s) Gamma(k) Gamma(s) D.

    Absolute convergence is checked from the growth bounds (M, kappa).
    """
    s = complex(s)
    ma, ka = growth_a
    mb, kb = growth_b
    if s.real <= kb + 1.2 or k + s.real <= ka + kb + 2.2:
        raise ValueError("series does not converge absolutely at this point")
    cut = 600
    m = np.arange(1, cut + 1, dtype=float)
    avals = np.array([a_fn(i) for i in range(1, cut + 1)], dtype=float)
    bvals = np.array([b_fn(i) for i in range(1, cut + 1)], dtype=float)
    total = 0.0 + 0.0j
    for i in range(cut):
        mm = i + 1.0
        total += avals[i] * mm ** float(-k) * np.sum(
            bvals * (mm + m) ** (-s)
        )
    # tail bounds by integral comparison with the growth envelopes
    sr = s.real
    tail_n = ma * mb * (
        float(np.sum(np.abs(avals) * m ** (-float(k)) * (m + cut) ** (kb + 1 - sr)))
        / max(sr - kb - 1, 0.2)
    )
    tail_m = ma * mb * cut ** (ka + kb + 2 - k - sr) / max(k + sr - ka - kb - 2, 0.2)
    bound = abs(tail_n) + abs(tail_m)
    if bound > tol:
        raise SummationBudgetError(f"double series tail {bound:.2e} above {tol:.1e}")
    completed = (
        (2 * PI) ** (-k - s) * complex_gamma(k) * complex_gamma(s) * total
    )
    return total, completed


def binding_lemma_defect(p: int, m: int, n: int, s: complex) -> float:
    """Defect of the hypergeometric binding identity.

    Gamma(s+p)/(p-1)! * int_0^1 x^(p-1) (m x + n)^(-p-s) dx against
    Gamma(s)/(m^p n^s) - sum_{r<p} Gamma(s+r)/(r! m^(p-r) (m+n)^(s+r)),
    left side by quadrature, right side in closed form.
    """
    if p < 1 or m < 1 or n < 1:
        raise ValueError("p, m, n must be positive integers")
    s = complex(s)
    if s.real <= 0:
        raise ValueError("needs Re(s) > 0")
    xs, ws = leggauss(96)
    x = 0.5 * (xs + 1.0)
    integrand = x ** (p - 1) * (m * x + n) ** (-(p + s))
    left = complex_gamma(s + p) / factorial(p - 1) * complex(np.dot(ws, integrand)) / 2.0
    right = complex_gamma(s) * m ** float(-p) * complex(n) ** (-s)
    for r_ in range(p):
        right -= (
            complex_gamma(s + r_)
            / factorial(r_)
            * m ** float(r_ - p)
            * complex(m + n) ** (-(s + r_))
        )
    return abs(left - right)


# ---------------------------------------------------------------------------
# the completed-zeta side: length-1 engine values
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _xi_expression():
    return engine.build_expression((make_builtin_theta("riemann"),))


def xi_value(s: complex, params: EvalParams | None = None) -> complex:
    """Completed zeta value from the length-1 engine."""
    return engine.lambda_eval(_xi_expression(), (s,), params)[0]


# ---------------------------------------------------------------------------
# real-analytic Eisenstein series via its lattice theta function
# ---------------------------------------------------------------------------


def _lattice_points(z: complex, lam_max: float) -> np.ndarray:
    """Frequencies pi |m + n z|^2 / y over nonzero lattice points, sorted."""
    x, y = z.real, z.imag
    r2max = lam_max * y / PI
    nmax = int(math.floor(math.sqrt(r2max) / y)) + 1
    lams = []
    for n in range(-nmax, nmax + 1):
        rem = r2max - n * n * y * y
        if rem < 0:
            continue
        half = math.sqrt(rem)
        mlo = int(math.ceil(-n * x - half))
        mhi = int(math.floor(-n * x + half))
        for m in range(mlo, mhi + 1):
            if m == 0 and n == 0:
                continue
            q = (m + n * x) ** 2 + n * n * y * y
            lam = PI * q / y
            if lam <= lam_max:
                lams.append(lam)
    return np.sort(np.array(lams))


def lattice_theta(z: complex, name: str | None = None) -> ThetaFunction:
    """Theta function of the unimodular lattice form |m + n z|^2 / Im(z).

    Self-dual of weight 1; its completed Mellin transform is twice the
    completed real-analytic Eisenstein series at z.
    """
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half plane")
    state = {"lam_max": 64.0, "groups": None}

    def build():
        lams = _lattice_points(z, state["lam_max"])
        groups: list[tuple[float, float]] = []
        for lam in lams:
            if groups and lam - groups[-1][0] <= 1e-9 * lam:
                groups[-1] = (groups[-1][0], groups[-1][1] + 1.0)
            else:
                groups.append((lam, 1.0))
        state["groups"] = groups

    build()

    def fn(n: int):
        while n > len(state["groups"]):
            if state["lam_max"] > 1e9:
                return None
            state["lam_max"] *= 2.0
            build()
        lam, mult = state["groups"][n - 1]
        return (lam, ((mult, 0.0),))

    lam1 = state["groups"][0][0]
    growth = GrowthBound(16.0, 1.0, min(1.0, 0.9 * lam1))
    return ThetaFunction(
        name or f"lattice({z.real:.6g}+{z.imag:.6g}i)",
        Fraction(1),
        +1,
        1,
        [(Fraction(1), Fraction(0))],
        TailSeries(fn, growth),
    )


def eisenstein_lattice_sum(z: complex, s: complex, radius: float) -> complex:
    """Raw truncated lattice sum (1/2) sum y^s / |m+nz|^(2s); slowly
    convergent, kept as a definitional cross-check for Re(s) > 1."""
    z, s = complex(z), complex(s)
    x, y = z.real, z.imag
    nmax = int(radius / y) + 1
    mmax = int(radius + abs(x) * nmax) + 1
    ms, ns = np.meshgrid(
        np.arange(-mmax, mmax + 1, dtype=float),
        np.arange(-nmax, nmax + 1, dtype=float),
        indexing="ij",
    )
    q = (ms + ns * x) ** 2 + ns**2 * y**2
    mask = (q > 0) & (q <= radius**2)
    return 0.5 * complex(np.sum(y**s * q[mask] ** (-s)))


def real_eisenstein(
    z: complex, s: complex, params: EvalParams | None = None
) -> tuple[complex, complex, complex]:
    """Completed real-analytic Eisenstein series at z: (E, E0, Einf).

    E is half the completed Mellin transform of the lattice theta at z
    (exponentially convergent for every s off the poles 0, 1); Einf is
    assembled from length-1 completed zeta values, and E0 = E - Einf.
    """
    params = params or EvalParams()
    z, s = complex(z), complex(s)
    y = z.imag
    th = lattice_theta(z)
    expr = engine.build_expression((th,))
    value, _ = engine.lambda_eval(expr, (s,), params)
    completed = 0.5 * value
    einf = xi_value(2 * s, params) * y**s + xi_value(2 * s - 1, params) * y ** (1 - s)
    return completed, completed - einf, einf


def xi_via_eisenstein(
    s1: complex, s2: complex, params: EvalParams | None = None
) -> complex:
    """Double completed-zeta value as a partial Mellin transform of the
    real-analytic Eisenstein series along the imaginary axis:

    int_1^inf E0(iy, s1+s2) y^(s2-s1) dy/y - xi(2s1+2s2)/(2 s2)
                                           - xi(2s1+2s2-1)/(1-2 s1).
    """
    params = params or EvalParams()
    s1, s2 = complex(s1), complex(s2)
    sigma = s1 + s2
    if sigma.real <= 1.0:
        raise ValueError("needs Re(s1+s2) > 1 for the lattice sum")
    xs, ws = leggauss(params.quad_order)
    xi_a = xi_value(2 * sigma, params)
    xi_b = xi_value(2 * sigma - 1, params)

    def integrand(ys: np.ndarray) -> np.ndarray:
        out = np.empty(ys.shape, dtype=complex)
        for i, y in enumerate(ys):
            e0 = real_eisenstein(1j * y, sigma, params)[1]
            out[i] = e0 * y ** (s2 - s1 - 1.0)
        return out

    total = 0.0 + 0.0j
    for lo, hi in ((1.0, 2.0), (2.0, 4.0), (4.0, 8.0)):
        ys = 0.5 * (xs + 1.0) * (hi - lo) + lo
        total += complex(np.dot(ws, integrand(ys))) * (hi - lo) / 2.0
    return total - xi_a / (2 * s2) - xi_b / (1 - 2 * s1)


# ---------------------------------------------------------------------------
# Eichler integrals for totally even double values
# ---------------------------------------------------------------------------

# coefficient tables: weight, prefactor(pi), polynomial in y (exponent: coeff)
_EICHLER_TABLE: dict[tuple[int, int], tuple[int, float, dict[int, int]]] = {
    (2, 2): (4, -8 * PI**2, {1: 1}),
    (2, 4): (6, 4 * PI**3 / 3, {0: 1, 2: 3, 3: -4}),
    (4, 2): (6, -4 * PI**3 / 3, {0: 1, 1: -4, 2: 3}),
    (6, 2): (8, 8 * PI**4 / 15, {0: 1, 1: -4, 2: 5}),
}


def eichler_regularized_monomial(
    weight: int, j: int, params: EvalParams | None = None
) -> float:
    """Regularized integral over [1, infinity-with-unit-tangent) of
    y^j * G_weight(iy) dy: the tail part integrates numerically and the
    constant term contributes -a0/(j+1)."""
    params = params or EvalParams()
    th = make_builtin_theta("eisenstein", weight)
    letter = Letter(th, "tail", AffineForm.constant(j + 1, 0))
    val, _ = tail_word_integral((letter,), (), params)
    a0 = float(th.poly_part[0][0])
    return val.real - a0 / (j + 1)


def eichler_xi(pair: tuple[int, int], params: EvalParams | None = None) -> float:
    """xi(pair) for pair in {(2,2),(2,4),(4,2),(6,2)} by Eichler integrals."""
    pair = (int(pair[0]), int(pair[1]))
    if pair not in _EICHLER_TABLE:
        raise ValueError(f"no Eichler evaluation registered for {pair}")
    weight, prefactor, polynomial = _EICHLER_TABLE[pair]
    total = sum(
        c * eichler_regularized_monomial(weight, j, params)
        for j, c in polynomial.items()
    )
    return prefactor * total


# ---------------------------------------------------------------------------
# multiple zeta values as critical lattice values
# ---------------------------------------------------------------------------


def mzv_reconstruction_check(params: EvalParams | None = None) -> list[dict]:
    """Critical values of the theta_plus/theta_minus family against
    closed forms in log(2) and zeta values from the summation oracle."""
    params = params or EvalParams()
    tp = make_builtin_theta("theta_plus")
    tm = make_builtin_theta("theta_minus")
    log16 = math.log(16.0)
    z2 = mzv_sum((2,), 1e-10)
    z3 = mzv_sum((3,), 1e-10)
    cases = []

    v1p = engine.lambda_eval(engine.build_expression((tp,)), (1.0,), params)[0]
    cases.append(
        {
            "case": "pi*Lambda(theta+;1) = -8 log 2",
            "value": PI * v1p.real,
            "target": -8 * math.log(2.0),
        }
    )
    v1m = engine.lambda_eval(engine.build_expression((tm,)), (1.0,), params)[0]
    cases.append({"case": "Lambda(theta-;1) = 0", "value": v1m.real, "target": 0.0})

    v2 = engine.lambda_eval(engine.build_expression((tm, tp)), (1.0, 1.0), params)[0]
    cases.append(
        {
            "case": "pi^2*Lambda(theta-,theta+;1,1)",
            "value": PI**2 * v2.real,
            "target": 2 * z2 - log16**2,
        }
    )
    v3 = engine.lambda_eval(
        engine.build_expression((tm, tm, tp)), (1.0, 1.0, 1.0), params
    )[0]
    cases.append(
        {
            "case": "pi^3*Lambda(theta-,theta-,theta+;1,1,1)",
            "value": PI**3 * v3.real,
            "target": 4 * z3 + 2 * log16 * z2 - log16**3 / 3.0,
        }
    )
    for c in cases:
        c["defect"] = abs(c["value"] - c["target"])
    return cases


# ---------------------------------------------------------------------------
# numeric limits
# ---------------------------------------------------------------------------


def richardson_limit(f: Callable[[float], complex], eps: float, levels: int = 4) -> complex:
    """Extrapolate f(eps), f(eps/2), ... to eps -> 0 assuming a power series."""
    rows: list[list[complex]] = []
    for i in range(levels + 1):
        row = [complex(f(eps / 2**i))]
        for j in range(1, i + 1):
            row.append(
                (2**j * row[j - 1] - rows[i - 1][j - 1]) / (2**j - 1)
            )
        rows.append(row)
    return rows[levels][levels]


def residue_numeric(
    expr, h: AffineForm, point, params: EvalParams | None = None, eps: float = 0.02
) -> complex:
    """Residue along h at a point of h by a Richardson-extrapolated limit of
    h(s + eps v) * Lambda(s + eps v) along the normal direction v."""
    params = params or EvalParams()
    point = tuple(complex(x) for x in point)
    grad = np.array(h.coeffs, dtype=float)
    v = grad / float(grad @ grad)

    def g(e: float) -> complex:
        shifted = tuple(p + e * vi for p, vi in zip(point, v))
        value, _ = engine.lambda_eval(expr, shifted, params)
        return complex(h(shifted)) * value

    return richardson_limit(g, eps, levels=4)
