"""Compilation and evaluation of multiple completed L-functions.

A theta tuple compiles once into a LambdaExpression: a list of terms, each
holding an exact rational coefficient, a numeric word (an iterated integral
over [1, infinity) whose final letter decays exponentially), and an exact
rational tangent factor.  The compiled expression is reusable across
evaluation points; its pole hyperplanes are exactly the denominator forms
of the tangent factors.

The decomposition: for each split position k, the first k letters are
mapped through the inversion law (dualized, reversed, exponents reflected
to w_i - s_i) and both halves are expanded into boundary words against the
tangential base point at infinity; products of the two halves' numeric
words are rewritten as single words via the shuffle identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .ratfun import (
    AffineForm,
    PoleSignal,
    RationalCombination,
    tangent_word_integral,
)
from .theta import ThetaFunction
from .words import Letter, Word, regularize, shuffle
from .quadrature import (
    EvalParams,
    doubling_edges,
    tail_word_integral,
    truncation_horizon,
    word_integral_on_interval,
)


class BrokenInversionError(Exception):
    """A theta with a twisted (broken) inversion law cannot be evaluated."""


class DirectConvergenceError(Exception):
    """The direct-definition integral does not converge at this point."""


@dataclass(frozen=True)
class LambdaTerm:
    coeff: Fraction
    word: Word
    tangent: RationalCombination


@dataclass(frozen=True)
class LambdaExpression:
    """Compiled multiple L-function for one theta tuple."""

    thetas: tuple[ThetaFunction, ...]
    terms: tuple[LambdaTerm, ...]
    pole_forms: tuple[AffineForm, ...]

    @property
    def nslots(self) -> int:
        return len(self.thetas)


def _check_tuple(thetas: Sequence[ThetaFunction]) -> tuple[ThetaFunction, ...]:
    thetas = tuple(thetas)
    if not thetas:
        raise ValueError("theta tuple must be nonempty")
    for th in thetas:
        if not th.inversion_ok:
            raise BrokenInversionError(
                f"theta {th.name!r} carries a broken inversion flag"
            )
    return thetas


def _expand_boundary(letters: tuple[Letter, ...]):
    """Expand an R-factor into (sign, numeric word, tangent rc) triples.

    For each cut i, the first i letters are regularized into numeric words
    and the remaining letters contribute the reversed polynomial word
    integrated over the tangent space at infinity.
    """
    m = len(letters)
    out = []
    for i in range(m, -1, -1):
        tangent_word = tuple(l.with_part("poly") for l in reversed(letters[i:]))
        if any(not l.theta.poly_part for l in tangent_word):
            continue
        rc = tangent_word_integral(tangent_word)
        if rc.is_zero():
            continue
        sign = (-1) ** (m - i)
        for word, c in regularize(letters[:i]).terms.items():
            out.append((sign * c, word, rc))
    return out


def _collect_poles(terms) -> tuple[AffineForm, ...]:
    seen: dict[tuple, AffineForm] = {}
    for term in terms:
        for f in term.tangent.denominator_forms():
            canon = f.canonical()
            seen.setdefault((canon.const, canon.coeffs), canon)
    return tuple(sorted(seen.values(), key=str))


def build_expression(thetas: Sequence[ThetaFunction]) -> LambdaExpression:
    """Compile the multiple L-function of an ordered theta tuple."""
    thetas = _check_tuple(thetas)
    r = len(thetas)
    slots = [AffineForm.slot(i, r) for i in range(r)]
    terms: list[LambdaTerm] = []
    for k in range(r + 1):
        eps = Fraction(1)
        for th in thetas[:k]:
            eps *= th.sign
        left = tuple(
            Letter(
                thetas[j].dual,
                "full",
                AffineForm.constant(thetas[j].weight, r) - slots[j],
            )
            for j in range(k - 1, -1, -1)
        )
        right = tuple(Letter(thetas[j], "full", slots[j]) for j in range(k, r))
        for c1, w1, rc1 in _expand_boundary(left):
            for c2, w2, rc2 in _expand_boundary(right):
                coeff = eps * c1 * c2
                tangent = rc1 * rc2
                for word, mult in shuffle(w1, w2).terms.items():
                    terms.append(LambdaTerm(coeff * mult, word, tangent))
    return LambdaExpression(thetas, tuple(terms), _collect_poles(terms))


def poles(expr: LambdaExpression) -> list[AffineForm]:
    """Deduplicated pole hyperplanes, as canonical forms (= 0 understood)."""
    return list(expr.pole_forms)


def _as_point(s, nslots: int) -> tuple[complex, ...]:
    if isinstance(s, (int, float, complex, Fraction)):
        s = (s,)
    point = tuple(complex(x) for x in s)
    if len(point) != nslots:
        raise ValueError(f"expected {nslots} slot values, got {len(point)}")
    return point


def guard_poles(expr: LambdaExpression, point, guard: float) -> None:
    for h in expr.pole_forms:
        if h.distance(point) < guard:
            raise PoleSignal(h)


def nearest_pole(expr: LambdaExpression, point) -> tuple[AffineForm | None, float]:
    best, dist = None, math.inf
    for h in expr.pole_forms:
        d = h.distance(point)
        if d < dist:
            best, dist = h, d
    return best, dist


def lambda_eval(
    expr: LambdaExpression, s, params: EvalParams | None = None
) -> tuple[complex, float]:
    """Value and error estimate at a point off the pole hyperplanes."""
    params = params or EvalParams()
    point = _as_point(s, expr.nslots)
    guard_poles(expr, point, params.pole_guard)
    cache: dict[Word, tuple[complex, float]] = {}
    total = 0.0 + 0.0j
    err = 0.0
    for term in expr.terms:
        if term.word not in cache:
            cache[term.word] = tail_word_integral(term.word, point, params)
        wval, werr = cache[term.word]
        rval = complex(term.tangent(point))
        cf = float(term.coeff)
        total += cf * wval * rval
        err += abs(cf) * abs(rval) * werr
    return total, err


def lstar_eval(
    expr: LambdaExpression, s, params: EvalParams | None = None
) -> tuple[complex, float]:
    """Conductor-rescaled value: prod N_i^(s_i/2) times the plain value."""
    point = _as_point(s, expr.nslots)
    value, err = lambda_eval(expr, point, params)
    scale = 1.0 + 0.0j
    for th, si in zip(expr.thetas, point):
        scale *= complex(th.conductor) ** (si / 2.0)
    return value * scale, err * abs(scale)


def residue(
    expr: LambdaExpression, h: AffineForm, s, params: EvalParams | None = None
) -> complex:
    """Residue along h = 0 at a generic point of that hyperplane.

    Normalized as lim h(s) * Lambda(s): matching denominators are detected
    up to proportionality and rescaled, so the result follows the
    normalization of the form as the caller wrote it.
    """
    params = params or EvalParams()
    point = _as_point(s, expr.nslots)
    if h.distance(point) > 1e-8:
        raise ValueError(f"point does not lie on the hyperplane {h} = 0")
    cache: dict[Word, tuple[complex, float]] = {}
    total = 0.0 + 0.0j
    for term in expr.terms:
        res = term.tangent.residue(h, point)
        if res == 0:
            continue
        if term.word not in cache:
            cache[term.word] = tail_word_integral(term.word, point, params)
        total += float(term.coeff) * cache[term.word][0] * res
    return total


def reversed_dual_tuple(thetas: Sequence[ThetaFunction]) -> tuple[ThetaFunction, ...]:
    return tuple(th.dual for th in reversed(tuple(thetas)))


def reflected_point(thetas: Sequence[ThetaFunction], s) -> tuple[complex, ...]:
    """The functional-equation partner point (w_r - s_r, ..., w_1 - s_1)."""
    thetas = tuple(thetas)
    point = _as_point(s, len(thetas))
    return tuple(
        complex(float(th.weight)) - si for th, si in zip(reversed(thetas), reversed(point))
    )


def functional_sign(thetas: Sequence[ThetaFunction]) -> int:
    sign = 1
    for th in thetas:
        sign *= th.sign
    return sign


# ---------------------------------------------------------------------------
# direct-definition evaluation (validation path)
# ---------------------------------------------------------------------------


def _zero_envelope(letter: Letter, s) -> tuple[float, float, bool]:
    """(C, gamma, exp_small): |phi(t)| <= C t^(Re e - 1 - gamma) for t <= 1/2,
    with exp_small marking additional superpolynomial decay at 0."""
    th = letter.theta
    e_re = complex(letter.exponent(s)).real
    if letter.part == "mono":
        return abs(float(letter.coeff)), 0.0, False
    if letter.part == "poly":
        emin = min((float(e) for _, e in th.poly_part), default=0.0)
        return th.poly_height(), -emin, False
    dual = th.dual
    w = float(th.weight)
    dual_height = dual.poly_height() + dual.tail_envelope()
    gamma = w + max(dual.poly_degree(), dual.tail.power_range[1], 0.0)
    c = 2.0 ** max(gamma, 0.0) * dual_height
    if letter.part == "tail":
        c += th.poly_height()
    exp_small = not dual.poly_part
    _ = e_re
    return max(c, 1e-300), gamma, exp_small


def _choose_delta(word: Word, s, params: EvalParams) -> float:
    """Lower cutoff with corner contribution below the tolerance budget.

    Requires every prefix of the word to be integrable at 0: the running
    exponent sum must stay positive unless an exponentially small letter
    already occurred.
    """
    target = params.abs_tol * params.horizon_safety
    run = 0.0
    cprod = 1.0
    sigma_min = math.inf
    protected = False
    for letter in word:
        c, gamma, exp_small = _zero_envelope(letter, s)
        e_re = complex(letter.exponent(s)).real
        run += e_re - gamma
        cprod *= c
        protected = protected or exp_small
        if protected:
            continue
        if run <= 0.05:
            raise DirectConvergenceError(
                f"exponent sum {run:.3f} too small at letter {letter.label()}"
            )
        sigma_min = min(sigma_min, run)
    if protected and not math.isfinite(sigma_min):
        # decay at 0 is superpolynomial from the first letter on
        first = word[0]
        mu1 = first.theta.dual.tail.min_mu()
        p = first.theta.kernel_power
        delta = 0.5
        while cprod * math.exp(-mu1 * delta**-p) > target and delta > 1e-3:
            delta *= 0.8
        return delta
    delta = min(0.5, (target / cprod) ** (1.0 / sigma_min))
    return max(delta, 1e-4)


def lambda_direct(
    thetas: Sequence[ThetaFunction], s, params: EvalParams | None = None
) -> complex:
    """Evaluate by direct quadrature of the regularized word over [delta, T].

    Intended for validation: requires absolute convergence at zero, which
    holds when the slot exponents are large enough.  Agrees with
    lambda_eval on the overlap region.
    """
    params = params or EvalParams()
    thetas = _check_tuple(thetas)
    r = len(thetas)
    point = _as_point(s, r)
    slots = [AffineForm.slot(i, r) for i in range(r)]
    full_word = tuple(Letter(thetas[i], "full", slots[i]) for i in range(r))
    total = 0.0 + 0.0j
    for word, c in regularize(full_word).terms.items():
        delta = _choose_delta(word, point, params)
        t_max = truncation_horizon(word, point, params)
        lower = []
        e = delta
        while e < 1.0:
            lower.append(e)
            e *= 2.0
        edges = tuple(lower) + doubling_edges(1.0, t_max)
        val, _ = word_integral_on_interval(
            word, point, edges, params, slack=params.abs_tol * params.horizon_safety
        )
        total += c * val
    return total


# ---------------------------------------------------------------------------
# pure tail transform (no polynomial parts): the multiple Mellin transform
# of the decaying tails over [0, infinity)
# ---------------------------------------------------------------------------


def _invert_tail_letter(letter: Letter) -> list[tuple[Fraction, Letter]]:
    """Rewrite a [0,1] tail letter as [1,inf) letters via the inversion law.

    theta0(1/u) u^(-s-1) du = sign * dual(u) u^(w-s-1) du
                              - sum_e c_e u^(-s-e-1) du.
    """
    th = letter.theta
    nslots = letter.exponent.nslots
    reflected = AffineForm.constant(th.weight, nslots) - letter.exponent
    out = [(Fraction(th.sign), Letter(th.dual, "full", reflected))]
    for c, e in th.poly_part:
        out.append((Fraction(-1) * c, Letter(th, "mono", -letter.exponent - e, Fraction(1))))
    return out


def _normalize_ending(word: Word) -> list[tuple[RationalCombination, Word]]:
    """Rewrite a word so it ends in a tail letter (or is empty).

    A trailing monomial letter integrates in closed form, contributing a
    1/(affine form) factor and shifting the previous letter's exponent; a
    trailing full or poly letter splits into tail + monomials.
    """
    if not word:
        return [(RationalCombination.one(), word)]
    last = word[-1]
    if last.part == "tail":
        return [(RationalCombination.one(), word)]
    if last.part == "mono":
        g = last.exponent
        if g.is_zero():
            raise ValueError("degenerate trailing exponent")
        factor = RationalCombination.of(-last.coeff, (g,))
        if len(word) == 1:
            return [(factor, ())]
        prev = word[-2]
        merged = Letter(prev.theta, prev.part, prev.exponent + g, prev.coeff)
        return [
            (factor * rc, w) for rc, w in _normalize_ending(word[:-2] + (merged,))
        ]
    out: list[tuple[RationalCombination, Word]] = []
    if last.part in ("full", "poly"):
        if last.part == "full":
            out.extend(_normalize_ending(word[:-1] + (last.with_part("tail"),)))
        for c, e in last.theta.poly_part:
            mono = Letter(last.theta, "mono", last.exponent.shift(e), c)
            out.extend(_normalize_ending(word[:-1] + (mono,)))
        return out
    raise ValueError(f"unexpected part {last.part!r}")


def build_tail_expression(thetas: Sequence[ThetaFunction]) -> LambdaExpression:
    """Compile the iterated Mellin transform of the tails over [0, infinity).

    Split at t = 1; the [0,1] half maps to [1,inf) through the inversion
    law, products of halves merge by the shuffle identity, and trailing
    non-decaying letters are integrated in closed form.
    """
    thetas = _check_tuple(thetas)
    r = len(thetas)
    slots = [AffineForm.slot(i, r) for i in range(r)]
    terms: list[LambdaTerm] = []
    for k in range(r + 1):
        lower = [Letter(thetas[j], "tail", slots[j]) for j in range(k)]
        # reversed, inverted lower half: options per original letter
        variants: list[tuple[Fraction, Word]] = [(Fraction(1), ())]
        for letter in reversed(lower):
            variants = [
                (c * cc, w + (ll,))
                for c, w in variants
                for cc, ll in _invert_tail_letter(letter)
            ]
        right = tuple(Letter(thetas[j], "tail", slots[j]) for j in range(k, r))
        for c, w in variants:
            for merged, mult in shuffle(w, right).terms.items():
                for rc, ending in _normalize_ending(merged):
                    terms.append(LambdaTerm(c * mult, ending, rc))
    return LambdaExpression(thetas, tuple(terms), _collect_poles(terms))


def eval_expression(
    expr: LambdaExpression, s, params: EvalParams | None = None
) -> tuple[complex, float]:
    """Alias of lambda_eval usable with tail expressions as well."""
    return lambda_eval(expr, s, params)
