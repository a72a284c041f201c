"""Shuffle algebra, regularization, and word transforms."""

from fractions import Fraction

import numpy as np
import pytest

from itermellin.ratfun import AffineForm
from itermellin.theta import make_builtin_theta
from itermellin.words import (
    Letter,
    WordSum,
    expand_full,
    regularize,
    regularize_closed,
    reverse_dualize,
    shuffle,
)


def letters(n, theta=None, part="full"):
    theta = theta or make_builtin_theta("riemann")
    return tuple(Letter(theta, part, AffineForm.slot(i, n)) for i in range(n))


def random_word(rng, length, nslots=4):
    pool = [make_builtin_theta("riemann"), make_builtin_theta("eisenstein", 4)]
    return tuple(
        Letter(pool[int(rng.integers(0, 2))], "full", AffineForm.slot(int(rng.integers(0, nslots)), nslots))
        for _ in range(length)
    )


class TestShuffle:
    def test_two_singletons(self):
        a, b = letters(2)
        ws = shuffle((a,), (b,))
        assert ws == WordSum({(a, b): 1, (b, a): 1})

    def test_one_two(self):
        a, b, c = letters(3)
        ws = shuffle((a,), (b, c))
        assert ws == WordSum({(a, b, c): 1, (b, a, c): 1, (b, c, a): 1})

    def test_unit(self):
        v = letters(2)
        assert shuffle((), v) == WordSum.single(v)

    @pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 2), (1, 3), (2, 3)])
    def test_term_count_binomial(self, p, q):
        from itermellin.arith import binomial

        word = letters(p + q)
        ws = shuffle(word[:p], word[p:])
        assert ws.total_terms() == binomial(p + q, p)

    def test_commutative_associative(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            u = random_word(rng, int(rng.integers(0, 3)))
            v = random_word(rng, int(rng.integers(1, 3)))
            w = random_word(rng, int(rng.integers(1, 3)))
            assert shuffle(u, v) == shuffle(v, u)
            lhs = WordSum()
            for word, c in shuffle(u, v).terms.items():
                lhs = lhs + shuffle(word, w).scale(c)
            rhs = WordSum()
            for word, c in shuffle(v, w).terms.items():
                rhs = rhs + shuffle(u, word).scale(c)
            assert lhs == rhs


class TestRegularize:
    def test_single_letter(self):
        (a,) = letters(1)
        assert regularize((a,)) == WordSum.single((a.with_part("tail"),))

    def test_two_letters(self):
        a, b = letters(2)
        got = regularize((a, b))
        want = WordSum(
            {
                (a, b.with_part("tail")): 1,
                (b.with_part("poly"), a.with_part("tail")): -1,
            }
        )
        assert got == want

    def test_three_letters_four_terms(self):
        a, b, c = letters(3)
        got = regularize((a, b, c))
        want = WordSum(
            {
                (a, b, c.with_part("tail")): 1,
                (a, c.with_part("poly"), b.with_part("tail")): -1,
                (c.with_part("poly"), a, b.with_part("tail")): -1,
                (c.with_part("poly"), b.with_part("poly"), a.with_part("tail")): 1,
            }
        )
        assert got == want

    @pytest.mark.parametrize("length", [1, 2, 3, 4])
    def test_recursion_matches_closed_form(self, length):
        rng = np.random.default_rng(length)
        for _ in range(5):
            word = random_word(rng, length)
            assert regularize(word) == regularize_closed(word)

    def test_every_word_ends_in_tail(self):
        rng = np.random.default_rng(9)
        for length in (1, 2, 3, 4):
            word = random_word(rng, length)
            for w, _ in regularize(word).terms.items():
                assert w[-1].part == "tail"
                assert all(l.part in ("full", "poly") for l in w[:-1])

    def test_rejects_non_full(self):
        (a,) = letters(1)
        with pytest.raises(ValueError):
            regularize((a.with_part("tail"),))

    def test_linearity(self):
        a, b = letters(2)
        lhs = regularize((a, b)) + regularize((b, a)).scale(2)
        rhs = regularize((a, b)) + regularize((b, a)) + regularize((b, a))
        assert lhs == rhs


class TestExpandFull:
    def test_one_full_letter(self):
        a, b = letters(2)
        word = (a, b.with_part("tail"))
        got = expand_full(WordSum.single(word))
        want = WordSum(
            {
                (a.with_part("poly"), b.with_part("tail")): 1,
                (a.with_part("tail"), b.with_part("tail")): 1,
            }
        )
        assert got == want

    def test_idempotent(self):
        a, b = letters(2)
        ws = expand_full(WordSum.single((a, b)))
        assert expand_full(ws) == ws

    def test_regularized_words_end_in_tail_after_expansion(self):
        rng = np.random.default_rng(4)
        for length in (1, 2, 3, 4):
            word = random_word(rng, length)
            for w, _ in expand_full(regularize(word)).terms.items():
                assert w[-1].part == "tail"
                assert all(l.part in ("poly", "tail") for l in w)

    def test_word_count_doubles_per_full_letter(self):
        word = letters(3)
        assert len(expand_full(WordSum.single(word))) == 8


class TestReverseDualize:
    def test_riemann_single(self):
        rie = make_builtin_theta("riemann")
        word = (Letter(rie, "full", AffineForm.slot(0, 1)),)
        (out,) = reverse_dualize(word)
        assert out.theta is rie
        assert out.exponent == AffineForm.make(1, (-1,))  # 1 - s

    def test_involution(self):
        rng = np.random.default_rng(8)
        word = random_word(rng, 3)
        assert reverse_dualize(reverse_dualize(word)) == word

    def test_jacobi_pair(self):
        j2 = make_builtin_theta("jacobi2")
        word = (Letter(j2, "full", AffineForm.slot(0, 1)),)
        (out,) = reverse_dualize(word)
        assert out.theta.name == "jacobi4"
        assert out.exponent == AffineForm.make(Fraction(1, 2), (-1,))
