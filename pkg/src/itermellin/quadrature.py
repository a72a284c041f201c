"""Iterated integrals of words over [1, infinity) by panel quadrature.

The mesh is a sequence of geometrically growing panels, each carrying
Gauss-Legendre nodes; inner cumulative integrals are formed at the nodes
with the spectral integration matrix of the node set, so a word of length k
costs O(k * panels * order^2).  The truncation horizon is certified from
the letters' growth envelopes and the final tail letter's decay; the
reported error estimate is the difference against one mesh refinement and
is never silently consumed.

Theta values at mesh nodes are independent of the slot variables, so they
are cached on the (interned) mesh and shared across words and evaluation
points.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss, legvander

from .words import Letter, Word

REF_TOL = 1e-15  # theta accuracy at mesh nodes; below every engine tolerance
MAX_HORIZON = 2.0**24


class QuadratureError(Exception):
    """Quadrature tolerance not met, or no usable truncation horizon."""


@dataclass
class EvalParams:
    """Evaluation controls shared across the engine.

    abs_tol: absolute tolerance target per integral; max_terms: cap on tail
    stream groups; quad_order: Gauss nodes per panel; max_refine: mesh
    refinement limit; horizon_safety: the truncation target is
    abs_tol * horizon_safety.
    """

    abs_tol: float = 1e-10
    max_terms: int = 4000
    quad_order: int = 32
    max_refine: int = 8
    horizon_safety: float = 0.1
    pole_guard: float = 1e-10

    def __post_init__(self):
        if self.abs_tol <= 0:
            raise ValueError("abs_tol must be positive")
        if self.quad_order < 4:
            raise ValueError("quad_order must be at least 4")


@lru_cache(maxsize=None)
def _gl_data(order: int):
    x, w = leggauss(order)
    v = legvander(x, order - 1)
    pext = legvander(x, order)
    integrals = np.empty((order, order))
    integrals[:, 0] = x + 1.0
    for k in range(1, order):
        integrals[:, k] = (pext[:, k + 1] - pext[:, k - 1]) / (2 * k + 1)
    s_matrix = np.linalg.solve(v.T, integrals.T).T
    return x, w, s_matrix


class PanelMesh:
    """Interned panel mesh with per-theta node value cache."""

    def __init__(self, edges: tuple[float, ...], order: int):
        if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError("mesh edges must be strictly increasing")
        self.edges = edges
        self.order = order
        x, w, s_matrix = _gl_data(order)
        self.gl_weights = w
        self.int_matrix = s_matrix
        lows = np.array(edges[:-1])
        highs = np.array(edges[1:])
        self.widths = highs - lows
        self.nodes = (
            0.5 * (x[None, :] + 1.0) * self.widths[:, None] + lows[:, None]
        ).ravel()
        self._values: dict = {}
        self._lock = threading.Lock()

    def refined(self) -> "PanelMesh":
        out = [self.edges[0]]
        for a, b in zip(self.edges, self.edges[1:]):
            out.append(0.5 * (a + b))
            out.append(b)
        return mesh(tuple(out), self.order)

    def theta_values(self, theta, part: str, max_terms: int) -> np.ndarray:
        key = (theta, part)
        vals = self._values.get(key)
        if vals is None:
            with self._lock:
                vals = self._values.get(key)
                if vals is None:
                    vals = theta.eval_array(self.nodes, part, REF_TOL, max_terms)
                    self._values[key] = vals
        return vals

    def cumulative(self, f: np.ndarray) -> tuple[np.ndarray, complex]:
        """Cumulative integral of the interpolant of f from the mesh start.

        Returns node values of t -> int_{edges[0]}^t f and the full integral.
        """
        segs = f.reshape(-1, self.order)
        panel_ints = (segs @ self.gl_weights) * (self.widths / 2.0)
        carries = np.concatenate(([0.0], np.cumsum(panel_ints)[:-1]))
        inner = carries[:, None] + (self.widths[:, None] / 2.0) * (
            segs @ self.int_matrix.T
        )
        return inner.ravel(), complex(carries[-1] + panel_ints[-1])


@lru_cache(maxsize=256)
def _mesh_cached(edges: tuple[float, ...], order: int) -> PanelMesh:
    return PanelMesh(edges, order)


def mesh(edges: tuple[float, ...], order: int) -> PanelMesh:
    return _mesh_cached(tuple(float(e) for e in edges), order)


def doubling_edges(start: float, stop: float) -> tuple[float, ...]:
    """Panel edges start, 2*start, 4*start, ... covering [start, stop]."""
    out = [start]
    e = start
    while e < stop:
        e *= 2.0
        out.append(e)
    return tuple(out)


# ---------------------------------------------------------------------------
# growth and decay envelopes
# ---------------------------------------------------------------------------


def _letter_envelope(letter: Letter, s: Sequence[complex]) -> tuple[float, float]:
    """(B, g) with |phi(t)| <= B * t^g for t >= 1."""
    e_re = complex(letter.exponent(s)).real
    th = letter.theta
    if letter.part == "mono":
        return abs(float(letter.coeff)), e_re - 1.0
    if letter.part == "poly":
        return th.poly_height(), e_re - 1.0 + th.poly_degree()
    if letter.part == "tail":
        return th.tail_envelope(), e_re - 1.0 + max(th.tail.power_range[1], 0.0)
    b = th.poly_height() + th.tail_envelope()
    deg = max(th.poly_degree(), th.tail.power_range[1], 0.0)
    return b, e_re - 1.0 + deg


def truncation_horizon(word: Word, s: Sequence[complex], params: EvalParams) -> float:
    """Smallest power-of-two horizon whose certified tail bound is below
    abs_tol * horizon_safety.  The word must end in a tail letter."""
    if not word:
        return 2.0
    last = word[-1]
    if last.part != "tail":
        raise QuadratureError("truncation horizon requires a final tail letter")
    th = last.theta
    mu1 = th.tail.min_mu()
    if not math.isfinite(mu1):
        return 2.0
    p = th.kernel_power
    decay_k = th.tail_envelope()
    if decay_k == 0.0:
        return 2.0
    log_prefac = 0.0
    growth_exp = 0.0
    for letter in word[:-1]:
        b, g = _letter_envelope(letter, s)
        log_prefac += math.log(max(b, 1e-300))
        growth_exp += max(g + 1.0, 0.0)
    e_re = complex(last.exponent(s)).real
    alpha = growth_exp + e_re - 1.0 + max(th.tail.power_range[1], 0.0)
    log_target = math.log(params.abs_tol * params.horizon_safety)
    log_head = math.log(2.0) + log_prefac + math.log(decay_k) - math.log(mu1 * p)
    t_high = 2.0
    while t_high <= MAX_HORIZON:
        tp = t_high**p
        if mu1 * p * tp >= max(2.0 * (alpha + 1.0 - p), 1.0):
            log_bound = log_head + (alpha + 1.0 - p) * math.log(t_high) - mu1 * tp
            if log_bound <= log_target:
                return t_high
        t_high *= 2.0
    raise QuadratureError("no horizon satisfies the truncation bound")


# ---------------------------------------------------------------------------
# word integrals
# ---------------------------------------------------------------------------


def _letter_phi(
    letter: Letter, s: Sequence[complex], m: PanelMesh, max_terms: int
) -> np.ndarray:
    e = complex(letter.exponent(s))
    power = m.nodes ** (e - 1.0)
    if letter.part == "mono":
        return float(letter.coeff) * power
    return m.theta_values(letter.theta, letter.part, max_terms) * power


def integrate_word_on_mesh(
    word: Word, s: Sequence[complex], m: PanelMesh, params: EvalParams
) -> complex:
    """Iterated integral of the word over the mesh interval (exact panels)."""
    if not word:
        return 1.0 + 0.0j
    inner = np.ones(m.nodes.shape, dtype=complex)
    total = 1.0 + 0.0j
    for letter in word:
        f = _letter_phi(letter, s, m, params.max_terms) * inner
        inner, total = m.cumulative(f)
    return total


def _refine_until(
    word: Word,
    s: Sequence[complex],
    edges: tuple[float, ...],
    params: EvalParams,
    slack: float,
) -> tuple[complex, float]:
    m0 = mesh(edges, params.quad_order)
    v0 = integrate_word_on_mesh(word, s, m0, params)
    est = math.inf
    for _ in range(params.max_refine):
        m1 = m0.refined()
        v1 = integrate_word_on_mesh(word, s, m1, params)
        est = abs(v1 - v0) + slack
        if est <= params.abs_tol:
            return v1, est
        m0, v0 = m1, v1
    raise QuadratureError(
        f"estimate {est:.3e} above {params.abs_tol:.1e} after "
        f"{params.max_refine} refinements"
    )


def tail_word_integral(
    word: Word, s: Sequence[complex], params: EvalParams | None = None
) -> tuple[complex, float]:
    """Iterated integral over [1, inf) of a word ending in a tail letter.

    Returns (value, error estimate); the estimate combines one-refinement
    agreement with the certified truncation slack.
    """
    params = params or EvalParams()
    if not word:
        return 1.0 + 0.0j, 0.0
    t_max = truncation_horizon(word, s, params)
    edges = doubling_edges(1.0, t_max)
    return _refine_until(word, s, edges, params, params.abs_tol * params.horizon_safety)


def word_integral_on_interval(
    word: Word,
    s: Sequence[complex],
    edges: tuple[float, ...],
    params: EvalParams | None = None,
    slack: float = 0.0,
) -> tuple[complex, float]:
    """Iterated integral over a finite mesh, refined to tolerance."""
    params = params or EvalParams()
    if not word:
        return 1.0 + 0.0j, 0.0
    return _refine_until(word, s, edges, params, slack)


def composition_split(
    word: Word, s: Sequence[complex], cut: float, params: EvalParams | None = None
) -> complex:
    """Evaluate the [1, inf) word integral via a path split at cut.

    Sum over k of (integral over [1, cut] of the first k letters) times
    (integral over [cut, inf) of the rest); used as an independent
    cross-check of the direct evaluation.
    """
    params = params or EvalParams()
    if cut <= 1.0:
        raise ValueError("cut must exceed 1")
    total = 0.0 + 0.0j
    lower_edges = tuple(np.linspace(1.0, cut, 5))
    for k in range(len(word) + 1):
        prefix, suffix = word[:k], word[k:]
        if prefix:
            left, _ = word_integral_on_interval(prefix, s, lower_edges, params)
        else:
            left = 1.0 + 0.0j
        if suffix:
            t_max = max(truncation_horizon(suffix, s, params), 2.0 * cut)
            upper = doubling_edges(cut, t_max)
            right, _ = word_integral_on_interval(suffix, s, upper, params)
        else:
            right = 1.0 + 0.0j
        total += left * right
    return total
