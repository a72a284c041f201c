"""Named verification suites behind the command-line `verify` subcommand.

Each suite returns a list of CaseResult records (suite, case, defect,
tolerance, passed).  Randomized suites draw points from a seeded generator
and reject points closer than a margin to any pole hyperplane of every
expression involved, so a run is reproducible from its seed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from . import engine, oracles
from .arith import binomial, factorial
from .quadrature import EvalParams
from .ratfun import AffineForm
from .theta import ThetaFunction, make_builtin_theta

PI = math.pi


@dataclass
class CaseResult:
    suite: str
    case: str
    defect: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _case(suite: str, case: str, defect: float, tol: float) -> CaseResult:
    return CaseResult(suite, case, float(defect), float(tol), bool(defect <= tol))


_EXPR_CACHE: dict[tuple, engine.LambdaExpression] = {}


def _expr(thetas: Sequence[ThetaFunction]) -> engine.LambdaExpression:
    key = tuple(th.name for th in thetas)
    if key not in _EXPR_CACHE:
        _EXPR_CACHE[key] = engine.build_expression(tuple(thetas))
    return _EXPR_CACHE[key]


def _sample(rng, nslots: int, forms, box: float = 3.0, margin: float = 0.1):
    """Random complex point in the box, at least margin from every form."""
    for _ in range(1000):
        pt = tuple(
            complex(rng.uniform(-box, box), rng.uniform(-box, box))
            for _ in range(nslots)
        )
        if all(h.distance(pt) >= margin for h in forms):
            return pt
    raise RuntimeError("could not sample a point away from the hyperplanes")


def _fe_defect(thetas, pt, params) -> float:
    expr = _expr(thetas)
    lhs, _ = engine.lambda_eval(expr, pt, params)
    dual = engine.reversed_dual_tuple(thetas)
    rhs, _ = engine.lambda_eval(_expr(dual), engine.reflected_point(thetas, pt), params)
    return abs(lhs - engine.functional_sign(thetas) * rhs)


def _fe_constraints(thetas):
    """Forms whose distance must be respected by the sampled point: the
    expression's own poles plus the duals' poles pulled back through the
    reflection."""
    expr = _expr(thetas)
    forms = list(expr.pole_forms)
    dual = engine.reversed_dual_tuple(thetas)
    r = len(thetas)
    for h in _expr(dual).pole_forms:
        # h(w_r - s_r, ..., w_1 - s_1) as a form in s
        const = h.const
        coeffs = [0] * r
        for i, c in enumerate(h.coeffs):
            j = r - 1 - i
            const += c * thetas[j].weight
            coeffs[j] = -c
        forms.append(AffineForm.make(const, coeffs))
    return forms


def suite_functional(seed: int, trials: int, params: EvalParams) -> list[CaseResult]:
    rng = np.random.default_rng(seed)
    out = []
    rie = make_builtin_theta("riemann")
    for r in (1, 2, 3):
        thetas = (rie,) * r
        forms = _fe_constraints(thetas)
        worst = 0.0
        for _ in range(trials):
            pt = _sample(rng, r, forms)
            worst = max(worst, _fe_defect(thetas, pt, params))
        out.append(_case("functional", f"xi r={r} reflection, {trials} points", worst, 1e-8))
    mixed = (make_builtin_theta("eisenstein", 4), make_builtin_theta("delta"))
    forms = _fe_constraints(mixed)
    worst = 0.0
    for _ in range(trials):
        pt = _sample(rng, 2, forms)
        worst = max(worst, _fe_defect(mixed, pt, params))
    out.append(_case("functional", f"mixed (G4, delta) reflection, {trials} points", worst, 1e-8))

    j3 = make_builtin_theta("jacobi3")
    e1 = _expr((rie,))
    ej3 = _expr((j3,))
    worst = 0.0
    for _ in range(5):
        s = complex(rng.uniform(0.7, 3.0), rng.uniform(-2.0, 2.0))
        a, _ = engine.lambda_eval(ej3, (s,), params)
        b, _ = engine.lambda_eval(e1, (2 * s,), params)
        worst = max(worst, abs(a - 2 * b))
    out.append(_case("functional", "Lambda(jacobi3;s) = 2 xi(2s), 5 points", worst, 1e-9))

    j2, j4 = make_builtin_theta("jacobi2"), make_builtin_theta("jacobi4")
    worst = 0.0
    for _ in range(5):
        s = complex(rng.uniform(0.8, 3.0), rng.uniform(-2.0, 2.0))
        a, _ = engine.lambda_eval(_expr((j2,)), (s,), params)
        b, _ = engine.lambda_eval(_expr((j4,)), (0.5 - s,), params)
        worst = max(worst, abs(a - b))
    out.append(_case("functional", "Lambda(jacobi2;s) = Lambda(jacobi4;1/2-s), 5 points", worst, 1e-8))

    delta = make_builtin_theta("delta")
    ed = _expr((delta,))
    out.append(_case("functional", "delta pole set empty", float(len(ed.pole_forms)), 0.0))
    worst = 0.0
    for _ in range(10):
        s = complex(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0))
        a, _ = engine.lambda_eval(ed, (s,), params)
        b, _ = engine.lambda_eval(ed, (12.0 - s,), params)
        worst = max(worst, abs(a - b))
    out.append(_case("functional", "Lambda(delta;s) = Lambda(delta;12-s), 10 points", worst, 1e-9))

    pool = [
        rie,
        make_builtin_theta("eisenstein", 4),
        delta,
        make_builtin_theta("theta_plus"),
        make_builtin_theta("theta_minus"),
        make_builtin_theta("jacobi2"),
        make_builtin_theta("jacobi3"),
        make_builtin_theta("jacobi4"),
    ]
    worst = 0.0
    for _ in range(max(trials // 2, 5)):
        r = int(rng.integers(2, 4))
        tup = tuple(pool[int(i)] for i in rng.integers(0, len(pool), r))
        pt = _sample(rng, r, _fe_constraints(tup))
        worst = max(worst, _fe_defect(tup, pt, params))
    out.append(
        _case("functional", "random mixed tuples from the builtin pool, r in {2,3}", worst, 1e-8)
    )
    return out


_SHUFFLE_POOL = ("riemann", "eisenstein:4", "delta", "theta_plus", "theta_minus")


def _pool_theta(tag: str) -> ThetaFunction:
    if tag == "eisenstein:4":
        return make_builtin_theta("eisenstein", 4)
    return make_builtin_theta(tag)


def _shuffle_tuples(u: tuple, v: tuple) -> list[tuple]:
    if not u:
        return [v]
    if not v:
        return [u]
    return [(u[0],) + w for w in _shuffle_tuples(u[1:], v)] + [
        (v[0],) + w for w in _shuffle_tuples(u, v[1:])
    ]


def suite_shuffle(seed: int, trials: int, params: EvalParams) -> list[CaseResult]:
    rng = np.random.default_rng(seed)
    out = []
    for p_len, q_len in ((1, 1), (1, 2)):
        worst = 0.0
        for _ in range(trials):
            tags = [
                _SHUFFLE_POOL[int(i)]
                for i in rng.integers(0, len(_SHUFFLE_POOL), p_len + q_len)
            ]
            thetas = tuple(_pool_theta(t) for t in tags)
            u = tuple(range(p_len))
            v = tuple(range(p_len, p_len + q_len))
            merged = _shuffle_tuples(u, v)
            # pole constraints for every expression involved
            all_constraints: list[tuple[tuple, list[AffineForm]]] = []
            for idx in [u, v] + merged:
                sub = tuple(thetas[i] for i in idx)
                all_constraints.append((idx, list(_expr(sub).pole_forms)))
            for _try in range(200):
                pt = tuple(
                    complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
                    for _ in range(p_len + q_len)
                )
                ok = True
                for idx, hs in all_constraints:
                    sub_pt = tuple(pt[i] for i in idx)
                    if any(h.distance(sub_pt) < 0.1 for h in hs):
                        ok = False
                        break
                if ok:
                    break
            else:
                continue
            left, _ = engine.lambda_eval(
                _expr(tuple(thetas[i] for i in u)), tuple(pt[i] for i in u), params
            )
            right, _ = engine.lambda_eval(
                _expr(tuple(thetas[i] for i in v)), tuple(pt[i] for i in v), params
            )
            total = 0.0 + 0.0j
            for idx in merged:
                val, _ = engine.lambda_eval(
                    _expr(tuple(thetas[i] for i in idx)),
                    tuple(pt[i] for i in idx),
                    params,
                )
                total += val
            worst = max(worst, abs(left * right - total))
        out.append(
            _case("shuffle", f"({p_len},{q_len})-shuffles, {trials} trials", worst, 1e-8)
        )
    return out


def suite_residues(seed: int, trials: int, params: EvalParams) -> list[CaseResult]:
    rng = np.random.default_rng(seed)
    out = []
    rie = make_builtin_theta("riemann")
    e1, e2, e3 = _expr((rie,)), _expr((rie,) * 2), _expr((rie,) * 3)

    h = AffineForm.make(0, (0, 1))  # s2 = 0
    worst = 0.0
    for _ in range(4):
        s1 = complex(rng.uniform(2.2, 3.0), rng.uniform(-1.0, 1.0))
        res = engine.residue(e2, h, (s1, 0.0), params)
        ref, _ = engine.lambda_eval(e1, (s1,), params)
        worst = max(worst, abs(res + ref))
    out.append(_case("residues", "r=2 Res_{s2=0} = -xi(s1)", worst, 1e-8))

    h = AffineForm.make(0, (1, 1))  # s1 + s2 = 0
    worst = 0.0
    for _ in range(4):
        a = complex(rng.uniform(2.2, 3.0), rng.uniform(-1.0, 1.0))
        res = engine.residue(e2, h, (a, -a), params)
        worst = max(worst, abs(res - 1.0 / (-a)))
    out.append(_case("residues", "r=2 Res_{s1+s2=0} = 1/s2", worst, 1e-8))

    worst = 0.0
    for h, pt in (
        (AffineForm.make(0, (0, 1)), (2.5 + 0.3j, 0.0)),
        (AffineForm.make(0, (1, 1)), (2.7, -2.7)),
    ):
        res = engine.residue(e2, h, pt, params)
        num = oracles.residue_numeric(e2, h, pt, params)
        worst = max(worst, abs(res - num))
    out.append(_case("residues", "r=2 residues vs Richardson limits", worst, 1e-7))

    # r=3, hyperplane s2+s3=0 (k=2): xi(s1)/s3
    h = AffineForm.make(0, (0, 1, 1))
    pt = (2.5, 1.5, -1.5)
    res = engine.residue(e3, h, pt, params)
    ref, _ = engine.lambda_eval(e1, (2.5,), params)
    closed = ref / -1.5
    num = oracles.residue_numeric(e3, h, pt, params)
    out.append(_case("residues", "r=3 Res_{s2+s3=0} closed form", abs(res - closed), 1e-7))
    out.append(_case("residues", "r=3 Res_{s2+s3=0} vs limit", abs(res - num), 1e-7))

    # r=3, hyperplane s3=0 (k=3): -xi(s1,s2)
    h = AffineForm.make(0, (0, 0, 1))
    pt = (2.2, 1.7, 0.0)
    res = engine.residue(e3, h, pt, params)
    ref2, _ = engine.lambda_eval(e2, (2.2, 1.7), params)
    out.append(_case("residues", "r=3 Res_{s3=0} = -xi(s1,s2)", abs(res + ref2), 1e-7))
    num = oracles.residue_numeric(e3, h, pt, params)
    out.append(_case("residues", "r=3 Res_{s3=0} vs limit", abs(res - num), 1e-7))

    # r=3, hyperplane s1+s2+s3=0 (k=1): -1/((s2+s3) s3)
    h = AffineForm.make(0, (1, 1, 1))
    pt = (4.4, -1.3, -3.1)
    res = engine.residue(e3, h, pt, params)
    closed = -1.0 / ((pt[1] + pt[2]) * pt[2])
    out.append(
        _case("residues", "r=3 Res_{s1+s2+s3=0} = -1/((s2+s3)s3)", abs(res - closed), 1e-7)
    )
    _ = trials
    return out


def suite_eisenstein_id(seed: int, trials: int, params: EvalParams) -> list[CaseResult]:
    rng = np.random.default_rng(seed)
    out = []
    rie = make_builtin_theta("riemann")
    e1 = _expr((rie,))
    for k in (2, 3):
        w = 2 * k
        g = make_builtin_theta("eisenstein", w)
        eg = _expr((g,))
        crit = [0.0, 1.0, float(w - 1), float(w)]
        worst = 0.0
        for _ in range(10):
            while True:
                s = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
                if min(abs(s - c) for c in crit) >= 0.2:
                    break
            lhs, _ = engine.lambda_eval(eg, (s,), params)
            pref = 1.0 + 0.0j
            for j in range(1, w, 2):
                pref *= s - j
            pref /= 2 * (2 * PI) ** k
            xa, _ = engine.lambda_eval(e1, (s,), params)
            xb, _ = engine.lambda_eval(e1, (s - w + 1,), params)
            worst = max(worst, abs(lhs - pref * xa * xb))
        out.append(
            _case("eisenstein-id", f"Lambda(G{w};s) = prefactor*xi(s)xi(s-{w - 1})", worst, 1e-8)
        )
    g4 = make_builtin_theta("eisenstein", 4)
    spot, _ = engine.lambda_eval(_expr((g4,)), (2.0,), params)
    out.append(_case("eisenstein-id", "Lambda(G4;2) = -1/288", abs(spot + 1.0 / 288), 1e-12))

    ea, _, _ = oracles.real_eisenstein(1j, 1.3, params)
    eb, _, _ = oracles.real_eisenstein(1j, -0.3, params)
    out.append(_case("eisenstein-id", "E(i,1.3) = E(i,-0.3)", abs(ea - eb), 1e-7))
    for z in (2j, 0.3 + 1.7j):
        va, _, _ = oracles.real_eisenstein(z, 1.5, params)
        vb, _, _ = oracles.real_eisenstein(-1 / z, 1.5, params)
        out.append(
            _case("eisenstein-id", f"modular invariance at z={z}", abs(va - vb), 1e-8)
        )
    raw = oracles.eisenstein_lattice_sum(2j, 2.5, 300.0)
    th_route, _, _ = oracles.real_eisenstein(2j, 2.5, params)
    gamma_r = PI**-2.5 * math.gamma(2.5)
    out.append(
        _case(
            "eisenstein-id",
            "raw lattice sum vs completed route at (2i, 2.5)",
            abs(raw - th_route / gamma_r),
            5e-7,
        )
    )
    einf_direct = oracles.xi_value(3.0, params) * 2**1.5 + oracles.xi_value(2.0, params) * 2**-0.5
    _, _, einf = oracles.real_eisenstein(2j, 1.5, params)
    out.append(_case("eisenstein-id", "Einf(2i,1.5) assembly", abs(einf - einf_direct), 1e-10))
    return out


def suite_mzv(seed: int, trials: int, params: EvalParams) -> list[CaseResult]:
    out = []
    tols = {
        "pi*Lambda(theta+;1) = -8 log 2": 1e-10,
        "Lambda(theta-;1) = 0": 1e-10,
        "pi^2*Lambda(theta-,theta+;1,1)": 1e-8,
        "pi^3*Lambda(theta-,theta-,theta+;1,1,1)": 1e-7,
    }
    for rec in oracles.mzv_reconstruction_check(params):
        out.append(_case("mzv", rec["case"], rec["defect"], tols[rec["case"]]))
    z12 = oracles.mzv_sum((1, 2), 1e-7)
    z3 = oracles.mzv_sum((3,), 1e-10)
    out.append(_case("mzv", "zeta(1,2) = zeta(3) by summation", abs(z12 - z3), 1e-7))
    _ = seed, trials
    return out


def suite_qsums(seed: int, trials: int, params: EvalParams) -> list[CaseResult]:
    out = []
    rie = make_builtin_theta("riemann")
    td = engine.build_tail_expression((rie, rie))
    e1, e2 = _expr((rie,)), _expr((rie,) * 2)

    d22, _ = engine.lambda_eval(td, (2.0, 2.0), params)
    out.append(
        _case("qsums", "pi^2 D(2,2) = Q(1,1)", abs(PI**2 * d22 - oracles.q_sum((1, 1), 1e-8)), 1e-7)
    )
    d24, _ = engine.lambda_eval(td, (2.0, 4.0), params)
    q12 = oracles.q_sum((1, 2), 1e-8)
    q21 = oracles.q_sum((2, 1), 1e-8)
    out.append(_case("qsums", "pi^3 D(2,4) = Q(1,2)+Q(2,1)", abs(PI**3 * d24 - q12 - q21), 1e-7))
    d42, _ = engine.lambda_eval(td, (4.0, 2.0), params)
    out.append(_case("qsums", "pi^3 D(4,2) = Q(2,1)", abs(PI**3 * d42 - q21), 1e-7))

    for ell in (1, 2, 3):
        lhs, _ = engine.lambda_eval(e2, (2.0 * ell, 2.0), params)
        lhs = PI ** (ell + 1) / factorial(ell - 1) * lhs
        rhs = oracles.q_sum((ell, 1), 1e-8) + (1 - ell) / 2.0 * oracles.q_sum(
            (ell + 1,), 1e-10
        )
        out.append(_case("qsums", f"xi(2l,2) identity, l={ell}", abs(lhs - rhs), 1e-7))

    # symbolic reduction coefficients against the closed binomial formula
    sym_ok = True
    for l1 in range(1, 5):
        for l2 in range(1, 5):
            red = oracles.reduce_d_to_q((l1, l2))
            want = {
                (l1 + k, l2 - k): factorial(l1 - 1)
                * factorial(l2 - 1)
                * binomial(l1 + k - 1, k)
                for k in range(l2)
            }
            sym_ok = sym_ok and red == want
    out.append(_case("qsums", "reduction coefficients, l <= 4", 0.0 if sym_ok else 1.0, 0.0))

    v34, _ = engine.lambda_eval(e2, (3.0, 4.0), params)
    d34, _ = engine.lambda_eval(td, (3.0, 4.0), params)
    xi7, _ = engine.lambda_eval(e1, (7.0,), params)
    out.append(
        _case(
            "qsums",
            "xi(s1,s2) = D(s1,s2) + (1/s1-1/s2) xi(s1+s2) at (3,4)",
            abs(v34 - (d34 + (1 / 3.0 - 1 / 4.0) * xi7)),
            1e-8,
        )
    )
    _ = seed, trials
    return out


def suite_eichler(seed: int, trials: int, params: EvalParams) -> list[CaseResult]:
    out = []
    rie = make_builtin_theta("riemann")
    e2 = _expr((rie,) * 2)
    target = PI**2 / 72

    via_engine, _ = engine.lambda_eval(e2, (2.0, 2.0), params)
    via_eichler = oracles.eichler_xi((2, 2), params)
    via_eis = oracles.xi_via_eisenstein(1.0, 1.0, params)
    out.append(_case("eichler", "engine xi(2,2) = pi^2/72", abs(via_engine - target), 1e-9))
    out.append(_case("eichler", "eichler xi(2,2) = pi^2/72", abs(via_eichler - target), 1e-9))
    out.append(_case("eichler", "eisenstein xi(2,2) = pi^2/72", abs(via_eis - target), 1e-9))
    out.append(
        _case("eichler", "pipelines pairwise (engine/eichler)", abs(via_engine - via_eichler), 1e-7)
    )
    out.append(
        _case("eichler", "pipelines pairwise (engine/eisenstein)", abs(via_engine - via_eis), 1e-7)
    )
    out.append(
        _case("eichler", "pipelines pairwise (eichler/eisenstein)", abs(via_eichler - via_eis), 1e-7)
    )

    for pair in ((2, 4), (4, 2), (6, 2)):
        ref, _ = engine.lambda_eval(e2, (float(pair[0]), float(pair[1])), params)
        out.append(
            _case(
                "eichler",
                f"eichler xi{pair} vs engine",
                abs(oracles.eichler_xi(pair, params) - ref),
                1e-7,
            )
        )

    cross = oracles.xi_via_eisenstein(1.3, 0.9, params)
    ref, _ = engine.lambda_eval(e2, (2.6, 1.8), params)
    out.append(_case("eichler", "eisenstein route (1.3,0.9) vs engine", abs(cross - ref), 1e-6))
    sym = oracles.xi_via_eisenstein(1.1, 1.2, params)
    ref_sym, _ = engine.lambda_eval(e2, (1 - 2 * 1.2, 1 - 2 * 1.1), params)
    out.append(
        _case("eichler", "xi(2s1,2s2) = xi(1-2s2,1-2s1) across routes", abs(sym - ref_sym), 1e-6)
    )
    _ = seed, trials
    return out


def suite_binding(seed: int, trials: int, params: EvalParams) -> list[CaseResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials or 10):
        p_ = int(rng.integers(1, 5))
        m = int(rng.integers(1, 9))
        n = int(rng.integers(1, 9))
        s = complex(rng.uniform(0.4, 3.0), rng.uniform(-2.0, 2.0))
        worst = max(worst, oracles.binding_lemma_defect(p_, m, n, s))
    out = [_case("binding", f"hypergeometric identity, {trials or 10} draws", worst, 1e-9)]

    g4 = make_builtin_theta("eisenstein", 4)
    a0 = 1.0 / 240.0

    def sigma3(i: int) -> float:
        from .arith import divisor_sigma

        return float(divisor_sigma(3, i))

    for p_, s in ((2, 9.0), (1, 10.0)):
        lhs, _ = engine.lambda_eval(_expr((g4, g4)), (float(p_), s), params)
        term = engine.lambda_eval(_expr((g4,)), (float(p_),), params)[0] * engine.lambda_eval(
            _expr((g4,)), (s,), params
        )[0]
        term += a0 / p_ * engine.lambda_eval(_expr((g4,)), (s + p_,), params)[0]
        term -= a0 / s * engine.lambda_eval(_expr((g4,)), (s + p_,), params)[0]
        for r_ in range(p_):
            _, dd = oracles.dirichlet_double(
                sigma3, sigma3, p_ - r_, s + r_, 1e-8, (2.0, 3.0), (2.0, 3.0)
            )
            term -= binomial(p_ - 1, r_) * dd
        out.append(
            _case("binding", f"double-series bridge (G4,G4;p={p_},s={s:g})", abs(lhs - term), 1e-6)
        )
    return out


SUITES: dict[str, Callable[[int, int, EvalParams], list[CaseResult]]] = {
    "functional": suite_functional,
    "shuffle": suite_shuffle,
    "residues": suite_residues,
    "eisenstein-id": suite_eisenstein_id,
    "mzv": suite_mzv,
    "qsums": suite_qsums,
    "eichler": suite_eichler,
    "binding": suite_binding,
}


def run_suite(
    name: str, seed: int = 0, trials: int = 20, params: EvalParams | None = None
) -> list[CaseResult]:
    params = params or EvalParams()
    if name == "all":
        out = []
        for key in SUITES:
            out.extend(SUITES[key](seed, trials, params))
        return out
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; known: {', '.join(SUITES)} , all")
    return SUITES[name](seed, trials, params)
