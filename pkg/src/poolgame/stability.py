"""Rest points of the pool-selection dynamics and their stability.

The authoritative verdict comes from the eigenvalues of the Jacobian
restricted to the tangent space of the simplex (the directions in which the
population can actually move). For two pools the closed-form rest point,
the analytic 2x2 Jacobian, and the published determinant and large-population
sign conditions are computed alongside and reported verbatim, together with
a flag when they disagree with the numeric verdict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

from .errors import DegenerateStrategiesError, NotARestPointError, UnsupportedShapeError
from .model import _shares, block_reward, discounted_rewards, payoff_vector, survival_factor
from .replicator import reduced_rhs_two_pool, replicator_rhs

REST_TOL = 1e-9
EIG_TOL = 1e-9

ESS = "ESS"
NON_ESS = "non-ESS"
DEGENERATE = "degenerate"


class TheoremCoefficients(NamedTuple):
    """Discounted pool-level reward weights of the two-pool game.

    ``a`` (pool 1) and ``b`` (pool 2) are ``(R + fee*s_i) * omega_i`` times the
    probability that a block of size ``s_i`` is not orphaned.
    """

    a: float
    b: float


class Lemma1Result(NamedTuple):
    det_j11: float
    det_j: float
    passed: bool


class Theorem2Result(NamedTuple):
    a_minus_b: float
    b_w1_minus_a_w2: float
    cond_a_minus_b_negative: bool
    cond_cross_product_positive: bool
    degenerate: bool


@dataclass
class RestPointReport:
    """A candidate equilibrium and everything computed about it."""

    x_star: np.ndarray
    kind: str
    feasible: bool = True
    jacobian_analytic: Optional[np.ndarray] = None
    jacobian_numeric: Optional[np.ndarray] = None
    tangent_eigenvalues: Optional[np.ndarray] = None
    lemma1_minors: Optional[Lemma1Result] = None
    theorem2_conditions: Optional[Theorem2Result] = None
    reduced_eigen: Optional[float] = None
    nash: Optional[bool] = None
    verdict: Optional[str] = None
    printed_prediction: Optional[str] = None
    discrepancy: bool = False
    notes: List[str] = field(default_factory=list)

    CSV_HEADER_TAIL = ["kind", "feasible", "detJ11", "detJ", "t2_cond1", "t2_cond2", "reduced_eig", "verdict"]

    @staticmethod
    def csv_header(n_pools: int) -> str:
        cols = [f"x_star_{i + 1}" for i in range(n_pools)] + RestPointReport.CSV_HEADER_TAIL
        return ",".join(cols)

    def csv_row(self) -> str:
        lem, t2 = self.lemma1_minors, self.theorem2_conditions
        cells = [_num(v) for v in self.x_star]
        cells += [
            self.kind,
            str(self.feasible).lower(),
            _num(lem.det_j11) if lem else "",
            _num(lem.det_j) if lem else "",
            str(t2.cond_a_minus_b_negative).lower() if t2 else "",
            ("degenerate" if t2.degenerate else str(t2.cond_cross_product_positive).lower()) if t2 else "",
            _num(self.reduced_eigen) if self.reduced_eigen is not None else "",
            self.verdict or "",
        ]
        return ",".join(cells)

    def to_text(self) -> str:
        """Key-value rendering, one ``key = value`` per line."""
        lines = [
            f"x_star = {' '.join(_num(v) for v in self.x_star)}",
            f"kind = {self.kind}",
            f"feasible = {str(self.feasible).lower()}",
        ]
        if self.tangent_eigenvalues is not None:
            lines.append("tangent_eigenvalues = " + " ".join(_num(v) for v in self.tangent_eigenvalues))
        if self.reduced_eigen is not None:
            lines.append(f"reduced_eigen = {_num(self.reduced_eigen)}")
        if self.jacobian_analytic is not None:
            lines.append("jacobian_analytic = " + _matrix(self.jacobian_analytic))
        if self.jacobian_numeric is not None:
            lines.append("jacobian_numeric = " + _matrix(self.jacobian_numeric))
        if self.lemma1_minors is not None:
            lem = self.lemma1_minors
            lines += [f"lemma1.det_j11 = {_num(lem.det_j11)}", f"lemma1.det_j = {_num(lem.det_j)}",
                      f"lemma1.passed = {str(lem.passed).lower()}"]
        if self.theorem2_conditions is not None:
            t2 = self.theorem2_conditions
            lines += [
                f"theorem2.a_minus_b = {_num(t2.a_minus_b)}",
                f"theorem2.b_w1_minus_a_w2 = {_num(t2.b_w1_minus_a_w2)}",
                f"theorem2.cond1 = {str(t2.cond_a_minus_b_negative).lower()}",
                f"theorem2.cond2 = {str(t2.cond_cross_product_positive).lower()}",
                f"theorem2.degenerate = {str(t2.degenerate).lower()}",
            ]
        if self.nash is not None:
            lines.append(f"nash = {str(self.nash).lower()}")
        if self.printed_prediction is not None:
            lines.append(f"printed_prediction = {self.printed_prediction}")
        lines.append(f"verdict = {self.verdict or 'unclassified'}")
        lines.append(f"discrepancy = {str(self.discrepancy).lower()}")
        lines += [f"note = {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def _num(v) -> str:
    if v is None:
        return ""
    out = f"{float(v):.9g}"
    return "0" if out == "-0" else out


def _matrix(m) -> str:
    return "; ".join(" ".join(_num(v) for v in row) for row in np.asarray(m))


def _require_two(strategies):
    if len(strategies) != 2:
        raise UnsupportedShapeError(f"two pools required, got {len(strategies)}")


def coefficients_ab(strategies, params) -> TheoremCoefficients:
    _require_two(strategies)
    a, b = discounted_rewards(strategies, params)
    return TheoremCoefficients(float(a), float(b))


def _interior_closed_form(strategies, params) -> float:
    a, b = coefficients_ab(strategies, params)
    w1, w2 = strategies[0].omega, strategies[1].omega
    if w1 == w2:
        raise DegenerateStrategiesError("equal hash-rate requirements: closed form is singular")
    d = w1 - w2
    return (a - b) / (params.population * params.power_price * d * d) - w2 / d


def rest_points_two_pool(strategies, params) -> List[RestPointReport]:
    """Both vertices and the closed-form interior point (unclassified).

    The interior point is always returned; ``feasible`` says whether it lies
    strictly inside ``(0, 1)``.

    Raises
    ------
    DegenerateStrategiesError
        If both pools require the same hash rate.
    """
    _require_two(strategies)
    x = _interior_closed_form(strategies, params)
    return [
        RestPointReport(np.array([0.0, 1.0]), "vertex"),
        RestPointReport(np.array([1.0, 0.0]), "vertex"),
        RestPointReport(np.array([x, 1.0 - x]), "interior", feasible=bool(0.0 < x < 1.0)),
    ]


def _bracket(x1, strategies, params):
    a, b = coefficients_ab(strategies, params)
    w1, w2 = strategies[0].omega, strategies[1].omega
    total = w1 * x1 + w2 * (1.0 - x1)
    return (a - b) / (params.population * total) - params.power_price * (w1 - w2)


def interior_rest_point_bisect(strategies, params, tol: float = 1e-12) -> Optional[float]:
    """Interior zero of the two-pool bracket by bisection, or ``None``.

    Works whether or not the hash-rate requirements differ. Returns ``None``
    when the bracket keeps one sign on ``[0, 1]`` (including when it vanishes
    identically; see :func:`is_neutral_two_pool`).
    """
    lo, hi = 0.0, 1.0
    f_lo, f_hi = _bracket(lo, strategies, params), _bracket(hi, strategies, params)
    if f_lo == 0.0 or f_hi == 0.0 or (f_lo > 0) == (f_hi > 0):
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = _bracket(mid, strategies, params)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def is_neutral_two_pool(strategies, params) -> bool:
    """True when every two-pool state is a rest point (identical pools)."""
    return _bracket(0.0, strategies, params) == 0.0 and _bracket(1.0, strategies, params) == 0.0


def jacobian_two_pool_analytic(x, strategies, params) -> np.ndarray:
    """Closed-form partial derivatives of both pools' velocities.

    ``x_1`` and ``x_2`` are treated as independent coordinates.
    """
    _require_two(strategies)
    a, b = coefficients_ab(strategies, params)
    x1, x2 = (float(v) for v in _shares(x))
    w1, w2 = strategies[0].omega, strategies[1].omega
    n, p = params.population, params.power_price
    s = w1 * x1 + w2 * x2
    ns, ns2 = n * s, n * s * s
    j11 = (1 - 2 * x1) * (a / ns - p * w1) - a * w1 * (x1 - x1 * x1) / ns2 - b * w2 * x2 * x2 / ns2 + p * w2 * x2
    j12 = x1 * (p * w2 - a * w2 * (1 - x1) / ns2 + b * w2 * x2 / ns2 - b / ns)
    j21 = x2 * (p * w1 + a * w1 * x1 / ns2 - b * w1 * (1 - x2) / ns2 - a / ns)
    j22 = (1 - 2 * x2) * (b / ns - p * w2) - b * w2 * (x2 - x2 * x2) / ns2 - a * w1 * x1 * x1 / ns2 + p * w1 * x1
    return np.array([[j11, j12], [j21, j22]])


def jacobian_numeric(x, strategies, params, rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the replicator velocity.

    Column ``j`` perturbs ``x_j`` alone by ``rel_step * max(1, |x_j|)``.
    """
    base = np.array(_shares(x), dtype=float)
    m = base.size
    jac = np.empty((m, m))
    for j in range(m):
        h = rel_step * max(1.0, abs(base[j]))
        up, down = base.copy(), base.copy()
        up[j] += h
        down[j] -= h
        jac[:, j] = (replicator_rhs(up, strategies, params) - replicator_rhs(down, strategies, params)) / (2 * h)
    return jac


def tangent_basis(n_pools: int) -> np.ndarray:
    """Orthonormal basis (columns) of the directions that keep the sum fixed."""
    # Q of a QR of the centred identity, minus the dependent last column
    centred = np.eye(n_pools) - 1.0 / n_pools
    q, _ = np.linalg.qr(centred[:, :-1])
    return q


def tangent_eigenvalues(jac: np.ndarray) -> np.ndarray:
    """Eigenvalues of the Jacobian restricted to the simplex tangent space."""
    basis = tangent_basis(jac.shape[0])
    vals = np.linalg.eigvals(basis.T @ jac @ basis)
    return vals[np.lexsort((vals.imag, vals.real))]


def reduced_eigenvalue_two_pool(x1: float, strategies, params) -> float:
    """Derivative of the one-dimensional two-pool velocity at ``x1``."""
    a, b = coefficients_ab(strategies, params)
    w1, w2 = strategies[0].omega, strategies[1].omega
    n = params.population
    s = w1 * x1 + w2 * (1.0 - x1)
    slope = -(a - b) * (w1 - w2) / (n * s * s)
    return (1.0 - 2.0 * x1) * _bracket(x1, strategies, params) + x1 * (1.0 - x1) * slope


def lemma1_conditions(strategies, params, which: str) -> Lemma1Result:
    """Published principal-minor expressions and the sign tests on them.

    ``which`` is ``"vertex0"`` (everyone in pool 2), ``"vertex1"`` (everyone in
    pool 1, evaluated by relabelling the pools) or ``"interior"`` (the
    closed-form interior point). ``passed`` means ``det_j11 < 0`` and
    ``det_j > 0``. Values are NaN where an expression divides by zero.
    """
    _require_two(strategies)
    if which == "vertex1":
        return lemma1_conditions(list(reversed(strategies)), params, "vertex0")
    a, b = coefficients_ab(strategies, params)
    w1, w2 = strategies[0].omega, strategies[1].omega
    n, p = params.population, params.power_price
    if which == "vertex0":
        det_j11 = (a - b) / (n * w2) - p * (w1 - w2)
        det_j = det_j11 * (p * w2 - b / (n * w2))
    elif which == "interior":
        c = a - b + n * p * w2 * (w2 - w1)
        with np.errstate(divide="ignore", invalid="ignore"):
            det_j11 = _div(c * (a * (w1 + w2) + w1 * (-2 * b + n * p * w1 * (w2 - w1))),
                           n * (a - b) * (w1 - w2) ** 2)
            det_j = _div(p * c * (-b * w1 + a * w2) * (a - b + n * p * w1 * (w2 - w1)),
                         n * (a - b) ** 2 * (w1 - w2))
    else:
        raise ValueError(f"unknown rest point selector {which!r}")
    return Lemma1Result(det_j11, det_j, bool(det_j11 < 0 and det_j > 0))


def _div(num, den):
    return num / den if den != 0 else math.nan


def theorem2_asymptotic(strategies, params, rel_tol: float = 1e-12) -> Theorem2Result:
    """Large-population sign conditions for the interior point, as published.

    ``b*w1 - a*w2`` is computed as ``w1*w2*(k2 - k1)`` with ``k_i`` the
    discounted reward per unit hash rate, so it is exactly zero for equal
    block sizes. ``degenerate`` marks a (near-)zero second quantity.
    """
    _require_two(strategies)
    a, b = coefficients_ab(strategies, params)
    w1, w2 = strategies[0].omega, strategies[1].omega
    k1, k2 = (block_reward(s, params) * survival_factor(s.block_size, params) for s in strategies)
    cross = w1 * w2 * (k2 - k1)
    degenerate = abs(cross) <= rel_tol * abs(a * w2) or w1 == w2
    return Theorem2Result(
        a_minus_b=a - b,
        b_w1_minus_a_w2=cross,
        cond_a_minus_b_negative=bool(a - b < 0),
        cond_cross_product_positive=bool(cross * (w2 - w1) > 0),
        degenerate=bool(degenerate),
    )


def is_nash(x, strategies, params, tol: float = 1e-9) -> bool:
    """No pool offers more than the payoff earned in the inhabited pools."""
    shares = _shares(x)
    y = payoff_vector(shares, strategies, params)
    inhabited = shares > 0
    return bool(np.max(y) <= np.min(y[inhabited]) + tol * max(1.0, float(np.max(np.abs(y)))))


def verdict_from_eigenvalues(vals, scale: float = 1.0) -> str:
    thr = EIG_TOL * max(1.0, scale)
    re = np.real(vals)
    if re.size and np.all(re < -thr):
        return ESS
    if np.any(re > thr):
        return NON_ESS
    return DEGENERATE


def classify(x_star, strategies, params, kind: Optional[str] = None) -> RestPointReport:
    """Classify a rest point by its linearized dynamics on the simplex.

    Raises
    ------
    NotARestPointError
        If the velocity sup-norm at ``x_star`` is not below ``REST_TOL``.
    """
    x = np.array(_shares(x_star), dtype=float)
    m = x.size
    rate = float(np.max(np.abs(replicator_rhs(x, strategies, params))))
    if not rate < REST_TOL:
        raise NotARestPointError(f"|dx/dt| = {rate:.3g} at {x.tolist()}")
    if kind is None:
        kind = "vertex" if np.count_nonzero(x) == 1 else "interior"
    jac = jacobian_numeric(x, strategies, params)
    eig = tangent_eigenvalues(jac)
    verdict = verdict_from_eigenvalues(eig, np.linalg.norm(jac, 2))
    report = RestPointReport(x, kind, feasible=bool(np.all(x >= 0)), jacobian_numeric=jac,
                             tangent_eigenvalues=eig, nash=is_nash(x, strategies, params))
    if verdict == DEGENERATE:
        report.notes.append("neutral direction: a tangent eigenvalue is numerically zero")

    if m == 2:
        report.jacobian_analytic = jacobian_two_pool_analytic(x, strategies, params)
        g = reduced_eigenvalue_two_pool(x[0], strategies, params)
        report.reduced_eigen = g
        reduced_verdict = verdict_from_eigenvalues(np.array([g]), np.linalg.norm(jac, 2))
        if reduced_verdict != verdict:
            # a verdict of ESS needs every computed stability test to pass
            report.notes.append(f"reduced eigenvalue says {reduced_verdict}, tangent spectrum says {verdict}")
            verdict = DEGENERATE if DEGENERATE in (verdict, reduced_verdict) else NON_ESS
        _attach_printed_conditions(report, strategies, params)

    report.verdict = verdict
    if report.printed_prediction is not None and report.printed_prediction != DEGENERATE:
        report.discrepancy = report.printed_prediction != verdict
        if report.discrepancy:
            report.notes.append(
                f"published conditions predict {report.printed_prediction}, linearized dynamics give {verdict}"
            )
    elif report.printed_prediction == DEGENERATE and verdict != DEGENERATE:
        report.discrepancy = True
        report.notes.append(f"published conditions are degenerate here, linearized dynamics give {verdict}")
    return report


def _attach_printed_conditions(report: RestPointReport, strategies, params):
    x1 = report.x_star[0]
    if report.kind == "vertex":
        report.lemma1_minors = lemma1_conditions(strategies, params, "vertex0" if x1 == 0.0 else "vertex1")
        # the large-population result rules out both vertices
        report.printed_prediction = NON_ESS
        return
    t2 = theorem2_asymptotic(strategies, params)
    report.theorem2_conditions = t2
    if strategies[0].omega != strategies[1].omega:
        report.lemma1_minors = lemma1_conditions(strategies, params, "interior")
    if t2.degenerate:
        report.printed_prediction = DEGENERATE
    else:
        report.printed_prediction = ESS if (t2.cond_a_minus_b_negative and t2.cond_cross_product_positive) else NON_ESS


def find_rest_points_two_pool(strategies, params) -> List[RestPointReport]:
    """All rest points of a two-pool game, classified.

    Uses the closed form when the hash-rate requirements differ and falls
    back to bisection otherwise. For identical pools every state is at rest;
    the midpoint is reported as a representative of that continuum.
    Infeasible closed-form points are returned unclassified.
    """
    _require_two(strategies)
    out = [classify([0.0, 1.0], strategies, params, "vertex"), classify([1.0, 0.0], strategies, params, "vertex")]
    if strategies[0].omega != strategies[1].omega:
        interior = rest_points_two_pool(strategies, params)[2]
        if interior.feasible:
            rep = classify(interior.x_star, strategies, params, "interior")
            out.append(rep)
        else:
            interior.notes.append("closed-form interior point lies outside the simplex")
            interior.theorem2_conditions = theorem2_asymptotic(strategies, params)
            out.append(interior)
        return out
    if is_neutral_two_pool(strategies, params):
        rep = classify([0.5, 0.5], strategies, params, "interior")
        rep.notes.append("every state is a rest point (identical pools)")
        out.append(rep)
        return out
    root = interior_rest_point_bisect(strategies, params)
    if root is not None:
        out.append(classify([root, 1.0 - root], strategies, params, "interior"))
    return out


def reduced_rhs_sign_changes(strategies, params, grid) -> List[float]:
    """Grid locations where the two-pool velocity changes sign (diagnostic)."""
    vals = np.array([reduced_rhs_two_pool(g, strategies, params) for g in grid])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    return [float(grid[i]) for i in idx]


def polish_rest_point(x, strategies, params, tol: float = 1e-13, max_time: float = 1e5) -> np.ndarray:
    """Continue integrating from a near-rest state until ``|dx/dt| < tol``.

    The returned state is the last one reached even if ``tol`` was not met.
    """
    from .replicator import IntegratorConfig, integrate

    traj = integrate(x, strategies, params,
                     IntegratorConfig(max_time=max_time, convergence_tol=tol, record_every=10**9))
    return traj.final_state
