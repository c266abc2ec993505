"""Convex steering monotones with two-sided certificates.

Three quantities measure the steerability of an assemblage: the optimal
steering fraction (best normalized functional value minus one), the
steerable weight (minimal weight on a steerable part in a convex split),
and the steering robustness (minimal mixing with noise that destroys
steerability).  Each is a semidefinite program over the deterministic
response strategies of the measured side, and each solve returns both a
primal certificate (a decomposition or an optimal functional) and a dual
certificate whose independent evaluation reproduces the value.

The robustness program doubles as the membership engine for the LHS set:
its optimal hidden-state table is the model for members, and its dual
slack yields a violated functional for nonmembers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .assemblages import MEMBERSHIP_CAP_BITS, Assemblage, Instrument1W, apply_instrument
from .linalg import herm
from .sdp import SdpProblem, solve
from .strategies import all_strategies, indicator

__all__ = [
    "MonotoneReport",
    "RobustnessProgram",
    "PropositionReport",
    "AuditRow",
    "AuditReport",
    "optimal_steering_fraction",
    "steerable_weight",
    "steering_robustness",
    "robustness_program",
    "check_proposition_weight",
    "check_proposition_robustness",
    "monotonicity_audit",
    "VALUE_CLAMP",
]

# Interior-point outputs are never exactly zero; values below this are
# reported as exactly 0.
VALUE_CLAMP = 1e-9


def _clamped(v: float) -> float:
    return 0.0 if v < VALUE_CLAMP else float(v)


def _strategy_data(settings: int, outcomes: int) -> tuple[np.ndarray, np.ndarray]:
    if settings * np.log2(outcomes) > MEMBERSHIP_CAP_BITS:
        raise ValueError(
            f"monotone programs enumerate {outcomes}^{settings} strategies; "
            f"cap is settings*log2(outcomes) <= {MEMBERSHIP_CAP_BITS}"
        )
    strat = all_strategies(settings, outcomes)
    return strat, indicator(strat, outcomes)


def _enumerated_norm(operators: np.ndarray, ind: np.ndarray) -> float:
    """max over strategies of lambda_max(sum_x F_{D(x)|x}), by enumeration."""
    summed = np.einsum("kxa,xaij->kij", ind, operators)
    return float(np.linalg.eigvalsh(summed)[:, -1].max())


def _fraction_of(members: np.ndarray, operators: np.ndarray, ind: np.ndarray) -> float:
    """Honest steering-fraction evaluation of a functional on raw members."""
    numerator = float(np.einsum("xaij,xaji->", operators, members).real)
    return numerator / _enumerated_norm(operators, ind)


@dataclass(frozen=True)
class MonotoneReport:
    """One monotone value with certificates on both sides.

    `certificate` holds the primal optimizer (decomposition or
    functional); `certificate_value` re-derives the value from it by
    direct evaluation, and `dual_value` does the same from the dual side
    after rescaling the dual variable to exact feasibility.  Both should
    match `value` within solver accuracy.
    """

    monotone: str
    value: float
    gap: float
    status: str
    certificate: dict
    certificate_value: float | None = None
    dual_value: float | None = None


@dataclass(frozen=True)
class RobustnessProgram:
    """Full detail of one robustness solve, reused for LHS membership."""

    status: str
    value: float
    raw_value: float | None = None
    gap: float | None = None
    model: np.ndarray | None = None               # (L, d, d) hidden states
    strategy_indicator: np.ndarray | None = None  # (L, m, o)
    witness: np.ndarray | None = None             # (m, o, d, d) dual functional
    dual_value: float | None = None
    noise: np.ndarray | None = None               # (m, o, d, d), when value > 0


@dataclass(frozen=True)
class PropositionReport:
    """Checked inequality chain relating two monotones on one assemblage."""

    proposition: str
    steerable: bool
    terms: dict
    lower_slack: float
    upper_slack: float
    holds: bool
    window: tuple[float, float] | None = None


@dataclass(frozen=True)
class AuditRow:
    index: int
    branch_weights: tuple
    branch_values: tuple
    branch_suprema: tuple
    average: float
    holds_average: bool
    holds_branches: bool


@dataclass(frozen=True)
class AuditReport:
    base_value: float
    base_supremum: float
    rows: tuple
    tol: float

    @property
    def holds(self) -> bool:
        return all(r.holds_average and r.holds_branches for r in self.rows)


def _solve_fraction(members: np.ndarray, dim: int, tol: float):
    """max sum tr(F sigma) over F >= 0 with every strategy sum of F below 1.

    Returns the solver solution, the optimal functional table, and the
    per-strategy dual matrices (PSD by construction).
    """
    m, o = members.shape[0], members.shape[1]
    strat, ind = _strategy_data(m, o)
    p = SdpProblem()
    f_idx = [[p.add_block(dim) for _ in range(o)] for _ in range(m)]
    t_idx = [p.add_block(dim) for _ in range(len(strat))]
    p.set_objective(
        {f_idx[x][a]: herm(members[x, a], tol=1e-8) for x in range(m) for a in range(o)},
        sense="max",
    )
    eye = np.eye(dim)
    for k, d_map in enumerate(strat):
        terms = {f_idx[x][d_map[x]]: 1.0 for x in range(m)}
        terms[t_idx[k]] = 1.0
        p.add_matrix_equality(terms, eye)
    sol = solve(p, tol=tol)
    if sol.status != "optimal":
        return sol, None, None, ind
    functional = np.stack(
        [np.stack([sol.x[f_idx[x][a]] for a in range(o)]) for x in range(m)]
    )
    duals = np.stack([sol.s[i] for i in t_idx])
    return sol, functional, duals, ind


def _solve_weight(members: np.ndarray, dim: int, tol: float):
    """max sum tr(pi_k) over PSD pi with the strategy mixture below sigma."""
    m, o = members.shape[0], members.shape[1]
    strat, ind = _strategy_data(m, o)
    p = SdpProblem()
    pi_idx = [p.add_block(dim) for _ in range(len(strat))]
    s_idx = [[p.add_block(dim) for _ in range(o)] for _ in range(m)]
    eye = np.eye(dim)
    p.set_objective({i: eye for i in pi_idx}, sense="max")
    for x in range(m):
        for a in range(o):
            terms = {pi_idx[k]: 1.0 for k in range(len(strat)) if strat[k, x] == a}
            terms[s_idx[x][a]] = 1.0
            p.add_matrix_equality(terms, herm(members[x, a], tol=1e-8))
    sol = solve(p, tol=tol)
    if sol.status != "optimal":
        return sol, None, None, ind
    pi = np.stack([sol.x[i] for i in pi_idx])
    witness = np.stack(
        [np.stack([sol.s[s_idx[x][a]] for a in range(o)]) for x in range(m)]
    )
    return sol, pi, witness, ind


def _solve_robustness(members: np.ndarray, dim: int, tol: float):
    """min sum tr(xi_k) over PSD xi with the strategy mixture above sigma."""
    m, o = members.shape[0], members.shape[1]
    strat, ind = _strategy_data(m, o)
    p = SdpProblem()
    xi_idx = [p.add_block(dim) for _ in range(len(strat))]
    s_idx = [[p.add_block(dim) for _ in range(o)] for _ in range(m)]
    eye = np.eye(dim)
    p.set_objective({i: eye for i in xi_idx}, sense="min")
    for x in range(m):
        for a in range(o):
            terms = {xi_idx[k]: 1.0 for k in range(len(strat)) if strat[k, x] == a}
            terms[s_idx[x][a]] = -1.0
            p.add_matrix_equality(terms, herm(members[x, a], tol=1e-8))
    sol = solve(p, tol=tol)
    if sol.status != "optimal":
        return sol, None, None, ind
    xi = np.stack([sol.x[i] for i in xi_idx])
    witness = np.stack(
        [np.stack([sol.s[s_idx[x][a]] for a in range(o)]) for x in range(m)]
    )
    return sol, xi, witness, ind


def _fraction_report(members: np.ndarray, dim: int, tol: float):
    sol, functional, duals, ind = _solve_fraction(members, dim, tol)
    if sol.status != "optimal":
        return MonotoneReport("S_O", float("nan"), float("nan"), sol.status, {}), None
    supremum = float(sol.primal_objective)
    value = _clamped(supremum - 1.0)
    cert_value = _clamped(_fraction_of(members, functional, ind) - 1.0)
    # Dual side: the per-strategy matrices Y_k form an exact cover of sigma
    # after compensating their feasibility slack, and sum tr(Y) bounds the
    # supremum from above.
    cover = np.einsum("kxa,kij->xaij", ind, duals)
    feas = min(
        float(np.linalg.eigvalsh(herm(cover[x, a] - members[x, a], tol=1e-6))[0])
        for x in range(members.shape[0])
        for a in range(members.shape[1])
    )
    dual_total = float(np.einsum("kii->", duals).real)
    dual_value = _clamped(dual_total + max(0.0, -feas) * dim * len(duals) - 1.0)
    report = MonotoneReport(
        monotone="S_O",
        value=value,
        gap=float(sol.gap),
        status=sol.status,
        certificate={"functional": functional, "dual_cover": duals, "supremum": supremum},
        certificate_value=cert_value,
        dual_value=dual_value,
    )
    return report, supremum


def optimal_steering_fraction(sigma: Assemblage, tol: float = 1e-9) -> MonotoneReport:
    """Best steering-fraction excess over 1, maximized over functionals.

    The optimizer normalizes the enumeration bound of the functional to 1,
    so the objective itself is the fraction; the reported value is clamped
    at 0, which every unsteerable assemblage attains.
    """
    report, _ = _fraction_report(sigma.members, sigma.dim, tol)
    return report


def steerable_weight(sigma: Assemblage, tol: float = 1e-9) -> MonotoneReport:
    """Minimal weight of the steerable part over convex decompositions.

    The certificate carries the hidden-state table of the unsteerable
    part and, when the weight is positive, the steerable remainder
    (sigma - mixture) / weight.
    """
    members, dim = sigma.members, sigma.dim
    sol, pi, witness, ind = _solve_weight(members, dim, tol)
    if sol.status != "optimal":
        return MonotoneReport("S_W", float("nan"), float("nan"), sol.status, {})
    unsteerable = np.einsum("kxa,kij->xaij", ind, pi)
    raw = 1.0 - float(sol.primal_objective)
    value = _clamped(raw)
    steerable_part = (members - unsteerable) / raw if raw > 1e-6 else None
    recovered = float(np.einsum("kii->", pi).real)
    cert_value = _clamped(1.0 - recovered)
    # Scale the dual witness to exact feasibility before trusting it: its
    # strategy sums must dominate the identity.
    summed = np.einsum("kxa,xaij->kij", ind, witness)
    lam = float(np.linalg.eigvalsh(summed)[:, 0].min())
    dual_value = None
    if lam > 0:
        paid = float(np.einsum("xaij,xaji->", witness, members).real)
        dual_value = _clamped(1.0 - paid / lam)
    return MonotoneReport(
        monotone="S_W",
        value=value,
        gap=float(sol.gap),
        status=sol.status,
        certificate={
            "weights": pi,
            "unsteerable": unsteerable,
            "steerable": steerable_part,
            "witness": witness,
            "strategy_indicator": ind,
        },
        certificate_value=cert_value,
        dual_value=dual_value,
    )


def robustness_program(sigma: Assemblage, tol: float = 1e-9) -> RobustnessProgram:
    """Robustness solve with the detail the membership test consumes.

    The model rows are the subnormalized hidden states; mixing them along
    `strategy_indicator` reproduces sigma exactly at robustness 0.  The
    witness is the dual functional, already positive semidefinite, whose
    value on sigma approaches 1 + robustness while its enumeration bound
    stays near 1.
    """
    members, dim = sigma.members, sigma.dim
    sol, xi, witness, ind = _solve_robustness(members, dim, tol)
    if sol.status != "optimal":
        return RobustnessProgram(status=sol.status, value=float("nan"), gap=sol.gap)
    raw = float(sol.primal_objective) - 1.0
    value = _clamped(raw)
    noise = None
    if raw > 1e-6:
        mixture = np.einsum("kxa,kij->xaij", ind, xi)
        noise = (mixture - members) / raw
    paid = float(np.einsum("xaij,xaji->", witness, members).real)
    dual_value = _clamped(paid / _enumerated_norm(witness, ind) - 1.0)
    return RobustnessProgram(
        status=sol.status,
        value=value,
        raw_value=raw,
        gap=float(sol.gap),
        model=xi,
        strategy_indicator=ind,
        witness=witness,
        dual_value=dual_value,
        noise=noise,
    )


def steering_robustness(sigma: Assemblage, tol: float = 1e-9) -> MonotoneReport:
    """Minimal noise admixture that lands inside the LHS set."""
    prog = robustness_program(sigma, tol=tol)
    if prog.status != "optimal":
        return MonotoneReport("S_R", float("nan"), float("nan"), prog.status, {})
    cert_value = _clamped(float(np.einsum("kii->", prog.model).real) - 1.0)
    return MonotoneReport(
        monotone="S_R",
        value=prog.value,
        gap=prog.gap,
        status=prog.status,
        certificate={
            "model": prog.model,
            "noise": prog.noise,
            "witness": prog.witness,
            "strategy_indicator": prog.strategy_indicator,
        },
        certificate_value=cert_value,
        dual_value=prog.dual_value,
    )


def check_proposition_weight(sigma: Assemblage, slack_tol: float = 1e-5) -> PropositionReport:
    """Chain linking the fraction monotone across a weight decomposition.

    With weight w and steerable part sigma^S, the fraction monotone obeys
    value(sigma) <= w * value(sigma^S) <= value(sigma) + 2(1 - w).  When
    value(sigma^S) > 0 the chain also pins w into a closed window.
    """
    so_report = optimal_steering_fraction(sigma)
    sw_report = steerable_weight(sigma)
    so, sw = so_report.value, sw_report.value
    part = sw_report.certificate.get("steerable")
    if part is None:
        return PropositionReport(
            proposition="weight",
            steerable=False,
            terms={"fraction": so, "weight": sw, "fraction_of_part": 0.0},
            lower_slack=-so,
            upper_slack=so + 2.0 * (1.0 - sw),
            holds=(so <= slack_tol),
        )
    part_report, _ = _fraction_report(part, sigma.dim, tol=1e-9)
    so_part = part_report.value
    lower_slack = sw * so_part - so
    upper_slack = so + 2.0 * (1.0 - sw) - sw * so_part
    window = None
    if so_part > 0:
        window = (so / so_part, (2.0 + so) / (2.0 + so_part))
    return PropositionReport(
        proposition="weight",
        steerable=True,
        terms={"fraction": so, "weight": sw, "fraction_of_part": so_part},
        lower_slack=lower_slack,
        upper_slack=upper_slack,
        holds=(lower_slack >= -slack_tol and upper_slack >= -slack_tol),
        window=window,
    )


def check_proposition_robustness(sigma: Assemblage, slack_tol: float = 1e-5) -> PropositionReport:
    """Chain linking the fraction monotone across a robustness mixture.

    With robustness r and noise part tau, the chain reads
    r * value(tau) - 2 <= value(sigma) <= r * (value(tau) + 2).
    """
    so_report = optimal_steering_fraction(sigma)
    sr_report = steering_robustness(sigma)
    so, sr = so_report.value, sr_report.value
    noise = sr_report.certificate.get("noise")
    if noise is None:
        upper_slack = sr * 2.0 - so
        return PropositionReport(
            proposition="robustness",
            steerable=False,
            terms={"fraction": so, "robustness": sr, "fraction_of_noise": 0.0},
            lower_slack=so + 2.0,
            upper_slack=upper_slack,
            holds=(so <= slack_tol),
        )
    noise_report, _ = _fraction_report(noise, sigma.dim, tol=1e-9)
    so_noise = noise_report.value
    lower_slack = so - (sr * so_noise - 2.0)
    upper_slack = sr * (so_noise + 2.0) - so
    window = None
    if so_noise > 0:
        window = (so / (so_noise + 2.0), (so + 2.0) / so_noise)
    return PropositionReport(
        proposition="robustness",
        steerable=True,
        terms={"fraction": so, "robustness": sr, "fraction_of_noise": so_noise},
        lower_slack=lower_slack,
        upper_slack=upper_slack,
        holds=(lower_slack >= -slack_tol and upper_slack >= -slack_tol),
        window=window,
    )


def _audit_row(args) -> AuditRow:
    index, sigma, ins, base_value, base_sup, tol = args
    weights, values, suprema = [], [], []
    for weight, branch in apply_instrument(sigma, ins):
        rep, sup = _fraction_report(branch.members, branch.dim, tol=1e-9)
        weights.append(weight)
        values.append(rep.value)
        suprema.append(sup)
    average = float(np.dot(weights, values))
    return AuditRow(
        index=index,
        branch_weights=tuple(weights),
        branch_values=tuple(values),
        branch_suprema=tuple(suprema),
        average=average,
        holds_average=(average <= base_value + tol),
        holds_branches=all(s <= base_sup + tol for s in suprema),
    )


def monotonicity_audit(
    sigma: Assemblage,
    instruments: list[Instrument1W],
    tol: float = 1e-5,
    threads: int | None = None,
) -> AuditReport:
    """Check that no instrument raises the fraction monotone on average.

    Each instrument contributes one row comparing the weighted average of
    the branch values against the input's value, plus a per-branch check
    that no single branch exceeds the input's unclamped supremum.  Rows
    are independent solves, so they fan out over a thread pool when
    `threads` asks for one, and join in submission order.
    """
    base_report, base_sup = _fraction_report(sigma.members, sigma.dim, tol=1e-9)
    jobs = [
        (i, sigma, ins, base_report.value, base_sup, tol)
        for i, ins in enumerate(instruments)
    ]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = tuple(pool.map(_audit_row, jobs))
    else:
        rows = tuple(map(_audit_row, jobs))
    return AuditReport(
        base_value=base_report.value,
        base_supremum=base_sup,
        rows=rows,
        tol=tol,
    )
