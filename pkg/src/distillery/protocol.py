"""The distillation protocol: malting, mashing, and its figures of merit.

Malting: each memory clock cycle applies one loss event to both modes, then a
subtraction attempt on every arm that has not yet counted a phonon (forced
vacuum outcome before an arm's success cycle, a single count at it). An arm
that has succeeded keeps decohering but is no longer measured.

Mashing: successive 50/50 interference of the current state with a fresh
malted copy, conditioned on vacuum, iterated to a fixed point.
"""

import math
from dataclasses import dataclass, field

from .channels import (
    LossChannelParams,
    SubtractionParams,
    detect_one_mode,
    loss_event,
    mash_step,
)
from .core import TwoModeState, ZeroTraceError, normalize, tmss, trace_of
from .negativity import log_negativity, trace_distance


class NoConvergenceError(RuntimeError):
    """Raised when a fixed-point iteration exhausts max_iter where the
    caller needs a converged value."""


@dataclass(frozen=True)
class MaltingSchedule:
    """Success cycles for the two arms plus the channel settings."""

    m_a: int
    m_b: int
    loss: LossChannelParams
    sub: SubtractionParams

    def __post_init__(self):
        for name, m in (("m_a", self.m_a), ("m_b", self.m_b)):
            if int(m) != m or m < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {m}")


@dataclass(frozen=True)
class MaltingRecord:
    state: TwoModeState
    joint_prob: float
    negativity_trace: list  # (clock-cycle, negativity) pairs, cycle 0 = input state
    cycle_probs: list = field(default_factory=list)  # detection weight per cycle


@dataclass(frozen=True)
class DistillationOutcome:
    rho_final: TwoModeState
    iterations: int
    mash_probs: list
    negativity_by_stage: list
    converged: bool
    max_discarded: float = 0.0


@dataclass(frozen=True)
class CriticalCount:
    m_c: int
    baseline_negativity: float
    fixed_arm_index: int = 1


@dataclass(frozen=True)
class AvgEntanglement:
    value: float
    terms: list  # (j, success probability, final negativity) per retained j


def malt(lam, schedule, cfg):
    """Run one malting trajectory; the returned state is normalized and
    joint_prob is the probability of the whole outcome sequence."""
    state = tmss(lam, cfg)
    trace = [(0, log_negativity(state).value)]
    cycle_probs = []
    joint = 1.0
    for cycle in range(1, max(schedule.m_a, schedule.m_b) + 1):
        state = loss_event(state, schedule.loss)
        for mode, m_arm in (("A", schedule.m_a), ("B", schedule.m_b)):
            if cycle > m_arm:
                continue  # this arm already counted its phonon; loss only
            q = 1 if cycle == m_arm else 0
            state = detect_one_mode(state, schedule.sub, mode, q)
            if trace_of(state) <= cfg.trace_tol:
                raise ZeroTraceError(
                    f"outcome q={q} on arm {mode} at cycle {cycle} has vanishing probability"
                )
        state, p_cycle = normalize(state)
        joint *= p_cycle
        cycle_probs.append(p_cycle)
        trace.append((cycle, log_negativity(state).value))
    return MaltingRecord(state, joint, trace, cycle_probs)


def subtraction_probability_matrix(lam, loss, sub, cfg, i_max, j_max):
    """P[i-1, j-1] = probability that arm A succeeds at cycle i and arm B at
    cycle j; each cell is an independent malting run."""
    import numpy as np

    if i_max < 1 or j_max < 1:
        raise ValueError("i_max and j_max must be >= 1")
    p = np.zeros((i_max, j_max))
    for i in range(1, i_max + 1):
        for j in range(1, j_max + 1):
            p[i - 1, j - 1] = malt(lam, MaltingSchedule(i, j, loss, sub), cfg).joint_prob
    return p


def mash_iterate(rho_0, cfg, max_iter=50, projector="prose", exact_iterations=None):
    """Iterate mashing rounds against fresh copies of rho_0 until successive
    iterates are conv_tol-close in trace distance (or for exactly
    exact_iterations rounds when that override is given)."""
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    n_rounds = max_iter if exact_iterations is None else exact_iterations
    negs = [log_negativity(rho_0).value]
    probs = []
    worst_cut = 0.0
    cur = rho_0
    converged = False
    for _ in range(n_rounds):
        res = mash_step(cur, rho_0, projector=projector)
        probs.append(res.prob)
        negs.append(log_negativity(res.state).value)
        worst_cut = max(worst_cut, res.discarded_weight)
        dist = trace_distance(res.state, cur)
        cur = res.state
        if exact_iterations is None and dist < cfg.conv_tol:
            converged = True
            break
    if exact_iterations is not None:
        converged = True  # caller fixed the count deliberately
    return DistillationOutcome(cur, len(probs), probs, negs, converged, worst_cut)


def full_protocol(lam, schedule, cfg, max_iter=50):
    """Malting followed by iterated mashing; negativity_by_stage concatenates
    the per-cycle malting trace with the per-round mashing values."""
    record = malt(lam, schedule, cfg)
    outcome = mash_iterate(record.state, cfg, max_iter=max_iter)
    stages = [n for _, n in record.negativity_trace] + list(
        outcome.negativity_by_stage[1:]
    )
    return DistillationOutcome(
        outcome.rho_final,
        outcome.iterations,
        outcome.mash_probs,
        stages,
        outcome.converged,
        outcome.max_discarded,
    )


def _arm_b_branches(lam, loss, sub, cfg, j_limit):
    """Trajectories with arm A succeeding at cycle 1 and arm B at cycle j,
    yielding (j, joint probability, normalized malted state) for j = 1..j_limit.

    States are carried unnormalized so the running trace is the branch
    probability; all branches share the common prefix instead of replaying it.
    """
    state = loss_event(tmss(lam, cfg), loss)
    state = detect_one_mode(state, sub, "A", 1)
    if trace_of(state) <= cfg.trace_tol:
        raise ZeroTraceError("arm A count at cycle 1 has vanishing probability")
    running = state
    for j in range(1, j_limit + 1):
        if j > 1:
            running = detect_one_mode(running, sub, "B", 0)
            if trace_of(running) <= cfg.trace_tol:
                raise ZeroTraceError(f"arm B vacuum streak dies at cycle {j - 1}")
            running = loss_event(running, loss)
        branch = detect_one_mode(running, sub, "B", 1)
        malted, p_j = normalize(branch)
        yield j, p_j, malted


def _scan_gain(lam, loss, sub, cfg, max_iter, gain_mode, safety_factor, mash_iterations):
    """Shared linear scan over arm-B success cycles.

    Returns (m_c, baseline, terms) where terms holds one
    (j, success probability, final negativity) triple per retained j.
    """
    if gain_mode not in ("full", "malt-only"):
        raise ValueError(f"unknown gain_mode {gain_mode!r}")
    baseline = math.log2((1.0 + lam) / (1.0 - lam))
    if lam == 0.0:
        return 0, baseline, []
    if not math.isfinite(loss.tau):
        raise ValueError("critical-count scan needs finite tau (t < 1)")
    j_limit = math.ceil(loss.tau) * safety_factor
    m_c = 0
    terms = []
    for j, p_j, malted in _arm_b_branches(lam, loss, sub, cfg, j_limit):
        if gain_mode == "malt-only":
            final_neg = log_negativity(malted).value
            p_total = p_j
        else:
            # mash_iterations caps how many vacuum probabilities enter the
            # weight: None takes every converged round, 0 treats the vacuum
            # detections as certain (the state still mashes to convergence).
            forced = mash_iterations if mash_iterations else None
            outcome = mash_iterate(
                malted, cfg, max_iter=max_iter, exact_iterations=forced
            )
            if not outcome.converged:
                raise NoConvergenceError(
                    f"mashing did not converge within {max_iter} rounds at j={j}"
                )
            final_neg = outcome.negativity_by_stage[-1]
            if mash_iterations == 0:
                p_total = p_j
            else:
                p_total = p_j * math.prod(outcome.mash_probs)
        if final_neg <= baseline:
            break
        m_c = j
        terms.append((j, p_total, final_neg))
    return m_c, baseline, terms


def critical_attempts(
    lam, loss, sub, cfg, max_iter=50, gain_mode="full", safety_factor=3
):
    """Largest arm-B success cycle (arm A fixed at cycle 1) whose distilled
    negativity still beats the undistilled baseline; linear scan from j=1,
    stopping at the first failure, hard-capped at ceil(tau)*safety_factor."""
    m_c, baseline, _ = _scan_gain(
        lam, loss, sub, cfg, max_iter, gain_mode, safety_factor, None
    )
    return CriticalCount(m_c, baseline, 1)


def average_entanglement(
    lam,
    loss,
    sub,
    cfg,
    max_iter=50,
    mash_iterations=None,
    gain_mode="full",
    safety_factor=3,
):
    """Success-weighted mean of the distilled negativity over the retained
    arm-B cycles j = 1..m_c, zero when no cycle beats the baseline. Each
    weight is the malting probability times the product of the mashing
    vacuum probabilities (over the converged round count; mash_iterations=0
    drops the mashing factor, k forces exactly k rounds). The raw weights
    are kept in terms, so the unnormalized sum is recoverable from them.

    The number of retained cycles is len(terms)."""
    _, _, terms = _scan_gain(
        lam, loss, sub, cfg, max_iter, gain_mode, safety_factor, mash_iterations
    )
    if not terms:
        return AvgEntanglement(0.0, [])
    weight = sum(p for _, p, _ in terms)
    return AvgEntanglement(sum(p * n for _, p, n in terms) / weight, terms)
