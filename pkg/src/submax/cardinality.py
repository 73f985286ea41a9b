"""Cardinality-constrained streaming maximization.

Three entry points:

* ``simple_cardinality`` -- the dynamic-threshold collection loop. Each round
  recomputes alpha from the current value and sweeps the stream once; with a
  good value guess it fills K slots in about 1/eps rounds and is then within
  1 - 1/e - 2*eps of the guess.
* ``cardinality_binary_search`` -- O(K)-space driver that binary-searches the
  exponent of the value guess, keeping only (exponent, value) per probe and
  rerunning the winner.
* ``cardinality_parallel_guess`` -- pass-frugal driver that narrows the guess
  range with a one-pass estimate and then runs all surviving guesses in
  parallel within shared passes, trading space for passes.
"""

from __future__ import annotations

import math

from .core import Instance, InstanceError, Solution, solution_key
from .engine import MaxSingletonJob, ThresholdTask, run_jobs
from .knapsack import single_pass_estimate
from .stream import RunMeter, StreamSession


def _require_unit_costs(instance: Instance):
    if not instance.is_unit_cost():
        raise InstanceError("cardinality algorithms require unit costs")


def _empty_solution(instance, meter, branch=""):
    val = instance.oracle.value(frozenset())
    return Solution(frozenset(), val, meter.report(), branch)


def _solution_from_ids(instance, meter, ids, branch=""):
    ids = frozenset(ids)
    assert instance.cost(ids) <= instance.K
    val = instance.oracle.value(ids)
    return Solution(ids, val, meter.report(), branch)


def bounded_rounds(eps: float) -> int:
    """Round budget of one bounded-mode run: ceil(1/eps) + 1."""
    return math.ceil(1.0 / eps) + 1


def simple_cardinality(instance: Instance, v: float, W: float, eps: float, *,
                       round_cap: int | None = None, session: StreamSession | None = None,
                       trace=None) -> Solution:
    """Threshold-collect until |S| = K (or the round budget runs out).

    ``round_cap=None`` is the until-full loop; a finite cap adds the bounded
    semantics used by the guessing drivers (stop early once a round gains less
    than eps*v). A round that accepts nothing always terminates the loop since
    no later round could differ.
    """
    _require_unit_costs(instance)
    if v <= 0:
        raise ValueError(f"v must be positive, got {v}")
    if W < 1:
        raise ValueError(f"W must be >= 1, got {W}")
    session = session or StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    if instance.K == 0:
        return _empty_solution(instance, meter)
    task = ThresholdTask(session, instance.oracle, instance.cost_of, instance.K,
                         v, W, eps, stop_when_full=True,
                         gain_stop=round_cap is not None, cap_rounds=round_cap,
                         trace=trace, label="simple-card")
    run_jobs(session, [task])
    sol = _solution_from_ids(instance, meter, task.S, "simple-card")
    task.release()
    sol.meta = {"rounds": task.rounds}
    return sol


def cardinality_binary_search(instance: Instance, eps: float) -> Solution:
    """Binary-search the value-guess exponent, O(K) space.

    Guesses live on the geometric grid m*(1+eps)^i with m the best singleton;
    m <= f(OPT) <= m*K pins the exponent between 1 and p. A bounded run that
    fills K slots certifies the guess is safe to raise; one that stalls below K
    certifies the guess exceeds the optimum. Probes store only (exponent,
    value); the best probe is rerun at the end to rebuild its set.
    """
    _require_unit_costs(instance)
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    session = StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    K = instance.K
    if K == 0 or instance.n == 0:
        sol = _empty_solution(instance, meter, "card-bsearch")
        sol.meta = {"probes": 0, "p": 0}
        return sol

    scan = MaxSingletonJob(instance.oracle, instance.cost_of, K, label="max-singleton")
    run_jobs(session, [scan])
    m = scan.best_val or 0.0
    if m <= 0:
        sol = _empty_solution(instance, meter, "card-bsearch")
        sol.meta = {"probes": 0, "p": 0}
        return sol

    p = 0
    while (1 + eps) ** p < K:
        p += 1
    cap = bounded_rounds(eps)

    def probe(u):
        task = ThresholdTask(session, instance.oracle, instance.cost_of, K,
                             m * (1 + eps) ** u, K, eps, stop_when_full=True,
                             gain_stop=True, cap_rounds=cap, label=f"probe-{u}")
        run_jobs(session, [task])
        size, val = len(task.S), task.fS
        task.release()
        return size, val

    probes = []  # (exponent, value) only; sets are rebuilt by the final rerun
    s, t = 1, p
    while t - s > 1:
        u = (s + t) // 2
        size, val = probe(u)
        probes.append((u, val))
        if size == K:
            s = u
        else:
            t = u
    size, val = probe(s)
    probes.append((s, val))

    best_u = max(probes, key=lambda uv: uv[1])[0]
    task = ThresholdTask(session, instance.oracle, instance.cost_of, K,
                         m * (1 + eps) ** best_u, K, eps, stop_when_full=True,
                         gain_stop=True, cap_rounds=cap, label="rerun")
    run_jobs(session, [task])
    sol = _solution_from_ids(instance, meter, task.S, "card-bsearch")
    task.release()
    sol.meta = {"probes": len(probes), "p": p, "best_exponent": best_u}
    return sol


def cardinality_parallel_guess(instance: Instance, eps: float) -> Solution:
    """Run bounded Simple for every guess of a narrowed grid in shared passes.

    A one-pass constant-factor estimate brackets f(OPT) within a constant, so
    only O(1/eps) guesses survive; all of them consume the same passes, each
    holding at most K ids, i.e. (K+1) * grid-width space overall.
    """
    _require_unit_costs(instance)
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    session = StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    if instance.K == 0 or instance.n == 0:
        sol = _empty_solution(instance, meter, "card-parallel")
        sol.meta = {"grid_size": 0}
        return sol

    est = single_pass_estimate(instance, eps, session=session)
    if not est.grid:
        sol = _empty_solution(instance, meter, "card-parallel")
        sol.meta = {"grid_size": est.parallel_width}
        return sol

    cap = bounded_rounds(eps)
    tasks = [
        ThresholdTask(session, instance.oracle, instance.cost_of, instance.K,
                      v, instance.K, eps, stop_when_full=True, gain_stop=True,
                      cap_rounds=cap, label=f"guess-{i}")
        for i, v in enumerate(est.grid)
    ]
    run_jobs(session, tasks)

    best = min(tasks, key=lambda t: solution_key(t.fS, len(t.S), frozenset(t.S)))
    for t in tasks:
        if t is not best:
            t.release()
    sol = _solution_from_ids(instance, meter, best.S, "card-parallel")
    best.release()
    sol.meta = {"grid_size": len(tasks) + est.parallel_width}
    return sol
