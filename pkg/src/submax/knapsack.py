"""Knapsack-constrained streaming maximization.

Building blocks (each also usable on its own):

* ``single_pass_estimate`` -- one-pass constant-factor value estimate feeding a
  geometric grid of value guesses.
* ``simple_knapsack`` -- density-threshold collection: accept e when
  f(e|S) >= alpha*c(e), alpha recomputed per round, stop when a round gains
  less than eps*v.
* ``best_singleton``, ``ignore_large`` -- one-item scans and the
  drop-the-largest-optimal-item reduction.
* ``pick_nice_item`` -- one-pass shortlist of items that can stand in for a
  large optimal item (value window, size window, min-cost per value level).
* ``large_first``, ``modified_simple``, ``heavy_pair``, ``near_full_pair_case``,
  ``large_w`` -- the branch machinery of the stronger drivers.

Drivers ``approx_039``, ``approx_046``, ``approx_05`` run every branch for
every guess, in shared passes, and return the best feasible candidate ever
produced. Ratios against a value guess v with v <= f(OPT) <= (1+eps)v:
0.39, 0.46 and 0.5, each minus O(eps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import (FLOAT_TOL, Instance, ResourceReport, Solution,
                   ValueOracle, solution_key)
from .engine import (ConditionedOracle, FirstInWindowJob, MaxSingletonJob,
                     StreamJob, ThresholdTask, drive, parallel, run_jobs)
from .stream import RunMeter, StreamSession

ESTIMATE_RATIO = 1.0 / 3.0  # single-pass sieve quality used to span the guess grid


def safety_rounds(eps: float) -> int:
    """Hard round cap for gain-stopped loops; never binds when v <= f(target) <= 3v."""
    return math.ceil(3.0 / eps) + 2


def bounded_rounds(eps: float) -> int:
    return math.ceil(1.0 / eps) + 1


def nice_item_guarantee(t: float) -> float:
    """Guaranteed value share when a shortlisted stand-in replaces the large
    optimal item carrying a t-fraction of the value: 2/3 for t >= 0.5, rising
    piecewise-linearly to 9/10 as t drops to 0."""
    if t >= 0.5:
        return 2.0 / 3.0
    if t >= 0.4:
        return 5.0 / 6.0 - t / 3.0
    return 9.0 / 10.0 - t / 2.0


@dataclass(frozen=True)
class SizeWindow:
    """A multiplicative size guess: lo*K <= c <= hi*K with hi <= (1+eps)*lo."""

    lo: float
    hi: float

    def __post_init__(self):
        if not 0 < self.lo <= self.hi <= 1.0 + 1e-12:
            raise ValueError(f"invalid size window ({self.lo}, {self.hi})")


def size_windows(lo: float, hi: float, eps: float, K: float) -> list:
    """Geometric (1+eps) windows tiling [lo, hi], pruned to integer-achievable costs.

    Costs are integers, so two windows admitting the same integer costs are
    interchangeable; only the first window covering each attainable cost is
    kept. Every true c(o)/K in [lo, hi] stays bracketed by some kept window.
    """
    if hi <= lo + 1e-12 or lo <= 0:
        return []
    wins, a = [], lo
    while a < hi - 1e-12:
        b = min(a * (1 + eps), hi)
        wins.append(SizeWindow(a, b))
        a = b
    covered = set()
    kept = []
    for w in wins:
        ints = set(range(math.ceil(w.lo * K - 1e-9), math.floor(w.hi * K + 1e-9) + 1))
        ints = {t for t in ints if t >= 1}
        if not ints or ints <= covered:
            continue
        covered |= ints
        kept.append(w)
    return kept


def value_windows(lo: float, hi: float, eps: float) -> list:
    """Geometric (1+eps) windows tiling a value-fraction interval [lo, hi]."""
    if hi <= lo + 1e-12 or lo <= 0:
        return []
    out, a = [], lo
    while a < hi - 1e-12:
        b = min(a * (1 + eps), hi)
        out.append((a, b))
        a = b
    return out


# ---------------------------------------------------------------------------
# Driver plumbing: execution context and candidate pool


@dataclass
class Ctx:
    """Everything a sub-algorithm needs: where to read, what to evaluate,
    how much fits, and an early-exit probe supplied by the driver."""

    session: StreamSession
    oracle: ValueOracle
    cost_of: object
    capacity: float
    eps: float
    stop: object = field(default=lambda: False)

    def sub(self, oracle, capacity) -> "Ctx":
        return Ctx(self.session, oracle, self.cost_of, capacity, self.eps, self.stop)

    def task(self, v, W, *, capacity=None, label="", trace=None, **kw):
        kw.setdefault("cap_rounds", safety_rounds(self.eps))
        return ThresholdTask(self.session, self.oracle, self.cost_of,
                             self.capacity if capacity is None else capacity,
                             v, W, self.eps, label=label, trace=trace, **kw)

    def cost(self, ids) -> int:
        return sum(self.cost_of(e) for e in ids)


class CandidatePool:
    """Max-reduction over feasible candidates with deterministic tie-breaks
    (higher f, then smaller c(S), then lexicographic ids)."""

    def __init__(self, session, cost_of, capacity):
        self.session = session
        self.cost_of = cost_of
        self.capacity = capacity
        self.best = None  # (key, ids, value, label)
        self.offered = 0
        self.labels = {}

    def sink(self, ids, value, label=""):
        ids = frozenset(ids)
        c = sum(self.cost_of(e) for e in ids)
        assert c <= self.capacity + 1e-9, f"infeasible candidate from {label}"
        self.offered += 1
        self.labels[label] = self.labels.get(label, 0) + 1
        key = solution_key(value, c, ids)
        if self.best is None or key < self.best[0]:
            if self.best is not None:
                self.session.release(k=len(self.best[1]))
            self.session.retain(k=len(ids))
            self.best = (key, ids, value, label)

    @property
    def best_value(self) -> float:
        return self.best[2] if self.best else 0.0

    def close(self):
        if self.best is not None:
            self.session.release(k=len(self.best[1]))

    def wrapped(self, anchor, f_anchor, prefix=""):
        """Sink adapter for candidates from a conditioned subproblem."""
        anchor = frozenset(anchor)

        def sub_sink(ids, value, label=""):
            self.sink(anchor | frozenset(ids), f_anchor + value, prefix + label)

        return sub_sink


def _finish(instance, meter, pool, branch, meta=None) -> Solution:
    if pool.best is None:
        ids = frozenset()
    else:
        ids = pool.best[1]
    val = instance.oracle.value(ids)
    pool.close()
    sol = Solution(ids, val, meter.report(),
                   pool.best[3] if pool.best else branch, meta or {})
    sol.meta.setdefault("driver", branch)
    sol.meta.setdefault("candidates", pool.offered)
    return sol


# ---------------------------------------------------------------------------
# One-pass value estimation


class _SieveJob(StreamJob):
    """One pass over the stream keeping, for each guess v-hat on a geometric
    grid, the set collected under the density bar v-hat/(2K). Guesses spawn
    lazily as the running max singleton grows."""

    label = "estimate-sieve"

    def __init__(self, session, oracle, cost_of, K, eps):
        self.session = session
        self.oracle = oracle
        self.cost_of = cost_of
        self.K = K
        self.eps = eps
        self.log1p = math.log1p(eps)
        self.m = 0.0
        self.best_single = None  # (value, cost, id)
        self.sieves = {}  # exponent -> [ids, fset, fS, cS]
        self.spawned = 0

    def _ensure(self):
        if self.m <= 0:
            return
        i_lo = math.ceil(math.log(self.m) / self.log1p - 1e-9)
        i_hi = math.floor(math.log(2 * self.K * self.m) / self.log1p + 1e-9)
        for i in range(i_lo, i_hi + 1):
            if i not in self.sieves:
                self.sieves[i] = [[], frozenset(), 0.0, 0]
                self.spawned += 1

    def offer(self, item):
        e, c = item.id, self.cost_of(item.id)
        fe = self.oracle.marginal(e, frozenset())
        if fe > self.m:
            self.m = fe
            self._ensure()
        if fe > 0 and (self.best_single is None or (fe, -c) > (self.best_single[0], -self.best_single[1])):
            self.best_single = (fe, c, e)
        for i, st in self.sieves.items():
            if st[3] + c > self.K:
                continue
            bar = (1 + self.eps) ** i / (2.0 * self.K) * c
            gain = fe if not st[1] else self.oracle.marginal(e, st[1])
            if gain >= bar - FLOAT_TOL:
                st[0].append(e)
                st[1] = st[1] | {e}
                st[2] += gain
                st[3] += c
                self.session.retain(e)

    def end_pass(self):
        self.done = True
        best = self.best_single[0] if self.best_single else 0.0
        for st in self.sieves.values():
            best = max(best, st[2])
            for e in st[0]:
                self.session.release(e)
        self.x_value = best


@dataclass
class EstimateResult:
    grid: tuple           # ascending value guesses spanning [f(X), f(X)/ratio]
    x_value: float        # value of the one-pass solution X
    parallel_width: int   # number of parallel sieves (space documentation)


def single_pass_estimate(instance: Instance, eps: float, *,
                         session: StreamSession | None = None,
                         ratio: float = ESTIMATE_RATIO) -> EstimateResult:
    """One pass; returns a geometric grid of guesses bracketing f(OPT).

    The sieve solution X has f(X) >= ratio * f(OPT), so some grid point v
    satisfies v <= f(OPT) <= (1+eps)v. A zero function yields an empty grid.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    session = session or StreamSession(instance)
    if instance.K == 0 or instance.n == 0:
        return EstimateResult((), 0.0, 0)
    job = _SieveJob(session, instance.oracle, instance.cost_of, instance.K, eps)
    run_jobs(session, [job])
    if job.x_value <= 0:
        return EstimateResult((), 0.0, job.spawned)
    grid, v = [], job.x_value
    top = job.x_value / ratio
    while v <= top * (1 + 1e-12):
        grid.append(v)
        v *= (1 + eps)
    return EstimateResult(tuple(grid), job.x_value, job.spawned)


# ---------------------------------------------------------------------------
# Building-block operations


def simple_knapsack(instance: Instance, v: float, W: float, eps: float, *,
                    session: StreamSession | None = None, trace=None) -> Solution:
    """Density-threshold rounds until one gains less than eps*v.

    With v <= f(OPT) <= O(1)v and W >= c(OPT) the final set fills all but the
    largest optimal item's worth of capacity and is within
    1 - e^(-c(S)/W) - 2*eps of v.
    """
    if v <= 0:
        raise ValueError(f"v must be positive, got {v}")
    if W <= 0:
        raise ValueError(f"W must be positive, got {W}")
    session = session or StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    task = ThresholdTask(session, instance.oracle, instance.cost_of, instance.K,
                         v, W, eps, gain_stop=True, cap_rounds=safety_rounds(eps),
                         trace=trace, label="simple-knap")
    run_jobs(session, [task])
    ids = frozenset(task.S)
    task.release()
    val = instance.oracle.value(ids)
    return Solution(ids, val, meter.report(), "simple-knap", {"rounds": task.rounds})


def best_singleton(instance: Instance, cap: float, base=frozenset(), *,
                   session: StreamSession | None = None) -> Solution:
    """Single pass: the best feasible one-item extension of ``base``."""
    session = session or StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    base = frozenset(base)
    f_base = instance.oracle.value(base) if base else 0.0
    job = MaxSingletonJob(instance.oracle, instance.cost_of, cap, base, f_base)
    run_jobs(session, [job])
    ids = base if job.best_id is None else base | {job.best_id}
    val = instance.oracle.value(ids)
    return Solution(frozenset(ids), val, meter.report(), "best-singleton")


def ignore_large(instance: Instance, v: float, W: float, c1_lo: float,
                 tau: float, eps: float, *,
                 session: StreamSession | None = None) -> Solution:
    """Approximate the optimum minus its largest item.

    Given c1_lo*K <= c(o1) <= (1+eps)*c1_lo*K and f(o1) <= tau*v, collects
    toward value (1-tau)*v within width W - c1_lo*K; for tau >= 0.5 a best
    singleton already meets the bound.
    """
    if v <= 0:
        raise ValueError(f"v must be positive, got {v}")
    if tau >= 0.5:
        return best_singleton(instance, instance.K, session=session)
    W_rem = W - c1_lo * instance.K
    if W_rem <= 0:
        raise ValueError(f"remaining width W - c1_lo*K = {W_rem} must be positive")
    sol = simple_knapsack(instance, (1 - tau) * v, W_rem, eps, session=session)
    sol.branch = "ignore-large"
    return sol


def approx_039(instance: Instance, v: float, eps: float) -> Solution:
    """0.39-ratio driver: plain density rounds cover a small largest item,
    otherwise drop the guessed large item and fill around it; a best singleton
    covers the case where one item carries the value."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    session = StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    pool = CandidatePool(session, instance.cost_of, instance.K)
    if v <= 0 or instance.K == 0 or instance.n == 0:
        return _finish(instance, meter, pool, "approx-039")
    ctx = Ctx(session, instance.oracle, instance.cost_of, instance.K, eps)
    K = instance.K

    jobs = []
    t_simple = ctx.task(v, K, label="039/simple")
    jobs.append(t_simple)
    sing = MaxSingletonJob(instance.oracle, instance.cost_of, K, label="039/singleton")
    jobs.append(sing)
    ignores = []
    for w in size_windows(0.505, 1.0, eps, K):
        rem = K - w.lo * K
        if rem > 0:
            t = ctx.task((1 - 0.39) * v, rem, label=f"039/ignore-{w.lo:.3f}")
            ignores.append(t)
            jobs.append(t)
    run_jobs(session, jobs)

    pool.sink(frozenset(t_simple.S), t_simple.fS, "039/simple")
    t_simple.release()
    if sing.best_id is not None:
        pool.sink({sing.best_id}, sing.best_val, "039/singleton")
    for t in ignores:
        pool.sink(frozenset(t.S), t.fS, t.label)
        t.release()
    return _finish(instance, meter, pool, "approx-039")


# ---------------------------------------------------------------------------
# Nice-item shortlist


class PickNiceJob(StreamJob):
    """One pass: shortlist items inside a value window and a size window,
    keeping the cheapest item per geometric value level (first arrival wins
    ties). The shortlist is small: one slot per (1+eps) level of the window."""

    def __init__(self, session, oracle, cost_of, f_lo, f_hi, c_lo, c_hi, eps,
                 label="pick-nice"):
        self.session = session
        self.oracle = oracle
        self.cost_of = cost_of
        self.f_lo = f_lo
        self.f_hi = f_hi
        self.c_lo = c_lo
        self.c_hi = c_hi
        self.eps = eps
        self.label = label
        self.levels = {}  # level -> (cost, id, value)

    def offer(self, item):
        e, c = item.id, self.cost_of(item.id)
        if not (self.c_lo - 1e-9 <= c <= self.c_hi + 1e-9):
            return
        fe = self.oracle.marginal(e, frozenset())
        bias = FLOAT_TOL * max(1.0, abs(self.f_hi))
        if not (self.f_lo - bias <= fe <= self.f_hi + bias):
            return
        lvl = 0
        if fe > self.f_lo > 0:
            lvl = int(math.floor(math.log(fe / self.f_lo) / math.log1p(self.eps) + 1e-12))
        cur = self.levels.get(lvl)
        if cur is None or c < cur[0]:
            if cur is not None:
                self.session.release(cur[1])
            self.session.retain(e)
            self.levels[lvl] = (c, e, fe)

    def end_pass(self):
        self.done = True

    def release(self):
        for c, e, fe in self.levels.values():
            self.session.release(e)
        self.levels = {}

    @property
    def candidates(self):
        return [(e, c, fe) for (c, e, fe) in
                (self.levels[k] for k in sorted(self.levels))]


@dataclass
class GoodItemSet:
    candidates: tuple            # item ids, best level first
    info: dict                   # id -> (cost, singleton value)
    report: ResourceReport


def pick_nice_item(instance: Instance, v: float, size_window, tau: float,
                   eps: float, *, session: StreamSession | None = None) -> GoodItemSet:
    """One-pass stand-in shortlist for a large optimal item.

    Every returned item e satisfies tau*v/(1+eps) <= f(e) <= tau*v and
    lo*K <= c(e) <= hi*K; when such an optimal item exists, one shortlisted
    item keeps most of the optimum's value after the swap (the
    ``nice_item_guarantee`` curve).
    """
    if v <= 0:
        raise ValueError(f"v must be positive, got {v}")
    lo, hi = (size_window.lo, size_window.hi) if isinstance(size_window, SizeWindow) \
        else (size_window[0], size_window[1])
    session = session or StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    job = PickNiceJob(session, instance.oracle, instance.cost_of,
                      tau * v / (1 + eps), tau * v,
                      lo * instance.K, hi * instance.K, eps)
    run_jobs(session, [job])
    cands = job.candidates
    job.release()
    return GoodItemSet(tuple(e for e, _, _ in cands),
                       {e: (c, fe) for e, c, fe in cands},
                       meter.report())


# ---------------------------------------------------------------------------
# LargeFirst


def _release_memo(memo):
    """Free the retained storage of memoized shared jobs once all plans using
    the memo are finished (their candidates already live in the pool)."""
    for obj in memo.values():
        if isinstance(obj, (ThresholdTask, PickNiceJob)):
            obj.release()
    memo.clear()


def _plan_large_first(ctx: Ctx, v, W, sink, memo, *, primary_win, use_nice,
                      tau_hi, beta, w1_deduct, w2_deducts, label="lf"):
    """Take a good large item first, then fill the rest around it.

    For each shortlisted item e: the best partner pair {e, e'}, plus density
    fills of the residual problem f(.|e) against the optimum minus its largest
    (and minus its two largest) items.
    """
    K = ctx.capacity
    if use_nice:
        key = ("nice", primary_win, round(tau_hi, 12))
        job = memo.get(key)
        fresh = job is None
        if fresh:
            job = PickNiceJob(ctx.session, ctx.oracle, ctx.cost_of,
                              tau_hi * v / (1 + ctx.eps), tau_hi * v,
                              primary_win.lo * K, primary_win.hi * K,
                              ctx.eps, label=f"{label}/pick")
            memo[key] = job
        if fresh or not job.done:
            yield [job]
        T = [(e, c, fe) for e, c, fe in job.candidates]
    else:
        key = ("first", primary_win)
        job = memo.get(key)
        fresh = job is None
        if fresh:
            job = FirstInWindowJob(ctx.cost_of, primary_win.lo * K, primary_win.hi * K)
            memo[key] = job
        if fresh or not job.done:
            yield [job]
        if job.found is None:
            return
        e = job.found
        fkey = ("fval", e)
        if fkey not in memo:
            memo[fkey] = ctx.oracle.value(frozenset([e]))
        T = [(e, ctx.cost_of(e), memo[fkey])]
    if not T or ctx.stop():
        return

    batch = []
    outputs = []  # (kind, payload)
    for e, ce, fe in T:
        cap_e = K - ce
        pkey = ("partner", e)
        pjob = memo.get(pkey)
        if pjob is None:
            pjob = MaxSingletonJob(ctx.oracle, ctx.cost_of, cap_e,
                                   frozenset([e]), fe, label=f"{label}/pair", skip={e})
            memo[pkey] = pjob
            batch.append(pjob)
        outputs.append(("pair", e, pjob))

        gkey = ("g", e)
        g = memo.get(gkey)
        if g is None:
            g = ConditionedOracle(ctx.oracle, frozenset([e]))
            memo[gkey] = g

        if use_nice:
            p1 = nice_item_guarantee(tau_hi) - tau_hi
            p2 = nice_item_guarantee(tau_hi) - beta
        else:
            p1 = 1.0 - beta
            p2 = 1.0 - 2.0 * beta + fe / v
        W1 = W - w1_deduct * K
        plans = [(p1 * v, W1)]
        for d in w2_deducts:
            W2 = W - d * K
            plans.append((p2 * v, W2))
        for tv, Wl in plans:
            if tv <= 0 or Wl <= 0 or cap_e <= 0:
                continue
            tkey = ("task", e, round(tv, 9), round(Wl, 9))
            t = memo.get(tkey)
            if t is None:
                t = ThresholdTask(ctx.session, g, ctx.cost_of, cap_e, tv, Wl,
                                  ctx.eps, gain_stop=True,
                                  cap_rounds=safety_rounds(ctx.eps),
                                  label=f"{label}/fill")
                memo[tkey] = t
                batch.append(t)
            outputs.append(("fill", e, fe, t))
    if batch:
        yield batch
    for out in outputs:
        if out[0] == "pair":
            _, e, pjob = out
            if pjob.best_id is not None:
                sink({e, pjob.best_id}, pjob.best_val, f"{label}/pair")
        else:
            _, e, fe, t = out
            sink(frozenset(t.S) | {e}, fe + t.fS, f"{label}/fill")


def large_first(instance: Instance, v: float, W: float, tau: float, guesses,
                eps: float, *, use_nice: bool | None = None,
                beta: float = 0.49) -> Solution:
    """Single-guess LargeFirst; ``guesses`` is the (c1, c2) window pair."""
    if v <= 0:
        raise ValueError(f"v must be positive, got {v}")
    w1, w2 = guesses
    w1 = w1 if isinstance(w1, SizeWindow) else SizeWindow(*w1)
    w2 = w2 if isinstance(w2, SizeWindow) else SizeWindow(*w2)
    if use_nice is None:
        use_nice = w1.lo >= 0.5
    session = StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    pool = CandidatePool(session, instance.cost_of, instance.K)
    ctx = Ctx(session, instance.oracle, instance.cost_of, instance.K, eps)
    memo = {}
    plan = _plan_large_first(ctx, v, W, pool.sink, memo, primary_win=w1,
                             use_nice=use_nice, tau_hi=tau, beta=beta,
                             w1_deduct=w1.lo, w2_deducts=[w1.lo + w2.lo],
                             label="large-first")
    drive(session, plan)
    _release_memo(memo)
    return _finish(instance, meter, pool, "large-first")


# ---------------------------------------------------------------------------
# ModifiedSimple


class ModifiedSimpleTask(StreamJob):
    """Density rounds with a pre-round finisher scan.

    Each round first sweeps the stream for a single item that lifts the set to
    half the target value within capacity (taking it ends the run), then runs
    one density-threshold round; the loop stops once c(S) exceeds the size
    threshold. A stall, a sub-eps*v gain, or the round cap also stop it.
    """

    def __init__(self, session, oracle, cost_of, capacity, v, c1_hi, eps, *,
                 cap_rounds=None, label="modified-simple"):
        self.session = session
        self.oracle = oracle
        self.cost_of = cost_of
        self.capacity = capacity
        self.v = v
        self.eps = eps
        self.size_stop = (1.0 - c1_hi) * capacity
        self.cap_rounds = cap_rounds or bounded_rounds(eps)
        self.label = label
        self.mode = "finish"
        self.S = []
        self.sset = frozenset()
        self.fS = 0.0
        self.cS = 0
        self.rounds = 0
        self.alpha = 0.0
        self._f0 = 0.0
        self._accepted = 0
        self._best = None  # (value, cost, id)
        self.finished_by_finisher = False
        # Snapshot of the set at the start of the current round, for the
        # end-state bounds that depend on the last round's haul.
        self.round_start_ids = ()
        self.round_start_value = 0.0
        self.round_start_cost = 0

    def begin_pass(self):
        if self.mode == "finish":
            self.rounds += 1
            self._best = None
            self.round_start_ids = tuple(self.S)
            self.round_start_value = self.fS
            self.round_start_cost = self.cS
        else:
            self._f0 = self.fS
            self._accepted = 0
            self.alpha = ((1.0 - self.eps) * self.v - self.fS) / self.capacity

    def offer(self, item):
        e, c = item.id, self.cost_of(item.id)
        if e in self.sset or self.cS + c > self.capacity:
            return
        if self.mode == "finish":
            val = self.fS + self.oracle.marginal(e, self.sset)
            if self._best is None or (val, -c) > (self._best[0], -self._best[1]):
                self._best = (val, c, e)
        else:
            gain = self.oracle.marginal(e, self.sset)
            if gain >= self.alpha * c - FLOAT_TOL:
                self.S.append(e)
                self.sset = self.sset | {e}
                self.fS += gain
                self.cS += c
                self._accepted += 1
                self.session.retain(e)

    def end_pass(self):
        if self.mode == "finish":
            if self._best is not None and self._best[0] >= 0.5 * self.v - FLOAT_TOL:
                val, c, e = self._best
                self.S.append(e)
                self.sset = self.sset | {e}
                self.fS = val
                self.cS += c
                self.session.retain(e)
                self.finished_by_finisher = True
                self.done = True
            else:
                self.mode = "collect"
            return
        gain = self.fS - self._f0
        if self.cS > self.size_stop:
            self.done = True
        elif self._accepted == 0:
            self.done = True
        elif gain < self.eps * self.v:
            self.done = True
        elif self.rounds >= self.cap_rounds:
            self.done = True
        else:
            self.mode = "finish"

    def release(self):
        for e in self.S:
            self.session.release(e)
        self.S = []


def modified_simple(instance: Instance, v: float, c1_hi: float, eps: float, *,
                    session: StreamSession | None = None) -> Solution:
    if v <= 0:
        raise ValueError(f"v must be positive, got {v}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    session = session or StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    task = ModifiedSimpleTask(session, instance.oracle, instance.cost_of,
                              instance.K, v, c1_hi, eps)
    run_jobs(session, [task])
    ids = frozenset(task.S)
    task.release()
    val = instance.oracle.value(ids)
    return Solution(ids, val, meter.report(), "modified-simple",
                    {"rounds": task.rounds,
                     "finisher": task.finished_by_finisher,
                     "last_round_start_ids": task.round_start_ids,
                     "last_round_start_value": task.round_start_value,
                     "last_round_start_cost": task.round_start_cost})


# ---------------------------------------------------------------------------
# Heavy pairs (two large items carrying the value)


class RedBucketsJob(StreamJob):
    """Pass 1: per size threshold t, shortlist items with t <= c(e) <= K-t in
    the value window, cheapest per geometric value level."""

    label = "heavy-pair/buckets"

    def __init__(self, session, oracle, cost_of, K, f_lo, f_hi, eps):
        self.session = session
        self.oracle = oracle
        self.cost_of = cost_of
        self.K = K
        self.f_lo = f_lo
        self.f_hi = f_hi
        self.eps = eps
        self.buckets = {t: {} for t in range(1, K // 2 + 1)}

    def offer(self, item):
        e, c = item.id, self.cost_of(item.id)
        top = min(c, self.K - c)
        if top < 1:
            return
        fe = self.oracle.marginal(e, frozenset())
        bias = FLOAT_TOL * max(1.0, abs(self.f_hi))
        if not (self.f_lo - bias <= fe <= self.f_hi + bias):
            return
        lvl = 0
        if fe > self.f_lo > 0:
            lvl = int(math.floor(math.log(fe / self.f_lo) / math.log1p(self.eps) + 1e-12))
        for t in range(1, min(top, self.K // 2) + 1):
            cur = self.buckets[t].get(lvl)
            if cur is None or c < cur[0]:
                if cur is not None:
                    self.session.release(cur[1])
                self.buckets[t][lvl] = (c, e, fe)
                self.session.retain(e)

    def end_pass(self):
        self.done = True

    def release(self):
        for b in self.buckets.values():
            for c, e, fe in b.values():
                self.session.release(e)
            b.clear()

    @property
    def max_bucket(self) -> int:
        return max((len(b) for b in self.buckets.values()), default=0)


class PairScanJob(StreamJob):
    """Pass 2: match each arriving item against the bucket of its own size."""

    label = "heavy-pair/scan"

    def __init__(self, oracle, cost_of, K, buckets):
        self.oracle = oracle
        self.cost_of = cost_of
        self.K = K
        self.buckets = buckets
        self.best = None  # (value, cost, ids)

    def offer(self, item):
        e, c = item.id, self.cost_of(item.id)
        bucket = self.buckets.get(c)
        if not bucket:
            return
        for c2, e2, f2 in bucket.values():
            if e2 == e or c + c2 > self.K:
                continue
            pair = frozenset((e, e2))
            val = self.oracle.value(pair)
            tc = c + c2
            if self.best is None or (val, -tc, tuple(sorted(pair))) > \
                    (self.best[0], -self.best[1], tuple(sorted(self.best[2]))):
                self.best = (val, tc, pair)

    def end_pass(self):
        self.done = True


def _plan_heavy_pair(ctx: Ctx, v_prime, sink):
    K = int(ctx.capacity)
    buckets = RedBucketsJob(ctx.session, ctx.oracle, ctx.cost_of, K,
                            v_prime / 3.0, 2.0 * v_prime / 3.0, ctx.eps)
    yield [buckets]
    scan = PairScanJob(ctx.oracle, ctx.cost_of, K, buckets.buckets)
    yield [scan]
    if scan.best is not None:
        sink(scan.best[2], scan.best[0], "heavy-pair")
    buckets.release()
    return buckets.max_bucket


def heavy_pair(instance: Instance, v_prime: float, eps: float) -> Solution:
    """Two passes; finds a pair approximating the best two-item value.

    When the two largest optimal items jointly reach v', the returned pair is
    within 2/3 - O(eps) of v'.
    """
    if v_prime <= 0:
        raise ValueError(f"v_prime must be positive, got {v_prime}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    session = StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    pool = CandidatePool(session, instance.cost_of, instance.K)
    ctx = Ctx(session, instance.oracle, instance.cost_of, instance.K, eps)
    width = drive(session, _plan_heavy_pair(ctx, v_prime, pool.sink))
    sol = _finish(instance, meter, pool, "heavy-pair")
    sol.meta["max_bucket"] = width
    return sol


# ---------------------------------------------------------------------------
# Near-full pair case (the two largest optimal items nearly fill the knapsack)


def _plan_near_full(ctx: Ctx, v, sink):
    yield from parallel([
        _plan_heavy_pair(ctx, 0.75 * v, sink),
        _plan_singleton(ctx, sink, "near-full/singleton"),
        _plan_simple(ctx, 0.5 * v, math.sqrt(ctx.eps) * ctx.capacity, sink,
                     "near-full/huge-item"),
        _plan_prepack(ctx, v, sink),
    ])


def _plan_singleton(ctx: Ctx, sink, label):
    job = MaxSingletonJob(ctx.oracle, ctx.cost_of, ctx.capacity, label=label)
    yield [job]
    if job.best_id is not None:
        sink({job.best_id}, job.best_val, label)


def _plan_simple(ctx: Ctx, v, W, sink, label, capacity=None):
    if v <= 0 or W <= 0:
        return
    t = ctx.task(v, W, capacity=capacity, label=label)
    yield [t]
    sink(frozenset(t.S), t.fS, label)
    t.release()


def _plan_prepack(ctx: Ctx, v, sink):
    """Pack the small optimal items into a sqrt(eps) slice, then, if no single
    item finishes the job, pack the same dust again on the residual value."""
    eps, K = ctx.eps, ctx.capacity
    t = ctx.task(0.25 * v, eps * K, capacity=math.sqrt(eps) * K,
                 label="near-full/prepack")
    yield [t]
    Y, fY, cY = frozenset(t.S), t.fS, t.cS
    sink(Y, fY, "near-full/prepack")
    fin = MaxSingletonJob(ctx.oracle, ctx.cost_of, K - cY, Y, fY,
                          label="near-full/finisher")
    yield [fin]
    if fin.best_id is not None:
        sink(Y | {fin.best_id}, fin.best_val, "near-full/finisher")
    if fY > 0 and K - cY > 0:
        g = ConditionedOracle(ctx.oracle, Y)
        t2 = ThresholdTask(ctx.session, g, ctx.cost_of, K - cY, fY, eps * K,
                           eps, gain_stop=True, cap_rounds=safety_rounds(eps),
                           label="near-full/repack")
        yield [t2]
        sink(Y | frozenset(t2.S), fY + t2.fS, "near-full/repack")
        t2.release()
    t.release()


def near_full_pair_case(instance: Instance, v: float, eps: float) -> Solution:
    """Branch battery for optima whose two largest items nearly fill K."""
    if v <= 0:
        raise ValueError(f"v must be positive, got {v}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    session = StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    pool = CandidatePool(session, instance.cost_of, instance.K)
    ctx = Ctx(session, instance.oracle, instance.cost_of, instance.K, eps)
    drive(session, _plan_near_full(ctx, v, pool.sink))
    return _finish(instance, meter, pool, "near-full")


# ---------------------------------------------------------------------------
# The 0.46 battery against an arbitrary target subset


def _plan_046_target(ctx: Ctx, v, W, sink, *, include_near_full=True, label="046"):
    """Everything needed for a 0.46-quality approximation of a target set X
    with v <= f(X), c(X) <= W <= capacity, run as one batch of parallel plans."""
    if v <= 0 or W <= 0 or ctx.stop():
        return
    children = [_plan_core_046(ctx, v, W, sink, label)]
    if include_near_full:
        children.append(_plan_near_full(ctx, v, sink))
    yield from parallel(children)


def _plan_core_046(ctx: Ctx, v, W, sink, label):
    eps, K = ctx.eps, ctx.capacity
    jobs = []
    t_simple = ctx.task(v, W, label=f"{label}/simple")
    jobs.append(t_simple)
    sing = MaxSingletonJob(ctx.oracle, ctx.cost_of, K, label=f"{label}/singleton")
    jobs.append(sing)

    low_wins = size_windows(0.383, 0.5, eps, K)
    high_wins = size_windows(0.5, 1.0, eps, K)
    taus_high = value_windows(0.224, 0.49, eps)
    ignores = []
    for w in low_wins:
        rem = W - w.lo * K
        if rem > 0:
            t = ctx.task((1 - 0.272) * v, rem, label=f"{label}/ignore-lo")
            ignores.append(t)
            jobs.append(t)
    for w in high_wins:
        rem = W - w.lo * K
        if rem <= 0:
            continue
        t = ctx.task((1 - 0.224) * v, rem, label=f"{label}/ignore-hi")
        ignores.append(t)
        jobs.append(t)
        for _, tau_hi in taus_high:
            if tau_hi < 0.5:
                t = ctx.task((1 - tau_hi) * v, rem, label=f"{label}/ignore-tau")
                ignores.append(t)
                jobs.append(t)
    yield jobs

    pool_feed = [(frozenset(t_simple.S), t_simple.fS, t_simple.label)]
    t_simple.release()
    if sing.best_id is not None:
        pool_feed.append(({sing.best_id}, sing.best_val, sing.label))
    for t in ignores:
        pool_feed.append((frozenset(t.S), t.fS, t.label))
        t.release()
    for ids, val, lab in pool_feed:
        sink(ids, val, lab)
    if ctx.stop():
        return

    c2_wins = size_windows(1.0 / K, 0.5, eps, K)
    memo = {}
    lf_plans = []
    for w1 in low_wins:
        w2d = [w1.lo + w2.lo for w2 in c2_wins
               if w2.lo <= w1.hi + 1e-9 and W - (w1.lo + w2.lo) * K > 0]
        lf_plans.append(_plan_large_first(
            ctx, v, W, sink, memo, primary_win=w1, use_nice=False, tau_hi=0.0,
            beta=0.46, w1_deduct=w1.lo, w2_deducts=w2d, label=f"{label}/lf-lo"))
    for w1 in high_wins:
        w2d = [w1.lo + w2.lo for w2 in c2_wins
               if w2.lo <= w1.hi + 1e-9 and W - (w1.lo + w2.lo) * K > 0]
        for _, tau_hi in taus_high:
            lf_plans.append(_plan_large_first(
                ctx, v, W, sink, memo, primary_win=w1, use_nice=True,
                tau_hi=tau_hi, beta=0.49, w1_deduct=w1.lo, w2_deducts=w2d,
                label=f"{label}/lf-hi"))
    yield from parallel(lf_plans)
    _release_memo(memo)


def approx_046(instance: Instance, eps: float, *, v: float | None = None) -> Solution:
    """0.46-ratio driver; guesses the value (unless given) and runs the full
    branch battery for every guess within shared passes."""
    return _run_driver(instance, eps, v, 0.46, "approx-046", _plan_046_for_v)


def _plan_046_for_v(ctx: Ctx, v, sink):
    yield from _plan_046_target(ctx, v, ctx.capacity, sink)


# ---------------------------------------------------------------------------
# LargeW: the target may be wider than the residual capacity


def _plan_large_w(ctx: Ctx, v_prime, eta, sink, label="large-w"):
    """Case battery for approximating X with c(X) <= eta * capacity,
    1 <= eta <= 2.5; recurses by peeling the largest target item."""
    if v_prime <= 0 or eta > 2.5 + 1e-9 or ctx.stop():
        return
    K = ctx.capacity
    children = [_plan_singleton(ctx, sink, f"{label}/singleton")]
    if eta <= 1.0 + 1e-9:
        children.append(_plan_046_target(ctx, v_prime, min(eta, 1.0) * K, sink,
                                         include_near_full=False, label=f"{label}/046"))
    else:
        children.append(_plan_simple(ctx, v_prime, eta * K, sink, f"{label}/simple"))
        if eta <= 1.4:
            children.append(_plan_046_target(ctx, (1 - 0.315) * v_prime, K, sink,
                                             include_near_full=False, label=f"{label}/peel"))
        elif eta <= 1.5:
            children.append(_plan_046_target(ctx, (1 - 0.283) * v_prime, K, sink,
                                             include_near_full=False, label=f"{label}/peel"))
        elif eta <= 2.0:
            children.append(_plan_large_w(ctx, (1 - 0.22) * v_prime, 1.5, sink,
                                          label=f"{label}/peel"))
        else:
            children.append(_plan_large_w(ctx, (1 - 0.18) * v_prime, 2.0, sink,
                                          label=f"{label}/peel"))
    yield from parallel(children)


def large_w(instance: Instance, v_prime: float, eta: float, eps: float) -> Solution:
    """Approximate a target of width eta*K (eta <= 2.5) within capacity K.

    Bucket guarantees (minus O(eps)): 0.315 on (1, 1.4], 0.283 on (1.4, 1.5],
    0.218 on (1.5, 2], 0.178 on (2, 2.5]; eta <= 1 falls back to the 0.46
    battery.
    """
    if v_prime <= 0:
        raise ValueError(f"v_prime must be positive, got {v_prime}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    if eta <= 0 or eta > 2.5:
        raise ValueError(f"eta must be in (0, 2.5], got {eta}")
    session = StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    pool = CandidatePool(session, instance.cost_of, instance.K)
    ctx = Ctx(session, instance.oracle, instance.cost_of, instance.K, eps)
    drive(session, _plan_large_w(ctx, v_prime, eta, pool.sink))
    return _finish(instance, meter, pool, "large-w")


# ---------------------------------------------------------------------------
# The 0.5 driver


def _plan_05_for_v(ctx: Ctx, v, sink):
    eps, K = ctx.eps, ctx.capacity
    children = [
        _plan_near_full(ctx, v, sink),
        _plan_simple(ctx, v, K, sink, "05/simple"),
        _plan_singleton(ctx, sink, "05/singleton"),
    ]
    # Small largest item or low-value largest item: drop-the-largest fills.
    for w in size_windows(0.3, 1.0, eps, K):
        rem = K - w.lo * K
        if rem > 0:
            children.append(_plan_simple(ctx, (1 - 0.15) * v, rem, sink, "05/ignore-15"))

    memo = {}
    c2_wins = size_windows(1.0 / K, 0.5, eps, K)
    # Large item carrying substantial value: LargeFirst batteries.
    for w1 in size_windows(0.5, 1.0, eps, K):
        w2d = [w1.lo + w2.lo for w2 in c2_wins if K - (w1.lo + w2.lo) * K > 0]
        for _, tau_hi in value_windows(0.362, 0.5, eps):
            children.append(_plan_large_first(
                ctx, v, K, sink, memo, primary_win=w1, use_nice=True,
                tau_hi=tau_hi, beta=0.5, w1_deduct=w1.lo, w2_deducts=w2d,
                label="05/lf-hi"))
    for w1 in size_windows(0.3, 0.5, eps, K):
        w2d = [w1.lo + w2.lo for w2 in c2_wins
               if w2.lo <= w1.hi + 1e-9 and K - (w1.lo + w2.lo) * K > 0]
        children.append(_plan_large_first(
            ctx, v, K, sink, memo, primary_win=w1, use_nice=False, tau_hi=0.0,
            beta=0.5, w1_deduct=w1.lo, w2_deducts=w2d, label="05/lf-mid"))
    # Second-largest item carrying the value: swap the roles of o1 and o2.
    c1_wins_all = size_windows(0.3, 1.0, eps, K)
    for w2 in size_windows(0.09, 0.5, eps, K):
        w2d = [w1.lo + w2.lo for w1 in c1_wins_all
               if w1.hi >= w2.lo - 1e-9 and K - (w1.lo + w2.lo) * K > 0]
        children.append(_plan_large_first(
            ctx, v, K, sink, memo, primary_win=w2, use_nice=False, tau_hi=0.0,
            beta=0.5, w1_deduct=w2.lo, w2_deducts=w2d, label="05/lf-swap"))

    # Dense small items first (the two largest leave little room).
    for w1 in size_windows(0.5, 1.0, eps, K):
        for w2 in c2_wins:
            if 1 - w1.hi >= 1.98 * (1 - w1.hi - w2.hi) and w2.hi <= w1.hi + 1e-9:
                children.append(_plan_small_first(ctx, v, sink, w1, w2,
                                                  factor=1.98, coef=0.33,
                                                  label="05/sf198"))
    for w1 in size_windows(0.3, 0.5, eps, K):
        for w2 in size_windows(0.235, 0.5, eps, K):
            if 1 - w1.hi >= 2.4 * (1 - w1.hi - w2.hi) and w2.hi <= w1.hi + 1e-9:
                children.append(_plan_small_first(ctx, v, sink, w1, w2,
                                                  factor=2.4, coef=0.386,
                                                  label="05/sf24"))

    # Otherwise: modified density rounds, then fill the leftover space.
    for w1 in size_windows(0.3, 0.5, eps, K):
        children.append(_plan_packing_later(ctx, v, sink, w1))

    yield from parallel(children)
    _release_memo(memo)


def _plan_small_first(ctx: Ctx, v, sink, w1, w2, *, factor, coef, label):
    """Collect the dense small items under a reduced cap, then treat the rest
    as a fresh problem on the leftover space."""
    eps, K = ctx.eps, ctx.capacity
    cs_lo = 1.0 - w1.hi - w2.hi
    cs_hi = 1.0 - w1.lo - w2.lo
    if cs_lo <= 1e-12 or cs_hi <= 0:
        return
    cap1 = factor * cs_lo * K
    if cap1 < 1:
        return
    t = ctx.task(coef * v, cs_hi * K, capacity=min(cap1, K), label=f"{label}/prepack")
    yield [t]
    Y, fY, cY = frozenset(t.S), t.fS, t.cS
    t.release()
    sink(Y, fY, f"{label}/prepack")
    if ctx.stop():
        return
    Kp = K - cY
    fin = MaxSingletonJob(ctx.oracle, ctx.cost_of, Kp, Y, fY, label=f"{label}/finisher")
    W1 = (1.0 - w1.lo) * K
    g = ConditionedOracle(ctx.oracle, Y)
    gctx = ctx.sub(g, Kp)
    batch = [fin]
    t_fill = None
    if Kp > 0 and W1 > 0:
        t_fill = gctx.task(0.5 * v, W1, label=f"{label}/fill")
        batch.append(t_fill)
    sub_sink = sink if not Y else _anchored(sink, Y, fY)
    children = []
    if factor == 1.98:
        if 0 < W1 <= Kp:
            children.append(_plan_046_target(gctx, 0.5 * v, W1, sub_sink,
                                             include_near_full=False,
                                             label=f"{label}/046"))
    else:
        eta = W1 / Kp if Kp > 0 else math.inf
        if eta <= 1.0:
            children.append(_plan_046_target(gctx, 0.5 * v, W1, sub_sink,
                                             include_near_full=False,
                                             label=f"{label}/046"))
        else:
            Wd = cs_hi * K
            for _, tau_hi in value_windows(0.1, 0.7, eps):
                tv = 0.5 * (1 - tau_hi) * v
                if tv > 0 and Wd > 0 and Kp > 0:
                    batch.append(gctx.task(tv, Wd, label=f"{label}/dense"))
            if 0 < Wd <= Kp:
                children.append(_plan_046_target(gctx, 0.5 * (1 - 0.314) * v, Wd,
                                                 sub_sink, include_near_full=False,
                                                 label=f"{label}/046d"))
    yield batch
    if fin.best_id is not None:
        sink(Y | {fin.best_id}, fin.best_val, f"{label}/finisher")
    for job in batch:
        if isinstance(job, ThresholdTask):
            sink(Y | frozenset(job.S), fY + job.fS, job.label)
            job.release()
    yield from parallel(children)


def _anchored(sink, anchor, f_anchor):
    anchor = frozenset(anchor)

    def sub_sink(ids, value, label=""):
        sink(anchor | frozenset(ids), f_anchor + value, label)

    return sub_sink


def _plan_packing_later(ctx: Ctx, v, sink, w1):
    """Modified density rounds build a good set Y; the leftover space is then
    packed against the optimum minus its largest one, two, or three items,
    depending on how much room Y left."""
    eps, K = ctx.eps, ctx.capacity
    ms = ModifiedSimpleTask(ctx.session, ctx.oracle, ctx.cost_of, K, v, w1.hi,
                            eps, label="05/modified")
    t_short = None
    rem = K - w1.lo * K
    if rem > 0:
        t_short = ctx.task((1 - 0.307) * v, rem, label="05/ignore-307")
    yield [ms, t_short] if t_short else [ms]
    Y, fY, cY = frozenset(ms.S), ms.fS, ms.cS
    ms.release()
    sink(Y, fY, "05/modified")
    if t_short is not None:
        sink(frozenset(t_short.S), t_short.fS, t_short.label)
        t_short.release()
    if ms.finished_by_finisher or cY >= K or fY >= 0.5 * v or ctx.stop():
        return

    fin = MaxSingletonJob(ctx.oracle, ctx.cost_of, K - cY, Y, fY,
                          label="05/modified-finisher")
    yield [fin]
    if fin.best_id is not None:
        sink(Y | {fin.best_id}, fin.best_val, "05/modified-finisher")

    Kp = K - cY
    g = ConditionedOracle(ctx.oracle, Y)
    gctx = ctx.sub(g, Kp)
    sub_sink = _anchored(sink, Y, fY)
    children = []

    def residual(vp, Wp, tag):
        if vp <= 0 or Wp <= 0 or Kp <= 0:
            return
        eta = Wp / Kp
        if eta <= 1.0:
            children.append(_plan_046_target(gctx, vp, Wp, sub_sink,
                                             include_near_full=False,
                                             label=f"05/{tag}-046"))
        elif eta <= 2.5:
            children.append(_plan_large_w(gctx, vp, eta, sub_sink,
                                          label=f"05/{tag}-lw"))

    residual(0.693 * v - fY, (1.0 - w1.lo) * K, "case1")
    for w2 in size_windows(0.09, 0.5, eps, K):
        if w2.hi > w1.hi + 1e-9 or cY <= (1 - w2.hi) * K:
            continue
        residual(0.54 * v - fY, (1.0 - w1.lo - w2.lo) * K, "case2")
        for w3 in size_windows(1.0 / K, 1.0, eps, K):
            if w3.hi > w2.hi + 1e-9 or cY <= (1 - w3.hi) * K:
                continue
            Wp = (1.0 - w1.lo - w2.lo - w3.lo) * K
            if 0 < Wp <= Kp:
                children.append(_plan_046_target(gctx, 0.567 * v - fY, Wp,
                                                 sub_sink, include_near_full=False,
                                                 label="05/case3-046"))
    yield from parallel(children)


def approx_05(instance: Instance, eps: float, *, v: float | None = None) -> Solution:
    """0.5-ratio driver: orchestrates every branch family over shared passes."""
    return _run_driver(instance, eps, v, 0.5, "approx-05", _plan_05_for_v)


# ---------------------------------------------------------------------------
# Shared driver harness


def _run_driver(instance, eps, v, target_ratio, name, plan_for_v) -> Solution:
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    session = StreamSession(instance)
    meter = RunMeter(session, instance.oracle)
    pool = CandidatePool(session, instance.cost_of, instance.K)
    if instance.K == 0 or instance.n == 0:
        return _finish(instance, meter, pool, name)
    if v is not None:
        grid = [v] if v > 0 else []
        width = 0
    else:
        est = single_pass_estimate(instance, eps, session=session)
        grid = list(est.grid)
        width = est.parallel_width
    if not grid:
        sol = _finish(instance, meter, pool, name)
        sol.meta["guesses"] = 0
        return sol

    children = []
    for vg in grid:
        target = target_ratio * vg

        def make_stop(tgt):
            return lambda: pool.best_value >= tgt - 1e-12

        ctx = Ctx(session, instance.oracle, instance.cost_of, instance.K, eps,
                  stop=make_stop(target))
        children.append(plan_for_v(ctx, vg, pool.sink))
    drive(session, parallel(children))
    sol = _finish(instance, meter, pool, name)
    sol.meta["guesses"] = len(grid)
    sol.meta["estimate_width"] = width
    return sol
