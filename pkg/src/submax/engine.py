"""Shared-pass execution engine.

Every algorithm is decomposed into stream jobs: objects that receive the items
of one pass in order and keep O(K) state. Jobs can span several passes (one
threshold round per pass). A *plan* is a generator that yields batches of jobs;
the scheduler runs each batch to completion, giving every job in the batch the
same physical passes. Running many guesses "in parallel" therefore costs the
maximum number of passes over the batch, not the sum, which is what keeps the
multi-guess drivers within a constant multiple of 1/eps passes.
"""

from __future__ import annotations

from .core import FLOAT_TOL, ValueOracle
from .stream import StreamSession


class InvariantViolation(AssertionError):
    """A live algorithm invariant failed; indicates a bug, not bad input."""


class ConditionedOracle(ValueOracle):
    """g(S) = f(S | anchor) = f(anchor + S) - f(anchor), sharing f's counter.

    A g-evaluation costs one base call. Construction charges the single call
    needed for f(anchor).
    """

    def __init__(self, base: ValueOracle, anchor):
        super().__init__(base.ids)
        self.base = base
        self.anchor = frozenset(anchor)
        base._count()
        self.f_anchor = base._raw_value(self.anchor)
        self.integral = base.integral

    @property
    def calls(self) -> int:
        return self.base.calls

    def _count(self, k: int = 1):
        self.base._count(k)

    def _raw_value(self, S: frozenset) -> float:
        return self.base._raw_value(self.anchor | S) - self.f_anchor


class StreamJob:
    """One logical sub-algorithm consuming shared passes."""

    done = False
    label = ""

    def begin_pass(self):
        pass

    def offer(self, item):
        raise NotImplementedError

    def end_pass(self):
        pass


def run_jobs(session: StreamSession, jobs):
    """Run the batch until every job is done, sharing one pass per round.

    Jobs may be yielded by several cooperating plans; duplicates are run once.
    """
    seen = set()
    uniq = []
    for j in jobs:
        if id(j) not in seen:
            seen.add(id(j))
            uniq.append(j)
    pending = [j for j in uniq if not j.done]
    while pending:
        for j in pending:
            j.begin_pass()
        for item in session.open_pass():
            session.retain(item.id)
            for j in pending:
                if not j.done:
                    j.offer(item)
            session.release(item.id)
        for j in pending:
            j.end_pass()
        pending = [j for j in pending if not j.done]


def drive(session: StreamSession, plan):
    """Run a plan generator to completion and return its result."""
    try:
        while True:
            batch = plan.send(None)
            if batch:
                run_jobs(session, batch)
    except StopIteration as stop:
        return stop.value


def parallel(plans):
    """Advance child plans in lockstep so their job batches share passes.

    Yields merged batches; returns the children's results in order.
    """
    plans = list(plans)
    results = [None] * len(plans)
    batches = {}
    live = {}
    for i, g in enumerate(plans):
        live[i] = g
    for i, g in list(live.items()):
        try:
            batches[i] = g.send(None)
        except StopIteration as stop:
            results[i] = stop.value
            del live[i]
    while live:
        merged = [j for i in sorted(live) for j in (batches.get(i) or [])]
        if merged:
            yield merged
        for i, g in list(live.items()):
            try:
                batches[i] = g.send(None)
            except StopIteration as stop:
                results[i] = stop.value
                del live[i]
                batches.pop(i, None)
    return results


class ThresholdTask(StreamJob):
    """Dynamic-threshold collection: one round per pass.

    Each round recomputes alpha = ((1-eps)*v - f(S0)) / W from the round-start
    value and accepts an arriving item e iff f(e|S) >= alpha*c(e) and the
    capacity allows it (for unit costs this is the plain marginal-vs-alpha
    rule). Equality is taken; float comparisons are biased toward acceptance.

    Stop rules, checked at the end of each round:
      * full:       c(S) reached the capacity (cardinality semantics),
      * size_stop:  c(S) exceeded a given bound,
      * stall:      the round accepted nothing (no future round can differ),
      * gain_stop:  the round gained less than eps*v,
      * cap_rounds: round budget exhausted.
    """

    def __init__(self, session, oracle, cost_of, capacity, v, W, eps, *,
                 stop_when_full=False, gain_stop=True, size_stop=None,
                 cap_rounds=None, trace=None, label=""):
        if not 0 < eps < 1:
            raise ValueError(f"eps must be in (0,1), got {eps}")
        if W <= 0:
            raise ValueError(f"W must be positive, got {W}")
        self.session = session
        self.oracle = oracle
        self.cost_of = cost_of
        self.capacity = capacity
        self.v = v
        self.W = W
        self.eps = eps
        self.stop_when_full = stop_when_full
        self.gain_stop = gain_stop
        self.size_stop = size_stop
        self.cap_rounds = cap_rounds
        self.trace = trace
        self.label = label

        self.S = []
        self.sset = frozenset()
        self.fS = 0.0
        self.cS = 0
        self.rounds = 0
        self.alpha = 0.0
        self._f0 = 0.0
        self._c0 = 0
        self._accepted = 0
        if capacity <= 0:
            self.done = True

    def begin_pass(self):
        self.rounds += 1
        self._f0 = self.fS
        self._c0 = self.cS
        self._accepted = 0
        self.alpha = ((1.0 - self.eps) * self.v - self._f0) / self.W

    def offer(self, item):
        e, c = item.id, self.cost_of(item.id)
        if e in self.sset:
            return
        if self.cS + c > self.capacity:
            self._trace(e, None, 0)
            return
        gain = self.oracle.marginal(e, self.sset)
        if gain >= self.alpha * c - FLOAT_TOL:
            self.S.append(e)
            self.sset = self.sset | {e}
            self.fS += gain
            self.cS += c
            self._accepted += 1
            self.session.retain(e)
            self._trace(e, gain, 1)
        else:
            self._trace(e, gain, 0)

    def end_pass(self):
        gain = self.fS - self._f0
        added_cost = self.cS - self._c0
        # Live check: the round's haul T' satisfies f(T'|S0) >= alpha*c(T').
        slack = 1e-9 * max(1.0, abs(self.v))
        if gain < self.alpha * added_cost - slack:
            raise InvariantViolation(
                f"round gain {gain} < alpha*c(T') = {self.alpha * added_cost}")
        if self.stop_when_full and self.cS >= self.capacity:
            self.done = True
        elif self.size_stop is not None and self.cS > self.size_stop:
            self.done = True
        elif self._accepted == 0:
            self.done = True
        elif self.gain_stop and gain < self.eps * self.v:
            self.done = True
        elif self.cap_rounds is not None and self.rounds >= self.cap_rounds:
            self.done = True

    def release(self):
        for e in self.S:
            self.session.release(e)
        self.S = []

    def _trace(self, e, marginal, taken):
        if self.trace is not None:
            m = "na" if marginal is None else repr(marginal)
            self.trace.append(
                f"pass={self.session.passes} round={self.rounds} item={e} "
                f"alpha={self.alpha!r} marginal={m} taken={taken}")


class MaxSingletonJob(StreamJob):
    """Single pass: best item to add to ``base``, cost of the addition <= budget.

    Ties break toward smaller cost, then first arrival.
    """

    def __init__(self, oracle, cost_of, budget, base=frozenset(), f_base=0.0,
                 label="singleton", skip=frozenset()):
        self.oracle = oracle
        self.cost_of = cost_of
        self.budget = budget
        self.base = frozenset(base)
        self.f_base = f_base
        self.label = label
        self.skip = frozenset(skip) | self.base
        self.best_id = None
        self.best_val = None
        self.best_cost = None

    def offer(self, item):
        e = item.id
        if e in self.skip:
            return
        c = self.cost_of(e)
        if c > self.budget:
            return
        val = self.f_base + self.oracle.marginal(e, self.base)
        if (self.best_val is None or val > self.best_val
                or (val == self.best_val and c < self.best_cost)):
            self.best_id, self.best_val, self.best_cost = e, val, c

    def end_pass(self):
        self.done = True


class FirstInWindowJob(StreamJob):
    """Single pass, zero oracle calls: first item whose cost is in [lo, hi]."""

    def __init__(self, cost_of, lo, hi, label="first-in-window"):
        self.cost_of = cost_of
        self.lo = lo
        self.hi = hi
        self.label = label
        self.found = None

    def offer(self, item):
        if self.found is not None:
            return
        c = self.cost_of(item.id)
        if self.lo - 1e-9 <= c <= self.hi + 1e-9:
            self.found = item.id

    def end_pass(self):
        self.done = True
