"""Pass-based replay of the item sequence with pass/space/call accounting.

A session replays the instance's items in identical order on every pass and is
single-consumer: opening a pass while another is open is a usage error.
Algorithms register the ids they hold via ``retain``/``release``; the session
tracks the current gauge and its peak. When several logical sub-algorithms run
in parallel they share one physical pass, and ids held by k sub-algorithms
count k times, which is exactly the streaming space model.
"""

from __future__ import annotations

import time

from .core import Instance, ResourceReport


class NestedPassError(RuntimeError):
    """open_pass called while a pass is already being consumed."""


class StreamSession:
    def __init__(self, instance: Instance):
        self.instance = instance
        self.passes = 0
        self.stored_now = 0
        self.peak_stored = 0
        self._in_pass = False

    def open_pass(self):
        """Yield the items in canonical order; increments the pass counter."""
        if self._in_pass:
            raise NestedPassError("passes are strictly sequential per session")
        self.passes += 1
        self._in_pass = True
        try:
            for item in self.instance.items:
                yield item
        finally:
            self._in_pass = False

    def retain(self, _id=None, k: int = 1):
        self.stored_now += k
        if self.stored_now > self.peak_stored:
            self.peak_stored = self.stored_now

    def release(self, _id=None, k: int = 1):
        self.stored_now -= k
        if self.stored_now < 0:
            raise RuntimeError("release without matching retain")


class RunMeter:
    """Snapshot oracle calls / passes / wall time around one algorithm run."""

    def __init__(self, session: StreamSession, oracle):
        self.session = session
        self.oracle = oracle
        self._calls0 = oracle.calls
        self._passes0 = session.passes
        self._t0 = time.perf_counter()

    def report(self) -> ResourceReport:
        return ResourceReport(
            passes=self.session.passes - self._passes0,
            oracle_calls=self.oracle.calls - self._calls0,
            peak_stored=self.session.peak_stored,
            wall_time_ms=(time.perf_counter() - self._t0) * 1000.0,
        )
