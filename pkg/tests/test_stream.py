import pytest

from submax.engine import run_jobs, StreamJob, ThresholdTask
from submax.stream import NestedPassError, StreamSession


def test_pass_counting_and_order(instance_a):
    s = StreamSession(instance_a)
    assert s.passes == 0
    first = [it.id for it in s.open_pass()]
    assert s.passes == 1
    assert first == ["a", "b", "c", "d"]


def test_replay_determinism(instance_a):
    s = StreamSession(instance_a)
    seqs = [[it.id for it in s.open_pass()] for _ in range(3)]
    assert seqs[0] == seqs[1] == seqs[2]
    assert s.passes == 3


def test_nested_pass_rejected(instance_a):
    s = StreamSession(instance_a)
    it = s.open_pass()
    next(it)
    with pytest.raises(NestedPassError):
        next(s.open_pass())
    it.close()
    # After closing, a fresh pass is fine again.
    list(s.open_pass())


def test_retain_release_gauges(instance_a):
    s = StreamSession(instance_a)
    s.retain("a")
    s.retain("d")
    assert (s.stored_now, s.peak_stored) == (2, 2)
    s.release("d")
    assert (s.stored_now, s.peak_stored) == (1, 2)
    with pytest.raises(RuntimeError):
        s.release("x")
        s.release("x")


def test_simple_task_peak_within_k_plus_one(instance_a):
    # The collection set plus the item under consideration: never above K+1.
    s = StreamSession(instance_a)
    task = ThresholdTask(s, instance_a.oracle, instance_a.cost_of, instance_a.K,
                         6.0, 2, 0.1, stop_when_full=True, gain_stop=False)
    run_jobs(s, [task])
    assert s.peak_stored <= instance_a.K + 1
    task.release()
    assert s.stored_now == 0


def test_shared_jobs_run_once(instance_a):
    # The same job object handed over twice must only consume one slot.
    class CountingJob(StreamJob):
        seen = 0

        def offer(self, item):
            self.seen += 1

        def end_pass(self):
            self.done = True

    s = StreamSession(instance_a)
    j = CountingJob()
    run_jobs(s, [j, j])
    assert j.seen == instance_a.n
    assert s.passes == 1
