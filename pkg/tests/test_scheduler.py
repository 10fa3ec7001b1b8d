import time

from heatstat.scheduler import BatchScheduler, configure_scheduler, get_scheduler, threads_from_env


def test_map_keeps_input_order():
    def slow_square(x):
        time.sleep(0.001 * (5 - x))
        return x * x

    assert BatchScheduler(4).map(slow_square, range(5)) == [0, 1, 4, 9, 16]
    assert BatchScheduler(1).map(slow_square, []) == []


def test_threads_from_env(monkeypatch):
    monkeypatch.delenv("HEATSTAT_THREADS", raising=False)
    assert threads_from_env() == 1
    monkeypatch.setenv("HEATSTAT_THREADS", "3")
    assert threads_from_env() == 3
    monkeypatch.setenv("HEATSTAT_THREADS", "many")
    assert threads_from_env(default=2) == 2
    monkeypatch.setenv("HEATSTAT_THREADS", "0")
    assert threads_from_env() == 1


def test_configure_replaces_global(monkeypatch):
    monkeypatch.delenv("HEATSTAT_THREADS", raising=False)
    scheduler = configure_scheduler(3)
    assert get_scheduler() is scheduler and scheduler.threads == 3
    assert configure_scheduler(None).threads == 1
