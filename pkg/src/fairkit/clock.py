"""Injectable time source so retries and timestamps are testable."""

from __future__ import annotations

import time
from datetime import datetime, timezone


class Clock:
    """Real wall clock. Swap for a fake in tests."""

    def now(self) -> datetime:
        return datetime.now(timezone.utc)

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class FakeClock(Clock):
    """Deterministic clock that advances only when told (or on sleep)."""

    def __init__(self, start: datetime | None = None):
        self.current = start or datetime(2026, 1, 1, tzinfo=timezone.utc)
        self.slept: list[float] = []

    def now(self) -> datetime:
        return self.current

    def sleep(self, seconds: float) -> None:
        from datetime import timedelta

        self.slept.append(seconds)
        self.current += timedelta(seconds=seconds)


SYSTEM_CLOCK = Clock()
