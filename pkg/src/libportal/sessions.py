"""Random-token session tracking with sliding expiry.

Tokens are 128-bit values from the OS CSPRNG, never derived from the
principal they map to. Sessions live in process memory; invalidation is
immediate and per-token.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from typing import Callable


@dataclass(frozen=True)
class Session:
    token: str
    principal: str
    issued_at: datetime
    expires_at: datetime


class SessionManager:
    def __init__(self, ttl: timedelta, clock: Callable[[], datetime] | None = None):
        self.ttl = ttl
        self._clock = clock or (lambda: datetime.now(timezone.utc))
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def issue(self, principal: str) -> Session:
        now = self._clock()
        session = Session(
            token=secrets.token_urlsafe(16),
            principal=principal,
            issued_at=now,
            expires_at=now + self.ttl,
        )
        with self._lock:
            self._sessions[session.token] = session
        return session

    def resolve(self, token: str | None) -> Session | None:
        """Valid token -> its session (expiry slides forward); else None."""
        if not token:
            return None
        now = self._clock()
        with self._lock:
            session = self._sessions.get(token)
            if session is None:
                return None
            if session.expires_at <= now:
                del self._sessions[token]
                return None
            session = replace(session, expires_at=now + self.ttl)
            self._sessions[token] = session
            return session

    def invalidate(self, token: str | None) -> None:
        if not token:
            return
        with self._lock:
            self._sessions.pop(token, None)

    def invalidate_principal(self, principal: str) -> None:
        with self._lock:
            stale = [t for t, s in self._sessions.items() if s.principal == principal]
            for token in stale:
                del self._sessions[token]
