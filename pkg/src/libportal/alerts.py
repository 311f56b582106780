"""Current-awareness engine.

Users save profiles (call number ranges plus a delivery mode). On-screen
queries evaluate one profile over a week window chosen on the page; the
weekly job evaluates every email-delivery profile over the previous
complete week and mails a plain-text digest for non-empty results.

Weeks are ISO-8601 weeks with Monday 00:00 boundaries in a single
configured timezone. A window is given in whole weeks relative to the
evaluation instant; ``to_weeks_ago = 0`` means the current partial week
up to now.

Digest dispatch is idempotent per (profile, ISO week): sends are recorded
in a persisted ledger, and re-running the same week sends nothing new.
Transport failures queue the digest for retry on the next run; a run never
aborts wholesale.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from typing import Callable

from . import callno
from .errors import Invalid
from .mail import MailMessage, MailTransport, MailTransportError
from .model import User
from .store import AcquisitionRecord, CAProfile, Delivery, Store

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeWindow:
    """A span of whole ISO weeks, counted backwards from the evaluation time."""

    from_weeks_ago: int
    to_weeks_ago: int

    def __post_init__(self):
        if self.to_weeks_ago < 0 or self.from_weeks_ago < self.to_weeks_ago:
            raise Invalid("window requires from_weeks_ago >= to_weeks_ago >= 0")

    def resolve(self, now: datetime, tz) -> tuple[datetime, datetime]:
        start = week_start(now, tz) - timedelta(weeks=self.from_weeks_ago)
        if self.to_weeks_ago == 0:
            end = now.astimezone(tz)
        else:
            end = week_start(now, tz) - timedelta(weeks=self.to_weeks_ago - 1)
        return start, end


@dataclass(frozen=True)
class AlertItem:
    call_number: str
    author: str
    title: str
    record_url: str


@dataclass(frozen=True)
class AlertResult:
    profile_id: str
    window: TimeWindow
    start: datetime
    end: datetime
    items: tuple[AlertItem, ...]


@dataclass(frozen=True)
class WeeklyReport:
    week: str = ""
    profiles_evaluated: int = 0
    emails_sent: int = 0
    emails_suppressed: int = 0
    duplicates_skipped: int = 0
    retries_queued: int = 0
    retries_sent: int = 0
    busy: bool = False


def week_start(moment: datetime, tz) -> datetime:
    """Monday 00:00 of `moment`'s ISO week, in tz."""
    local = moment.astimezone(tz)
    monday = local.date() - timedelta(days=local.weekday())
    return datetime.combine(monday, time.min, tzinfo=tz)


def iso_week_id(day: date) -> str:
    year, week, _ = day.isocalendar()
    return f"{year}-W{week:02d}"


class AlertEngine:
    def __init__(self, store: Store, transport: MailTransport, *,
                 tz=timezone.utc, mail_from: str = "alerts@localhost",
                 clock: Callable[[], datetime] | None = None):
        self.store = store
        self.transport = transport
        self.tz = tz
        self.mail_from = mail_from
        self._clock = clock or (lambda: datetime.now(timezone.utc))
        self._run_lock = threading.Lock()

    # ------------------------------------------------------------------

    def save_profile(self, user_id: str, range_text: str, delivery: Delivery | str) -> CAProfile:
        """Parse and persist a range profile; parse errors carry an offset."""
        ranges = callno.parse_range_list(range_text)
        return self.store.save_profile(user_id, ranges, Delivery(delivery))

    def run_window_query(self, profile: CAProfile, window: TimeWindow,
                         now: datetime | None = None) -> AlertResult:
        """Acquisitions within the window whose call number matches a range."""
        now = now or self._clock()
        start, end = window.resolve(now, self.tz)
        matched: list[tuple[bytes, date, str, AlertItem]] = []
        for record in self.store.list_acquisitions():
            accessioned = datetime.combine(record.accession_date, time.min, tzinfo=self.tz)
            if not (start <= accessioned < end):
                continue
            parsed = callno.parse_call_number(record.call_number)
            if not any(callno.in_range(parsed, r) for r in profile.ranges):
                continue
            item = AlertItem(
                call_number=callno.format_call_number(parsed),
                author=record.author,
                title=record.title,
                record_url=record.record_url,
            )
            matched.append((callno.sort_key(parsed), record.accession_date, record.title, item))
        matched.sort(key=lambda entry: entry[:3])
        return AlertResult(
            profile_id=profile.id, window=window, start=start, end=end,
            items=tuple(item for *_key, item in matched),
        )

    def format_digest(self, result: AlertResult, user: User) -> MailMessage:
        """One line per item `CALLNO | author | title`, record URL on the next."""
        if not result.items:
            raise Invalid("digest requires a non-empty result")
        profile = self.store.get_profile(result.profile_id)
        week = iso_week_id(result.start.date())
        ranges = callno.format_range_list(list(profile.ranges))
        lines = []
        for item in result.items:
            lines.append(f"{item.call_number} | {item.author} | {item.title}")
            lines.append(item.record_url)
        return MailMessage(
            to_addr=user.email,
            subject=f"New acquisitions {week} for call number ranges {ranges}",
            body="\n".join(lines) + "\n",
            from_addr=self.mail_from,
            spool_name=f"{result.profile_id}_{week}",
        )

    def weekly_run(self, now: datetime | None = None) -> WeeklyReport:
        """Evaluate every email profile over the previous complete week."""
        if not self._run_lock.acquire(blocking=False):
            return WeeklyReport(busy=True)
        try:
            return self._weekly_run(now or self._clock())
        finally:
            self._run_lock.release()

    # ------------------------------------------------------------------

    def _weekly_run(self, now: datetime) -> WeeklyReport:
        prev_monday = (week_start(now, self.tz) - timedelta(weeks=1)).date()
        week = iso_week_id(prev_monday)
        window = TimeWindow(from_weeks_ago=1, to_weeks_ago=1)

        evaluated = sent = suppressed = duplicates = queued = 0
        retries_sent = self._drain_retries()

        for profile in self.store.list_profiles():
            if profile.delivery is not Delivery.EMAIL:
                continue
            evaluated += 1
            if self.store.was_dispatched(profile.id, week):
                duplicates += 1
                continue
            result = self.run_window_query(profile, window, now)
            if not result.items:
                suppressed += 1
                continue
            user = self.store.get_user(profile.user_id)
            message = self.format_digest(result, user)
            try:
                self.transport.send(message)
            except MailTransportError as exc:
                logger.warning("digest for %s failed, queued for retry: %s", profile.id, exc)
                self.store.enqueue_retry(_retry_payload("digest", message,
                                                        profile_id=profile.id, week=week))
                queued += 1
                continue
            self.store.mark_dispatched(profile.id, week)
            sent += 1

        return WeeklyReport(
            week=week, profiles_evaluated=evaluated, emails_sent=sent,
            emails_suppressed=suppressed, duplicates_skipped=duplicates,
            retries_queued=queued, retries_sent=retries_sent,
        )

    def _drain_retries(self) -> int:
        sent = 0
        for retry_id, payload in self.store.list_retries():
            message = _message_from_payload(payload)
            try:
                self.transport.send(message)
            except MailTransportError as exc:
                logger.warning("retry %s failed again: %s", retry_id, exc)
                continue
            if payload.get("kind") == "digest":
                self.store.mark_dispatched(payload["profile_id"], payload["week"])
            self.store.remove_retry(retry_id)
            sent += 1
        return sent


def _retry_payload(kind: str, message: MailMessage, **extra) -> dict:
    payload = {
        "kind": kind,
        "message": {
            "to_addr": message.to_addr, "subject": message.subject,
            "body": message.body, "from_addr": message.from_addr,
            "spool_name": message.spool_name,
        },
    }
    payload.update(extra)
    return payload


def _message_from_payload(payload: dict) -> MailMessage:
    m = payload["message"]
    return MailMessage(
        to_addr=m["to_addr"], subject=m["subject"], body=m["body"],
        from_addr=m["from_addr"], spool_name=m.get("spool_name"),
    )
