"""Entity store with referential integrity and file-backed persistence.

All state lives in memory behind a single lock; every mutation is validated
up front, applied atomically, and appended to a journal when a data
directory is configured. Restart recovery replays `snapshot.json` plus
`journal.jsonl`.

On-disk formats (both UTF-8):

* ``journal.jsonl`` - one JSON object per line, ``{"tx": [[action, kind,
  data], ...]}`` where action is ``put`` or ``delete``. One line is one
  atomic transaction; a truncated trailing line is ignored on load.
* ``snapshot.json`` - ``{"version": 1, "state": {kind: [records...]}}``.
  ``snapshot()`` rewrites it atomically and truncates the journal.

Acquisitions ingest file: tab-separated, five columns
``call_number  author  title  record_url  accession_date`` (YYYY-MM-DD),
lines starting with ``#`` ignored.
"""

from __future__ import annotations

import enum
import json
import logging
import re
import threading
from dataclasses import dataclass, replace
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable

from . import callno
from .callno import CallNumberError, CallNumberRange
from .errors import Conflict, Forbidden, Invalid, NotFound
from .model import (
    Discipline,
    Librarian,
    LibrarianRole,
    Message,
    MessageScope,
    Resource,
    ResourceKind,
    Section,
    User,
    is_customizable,
    kind_for_section,
    validate_resource,
)

logger = logging.getLogger(__name__)

SNAPSHOT_VERSION = 1


class Delivery(str, enum.Enum):
    SCREEN = "screen"
    EMAIL = "email"


@dataclass(frozen=True)
class SelectionSet:
    """A user's chosen resources for one customizable section."""

    user_id: str
    section: Section
    resource_ids: tuple[str, ...]
    customized: bool = False


@dataclass(frozen=True)
class RecommendationSet:
    """Librarian-curated defaults for one discipline and section."""

    discipline_id: str
    section: Section
    resource_ids: tuple[str, ...]


@dataclass(frozen=True)
class AcquisitionRecord:
    call_number: str
    author: str
    title: str
    record_url: str
    accession_date: date


@dataclass(frozen=True)
class CAProfile:
    """Saved current-awareness profile: call number ranges plus delivery mode."""

    id: str
    user_id: str
    ranges: tuple[CallNumberRange, ...]
    delivery: Delivery


@dataclass(frozen=True)
class AdminAccount:
    username: str
    password_verifier: str
    created_at: datetime


@dataclass(frozen=True)
class DeletionReport:
    selections: int
    recommendations: int


@dataclass(frozen=True)
class IngestReport:
    accepted: int
    quarantined: int
    duplicates: int = 0
    reasons: tuple[str, ...] = ()


_ID_RE = re.compile(r"^([a-z]+)(\d+)$")


def _now() -> datetime:
    return datetime.now(timezone.utc)


class Store:
    """Single-writer entity store; reads are served under the same lock."""

    def __init__(self, data_dir: str | Path | None = None):
        self._lock = threading.RLock()
        self._disciplines: dict[str, Discipline] = {}
        self._users: dict[str, User] = {}
        self._users_by_auth: dict[str, str] = {}
        self._librarians: dict[str, Librarian] = {}
        self._resources: dict[str, Resource] = {}
        self._selections: dict[tuple[str, str], SelectionSet] = {}
        self._recommendations: dict[tuple[str, str], RecommendationSet] = {}
        self._messages_live: dict[str, Message] = {}
        self._message_history: list[Message] = []
        self._acquisitions: dict[tuple[str, str, str], AcquisitionRecord] = {}
        self._profiles: dict[str, CAProfile] = {}
        self._dispatched: set[tuple[str, str]] = set()
        self._retries: dict[str, dict] = {}
        self._admin_accounts: dict[str, AdminAccount] = {}
        self._counters: dict[str, int] = {}

        self._data_dir = Path(data_dir) if data_dir else None
        self._journal = None
        if self._data_dir:
            self._data_dir.mkdir(parents=True, exist_ok=True)
            self._load()
            self._journal = open(self._journal_path(), "a", encoding="utf-8")

    # ------------------------------------------------------------------
    # Disciplines
    # ------------------------------------------------------------------

    def add_discipline(self, name: str, description: str = "") -> Discipline:
        with self._lock:
            self._check_discipline_name(name)
            discipline = Discipline(id=self._next_id("d"), name=name, description=description)
            self._commit([("put", "discipline", _discipline_to_dict(discipline))])
            return discipline

    def update_discipline(self, discipline_id: str, name: str | None = None,
                          description: str | None = None) -> Discipline:
        with self._lock:
            current = self._require_discipline(discipline_id)
            if name is not None and name != current.name:
                self._check_discipline_name(name)
                current = replace(current, name=name)
            if description is not None:
                current = replace(current, description=description)
            self._commit([("put", "discipline", _discipline_to_dict(current))])
            return current

    def get_discipline(self, discipline_id: str) -> Discipline:
        with self._lock:
            return self._require_discipline(discipline_id)

    def find_discipline_by_name(self, name: str) -> Discipline | None:
        with self._lock:
            for d in self._disciplines.values():
                if d.name == name:
                    return d
            return None

    def list_disciplines(self) -> list[Discipline]:
        with self._lock:
            return sorted(self._disciplines.values(), key=lambda d: d.name.casefold())

    def delete_discipline(self, discipline_id: str) -> None:
        with self._lock:
            self._require_discipline(discipline_id)
            users = sum(1 for u in self._users.values() if u.discipline_id == discipline_id)
            librarians = sum(
                1 for l in self._librarians.values() if discipline_id in l.discipline_ids
            )
            if users or librarians:
                raise Conflict(
                    f"discipline {discipline_id} is referenced by "
                    f"{users} user(s) and {librarians} librarian(s)"
                )
            entries: list = [("delete", "discipline", {"id": discipline_id})]
            for key in [k for k in self._recommendations if k[0] == discipline_id]:
                entries.append(("delete", "recommendation", {"discipline_id": key[0], "section": key[1]}))
            scope_key = f"discipline:{discipline_id}"
            if scope_key in self._messages_live:
                entries.append(("delete", "message_live", {"key": scope_key}))
            for resource in self._resources.values():
                if discipline_id in resource.discipline_ids:
                    updated = replace(
                        resource,
                        discipline_ids=resource.discipline_ids - {discipline_id},
                    )
                    entries.append(("put", "resource", _resource_to_dict(updated)))
            self._commit(entries)

    # ------------------------------------------------------------------
    # Librarians
    # ------------------------------------------------------------------

    def add_librarian(self, name: str, phone: str, email: str, role: LibrarianRole,
                      discipline_ids: Iterable[str]) -> Librarian:
        with self._lock:
            ids = frozenset(discipline_ids)
            self._check_librarian(name, ids)
            librarian = Librarian(
                id=self._next_id("l"), name=name, phone=phone, email=email,
                role=role, discipline_ids=ids,
            )
            self._commit([("put", "librarian", _librarian_to_dict(librarian))])
            return librarian

    def update_librarian(self, librarian_id: str, **fields) -> Librarian:
        with self._lock:
            current = self._require(self._librarians, librarian_id, "librarian")
            if "discipline_ids" in fields:
                fields["discipline_ids"] = frozenset(fields["discipline_ids"])
            updated = replace(current, **fields)
            self._check_librarian(updated.name, updated.discipline_ids)
            self._commit([("put", "librarian", _librarian_to_dict(updated))])
            return updated

    def delete_librarian(self, librarian_id: str) -> None:
        with self._lock:
            self._require(self._librarians, librarian_id, "librarian")
            self._commit([("delete", "librarian", {"id": librarian_id})])

    def list_librarians(self, discipline_id: str | None = None) -> list[Librarian]:
        with self._lock:
            found = [
                l for l in self._librarians.values()
                if discipline_id is None or discipline_id in l.discipline_ids
            ]
            return sorted(found, key=lambda l: l.name.casefold())

    # ------------------------------------------------------------------
    # Resources
    # ------------------------------------------------------------------

    def add_resource(self, kind: ResourceKind, title: str, url: str, description: str = "",
                     url_template: str | None = None, owner_user_id: str | None = None,
                     discipline_ids: Iterable[str] = ()) -> Resource:
        with self._lock:
            resource = Resource(
                id=self._next_id("r"), kind=kind, title=title, url=url,
                description=description, url_template=url_template,
                owner_user_id=owner_user_id, discipline_ids=frozenset(discipline_ids),
            )
            self._check_resource(resource)
            self._commit([("put", "resource", _resource_to_dict(resource))])
            return resource

    def update_resource(self, resource_id: str, **fields) -> Resource:
        with self._lock:
            current = self._require(self._resources, resource_id, "resource")
            if "kind" in fields and fields["kind"] != current.kind:
                raise Invalid("resource kind is immutable; delete and recreate instead")
            if "discipline_ids" in fields:
                fields["discipline_ids"] = frozenset(fields["discipline_ids"])
            updated = replace(current, **fields)
            self._check_resource(updated)
            self._commit([("put", "resource", _resource_to_dict(updated))])
            return updated

    def get_resource(self, resource_id: str) -> Resource:
        with self._lock:
            return self._require(self._resources, resource_id, "resource")

    def list_resources(self, kind: ResourceKind | None = None,
                       discipline_id: str | None = None) -> list[Resource]:
        with self._lock:
            found = [
                r for r in self._resources.values()
                if (kind is None or r.kind is kind)
                and (discipline_id is None or discipline_id in r.discipline_ids)
            ]
            return _sorted_by_title(found)

    def delete_resource(self, resource_id: str) -> DeletionReport:
        with self._lock:
            self._require(self._resources, resource_id, "resource")
            entries: list = [("delete", "resource", {"id": resource_id})]
            selections = recommendations = 0
            for key, sel in self._selections.items():
                if resource_id in sel.resource_ids:
                    selections += 1
                    trimmed = tuple(i for i in sel.resource_ids if i != resource_id)
                    entries.append(("put", "selection", _selection_to_dict(replace(sel, resource_ids=trimmed))))
            for key, rec in self._recommendations.items():
                if resource_id in rec.resource_ids:
                    recommendations += 1
                    trimmed = tuple(i for i in rec.resource_ids if i != resource_id)
                    entries.append(("put", "recommendation", _recommendation_to_dict(replace(rec, resource_ids=trimmed))))
            self._commit(entries)
            return DeletionReport(selections=selections, recommendations=recommendations)

    # ------------------------------------------------------------------
    # Users and selections
    # ------------------------------------------------------------------

    def create_user(self, auth_id: str, name: str, email: str, discipline_id: str,
                    email_opt_in: bool = True) -> User:
        with self._lock:
            if not auth_id:
                raise Invalid("auth_id must be non-empty")
            if auth_id in self._users_by_auth:
                raise Conflict(f"auth_id {auth_id!r} already registered")
            self._require_discipline(discipline_id)
            user = User(
                id=self._next_id("u"), auth_id=auth_id, name=name, email=email,
                discipline_id=discipline_id, email_opt_in=email_opt_in, created_at=_now(),
            )
            entries: list = [("put", "user", _user_to_dict(user))]
            # seed every customizable section from the discipline's current
            # recommendations; later recommendation edits do not propagate
            for section in Section:
                if not is_customizable(section):
                    continue
                rec = self._recommendations.get((discipline_id, section.value))
                ids = rec.resource_ids if rec else ()
                sel = SelectionSet(user_id=user.id, section=section, resource_ids=ids)
                entries.append(("put", "selection", _selection_to_dict(sel)))
            self._commit(entries)
            return user

    def get_user(self, user_id: str) -> User:
        with self._lock:
            return self._require(self._users, user_id, "user")

    def get_user_by_auth_id(self, auth_id: str) -> User | None:
        with self._lock:
            user_id = self._users_by_auth.get(auth_id)
            return self._users.get(user_id) if user_id else None

    def list_users(self, discipline_id: str | None = None) -> list[User]:
        with self._lock:
            found = [
                u for u in self._users.values()
                if discipline_id is None or u.discipline_id == discipline_id
            ]
            return sorted(found, key=lambda u: u.id)

    def set_user_discipline(self, user_id: str, discipline_id: str) -> User:
        with self._lock:
            user = self._require(self._users, user_id, "user")
            self._require_discipline(discipline_id)
            updated = replace(user, discipline_id=discipline_id)
            self._commit([("put", "user", _user_to_dict(updated))])
            return updated

    def set_email_opt_in(self, user_id: str, opt_in: bool) -> User:
        with self._lock:
            user = self._require(self._users, user_id, "user")
            updated = replace(user, email_opt_in=opt_in)
            self._commit([("put", "user", _user_to_dict(updated))])
            return updated

    def get_selection_set(self, user_id: str, section: Section) -> SelectionSet:
        with self._lock:
            self._require(self._users, user_id, "user")
            found = self._selections.get((user_id, section.value))
            return found or SelectionSet(user_id=user_id, section=section, resource_ids=())

    def get_selections(self, user_id: str, section: Section) -> list[str]:
        return list(self.get_selection_set(user_id, section).resource_ids)

    def set_selections(self, user_id: str, section: Section,
                       resource_ids: Iterable[str]) -> SelectionSet:
        """Replace (not merge) the user's selection for one section."""
        with self._lock:
            self._require(self._users, user_id, "user")
            if not is_customizable(section):
                raise Invalid(f"section {section.value} is not customizable")
            ids = list(dict.fromkeys(resource_ids))
            expected_kind = kind_for_section(section)
            for rid in ids:
                resource = self._resources.get(rid)
                if resource is None:
                    raise NotFound(f"resource {rid} not found")
                if expected_kind is None:
                    raise Invalid(f"section {section.value} holds no resources")
                if resource.kind is not expected_kind:
                    raise Invalid(
                        f"resource {rid} has kind {resource.kind.value}, "
                        f"not valid for {section.value}"
                    )
                if resource.kind is ResourceKind.PERSONAL_LINK and resource.owner_user_id != user_id:
                    raise Invalid(f"resource {rid} is another user's personal link")
            sel = SelectionSet(
                user_id=user_id, section=section, resource_ids=tuple(ids), customized=True,
            )
            self._commit([("put", "selection", _selection_to_dict(sel))])
            return sel

    def add_personal_link(self, user_id: str, title: str, url: str) -> Resource:
        """Create a personal link and append it to the owner's selection, atomically."""
        with self._lock:
            self._require(self._users, user_id, "user")
            resource = Resource(
                id=self._next_id("r"), kind=ResourceKind.PERSONAL_LINK,
                title=title, url=url, owner_user_id=user_id,
            )
            self._check_resource(resource)
            current = self._selections.get((user_id, Section.PERSONAL_LINKS.value))
            ids = (current.resource_ids if current else ()) + (resource.id,)
            sel = SelectionSet(
                user_id=user_id, section=Section.PERSONAL_LINKS,
                resource_ids=ids, customized=True,
            )
            self._commit([
                ("put", "resource", _resource_to_dict(resource)),
                ("put", "selection", _selection_to_dict(sel)),
            ])
            return resource

    def delete_personal_link(self, user_id: str, resource_id: str) -> None:
        """Remove an owned personal link and its selection entry, atomically."""
        with self._lock:
            self._require(self._users, user_id, "user")
            resource = self._require(self._resources, resource_id, "resource")
            if resource.kind is not ResourceKind.PERSONAL_LINK:
                raise Invalid(f"resource {resource_id} is not a personal link")
            if resource.owner_user_id != user_id:
                raise Forbidden("that personal link belongs to another user")
            entries: list = [("delete", "resource", {"id": resource_id})]
            current = self._selections.get((user_id, Section.PERSONAL_LINKS.value))
            if current and resource_id in current.resource_ids:
                trimmed = tuple(i for i in current.resource_ids if i != resource_id)
                entries.append(("put", "selection",
                                _selection_to_dict(replace(current, resource_ids=trimmed))))
            self._commit(entries)

    # ------------------------------------------------------------------
    # Recommendations
    # ------------------------------------------------------------------

    def set_recommendations(self, discipline_id: str, section: Section,
                            resource_ids: Iterable[str]) -> RecommendationSet:
        with self._lock:
            self._require_discipline(discipline_id)
            expected_kind = kind_for_section(section)
            if not is_customizable(section) or expected_kind is None:
                raise Invalid(f"section {section.value} takes no recommendations")
            if expected_kind is ResourceKind.PERSONAL_LINK:
                raise Invalid("personal links cannot be recommended")
            ids = list(dict.fromkeys(resource_ids))
            for rid in ids:
                resource = self._resources.get(rid)
                if resource is None:
                    raise NotFound(f"resource {rid} not found")
                if resource.kind is not expected_kind:
                    raise Invalid(
                        f"resource {rid} has kind {resource.kind.value}, "
                        f"not valid for {section.value}"
                    )
            rec = RecommendationSet(
                discipline_id=discipline_id, section=section, resource_ids=tuple(ids),
            )
            self._commit([("put", "recommendation", _recommendation_to_dict(rec))])
            return rec

    def delete_recommendations(self, discipline_id: str, section: Section) -> None:
        with self._lock:
            self._require_discipline(discipline_id)
            key = (discipline_id, section.value)
            if key in self._recommendations:
                self._commit([
                    ("delete", "recommendation",
                     {"discipline_id": discipline_id, "section": section.value}),
                ])

    def get_recommendation_ids(self, discipline_id: str, section: Section) -> list[str]:
        with self._lock:
            rec = self._recommendations.get((discipline_id, section.value))
            return list(rec.resource_ids) if rec else []

    def list_recommendations(self, discipline_id: str, section: Section) -> list[Resource]:
        """The discipline's recommended resources, sorted by title."""
        with self._lock:
            self._require_discipline(discipline_id)
            if not is_customizable(section):
                raise Invalid(f"section {section.value} is not customizable")
            rec = self._recommendations.get((discipline_id, section.value))
            if not rec:
                return []
            return _sorted_by_title([self._resources[r] for r in rec.resource_ids])

    # ------------------------------------------------------------------
    # Messages
    # ------------------------------------------------------------------

    def set_message(self, scope: MessageScope, body: str,
                    discipline_id: str | None = None) -> Message:
        """Replace the live message for a scope; an empty body clears it."""
        with self._lock:
            if scope is MessageScope.DISCIPLINE:
                if not discipline_id:
                    raise Invalid("discipline message requires a discipline_id")
                self._require_discipline(discipline_id)
            else:
                discipline_id = None
            message = Message(
                id=self._next_id("m"), scope=scope, discipline_id=discipline_id,
                body=body, updated_at=_now(),
            )
            key = _message_key(scope, discipline_id)
            entries: list = [("put", "message_history", _message_to_dict(message))]
            if body:
                entries.append(("put", "message_live", {"key": key, "message": _message_to_dict(message)}))
            elif key in self._messages_live:
                entries.append(("delete", "message_live", {"key": key}))
            self._commit(entries)
            return message

    def get_live_message(self, scope: MessageScope,
                         discipline_id: str | None = None) -> Message | None:
        with self._lock:
            return self._messages_live.get(_message_key(scope, discipline_id))

    def message_history(self) -> list[Message]:
        with self._lock:
            return list(self._message_history)

    # ------------------------------------------------------------------
    # Acquisitions
    # ------------------------------------------------------------------

    def record_acquisitions(self, records: Iterable[AcquisitionRecord]) -> IngestReport:
        """Store parseable records; quarantine the rest. Replays are idempotent."""
        with self._lock:
            accepted = quarantined = duplicates = 0
            reasons: list[str] = []
            entries: list = []
            seen: set[tuple[str, str, str]] = set()
            for record in records:
                try:
                    parsed = callno.parse_call_number(record.call_number)
                except CallNumberError as exc:
                    quarantined += 1
                    reasons.append(f"{record.call_number!r}: {exc.reason} at offset {exc.offset}")
                    logger.warning("quarantined acquisition %r: %s", record.call_number, exc)
                    continue
                key = (
                    callno.sort_key(parsed).hex(),
                    record.accession_date.isoformat(),
                    record.title,
                )
                if key in self._acquisitions or key in seen:
                    duplicates += 1
                    continue
                seen.add(key)
                accepted += 1
                entries.append(("put", "acquisition", _acquisition_to_dict(record)))
            if entries:
                self._commit(entries)
            return IngestReport(
                accepted=accepted, quarantined=quarantined,
                duplicates=duplicates, reasons=tuple(reasons),
            )

    def list_acquisitions(self) -> list[AcquisitionRecord]:
        with self._lock:
            return [self._acquisitions[k] for k in sorted(self._acquisitions)]

    # ------------------------------------------------------------------
    # Current-awareness profiles, dispatch ledger, retry queue
    # ------------------------------------------------------------------

    def save_profile(self, user_id: str, ranges: Iterable[CallNumberRange],
                     delivery: Delivery) -> CAProfile:
        with self._lock:
            self._require(self._users, user_id, "user")
            range_tuple = tuple(ranges)
            if not range_tuple:
                raise Invalid("profile requires at least one call number range")
            profile = CAProfile(
                id=self._next_id("p"), user_id=user_id,
                ranges=range_tuple, delivery=delivery,
            )
            self._commit([("put", "profile", _profile_to_dict(profile))])
            return profile

    def get_profile(self, profile_id: str) -> CAProfile:
        with self._lock:
            return self._require(self._profiles, profile_id, "profile")

    def delete_profile(self, profile_id: str) -> None:
        with self._lock:
            self._require(self._profiles, profile_id, "profile")
            self._commit([("delete", "profile", {"id": profile_id})])

    def list_profiles(self, user_id: str | None = None) -> list[CAProfile]:
        with self._lock:
            found = [
                p for p in self._profiles.values()
                if user_id is None or p.user_id == user_id
            ]
            return sorted(found, key=lambda p: _id_sort_key(p.id))

    def was_dispatched(self, profile_id: str, week: str) -> bool:
        with self._lock:
            return (profile_id, week) in self._dispatched

    def mark_dispatched(self, profile_id: str, week: str) -> None:
        with self._lock:
            self._commit([("put", "dispatch", {"profile_id": profile_id, "week": week})])

    def enqueue_retry(self, payload: dict) -> str:
        with self._lock:
            retry_id = self._next_id("j")
            self._commit([("put", "retry", {"id": retry_id, "payload": payload})])
            return retry_id

    def list_retries(self) -> list[tuple[str, dict]]:
        with self._lock:
            return [(k, dict(self._retries[k])) for k in sorted(self._retries, key=_id_sort_key)]

    def remove_retry(self, retry_id: str) -> None:
        with self._lock:
            if retry_id in self._retries:
                self._commit([("delete", "retry", {"id": retry_id})])

    # ------------------------------------------------------------------
    # Admin accounts
    # ------------------------------------------------------------------

    def put_admin_account(self, username: str, password_verifier: str) -> AdminAccount:
        with self._lock:
            if not username:
                raise Invalid("username must be non-empty")
            account = AdminAccount(
                username=username, password_verifier=password_verifier, created_at=_now(),
            )
            self._commit([("put", "admin_account", _admin_to_dict(account))])
            return account

    def get_admin_account(self, username: str) -> AdminAccount | None:
        with self._lock:
            return self._admin_accounts.get(username)

    # ------------------------------------------------------------------
    # Integrity check (used by tests and the snapshot path)
    # ------------------------------------------------------------------

    def check_integrity(self) -> list[str]:
        """Return every violated cross-entity rule; healthy stores return []."""
        with self._lock:
            problems: list[str] = []
            for user in self._users.values():
                if user.discipline_id not in self._disciplines:
                    problems.append(f"user {user.id} references missing discipline {user.discipline_id}")
            for librarian in self._librarians.values():
                if not librarian.discipline_ids:
                    problems.append(f"librarian {librarian.id} has no disciplines")
                for did in librarian.discipline_ids:
                    if did not in self._disciplines:
                        problems.append(f"librarian {librarian.id} references missing discipline {did}")
            for resource in self._resources.values():
                for did in resource.discipline_ids:
                    if did not in self._disciplines:
                        problems.append(f"resource {resource.id} references missing discipline {did}")
            for (user_id, section), sel in self._selections.items():
                for rid in sel.resource_ids:
                    if rid not in self._resources:
                        problems.append(f"selection {user_id}/{section} references missing resource {rid}")
            for (did, section), rec in self._recommendations.items():
                for rid in rec.resource_ids:
                    if rid not in self._resources:
                        problems.append(f"recommendation {did}/{section} references missing resource {rid}")
            for profile in self._profiles.values():
                if profile.user_id not in self._users:
                    problems.append(f"profile {profile.id} references missing user {profile.user_id}")
            return problems

    # ------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------

    def snapshot(self) -> None:
        """Write the full state atomically and truncate the journal."""
        if not self._data_dir:
            return
        with self._lock:
            state = {
                "discipline": [_discipline_to_dict(d) for d in self._disciplines.values()],
                "user": [_user_to_dict(u) for u in self._users.values()],
                "librarian": [_librarian_to_dict(l) for l in self._librarians.values()],
                "resource": [_resource_to_dict(r) for r in self._resources.values()],
                "selection": [_selection_to_dict(s) for s in self._selections.values()],
                "recommendation": [_recommendation_to_dict(r) for r in self._recommendations.values()],
                "message_live": [
                    {"key": k, "message": _message_to_dict(m)}
                    for k, m in self._messages_live.items()
                ],
                "message_history": [_message_to_dict(m) for m in self._message_history],
                "acquisition": [_acquisition_to_dict(a) for a in self._acquisitions.values()],
                "profile": [_profile_to_dict(p) for p in self._profiles.values()],
                "dispatch": [{"profile_id": p, "week": w} for p, w in sorted(self._dispatched)],
                "retry": [{"id": k, "payload": v} for k, v in self._retries.items()],
                "admin_account": [_admin_to_dict(a) for a in self._admin_accounts.values()],
            }
            payload = {"version": SNAPSHOT_VERSION, "saved_at": _now().isoformat(), "state": state}
            tmp = self._snapshot_path().with_suffix(".tmp")
            tmp.write_text(json.dumps(payload, indent=1), encoding="utf-8")
            tmp.replace(self._snapshot_path())
            if self._journal:
                self._journal.close()
            self._journal = open(self._journal_path(), "w", encoding="utf-8")

    def close(self) -> None:
        with self._lock:
            if self._data_dir:
                self.snapshot()
            if self._journal:
                self._journal.close()
                self._journal = None

    def _snapshot_path(self) -> Path:
        return self._data_dir / "snapshot.json"

    def _journal_path(self) -> Path:
        return self._data_dir / "journal.jsonl"

    def _load(self) -> None:
        snap = self._snapshot_path()
        if snap.exists():
            payload = json.loads(snap.read_text(encoding="utf-8"))
            if payload.get("version") != SNAPSHOT_VERSION:
                raise Invalid(f"unsupported snapshot version {payload.get('version')}")
            for kind, records in payload["state"].items():
                for record in records:
                    self._apply("put", kind, record)
        journal = self._journal_path()
        if journal.exists():
            with open(journal, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        tx = json.loads(line)["tx"]
                    except (json.JSONDecodeError, KeyError):
                        logger.warning("ignoring corrupt journal line %d", lineno)
                        continue
                    for action, kind, data in tx:
                        self._apply(action, kind, data)

    # ------------------------------------------------------------------
    # Commit machinery
    # ------------------------------------------------------------------

    def _commit(self, entries: list) -> None:
        for action, kind, data in entries:
            self._apply(action, kind, data)
        if self._journal:
            self._journal.write(json.dumps({"tx": entries}) + "\n")
            self._journal.flush()

    def _apply(self, action: str, kind: str, data: dict) -> None:
        if kind == "discipline":
            if action == "put":
                d = _discipline_from_dict(data)
                self._disciplines[d.id] = d
                self._bump_counter(d.id)
            else:
                self._disciplines.pop(data["id"], None)
        elif kind == "user":
            if action == "put":
                u = _user_from_dict(data)
                self._users[u.id] = u
                self._users_by_auth[u.auth_id] = u.id
                self._bump_counter(u.id)
            else:
                u = self._users.pop(data["id"], None)
                if u:
                    self._users_by_auth.pop(u.auth_id, None)
        elif kind == "librarian":
            if action == "put":
                l = _librarian_from_dict(data)
                self._librarians[l.id] = l
                self._bump_counter(l.id)
            else:
                self._librarians.pop(data["id"], None)
        elif kind == "resource":
            if action == "put":
                r = _resource_from_dict(data)
                self._resources[r.id] = r
                self._bump_counter(r.id)
            else:
                self._resources.pop(data["id"], None)
        elif kind == "selection":
            s = _selection_from_dict(data)
            self._selections[(s.user_id, s.section.value)] = s
        elif kind == "recommendation":
            if action == "put":
                r = _recommendation_from_dict(data)
                self._recommendations[(r.discipline_id, r.section.value)] = r
            else:
                self._recommendations.pop((data["discipline_id"], data["section"]), None)
        elif kind == "message_live":
            if action == "put":
                self._messages_live[data["key"]] = _message_from_dict(data["message"])
            else:
                self._messages_live.pop(data["key"], None)
        elif kind == "message_history":
            m = _message_from_dict(data)
            self._message_history.append(m)
            self._bump_counter(m.id)
        elif kind == "acquisition":
            record = _acquisition_from_dict(data)
            parsed = callno.parse_call_number(record.call_number)
            key = (
                callno.sort_key(parsed).hex(),
                record.accession_date.isoformat(),
                record.title,
            )
            self._acquisitions[key] = record
        elif kind == "profile":
            if action == "put":
                p = _profile_from_dict(data)
                self._profiles[p.id] = p
                self._bump_counter(p.id)
            else:
                self._profiles.pop(data["id"], None)
        elif kind == "dispatch":
            self._dispatched.add((data["profile_id"], data["week"]))
        elif kind == "retry":
            if action == "put":
                self._retries[data["id"]] = data["payload"]
                self._bump_counter(data["id"])
            else:
                self._retries.pop(data["id"], None)
        elif kind == "admin_account":
            a = _admin_from_dict(data)
            self._admin_accounts[a.username] = a
        else:
            logger.warning("ignoring unknown journal record kind %r", kind)

    # ------------------------------------------------------------------
    # Validation helpers
    # ------------------------------------------------------------------

    def _require(self, table: dict, key: str, label: str):
        found = table.get(key)
        if found is None:
            raise NotFound(f"{label} {key} not found")
        return found

    def _require_discipline(self, discipline_id: str) -> Discipline:
        return self._require(self._disciplines, discipline_id, "discipline")

    def _check_discipline_name(self, name: str) -> None:
        if not name or not name.strip():
            raise Invalid("discipline name must be non-empty")
        if any(d.name == name for d in self._disciplines.values()):
            raise Conflict(f"discipline name {name!r} already exists")

    def _check_librarian(self, name: str, discipline_ids: frozenset[str]) -> None:
        if not name or not name.strip():
            raise Invalid("librarian name must be non-empty")
        if not discipline_ids:
            raise Invalid("librarian must be associated with at least one discipline")
        for did in discipline_ids:
            self._require_discipline(did)

    def _check_resource(self, resource: Resource) -> None:
        violations = validate_resource(resource)
        if violations:
            raise Invalid("invalid resource", violations)
        for did in resource.discipline_ids:
            self._require_discipline(did)
        if resource.owner_user_id is not None and resource.owner_user_id not in self._users:
            raise NotFound(f"user {resource.owner_user_id} not found")

    def _next_id(self, prefix: str) -> str:
        n = self._counters.get(prefix, 0) + 1
        self._counters[prefix] = n
        return f"{prefix}{n}"

    def _bump_counter(self, record_id: str) -> None:
        m = _ID_RE.match(record_id)
        if m:
            prefix, n = m.group(1), int(m.group(2))
            if n > self._counters.get(prefix, 0):
                self._counters[prefix] = n


# ---------------------------------------------------------------------------
# File ingest
# ---------------------------------------------------------------------------


def read_acquisitions_file(path: str | Path) -> tuple[list[AcquisitionRecord], list[str]]:
    """Read the tab-separated acquisitions format; returns (records, line errors)."""
    records: list[AcquisitionRecord] = []
    errors: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            columns = line.split("\t")
            if len(columns) != 5:
                errors.append(f"line {lineno}: expected 5 tab-separated columns, got {len(columns)}")
                continue
            call_number, author, title, record_url, date_text = columns
            try:
                accession = date.fromisoformat(date_text.strip())
            except ValueError:
                errors.append(f"line {lineno}: bad accession date {date_text!r}")
                continue
            records.append(AcquisitionRecord(
                call_number=call_number.strip(), author=author.strip(),
                title=title.strip(), record_url=record_url.strip(),
                accession_date=accession,
            ))
    return records, errors


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _sorted_by_title(resources: list[Resource]) -> list[Resource]:
    return sorted(resources, key=lambda r: (r.title.casefold(), r.id))


def _id_sort_key(record_id: str):
    m = _ID_RE.match(record_id)
    return (m.group(1), int(m.group(2))) if m else (record_id, 0)


def _message_key(scope: MessageScope, discipline_id: str | None) -> str:
    return "global" if scope is MessageScope.GLOBAL else f"discipline:{discipline_id}"


def _discipline_to_dict(d: Discipline) -> dict:
    return {"id": d.id, "name": d.name, "description": d.description}


def _discipline_from_dict(data: dict) -> Discipline:
    return Discipline(id=data["id"], name=data["name"], description=data.get("description", ""))


def _user_to_dict(u: User) -> dict:
    return {
        "id": u.id, "auth_id": u.auth_id, "name": u.name, "email": u.email,
        "discipline_id": u.discipline_id, "email_opt_in": u.email_opt_in,
        "created_at": u.created_at.isoformat() if u.created_at else None,
    }


def _user_from_dict(data: dict) -> User:
    created = data.get("created_at")
    return User(
        id=data["id"], auth_id=data["auth_id"], name=data["name"], email=data["email"],
        discipline_id=data["discipline_id"], email_opt_in=data.get("email_opt_in", True),
        created_at=datetime.fromisoformat(created) if created else None,
    )


def _librarian_to_dict(l: Librarian) -> dict:
    return {
        "id": l.id, "name": l.name, "phone": l.phone, "email": l.email,
        "role": l.role.value, "discipline_ids": sorted(l.discipline_ids),
    }


def _librarian_from_dict(data: dict) -> Librarian:
    return Librarian(
        id=data["id"], name=data["name"], phone=data["phone"], email=data["email"],
        role=LibrarianRole(data["role"]), discipline_ids=frozenset(data["discipline_ids"]),
    )


def _resource_to_dict(r: Resource) -> dict:
    return {
        "id": r.id, "kind": r.kind.value, "title": r.title, "url": r.url,
        "description": r.description, "url_template": r.url_template,
        "owner_user_id": r.owner_user_id, "discipline_ids": sorted(r.discipline_ids),
    }


def _resource_from_dict(data: dict) -> Resource:
    return Resource(
        id=data["id"], kind=ResourceKind(data["kind"]), title=data["title"], url=data["url"],
        description=data.get("description", ""), url_template=data.get("url_template"),
        owner_user_id=data.get("owner_user_id"),
        discipline_ids=frozenset(data.get("discipline_ids", [])),
    )


def _selection_to_dict(s: SelectionSet) -> dict:
    return {
        "user_id": s.user_id, "section": s.section.value,
        "resource_ids": list(s.resource_ids), "customized": s.customized,
    }


def _selection_from_dict(data: dict) -> SelectionSet:
    return SelectionSet(
        user_id=data["user_id"], section=Section(data["section"]),
        resource_ids=tuple(data["resource_ids"]), customized=data.get("customized", False),
    )


def _recommendation_to_dict(r: RecommendationSet) -> dict:
    return {
        "discipline_id": r.discipline_id, "section": r.section.value,
        "resource_ids": list(r.resource_ids),
    }


def _recommendation_from_dict(data: dict) -> RecommendationSet:
    return RecommendationSet(
        discipline_id=data["discipline_id"], section=Section(data["section"]),
        resource_ids=tuple(data["resource_ids"]),
    )


def _message_to_dict(m: Message) -> dict:
    return {
        "id": m.id, "scope": m.scope.value, "discipline_id": m.discipline_id,
        "body": m.body, "updated_at": m.updated_at.isoformat(),
    }


def _message_from_dict(data: dict) -> Message:
    return Message(
        id=data["id"], scope=MessageScope(data["scope"]),
        discipline_id=data.get("discipline_id"), body=data["body"],
        updated_at=datetime.fromisoformat(data["updated_at"]),
    )


def _acquisition_to_dict(a: AcquisitionRecord) -> dict:
    return {
        "call_number": a.call_number, "author": a.author, "title": a.title,
        "record_url": a.record_url, "accession_date": a.accession_date.isoformat(),
    }


def _acquisition_from_dict(data: dict) -> AcquisitionRecord:
    return AcquisitionRecord(
        call_number=data["call_number"], author=data["author"], title=data["title"],
        record_url=data["record_url"], accession_date=date.fromisoformat(data["accession_date"]),
    )


def _profile_to_dict(p: CAProfile) -> dict:
    return {
        "id": p.id, "user_id": p.user_id,
        "ranges": callno.format_range_list(list(p.ranges)),
        "delivery": p.delivery.value,
    }


def _profile_from_dict(data: dict) -> CAProfile:
    return CAProfile(
        id=data["id"], user_id=data["user_id"],
        ranges=tuple(callno.parse_range_list(data["ranges"])),
        delivery=Delivery(data["delivery"]),
    )


def _admin_to_dict(a: AdminAccount) -> dict:
    return {
        "username": a.username, "password_verifier": a.password_verifier,
        "created_at": a.created_at.isoformat(),
    }


def _admin_from_dict(data: dict) -> AdminAccount:
    return AdminAccount(
        username=data["username"], password_verifier=data["password_verifier"],
        created_at=datetime.fromisoformat(data["created_at"]),
    )
