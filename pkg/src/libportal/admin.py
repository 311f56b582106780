"""Administrative plane: accounts, content CRUD, messages, mass email, reports.

Admin passwords are stored only as salted PBKDF2 verifiers and checked in
constant time; a failed login never reveals whether the username or the
password was wrong. Admin sessions are separate from user sessions and
expire after four hours.

Usage reports are computed on demand from the NCSA Common Log Format
access log; recomputation over the same slice yields identical counters.
"""

from __future__ import annotations

import hashlib
import hmac
import logging
import re
import secrets
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path
from typing import Iterable

from .errors import AuthenticationFailed, Invalid, NotFound
from .mail import MailMessage, MailTransport, MailTransportError
from .model import LibrarianRole, MessageScope, ResourceKind, Section
from .sessions import Session, SessionManager
from .store import AdminAccount, Store

logger = logging.getLogger(__name__)

PBKDF2_ITERATIONS = 60_000

# host ident authuser [time] "request" status bytes
CLF_RE = re.compile(
    r'^(?P<host>\S+) (?P<ident>\S+) (?P<user>\S+) '
    r'\[(?P<time>[^\]]+)\] "(?P<request>[^"]*)" '
    r'(?P<status>\d{3}) (?P<size>\S+)\s*$'
)

_DUMMY_VERIFIER: str | None = None


def make_verifier(password: str, iterations: int = PBKDF2_ITERATIONS) -> str:
    salt = secrets.token_bytes(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return f"pbkdf2_sha256${iterations}${salt.hex()}${digest.hex()}"


def verify_password(verifier: str, password: str) -> bool:
    try:
        scheme, iterations, salt_hex, digest_hex = verifier.split("$")
        if scheme != "pbkdf2_sha256":
            return False
        recomputed = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt_hex), int(iterations)
        )
        return hmac.compare_digest(recomputed.hex(), digest_hex)
    except (ValueError, TypeError):
        return False


def _dummy_verifier() -> str:
    # verified against when the username is unknown, to equalize timing
    global _DUMMY_VERIFIER
    if _DUMMY_VERIFIER is None:
        _DUMMY_VERIFIER = make_verifier(secrets.token_hex(8))
    return _DUMMY_VERIFIER


@dataclass(frozen=True)
class MassEmailReport:
    id: str
    recipients: int
    skipped_opt_out: int
    failed: int = 0
    status: str = "completed"


@dataclass(frozen=True)
class UsageReport:
    period_from: date | None
    period_to: date | None
    counters: dict[str, int]
    distinct_users: int
    malformed: int
    total: int


class AdminService:
    def __init__(self, store: Store, sessions: SessionManager, transport: MailTransport,
                 *, mail_from: str = "admin@localhost",
                 access_log: str | Path | None = None):
        self.store = store
        self.sessions = sessions
        self.transport = transport
        self.mail_from = mail_from
        self.access_log = Path(access_log) if access_log else None
        self._mass_email_reports: dict[str, MassEmailReport] = {}
        self._report_seq = 0

    # ------------------------------------------------------------------
    # Accounts and sessions
    # ------------------------------------------------------------------

    def create_account(self, username: str, password: str) -> AdminAccount:
        if not password:
            raise Invalid("password must be non-empty")
        return self.store.put_admin_account(username, make_verifier(password))

    def login(self, username: str, password: str) -> Session | None:
        """Correct credentials yield a session; anything else yields None,
        with no detail about which field was wrong."""
        account = self.store.get_admin_account(username)
        verifier = account.password_verifier if account else _dummy_verifier()
        ok = verify_password(verifier, password)
        if account is None or not ok:
            return None
        return self.sessions.issue(username)

    def require(self, token: str | None) -> Session:
        session = self.sessions.resolve(token)
        if session is None:
            raise AuthenticationFailed("admin session required")
        return session

    # ------------------------------------------------------------------
    # Entity CRUD
    # ------------------------------------------------------------------

    def upsert_entity(self, kind: str, payload: dict) -> dict:
        """Create or update a discipline, librarian, resource, or
        recommendation set; changes are visible to the next portal read."""
        if kind == "discipline":
            if payload.get("id"):
                entity = self.store.update_discipline(
                    payload["id"], name=payload.get("name"),
                    description=payload.get("description"),
                )
            else:
                entity = self.store.add_discipline(
                    _required(payload, "name"), payload.get("description", ""),
                )
            return {"id": entity.id, "name": entity.name, "description": entity.description}

        if kind == "librarian":
            fields_ = dict(
                name=_required(payload, "name"),
                phone=payload.get("phone", ""),
                email=payload.get("email", ""),
                role=LibrarianRole(payload.get("role", "reference_librarian")),
                discipline_ids=payload.get("discipline_ids", []),
            )
            if payload.get("id"):
                entity = self.store.update_librarian(payload["id"], **fields_)
            else:
                entity = self.store.add_librarian(**fields_)
            return {
                "id": entity.id, "name": entity.name, "phone": entity.phone,
                "email": entity.email, "role": entity.role.value,
                "discipline_ids": sorted(entity.discipline_ids),
            }

        if kind == "resource":
            if payload.get("id"):
                updatable = {
                    k: payload[k]
                    for k in ("title", "url", "description", "url_template", "discipline_ids")
                    if k in payload
                }
                entity = self.store.update_resource(payload["id"], **updatable)
            else:
                entity = self.store.add_resource(
                    kind=ResourceKind(_required(payload, "kind")),
                    title=_required(payload, "title"),
                    url=_required(payload, "url"),
                    description=payload.get("description", ""),
                    url_template=payload.get("url_template"),
                    owner_user_id=payload.get("owner_user_id"),
                    discipline_ids=payload.get("discipline_ids", []),
                )
            return {
                "id": entity.id, "kind": entity.kind.value, "title": entity.title,
                "url": entity.url, "description": entity.description,
                "url_template": entity.url_template,
                "discipline_ids": sorted(entity.discipline_ids),
            }

        if kind == "recommendation":
            rec = self.store.set_recommendations(
                _required(payload, "discipline_id"),
                Section(_required(payload, "section")),
                payload.get("resource_ids", []),
            )
            return {
                "discipline_id": rec.discipline_id, "section": rec.section.value,
                "resource_ids": list(rec.resource_ids),
            }

        raise Invalid(f"unknown entity kind {kind!r}")

    def delete_entity(self, kind: str, entity_id: str) -> dict:
        if kind == "discipline":
            self.store.delete_discipline(entity_id)
            return {"deleted": entity_id}
        if kind == "librarian":
            self.store.delete_librarian(entity_id)
            return {"deleted": entity_id}
        if kind == "resource":
            report = self.store.delete_resource(entity_id)
            return {
                "deleted": entity_id,
                "selections": report.selections,
                "recommendations": report.recommendations,
            }
        raise Invalid(f"unknown entity kind {kind!r}")

    def delete_recommendations(self, discipline_id: str, section: str) -> dict:
        self.store.delete_recommendations(discipline_id, Section(section))
        return {"deleted": f"{discipline_id}/{section}"}

    # ------------------------------------------------------------------
    # Messages
    # ------------------------------------------------------------------

    def set_global_message(self, body: str):
        return self.store.set_message(MessageScope.GLOBAL, body)

    def set_discipline_message(self, discipline_id: str, body: str):
        return self.store.set_message(MessageScope.DISCIPLINE, body, discipline_id=discipline_id)

    # ------------------------------------------------------------------
    # Mass email
    # ------------------------------------------------------------------

    def mass_email(self, discipline_ids: Iterable[str], subject: str, body: str) -> MassEmailReport:
        """One message per distinct opted-in user across the disciplines."""
        ids = list(discipline_ids)
        if not ids:
            raise Invalid("at least one discipline is required")
        for did in ids:
            self.store.get_discipline(did)

        targets: dict[str, object] = {}
        skipped = 0
        for did in ids:
            for user in self.store.list_users(did):
                if user.id in targets:
                    continue
                if not user.email_opt_in:
                    skipped += 1
                    continue
                targets[user.id] = user

        failed = 0
        for user in targets.values():
            message = MailMessage(
                to_addr=user.email, subject=subject, body=body, from_addr=self.mail_from,
            )
            try:
                self.transport.send(message)
            except MailTransportError as exc:
                logger.warning("mass email to %s failed, queued: %s", user.email, exc)
                self.store.enqueue_retry({
                    "kind": "mass_email",
                    "message": {
                        "to_addr": message.to_addr, "subject": message.subject,
                        "body": message.body, "from_addr": message.from_addr,
                        "spool_name": None,
                    },
                })
                failed += 1

        self._report_seq += 1
        report = MassEmailReport(
            id=f"me{self._report_seq}", recipients=len(targets),
            skipped_opt_out=skipped, failed=failed,
        )
        self._mass_email_reports[report.id] = report
        return report

    def get_mass_email_report(self, report_id: str) -> MassEmailReport:
        report = self._mass_email_reports.get(report_id)
        if report is None:
            raise NotFound(f"mass email report {report_id} not found")
        return report

    # ------------------------------------------------------------------
    # Usage reports
    # ------------------------------------------------------------------

    def usage_report_from_log(self, period_from: date | None = None,
                              period_to: date | None = None) -> UsageReport:
        lines: list[str] = []
        if self.access_log and self.access_log.exists():
            lines = self.access_log.read_text(encoding="utf-8").splitlines()
        return usage_report(lines, period_from, period_to)


def usage_report(lines: Iterable[str], period_from: date | None = None,
                 period_to: date | None = None) -> UsageReport:
    """Pure tally of a Common Log Format slice; malformed lines never abort."""
    counters: dict[str, int] = {}
    users: set[str] = set()
    malformed = 0
    total = 0
    for line in lines:
        if not line.strip():
            continue
        total += 1
        m = CLF_RE.match(line)
        if not m:
            malformed += 1
            continue
        try:
            when = datetime.strptime(m.group("time"), "%d/%b/%Y:%H:%M:%S %z")
        except ValueError:
            malformed += 1
            continue
        request = m.group("request").split(" ")
        if len(request) != 3:
            malformed += 1
            continue
        if period_from and when.date() < period_from:
            continue
        if period_to and when.date() > period_to:
            continue
        key = normalize_route(request[1])
        counters[key] = counters.get(key, 0) + 1
        user = m.group("user")
        if user != "-":
            users.add(user)
    return UsageReport(
        period_from=period_from, period_to=period_to, counters=counters,
        distinct_users=len(users), malformed=malformed, total=total,
    )


def normalize_route(path: str) -> str:
    """Counter key for a request path: slashes to dots, query dropped,
    except the quick-search engine id which identifies the resource hit."""
    path, _, query = path.partition("?")
    key = path.strip("/").replace("/", ".") or "root"
    if key == "quick-search":
        for pair in query.split("&"):
            name, _, value = pair.partition("=")
            if name == "engine" and value:
                return f"quick-search.{value}"
    return key


def _required(payload: dict, key: str):
    value = payload.get(key)
    if value in (None, ""):
        raise Invalid(f"missing required field {key!r}")
    return value


# ---------------------------------------------------------------------------
# Seed fixtures
# ---------------------------------------------------------------------------


def load_seed(store: Store, path: str | Path) -> dict[str, int]:
    """Load a JSON-lines fixture. Each line is one record:

    {"kind": "discipline", "name": ..., "description"?}
    {"kind": "librarian", "name": ..., "phone"?, "email"?, "role"?, "disciplines": [names]}
    {"kind": "resource", "resource_kind": ..., "title": ..., "url": ...,
     "description"?, "url_template"?, "disciplines": [names]}
    {"kind": "recommendation", "discipline": name, "section": ..., "resources": [titles]}
    {"kind": "global_message", "body": ...}
    {"kind": "discipline_message", "discipline": name, "body": ...}
    {"kind": "user", "auth_id": ..., "name": ..., "email"?, "discipline": name, "email_opt_in"?}
    {"kind": "admin", "username": ..., "password": ...}

    References are by name/title so fixtures stay independent of generated ids.
    Lines starting with # and blank lines are ignored.
    """
    import json

    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise Invalid(f"seed line {lineno}: bad JSON ({exc})") from None
            kind = record.get("kind")
            try:
                _apply_seed_record(store, record)
            except (Invalid, NotFound) as exc:
                raise Invalid(f"seed line {lineno} ({kind}): {exc}") from None
            counts[kind] = counts.get(kind, 0) + 1
    return counts


def _discipline_id_by_name(store: Store, name: str) -> str:
    found = store.find_discipline_by_name(name)
    if found is None:
        raise NotFound(f"discipline {name!r} not found")
    return found.id


def _apply_seed_record(store: Store, record: dict) -> None:
    kind = record.get("kind")
    if kind == "discipline":
        store.add_discipline(_required(record, "name"), record.get("description", ""))
    elif kind == "librarian":
        store.add_librarian(
            _required(record, "name"), record.get("phone", ""), record.get("email", ""),
            LibrarianRole(record.get("role", "reference_librarian")),
            [_discipline_id_by_name(store, n) for n in record.get("disciplines", [])],
        )
    elif kind == "resource":
        store.add_resource(
            kind=ResourceKind(_required(record, "resource_kind")),
            title=_required(record, "title"),
            url=_required(record, "url"),
            description=record.get("description", ""),
            url_template=record.get("url_template"),
            discipline_ids=[_discipline_id_by_name(store, n) for n in record.get("disciplines", [])],
        )
    elif kind == "recommendation":
        did = _discipline_id_by_name(store, _required(record, "discipline"))
        section = Section(_required(record, "section"))
        wanted = record.get("resources", [])
        by_title = {r.title: r.id for r in store.list_resources()}
        missing = [t for t in wanted if t not in by_title]
        if missing:
            raise NotFound(f"resources not found: {', '.join(missing)}")
        store.set_recommendations(did, section, [by_title[t] for t in wanted])
    elif kind == "global_message":
        store.set_message(MessageScope.GLOBAL, record.get("body", ""))
    elif kind == "discipline_message":
        did = _discipline_id_by_name(store, _required(record, "discipline"))
        store.set_message(MessageScope.DISCIPLINE, record.get("body", ""), discipline_id=did)
    elif kind == "user":
        store.create_user(
            _required(record, "auth_id"), record.get("name", ""), record.get("email", ""),
            _discipline_id_by_name(store, _required(record, "discipline")),
            email_opt_in=record.get("email_opt_in", True),
        )
    elif kind == "admin":
        store.put_admin_account(
            _required(record, "username"), make_verifier(_required(record, "password")),
        )
    else:
        raise Invalid(f"unknown seed kind {kind!r}")
