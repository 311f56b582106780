"""User-facing portal service: sessions, page assembly, customization flows.

The life of a request: a cookie token resolves to a session, the
session's user gets their page assembled from the store, and customization
commands (`get` a form, `set` selections, anything else redisplays the
page) mutate only that user's selection sets.

Session tokens are random server-side values mapped to users; the cookie
never carries a database key.
"""

from __future__ import annotations

import hmac
from dataclasses import dataclass
from typing import Mapping, Protocol
from urllib.parse import quote, urlsplit

from . import __version__, callno
from .alerts import AlertEngine, AlertResult, TimeWindow
from .errors import AuthenticationFailed, Forbidden, Invalid, NotFound
from .model import (
    Message,
    MessageScope,
    ResourceKind,
    Section,
    classify,
    is_customizable,
    kind_for_section,
    section_order,
)
from .sessions import Session, SessionManager
from .store import CAProfile, Delivery, Store


@dataclass(frozen=True)
class AuthRedirect:
    """The caller must be sent to the authenticator at this URL."""

    url: str


@dataclass(frozen=True)
class ResolvedSession:
    session: Session
    fresh: bool  # a new token was issued and must be set as a cookie
    created_account: bool = False


class Authenticator(Protocol):
    redirect_url: str

    def verify(self, assertion: Mapping[str, str]) -> dict: ...


class StubAuthenticator:
    """Accepts any asserted identity; for demos and tests."""

    def __init__(self, redirect_url: str = "/login"):
        self.redirect_url = redirect_url

    def verify(self, assertion: Mapping[str, str]) -> dict:
        auth_id = (assertion.get("auth_id") or "").strip()
        if not auth_id:
            raise AuthenticationFailed("assertion is missing auth_id")
        return {
            "auth_id": auth_id,
            "name": assertion.get("name") or auth_id,
            "email": assertion.get("email") or "",
            "discipline": assertion.get("discipline") or "",
        }


class ExternalAuthenticator:
    """Trusts assertions countersigned by the external system's shared secret."""

    def __init__(self, redirect_url: str, shared_secret: str):
        if not shared_secret:
            raise Invalid("external authenticator requires auth_secret")
        self.redirect_url = redirect_url
        self._secret = shared_secret.encode("utf-8")

    def verify(self, assertion: Mapping[str, str]) -> dict:
        auth_id = (assertion.get("auth_id") or "").strip()
        signature = assertion.get("sig") or ""
        if not auth_id or not signature:
            raise AuthenticationFailed("assertion is missing auth_id or sig")
        expected = hmac.new(self._secret, auth_id.encode("utf-8"), "sha256").hexdigest()
        if not hmac.compare_digest(expected, signature):
            raise AuthenticationFailed("bad assertion signature")
        return {
            "auth_id": auth_id,
            "name": assertion.get("name") or auth_id,
            "email": assertion.get("email") or "",
            "discipline": assertion.get("discipline") or "",
        }

    def sign(self, auth_id: str) -> str:
        return hmac.new(self._secret, auth_id.encode("utf-8"), "sha256").hexdigest()


class PortalService:
    def __init__(self, store: Store, sessions: SessionManager, authenticator: Authenticator,
                 alert_engine: AlertEngine, *, reference_contact: dict | None = None,
                 default_discipline: str = "", version: str = __version__):
        self.store = store
        self.sessions = sessions
        self.authenticator = authenticator
        self.alerts = alert_engine
        self.reference_contact = reference_contact or {}
        self.default_discipline = default_discipline
        self.version = version

    # ------------------------------------------------------------------
    # Session flow
    # ------------------------------------------------------------------

    def resolve_session(self, cookie_token: str | None = None,
                        assertion: Mapping[str, str] | None = None
                        ) -> ResolvedSession | AuthRedirect:
        session = self.sessions.resolve(cookie_token)
        if session is not None:
            return ResolvedSession(session=session, fresh=False)
        if not assertion:
            return AuthRedirect(self.authenticator.redirect_url)
        identity = self.authenticator.verify(assertion)
        user = self.store.get_user_by_auth_id(identity["auth_id"])
        created = False
        if user is None:
            user = self.store.create_user(
                auth_id=identity["auth_id"],
                name=identity["name"],
                email=identity["email"],
                discipline_id=self._onboarding_discipline(identity.get("discipline", "")),
            )
            created = True
        fresh = self.sessions.issue(user.id)
        return ResolvedSession(session=fresh, fresh=True, created_account=created)

    def logout(self, token: str | None) -> None:
        """Idempotent; the old token never resolves again."""
        self.sessions.invalidate(token)

    def _onboarding_discipline(self, hint: str) -> str:
        for candidate in (hint, self.default_discipline):
            if not candidate:
                continue
            try:
                return self.store.get_discipline(candidate).id
            except NotFound:
                pass
            found = self.store.find_discipline_by_name(candidate)
            if found:
                return found.id
        disciplines = self.store.list_disciplines()
        if not disciplines:
            raise Invalid("no disciplines configured; seed the store first")
        return disciplines[0].id

    # ------------------------------------------------------------------
    # Page assembly
    # ------------------------------------------------------------------

    def assemble_page(self, user_id: str) -> dict:
        """All thirteen sections in page order; customizable blocks mirror
        the user's stored selections sorted by title."""
        user = self.store.get_user(user_id)
        discipline = self.store.get_discipline(user.discipline_id)
        blocks = []
        for section in section_order():
            blocks.append(self._block(section, user, discipline))
        return {
            "user": {
                "id": user.id,
                "name": user.name,
                "email": user.email,
                "discipline_id": user.discipline_id,
                "discipline": discipline.name,
                "email_opt_in": user.email_opt_in,
            },
            "sections": blocks,
        }

    def _block(self, section: Section, user, discipline) -> dict:
        block: dict = {
            "section": section.value,
            "classification": _classification_dict(section),
            "customizable": is_customizable(section),
        }
        if section is Section.HEADER:
            block["items"] = [{"user_name": user.name, "discipline": discipline.name}]
        elif section is Section.FOOTER:
            block["items"] = [{
                "version": self.version,
                "contact": self.reference_contact.get("email", ""),
            }]
        elif section is Section.GLOBAL_MESSAGE:
            block["items"] = [_message_item(self.store.get_live_message(MessageScope.GLOBAL))]
        elif section is Section.MESSAGE_FROM_LIBRARIAN:
            live = self.store.get_live_message(MessageScope.DISCIPLINE, user.discipline_id)
            block["items"] = [_message_item(live)]
        elif section is Section.YOUR_LIBRARIANS:
            items = [
                {"name": l.name, "phone": l.phone, "email": l.email, "role": l.role.value}
                for l in self.store.list_librarians(user.discipline_id)
            ]
            if self.reference_contact:
                items.append({
                    "name": self.reference_contact.get("name", "Reference Desk"),
                    "phone": self.reference_contact.get("phone", ""),
                    "email": self.reference_contact.get("email", ""),
                    "role": "reference_desk",
                })
            block["items"] = items
        elif section is Section.CURRENT_AWARENESS:
            block["items"] = [_profile_item(p) for p in self.store.list_profiles(user.id)]
            block["window_form"] = {
                "from_weeks_ago": 2,
                "to_weeks_ago": 0,
                "delivery_options": [d.value for d in Delivery],
            }
            block["customized"] = bool(block["items"])
        else:
            selection = self.store.get_selection_set(user.id, section)
            resources = [self.store.get_resource(rid) for rid in selection.resource_ids]
            resources.sort(key=lambda r: (r.title.casefold(), r.id))
            block["items"] = [_resource_item(r) for r in resources]
            block["customized"] = selection.customized
        return block

    # ------------------------------------------------------------------
    # Customization dispatch
    # ------------------------------------------------------------------

    def dispatch(self, user_id: str, command: str, section: str | None = None,
                 resource_ids: list[str] | None = None) -> dict:
        """`get` returns the section's form, `set` stores selections and
        returns the page, anything else just returns the page."""
        if command == "get":
            return self.customization_form(user_id, _parse_section(section))
        if command == "set":
            self.store.set_selections(user_id, _parse_section(section), resource_ids or [])
            return self.assemble_page(user_id)
        return self.assemble_page(user_id)

    def customization_form(self, user_id: str, section: Section) -> dict:
        user = self.store.get_user(user_id)
        if not is_customizable(section):
            raise Invalid(f"section {section.value} is not customizable")
        if section is Section.CURRENT_AWARENESS:
            return {
                "section": section.value,
                "profiles": [_profile_item(p) for p in self.store.list_profiles(user.id)],
                "delivery_options": [d.value for d in Delivery],
            }
        selected = self.store.get_selections(user.id, section)
        kind = kind_for_section(section)
        if kind is ResourceKind.PERSONAL_LINK:
            own = [r for r in self.store.list_resources(kind=kind)
                   if r.owner_user_id == user.id]
            groups = [{
                "discipline_id": None,
                "discipline": "Personal links",
                "items": [_form_item(r, selected) for r in own],
            }]
        else:
            groups = []
            for discipline in self.store.list_disciplines():
                resources = self.store.list_resources(kind=kind, discipline_id=discipline.id)
                if resources:
                    groups.append({
                        "discipline_id": discipline.id,
                        "discipline": discipline.name,
                        "items": [_form_item(r, selected) for r in resources],
                    })
        return {"section": section.value, "selected": selected, "groups": groups}

    # ------------------------------------------------------------------
    # Quick search
    # ------------------------------------------------------------------

    def quick_search(self, user_id: str, engine_id: str, query: str) -> str:
        """The engine's URL template with {query} percent-encoded in."""
        if not query:
            raise Invalid("query must be non-empty")
        selected = self.store.get_selections(user_id, Section.QUICK_SEARCHES)
        if engine_id not in selected:
            raise NotFound(f"search engine {engine_id} is not in your Quick Searches")
        engine = self.store.get_resource(engine_id)
        return (engine.url_template or "").replace("{query}", quote(query, safe=""))

    # ------------------------------------------------------------------
    # Personal links
    # ------------------------------------------------------------------

    def add_personal_link(self, user_id: str, title: str, url: str):
        if not title or not title.strip():
            raise Invalid("personal link needs a label")
        _check_url(url)
        return self.store.add_personal_link(user_id, title.strip(), url)

    def delete_personal_link(self, user_id: str, resource_id: str) -> None:
        self.store.delete_personal_link(user_id, resource_id)

    # ------------------------------------------------------------------
    # Discipline, profiles
    # ------------------------------------------------------------------

    def set_discipline(self, user_id: str, discipline_id: str) -> dict:
        self.store.set_user_discipline(user_id, discipline_id)
        return self.assemble_page(user_id)

    def save_profile(self, user_id: str, range_text: str, delivery: str) -> dict:
        profile = self.alerts.save_profile(user_id, range_text, delivery)
        return _profile_item(profile)

    def delete_profile(self, user_id: str, profile_id: str) -> None:
        profile = self.store.get_profile(profile_id)
        if profile.user_id != user_id:
            raise Forbidden("not your profile")
        self.store.delete_profile(profile_id)

    def profile_results(self, user_id: str, profile_id: str,
                        from_weeks_ago: int, to_weeks_ago: int) -> dict:
        profile = self.store.get_profile(profile_id)
        if profile.user_id != user_id:
            raise Forbidden("not your profile")
        window = TimeWindow(from_weeks_ago=from_weeks_ago, to_weeks_ago=to_weeks_ago)
        return _result_dict(self.alerts.run_window_query(profile, window))

    def list_profiles(self, user_id: str) -> list[dict]:
        return [_profile_item(p) for p in self.store.list_profiles(user_id)]


# ---------------------------------------------------------------------------
# Document helpers
# ---------------------------------------------------------------------------


def _parse_section(value: str | None) -> Section:
    try:
        return Section(value)
    except ValueError:
        raise Invalid(f"unknown section {value!r}") from None


def _classification_dict(section: Section) -> dict | None:
    try:
        mode, agent = classify(section)
    except ValueError:
        return None
    return {"mode": mode.value, "agent": agent.value}


def _message_item(message: Message | None) -> dict:
    if message is None:
        return {"body": "", "updated_at": None}
    return {"body": message.body, "updated_at": message.updated_at.isoformat()}


def _resource_item(resource) -> dict:
    return {
        "id": resource.id,
        "title": resource.title,
        "url": resource.url,
        "description": resource.description,
    }


def _form_item(resource, selected: list[str]) -> dict:
    item = _resource_item(resource)
    item["checked"] = resource.id in selected
    return item


def _profile_item(profile: CAProfile) -> dict:
    return {
        "id": profile.id,
        "ranges": callno.format_range_list(list(profile.ranges)),
        "delivery": profile.delivery.value,
    }


def _result_dict(result: AlertResult) -> dict:
    return {
        "profile_id": result.profile_id,
        "window": {
            "from_weeks_ago": result.window.from_weeks_ago,
            "to_weeks_ago": result.window.to_weeks_ago,
            "start": result.start.isoformat(),
            "end": result.end.isoformat(),
        },
        "items": [
            {
                "call_number": i.call_number,
                "author": i.author,
                "title": i.title,
                "record_url": i.record_url,
            }
            for i in result.items
        ],
    }


def _check_url(url: str) -> None:
    parts = urlsplit(url)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise Invalid(f"malformed url {url!r}")
