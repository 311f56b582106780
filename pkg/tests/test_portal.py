"""Portal service tests: sessions, page assembly, dispatch, quick search, links."""

from datetime import timedelta

import pytest

from libportal.alerts import AlertEngine
from libportal.errors import AuthenticationFailed, Forbidden, Invalid, NotFound
from libportal.mail import StdoutTransport
from libportal.model import MessageScope, Section
from libportal.portal import (
    AuthRedirect,
    ExternalAuthenticator,
    PortalService,
    ResolvedSession,
    StubAuthenticator,
)
from libportal.sessions import SessionManager

from conftest import seed_catalog


@pytest.fixture
def service(catalog_store):
    store, fixtures = catalog_store
    sessions = SessionManager(timedelta(days=30))
    engine = AlertEngine(store, StdoutTransport())
    portal = PortalService(
        store, sessions, StubAuthenticator("/login"), engine,
        reference_contact={"name": "Reference Desk", "email": "libref@example.test",
                           "phone": "555-0135"},
        default_discipline="Philosophy",
    )
    return portal, store, fixtures


class TestSessions:
    def test_no_cookie_no_assertion_redirects(self, service):
        portal, *_ = service
        resolved = portal.resolve_session(None, None)
        assert resolved == AuthRedirect("/login")

    def test_assertion_creates_account_with_defaults(self, service):
        portal, store, fixtures = service
        resolved = portal.resolve_session(None, {"auth_id": "alice", "name": "Alice",
                                                 "discipline": "Philosophy"})
        assert isinstance(resolved, ResolvedSession)
        assert resolved.fresh and resolved.created_account
        user = store.get_user(resolved.session.principal)
        assert user.auth_id == "alice"
        home = fixtures["resources"]["home"]
        assert store.get_selections(user.id, Section.LIBRARY_LINKS) == [home.id]

    def test_valid_token_resolves_without_new_session(self, service):
        portal, store, _ = service
        first = portal.resolve_session(None, {"auth_id": "alice"})
        again = portal.resolve_session(first.session.token, None)
        assert isinstance(again, ResolvedSession)
        assert not again.fresh
        assert again.session.principal == first.session.principal

    def test_known_auth_id_reuses_account(self, service):
        portal, store, _ = service
        first = portal.resolve_session(None, {"auth_id": "alice"})
        second = portal.resolve_session(None, {"auth_id": "alice"})
        assert not second.created_account
        assert second.session.principal == first.session.principal

    def test_malformed_assertion_fails(self, service):
        portal, *_ = service
        with pytest.raises(AuthenticationFailed):
            portal.resolve_session(None, {"auth_id": "   "})

    def test_logout_invalidates_token(self, service):
        portal, *_ = service
        resolved = portal.resolve_session(None, {"auth_id": "alice"})
        token = resolved.session.token
        portal.logout(token)
        assert portal.resolve_session(token, None) == AuthRedirect("/login")
        portal.logout(token)  # idempotent

    def test_logout_leaves_other_sessions_alone(self, service):
        portal, *_ = service
        a = portal.resolve_session(None, {"auth_id": "alice"})
        b = portal.resolve_session(a.session.token and None, {"auth_id": "alice"})
        portal.logout(a.session.token)
        still = portal.resolve_session(b.session.token, None)
        assert isinstance(still, ResolvedSession)


class TestExternalAuthenticator:
    def test_signature_verified(self):
        auth = ExternalAuthenticator("https://sso.example.test/", "secret")
        good = auth.sign("alice")
        identity = auth.verify({"auth_id": "alice", "sig": good})
        assert identity["auth_id"] == "alice"
        with pytest.raises(AuthenticationFailed):
            auth.verify({"auth_id": "alice", "sig": "0" * 64})
        with pytest.raises(AuthenticationFailed):
            auth.verify({"auth_id": "alice"})


class TestPageAssembly:
    def _user(self, portal):
        return portal.resolve_session(None, {"auth_id": "alice", "name": "Alice"}).session.principal

    def test_thirteen_sections_in_order(self, service):
        portal, *_ = service
        page = portal.assemble_page(self._user(portal))
        names = [block["section"] for block in page["sections"]]
        assert names == [s.value for s in Section]

    def test_selected_items_listed(self, service):
        portal, store, fixtures = service
        user_id = self._user(portal)
        block = _block(portal.assemble_page(user_id), "library_links")
        assert [i["title"] for i in block["items"]] == ["University Libraries home page"]

    def test_librarians_with_contact_info(self, service):
        portal, *_ = service
        block = _block(portal.assemble_page(self._user(portal)), "your_librarians")
        names = [i["name"] for i in block["items"]]
        assert "Sasha Birch" in names and "Pat Keeler" in names
        sasha = next(i for i in block["items"] if i["name"] == "Sasha Birch")
        assert sasha["phone"] == "555-0136"
        assert sasha["email"] == "sasha_birch@example.test"
        assert block["items"][-1]["name"] == "Reference Desk"

    def test_empty_global_message_block_present(self, service):
        portal, *_ = service
        block = _block(portal.assemble_page(self._user(portal)), "global_message")
        assert block["items"] == [{"body": "", "updated_at": None}]

    def test_live_messages_shown(self, service):
        portal, store, fixtures = service
        store.set_message(MessageScope.GLOBAL, "Welcome back!")
        store.set_message(MessageScope.DISCIPLINE, "Try the authors database",
                          discipline_id=fixtures["d1"].id)
        page = portal.assemble_page(self._user(portal))
        assert _block(page, "global_message")["items"][0]["body"] == "Welcome back!"
        assert _block(page, "message_from_librarian")["items"][0]["body"] == \
            "Try the authors database"

    def test_items_sorted_by_title(self, service):
        portal, store, fixtures = service
        user_id = self._user(portal)
        block = _block(portal.assemble_page(user_id), "bibliographic_databases")
        titles = [i["title"] for i in block["items"]]
        assert titles == sorted(titles, key=str.casefold)

    def test_classification_attached(self, service):
        portal, *_ = service
        page = portal.assemble_page(self._user(portal))
        assert _block(page, "header")["classification"] is None
        assert _block(page, "global_message")["classification"] == \
            {"mode": "proactive", "agent": "computer"}
        assert _block(page, "your_librarians")["classification"] == \
            {"mode": "reactive", "agent": "human"}


class TestDispatch:
    def _user(self, portal):
        return portal.resolve_session(None, {"auth_id": "alice"}).session.principal

    def test_get_returns_form_with_checked_flags(self, service):
        portal, store, fixtures = service
        user_id = self._user(portal)
        form = portal.dispatch(user_id, "get", "library_links")
        assert form["section"] == "library_links"
        items = [i for g in form["groups"] for i in g["items"]]
        home = fixtures["resources"]["home"]
        assert any(i["id"] == home.id and i["checked"] for i in items)

    def test_set_persists_and_returns_page(self, service):
        portal, store, fixtures = service
        user_id = self._user(portal)
        bip = fixtures["resources"]["bip"]
        page = portal.dispatch(user_id, "set", "bibliographic_databases", [bip.id])
        block = _block(page, "bibliographic_databases")
        assert [i["id"] for i in block["items"]] == [bip.id]
        assert store.get_selections(user_id, Section.BIBLIOGRAPHIC_DATABASES) == [bip.id]

    def test_unknown_command_falls_back_to_page(self, service):
        portal, *_ = service
        user_id = self._user(portal)
        page = portal.dispatch(user_id, "frobnicate")
        assert [b["section"] for b in page["sections"]] == [s.value for s in Section]

    def test_unknown_section_invalid(self, service):
        portal, *_ = service
        user_id = self._user(portal)
        with pytest.raises(Invalid):
            portal.dispatch(user_id, "get", "no_such_section")
        with pytest.raises(Invalid):
            portal.dispatch(user_id, "set", "header", [])


class TestQuickSearch:
    def _user(self, portal):
        return portal.resolve_session(None, {"auth_id": "alice"}).session.principal

    def test_substitutes_query(self, service):
        portal, store, fixtures = service
        user_id = self._user(portal)
        engine_id = fixtures["resources"]["dict"].id
        url = portal.quick_search(user_id, engine_id, "hegel")
        assert url == "https://example.test/dict?q=hegel"

    def test_percent_encodes(self, service):
        portal, store, fixtures = service
        user_id = self._user(portal)
        engine_id = fixtures["resources"]["dict"].id
        assert portal.quick_search(user_id, engine_id, "free will") == \
            "https://example.test/dict?q=free%20will"

    def test_empty_query_invalid(self, service):
        portal, store, fixtures = service
        with pytest.raises(Invalid):
            portal.quick_search(self._user(portal), fixtures["resources"]["dict"].id, "")

    def test_unselected_engine_not_found(self, service):
        portal, store, fixtures = service
        user_id = self._user(portal)
        portal.store.set_selections(user_id, Section.QUICK_SEARCHES, [])
        with pytest.raises(NotFound):
            portal.quick_search(user_id, fixtures["resources"]["dict"].id, "hegel")


class TestPersonalLinks:
    def _user(self, portal, auth_id="alice"):
        return portal.resolve_session(None, {"auth_id": auth_id}).session.principal

    def test_add_appears_on_page(self, service):
        portal, *_ = service
        user_id = self._user(portal)
        resource = portal.add_personal_link(user_id, "NY Times", "https://example.test/nyt")
        block = _block(portal.assemble_page(user_id), "personal_links")
        assert [i["id"] for i in block["items"]] == [resource.id]

    def test_delete_own_link(self, service):
        portal, *_ = service
        user_id = self._user(portal)
        resource = portal.add_personal_link(user_id, "NY Times", "https://example.test/nyt")
        portal.delete_personal_link(user_id, resource.id)
        block = _block(portal.assemble_page(user_id), "personal_links")
        assert block["items"] == []

    def test_delete_other_users_link_forbidden(self, service):
        portal, *_ = service
        owner = self._user(portal, "owner")
        thief = self._user(portal, "thief")
        resource = portal.add_personal_link(owner, "Mine", "https://example.test/mine")
        with pytest.raises(Forbidden):
            portal.delete_personal_link(thief, resource.id)

    def test_malformed_url_invalid(self, service):
        portal, *_ = service
        user_id = self._user(portal)
        with pytest.raises(Invalid):
            portal.add_personal_link(user_id, "Bad", "javascript:alert(1)")
        with pytest.raises(Invalid):
            portal.add_personal_link(user_id, "Bad", "not a url")


class TestDisciplineChange:
    def test_librarians_follow_discipline(self, service):
        portal, store, fixtures = service
        user_id = portal.resolve_session(None, {"auth_id": "alice"}).session.principal
        before = _block(portal.assemble_page(user_id), "your_librarians")
        assert any(i["name"] == "Sasha Birch" for i in before["items"])

        page = portal.set_discipline(user_id, fixtures["d2"].id)
        after = _block(page, "your_librarians")
        assert not any(i["name"] == "Sasha Birch" for i in after["items"])

    def test_selections_survive_discipline_change(self, service):
        portal, store, fixtures = service
        user_id = portal.resolve_session(None, {"auth_id": "alice"}).session.principal
        before = store.get_selections(user_id, Section.BIBLIOGRAPHIC_DATABASES)
        portal.set_discipline(user_id, fixtures["d2"].id)
        assert store.get_selections(user_id, Section.BIBLIOGRAPHIC_DATABASES) == before

    def test_same_discipline_is_idempotent(self, service):
        portal, store, fixtures = service
        user_id = portal.resolve_session(None, {"auth_id": "alice"}).session.principal
        first = portal.assemble_page(user_id)
        second = portal.set_discipline(user_id, fixtures["d1"].id)
        assert first == second

    def test_unknown_discipline_not_found(self, service):
        portal, *_ = service
        user_id = portal.resolve_session(None, {"auth_id": "alice"}).session.principal
        with pytest.raises(NotFound):
            portal.set_discipline(user_id, "d999")


def _block(page: dict, section: str) -> dict:
    return next(b for b in page["sections"] if b["section"] == section)
