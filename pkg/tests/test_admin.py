"""Admin plane tests: credentials, CRUD, mass email, log-derived reports."""

from datetime import date, timedelta

import pytest

from libportal.admin import (
    AdminService,
    load_seed,
    make_verifier,
    normalize_route,
    usage_report,
    verify_password,
)
from libportal.errors import AuthenticationFailed, Conflict, Invalid, NotFound
from libportal.mail import FailingTransport, MailMessage, StdoutTransport
from libportal.model import MessageScope, Section
from libportal.sessions import SessionManager
from libportal.store import Store

from conftest import seed_catalog


class CollectingTransport:
    def __init__(self):
        self.sent: list[MailMessage] = []

    def send(self, message: MailMessage) -> None:
        self.sent.append(message)


@pytest.fixture
def admin_env(catalog_store):
    store, fixtures = catalog_store
    transport = CollectingTransport()
    service = AdminService(store, SessionManager(timedelta(hours=4)), transport,
                           mail_from="admin@example.test")
    service.create_account("admin", "correct horse")
    return service, store, fixtures, transport


class TestCredentials:
    def test_verifier_roundtrip(self):
        verifier = make_verifier("s3cret")
        assert verifier.startswith("pbkdf2_sha256$")
        assert verify_password(verifier, "s3cret")
        assert not verify_password(verifier, "wrong")
        assert not verify_password("garbage", "s3cret")

    def test_login_success_and_rejection(self, admin_env):
        service, *_ = admin_env
        session = service.login("admin", "correct horse")
        assert session is not None
        assert service.login("admin", "wrong") is None
        assert service.login("nobody", "correct horse") is None

    def test_require_rejects_missing_token(self, admin_env):
        service, *_ = admin_env
        with pytest.raises(AuthenticationFailed):
            service.require(None)
        with pytest.raises(AuthenticationFailed):
            service.require("bogus")
        session = service.login("admin", "correct horse")
        assert service.require(session.token).principal == "admin"


class TestEntityCrud:
    def test_upsert_discipline_and_update(self, admin_env):
        service, store, *_ = admin_env
        created = service.upsert_entity("discipline", {"name": "History"})
        assert created["id"]
        updated = service.upsert_entity("discipline", {"id": created["id"],
                                                       "description": "the past"})
        assert updated["description"] == "the past"

    def test_librarian_without_discipline_fails(self, admin_env):
        service, *_ = admin_env
        with pytest.raises(Invalid):
            service.upsert_entity("librarian", {"name": "New Hire", "discipline_ids": []})

    def test_delete_resource_reports_cascade(self, admin_env):
        service, store, fixtures, _ = admin_env
        store.create_user("u@x", "U", "u@example.test", fixtures["d1"].id)
        report = service.delete_entity("resource", fixtures["resources"]["cc"].id)
        assert report["selections"] == 1
        assert report["recommendations"] == 1

    def test_delete_referenced_discipline_refused(self, admin_env):
        service, store, fixtures, _ = admin_env
        store.create_user("u@x", "U", "u@example.test", fixtures["d1"].id)
        with pytest.raises(Conflict) as exc:
            service.delete_entity("discipline", fixtures["d1"].id)
        assert "1 user(s)" in str(exc.value)

    def test_unknown_kind_invalid(self, admin_env):
        service, *_ = admin_env
        with pytest.raises(Invalid):
            service.upsert_entity("wombat", {})


class TestMessages:
    def test_global_message_set_and_clear(self, admin_env):
        service, store, *_ = admin_env
        service.set_global_message("Hello all")
        assert store.get_live_message(MessageScope.GLOBAL).body == "Hello all"
        service.set_global_message("")
        assert store.get_live_message(MessageScope.GLOBAL) is None

    def test_discipline_message_scoped(self, admin_env):
        service, store, fixtures, _ = admin_env
        service.set_discipline_message(fixtures["d1"].id, "phil news")
        assert store.get_live_message(MessageScope.DISCIPLINE, fixtures["d1"].id).body == "phil news"
        assert store.get_live_message(MessageScope.DISCIPLINE, fixtures["d2"].id) is None


class TestMassEmail:
    def test_opt_out_skipped(self, admin_env):
        service, store, fixtures, transport = admin_env
        d1 = fixtures["d1"].id
        store.create_user("u1@x", "U1", "u1@example.test", d1)
        u2 = store.create_user("u2@x", "U2", "u2@example.test", d1)
        store.create_user("u3@x", "U3", "u3@example.test", d1)
        store.set_email_opt_in(u2.id, False)

        report = service.mass_email([d1], "Subject", "Body")
        assert report.recipients == 2
        assert report.skipped_opt_out == 1
        assert sorted(m.to_addr for m in transport.sent) == \
            ["u1@example.test", "u3@example.test"]

    def test_overlapping_disciplines_deduplicated(self, admin_env):
        service, store, fixtures, transport = admin_env
        d1, d2 = fixtures["d1"].id, fixtures["d2"].id
        store.create_user("u1@x", "U1", "u1@example.test", d1)
        report = service.mass_email([d1, d2, d1], "S", "B")
        assert report.recipients == 1
        assert len(transport.sent) == 1

    def test_empty_discipline_list_invalid(self, admin_env):
        service, *_ = admin_env
        with pytest.raises(Invalid):
            service.mass_email([], "S", "B")

    def test_unknown_discipline_not_found(self, admin_env):
        service, *_ = admin_env
        with pytest.raises(NotFound):
            service.mass_email(["d999"], "S", "B")

    def test_transport_failure_queues_retry(self, catalog_store):
        store, fixtures = catalog_store
        inner = CollectingTransport()
        service = AdminService(store, SessionManager(timedelta(hours=4)),
                               FailingTransport(inner, failures=1))
        store.create_user("u1@x", "U1", "u1@example.test", fixtures["d1"].id)
        store.create_user("u2@x", "U2", "u2@example.test", fixtures["d1"].id)
        report = service.mass_email([fixtures["d1"].id], "S", "B")
        assert report.recipients == 2
        assert report.failed == 1
        assert len(store.list_retries()) == 1

    def test_report_pollable_by_id(self, admin_env):
        service, store, fixtures, _ = admin_env
        store.create_user("u1@x", "U1", "u1@example.test", fixtures["d1"].id)
        report = service.mass_email([fixtures["d1"].id], "S", "B")
        assert service.get_mass_email_report(report.id) == report
        with pytest.raises(NotFound):
            service.get_mass_email_report("me999")


def clf_line(path, user="-", status=200, when="11/Mar/2026:09:00:00 +0000", host="10.0.0.1"):
    return f'{host} - {user} [{when}] "GET {path} HTTP/1.1" {status} 123'


class TestUsageReport:
    def test_hand_tallied_counts(self):
        lines = [
            clf_line("/page", user="alice"),
            clf_line("/page", user="bob"),
            clf_line("/customize/library_links", user="alice"),
        ]
        report = usage_report(lines)
        assert report.counters == {"page": 2, "customize.library_links": 1}
        assert report.distinct_users == 2
        assert report.malformed == 0

    def test_empty_slice(self):
        report = usage_report([])
        assert report.counters == {}
        assert report.distinct_users == 0
        assert report.total == 0

    def test_garbage_line_counted_separately(self):
        report = usage_report([clf_line("/page"), "total garbage"])
        assert report.counters == {"page": 1}
        assert report.malformed == 1

    def test_period_filter(self):
        lines = [
            clf_line("/page", when="01/Jan/2026:10:00:00 +0000"),
            clf_line("/page", when="15/Feb/2026:10:00:00 +0000"),
            clf_line("/page", when="20/Mar/2026:10:00:00 +0000"),
        ]
        report = usage_report(lines, period_from=date(2026, 2, 1), period_to=date(2026, 2, 28))
        assert report.counters == {"page": 1}

    def test_recomputation_is_identical(self):
        lines = [clf_line(f"/customize/{s}", user=f"u{i % 7}")
                 for i, s in enumerate(["library_links", "quick_searches"] * 50)]
        first = usage_report(lines)
        for _ in range(4):
            assert usage_report(lines) == first

    def test_quick_search_engine_counted(self):
        report = usage_report([clf_line("/quick-search?engine=r6&q=hegel")])
        assert report.counters == {"quick-search.r6": 1}


def test_normalize_route():
    assert normalize_route("/page") == "page"
    assert normalize_route("/customize/library_links") == "customize.library_links"
    assert normalize_route("/admin/resources?x=1") == "admin.resources"
    assert normalize_route("/") == "root"
    assert normalize_route("/quick-search?engine=r6&q=a") == "quick-search.r6"
    assert normalize_route("/quick-search?q=a") == "quick-search"


class TestSeed:
    def test_full_fixture_loads(self, tmp_path):
        path = tmp_path / "seed.jsonl"
        path.write_text(
            '# demo fixture\n'
            '{"kind": "discipline", "name": "Philosophy"}\n'
            '{"kind": "librarian", "name": "Sasha Birch", "phone": "555-0136",'
            ' "email": "sasha@example.test", "disciplines": ["Philosophy"]}\n'
            '{"kind": "resource", "resource_kind": "library_link",'
            ' "title": "Home", "url": "https://example.test/", "disciplines": ["Philosophy"]}\n'
            '{"kind": "recommendation", "discipline": "Philosophy",'
            ' "section": "library_links", "resources": ["Home"]}\n'
            '{"kind": "global_message", "body": "hello"}\n'
            '{"kind": "user", "auth_id": "alice", "name": "Alice",'
            ' "discipline": "Philosophy"}\n'
            '{"kind": "admin", "username": "root", "password": "pw"}\n',
            encoding="utf-8",
        )
        store = Store()
        counts = load_seed(store, path)
        assert counts == {"discipline": 1, "librarian": 1, "resource": 1,
                          "recommendation": 1, "global_message": 1, "user": 1, "admin": 1}
        user = store.get_user_by_auth_id("alice")
        assert user is not None
        assert len(store.get_selections(user.id, Section.LIBRARY_LINKS)) == 1
        assert store.get_admin_account("root") is not None

    def test_unknown_reference_reports_line(self, tmp_path):
        path = tmp_path / "seed.jsonl"
        path.write_text('{"kind": "librarian", "name": "X", "disciplines": ["Nope"]}\n',
                        encoding="utf-8")
        with pytest.raises(Invalid) as exc:
            load_seed(Store(), path)
        assert "line 1" in str(exc.value)
