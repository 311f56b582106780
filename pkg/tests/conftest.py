"""Shared fixtures: a seeded store and a wired test client."""

from __future__ import annotations

from datetime import datetime, timezone

import pytest
from fastapi.testclient import TestClient

from libportal.app import create_app
from libportal.config import AppConfig
from libportal.mail import SpoolTransport
from libportal.model import LibrarianRole, ResourceKind, Section
from libportal.store import Store

NOW = datetime(2026, 3, 11, 9, 0, tzinfo=timezone.utc)


def seed_catalog(store: Store) -> dict:
    """A small curated collection shared by the service-level tests."""
    d1 = store.add_discipline("Philosophy")
    d2 = store.add_discipline("Computer Science")
    sasha = store.add_librarian("Sasha Birch", "555-0136", "sasha_birch@example.test",
                                LibrarianRole.REFERENCE_LIBRARIAN, [d1.id])
    pat = store.add_librarian("Pat Keeler", "555-0190", "pat_keeler@example.test",
                              LibrarianRole.COLLECTION_MANAGER, [d1.id])
    r = {}
    r["home"] = store.add_resource(ResourceKind.LIBRARY_LINK, "University Libraries home page",
                                   "https://example.test/home", discipline_ids=[d1.id, d2.id])
    r["research"] = store.add_resource(ResourceKind.UNIVERSITY_LINK, "Research",
                                       "https://example.test/research", discipline_ids=[d1.id])
    r["cc"] = store.add_resource(ResourceKind.BIBLIOGRAPHIC_DATABASE, "Current Contents",
                                 "https://example.test/cc", discipline_ids=[d1.id])
    r["bip"] = store.add_resource(ResourceKind.BIBLIOGRAPHIC_DATABASE, "Books in Print",
                                  "https://example.test/bip", discipline_ids=[d1.id, d2.id])
    r["pal"] = store.add_resource(ResourceKind.ELECTRONIC_JOURNAL, "Philosophy and Literature",
                                  "https://example.test/pal", discipline_ids=[d1.id])
    r["dict"] = store.add_resource(ResourceKind.QUICK_SEARCH_ENGINE, "Dictionary",
                                   "https://example.test/dict",
                                   url_template="https://example.test/dict?q={query}",
                                   discipline_ids=[d1.id])
    r["acqweb"] = store.add_resource(ResourceKind.REFERENCE, "Acq Web",
                                     "https://example.test/acqweb", discipline_ids=[d1.id])

    store.set_recommendations(d1.id, Section.LIBRARY_LINKS, [r["home"].id])
    store.set_recommendations(d1.id, Section.UNIVERSITY_LINKS, [r["research"].id])
    store.set_recommendations(d1.id, Section.BIBLIOGRAPHIC_DATABASES, [r["cc"].id, r["bip"].id])
    store.set_recommendations(d1.id, Section.ELECTRONIC_JOURNALS, [r["pal"].id])
    store.set_recommendations(d1.id, Section.QUICK_SEARCHES, [r["dict"].id])
    store.set_recommendations(d1.id, Section.REFERENCE_SHELF, [r["acqweb"].id])
    store.set_recommendations(d2.id, Section.LIBRARY_LINKS, [r["home"].id])

    return {"d1": d1, "d2": d2, "sasha": sasha, "pat": pat, "resources": r}


@pytest.fixture
def catalog_store():
    store = Store()
    fixtures = seed_catalog(store)
    return store, fixtures


@pytest.fixture
def web(tmp_path):
    """TestClient over a fully wired app with a stub authenticator,
    spool mail transport, and a fixed clock."""
    store = Store()
    fixtures = seed_catalog(store)
    config = AppConfig(
        data_dir=str(tmp_path / "data"),
        mail_transport="spool",
        spool_dir=str(tmp_path / "spool"),
        mail_from="alerts@example.test",
        reference_contact_name="Reference Desk",
        reference_contact_email="libref@example.test",
        reference_contact_phone="555-0135",
        default_discipline="Philosophy",
    )
    transport = SpoolTransport(config.resolved_spool_dir())
    app = create_app(config, store=store, transport=transport, clock=lambda: NOW)
    client = TestClient(app)
    return client, store, fixtures, app


def login(client, auth_id: str, **params):
    response = client.get("/login", params={"auth_id": auth_id, **params})
    assert response.status_code == 200, response.text
    return response.json()
