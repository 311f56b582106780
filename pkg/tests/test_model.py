"""Domain vocabulary tests: section taxonomy, service classification, validation."""

import pytest

from libportal.model import (
    Agent,
    Mode,
    Resource,
    ResourceKind,
    Section,
    classify,
    is_customizable,
    kind_for_section,
    section_for_kind,
    section_order,
    validate_resource,
)

EXPECTED_ORDER = [
    Section.HEADER,
    Section.GLOBAL_MESSAGE,
    Section.MESSAGE_FROM_LIBRARIAN,
    Section.YOUR_LIBRARIANS,
    Section.LIBRARY_LINKS,
    Section.UNIVERSITY_LINKS,
    Section.CURRENT_AWARENESS,
    Section.PERSONAL_LINKS,
    Section.QUICK_SEARCHES,
    Section.REFERENCE_SHELF,
    Section.BIBLIOGRAPHIC_DATABASES,
    Section.ELECTRONIC_JOURNALS,
    Section.FOOTER,
]


def test_section_order_is_the_full_page_layout():
    assert section_order() == EXPECTED_ORDER
    assert section_order()[0] is Section.HEADER
    assert section_order()[-1] is Section.FOOTER
    assert len(section_order()) == 13


def test_eight_sections_are_customizable():
    customizable = [s for s in section_order() if is_customizable(s)]
    assert customizable == [
        Section.LIBRARY_LINKS,
        Section.UNIVERSITY_LINKS,
        Section.CURRENT_AWARENESS,
        Section.PERSONAL_LINKS,
        Section.QUICK_SEARCHES,
        Section.REFERENCE_SHELF,
        Section.BIBLIOGRAPHIC_DATABASES,
        Section.ELECTRONIC_JOURNALS,
    ]


def test_classify_initial_state():
    assert classify(Section.GLOBAL_MESSAGE) == (Mode.PROACTIVE, Agent.COMPUTER)
    assert classify(Section.MESSAGE_FROM_LIBRARIAN) == (Mode.PROACTIVE, Agent.COMPUTER)
    assert classify(Section.YOUR_LIBRARIANS) == (Mode.REACTIVE, Agent.HUMAN)
    assert classify(Section.PERSONAL_LINKS) == (Mode.REACTIVE, Agent.COMPUTER)
    assert classify(Section.CURRENT_AWARENESS) == (Mode.REACTIVE, Agent.COMPUTER)
    for section in (
        Section.LIBRARY_LINKS,
        Section.UNIVERSITY_LINKS,
        Section.QUICK_SEARCHES,
        Section.REFERENCE_SHELF,
        Section.BIBLIOGRAPHIC_DATABASES,
        Section.ELECTRONIC_JOURNALS,
    ):
        assert classify(section) == (Mode.PROACTIVE, Agent.COMPUTER)


def test_classify_is_total_over_service_sections():
    for section in section_order():
        if section in (Section.HEADER, Section.FOOTER):
            with pytest.raises(ValueError):
                classify(section)
        else:
            mode, agent = classify(section)
            assert isinstance(mode, Mode) and isinstance(agent, Agent)


def test_kind_section_mapping_roundtrips():
    for kind in ResourceKind:
        section = section_for_kind(kind)
        assert is_customizable(section)
        assert kind_for_section(section) is kind
    assert kind_for_section(Section.CURRENT_AWARENESS) is None


def _resource(**overrides):
    base = dict(
        id="r1",
        kind=ResourceKind.LIBRARY_LINK,
        title="University Libraries home page",
        url="https://example.test/",
        description="",
        url_template=None,
        owner_user_id=None,
        discipline_ids=frozenset({"d1"}),
    )
    base.update(overrides)
    return Resource(**base)


def test_validate_quick_search_engine_needs_template():
    r = _resource(kind=ResourceKind.QUICK_SEARCH_ENGINE, url_template=None)
    assert any("url_template" in v for v in validate_resource(r))

    ok = _resource(
        kind=ResourceKind.QUICK_SEARCH_ENGINE,
        url_template="https://example.test/dict?q={query}",
    )
    assert validate_resource(ok) == []

    double = _resource(
        kind=ResourceKind.QUICK_SEARCH_ENGINE,
        url_template="https://example.test/?a={query}&b={query}",
    )
    assert validate_resource(double) != []


def test_validate_personal_link_ownership():
    ok = _resource(
        kind=ResourceKind.PERSONAL_LINK, owner_user_id="u1", discipline_ids=frozenset()
    )
    assert validate_resource(ok) == []

    unowned = _resource(kind=ResourceKind.PERSONAL_LINK, discipline_ids=frozenset())
    assert validate_resource(unowned) != []

    owned_public = _resource(owner_user_id="u1")
    assert validate_resource(owned_public) != []


def test_validate_personal_link_has_no_disciplines():
    r = _resource(
        kind=ResourceKind.PERSONAL_LINK,
        owner_user_id="u1",
        discipline_ids=frozenset({"d1"}),
    )
    assert any("discipline" in v for v in validate_resource(r))


def test_validate_template_on_non_engine_flagged():
    r = _resource(url_template="https://example.test/?q={query}")
    assert validate_resource(r) != []
