"""Domain vocabulary: page sections, service classification, and entity types.

The page is a fixed sequence of thirteen sections; eight of them are
customizable per user. Every service section carries an interactive
assistance classification (proactive or reactive, human or computer
mediated) describing its initial, pre-customization state. Customization
is tracked as a flag on the user's stored selections, not as a mutation
of the classification.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime


class Section(str, enum.Enum):
    # declaration order is page order
    HEADER = "header"
    GLOBAL_MESSAGE = "global_message"
    MESSAGE_FROM_LIBRARIAN = "message_from_librarian"
    YOUR_LIBRARIANS = "your_librarians"
    LIBRARY_LINKS = "library_links"
    UNIVERSITY_LINKS = "university_links"
    CURRENT_AWARENESS = "current_awareness"
    PERSONAL_LINKS = "personal_links"
    QUICK_SEARCHES = "quick_searches"
    REFERENCE_SHELF = "reference_shelf"
    BIBLIOGRAPHIC_DATABASES = "bibliographic_databases"
    ELECTRONIC_JOURNALS = "electronic_journals"
    FOOTER = "footer"


CUSTOMIZABLE_SECTIONS = frozenset(
    {
        Section.LIBRARY_LINKS,
        Section.UNIVERSITY_LINKS,
        Section.CURRENT_AWARENESS,
        Section.PERSONAL_LINKS,
        Section.QUICK_SEARCHES,
        Section.REFERENCE_SHELF,
        Section.BIBLIOGRAPHIC_DATABASES,
        Section.ELECTRONIC_JOURNALS,
    }
)


class Mode(str, enum.Enum):
    PROACTIVE = "proactive"
    REACTIVE = "reactive"


class Agent(str, enum.Enum):
    HUMAN = "human"
    COMPUTER = "computer"


# initial classification of every service section
_CLASSIFICATION = {
    Section.GLOBAL_MESSAGE: (Mode.PROACTIVE, Agent.COMPUTER),
    Section.MESSAGE_FROM_LIBRARIAN: (Mode.PROACTIVE, Agent.COMPUTER),
    Section.YOUR_LIBRARIANS: (Mode.REACTIVE, Agent.HUMAN),
    Section.LIBRARY_LINKS: (Mode.PROACTIVE, Agent.COMPUTER),
    Section.UNIVERSITY_LINKS: (Mode.PROACTIVE, Agent.COMPUTER),
    Section.CURRENT_AWARENESS: (Mode.REACTIVE, Agent.COMPUTER),
    Section.PERSONAL_LINKS: (Mode.REACTIVE, Agent.COMPUTER),
    Section.QUICK_SEARCHES: (Mode.PROACTIVE, Agent.COMPUTER),
    Section.REFERENCE_SHELF: (Mode.PROACTIVE, Agent.COMPUTER),
    Section.BIBLIOGRAPHIC_DATABASES: (Mode.PROACTIVE, Agent.COMPUTER),
    Section.ELECTRONIC_JOURNALS: (Mode.PROACTIVE, Agent.COMPUTER),
}


class ResourceKind(str, enum.Enum):
    LIBRARY_LINK = "library_link"
    UNIVERSITY_LINK = "university_link"
    REFERENCE = "reference"
    BIBLIOGRAPHIC_DATABASE = "bibliographic_database"
    ELECTRONIC_JOURNAL = "electronic_journal"
    QUICK_SEARCH_ENGINE = "quick_search_engine"
    PERSONAL_LINK = "personal_link"


# each resource kind lives in exactly one section; current_awareness is
# customizable but holds saved profiles rather than resources
_KIND_TO_SECTION = {
    ResourceKind.LIBRARY_LINK: Section.LIBRARY_LINKS,
    ResourceKind.UNIVERSITY_LINK: Section.UNIVERSITY_LINKS,
    ResourceKind.REFERENCE: Section.REFERENCE_SHELF,
    ResourceKind.BIBLIOGRAPHIC_DATABASE: Section.BIBLIOGRAPHIC_DATABASES,
    ResourceKind.ELECTRONIC_JOURNAL: Section.ELECTRONIC_JOURNALS,
    ResourceKind.QUICK_SEARCH_ENGINE: Section.QUICK_SEARCHES,
    ResourceKind.PERSONAL_LINK: Section.PERSONAL_LINKS,
}
_SECTION_TO_KIND = {section: kind for kind, section in _KIND_TO_SECTION.items()}


class LibrarianRole(str, enum.Enum):
    REFERENCE_LIBRARIAN = "reference_librarian"
    COLLECTION_MANAGER = "collection_manager"


class MessageScope(str, enum.Enum):
    GLOBAL = "global"
    DISCIPLINE = "discipline"


@dataclass(frozen=True)
class User:
    id: str
    auth_id: str
    name: str
    email: str
    discipline_id: str
    email_opt_in: bool = True
    created_at: datetime | None = None


@dataclass(frozen=True)
class Discipline:
    id: str
    name: str
    description: str = ""


@dataclass(frozen=True)
class Librarian:
    id: str
    name: str
    phone: str
    email: str
    role: LibrarianRole
    discipline_ids: frozenset[str]


@dataclass(frozen=True)
class Resource:
    id: str
    kind: ResourceKind
    title: str
    url: str
    description: str = ""
    url_template: str | None = None
    owner_user_id: str | None = None
    discipline_ids: frozenset[str] = field(default_factory=frozenset)


@dataclass(frozen=True)
class Message:
    id: str
    scope: MessageScope
    discipline_id: str | None
    body: str
    updated_at: datetime


def section_order() -> list[Section]:
    """The thirteen sections in page order, header first, footer last."""
    return list(Section)


def is_customizable(section: Section) -> bool:
    return section in CUSTOMIZABLE_SECTIONS


def classify(section: Section) -> tuple[Mode, Agent]:
    """Initial interactive-assistance classification of a service section."""
    try:
        return _CLASSIFICATION[section]
    except KeyError:
        raise ValueError(f"{section.value} is not a service section") from None


def section_for_kind(kind: ResourceKind) -> Section:
    return _KIND_TO_SECTION[kind]


def kind_for_section(section: Section) -> ResourceKind | None:
    """The resource kind a section holds, or None for profile-backed sections."""
    return _SECTION_TO_KIND.get(section)


def validate_resource(resource: Resource) -> list[str]:
    """Return every violated Resource invariant; an empty list means valid."""
    violations: list[str] = []
    if resource.kind is ResourceKind.QUICK_SEARCH_ENGINE:
        template = resource.url_template or ""
        if not template:
            violations.append("quick_search_engine requires a url_template")
        elif template.count("{query}") != 1:
            violations.append("url_template must contain exactly one {query} placeholder")
    elif resource.url_template is not None:
        violations.append("url_template is only valid on quick_search_engine resources")

    if resource.kind is ResourceKind.PERSONAL_LINK:
        if resource.owner_user_id is None:
            violations.append("personal_link requires an owner_user_id")
        if resource.discipline_ids:
            violations.append("personal_link must not be mapped to disciplines")
    elif resource.owner_user_id is not None:
        violations.append("owner_user_id is only valid on personal_link resources")

    return violations
