"""Personalized library portal service.

Per-user customizable views over a librarian-curated resource collection,
broadcast messaging, quick-search redirection, and a call-number-based
current-awareness alerting engine, with an administrative plane.
"""

__version__ = "0.1.0"
