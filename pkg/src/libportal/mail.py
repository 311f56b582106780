"""Outgoing mail transports.

Three interchangeable backends: standard output (demo), a spool directory
writing one ``.eml`` file per message (tests compare these byte-for-byte),
and an SMTP client (production). Digest senders pass ``spool_name`` so spool
files get stable, meaningful names.
"""

from __future__ import annotations

import logging
import re
import smtplib
import sys
from dataclasses import dataclass
from email.message import EmailMessage
from pathlib import Path
from typing import Protocol

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MailMessage:
    to_addr: str
    subject: str
    body: str
    from_addr: str
    spool_name: str | None = None

    def as_text(self) -> str:
        return (
            f"From: {self.from_addr}\n"
            f"To: {self.to_addr}\n"
            f"Subject: {self.subject}\n"
            f"\n"
            f"{self.body}"
        )


class MailTransport(Protocol):
    def send(self, message: MailMessage) -> None: ...


class MailTransportError(Exception):
    pass


class StdoutTransport:
    def __init__(self, stream=None):
        self.stream = stream or sys.stdout

    def send(self, message: MailMessage) -> None:
        self.stream.write(message.as_text())
        if not message.body.endswith("\n"):
            self.stream.write("\n")
        self.stream.write("---\n")


class SpoolTransport:
    """Writes each message to `<dir>/<spool_name or seq>.eml`."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._seq = 0

    def send(self, message: MailMessage) -> None:
        if message.spool_name:
            name = _safe_name(message.spool_name)
        else:
            self._seq += 1
            name = f"message_{self._seq:04d}"
        path = self.directory / f"{name}.eml"
        path.write_text(message.as_text(), encoding="utf-8")


class SmtpTransport:
    def __init__(self, host: str, port: int = 25):
        self.host = host
        self.port = port

    def send(self, message: MailMessage) -> None:
        email = EmailMessage()
        email["From"] = message.from_addr
        email["To"] = message.to_addr
        email["Subject"] = message.subject
        email.set_content(message.body)
        try:
            with smtplib.SMTP(self.host, self.port, timeout=30) as client:
                client.send_message(email)
        except (OSError, smtplib.SMTPException) as exc:
            raise MailTransportError(str(exc)) from exc


class FailingTransport:
    """Test double that fails the first `failures` sends, then delegates."""

    def __init__(self, inner: MailTransport, failures: int = 1):
        self.inner = inner
        self.failures = failures
        self.attempts = 0

    def send(self, message: MailMessage) -> None:
        self.attempts += 1
        if self.attempts <= self.failures:
            raise MailTransportError("injected failure")
        self.inner.send(message)


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", name)
