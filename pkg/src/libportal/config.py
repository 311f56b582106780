"""Service configuration: a JSON file plus command-line overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import Invalid


@dataclass
class AppConfig:
    listen: str = "127.0.0.1:8080"
    data_dir: str = "data"
    authenticator: str = "stub"            # stub | external
    auth_url: str = "/login"               # where unauthenticated requests are sent
    auth_secret: str = ""                  # HMAC secret for external assertions
    mail_transport: str = "stdout"         # stdout | spool | smtp
    mail_from: str = "alerts@localhost"
    spool_dir: str = ""                    # defaults to <data_dir>/spool
    smtp_host: str = "localhost"
    smtp_port: int = 25
    timezone: str = "UTC"
    default_discipline: str = ""           # onboarding default (name or id)
    reference_contact_name: str = "Reference Desk"
    reference_contact_email: str = "libref@localhost"
    reference_contact_phone: str = ""
    access_log: str = ""                   # defaults to <data_dir>/access.log
    static_dir: str = ""                   # optional built UI to serve at /
    secure_cookies: bool = False

    def resolved_spool_dir(self) -> Path:
        return Path(self.spool_dir) if self.spool_dir else Path(self.data_dir) / "spool"

    def resolved_access_log(self) -> Path:
        return Path(self.access_log) if self.access_log else Path(self.data_dir) / "access.log"


def load_config(path: str | Path | None = None, **overrides) -> AppConfig:
    """Read the JSON config file, then apply keyword overrides."""
    values: dict = {}
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise Invalid("config file must contain a JSON object")
        values.update(raw)
    values.update({k: v for k, v in overrides.items() if v is not None})

    known = {f.name for f in fields(AppConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise Invalid(f"unknown config keys: {', '.join(unknown)}")
    return AppConfig(**values)
