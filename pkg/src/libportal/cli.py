"""Command line entry points.

    libportal serve [--config FILE] [--listen HOST:PORT]
    libportal callno parse|sort|match [--ranges TEXT]   (call numbers on stdin)
    libportal run-weekly [--now TIMESTAMP] [--config FILE]
    libportal ingest FILE [--config FILE]
    libportal seed FILE [--config FILE]
    libportal admin add-user --username NAME --password-stdin [--config FILE]
"""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from zoneinfo import ZoneInfo

import click

from . import callno as callno_mod
from .admin import load_seed, make_verifier
from .alerts import AlertEngine
from .config import AppConfig, load_config
from .mail import SpoolTransport
from .store import Store, read_acquisitions_file


def _config(config_path: str | None, **overrides) -> AppConfig:
    return load_config(config_path, **overrides)


@click.group()
def main():
    """Personalized library portal service."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON configuration file.")
@click.option("--listen", default=None, help="Override listen address (host:port).")
def serve(config_path, listen):
    """Run the HTTP service."""
    import uvicorn

    from .app import create_app

    cfg = _config(config_path, listen=listen)
    host, _, port = cfg.listen.rpartition(":")
    app = create_app(cfg)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    finally:
        app.state.store.close()


@main.group()
def callno():
    """Call number debugging helpers (read one call number per line on stdin)."""


@callno.command("parse")
def callno_parse():
    """Print each call number's parsed fields as JSON."""
    failures = 0
    for line in sys.stdin:
        text = line.strip()
        if not text:
            continue
        try:
            c = callno_mod.parse_call_number(text)
        except callno_mod.CallNumberError as exc:
            failures += 1
            click.echo(json.dumps({"input": text, "error": exc.reason, "offset": exc.offset}))
            continue
        click.echo(json.dumps({
            "input": text,
            "class_letters": c.class_letters,
            "class_number": str(c.class_number) if c.class_number is not None else None,
            "cutters": ["".join(t) for t in c.cutters],
            "year": c.year,
            "canonical": callno_mod.format_call_number(c),
        }))
    sys.exit(1 if failures else 0)


@callno.command("sort")
def callno_sort():
    """Print the input call numbers in shelf order."""
    numbers = []
    for line in sys.stdin:
        text = line.strip()
        if not text:
            continue
        try:
            numbers.append(callno_mod.parse_call_number(text))
        except callno_mod.CallNumberError as exc:
            click.echo(f"skipping {text!r}: {exc.reason}", err=True)
    numbers.sort(key=callno_mod.sort_key)
    for c in numbers:
        click.echo(c.raw)


@callno.command("match")
@click.option("--ranges", "range_text", required=True,
              help='Range list, e.g. "b - bd, z - zz".')
def callno_match(range_text):
    """Print only the call numbers falling inside the given ranges."""
    ranges = callno_mod.parse_range_list(range_text)
    for line in sys.stdin:
        text = line.strip()
        if not text:
            continue
        try:
            c = callno_mod.parse_call_number(text)
        except callno_mod.CallNumberError as exc:
            click.echo(f"skipping {text!r}: {exc.reason}", err=True)
            continue
        if any(callno_mod.in_range(c, r) for r in ranges):
            click.echo(c.raw)


@main.command("run-weekly")
@click.option("--now", "now_text", default=None,
              help="Evaluation time (ISO 8601); defaults to the current time.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def run_weekly(now_text, config_path):
    """Evaluate email profiles over the previous complete week and send digests."""
    cfg = _config(config_path)
    now = None
    if now_text:
        now = datetime.fromisoformat(now_text)
        if now.tzinfo is None:
            now = now.replace(tzinfo=timezone.utc)
    store = Store(cfg.data_dir)
    try:
        from .app import make_transport

        engine = AlertEngine(
            store, make_transport(cfg), tz=ZoneInfo(cfg.timezone), mail_from=cfg.mail_from,
        )
        report = engine.weekly_run(now)
        click.echo(json.dumps({
            "week": report.week,
            "profiles_evaluated": report.profiles_evaluated,
            "emails_sent": report.emails_sent,
            "emails_suppressed": report.emails_suppressed,
            "duplicates_skipped": report.duplicates_skipped,
            "retries_queued": report.retries_queued,
            "retries_sent": report.retries_sent,
        }))
    finally:
        store.close()


@main.command()
@click.argument("file", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def ingest(file, config_path):
    """Load an acquisitions file (tab-separated, five columns)."""
    cfg = _config(config_path)
    store = Store(cfg.data_dir)
    try:
        records, line_errors = read_acquisitions_file(file)
        report = store.record_acquisitions(records)
        for problem in line_errors:
            click.echo(problem, err=True)
        for reason in report.reasons:
            click.echo(f"quarantined: {reason}", err=True)
        click.echo(json.dumps({
            "accepted": report.accepted,
            "quarantined": report.quarantined + len(line_errors),
            "duplicates": report.duplicates,
        }))
    finally:
        store.close()


@main.command()
@click.argument("file", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def seed(file, config_path):
    """Load an initial fixture (JSON lines; see README for the format)."""
    cfg = _config(config_path)
    store = Store(cfg.data_dir)
    try:
        counts = load_seed(store, file)
        click.echo(json.dumps(counts))
    finally:
        store.close()


@main.group()
def admin():
    """Administrative account management."""


@admin.command("add-user")
@click.option("--username", required=True)
@click.option("--password-stdin", is_flag=True, default=False,
              help="Read the password from standard input.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def admin_add_user(username, password_stdin, config_path):
    """Create or update an admin account."""
    if not password_stdin:
        raise click.UsageError("pass --password-stdin and provide the password on stdin")
    password = sys.stdin.readline().rstrip("\n")
    if not password:
        raise click.UsageError("empty password")
    cfg = _config(config_path)
    store = Store(cfg.data_dir)
    try:
        store.put_admin_account(username, make_verifier(password))
        click.echo(json.dumps({"username": username}))
    finally:
        store.close()


if __name__ == "__main__":
    main()
