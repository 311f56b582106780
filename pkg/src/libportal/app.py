"""HTTP wiring: routes, cookies, error mapping, and the access log.

Every request is written to the access log in NCSA Common Log Format with
the authenticated identity in the authuser field; the admin usage report
consumes that same file.
"""

from __future__ import annotations

import logging
import threading
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Callable
from zoneinfo import ZoneInfo

from fastapi import Body, Depends, FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles

from .admin import AdminService
from .alerts import AlertEngine
from .callno import CallNumberError
from .config import AppConfig
from .errors import (
    AuthenticationFailed,
    Conflict,
    Forbidden,
    Invalid,
    NotFound,
    PortalError,
)
from .mail import MailTransport, SmtpTransport, SpoolTransport, StdoutTransport
from .portal import (
    AuthRedirect,
    ExternalAuthenticator,
    PortalService,
    StubAuthenticator,
)
from .sessions import SessionManager
from .store import Store

logger = logging.getLogger(__name__)

USER_COOKIE = "mylib_session"
ADMIN_COOKIE = "mylib_admin"
USER_SESSION_TTL = timedelta(days=30)
ADMIN_SESSION_TTL = timedelta(hours=4)


class _NeedsAuth(Exception):
    def __init__(self, url: str):
        self.url = url


def make_transport(config: AppConfig) -> MailTransport:
    if config.mail_transport == "spool":
        return SpoolTransport(config.resolved_spool_dir())
    if config.mail_transport == "smtp":
        return SmtpTransport(config.smtp_host, config.smtp_port)
    return StdoutTransport()


def make_authenticator(config: AppConfig):
    if config.authenticator == "external":
        return ExternalAuthenticator(config.auth_url, config.auth_secret)
    return StubAuthenticator(config.auth_url)


def create_app(config: AppConfig, *, store: Store | None = None,
               transport: MailTransport | None = None,
               clock: Callable[[], datetime] | None = None) -> FastAPI:
    store = store if store is not None else Store(config.data_dir)
    transport = transport if transport is not None else make_transport(config)
    clock = clock or (lambda: datetime.now(timezone.utc))

    user_sessions = SessionManager(USER_SESSION_TTL, clock)
    admin_sessions = SessionManager(ADMIN_SESSION_TTL, clock)
    engine = AlertEngine(
        store, transport, tz=ZoneInfo(config.timezone),
        mail_from=config.mail_from, clock=clock,
    )
    portal = PortalService(
        store, user_sessions, make_authenticator(config), engine,
        reference_contact={
            "name": config.reference_contact_name,
            "email": config.reference_contact_email,
            "phone": config.reference_contact_phone,
        },
        default_discipline=config.default_discipline,
    )
    admin = AdminService(
        store, admin_sessions, transport,
        mail_from=config.mail_from, access_log=config.resolved_access_log(),
    )

    app = FastAPI(title="libportal", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.portal = portal
    app.state.admin = admin
    app.state.alerts = engine
    app.state.config = config

    access_log_path = config.resolved_access_log()
    access_log_path.parent.mkdir(parents=True, exist_ok=True)
    log_lock = threading.Lock()

    # ------------------------------------------------------------------
    # Error mapping and access logging
    # ------------------------------------------------------------------

    @app.exception_handler(_NeedsAuth)
    async def _handle_needs_auth(request: Request, exc: _NeedsAuth):
        return JSONResponse(
            {"error": "authentication required", "redirect": exc.url},
            status_code=302, headers={"Location": exc.url},
        )

    @app.exception_handler(PortalError)
    async def _handle_portal_error(request: Request, exc: PortalError):
        status = 500
        if isinstance(exc, NotFound):
            status = 404
        elif isinstance(exc, Conflict):
            status = 409
        elif isinstance(exc, Invalid):
            status = 400
        elif isinstance(exc, Forbidden):
            status = 403
        elif isinstance(exc, AuthenticationFailed):
            status = 401
        body = {"error": str(exc)}
        if isinstance(exc, Invalid) and exc.violations:
            body["violations"] = exc.violations
        return JSONResponse(body, status_code=status)

    @app.exception_handler(CallNumberError)
    async def _handle_callno_error(request: Request, exc: CallNumberError):
        return JSONResponse(
            {"error": str(exc), "reason": exc.reason, "offset": exc.offset},
            status_code=400,
        )

    @app.middleware("http")
    async def _access_log(request: Request, call_next):
        response = await call_next(request)
        try:
            authuser = getattr(request.state, "auth_user", "-") or "-"
            host = request.client.host if request.client else "-"
            when = clock().strftime("%d/%b/%Y:%H:%M:%S %z")
            target = request.url.path
            if request.url.query:
                target += "?" + request.url.query
            size = response.headers.get("content-length", "-")
            line = (
                f'{host} - {authuser} [{when}] '
                f'"{request.method} {target} HTTP/1.1" {response.status_code} {size}\n'
            )
            with log_lock, open(access_log_path, "a", encoding="utf-8") as fh:
                fh.write(line)
        except Exception:  # logging must never break the request
            logger.exception("failed to write access log line")
        return response

    # ------------------------------------------------------------------
    # Auth dependencies
    # ------------------------------------------------------------------

    def current_user(request: Request) -> str:
        token = request.cookies.get(USER_COOKIE)
        session = user_sessions.resolve(token)
        if session is None:
            raise _NeedsAuth(portal.authenticator.redirect_url)
        user = store.get_user(session.principal)
        request.state.auth_user = user.auth_id
        return session.principal

    def current_admin(request: Request) -> str:
        token = request.cookies.get(ADMIN_COOKIE)
        session = admin.sessions.resolve(token)
        if session is None:
            raise AuthenticationFailed("admin session required")
        request.state.auth_user = f"admin:{session.principal}"
        return session.principal

    def _set_user_cookie(response: Response, token: str) -> None:
        response.set_cookie(
            USER_COOKIE, token, max_age=int(USER_SESSION_TTL.total_seconds()),
            httponly=True, samesite="lax", secure=config.secure_cookies,
        )

    # ------------------------------------------------------------------
    # Portal routes
    # ------------------------------------------------------------------

    @app.get("/login")
    def login(request: Request):
        params = dict(request.query_params)
        token = request.cookies.get(USER_COOKIE)
        resolved = portal.resolve_session(token, params or None)
        if isinstance(resolved, AuthRedirect):
            if isinstance(portal.authenticator, StubAuthenticator):
                return {
                    "authenticator": "stub",
                    "hint": "GET /login?auth_id=...&name=...&email=...&discipline=...",
                }
            return RedirectResponse(resolved.url, status_code=302)
        response = RedirectResponse("/page", status_code=303)
        if resolved.fresh:
            _set_user_cookie(response, resolved.session.token)
            request.state.auth_user = store.get_user(resolved.session.principal).auth_id
        return response

    @app.get("/page")
    def page(user_id: str = Depends(current_user)):
        return portal.assemble_page(user_id)

    @app.get("/customize/{section}")
    def customize_form(section: str, user_id: str = Depends(current_user)):
        return portal.dispatch(user_id, "get", section)

    @app.post("/customize/{section}")
    def customize_set(section: str, user_id: str = Depends(current_user),
                      payload: dict | list = Body(default={})):
        # the body is the resource id list, bare or wrapped
        ids = payload if isinstance(payload, list) else payload.get("resource_ids", [])
        if not isinstance(ids, list):
            raise Invalid("resource_ids must be a list")
        return portal.dispatch(user_id, "set", section, ids)

    @app.post("/personal-links", status_code=201)
    def add_personal_link(user_id: str = Depends(current_user),
                          payload: dict = Body(...)):
        resource = portal.add_personal_link(
            user_id, payload.get("title", ""), payload.get("url", ""),
        )
        return {"id": resource.id, "title": resource.title, "url": resource.url}

    @app.delete("/personal-links/{resource_id}")
    def delete_personal_link(resource_id: str, user_id: str = Depends(current_user)):
        portal.delete_personal_link(user_id, resource_id)
        return {"ok": True}

    @app.get("/quick-search")
    def quick_search(engine_param: str = Query(alias="engine"),
                     q: str = Query(default=""),
                     user_id: str = Depends(current_user)):
        url = portal.quick_search(user_id, engine_param, q)
        return RedirectResponse(url, status_code=302)

    @app.post("/discipline")
    def set_discipline(user_id: str = Depends(current_user),
                       payload: dict = Body(...)):
        return portal.set_discipline(user_id, payload.get("discipline_id", ""))

    @app.post("/logout")
    def logout(request: Request, response: Response):
        portal.logout(request.cookies.get(USER_COOKIE))
        response.delete_cookie(USER_COOKIE)
        return {"ok": True}

    # ------------------------------------------------------------------
    # Current-awareness profile routes
    # ------------------------------------------------------------------

    @app.get("/profiles")
    def list_profiles(user_id: str = Depends(current_user)):
        return {"profiles": portal.list_profiles(user_id)}

    @app.post("/profiles", status_code=201)
    def save_profile(user_id: str = Depends(current_user), payload: dict = Body(...)):
        return portal.save_profile(
            user_id, payload.get("ranges", ""), payload.get("delivery", "screen"),
        )

    @app.delete("/profiles/{profile_id}")
    def delete_profile(profile_id: str, user_id: str = Depends(current_user)):
        portal.delete_profile(user_id, profile_id)
        return {"ok": True}

    @app.get("/profiles/{profile_id}/results")
    def profile_results(profile_id: str,
                        from_weeks_ago: int = Query(default=2, ge=0),
                        to_weeks_ago: int = Query(default=0, ge=0),
                        user_id: str = Depends(current_user)):
        return portal.profile_results(user_id, profile_id, from_weeks_ago, to_weeks_ago)

    # ------------------------------------------------------------------
    # Admin routes
    # ------------------------------------------------------------------

    @app.post("/admin/login")
    def admin_login(response: Response, payload: dict = Body(...)):
        session = admin.login(payload.get("username", ""), payload.get("password", ""))
        if session is None:
            return JSONResponse({"error": "rejected"}, status_code=401)
        response.set_cookie(
            ADMIN_COOKIE, session.token,
            max_age=int(ADMIN_SESSION_TTL.total_seconds()),
            httponly=True, samesite="lax", secure=config.secure_cookies,
        )
        return {"ok": True}

    @app.get("/admin/disciplines")
    def admin_list_disciplines(_: str = Depends(current_admin)):
        return {
            "disciplines": [
                {"id": d.id, "name": d.name, "description": d.description}
                for d in store.list_disciplines()
            ]
        }

    @app.post("/admin/disciplines")
    def admin_upsert_discipline(_: str = Depends(current_admin), payload: dict = Body(...)):
        return admin.upsert_entity("discipline", payload)

    @app.delete("/admin/disciplines/{entity_id}")
    def admin_delete_discipline(entity_id: str, _: str = Depends(current_admin)):
        return admin.delete_entity("discipline", entity_id)

    @app.get("/admin/librarians")
    def admin_list_librarians(_: str = Depends(current_admin)):
        return {
            "librarians": [
                {
                    "id": l.id, "name": l.name, "phone": l.phone, "email": l.email,
                    "role": l.role.value, "discipline_ids": sorted(l.discipline_ids),
                }
                for l in store.list_librarians()
            ]
        }

    @app.post("/admin/librarians")
    def admin_upsert_librarian(_: str = Depends(current_admin), payload: dict = Body(...)):
        return admin.upsert_entity("librarian", payload)

    @app.delete("/admin/librarians/{entity_id}")
    def admin_delete_librarian(entity_id: str, _: str = Depends(current_admin)):
        return admin.delete_entity("librarian", entity_id)

    @app.get("/admin/resources")
    def admin_list_resources(_: str = Depends(current_admin)):
        return {
            "resources": [
                {
                    "id": r.id, "kind": r.kind.value, "title": r.title, "url": r.url,
                    "description": r.description, "url_template": r.url_template,
                    "owner_user_id": r.owner_user_id,
                    "discipline_ids": sorted(r.discipline_ids),
                }
                for r in store.list_resources()
            ]
        }

    @app.post("/admin/resources")
    def admin_upsert_resource(_: str = Depends(current_admin), payload: dict = Body(...)):
        return admin.upsert_entity("resource", payload)

    @app.delete("/admin/resources/{entity_id}")
    def admin_delete_resource(entity_id: str, _: str = Depends(current_admin)):
        return admin.delete_entity("resource", entity_id)

    @app.get("/admin/recommendations")
    def admin_get_recommendations(discipline_id: str, section: str,
                                  _: str = Depends(current_admin)):
        from .model import Section as SectionEnum

        try:
            section_enum = SectionEnum(section)
        except ValueError:
            raise Invalid(f"unknown section {section!r}") from None
        return {
            "discipline_id": discipline_id,
            "section": section,
            "resource_ids": store.get_recommendation_ids(discipline_id, section_enum),
        }

    @app.post("/admin/recommendations")
    def admin_upsert_recommendation(_: str = Depends(current_admin),
                                    payload: dict = Body(...)):
        return admin.upsert_entity("recommendation", payload)

    @app.delete("/admin/recommendations/{discipline_id}/{section}")
    def admin_delete_recommendation(discipline_id: str, section: str,
                                    _: str = Depends(current_admin)):
        return admin.delete_recommendations(discipline_id, section)

    @app.post("/admin/messages/global")
    def admin_global_message(_: str = Depends(current_admin), payload: dict = Body(...)):
        message = admin.set_global_message(payload.get("body", ""))
        return {"id": message.id, "body": message.body}

    @app.post("/admin/messages/discipline/{discipline_id}")
    def admin_discipline_message(discipline_id: str, _: str = Depends(current_admin),
                                 payload: dict = Body(...)):
        message = admin.set_discipline_message(discipline_id, payload.get("body", ""))
        return {"id": message.id, "body": message.body, "discipline_id": discipline_id}

    @app.post("/admin/mass-email")
    def admin_mass_email(_: str = Depends(current_admin), payload: dict = Body(...)):
        report = admin.mass_email(
            payload.get("discipline_ids", []),
            payload.get("subject", ""),
            payload.get("body", ""),
        )
        return {
            "id": report.id, "recipients": report.recipients,
            "skipped_opt_out": report.skipped_opt_out, "failed": report.failed,
            "status": report.status,
        }

    @app.get("/admin/mass-email/{report_id}")
    def admin_mass_email_report(report_id: str, _: str = Depends(current_admin)):
        report = admin.get_mass_email_report(report_id)
        return {
            "id": report.id, "recipients": report.recipients,
            "skipped_opt_out": report.skipped_opt_out, "failed": report.failed,
            "status": report.status,
        }

    @app.get("/admin/reports")
    def admin_reports(_: str = Depends(current_admin),
                      from_: str = Query(default="", alias="from"),
                      to: str = Query(default="")):
        try:
            period_from = date.fromisoformat(from_) if from_ else None
            period_to = date.fromisoformat(to) if to else None
        except ValueError:
            raise Invalid("from/to must be YYYY-MM-DD dates") from None
        report = admin.usage_report_from_log(period_from, period_to)
        return {
            "from": from_ or None, "to": to or None,
            "counters": report.counters, "distinct_users": report.distinct_users,
            "malformed": report.malformed, "total": report.total,
        }

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
