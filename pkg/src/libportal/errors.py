"""Error types shared across the service layers.

HTTP handlers map these onto status codes: NotFound -> 404, Conflict -> 409,
Invalid -> 400, Forbidden -> 403, AuthenticationFailed -> 401.
"""


class PortalError(Exception):
    pass


class NotFound(PortalError):
    pass


class Conflict(PortalError):
    pass


class Invalid(PortalError):
    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or []


class Forbidden(PortalError):
    pass


class AuthenticationFailed(PortalError):
    pass
