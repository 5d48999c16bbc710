"""Exception types shared across the toolkit."""
from __future__ import annotations

from typing import Any


class MapfError(Exception):
    """Base class; carries a stable machine code alongside the message."""

    code = "error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_json(self) -> dict:
        body = {"code": self.code, "message": self.message}
        if self.details:
            body["details"] = {k: v for k, v in sorted(self.details.items())}
        return body


class SchemaError(MapfError):
    """Input data violates a schema constraint; ``path`` is a JSON path."""

    code = "schema"

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}", path=path)
        self.path = path


class NotAdjacentError(MapfError):
    code = "not_adjacent"


class UnknownAgentError(MapfError):
    code = "unknown_agent"


class NoSuchWaitError(MapfError):
    code = "no_such_wait"


class InstanceIsFeasibleError(MapfError):
    code = "instance_is_feasible"


class PlanInfeasibleError(MapfError):
    code = "plan_infeasible"

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class EventRejectedError(MapfError):
    """An execution event cannot be applied to the current state."""

    code = "event_rejected"


class CapExceededError(MapfError):
    code = "cap_exceeded"
