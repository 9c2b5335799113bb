"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations

from typing import Any


class QKernelError(Exception):
    """Base class for all errors raised by qkernel."""


class SelfLoop(QKernelError, ValueError):
    def __init__(self, vertex: int):
        super().__init__(f"self-loop on vertex {vertex}")
        self.vertex = vertex


class OutOfRange(QKernelError, ValueError):
    def __init__(self, vertex: int, n: int):
        super().__init__(f"vertex {vertex} out of range for n={n}")
        self.vertex = vertex
        self.n = n


class ParseError(QKernelError, ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class Unsatisfiable(QKernelError, ValueError):
    pass


class CapExceeded(QKernelError):
    """A brute-force or enumeration request is larger than the configured cap."""


class NotAMember(QKernelError, ValueError):
    def __init__(self, vertex: int):
        super().__init__(f"vertex {vertex} is not a member of the set")
        self.vertex = vertex


class NoEpon(QKernelError):
    """Raised by epon_injection when some member has no external private out-neighbor.

    ``vertex`` is the least such member.
    """

    def __init__(self, vertex: int):
        super().__init__(f"vertex {vertex} has no external private out-neighbor")
        self.vertex = vertex


class PreconditionFailed(QKernelError):
    def __init__(self, reason: str):
        super().__init__(f"precondition failed: {reason.replace('_', ' ')}")
        self.reason = reason


class InvariantViolation(QKernelError):
    """A loop invariant of the shrinking procedure failed.

    Carries the certificate built so far so the instance can be replayed.
    """

    def __init__(self, check: str, certificate: Any):
        super().__init__(f"invariant violated: {check}")
        self.check = check
        self.certificate = certificate


class CertificateMismatch(QKernelError):
    def __init__(self, check: str, detail: str = ""):
        msg = f"mismatch: {check}" + (f" ({detail})" if detail else "")
        super().__init__(msg)
        self.check = check
        self.detail = detail


class ShardConflict(QKernelError, ValueError):
    pass
