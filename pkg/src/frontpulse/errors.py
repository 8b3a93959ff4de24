"""Error type shared by all tiers.

Every failure carries a short machine-readable ``kind`` (for example
``"no-stationary-pulse"``) so the CLI can report it verbatim.
"""


class PulseError(Exception):
    """Raised when a computation cannot produce a meaningful result."""

    def __init__(self, kind: str, message: str = ""):
        self.kind = kind
        self.message = message or kind
        super().__init__(f"[{kind}] {self.message}")
