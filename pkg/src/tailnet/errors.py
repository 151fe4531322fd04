"""Exception hierarchy.

``InputError`` covers bad files, bad configuration, and stale
artifacts (CLI exit code 2); ``ComputationError`` covers failures
inside an otherwise well-configured run (exit code 1).
"""


class TailnetError(Exception):
    pass


class InputError(TailnetError):
    pass


class StaleArtifactError(InputError):
    """Upstream stage artifacts do not match their recorded digests."""


class ComputationError(TailnetError):
    pass


class DegenerateRiskStructureError(ComputationError):
    """A risk-structure vector has zero norm and no direction."""
