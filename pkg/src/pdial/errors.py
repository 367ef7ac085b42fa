"""Exception hierarchy shared by all pdial modules.

The CLI maps these onto its exit-code contract: usage/config problems
exit 2, numeric/protocol/transport failures exit 3.
"""

from __future__ import annotations


class PdialError(Exception):
    """Base class for all errors raised by pdial."""


class InputValidationError(PdialError):
    """A caller-supplied value violates an operation's precondition."""


class ConfigurationError(PdialError):
    """A configuration value or file is unusable (exit code 2)."""


class FormatError(ConfigurationError):
    """A data file is malformed or carries the wrong format version."""


class BackendError(PdialError):
    """A remote backend call failed after retries (transport/HTTP)."""


class ProtocolError(PdialError):
    """A remote backend answered with an uninterpretable payload."""


class NumericError(PdialError):
    """A numeric procedure failed (non-finite values, non-convergence)."""
