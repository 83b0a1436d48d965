"""Exception types shared across the package."""


class RadstyleError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(RadstyleError):
    """Input document is not syntactically valid (e.g. malformed JSON)."""


class SchemaError(RadstyleError):
    """Input document is well-formed but violates the expected schema."""


class InputError(RadstyleError):
    """An argument violates a documented precondition."""


class ShapeError(RadstyleError):
    """Matrix or vector dimensions do not line up."""


class ConfigError(RadstyleError):
    """Configuration is missing a required entry or contains an unknown one."""


class IoError(RadstyleError):
    """A file could not be read or written."""


class ClientError(RadstyleError):
    """Base class for chat-completion client failures."""


class TransportError(ClientError):
    """All delivery attempts failed (network errors or retryable statuses)."""


class RequestError(ClientError):
    """The service rejected the request with a non-retryable status."""

    def __init__(self, status: int, body: str):
        super().__init__(f"request rejected with status {status}")
        self.status = status
        self.body = body


class ProtocolError(ClientError):
    """The service response could not be interpreted."""
