"""Exception types shared across the package."""


class InputError(ValueError):
    """Rejected input: bad dimensions, out-of-domain points, malformed data."""


class DocumentError(InputError):
    """A system document failed to parse or validate.

    Carries enough context (source name, section, key) to point the user at
    the offending field.
    """

    def __init__(self, message, source=None, section=None, key=None):
        self.source = source
        self.section = section
        self.key = key
        where = ""
        if source:
            where += f"{source}: "
        if section:
            where += f"[{section}] "
        if key:
            where += f"{key}: "
        super().__init__(where + message)


class ContractionError(RuntimeError):
    """A declared contraction factor failed the sampled check."""


class ConvergenceError(RuntimeError):
    """Iteration did not reach the requested tolerance within max_iter."""


class CertificateError(RuntimeError):
    """A certified bound was violated beyond the allowed discretization slack."""
