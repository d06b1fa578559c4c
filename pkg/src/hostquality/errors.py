"""Exception hierarchy. The CLI maps each family to an exit code."""


class HostQualityError(Exception):
    exit_code = 3


class ConfigError(HostQualityError):
    """Bad configuration or usage."""

    exit_code = 1


class DataError(HostQualityError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 2


class IngestionError(DataError):
    pass


class FormatError(DataError):
    pass


class LabelConflictError(DataError):
    def __init__(self, host, first, second):
        super().__init__(f"conflicting labels for host {host!r}: {first} vs {second}")
        self.host = host


class AlignmentError(DataError):
    def __init__(self, message, hosts=()):
        hosts = sorted(hosts)
        shown = ", ".join(hosts[:10]) + (" ..." if len(hosts) > 10 else "")
        super().__init__(f"{message}: {shown}" if hosts else message)
        self.hosts = hosts


class DomainError(HostQualityError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 2


class InvariantError(HostQualityError):
    exit_code = 3
