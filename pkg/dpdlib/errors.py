"""
Exception hierarchy for dpdlib
"""


class DpdError(Exception):
    """Base class for every error raised by dpdlib"""


class ConfigError(DpdError):
    """Invalid run configuration"""


class TransportError(DpdError):
    """Point-to-point messaging failed (bad rank, closed backend, broken socket)"""


class StarvedReceiveError(TransportError):
    """A blocking receive can never be satisfied"""

    def __init__(self, rank, src, tag, reason):
        self.rank = rank
        self.src = src
        self.tag = tag
        super().__init__(f"starved receive on rank {rank} waiting for (src={src}, tag={tag}): {reason}")


class StartupError(TransportError):
    """A TCP peer could not be reached while building the mesh"""

    def __init__(self, rank, address, reason):
        self.rank = rank
        self.address = address
        super().__init__(f"rank {rank} unreachable at {address[0]}:{address[1]}: {reason}")


class DeadlockError(DpdError):
    """The simulated execution went quiescent with blocked ranks"""

    def __init__(self, report):
        self.report = report
        super().__init__(report.describe())


class GroupError(DpdError):
    """Invalid group construction or collective usage"""


class DistError(DpdError):
    """Invalid DPD construction or operation"""


class OracleMismatch(DpdError):
    """A benchmark result disagreed with its serial oracle"""
