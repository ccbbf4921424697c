"""Exception types raised across the planning toolkit."""


class PlanningError(Exception):
    """Base class for all toolkit errors."""


class PassbandCollapsed(PlanningError):
    """The cascaded WSS passband no longer has a 3 dB point."""


class NoFeasibleBandwidth(PlanningError):
    """No provisionable WSS bandwidth below the ceiling fits the signal."""


class OutOfBand(PlanningError):
    """A frequency offset falls outside the leased band."""


class Unreachable(PlanningError):
    """A QoT target cannot be inverted to a required SNR."""


class MissingChannelQ(PlanningError):
    """A planned channel has neither a measured nor a simulated Q value."""


class CapacityExceeded(PlanningError):
    """A selection needs more spectrum bins than the band provides."""


class UnknownService(PlanningError):
    """A service id does not resolve against the catalog."""


class MissingProfile(PlanningError):
    """A command needs a GSNR profile but the scenario has none."""


class ScenarioError(PlanningError):
    """Base class for scenario/fixture loading problems."""


class ParseError(ScenarioError):
    pass


class ValidationError(ScenarioError):
    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}" if path else reason)


class MissingFile(ScenarioError):
    pass
