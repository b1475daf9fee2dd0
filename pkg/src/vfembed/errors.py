"""Exception types shared across the package."""


class ScenarioError(Exception):
    """A scenario, graph, or service definition is invalid."""


class DuplicateIdError(ScenarioError):
    """Two nodes (or two links over the same pair) share an identifier."""


class DanglingEndpointError(ScenarioError):
    """A link references a node id that does not exist."""


class DisconnectedCoreError(ScenarioError):
    """The graph restricted to non-robot nodes is not connected."""


class NotWirelessError(ValueError):
    """A wireless-only computation was applied to a wired link."""


class UnstableError(ValueError):
    """A processor-sharing queue has no stable operating point (C(v)*mu <= arrival rate)."""


class UnroutedVlError(ValueError):
    """A delay computation needs a route that the embedding does not contain."""


class NoCoverageError(Exception):
    """No point of access offers enough wireless capacity for the service."""


class NoFeasiblePlacementError(Exception):
    """Every candidate host violates at least one constraint."""


class NoFeasibleCapacityError(Exception):
    """No server has enough free compute for a function (capacity-only placers)."""


class InfeasibleError(Exception):
    """Exhaustive search proved that no feasible embedding exists."""


class BudgetExceededError(Exception):
    """The enumeration space is larger than the configured search budget."""


class NotIdealError(ValueError):
    """A service does not have the restricted two-function shape the reduction needs."""


class RejectionLimitError(Exception):
    """Rejection sampling failed to meet the redundancy requirements in time."""


class EmptyRegionError(Exception):
    """No edge probability satisfies the requested degree requirements."""
