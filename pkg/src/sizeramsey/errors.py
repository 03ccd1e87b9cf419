"""Exception types. Each carries a short machine-readable ``code``."""


class SizeRamseyError(Exception):
    code = "error"

    def __init__(self, message="", **details):
        super().__init__(f"{self.code}: {message}" if message else self.code)
        self.details = details


class GraphError(SizeRamseyError):
    code = "invalid-graph"


class SearchCapped(SizeRamseyError):
    code = "search-capped"


class NoTripleSystem(SizeRamseyError):
    code = "no-triple-system"


class PrimeRequired(SizeRamseyError):
    code = "prime-required"


class UnbuildableDesign(SizeRamseyError):
    code = "unbuildable-design"


class ParameterInfeasible(SizeRamseyError):
    code = "parameter-infeasible"


class BlockTooLarge(SizeRamseyError):
    code = "block-too-large"


class EmptyPart(SizeRamseyError):
    code = "empty-part"


class CleanupCollapsed(SizeRamseyError):
    code = "cleanup-collapsed"


class DegreeExceeded(SizeRamseyError):
    code = "degree-exceeded"


class ContainerBoundsExceeded(SizeRamseyError):
    code = "container-bounds-exceeded"


class PatternTooLarge(SizeRamseyError):
    code = "pattern-too-large"


class WitnessIncomplete(SizeRamseyError):
    code = "witness-incomplete"


class EmbeddingFailed(SizeRamseyError):
    code = "embedding-failed"


class CycleEmbeddingFailed(EmbeddingFailed):
    code = "cycle-embedding-failed"


class ConfigError(SizeRamseyError):
    code = "config-error"
