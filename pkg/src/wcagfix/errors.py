"""Exception hierarchy shared by every wcagfix module."""


class WcagFixError(Exception):
    """Base class for all errors raised by this package."""


# dom
class EmptyInput(WcagFixError):
    pass


class NodeNotInTree(WcagFixError):
    pass


class PathNotFound(WcagFixError):
    pass


# color
class UnparsableColor(WcagFixError, ValueError):
    pass


class ContrastUnreachable(WcagFixError):
    pass


# rules / fix
class EmptyCorpus(WcagFixError):
    pass


class StaleViolation(WcagFixError):
    pass


# guidance
class LengthMismatch(WcagFixError, ValueError):
    pass


class IncompleteTable(WcagFixError):
    pass


class NoHtmlFound(WcagFixError):
    pass


# metrics
class DimensionMismatch(WcagFixError, ValueError):
    pass


class ImageTooSmall(WcagFixError, ValueError):
    pass


class ProviderUnavailable(WcagFixError):
    pass


class ZeroBaseline(WcagFixError, ZeroDivisionError):
    pass


class AlignmentMismatch(WcagFixError):
    pass


# stats
class EmptyCounts(WcagFixError, ValueError):
    pass


# corpus
class ManifestParseError(WcagFixError):
    pass
