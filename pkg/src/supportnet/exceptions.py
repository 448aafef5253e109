"""Exception types raised across the package."""


class StructuralError(ValueError):
    """Layer widths or dimensions do not chain.

    ``layer_index`` is the offending position in ``Network.layers`` (or None when
    the problem is with the network's declared input/output dimensions).
    """

    def __init__(self, message, layer_index=None):
        if layer_index is not None:
            message = f"layer {layer_index}: {message}"
        super().__init__(message)
        self.layer_index = layer_index


class NotPowerOfTwoError(ValueError):
    pass


class NonReluError(ValueError):
    """A construction that needs a piecewise-linear network got analytic activations."""


class BudgetExceededError(RuntimeError):
    """A grid or node count would exceed the configured budget."""


class DocumentError(ValueError):
    """Malformed serialized document; ``path`` locates the bad entry."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
