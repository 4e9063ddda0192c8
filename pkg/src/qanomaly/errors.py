"""Exception hierarchy shared by all modules."""


class AnomalyError(Exception):
    """Base class for every error raised by qanomaly."""


class InputError(AnomalyError, ValueError):
    """Input violates a documented invariant (shape, hermiticity, commutation)."""


class NumericalError(AnomalyError, ArithmeticError):
    """A numerical step could not be trusted (eigensolver, rank ambiguity, oracle mismatch)."""


class SpectrumError(AnomalyError):
    """Two sectors of a spectrum are not distinguishable by either eigenvalue."""


class NotExactError(AnomalyError):
    """A cochain handed to the homotopy operator has diagonal-block components.

    ``block_norms`` maps sector index to the Frobenius norm found in that
    diagonal block.
    """

    def __init__(self, message, block_norms):
        super().__init__(message)
        self.block_norms = dict(block_norms)


class FirstOrderObstructed(AnomalyError):
    """No first-order symmetry correction exists for the given perturbation.

    ``blocks`` is a list of ``((a, b), norm)`` with the offending off-diagonal
    blocks, i.e. blocks where the Hamiltonian eigenvalues agree but the
    perturbation has a component that the symmetry cannot absorb.
    """

    def __init__(self, message, blocks):
        super().__init__(message)
        self.blocks = list(blocks)
