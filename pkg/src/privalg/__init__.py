"""Private and correctable subalgebras for finite-dimensional quantum channels."""
from .numerics import DEFAULT_TOL, Tolerances
from .algebra import (
    AlgebraError,
    BlockStructure,
    VNAlgebra,
    center,
    commutant,
    conditional_expectation,
    contains,
    full_algebra,
    generate,
    is_factor,
    structure,
)
from .channel import (
    Channel,
    ChannelError,
    StinespringTriple,
    choi,
    complement,
    compose,
    compress,
    conjugate,
    from_choi,
    from_kraus,
    minimal_stinespring,
    tensor,
)

__version__ = "0.1.0"
