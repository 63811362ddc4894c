"""Exception types raised by the toolkit."""


class OdxError(Exception):
    """Base class for all toolkit errors."""


class OrbitDivergence(OdxError):
    """An orbit left the admissible action range."""

    def __init__(self, n, y, bound):
        super().__init__(f"orbit diverged at n={n}: |y|={abs(y):.3e} exceeds {bound:g}")
        self.n = n
        self.y = y
        self.bound = bound


class NonZeroAverage(OdxError):
    """Right-hand side of a cohomological equation has non-zero average."""


class SmallDivisor(OdxError):
    """A retained divisor 1 - exp(2 pi i k omega) fell below the floor."""

    def __init__(self, k, divisor):
        super().__init__(f"small divisor at k={k}: |1 - e^(2 pi i k omega)| = {divisor:.3e}")
        self.k = k
        self.divisor = divisor


class DiophantineViolation(OdxError):
    """A rational p/q violates |omega - p/q| >= gamma / q**tau."""

    def __init__(self, p, q, gap, bound):
        super().__init__(f"|omega - {p}/{q}| = {gap:.3e} < gamma/q^tau = {bound:.3e}")
        self.p = p
        self.q = q
        self.gap = gap
        self.bound = bound


class NewtonFailure(OdxError):
    """Newton iteration for an invariant curve did not reach tolerance."""

    def __init__(self, msg, history=()):
        super().__init__(msg)
        self.history = list(history)


class EmbeddingLost(NewtonFailure):
    """The parameterization stopped being an embedding (1 + psi' <= 0)."""


class Breakdown(OdxError):
    """Continuation step size fell below the floor; the curve is presumed destroyed."""

    def __init__(self, k_reached, dk):
        super().__init__(f"continuation breakdown after k={k_reached:.6g} (dk={dk:.3e})")
        self.k_reached = k_reached
        self.dk = dk


class NotSPD(OdxError, ValueError):
    """Matrix expected to be symmetric positive definite is not."""
