"""Exception hierarchy shared by the library and the command line."""


class DickesimError(Exception):
    """Base class for every error raised by dickesim."""


class ConfigError(DickesimError, ValueError):
    """A scenario config document is missing, malformed or inconsistent."""


class InvalidEnsembleError(DickesimError, ValueError):
    """Invalid number of TLSs, (j, m) labels or composite slot."""


class DimensionMismatchError(DickesimError, ValueError):
    pass


class NonHermitianError(DickesimError, ValueError):
    pass


class SymmetryViolationError(DickesimError, ValueError):
    """The Hamiltonian couples different j blocks, so permutational symmetry is broken."""


class NonDiagonalInputError(DickesimError, ValueError):
    """pisolve was handed a Hamiltonian or state with off-diagonal entries."""


class OracleCapError(DickesimError, ValueError):
    """The uncoupled basis was requested for more TLSs than the configured cap."""


class UndefinedSqueezingError(DickesimError, ValueError):
    """The mean spin vanishes, so the squeezing parameter is undefined."""


class SolverError(DickesimError, RuntimeError):
    """Base class for numerical failures (exit code 3 on the command line)."""


class IntegrationError(SolverError):
    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (t = {time:.6g})")
        self.time = time


class SteadyStateError(SolverError):
    pass


class AmbiguousSteadyStateError(SteadyStateError):
    """The Liouvillian kernel is more than one-dimensional."""


class SingularResolventError(SolverError):
    def __init__(self, omega: float):
        super().__init__(f"Resolvent (i*omega - D) is singular at omega = {omega:.6g}")
        self.omega = omega


class EigenSolveError(SolverError):
    pass
