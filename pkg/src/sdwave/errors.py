"""Exception hierarchy shared by the solver, sweep and CLI layers."""


class SdwaveError(Exception):
    """Base class for all library errors."""


class ConfigError(SdwaveError):
    """Configuration file or override could not be turned into a problem."""


class DegenerateOverdetermination(SdwaveError):
    """The pairing of K with f1 vanishes, so g(t) cannot be recovered."""

    def __init__(self, kf1, tol):
        super().__init__(
            f"|integral K f1| = {abs(kf1):.3e} below degeneracy tolerance {tol:.3e}"
        )
        self.kf1 = kf1
        self.tol = tol


class NonConvergence(SdwaveError):
    """Fixed-point iteration of an implicit step did not converge."""

    def __init__(self, t, iterations, increment):
        super().__init__(
            f"fixed-point iteration stalled at t={t:.6g} after {iterations} "
            f"iterations (last increment {increment:.3e}); reduce dt"
        )
        self.t = t
        self.iterations = iterations
        self.increment = increment


class Diverged(SdwaveError):
    """State norm blew past the divergence guard."""

    def __init__(self, t, norm, guard):
        super().__init__(f"state norm {norm:.3e} exceeded guard {guard:.3e} at t={t:.6g}")
        self.t = t
        self.norm = norm
        self.guard = guard


class SweepNotConverged(SdwaveError):
    """The m-schedule was exhausted before successive windows agreed."""

    def __init__(self, diagnostics, smallness=None):
        last = diagnostics.differences[-1] if diagnostics.differences else float("nan")
        super().__init__(
            f"sweep did not converge: last inter-m difference {last:.3e} "
            f">= tolerance {diagnostics.sweep_tol:.3e}"
        )
        self.diagnostics = diagnostics
        self.smallness = smallness


class WindowTooShort(SdwaveError):
    """Trajectory does not cover the span a shift comparison needs."""


class InadmissibleEta(SdwaveError):
    """Energy weight eta lies outside the range keeping W and V non-negative."""


class InsufficientPositiveSamples(SdwaveError):
    """Too few positive samples remain for a logarithmic decay fit."""


class BoundaryViolation(SdwaveError):
    """A manufactured solution does not vanish on the boundary."""


class ManufactureError(SdwaveError):
    """Supplied derivatives of a manufactured solution are inconsistent."""
