"""Truncated two-mode Fock-space density operators.

A state over modes A and B is stored as the rank-4 coefficient tensor
p[n, m, k, l] of sum_{nmkl} p |n, m><k, l|, with n, k indexing mode A and
m, l indexing mode B. Flattening (n, m) rows against (k, l) columns gives
the usual dim^2 x dim^2 density matrix.
"""

import math
from dataclasses import dataclass, field

import numpy as np


class ZeroTraceError(ValueError):
    """Raised when a conditional branch carries (numerically) no weight."""


class NotHermitianError(ValueError):
    """Raised when an operator expected to be Hermitian is not."""


@dataclass(frozen=True)
class TruncationConfig:
    """Numerical policy: Fock cutoff and the tolerances every op consults.

    n_max      highest Fock index kept per mode (dim = n_max + 1)
    eig_tol    Hermiticity / positivity slack for eigenvalue checks
    trace_tol  admissible truncated tail weight; also the zero-trace floor
    conv_tol   trace-distance threshold for fixed-point iteration
    """

    n_max: int
    eig_tol: float = 1e-10
    trace_tol: float = 1e-15
    conv_tol: float = 1e-8

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max}")
        for name in ("eig_tol", "trace_tol", "conv_tol"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")

    @property
    def dim(self):
        return self.n_max + 1


def auto_n_max(lam, trace_tol=1e-15):
    """Smallest cutoff whose discarded squeezed-state tail stays below trace_tol.

    The tail weight of the geometric photon-number distribution beyond n_max
    is lam^(2*(n_max + 1)).
    """
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"squeezing parameter must lie in [0, 1), got {lam}")
    n = 1
    while lam ** (2 * (n + 1)) >= trace_tol:
        n += 1
    return n


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """Immutable two-mode density operator plus its numerical policy."""

    coeffs: np.ndarray
    trace: float
    cfg: TruncationConfig = field(repr=False)

    @property
    def dim(self):
        return self.coeffs.shape[0]

    @property
    def n_max(self):
        return self.coeffs.shape[0] - 1

    def as_matrix(self):
        """Density-matrix view, rows (n, m) against columns (k, l)."""
        d = self.dim
        return self.coeffs.reshape(d * d, d * d)


def state_from_coeffs(coeffs, cfg):
    """Wrap a rank-4 coefficient tensor, computing its trace."""
    c = np.asarray(coeffs, dtype=complex)
    d = cfg.n_max + 1
    if c.shape != (d, d, d, d):
        raise ValueError(f"expected shape {(d, d, d, d)}, got {c.shape}")
    c = c.copy()
    c.flags.writeable = False
    tr = float(np.einsum("nmnm->", c).real)
    return TwoModeState(c, tr, cfg)


def tmss(lam, cfg, allow_truncation=False):
    """Truncated, renormalized two-mode squeezed state.

    Refuses (lam, n_max) pairs whose discarded tail weight lam^(2*(n_max+1))
    reaches cfg.trace_tol unless allow_truncation is set; auto_n_max() gives
    the smallest admissible cutoff.
    """
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"squeezing parameter must lie in [0, 1), got {lam}")
    tail = lam ** (2 * (cfg.n_max + 1))
    if tail >= cfg.trace_tol and not allow_truncation:
        raise ValueError(
            f"n_max={cfg.n_max} keeps a truncated tail of {tail:.3g} >= "
            f"trace_tol={cfg.trace_tol:.3g} at lam={lam}; raise n_max "
            f"(auto_n_max gives {auto_n_max(lam, cfg.trace_tol)}) or pass "
            "allow_truncation=True"
        )
    d = cfg.dim
    amps = lam ** np.arange(d)
    amps /= math.sqrt(np.sum(amps * amps))
    c = np.zeros((d, d, d, d), dtype=complex)
    idx = np.arange(d)
    c[idx[:, None], idx[:, None], idx[None, :], idx[None, :]] = np.outer(amps, amps)
    return state_from_coeffs(c, cfg)


def vacuum(cfg):
    d = cfg.dim
    c = np.zeros((d, d, d, d), dtype=complex)
    c[0, 0, 0, 0] = 1.0
    return state_from_coeffs(c, cfg)


def trace_of(state):
    """Trace re-read from the coefficients (not the cached field)."""
    return float(np.einsum("nmnm->", state.coeffs).real)


def normalize(state):
    """Rescale to unit trace; returns (normalized state, original trace).

    The original trace is the outcome probability when the input is an
    unnormalized conditional state.
    """
    tr = trace_of(state)
    if tr <= state.cfg.trace_tol:
        raise ZeroTraceError(f"trace {tr:.3g} is at or below trace_tol")
    return state_from_coeffs(state.coeffs / tr, state.cfg), tr


def swap_modes(state):
    """Exchange the roles of modes A and B."""
    return state_from_coeffs(state.coeffs.transpose(1, 0, 3, 2), state.cfg)


def hermiticity_defect(state):
    """Largest |p[n,m,k,l] - conj(p[k,l,n,m])|."""
    c = state.coeffs
    return float(np.abs(c - c.transpose(2, 3, 0, 1).conj()).max())


def min_eigenvalue(state):
    """Smallest eigenvalue of the density matrix (negative means non-PSD)."""
    return float(np.linalg.eigvalsh(state.as_matrix())[0])


def check_state(state, psd=True):
    """Validate Hermiticity, positivity and trace consistency; raise on failure."""
    tol = state.cfg.eig_tol
    defect = hermiticity_defect(state)
    if defect > tol:
        raise NotHermitianError(f"hermiticity defect {defect:.3g} > eig_tol {tol:.3g}")
    if abs(trace_of(state) - state.trace) > max(state.cfg.trace_tol, 1e-12):
        raise ValueError("cached trace disagrees with coefficients")
    if psd:
        low = min_eigenvalue(state)
        if low < -tol:
            raise ValueError(f"state has eigenvalue {low:.3g} < -eig_tol")
