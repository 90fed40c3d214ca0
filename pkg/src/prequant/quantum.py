"""Finite-dimensional Schrodinger dynamics on the unit sphere of C^d.

The sign follows the convention H psi = -i hbar d(psi)/dt, so the
Schrodinger field is X(psi) = (i/hbar) H psi and the propagator is
U(t) = exp(+i t H / hbar).  ``SCHRODINGER_SIGN`` carries that choice;
flip it to -1 for the more common exp(-i t H / hbar).  None of the checks
in this module depend on the sign.
"""

import numpy as np

from .errors import DimensionMismatch, NoConvergence

SCHRODINGER_SIGN = 1.0
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
UNIT_TOL = 1e-12


def _off_norm(A):
    return float(np.sqrt(max(0.0, np.sum(np.abs(A) ** 2) - np.sum(np.abs(np.diag(A)) ** 2))))


def jacobi_eigh(A, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, V, sweeps)`` with ascending eigenvalues and
    A V = V diag(eigenvalues).  Sweeps until the off-diagonal Frobenius
    norm is <= tol * max(1, ||A||_F), then runs one more sweep, which the
    quadratic convergence drives down to roundoff.
    """
    A = np.array(A, dtype=complex)
    d = A.shape[0]
    if A.shape != (d, d):
        raise DimensionMismatch("matrix must be square")
    V = np.eye(d, dtype=complex)
    target = tol * max(1.0, float(np.linalg.norm(A)))
    sweeps = 0
    polish = d > 1
    while True:
        if _off_norm(A) <= target:
            if not polish:
                break
            polish = False
        if sweeps >= max_sweeps:
            if _off_norm(A) <= target:
                break
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                mag = abs(apq)
                if mag < 1e-200:
                    continue
                phase = apq / mag
                app = A[p, p].real
                aqq = A[q, q].real
                # real symmetric Schur rotation on the phase-adjusted 2x2 block
                tau = (aqq - app) / (2.0 * mag)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                G = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                cols = A[:, [p, q]] @ G
                A[:, p], A[:, q] = cols[:, 0], cols[:, 1]
                rows = G.conj().T @ A[[p, q], :]
                A[p, :], A[q, :] = rows[0], rows[1]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                vc = V[:, [p, q]] @ G
                V[:, p], V[:, q] = vc[:, 0], vc[:, 1]
    w = np.diag(A).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order], sweeps


class HermitianMatrix:
    """A Hermitian operator on C^d with a cached Jacobi eigen-decomposition.

    The constructor rejects matrices whose deviation from their conjugate
    transpose exceeds 1e-12 entrywise, then symmetrizes.
    """

    def __init__(self, matrix, tol=1e-12):
        M = np.array(matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("matrix has non-finite entries")
        dev = float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0
        if dev > tol:
            raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
        self._m = 0.5 * (M + M.conj().T)
        self._m.flags.writeable = False
        self._eig = None

    @classmethod
    def unchecked(cls, matrix):
        """Wrap any square matrix without validation (for negative tests only)."""
        obj = cls.__new__(cls)
        obj._m = np.array(matrix, dtype=complex)
        obj._m.flags.writeable = False
        obj._eig = None
        return obj

    @property
    def matrix(self):
        return self._m

    @property
    def dim(self):
        return self._m.shape[0]

    def eigh(self):
        if self._eig is None:
            self._eig = jacobi_eigh(self._m)[:2]
        return self._eig

    def __matmul__(self, other):
        return self._m @ other

    def __repr__(self):
        return f"HermitianMatrix(dim={self.dim})"


def _as_matrix(H):
    return H if isinstance(H, HermitianMatrix) else HermitianMatrix(H)


def _as_state(psi, d=None):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if d is not None and psi.shape[0] != d:
        raise DimensionMismatch(f"state has dimension {psi.shape[0]}, operator {d}")
    return psi


def unit_state(psi):
    psi = _as_state(psi)
    return psi / np.linalg.norm(psi)


def is_unit(psi, tol=UNIT_TOL):
    return abs(float(np.linalg.norm(psi)) - 1.0) <= tol


def schrodinger_field(H, psi, hbar=1.0):
    """(i/hbar) H psi."""
    H = _as_matrix(H)
    psi = _as_state(psi, H.dim)
    return SCHRODINGER_SIGN * 1j / hbar * (H.matrix @ psi)


def propagator(H, t, hbar=1.0):
    """U(t) = V diag(exp(i t lambda_k / hbar)) V^dagger."""
    H = _as_matrix(H)
    if t == 0:
        return np.eye(H.dim, dtype=complex)
    w, V = H.eigh()
    return (V * np.exp(SCHRODINGER_SIGN * 1j * t * w / hbar)) @ V.conj().T


def propagate(H, psi0, t, hbar=1.0):
    H = _as_matrix(H)
    psi0 = _as_state(psi0, H.dim)
    if not is_unit(psi0):
        raise ValueError("initial state must have unit norm")
    if t == 0:
        return psi0.copy()
    w, V = H.eigh()
    coeffs = V.conj().T @ psi0
    return V @ (np.exp(SCHRODINGER_SIGN * 1j * t * w / hbar) * coeffs)


def tangency_defect(H, psi, hbar=1.0):
    """|Re <psi, X(psi)>|: zero exactly when the field is tangent to the sphere at psi."""
    X = schrodinger_field(H, psi, hbar)
    return abs(float(np.vdot(_as_state(psi), X).real))


def projective_distance(psi, phi):
    """min over theta of ||psi - exp(i theta) phi|| for unit states.

    Equal to sqrt(2 - 2|<psi, phi>|), but evaluated as the norm of the
    phase-aligned difference so that nearby states do not lose half their
    digits to cancellation.
    """
    psi = _as_state(psi)
    phi = _as_state(phi, psi.shape[0])
    overlap = np.vdot(phi, psi)
    if abs(overlap) < 1e-300:
        return float(np.sqrt(2.0))
    return float(np.linalg.norm(psi - (overlap / abs(overlap)) * phi))


def unitarity_defect(H, t, hbar=1.0):
    U = propagator(H, t, hbar)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def energy_expectation(H, psi):
    H = _as_matrix(H)
    psi = _as_state(psi, H.dim)
    return float(np.vdot(psi, H.matrix @ psi).real)


def random_hermitian(d, rng, scale=1.0):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return HermitianMatrix(scale * 0.5 * (A + A.conj().T))


def random_unit_state(d, rng):
    return unit_state(rng.normal(size=d) + 1j * rng.normal(size=d))
