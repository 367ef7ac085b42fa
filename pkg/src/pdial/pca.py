"""Principal-component reduction of perspective embeddings to 2-D.

The covariance matrix is diagonalized with cyclic Jacobi rotations
(upper triangle, row-major sweep order) so the decomposition is exact
for symmetric input, dependency-free, and easy to check against a
reference eigensolver. The top components define the user-facing 2-D
perspective space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputValidationError, NumericError

JACOBI_MAX_SWEEPS = 100
JACOBI_REL_TOL = 1e-12


@dataclass(frozen=True)
class PerspectivePoint:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise InputValidationError(
                f"perspective point must be finite, got ({self.x}, {self.y})"
            )


@dataclass(frozen=True)
class PcaModel:
    """Mean vector plus orthonormal principal axes (rows of components)."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        comps = np.asarray(self.components, dtype=np.float64)
        ev = np.asarray(self.explained_variance, dtype=np.float64)
        if comps.ndim != 2 or comps.shape[1] != mean.shape[0]:
            raise InputValidationError(
                f"components shape {comps.shape} does not match mean "
                f"length {mean.shape}"
            )
        if ev.shape != (comps.shape[0],):
            raise InputValidationError(
                "explained_variance length must match component count"
            )
        gram = comps @ comps.T
        if not np.allclose(gram, np.eye(comps.shape[0]), atol=1e-8):
            raise InputValidationError("component rows must be orthonormal")
        if np.any(ev < 0.0) or np.any(np.diff(ev) > 0.0):
            raise InputValidationError(
                "explained variances must be non-negative and non-increasing"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "explained_variance", ev)

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])


def jacobi_eigh(
    C: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Sweeps rotate away each upper-triangle entry in row-major order until
    the off-diagonal Frobenius norm drops below ``JACOBI_REL_TOL`` times
    the Frobenius norm of the input. Returns (eigenvalues, eigenvectors)
    sorted by descending eigenvalue, eigenvectors as rows.
    """
    A = np.array(C, dtype=np.float64, copy=True)
    n = A.shape[0]
    if A.shape != (n, n):
        raise InputValidationError(f"matrix must be square, got {A.shape}")
    if not np.allclose(A, A.T, rtol=0.0, atol=0.0):
        raise InputValidationError("matrix must be exactly symmetric")
    V = np.eye(n)
    frob = float(np.linalg.norm(A))
    tol = JACOBI_REL_TOL * frob
    off_mask = ~np.eye(n, dtype=bool)

    def off_norm() -> float:
        # Sum only true off-diagonal entries; subtracting the diagonal
        # mass from the full Frobenius norm loses everything below
        # sqrt(eps)*|A| to cancellation.
        return float(np.sqrt(np.sum(A[off_mask] ** 2)))

    converged = off_norm() <= tol
    sweeps = 0
    while not converged:
        if sweeps >= max_sweeps:
            raise NumericError(
                f"Jacobi eigensolver did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off_norm():.3e}, tolerance {tol:.3e})"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:  # theta**2 would overflow
                    t = 1.0 / (2.0 * theta)
                else:
                    sign = 1.0 if theta >= 0.0 else -1.0
                    t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/columns p and q of A
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                vcol_p = V[:, p].copy()
                vcol_q = V[:, q].copy()
                V[:, p] = c * vcol_p - s * vcol_q
                V[:, q] = s * vcol_p + c * vcol_q
        sweeps += 1
        converged = off_norm() <= tol

    eigvals = np.diag(A).copy()
    order = np.argsort(-eigvals, kind="stable")
    return eigvals[order], V[:, order].T


def _apply_sign_convention(components: np.ndarray) -> np.ndarray:
    fixed = components.copy()
    for i in range(fixed.shape[0]):
        j = int(np.argmax(np.abs(fixed[i])))
        if fixed[i, j] < 0.0:
            fixed[i] = -fixed[i]
    return fixed


def fit_pca(points: list[np.ndarray], out_dim: int = 2) -> PcaModel:
    """Fit the PCA reduction on projected perspective embeddings.

    Uses the unbiased covariance (1/(n-1)) and the Jacobi solver; the
    largest-|entry| coordinate of each principal axis is made positive so
    fitted models are reproducible down to the byte.
    """
    if len(points) < 3:
        raise InputValidationError(
            f"PCA needs at least 3 points, got {len(points)}"
        )
    try:
        X = np.asarray(points, dtype=np.float64)
    except ValueError as exc:
        raise InputValidationError(
            f"points must all have the same dimension: {exc}"
        ) from exc
    if X.ndim != 2:
        raise InputValidationError("points must all have the same dimension")
    d = X.shape[1]
    if d < 2:
        raise InputValidationError(f"point dimension must be >= 2, got {d}")
    if out_dim < 1 or out_dim > d:
        raise InputValidationError(
            f"out_dim must be in [1, {d}], got {out_dim}"
        )
    mean = X.mean(axis=0)
    centered = X - mean
    cov = (centered.T @ centered) / (X.shape[0] - 1)
    cov = (cov + cov.T) / 2.0  # force exact symmetry for the solver
    eigvals, eigvecs = jacobi_eigh(cov)
    components = _apply_sign_convention(eigvecs[:out_dim])
    explained = np.maximum(eigvals[:out_dim], 0.0)
    return PcaModel(mean=mean, components=components, explained_variance=explained)


def pca_transform(model: PcaModel, p: np.ndarray) -> PerspectivePoint:
    """Coordinates of ``p`` in the fitted 2-D perspective space."""
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (model.dim,):
        raise InputValidationError(
            f"point length {p.shape} does not match model dimension {model.dim}"
        )
    coords = model.components @ (p - model.mean)
    if coords.shape[0] != 2:
        raise InputValidationError(
            f"model has {coords.shape[0]} components, expected 2 for "
            "perspective points"
        )
    return PerspectivePoint(x=float(coords[0]), y=float(coords[1]))
