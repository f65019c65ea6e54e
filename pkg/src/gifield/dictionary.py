"""Constrained overcomplete dictionary learning and greedy sparse coding.

The dictionary is an N x K atom matrix whose first atom is the constant
vector with entries N**-0.5 and whose remaining atoms are zero-mean,
all unit norm. Training is K-SVD style: alternate greedy sparse coding
(orthogonal matching pursuit) with per-atom rank-1 updates, re-projecting
each updated atom onto the constraint set.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg

from .errors import DegenerateMatrixError

log = logging.getLogger(__name__)

# columns longer than this use a Lanczos top-pair solve instead of full SVD
_DENSE_SVD_LIMIT = 64


@dataclass(frozen=True)
class SparseCode:
    """Sparse coefficient vector plus its support (in selection order)."""

    coefficients: np.ndarray
    support: tuple[int, ...]

    def __post_init__(self):
        self.coefficients.setflags(write=False)

    @property
    def n_nonzero(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class Dictionary:
    """Learned sparsifying basis (atoms as columns) with its training budget."""

    atoms: np.ndarray
    sparsity: int

    def __post_init__(self):
        self.atoms.setflags(write=False)

    @property
    def n_pixels(self) -> int:
        return self.atoms.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[1]

    @property
    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(repr(self.atoms.shape).encode())
        h.update(np.ascontiguousarray(self.atoms).tobytes())
        return h.hexdigest()[:16]

    def validate(self) -> None:
        """Check the structural constraints; raises ValueError on violation."""
        n = self.n_pixels
        const = n**-0.5
        if np.max(np.abs(self.atoms[:, 0] - const)) > 1e-12:
            raise ValueError("first atom is not the constant vector")
        col_sums = np.abs(self.atoms[:, 1:].sum(axis=0))
        if col_sums.size and col_sums.max() > 1e-9:
            raise ValueError("an atom beyond the first is not zero-mean")
        norms = np.linalg.norm(self.atoms, axis=0)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            raise ValueError("atoms are not unit norm")


@dataclass(frozen=True)
class TrainingConfig:
    """K-SVD training knobs."""

    atom_count: int
    sparsity: int
    sweeps: int
    seed: int = 0
    replacement: str = "worst"  # dead-atom policy: "worst" column or "none"

    def __post_init__(self):
        if self.atom_count < 1:
            raise ValueError("atom_count must be >= 1")
        if self.sparsity < 1:
            raise ValueError("sparsity must be >= 1")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.replacement not in ("worst", "none"):
            raise ValueError(f"unknown replacement policy {self.replacement!r}")


def omp(d: np.ndarray, y: np.ndarray, t0: int, residual_tol: float | None = None) -> SparseCode:
    """Orthogonal matching pursuit.

    Greedily picks the column most correlated with the residual
    (normalized by column norm), re-solves least squares on the selected
    support, and stops once ``t0`` atoms are used or the residual norm
    drops to ``residual_tol`` (default 1e-6 * ||y||).

    Args:
        d: matrix whose columns are the candidate atoms.
        y: signal to approximate.
        t0: maximum number of selected columns.
        residual_tol: absolute residual-norm stopping threshold.

    Returns:
        SparseCode over the columns of ``d``.
    """
    d = np.asarray(d, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if d.ndim != 2 or d.shape[0] != y.size:
        raise ValueError(f"matrix {d.shape} incompatible with signal of length {y.size}")
    if t0 < 1:
        raise ValueError("sparsity budget must be >= 1")
    norms = np.linalg.norm(d, axis=0)
    if np.any(norms == 0.0):
        raise DegenerateMatrixError("zero column in sparse-coding matrix")
    if residual_tol is None:
        residual_tol = 1e-6 * float(np.linalg.norm(y))

    support: list[int] = []
    coeffs = np.zeros(0)
    residual = y.copy()
    budget = min(t0, d.shape[1])
    while len(support) < budget and np.linalg.norm(residual) > residual_tol:
        corr = np.abs(d.T @ residual) / norms
        corr[support] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 0.0:
            break
        support.append(j)
        coeffs, *_ = np.linalg.lstsq(d[:, support], y, rcond=None)
        residual = y - d[:, support] @ coeffs

    z = np.zeros(d.shape[1])
    z[support] = coeffs
    return SparseCode(coefficients=z, support=tuple(support))


def sparse_code_columns(
    atoms: np.ndarray, x: np.ndarray, t0: int, tol_scale: float = 1e-6
) -> np.ndarray:
    """OMP-code every column of ``x`` against unit-norm ``atoms``.

    Gram-accelerated batch variant of :func:`omp` (precomputed atom Gram and
    correlation recurrences); selection, least-squares fits, and the stopping
    rule match the single-signal routine. Returns the K x L coefficient matrix.
    """
    atoms = np.asarray(atoms, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    k = atoms.shape[1]
    gram = atoms.T @ atoms
    corr0 = atoms.T @ x
    ynorm2 = np.sum(x * x, axis=0)
    tol2 = (tol_scale**2) * ynorm2
    budget = min(t0, k)

    z = np.zeros((k, x.shape[1]))
    for i in range(x.shape[1]):
        if ynorm2[i] == 0.0:
            continue
        alpha = corr0[:, i].copy()
        selected = np.zeros(k, dtype=bool)
        support: list[int] = []
        coeffs = np.zeros(0)
        err2 = ynorm2[i]
        while len(support) < budget and err2 > tol2[i]:
            cand = np.abs(alpha)
            cand[selected] = -1.0
            j = int(np.argmax(cand))
            if cand[j] <= 0.0:
                break
            support.append(j)
            selected[j] = True
            sub = gram[np.ix_(support, support)]
            rhs = corr0[support, i]
            try:
                coeffs = np.linalg.solve(sub, rhs)
            except np.linalg.LinAlgError:
                coeffs, *_ = np.linalg.lstsq(sub, rhs, rcond=None)
            alpha = corr0[:, i] - gram[:, support] @ coeffs
            err2 = max(ynorm2[i] - float(coeffs @ rhs), 0.0)
        z[support, i] = coeffs
    return z


def _random_zero_mean_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n)
    v -= v.mean()
    nrm = np.linalg.norm(v)
    while nrm < 1e-12:  # vanishing after centering; redraw
        v = rng.standard_normal(n)
        v -= v.mean()
        nrm = np.linalg.norm(v)
    return v / nrm


def _orient(v: np.ndarray) -> np.ndarray:
    """Flip sign so the largest-magnitude entry is positive (determinism)."""
    if v[int(np.argmax(np.abs(v)))] < 0:
        return -v
    return v


def _constrain_atom(v: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Project onto the zero-mean unit sphere; random fallback if degenerate."""
    w = v - v.mean()
    nrm = np.linalg.norm(w)
    if nrm < 1e-12:
        return _orient(_random_zero_mean_unit(rng, v.size))
    return _orient(w / nrm)


def _init_atoms(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n, n_signals = x.shape
    atoms = np.empty((n, k))
    atoms[:, 0] = n**-0.5
    picks = rng.choice(n_signals, size=k - 1, replace=n_signals < k - 1) if k > 1 else []
    for col, pick in enumerate(picks, start=1):
        atoms[:, col] = _constrain_atom(x[:, pick], rng)
    return atoms


def _rank1_left_vector(e: np.ndarray, atom: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Top left-singular vector of ``e``; Lanczos with a warm start when wide.

    ``atom``/``coeffs`` are the current left/right factors, used to seed the
    iteration (whichever side matches the Lanczos subspace).
    """
    if e.shape[1] == 1:
        return e[:, 0] / np.linalg.norm(e[:, 0])
    if e.shape[1] <= _DENSE_SVD_LIMIT:
        u, _, _ = np.linalg.svd(e, full_matrices=False)
        return u[:, 0]
    warm = coeffs if e.shape[1] <= e.shape[0] else atom
    u, _, _ = scipy.sparse.linalg.svds(e, k=1, v0=warm)
    return u[:, 0]


def _replace_dead_atoms(
    atoms: np.ndarray,
    usage_counts: np.ndarray,
    x: np.ndarray,
    codes: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, int]:
    dead = [k for k in range(1, atoms.shape[1]) if usage_counts[k] == 0]
    if not dead:
        return atoms, 0
    residual_norms = np.linalg.norm(x - atoms @ codes, axis=0)
    worst_first = np.argsort(residual_norms)[::-1]
    atoms = atoms.copy()
    for rank, k in enumerate(dead):
        if rank < worst_first.size:
            atoms[:, k] = _constrain_atom(x[:, worst_first[rank]], rng)
        else:
            atoms[:, k] = _random_zero_mean_unit(rng, atoms.shape[0])
    return atoms, len(dead)


def replace_unused_atoms(
    dictionary: Dictionary,
    usage_counts: np.ndarray,
    x: np.ndarray,
    codes: np.ndarray,
    seed: int,
) -> Dictionary:
    """Swap never-used atoms (beyond the first) for the worst-coded signals.

    ``codes`` is the current sparse coefficient matrix for ``x``; it decides
    which training columns are represented worst. No-op when every atom is
    in use.
    """
    usage_counts = np.asarray(usage_counts)
    if usage_counts.size != dictionary.n_atoms:
        raise ValueError("usage counts do not match the atom count")
    atoms, n_dead = _replace_dead_atoms(
        np.array(dictionary.atoms), usage_counts, np.asarray(x, dtype=np.float64),
        np.asarray(codes, dtype=np.float64), np.random.default_rng(seed),
    )
    if n_dead == 0:
        return dictionary
    return Dictionary(atoms=atoms, sparsity=dictionary.sparsity)


def ksvd_train(x: np.ndarray, cfg: TrainingConfig) -> tuple[Dictionary, np.ndarray]:
    """Learn a constrained dictionary from training signals.

    Args:
        x: N x L matrix, one training signal per column.
        cfg: training knobs (atom count, sparsity budget, sweep count, seed).

    Returns:
        (dictionary, objectives): the trained dictionary and the value of
        ||X - Psi Z||_F**2 recorded right after the sparse-coding half of
        each sweep.

    Each sweep codes all signals with budget ``cfg.sparsity``, then updates
    atoms one at a time from the rank-1 factorization of the atom's restricted
    residual. Atom 1 stays constant (only its coefficients are refit); every
    other atom is re-centered to zero mean, renormalized, and kept only if it
    captures at least as much residual energy as the atom it replaces, after
    which its coefficients are refit. Dead atoms are replaced per
    ``cfg.replacement``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 1:
        raise ValueError("training data must be an N x L matrix with L >= 1")
    if not np.all(np.isfinite(x)):
        raise ValueError("training data must be finite")
    if not np.any(x):
        raise DegenerateMatrixError("training matrix is all zero")
    n = x.shape[0]
    if cfg.atom_count < n:
        raise ValueError(f"atom count {cfg.atom_count} < signal dimension {n}")

    rng = np.random.default_rng(cfg.seed)
    atoms = _init_atoms(x, cfg.atom_count, rng)
    objectives = np.empty(cfg.sweeps)

    for sweep in range(cfg.sweeps):
        z = sparse_code_columns(atoms, x, cfg.sparsity)
        residual = x - atoms @ z
        objectives[sweep] = float(np.sum(residual * residual))

        for k in range(cfg.atom_count):
            used = np.flatnonzero(z[k])
            if used.size == 0:
                continue
            e = residual[:, used] + np.outer(atoms[:, k], z[k, used])
            if k == 0:
                psi = atoms[:, 0]
            else:
                cand = _constrain_atom(_rank1_left_vector(e, atoms[:, k], z[k, used]), rng)
                # projection can spoil the SVD optimum; keep whichever atom
                # captures more of the restricted residual
                if np.linalg.norm(cand @ e) >= np.linalg.norm(atoms[:, k] @ e):
                    psi = cand
                else:
                    psi = atoms[:, k]
            coeffs = psi @ e
            z[k, used] = coeffs
            residual[:, used] = e - np.outer(psi, coeffs)
            atoms[:, k] = psi

        updated = float(np.sum(residual * residual))
        log.debug("sweep %d: objective %.6g -> %.6g", sweep, objectives[sweep], updated)

        if cfg.replacement == "worst":
            usage = np.count_nonzero(z, axis=1)
            atoms, n_dead = _replace_dead_atoms(atoms, usage, x, z, rng)
            if n_dead:
                log.debug("sweep %d: replaced %d dead atoms", sweep, n_dead)

    return Dictionary(atoms=atoms, sparsity=cfg.sparsity), objectives


def random_dictionary(n: int, k: int, seed: int) -> Dictionary:
    """Random dictionary satisfying the structural constraints (for studies)."""
    if k < n:
        raise ValueError("need at least as many atoms as pixels")
    rng = np.random.default_rng(seed)
    atoms = np.empty((n, k))
    atoms[:, 0] = n**-0.5
    for j in range(1, k):
        atoms[:, j] = _random_zero_mean_unit(rng, n)
    return Dictionary(atoms=atoms, sparsity=max(1, n // 8))
