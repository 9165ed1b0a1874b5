"""Sparse LU: factor once, back-substitute many times.

SuperLU (through scipy) with a minimum-degree ordering on ``A + A^T`` and
threshold partial pivoting.  Operators are structurally symmetric, so the
symmetric-mode hint keeps diagonal pivots whenever they pass the threshold.
"""
from __future__ import annotations

import hashlib
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ContractError, SingularMatrixError

PIVOT_THRESHOLD = 0.1
ORDERING = "MMD_AT_PLUS_A"


@dataclass(eq=False)
class Factorization:
    """LU factors of a square sparse matrix.

    ``solve`` is safe to call from several threads; SuperLU keeps no state
    between triangular solves, but calls are serialised on a lock anyway so
    the guarantee does not depend on the scipy build.
    """

    n: int
    lu: spla.SuperLU
    matrix: sp.csr_matrix | None = None
    refine: bool = False
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def nnz(self) -> int:
        return int(self.lu.L.nnz + self.lu.U.nnz)

    @property
    def nbytes(self) -> int:
        # complex128 value plus int32 index per stored entry
        return 20 * self.nnz

    def solve(self, b):
        b = np.asarray(b)
        if b.shape[0] != self.n:
            raise ContractError(f"right-hand side has length {b.shape[0]}, expected {self.n}")
        b = b.astype(complex, copy=False)
        with self._lock:
            x = self.lu.solve(b)
            if self.refine and self.matrix is not None:
                x = x + self.lu.solve(b - self.matrix @ x)
        return x


def factor(a, refine=False, keep_matrix=False) -> Factorization:
    """Factor ``a`` (any scipy sparse or dense 2D array)."""
    a = sp.csc_matrix(a, dtype=complex)
    n, m = a.shape
    if n != m or n < 1:
        raise ContractError(f"matrix must be square and nonempty, got {a.shape}")
    try:
        lu = spla.splu(a, permc_spec=ORDERING, diag_pivot_thresh=PIVOT_THRESHOLD,
                       options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise SingularMatrixError(str(exc)) from exc
    return Factorization(n, lu, a.tocsr() if (keep_matrix or refine) else None, refine)


def solve(f: Factorization, b):
    return f.solve(b)


def relative_residual(a, x, b) -> float:
    nb = np.linalg.norm(b)
    r = np.linalg.norm(a @ x - b)
    return float(r / nb) if nb else float(r)


def check_factorization(a, f: Factorization, tol=1e-10, seed=0):
    """Spot check on a fixed random vector; raises if the factors look wrong."""
    rng = np.random.default_rng(seed)
    b = rng.standard_normal(f.n) + 1j * rng.standard_normal(f.n)
    res = relative_residual(a, f.solve(b), b)
    if not res <= tol:
        raise SingularMatrixError(f"factorization residual {res:.2e} exceeds {tol:.0e}")
    return res


def matrix_key(a: sp.csr_matrix) -> str:
    """Content hash of a CSR matrix; equal keys mean identical operators."""
    a = sp.csr_matrix(a)
    a.sort_indices()
    h = hashlib.sha1()
    h.update(np.asarray(a.shape, dtype=np.int64).tobytes())
    for arr in (a.indptr, a.indices, a.data):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


class FactorCache:
    """Factorizations keyed by operator content, with an optional memory budget.

    Subdomains with identical operators share one factorization.  When
    ``budget_bytes`` is set, least recently used factors are dropped once the
    budget is exceeded and rebuilt on the next request.  With ``refine`` a
    factorization failing the spot check is retried with one step of
    iterative refinement per solve.
    """

    def __init__(self, budget_bytes: int | None = None, verify_tol: float | None = 1e-10,
                 refine: bool = False):
        self.budget = budget_bytes
        self.verify_tol = verify_tol
        self.refine = refine
        self._factors: OrderedDict[str, Factorization] = OrderedDict()
        self._builders: dict[str, object] = {}
        self._sizes: dict[str, int] = {}
        self._lock = threading.Lock()
        self.n_factor = 0

    def register(self, key: str, build):
        """Remember how to build the matrix for ``key`` (a zero-arg callable)."""
        self._builders.setdefault(key, build)

    def get(self, key: str) -> Factorization:
        with self._lock:
            f = self._factors.get(key)
            if f is not None:
                self._factors.move_to_end(key)
                return f
            if self.budget is not None:
                guess = self._sizes.get(key, max(self._sizes.values(), default=0))
                self._evict_until(guess)
            a = self._builders[key]()
            f = factor(a)
            if self.verify_tol is not None:
                try:
                    check_factorization(a, f, self.verify_tol)
                except SingularMatrixError:
                    if not self.refine:
                        raise
                    f = Factorization(f.n, f.lu, sp.csr_matrix(a), True)
                    check_factorization(a, f, self.verify_tol)
            del a
            self.n_factor += 1
            self._sizes[key] = f.nbytes
            self._factors[key] = f
            return f

    def _evict_until(self, extra):
        while self._factors and self.resident_bytes + extra > self.budget:
            self._factors.popitem(last=False)

    @property
    def resident_bytes(self) -> int:
        return sum(f.nbytes for f in self._factors.values())

    def __contains__(self, key):
        return key in self._factors

    def __len__(self):
        return len(self._builders)
