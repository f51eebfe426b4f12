"""Instrumented complex linear algebra kernels.

Every arithmetic operation the detectors perform is routed through the
helpers here, which charge a :class:`FlopLedger` under a fixed convention:

* one complex multiply                      -> 1 ``cmul``
* one complex add or subtract               -> 1 ``cadd``
* one reciprocal or divide (also real/cplx) -> 1 ``cdiv``

Conjugation, negation and data movement are free.  Hermitian-aware rank-one
updates compute only the upper triangle and mirror it, so they charge
``k*(k+1)/2`` products instead of ``k**2``; quadratic forms computed through
an explicit matrix-vector product charge the full ``k**2``.

The Gauss-Jordan routine at the bottom is the independent oracle used by the
test-suite: it is deliberately plain, uses partial pivoting, and never
touches a ledger.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractViolationError, SingularMatrixError

# Relative tolerance below which a pivot counts as singular.  alpha > 0 makes
# every matrix we invert positive definite, so a tiny pivot means misuse.
SINGULAR_RTOL = 1e-14

# Pivots such as gamma - r^H Q r are mathematically real for Hermitian
# inputs; imaginary parts beyond this relative level are treated as misuse.
PIVOT_IMAG_RTOL = 1e-10


class FlopLedger:
    """Counters of complex multiplies, adds and divisions.

    Instances only ever increase during a detector run; two ledgers merge by
    componentwise summation.
    """

    __slots__ = ("cmul", "cadd", "cdiv")

    def __init__(self, cmul: int = 0, cadd: int = 0, cdiv: int = 0):
        self.cmul = cmul
        self.cadd = cadd
        self.cdiv = cdiv

    def tick(self, cmul: int = 0, cadd: int = 0, cdiv: int = 0) -> None:
        self.cmul += cmul
        self.cadd += cadd
        self.cdiv += cdiv

    def merge(self, other: "FlopLedger") -> "FlopLedger":
        self.cmul += other.cmul
        self.cadd += other.cadd
        self.cdiv += other.cdiv
        return self

    def copy(self) -> "FlopLedger":
        return FlopLedger(self.cmul, self.cadd, self.cdiv)

    def total_mul_add(self) -> int:
        return self.cmul + self.cadd

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.cmul, self.cadd, self.cdiv)

    def __eq__(self, other) -> bool:
        return isinstance(other, FlopLedger) and self.as_tuple() == other.as_tuple()

    def __repr__(self) -> str:
        return f"FlopLedger(cmul={self.cmul}, cadd={self.cadd}, cdiv={self.cdiv})"


@dataclass
class HermPacked:
    """Upper triangle of a Hermitian matrix, packed column by column.

    Entry ``(i, j)`` with ``i <= j`` lives at flat index ``j*(j+1)//2 + i``.
    Diagonal entries must be real to within 1e-12 absolute.
    """

    dim: int
    upper: np.ndarray

    def __post_init__(self):
        n = self.dim * (self.dim + 1) // 2
        if self.upper.shape != (n,):
            raise ContractViolationError(
                f"packed storage for dim {self.dim} needs {n} entries, "
                f"got {self.upper.shape}"
            )
        d = self.upper[_packed_diag_indices(self.dim)]
        if np.abs(d.imag).max(initial=0.0) > 1e-12:
            raise ContractViolationError("packed diagonal is not real")

    @classmethod
    def pack(cls, a: np.ndarray) -> "HermPacked":
        a = as_cmat(a, "matrix")
        m = a.shape[0]
        if a.shape[1] != m:
            raise ContractViolationError("can only pack a square matrix")
        rows, cols = _triu_indices(m)
        upper = np.empty(m * (m + 1) // 2, dtype=np.complex128)
        upper[cols * (cols + 1) // 2 + rows] = a[rows, cols]
        return cls(m, upper)

    def unpack(self, m: int | None = None) -> np.ndarray:
        """Materialize the leading ``m`` x ``m`` Hermitian block."""
        m = self.dim if m is None else m
        out = np.zeros((m, m), dtype=np.complex128)
        rows, cols = _triu_indices(m)
        vals = self.upper[cols * (cols + 1) // 2 + rows]
        out[rows, cols] = vals
        strict = rows < cols
        out[cols[strict], rows[strict]] = np.conj(vals[strict])
        return out

    def diagonal(self, m: int | None = None) -> np.ndarray:
        m = self.dim if m is None else m
        return self.upper[_packed_diag_indices(m)].real


def packed_index(i: int, j: int) -> int:
    """Flat index of entry (i, j), i <= j, in packed upper storage."""
    return j * (j + 1) // 2 + i


@lru_cache(maxsize=None)
def _triu_indices(k: int):
    rows, cols = np.triu_indices(k)
    return rows, cols


@lru_cache(maxsize=None)
def _triu_strict_indices(k: int):
    rows, cols = np.triu_indices(k, k=1)
    return rows, cols


@lru_cache(maxsize=None)
def _packed_diag_indices(k: int):
    j = np.arange(k)
    return j * (j + 1) // 2 + j


@lru_cache(maxsize=None)
def _packed_triu_flat(k: int):
    rows, cols = _triu_indices(k)
    return cols * (cols + 1) // 2 + rows


@lru_cache(maxsize=None)
def _arange(k: int):
    return np.arange(k)


# ---------------------------------------------------------------------------
# validation helpers


def as_cmat(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ContractViolationError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractViolationError(f"{name} contains NaN or Inf")
    return a


def as_cvec(v, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ContractViolationError(f"{name} must be 1-D and non-empty, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ContractViolationError(f"{name} contains NaN or Inf")
    return v


def real_pivot(x, context: str) -> float:
    """Assert a scalar pivot is (numerically) real and return its real part."""
    x = complex(x)
    if abs(x.imag) > PIVOT_IMAG_RTOL * max(abs(x.real), 1e-300):
        raise ContractViolationError(
            f"{context}: pivot {x} has a non-negligible imaginary part"
        )
    if not np.isfinite(x.real):
        raise ContractViolationError(f"{context}: pivot is not finite")
    return x.real


def _check_pivot(delta: float, scale: float, context: str) -> None:
    if abs(delta) < SINGULAR_RTOL * max(abs(scale), 1e-300):
        raise SingularMatrixError(f"singular pivot in {context}: |{delta:g}|")


# ---------------------------------------------------------------------------
# charged primitives


def vdot_c(a: np.ndarray, b: np.ndarray, led: FlopLedger) -> complex:
    """Conjugated dot product a^H b; charges k cmul and k-1 cadd."""
    k = a.shape[0]
    led.tick(cmul=k, cadd=k - 1)
    return complex(np.vdot(a, b))


def matvec(a: np.ndarray, v: np.ndarray, led: FlopLedger) -> np.ndarray:
    """Plain A @ v; charges rows*cols cmul and rows*(cols-1) cadd."""
    rows, cols = a.shape
    led.tick(cmul=rows * cols, cadd=rows * (cols - 1))
    return a @ v


def conj_matvec(a: np.ndarray, v: np.ndarray, led: FlopLedger) -> np.ndarray:
    """A^H @ v; same charge as matvec on the transposed shape."""
    rows, cols = a.shape
    led.tick(cmul=rows * cols, cadd=cols * (rows - 1))
    return a.conj().T @ v


def rank1_update_herm(
    a: np.ndarray,
    u: np.ndarray,
    w: np.ndarray,
    led: FlopLedger,
    subtract: bool = False,
) -> None:
    """In place ``a +/-= u w^H`` for a Hermitian result.

    Only the upper triangle is computed (k*(k+1)/2 products); the strict
    lower triangle is mirrored by conjugation, which is free.  As in the
    reference Hermitian rank-one BLAS routines, the diagonal's imaginary
    parts are set to zero: callers only use this with ``u`` a real multiple
    of ``w``, where any diagonal imaginary part is rounding noise.
    """
    k = u.shape[0]
    rows, cols = _triu_indices(k)
    prods = u[rows] * np.conj(w)[cols]
    led.tick(cmul=k * (k + 1) // 2, cadd=k * (k + 1) // 2)
    if subtract:
        a[rows, cols] -= prods
    else:
        a[rows, cols] += prods
    srows, scols = _triu_strict_indices(k)
    a[scols, srows] = np.conj(a[srows, scols])
    d = _arange(k)
    a[d, d] = a[d, d].real


def rank1_update_full(
    a: np.ndarray,
    u: np.ndarray,
    w: np.ndarray,
    led: FlopLedger,
    subtract: bool = False,
) -> None:
    """In place ``a +/-= u w^H`` without exploiting symmetry (k**2 products).

    Hermitian-result semantics as in :func:`rank1_update_herm`: the diagonal
    is forced real.
    """
    k = u.shape[0]
    led.tick(cmul=k * k, cadd=k * k)
    if subtract:
        a -= np.outer(u, np.conj(w))
    else:
        a += np.outer(u, np.conj(w))
    d = _arange(k)
    a[d, d] = a[d, d].real


# ---------------------------------------------------------------------------
# public kernel operations


def herm_rank1_update(
    a: np.ndarray,
    v: np.ndarray,
    alpha: float,
    triangle_only: bool,
    ledger: FlopLedger,
) -> np.ndarray:
    """Return ``a + alpha * v v^H`` for Hermitian ``a`` and real ``alpha``."""
    a = as_cmat(a, "a")
    v = as_cvec(v, "v")
    m = a.shape[0]
    if a.shape[1] != m or v.shape[0] != m:
        raise ContractViolationError(
            f"dimension mismatch: a is {a.shape}, v has length {v.shape[0]}"
        )
    alpha = real_pivot(alpha, "herm_rank1_update alpha")
    out = a.copy()
    u = alpha * v
    ledger.tick(cmul=m)
    if triangle_only:
        rank1_update_herm(out, u, v, ledger)
    else:
        rank1_update_full(out, u, v, ledger)
    return out


def _block_step_i(q_prev, r_bar, gamma, led, step=None):
    """Partitioned-inverse growth step, three-division form.

    Division accounting is deliberate: one for the Schur denominator, one
    for 1/gamma and one more for 1/gamma**2.
    """
    k = r_bar.shape[0]
    label = f"block_inv_step_i (recursion index {step})" if step else "block_inv_step_i"
    g = matvec(q_prev, r_bar, led)
    t = vdot_c(r_bar, g, led)
    delta = real_pivot(gamma - t, label)
    led.tick(cadd=1)
    _check_pivot(delta, gamma, label)
    beta = 1.0 / delta
    led.tick(cdiv=1)
    u = beta * g
    led.tick(cmul=k)
    q_bar = q_prev.copy()
    rank1_update_herm(q_bar, u, g, led)
    g2 = matvec(q_bar, r_bar, led)
    gamma_inv = 1.0 / gamma
    led.tick(cdiv=1)
    q_col = (-gamma_inv) * g2
    led.tick(cmul=k)
    gamma_inv2 = gamma_inv / gamma
    led.tick(cdiv=1)
    t2 = vdot_c(r_bar, g2, led)
    omega = real_pivot(gamma_inv + gamma_inv2 * t2, label)
    led.tick(cmul=1, cadd=1)
    return q_bar, q_col, omega


def _block_step_v(q_prev, r_bar, gamma, led, step=None):
    """Partitioned-inverse growth step, single-division form."""
    label = f"block_inv_step_v (recursion index {step})" if step else "block_inv_step_v"
    k = r_bar.shape[0]
    q_tilde = matvec(q_prev, r_bar, led)
    t = vdot_c(r_bar, q_tilde, led)
    delta = real_pivot(gamma - t, label)
    led.tick(cadd=1)
    _check_pivot(delta, gamma, label)
    omega = 1.0 / delta
    led.tick(cdiv=1)
    q_col = (-omega) * q_tilde
    led.tick(cmul=k)
    q_bar = q_prev.copy()
    rank1_update_herm(q_bar, q_tilde, q_col, led, subtract=True)
    return q_bar, q_col, omega, q_tilde


def _validate_block_args(q_prev, r_bar, gamma, name):
    q_prev = as_cmat(q_prev, "q_prev")
    r_bar = as_cvec(r_bar, "r_bar")
    k = q_prev.shape[0]
    if q_prev.shape[1] != k or r_bar.shape[0] != k:
        raise ContractViolationError(
            f"{name}: q_prev is {q_prev.shape} but r_bar has length {r_bar.shape[0]}"
        )
    gamma = real_pivot(gamma, f"{name} gamma")
    return q_prev, r_bar, gamma


def block_inv_step_i(q_prev, r_bar, gamma, ledger: FlopLedger, step: int | None = None):
    """Grow a partitioned inverse by one row/column (two extra divisions).

    Given Q = R^-1 for the leading block and the new border (r_bar, gamma)
    of the grown Hermitian matrix, returns (q_bar_block, q_bar_col, omega)
    such that assembling [[q_bar_block, q_bar_col], [q_bar_col^H, omega]]
    inverts the grown matrix.
    """
    q_prev, r_bar, gamma = _validate_block_args(q_prev, r_bar, gamma, "block_inv_step_i")
    return _block_step_i(q_prev, r_bar, gamma, ledger, step=step)


def block_inv_step_v(q_prev, r_bar, gamma, ledger: FlopLedger, step: int | None = None):
    """Grow a partitioned inverse by one row/column with a single division.

    Mathematically identical to :func:`block_inv_step_i` but reuses the
    intermediate q_tilde = Q r_bar, charging exactly one cdiv per call.
    Also returns q_tilde, which callers may reuse.
    """
    q_prev, r_bar, gamma = _validate_block_args(q_prev, r_bar, gamma, "block_inv_step_v")
    return _block_step_v(q_prev, r_bar, gamma, ledger, step=step)


def sm_rank1_inverse_update(
    q: np.ndarray,
    h: np.ndarray,
    ledger: FlopLedger,
    triangle_only: bool = True,
) -> np.ndarray:
    """Return ``(Q^-1 + h h^H)^-1`` from Q via a rank-one correction."""
    q = as_cmat(q, "q")
    h = as_cvec(h, "h")
    m = q.shape[0]
    if q.shape[1] != m or h.shape[0] != m:
        raise ContractViolationError(
            f"sm_rank1_inverse_update: q is {q.shape}, h has length {h.shape[0]}"
        )
    out = q.copy()
    _sm_update_inplace(out, h, ledger, triangle_only)
    return out


def _sm_update_inplace(q, h, led, triangle_only=True):
    m = q.shape[0]
    u = matvec(q, h, led)
    t = vdot_c(h, u, led)
    delta = real_pivot(1.0 + t, "sm_rank1_inverse_update")
    led.tick(cadd=1)
    _check_pivot(delta, max(1.0, abs(t)), "sm_rank1_inverse_update")
    beta = 1.0 / delta
    led.tick(cdiv=1)
    v = beta * u
    led.tick(cmul=m)
    if triangle_only:
        rank1_update_herm(q, v, u, led, subtract=True)
    else:
        rank1_update_full(q, v, u, led, subtract=True)


def deflate_q(q_m: np.ndarray, ledger: FlopLedger) -> np.ndarray:
    """Shrink an inverse after dropping the last row/column of its matrix.

    Uses only entries of ``q_m`` itself: the block, last column and last
    diagonal entry.
    """
    q_m = as_cmat(q_m, "q_m")
    m = q_m.shape[0]
    if q_m.shape[1] != m or m < 2:
        raise ContractViolationError(f"deflate_q needs a square matrix of dim >= 2, got {q_m.shape}")
    omega = real_pivot(q_m[m - 1, m - 1], "deflate_q omega")
    if omega <= SINGULAR_RTOL:
        raise SingularMatrixError(f"deflate_q: omega={omega:g} is not positive")
    out = q_m[: m - 1, : m - 1].copy()
    q_bar = q_m[: m - 1, m - 1]
    om_inv = 1.0 / omega
    ledger.tick(cdiv=1)
    v = om_inv * q_bar
    ledger.tick(cmul=m - 1)
    rank1_update_herm(out, v, q_bar, ledger, subtract=True)
    return out


def deflate_q_sm(
    q_m: np.ndarray,
    r_bar: np.ndarray,
    gamma,
    ledger: FlopLedger,
    triangle_only: bool = True,
) -> np.ndarray:
    """Shrink an inverse using the border of the original matrix.

    Same output as :func:`deflate_q` but computed from (r_bar, gamma), which
    costs one extra matrix-vector product.
    """
    q_m = as_cmat(q_m, "q_m")
    r_bar = as_cvec(r_bar, "r_bar")
    m = q_m.shape[0]
    if q_m.shape[1] != m or m < 2 or r_bar.shape[0] != m - 1:
        raise ContractViolationError(
            f"deflate_q_sm: q_m is {q_m.shape}, r_bar has length {r_bar.shape[0]}"
        )
    gamma = real_pivot(gamma, "deflate_q_sm gamma")
    out = q_m[: m - 1, : m - 1].copy()
    _deflate_sm_inplace(out, r_bar, gamma, ledger, triangle_only)
    return out


def _deflate_sm_inplace(q_block, r_bar, gamma, led, triangle_only=True):
    k = r_bar.shape[0]
    u = matvec(q_block, r_bar, led)
    t = vdot_c(r_bar, u, led)
    delta = real_pivot(gamma + t, "deflate_q_sm")
    led.tick(cadd=1)
    _check_pivot(delta, gamma, "deflate_q_sm")
    beta = 1.0 / delta
    led.tick(cdiv=1)
    v = beta * u
    led.tick(cmul=k)
    if triangle_only:
        rank1_update_herm(q_block, v, u, led, subtract=True)
    else:
        rank1_update_full(q_block, v, u, led, subtract=True)


# ---------------------------------------------------------------------------
# initializer chains shared by the detectors


def init_gram(h: np.ndarray, alpha: float, ledger: FlopLedger) -> np.ndarray:
    """Accumulate ``H^H H + alpha I`` one receive row at a time.

    Each row contributes a Hermitian outer product, computed on the upper
    triangle only (M*(M+1)/2 products per row).
    """
    h = as_cmat(h, "h")
    n, m = h.shape
    alpha = real_pivot(alpha, "init_gram alpha")
    r = np.zeros((m, m), dtype=np.complex128)
    np.fill_diagonal(r, alpha)
    for row in range(n):
        v = np.conj(h[row])
        rank1_update_herm(r, v, v, ledger)
    return r


def init_q_sherman_morrison(
    h: np.ndarray,
    alpha: float,
    ledger: FlopLedger,
    triangle_only: bool = True,
) -> np.ndarray:
    """Build ``(H^H H + alpha I)^-1`` by rank-one corrections over rows."""
    h = as_cmat(h, "h")
    n, m = h.shape
    alpha = real_pivot(alpha, "init_q_sherman_morrison alpha")
    if alpha <= 0:
        raise ContractViolationError("init_q_sherman_morrison needs alpha > 0")
    q = np.zeros((m, m), dtype=np.complex128)
    np.fill_diagonal(q, 1.0 / alpha)
    ledger.tick(cdiv=1)
    for row in range(n):
        _sm_update_inplace(q, np.conj(h[row]), ledger, triangle_only)
    return q


def init_q_recursive(r: np.ndarray, ledger: FlopLedger, variant: str = "v") -> np.ndarray:
    """Invert a Hermitian positive-definite matrix by growing its inverse.

    ``variant`` selects the border step: "i" is the three-division form,
    "v" the single-division form.  Both produce the full inverse of ``r``.
    """
    r = as_cmat(r, "r")
    m = r.shape[0]
    if r.shape[1] != m:
        raise ContractViolationError("init_q_recursive needs a square matrix")
    if variant not in ("i", "v"):
        raise ContractViolationError(f"unknown variant {variant!r}")
    step_fn = _block_step_i if variant == "i" else _block_step_v
    q = np.zeros((m, m), dtype=np.complex128)
    g0 = real_pivot(r[0, 0], "init_q_recursive leading entry")
    _check_pivot(g0, g0 if g0 else 1.0, "init_q_recursive leading entry")
    q[0, 0] = 1.0 / g0
    ledger.tick(cdiv=1)
    for i in range(1, m):
        out = step_fn(q[:i, :i], r[:i, i], real_pivot(r[i, i], "init_q_recursive"),
                      ledger, step=i + 1)
        q_bar, q_col, omega = out[0], out[1], out[2]
        q[:i, :i] = q_bar
        q[:i, i] = q_col
        q[i, :i] = np.conj(q_col)
        q[i, i] = omega
    return q


# ---------------------------------------------------------------------------
# independent oracle


def gauss_jordan_inverse(a: np.ndarray) -> np.ndarray:
    """Invert a square complex matrix by Gauss-Jordan with partial pivoting.

    Test oracle: unoptimized on purpose and never charged to a ledger.
    """
    a = as_cmat(a, "a")
    n = a.shape[0]
    if a.shape[1] != n:
        raise ContractViolationError(f"cannot invert non-square matrix {a.shape}")
    scale = np.abs(a).max()
    if scale == 0.0:
        raise SingularMatrixError("gauss_jordan_inverse: zero matrix")
    aug = np.hstack([a.astype(np.complex128), np.eye(n, dtype=np.complex128)])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        if np.abs(aug[piv, col]) < SINGULAR_RTOL * scale:
            raise SingularMatrixError(f"gauss_jordan_inverse: pivot {piv} below tolerance")
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] /= aug[col, col]
        factors = aug[:, col].copy()
        factors[col] = 0.0
        aug -= np.outer(factors, aug[col])
    return aug[:, n:]
