"""Exact linear algebra over the scalar domain.

Thin helpers around sympy's ``DomainMatrix``. Vectors are plain Python
lists of domain elements; matrices are built dense from row lists or
sparse from dict-of-dicts and handed to ``DomainMatrix`` for reduction.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Poly, Symbol
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

logger = logging.getLogger(__name__)

Vector = List

_t = Symbol("t")


def dense(rows: Sequence[Sequence], K, ncols: Optional[int] = None) -> DomainMatrix:
    """Dense matrix from a list of rows."""
    rows = [list(r) for r in rows]
    ncols = ncols if ncols is not None else (len(rows[0]) if rows else 0)
    return DomainMatrix(rows, (len(rows), ncols), K)


def from_columns(columns: Sequence[Sequence], K, nrows: int) -> DomainMatrix:
    """Dense matrix whose columns are the given vectors."""
    rows = [[col[i] for col in columns] for i in range(nrows)]
    return DomainMatrix(rows, (nrows, len(columns)), K)


def sparse(dod: Dict[int, Dict[int, object]], shape: Tuple[int, int], K) -> DomainMatrix:
    """Sparse matrix from a dict of row dicts (zero entries are dropped)."""
    clean = {}
    for i, row in dod.items():
        kept = {j: v for j, v in row.items() if v}
        if kept:
            clean[i] = kept
    return DomainMatrix(clean, shape, K)


def matvec(M: DomainMatrix, vector: Sequence) -> Vector:
    """Product of a sparse matrix with a vector."""
    K = M.domain
    nrows, ncols = M.shape
    column = DomainMatrix({i: {0: v} for i, v in enumerate(vector) if v}, (ncols, 1), K)
    result = [K.zero] * nrows
    for i, row in M.to_sparse().matmul(column).to_dod().items():
        result[i] = row.get(0, K.zero)
    return result


def columns(M: DomainMatrix) -> List[Vector]:
    """Columns of a matrix as vectors."""
    rows = M.to_dense().to_list()
    nrows, ncols = M.shape
    return [[rows[i][j] for i in range(nrows)] for j in range(ncols)]


def column_basis(M: DomainMatrix) -> Tuple[List[Vector], Tuple[int, ...]]:
    """Pivot columns of M: a basis of its column space made of actual columns."""
    _, pivots = M.rref()
    cols = columns(M)
    return [cols[j] for j in pivots], tuple(pivots)


def rank(M: DomainMatrix) -> int:
    return len(M.rref()[1])


def nullspace(M: DomainMatrix) -> List[Vector]:
    """Basis of {x : M x = 0}."""
    if M.shape[1] == 0:
        return []
    basis = M.to_dense().nullspace()
    return [list(row) for row in basis.to_list()] if basis.shape[0] else []


def solve(M: DomainMatrix, rhs: Sequence) -> Optional[Vector]:
    """One solution of M x = rhs, or None when the system is inconsistent."""
    K = M.domain
    nrows, ncols = M.shape
    rows = M.to_dense().to_list()
    augmented = DomainMatrix(
        [list(rows[i]) + [rhs[i]] for i in range(nrows)], (nrows, ncols + 1), K
    )
    reduced, pivots = augmented.rref()
    if ncols in pivots:
        return None
    red = reduced.to_list()
    x = [K.zero] * ncols
    for r, p in enumerate(pivots):
        x[p] = red[r][ncols]
    return x


def inverse(M: DomainMatrix) -> DomainMatrix:
    """Inverse of a square matrix.

    Raises:
        ArithmeticError: If M is singular.
    """
    try:
        return M.to_dense().inv()
    except DMNonInvertibleMatrixError as exc:
        raise ArithmeticError(str(exc)) from exc


def combine(coefficients: Sequence, vectors: Sequence[Sequence], K, length: int) -> Vector:
    """Linear combination sum_i c_i v_i."""
    result = [K.zero] * length
    for c, v in zip(coefficients, vectors):
        if not c:
            continue
        for i, x in enumerate(v):
            if x:
                result[i] += c * x
    return result


def minimal_polynomial(powers, K, max_degree: int) -> Tuple[Poly, List[Vector]]:
    """Minimal polynomial of an algebra element from its successive powers.

    Args:
        powers: Iterator yielding x^0, x^1, ... as coefficient vectors.
        K: Scalar domain.
        max_degree: Degree after which the search gives up.

    Returns:
        The monic minimal polynomial in ``t`` and the powers x^0..x^(d-1).

    Raises:
        ArithmeticError: If no relation appears up to ``max_degree``.
    """
    seen: List[Vector] = []
    for vector in powers:
        seen.append(list(vector))
        length = len(vector)
        relation = nullspace(from_columns(seen, K, length))
        if relation:
            coeffs = relation[0]
            lead = coeffs[-1]
            if not lead:
                raise ArithmeticError("dependent powers without a leading term")
            monic = [c / lead for c in coeffs]
            poly = Poly([K.to_sympy(c) for c in reversed(monic)], _t, domain=K)
            return poly, seen[:-1]
        if len(seen) > max_degree + 1:
            break
    raise ArithmeticError(f"no polynomial relation up to degree {max_degree}")


def linear_roots(poly: Poly) -> Optional[List]:
    """Distinct roots of a polynomial that splits into distinct linear factors.

    Returns:
        Roots as domain elements, or None if some factor is non-linear or
        repeated.
    """
    K = poly.get_domain()
    _, factors = poly.factor_list()
    roots = []
    for factor, multiplicity in factors:
        if factor.degree() != 1 or multiplicity != 1:
            return None
        a, b = factor.all_coeffs()
        roots.append(K.convert(-b) / K.convert(a))
    return roots


def is_irreducible(poly: Poly) -> bool:
    _, factors = poly.factor_list()
    return len(factors) == 1 and factors[0][1] == 1


def lagrange_coefficients(roots: Sequence, index: int, K) -> List:
    """Coefficients (constant term first) of prod_{j != i} (t - r_j)/(r_i - r_j)."""
    poly = Poly(1, _t, domain=K)
    r_i = roots[index]
    for j, r_j in enumerate(roots):
        if j != index:
            poly = poly * Poly([1, K.to_sympy(-r_j)], _t, domain=K)
            poly = poly * K.to_sympy(K.one / (r_i - r_j))
    coeffs = [K.convert(c) for c in reversed(poly.all_coeffs())]
    return coeffs
