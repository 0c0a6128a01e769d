"""Sum-of-squares certificates: commutative Gram feasibility and the CHSH
level-1 noncommutative decomposition."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb

import numpy as np
import scipy.linalg

from .modeling import MatExpr, Model, ScalarExpr


def monomials(n_vars: int, degree: int):
    """Exponent tuples of all degree-``degree`` monomials in n_vars variables."""
    out = []
    for combo in combinations_with_replacement(range(n_vars), degree):
        e = [0] * n_vars
        for v in combo:
            e[v] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def _pairing_matrix(basis, n_vars: int, degree2: int):
    """Linear map from symmetric-matrix cells to degree-2m coefficients."""
    prods = monomials(n_vars, degree2)
    prod_index = {m: i for i, m in enumerate(prods)}
    d = len(basis)
    cells = [(i, j) for i in range(d) for j in range(i, d)]
    p = np.zeros((len(prods), len(cells)))
    for c, (i, j) in enumerate(cells):
        m = tuple(a + b for a, b in zip(basis[i], basis[j]))
        p[prod_index[m], c] += 1.0 if i == j else 2.0
    return p, prods, cells


@dataclass
class SosCertificate:
    gram: np.ndarray
    basis: list[tuple]
    squares: list[dict]  # polynomials g_i as {exponents: coeff}
    residual: float


@dataclass
class SosResult:
    feasible: bool
    margin: float  # optimal smallest eigenvalue of the Gram matrix
    certificate: SosCertificate | None
    dual_witness: np.ndarray | None
    model_result: object


def _poly_from_gram(gram: np.ndarray, basis) -> dict:
    out: dict[tuple, float] = {}
    d = len(basis)
    for i in range(d):
        for j in range(d):
            m = tuple(a + b for a, b in zip(basis[i], basis[j]))
            out[m] = out.get(m, 0.0) + gram[i, j]
    return {m: c for m, c in out.items() if abs(c) > 0}


def sos_certificate(h: dict, n_vars: int, cfg=None) -> SosResult:
    """Decide whether a homogeneous polynomial is a sum of squares.

    ``h`` maps exponent tuples (length n_vars, all of one even degree 2m) to
    coefficients.  Builds one particular Gram representative H, a basis of the
    null pairing space, and maximizes the smallest eigenvalue of H + sum y_i N_i;
    a nonnegative optimum yields the certificate with extracted squares.
    """
    degrees = {sum(e) for e in h}
    if len(degrees) != 1:
        raise ValueError("polynomial must be homogeneous")
    (deg,) = degrees
    if deg % 2 or deg == 0:
        raise ValueError("degree must be a positive even number")
    if any(len(e) != n_vars for e in h):
        raise ValueError("exponent tuples must have length n_vars")
    m = deg // 2
    basis = monomials(n_vars, m)
    d = len(basis)
    assert d == comb(n_vars + m - 1, m)

    p, prods, cells = _pairing_matrix(basis, n_vars, deg)
    target = np.zeros(len(prods))
    for e, c in h.items():
        target[prods.index(e)] = float(c)
    cell_vec, *_ = np.linalg.lstsq(p, target, rcond=None)
    if np.linalg.norm(p @ cell_vec - target) > 1e-9 * max(1.0, np.linalg.norm(target)):
        raise ValueError("polynomial cannot be represented over the monomial basis")
    h_mat = np.zeros((d, d))
    for c, (i, j) in enumerate(cells):
        h_mat[i, j] = h_mat[j, i] = cell_vec[c]

    kernel = scipy.linalg.null_space(p)
    n_null = kernel.shape[1]
    null_mats = []
    for k in range(n_null):
        nm = np.zeros((d, d))
        for c, (i, j) in enumerate(cells):
            nm[i, j] = nm[j, i] = kernel[c, k]
        null_mats.append(nm)

    model = Model()
    t = model.declare(1, structure="symmetric", name="t")
    gram_expr = MatExpr((d, d), h_mat, {t.decl.offset: -np.eye(d)})
    if n_null:
        y = model.declare(n_null, 1, structure="full", name="y")
        for k, nm in enumerate(null_mats):
            gram_expr = gram_expr + MatExpr((d, d), terms={y.decl.offset + k: nm})
    model.add_lmi(gram_expr)
    model.maximize(t.entry(0, 0))
    res = model.compile(framing="dual", equality_mode="eliminate").solve(cfg)

    margin = res.value
    params = np.zeros(model.nparams)
    params[t.decl.offset] = 0.0  # evaluate the Gram matrix itself, without the slack
    if n_null:
        yv = res.values["y"][:, 0]
        params[model.vars[1].offset : model.vars[1].offset + n_null] = yv
    gram = gram_expr.value(params).real

    if not (res.success and margin >= -1e-7):
        witness = res.solution.x_primal.blocks[0].copy()
        return SosResult(False, margin, None, witness, res)

    w, v = np.linalg.eigh(gram)
    squares = []
    for lam, vec_ in zip(w, v.T):
        if lam > 1e-10:
            g = np.sqrt(lam) * vec_
            squares.append({basis[i]: g[i] for i in range(d) if abs(g[i]) > 1e-12})
    recon = _poly_from_gram(gram, basis)
    residual = 0.0
    for e in set(recon) | set(h):
        residual += (recon.get(e, 0.0) - float(h.get(e, 0.0))) ** 2
    cert = SosCertificate(gram=gram, basis=basis, squares=squares, residual=float(np.sqrt(residual)))
    return SosResult(True, margin, cert, None, res)


def motzkin_polynomial() -> tuple[dict, int]:
    """x^4 y^2 + x^2 y^4 - 3 x^2 y^2 z^2 + z^6: nonnegative but not SoS."""
    return {(4, 2, 0): 1.0, (2, 4, 0): 1.0, (2, 2, 2): -3.0, (0, 0, 6): 1.0}, 3


# ---------------------------------------------------------------------------
# CHSH level-1 weighted sum of squares


_CHSH_SIGNS = {(0, 0): 1.0, (0, 1): 1.0, (1, 0): 1.0, (1, 1): -1.0}
_BASIS_LABELS = ("A1", "A2", "B1", "B2")


def _chsh_word(i: int, j: int) -> tuple:
    """Reduced word of basis_i * basis_j under A^2 = B^2 = 1 and [A, B] = 0."""
    if i == j:
        return ()
    a = sorted(x for x in (i, j) if x < 2)
    b = sorted(x for x in (i, j) if x >= 2)
    if len(a) == 2:
        return (_BASIS_LABELS[i], _BASIS_LABELS[j])  # order matters: A1A2 != A2A1
    if len(b) == 2:
        return (_BASIS_LABELS[i], _BASIS_LABELS[j])
    return (_BASIS_LABELS[a[0]], _BASIS_LABELS[b[0]])


def chsh_operator_coefficients() -> dict:
    """Coefficients of the CHSH operator over reduced words."""
    out = {}
    for x in range(2):
        for y in range(2):
            out[(f"A{x+1}", f"B{y+1}")] = _CHSH_SIGNS[(x, y)]
    return out


def gram_polynomial(gram: np.ndarray) -> dict:
    """Expand x^T M x over the dichotomic-operator words."""
    out: dict[tuple, float] = {}
    for i in range(4):
        for j in range(4):
            out[_chsh_word(i, j)] = out.get(_chsh_word(i, j), 0.0) + gram[i, j]
    return out


def tsirelson_sos_chsh(cfg=None):
    """Level-1 weighted-SoS bound for CHSH over the basis (A1, A2, B1, B2).

    Minimizes q subject to q*1 - CHSH = x^T M x + sum_x g_x A_x + sum_y g_y B_y
    with M PSD; word-by-word coefficient matching under the dichotomic-operator
    relations.  Returns the bound together with a decomposition report.
    """
    model = Model()
    mvar = model.declare(4, structure="symmetric", name="M")
    gamma = model.declare(4, 1, structure="full", name="gamma")
    q = model.declare(1, structure="symmetric", name="q")
    model.add_lmi(mvar.expr())

    # index of parameter (i, j) inside the symmetric packing of M
    def midx(i, j):
        i, j = min(i, j), max(i, j)
        return mvar.decl.offset + i * 4 - i * (i - 1) // 2 + (j - i)

    # off-diagonal AB block carries the CHSH coefficients: 2 M[x, 2+y] = -c_xy
    for x in range(2):
        for y in range(2):
            model.add_equality(ScalarExpr({midx(x, 2 + y): 2.0}), -_CHSH_SIGNS[(x, y)])
    # no A1A2 / B1B2 words on the left-hand side
    model.add_equality(ScalarExpr({midx(0, 1): 1.0}), 0.0)
    model.add_equality(ScalarExpr({midx(2, 3): 1.0}), 0.0)
    # no linear words: the scalar weights vanish
    for k in range(4):
        model.add_equality(ScalarExpr({gamma.decl.offset + k: 1.0}), 0.0)
    # constant word: q = Tr M (squares of dichotomic operators are 1)
    model.add_equality(
        ScalarExpr({q.decl.offset: 1.0, midx(0, 0): -1.0, midx(1, 1): -1.0, midx(2, 2): -1.0, midx(3, 3): -1.0}),
        0.0,
    )
    model.minimize(q.entry(0, 0))
    res = model.compile(framing="dual", equality_mode="eliminate").solve(cfg)

    gram = res.values["M"]
    q1 = res.value
    w, v = np.linalg.eigh(gram)
    square_roots = [np.sqrt(max(lam, 0.0)) * vec_ for lam, vec_ in zip(w, v.T) if lam > 1e-9]
    # residual of q1 * 1 - CHSH against the Gram expansion
    target = {(): q1}
    for word, c in chsh_operator_coefficients().items():
        target[word] = target.get(word, 0.0) - c
    expanded = gram_polynomial(gram)
    words = set(target) | set(expanded)
    residual = float(np.sqrt(sum((target.get(wd, 0.0) - expanded.get(wd, 0.0)) ** 2 for wd in words)))
    report = {
        "gram": gram,
        "gamma": res.values["gamma"][:, 0],
        "squares": square_roots,
        "residual": residual,
        "basis": _BASIS_LABELS,
        "result": res,
    }
    return q1, report
