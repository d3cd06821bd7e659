"""Compile OSL formulas into gate arrays via power-of-2 padding.

The padding operator rebuilds a formula so that every subformula order is
a power of 2 while the value survives in a leading block:

    value(padded) = [value(original); 0]

Atoms pad directly: a square matrix grows into blockdiag(A, I), a column
gets trailing zeros.  A tensor node of padded children holds the true
rows of A (x) B scattered through the Kronecker grid, so it is wrapped in
permutation formulas Q and Q' that pull the true rows and columns into
the leading block.  Q is assembled from stride permutations that are
themselves built inductively from I_2 and the 4x4 stride atom, plus one
explicit "made to purpose" permutation atom per fix; everything stays a
formula, not a bare matrix.  Product nodes whose padded inner orders
disagree are fixed by tensoring the smaller side with I_2 factors (left)
or e_2^1 factors (right); the mismatch ratio is always a power of 2.

The padded tree keeps a stronger invariant than the headline equation:
every subformula value is exactly block diagonal, [[val, 0], [0, junk]].
The top-right zero block is what makes the product and tensor cases
compose, so the recursion maintains it deliberately.

Two consumers sit on top.  formula_to_array reads the padded tree as a
gate array: square atoms become gates, column atoms become input
amplitude blocks, products compose sequentially, tensors in parallel.
pad_formula_with_denominators additionally rewrites column atoms whose
entries have non-power-of-2 denominators, appending integer square terms
that restore the unit norm at denominator pi(d); the decision value of
the instance then scales by exactly Delta^2, the squared product of the
per-atom denominator ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import zip_longest

from .circuit import Gate, GateArray, StateVector
from .errors import ValidationError
from .formula import (
    Atom,
    Formula,
    Prod,
    Tensor,
    balanced_prod,
    balanced_tensor,
    check_osl,
)
from .linalg import (
    Matrix,
    basis_vector,
    block_diag,
    conj_transpose,
    identity,
    is_unit_column,
    stride_permutation,
)
from .semiring import Scalar, Tag, make_scalar, scalar_mul, scalar_one, scalar_zero

__all__ = [
    "DenominatorPad",
    "PaddedFormula",
    "formula_to_array",
    "kron_fix_permutations",
    "pad_atom",
    "pad_formula",
    "pad_formula_with_denominators",
    "pad_unit_vector_denominator",
    "pow2_ceil",
    "transpose_formula",
]


def pow2_ceil(n: int) -> int:
    """Least power of 2 that is >= n."""
    if n < 1:
        raise ValidationError(f"pow2_ceil needs a positive integer, got {n}")
    return 1 << (n - 1).bit_length()


def _log2(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"{n} is not a power of 2")
    return n.bit_length() - 1


def pad_atom(a: Matrix) -> Matrix:
    """Pad to power-of-2 rows: blockdiag(A, I) for square A, trailing
    zeros for a column.  Other shapes have no padding."""
    target = pow2_ceil(a.rows)
    if a.rows == a.cols:
        if target == a.rows:
            return a
        return block_diag(a, identity(target - a.rows, a.tag))
    if a.cols == 1:
        if target == a.rows:
            return a
        zero = scalar_zero(a.tag)
        return Matrix.from_entries(
            a.tag, target, 1, list(a.entries) + [zero] * (target - a.rows)
        )
    raise ValidationError(
        f"padding is defined for square or column matrices, not {a.rows}x{a.cols}"
    )


def transpose_formula(f: Formula) -> Formula:
    """Formula-level conjugate transpose: reverse products, transpose
    atoms, recurse through tensors."""
    if isinstance(f, Atom):
        return Atom(conj_transpose(f.matrix))
    if isinstance(f, Prod):
        return Prod(transpose_formula(f.right), transpose_formula(f.left))
    if isinstance(f, Tensor):
        return Tensor(transpose_formula(f.left), transpose_formula(f.right))
    return type(f)(transpose_formula(f.left), transpose_formula(f.right))


# ---------------------------------------------------------------------------
# Stride-permutation formulas and the Kronecker row/column fixes


def _identity_pow2_formula(l: int, tag: Tag) -> Formula:
    if l == 0:
        return Atom(identity(1, tag))
    return balanced_tensor([Atom(identity(2, tag))] * l)


def _stride_pow2_formula(l: int, tag: Tag) -> Formula:
    """Formula for the stride permutation that deals 2^l entries into two
    piles (evens first).  Induction from I_2 and the 4x4 stride atom."""
    if l == 0:
        return Atom(identity(1, tag))
    if l == 1:
        return Atom(identity(2, tag))
    if l == 2:
        return Atom(stride_permutation(2, 2, tag))
    return Prod(
        Tensor(_stride_pow2_formula(l - 1, tag), Atom(identity(2, tag))),
        Tensor(_identity_pow2_formula(l - 2, tag), _stride_pow2_formula(2, tag)),
    )


def _row_fix(m_true: int, mu: int, n_true: int, nu: int, tag: Tag):
    """Permutation formula moving every true row of a padded Kronecker
    product into the leading block, or None when they already lead.

    Rows of the mu*nu grid are pairs (i, j); true rows are i < m_true and
    j < n_true and must land at i*n_true + j.  When nu == n_true or
    mu == 1 the true rows are already the leading block.
    """
    if mu == 1 or nu == n_true:
        return None
    k = _log2(nu)
    j = _log2(mu)
    # First the full stride: row (i, j) moves to (j, i), grouping by j.
    p_formula = balanced_prod([_stride_pow2_formula(j + k, tag)] * k)
    # Then the block fix: inside the first n_true groups, deal the m_true
    # true rows forward.  tau > 0 here, so U gets an explicit atom.
    tau = nu - n_true
    u = Atom(
        block_diag(stride_permutation(n_true, 2, tag), identity(2 * tau, tag))
    )
    s = Prod(
        Tensor(u, _identity_pow2_formula(j - 1, tag)),
        Tensor(_identity_pow2_formula(k, tag), _stride_pow2_formula(j, tag)),
    )
    r_formula = balanced_prod([s] * j)
    return Prod(r_formula, p_formula)


def kron_fix_permutations(
    m: int, n: int, mu: int, nu: int, tag: Tag, shape: str = "square"
):
    """The (Q, Q') correction formulas for a padded Kronecker node.

    For m x m and n x n inputs A and B (shape "square"),
    Q . (pad(A) (x) pad(B)) . Q' is block diagonal with A (x) B leading.
    For columns (shape "column") there is nothing to fix on the right, so
    Q' is the 1x1 identity.
    """
    if shape not in ("square", "column"):
        raise ValidationError(f"unknown shape {shape!r}")
    if mu != pow2_ceil(m) or nu != pow2_ceil(n):
        raise ValidationError(
            f"padded orders must be pow2_ceil of the true orders; "
            f"got {m}->{mu}, {n}->{nu}"
        )
    fix = _row_fix(m, mu, n, nu, tag)
    q = fix if fix is not None else _identity_pow2_formula(_log2(mu * nu), tag)
    if shape == "column":
        return q, Atom(identity(1, tag))
    return q, transpose_formula(q)


# ---------------------------------------------------------------------------
# The padding recursion


@dataclass(frozen=True)
class PaddedFormula:
    original: Formula
    padded: Formula
    block_length: int


def _default_column_pad(m: Matrix):
    return pad_atom(m), m.rows


def _pad(f: Formula, column_pad):
    """Recursive padding; returns (padded, true_rows, true_cols).

    Only the structure and the atoms of f are consulted, never its cached
    orders, so trees whose orders were knocked out by an earlier atom
    rewrite (denominator padding) pass through fine.
    """
    tag = f.tag
    if isinstance(f, Atom):
        m = f.matrix
        if m.cols == 1 and m.rows > 1:
            padded_matrix, true_rows = column_pad(m)
            return Atom(padded_matrix), true_rows, 1
        return Atom(pad_atom(m)), m.rows, m.cols

    if isinstance(f, Tensor):
        ph, rh, ch = _pad(f.left, column_pad)
        pk, rk, ck = _pad(f.right, column_pad)
        padded = Tensor(ph, pk)
        row_fix = _row_fix(rh, ph.order[0], rk, pk.order[0], tag)
        if row_fix is not None:
            padded = Prod(row_fix, padded)
        col_fix = _row_fix(ch, ph.order[1], ck, pk.order[1], tag)
        if col_fix is not None:
            padded = Prod(padded, transpose_formula(col_fix))
        return padded, rh * rk, ch * ck

    if isinstance(f, Prod):
        ph, rh, ch = _pad(f.left, column_pad)
        pk, rk, ck = _pad(f.right, column_pad)
        inner_left = ph.order[1]
        inner_right = pk.order[0]
        if inner_left == inner_right:
            return Prod(ph, pk), rh, ck
        if inner_left < inner_right:
            i = _log2(inner_right // inner_left)
            wide = Tensor(_identity_pow2_formula(i, tag), ph)
            return Prod(wide, pk), rh, ck
        i = _log2(inner_left // inner_right)
        top = balanced_tensor([Atom(basis_vector(2, 1, tag))] * i)
        return Prod(ph, Tensor(top, pk)), rh, ck

    raise ValidationError("padding is defined for sum-free formulas only")


def pad_formula(f: Formula) -> PaddedFormula:
    """Pad an OSL formula so every subformula order is a power of 2; the
    value survives as the leading block of the padded value."""
    report = check_osl(f)
    if not report.is_osl:
        raise ValidationError(
            f"formula is not OSL (offending paths: {list(report.offending_paths)})"
        )
    padded, true_rows, _ = _pad(f, _default_column_pad)
    return PaddedFormula(original=f, padded=padded, block_length=true_rows)


# ---------------------------------------------------------------------------
# Denominator normalization


@dataclass(frozen=True)
class DenominatorPad:
    original: Matrix
    padded: Matrix
    scale: Fraction
    b_terms: tuple


def _three_squares_possible(n: int) -> bool:
    # Legendre: n is a sum of three squares unless n = 4^a * (8b + 7).
    while n % 4 == 0:
        n //= 4
    return n % 8 != 7


def _square_terms(residual: int, max_terms: int):
    """residual as a sum of at most max_terms positive squares, largest
    first with backtracking; None if impossible."""
    if residual == 0:
        return ()
    if max_terms == 0:
        return None
    if max_terms == 1:
        s = math.isqrt(residual)
        return (s,) if s * s == residual else None
    if max_terms == 3 and not _three_squares_possible(residual):
        return None
    for s in range(math.isqrt(residual), 0, -1):
        rest = _square_terms(residual - s * s, max_terms - 1)
        if rest is not None:
            return (s,) + rest
    return None


def pad_unit_vector_denominator(v: Matrix) -> DenominatorPad:
    """Rewrite a rational unit column so its common denominator is a
    power of 2.

    With denominator d and numerators a_i, the entries become a_i/pi(d)
    and integer terms b_1..b_p with pi(d)^2 = sum a_i^2 + sum b_j^2 are
    appended after a zero gap, restoring the unit norm.  The new length
    is the least power of 4 exceeding n + 3*ceil(log2 d).  Vectors whose
    d is already a power of 2 come back unchanged with scale 1.
    """
    if v.tag not in (Tag.NONNEG_RATIONAL, Tag.RATIONAL):
        raise ValidationError(
            f"denominator padding is defined over the rational tags, not {v.tag.value}"
        )
    if v.cols != 1:
        raise ValidationError(f"expected a column, got {v.rows}x{v.cols}")
    if not is_unit_column(v):
        raise ValidationError("vector is not a unit column")
    d = math.lcm(*(e.re.denominator for e in v.entries))
    if d & (d - 1) == 0:
        return DenominatorPad(v, v, Fraction(1), ())
    pi = pow2_ceil(d)
    bound = 3 * math.ceil(math.log2(d))
    terms = _square_terms(pi * pi - d * d, min(4, bound))
    if terms is None or len(terms) > bound:
        raise ValidationError(
            f"no sum-of-squares completion within {bound} terms for d={d}"
        )
    n = v.rows
    length = 1
    while length <= n + bound:
        length <<= 2
    zero = scalar_zero(v.tag)
    entries = [make_scalar(v.tag, Fraction(int(e.re * d), pi)) for e in v.entries]
    entries += [zero] * (length - n - len(terms))
    entries += [make_scalar(v.tag, Fraction(b, pi)) for b in terms]
    padded = Matrix.from_entries(v.tag, length, 1, entries)
    return DenominatorPad(v, padded, Fraction(d, pi), terms)


def pad_formula_with_denominators(f: Formula, k: int):
    """Padded decision instance with power-of-2 denominators.

    Returns (g, k_eff, delta): g is a padded formula whose last k_eff
    entries carry the original accepting window, scaled so that the
    partial trace over them equals delta^2 times the original's.  k is
    clamped to the output length, matching the trace semantics.
    """
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    if f.tag is Tag.GAUSSIAN_RATIONAL:
        raise ValidationError(
            "denominator scaling is defined over the real rational tags"
        )
    report = check_osl(f)
    if not report.is_osl:
        raise ValidationError(
            f"formula is not OSL (offending paths: {list(report.offending_paths)})"
        )

    deltas = []

    def column_pad(m: Matrix):
        if m.tag is Tag.BOOLEAN:
            return _default_column_pad(m)
        pad = pad_unit_vector_denominator(m)
        deltas.append(pad.scale)
        return pad_atom(pad.padded), m.rows

    padded, true_rows, _ = _pad(f, column_pad)
    n_out = true_rows
    total = padded.order[0]
    k_eff = min(k, n_out)
    delta = math.prod(deltas, start=Fraction(1))
    if n_out == total:
        return padded, k_eff, delta
    # Route the accepting window (the k_eff entries ending the true
    # block) to the very end, everything else forward in order.
    perm = [0] * total
    tail = range(n_out - k_eff, n_out)
    front = [i for i in range(total) if not n_out - k_eff <= i < n_out]
    for pos, i in enumerate(front):
        perm[i] = pos
    for off, i in enumerate(tail):
        perm[i] = total - k_eff + off
    mover = Atom(Matrix.from_perm(f.tag, perm))
    return Prod(mover, padded), k_eff, delta


# ---------------------------------------------------------------------------
# Padded formula -> gate array


@dataclass(frozen=True)
class _Rep:
    """Array-shaped reading of a padded subformula.

    wires counts the output wires (value has 2^wires rows); open lists,
    in column-bit order, the wires still accepting input; blocks carry
    amplitude vectors for closed wires; levels is the gate schedule; the
    value equals phase times the array semantics.  1x1 subformulas only
    contribute phase.
    """

    wires: int
    open: tuple
    blocks: tuple
    levels: tuple
    phase: Scalar


def _shift_rep(rep: _Rep, mapping) -> _Rep:
    blocks = tuple(
        (tuple(mapping[w] for w in ws), vec) for ws, vec in rep.blocks
    )
    levels = tuple(
        tuple(Gate(tuple(mapping[w] for w in g.wires), g.matrix) for g in level)
        for level in rep.levels
    )
    return _Rep(
        rep.wires,
        tuple(mapping[w] for w in rep.open),
        blocks,
        levels,
        rep.phase,
    )


def _rep(f: Formula, tag: Tag) -> _Rep:
    one = scalar_one(tag)
    if isinstance(f, Atom):
        m = f.matrix
        if m.rows == 1 and m.cols == 1:
            return _Rep(0, (), (), (), m.at(0, 0))
        w = _log2(m.rows)
        wires = tuple(range(1, w + 1))
        if m.cols == 1:
            return _Rep(w, (), ((wires, tuple(m.entries)),), (), one)
        return _Rep(w, wires, (), ((Gate(wires, m),),), one)

    h = _rep(f.left, tag)
    k = _rep(f.right, tag)
    phase = scalar_mul(h.phase, k.phase)

    if isinstance(f, Tensor):
        mapping = {w: w + h.wires for w in range(1, k.wires + 1)}
        ks = _shift_rep(k, mapping)
        levels = tuple(
            tuple(a) + tuple(b)
            for a, b in zip_longest(h.levels, ks.levels, fillvalue=())
        )
        return _Rep(
            h.wires + k.wires,
            h.open + ks.open,
            h.blocks + ks.blocks,
            levels,
            phase,
        )

    # Product: the right factor runs first, on the left factor's open
    # wires (its output bits feed the left factor's column bits).
    mapping = {i: h.open[i - 1] for i in range(1, k.wires + 1)}
    ks = _shift_rep(k, mapping)
    return _Rep(
        h.wires,
        ks.open,
        h.blocks + ks.blocks,
        ks.levels + h.levels,
        phase,
    )


def formula_to_array(f: Formula):
    """Compile an OSL formula to (GateArray, StateVector).

    simulate(array, state) equals evaluate(pad_formula(f).padded): the
    value in the leading block_length entries, junk after.
    """
    padded = pad_formula(f).padded
    rep = _rep(padded, f.tag)
    if rep.wires == 0:
        raise ValidationError(
            "formula value is a single scalar; there is no wire to build an array on"
        )
    size = 1 << rep.wires
    entries = []
    for g in range(size):
        amp = rep.phase
        for ws, vec in rep.blocks:
            local = 0
            for t, wire in enumerate(ws):
                local |= ((g >> (rep.wires - wire)) & 1) << (len(ws) - 1 - t)
            amp = scalar_mul(amp, vec[local])
        entries.append(amp)
    array = GateArray(f.tag, rep.wires, rep.levels)
    state = StateVector(rep.wires, Matrix.from_entries(f.tag, size, 1, entries))
    return array, state
