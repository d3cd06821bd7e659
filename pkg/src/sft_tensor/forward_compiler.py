"""Compile gate arrays into equivalent sum-free tensor formulas.

One level whose gates sit on consecutive wires is a single tensor chain:
gate matrices interleaved with I_2 factors for untouched wires.  A level
with gates on scattered wires is handled by choosing a wire permutation
that drags every gate's wires into a block starting at wire 1, so that

    level operator = P_inverse . (packed tensor chain) . P

The permutation is realized as a staircase of cycles (j, j+1, ..., k),
selection-sort style, so the i-th cycle never touches wires below i; each
cycle is a ladder of adjacent-swap levels built only from the two-wire
swap matrix and I_2.  The whole array is then the product of its level
formulas, right to left, parenthesized as a balanced tree so the formula
depth stays logarithmic in the level count.

Wire values move as follows in a cycle formula with inverse=False: the
value on wire k jumps up to wire j and the values on wires j..k-1 slide
down one place.  inverse=True undoes that.  Everything here is verified
extensionally against the simulator, so the conventions are pinned by
tests rather than prose.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

from .circuit import Gate, GateArray, validate_array
from .errors import ValidationError
from .formula import Atom, Formula, Prod, Tensor, balanced_prod, balanced_tensor
from .linalg import Matrix, basis_vector, identity, is_unit_column
from .semiring import Tag

__all__ = [
    "LevelPlan",
    "adjacency_normalize",
    "compile_array_to_formula",
    "cycle_formula",
    "input_vector_formula",
    "level_matrix_formula",
]


def _wire_atoms(n: int, tag: Tag) -> list:
    return [Atom(identity(2, tag)) for _ in range(n)]


def identity_formula(n: int, tag: Tag) -> Formula:
    """Tensor power I_2^(x)n as a balanced chain."""
    if n < 1:
        raise ValidationError("identity formula needs at least one wire")
    return balanced_tensor(_wire_atoms(n, tag))


def _swap_level(p: int, n: int, tag: Tag) -> Formula:
    """Adjacent swap of wires p, p+1 embedded in n wires."""
    swap = Atom(Matrix.from_perm(tag, [0, 2, 1, 3]))
    parts = _wire_atoms(p - 1, tag) + [swap] + _wire_atoms(n - p - 1, tag)
    return balanced_tensor(parts)


def cycle_formula(
    j: int, k: int, n: int, tag: Tag = Tag.RATIONAL, inverse: bool = False
) -> Formula:
    """Formula for the wire cycle (j, j+1, ..., k) on n wires.

    inverse=False moves the value on wire k to wire j, sliding j..k-1 down
    by one; inverse=True is the reverse rotation.  Built from adjacent
    swaps only: the ladder S_{j,j+1} ... S_{k-1,k} applied right to left
    (and in the opposite order for the inverse).
    """
    if not 1 <= j < k <= n:
        raise ValidationError(f"need 1 <= j < k <= n, got j={j} k={k} n={n}")
    factors = [_swap_level(p, n, tag) for p in range(j, k)]
    if inverse:
        factors.reverse()
    return balanced_prod(factors)


def _sorted_level(level: Sequence[Gate]) -> list:
    gates = sorted(level, key=lambda g: g.wires[0])
    seen: set = set()
    for g in gates:
        if seen & set(g.wires):
            raise ValidationError("gates in one level share a wire")
        seen |= set(g.wires)
    return gates


def level_matrix_formula(level: Sequence[Gate], n: int, tag: Tag) -> Formula:
    """Tensor chain for a level whose gates all sit on consecutive wires."""
    parts = []
    wire = 1
    for gate in _sorted_level(level):
        lo, hi = gate.wires[0], gate.wires[-1]
        if gate.wires != tuple(range(lo, hi + 1)):
            raise ValidationError(
                f"gate wires {gate.wires} are not consecutive; "
                "normalize the level first"
            )
        if lo < wire or hi > n:
            raise ValidationError(f"gate wires {gate.wires} do not fit in {n}")
        parts.extend(_wire_atoms(lo - wire, tag))
        parts.append(Atom(gate.matrix))
        wire = hi + 1
    parts.extend(_wire_atoms(n - wire + 1, tag))
    return balanced_tensor(parts)


@dataclass(frozen=True)
class LevelPlan:
    """Adjacency plan for one level.

    sigma maps each original wire to its packed position; cycles is the
    staircase realizing sigma (cycle i leaves wires below its start
    untouched).  formula evaluates to the level's full 2^n operator.
    """

    n: int
    tag: Tag
    sigma: tuple
    cycles: tuple
    packed_level: tuple
    packed_formula: Formula
    p_sigma: Formula
    p_sigma_inv: Formula

    @property
    def formula(self) -> Formula:
        if not self.cycles:
            return self.packed_formula
        return Prod(self.p_sigma_inv, Prod(self.packed_formula, self.p_sigma))


def adjacency_normalize(level: Sequence[Gate], n: int, tag: Tag) -> LevelPlan:
    """Left-pack the level's gates and build the correcting permutations.

    Gates are ordered by their lowest wire and assigned consecutive wire
    blocks from wire 1 up; untouched wires fill the remaining positions in
    increasing order.
    """
    gates = _sorted_level(level)
    touched = [w for g in gates for w in g.wires]
    rest = [w for w in range(1, n + 1) if w not in set(touched)]
    target_order = touched + rest
    sigma = [0] * n
    for pos, orig in enumerate(target_order, start=1):
        sigma[orig - 1] = pos

    # Selection sort with down-cycles: put the right value on wire i, then
    # never touch wires 1..i again.
    current = list(range(1, n + 1))
    cycles = []
    for i in range(1, n + 1):
        h = current.index(target_order[i - 1], i - 1) + 1
        if h != i:
            cycles.append((i, h))
            current.insert(i - 1, current.pop(h - 1))

    packed = []
    wire = 1
    for g in gates:
        width = len(g.wires)
        packed.append(Gate(tuple(range(wire, wire + width)), g.matrix))
        wire += width
    packed_formula = level_matrix_formula(packed, n, tag)

    if cycles:
        # Operator order: first cycle applied first, so it sits rightmost.
        p_sigma = balanced_prod(
            [cycle_formula(j, k, n, tag) for j, k in reversed(cycles)]
        )
        p_sigma_inv = balanced_prod(
            [cycle_formula(j, k, n, tag, inverse=True) for j, k in cycles]
        )
    else:
        p_sigma = identity_formula(n, tag)
        p_sigma_inv = identity_formula(n, tag)

    return LevelPlan(
        n=n,
        tag=tag,
        sigma=tuple(sigma),
        cycles=tuple(cycles),
        packed_level=tuple(packed),
        packed_formula=packed_formula,
        p_sigma=p_sigma,
        p_sigma_inv=p_sigma_inv,
    )


def compile_array_to_formula(c: GateArray) -> Formula:
    """Sum-free formula F with F . d_x evaluating to simulate(c, x).

    Level 1 ends up rightmost in the product; the chain is balanced, so
    depth grows with log of the level count.
    """
    report = validate_array(c)
    if not report.ok:
        raise ValidationError(f"invalid gate array: {report.violations[0]}")
    if not c.levels:
        return identity_formula(c.width, c.tag)
    formulas = [
        adjacency_normalize(level, c.width, c.tag).formula for level in c.levels
    ]
    formulas.reverse()
    return balanced_prod(formulas)


InputSpec = Union[str, Sequence[Matrix]]


def input_vector_formula(spec: InputSpec, tag: Tag) -> Formula:
    """Input column as a right-associated tensor chain.

    A bit string gives one 2x1 basis atom per wire.  A sequence of
    matrices may mix in longer unit columns of order 2^j x 1, covering j
    wires each; that is how uniformly random bit pairs enter, since the
    length-4 column (1/2, 1/2, 1/2, 1/2) has no exact 2x1 factorization.
    """
    if isinstance(spec, str):
        if not spec or any(ch not in "01" for ch in spec):
            raise ValidationError(f"bit string must be nonempty 0/1, got {spec!r}")
        parts = [basis_vector(2, int(ch) + 1, tag) for ch in spec]
    else:
        parts = list(spec)
        if not parts:
            raise ValidationError("input spec must cover at least one wire")
        for m in parts:
            if m.tag is not tag:
                raise ValidationError(
                    f"input block tag {m.tag.value} does not match {tag.value}"
                )
            if m.cols != 1 or m.rows < 2 or m.rows & (m.rows - 1):
                raise ValidationError(
                    f"input block must be a 2^j x 1 column, got {m.rows}x{m.cols}"
                )
            if not is_unit_column(m):
                raise ValidationError("input block is not a unit column")
    atoms = [Atom(m) for m in parts]
    return reduce(lambda rest, a: Tensor(a, rest), reversed(atoms[:-1]), atoms[-1])
