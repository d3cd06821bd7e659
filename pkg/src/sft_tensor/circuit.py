"""Leveled gate arrays and an exact state-vector simulator.

An array has a fixed wire count n and an ordered list of levels; gates on
one level touch disjoint wire sets.  Wire 1 is the most significant bit of
the basis index, so the bit string b_1..b_n sits on line 1 + sum(b_i *
2^(n-i)) of a state vector.  This big-endian convention is shared by every
module in the package.

Gates may name non-adjacent and even non-monotone wire lists.  A gate
whose wires arrive out of order is normalized on construction: the wires
are sorted and the matrix is conjugated by the permutation that reorders
the local bits, which leaves the action on the state unchanged.  Making
gates *adjacent* is deliberately not done here; that rewriting belongs to
the forward compiler, where it is visible in the emitted formula.

simulate applies gates by direct index manipulation (with a fast path for
permutation matrices) and never builds a 2^n x 2^n operator.
level_operator builds exactly that operator from embeddings, giving an
independent route against which the simulator is tested.

Text format, line oriented::

    width 3
    level
    gate toffoli 1 2 3
    level
    gate [[0 1][1 0]] 2
    input basis 110

An inline matrix uses the atom grammar from the formula module.  The
input line is optional and takes either a bit string or an atom spelling
out the 2^n amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, TagMismatchError, ValidationError
from .formula import Atom, parse_formula, render_formula
from .linalg import (
    Matrix,
    basis_vector,
    conj_transpose,
    identity,
    is_orthogonal,
    is_unit_column,
    kronecker,
    mat_mul,
    partial_trace_outer,
)
from .semiring import Scalar, Tag, scalar_add, scalar_mul, scalar_zero

__all__ = [
    "ArrayReport",
    "BUILTIN_GATE_NAMES",
    "Gate",
    "GateArray",
    "StateVector",
    "acceptance_probability",
    "builtin_gate",
    "level_operator",
    "parse_gate_array",
    "render_gate_array",
    "simulate",
    "validate_array",
]

# Permutations in column convention: the gate maps e_j to e_[perm[j]].
_BUILTIN_PERMS = {
    "not": (1, 0),
    "cnot": (0, 1, 3, 2),
    "swap": (0, 2, 1, 3),
    "toffoli": (0, 1, 2, 3, 4, 5, 7, 6),
    "fredkin": (0, 1, 2, 3, 4, 6, 5, 7),
}

BUILTIN_GATE_NAMES = ("not", "cnot", "swap", "toffoli", "fredkin", "rot35")


def builtin_gate(name: str, tag: Tag) -> Matrix:
    """The library gate matrix under the given tag.

    rot35 is the rational rotation [[3/5, 4/5], [-4/5, 3/5]]; it needs
    negatives and is refused under the Boolean and nonnegative tags.
    """
    if name in _BUILTIN_PERMS:
        return Matrix.from_perm(tag, list(_BUILTIN_PERMS[name]))
    if name == "rot35":
        if tag in (Tag.BOOLEAN, Tag.NONNEG_RATIONAL):
            raise ValidationError(
                f"rot35 has negative entries and no {tag.value} form"
            )
        return parse_formula("[[3/5 4/5][-4/5 3/5]]", tag).matrix
    raise ValidationError(f"unknown gate name {name!r}")


def _resorted_matrix(matrix: Matrix, listed: tuple) -> Matrix:
    """Conjugate so the gate reads its local bits in sorted-wire order."""
    k = len(listed)
    pos = {wire: i for i, wire in enumerate(sorted(listed))}
    pi = [0] * (1 << k)
    for x in range(1 << k):
        y = 0
        for j, wire in enumerate(listed):
            bit = (x >> (k - 1 - j)) & 1
            y |= bit << (k - 1 - pos[wire])
        pi[x] = y
    p = Matrix.from_perm(matrix.tag, pi)
    return mat_mul(mat_mul(p, matrix), conj_transpose(p))


@dataclass(frozen=True)
class Gate:
    """A gate on an ordered wire list; wire i is local bit i, MSB first.

    Out-of-order wire lists are normalized on construction (wires sorted,
    matrix conjugated accordingly) whenever the matrix order permits.
    """

    wires: tuple
    matrix: Matrix

    def __post_init__(self):
        wires = tuple(int(w) for w in self.wires)
        object.__setattr__(self, "wires", wires)
        ordered = tuple(sorted(wires))
        if (
            wires != ordered
            and len(set(wires)) == len(wires)
            and self.matrix.rows == self.matrix.cols == 1 << len(wires)
        ):
            object.__setattr__(self, "matrix", _resorted_matrix(self.matrix, wires))
            object.__setattr__(self, "wires", ordered)


@dataclass(frozen=True)
class GateArray:
    tag: Tag
    width: int
    levels: tuple

    def __post_init__(self):
        if self.width < 1:
            raise ValidationError("gate array width must be positive")
        object.__setattr__(
            self, "levels", tuple(tuple(level) for level in self.levels)
        )

    @property
    def depth(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class StateVector:
    width: int
    amplitudes: Matrix

    def __post_init__(self):
        if self.width < 1:
            raise ValidationError("state width must be positive")
        m = self.amplitudes
        if m.cols != 1 or m.rows != 1 << self.width:
            raise ValidationError(
                f"state on {self.width} wires needs a {1 << self.width}x1 "
                f"column, got {m.rows}x{m.cols}"
            )
        if not is_unit_column(m):
            raise ValidationError("state amplitudes are not a unit column")

    @property
    def tag(self) -> Tag:
        return self.amplitudes.tag

    @classmethod
    def basis(cls, width: int, bits: str, tag: Tag) -> "StateVector":
        if len(bits) != width or any(c not in "01" for c in bits):
            raise ValidationError(
                f"basis label must be {width} bits of 0/1, got {bits!r}"
            )
        return cls(width, basis_vector(1 << width, int(bits, 2) + 1, tag))

    def basis_bits(self) -> str | None:
        """The bit string if this is a basis state, else None."""
        hit = None
        for i, a in enumerate(self.amplitudes.entries):
            if a.is_zero():
                continue
            if hit is not None or not a.is_one():
                return None
            hit = i
        return format(hit, f"0{self.width}b") if hit is not None else None


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class ArrayReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_array(c: GateArray) -> ArrayReport:
    """Check wire ranges, per-level disjointness, matrix orders and
    orthogonality; returns all violations rather than stopping at one."""
    violations = []
    for li, level in enumerate(c.levels, start=1):
        used: set = set()
        for gi, gate in enumerate(level, start=1):
            where = f"level {li} gate {gi}"
            w = len(gate.wires)
            if w == 0:
                violations.append(f"{where}: gate touches no wires")
                continue
            if len(set(gate.wires)) != w:
                violations.append(f"{where}: repeated wire")
            bad = [x for x in gate.wires if not 1 <= x <= c.width]
            if bad:
                violations.append(
                    f"{where}: wire {bad[0]} outside 1..{c.width}"
                )
            m = gate.matrix
            if m.tag is not c.tag:
                violations.append(
                    f"{where}: matrix tag {m.tag.value} != array tag {c.tag.value}"
                )
            if not (m.rows == m.cols == 1 << w):
                violations.append(
                    f"{where}: matrix order {m.rows}x{m.cols}, "
                    f"expected {1 << w}x{1 << w}"
                )
            elif m.tag is c.tag and not is_orthogonal(m):
                violations.append(f"{where}: matrix is not orthogonal")
            overlap = used & set(gate.wires)
            if overlap:
                violations.append(
                    f"{where}: wire {min(overlap)} already used on this level"
                )
            used |= set(gate.wires)
    return ArrayReport(tuple(violations))


# ---------------------------------------------------------------------------
# Simulation


def _apply_gate(amps: list, gate: Gate, n: int, tag: Tag) -> list:
    wires = gate.wires
    w = len(wires)
    shifts = [n - wire for wire in wires]
    size = 1 << n
    perm = gate.matrix.perm_or_none()
    if perm is not None:
        out = [None] * size
        for x in range(size):
            j = 0
            for t, sh in enumerate(shifts):
                j |= ((x >> sh) & 1) << (w - 1 - t)
            pj = perm[j]
            y = x
            for t, sh in enumerate(shifts):
                y = (y & ~(1 << sh)) | (((pj >> (w - 1 - t)) & 1) << sh)
            out[y] = amps[x]
        return out
    # Dense gate: matvec on each block of 2^w entries selected by the wires.
    spread = []
    for j in range(1 << w):
        v = 0
        for t, sh in enumerate(shifts):
            v |= ((j >> (w - 1 - t)) & 1) << sh
        spread.append(v)
    rest_shifts = [s for s in range(n) if s not in set(shifts)]
    zero = scalar_zero(tag)
    m = gate.matrix
    out = list(amps)
    for r in range(1 << (n - w)):
        base = 0
        for t, sh in enumerate(rest_shifts):
            base |= ((r >> t) & 1) << sh
        vec = [amps[base | sp] for sp in spread]
        for row in range(1 << w):
            acc = zero
            for col in range(1 << w):
                a = m.at(row, col)
                if a.is_zero() or vec[col].is_zero():
                    continue
                acc = scalar_add(acc, scalar_mul(a, vec[col]))
            out[base | spread[row]] = acc
    return out


def simulate(c: GateArray, s: StateVector) -> StateVector:
    """Run the array on the state, level by level."""
    report = validate_array(c)
    if not report.ok:
        raise ValidationError(f"invalid gate array: {report.violations[0]}")
    if s.width != c.width:
        raise ValidationError(
            f"state width {s.width} != array width {c.width}"
        )
    if s.tag is not c.tag:
        raise TagMismatchError(
            f"state tag {s.tag.value} != array tag {c.tag.value}"
        )
    amps = list(s.amplitudes.entries)
    for level in c.levels:
        for gate in sorted(level, key=lambda g: g.wires[0]):
            amps = _apply_gate(amps, gate, c.width, c.tag)
    return StateVector(c.width, Matrix.from_entries(c.tag, 1 << c.width, 1, amps))


def _embed_gate(gate: Gate, n: int, tag: Tag) -> Matrix:
    """The full 2^n operator of one gate: route its wires to the top bits,
    apply matrix (x) identity, route back."""
    wires = gate.wires
    w = len(wires)
    order = list(wires) + [i for i in range(1, n + 1) if i not in set(wires)]
    rho = [0] * (1 << n)
    for x in range(1 << n):
        y = 0
        for t, wire in enumerate(order):
            y |= ((x >> (n - wire)) & 1) << (n - 1 - t)
        rho[x] = y
    p = Matrix.from_perm(tag, rho)
    wide = kronecker(gate.matrix, identity(1 << (n - w), tag))
    return mat_mul(conj_transpose(p), mat_mul(wide, p))


def level_operator(c: GateArray, level_index: int) -> Matrix:
    """The 2^n x 2^n operator of level level_index (1-based).

    Built from per-gate embeddings, independently of simulate's index
    arithmetic; a level with no gates is the identity.
    """
    if not 1 <= level_index <= len(c.levels):
        raise ValidationError(
            f"level {level_index} outside 1..{len(c.levels)}"
        )
    op = identity(1 << c.width, c.tag)
    for gate in sorted(c.levels[level_index - 1], key=lambda g: g.wires[0]):
        op = mat_mul(_embed_gate(gate, c.width, c.tag), op)
    return op


def acceptance_probability(s: StateVector, k: int) -> Scalar:
    """Probability mass of the k lexicographically last basis states."""
    return partial_trace_outer(s.amplitudes, k)


# ---------------------------------------------------------------------------
# Text format


def _split_gate_spec(rest: str, tag: Tag, ln: int):
    """Split a gate line body into (matrix, wire-text)."""
    if rest.startswith("["):
        depth = 0
        end = None
        for i, ch in enumerate(rest):
            if ch == "[":
                depth += 1
            elif ch == "]":
                depth -= 1
                if depth == 0:
                    end = i + 1
                    break
        if end is None:
            raise ParseError(f"line {ln}: unterminated inline matrix")
        try:
            node = parse_formula(rest[:end], tag)
        except ParseError as exc:
            raise ParseError(f"line {ln}: {exc}") from None
        return node.matrix, rest[end:]
    name, _, wire_text = rest.partition(" ")
    try:
        matrix = builtin_gate(name, tag)
    except ValidationError as exc:
        raise ParseError(f"line {ln}: {exc}") from None
    return matrix, wire_text


def _parse_wires(text: str, ln: int) -> tuple:
    parts = text.split()
    if not parts:
        raise ParseError(f"line {ln}: gate needs at least one wire")
    wires = []
    for part in parts:
        if not part.isdigit() or int(part) < 1:
            raise ParseError(f"line {ln}: bad wire index {part!r}")
        wires.append(int(part))
    return tuple(wires)


def parse_gate_array(text: str, tag: Tag):
    """Parse the line-oriented format; returns (GateArray, StateVector or
    None).  Syntax problems raise ParseError naming the line; the array's
    semantic health is validate_array's business."""
    width = None
    levels: list = []
    state = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "width":
            if width is not None:
                raise ParseError(f"line {ln}: duplicate width")
            if not rest.isdigit() or int(rest) < 1:
                raise ParseError(f"line {ln}: width must be a positive integer")
            width = int(rest)
        elif width is None:
            raise ParseError(f"line {ln}: expected 'width <n>' first")
        elif head == "level":
            if rest:
                raise ParseError(f"line {ln}: unexpected text after 'level'")
            levels.append([])
        elif head == "gate":
            if not levels:
                raise ParseError(f"line {ln}: gate before any level")
            matrix, wire_text = _split_gate_spec(rest, tag, ln)
            levels[-1].append(Gate(_parse_wires(wire_text, ln), matrix))
        elif head == "input":
            if state is not None:
                raise ParseError(f"line {ln}: duplicate input")
            kind, _, payload = rest.partition(" ")
            payload = payload.strip()
            try:
                if kind == "basis":
                    state = StateVector.basis(width, payload, tag)
                elif kind == "amps":
                    node = parse_formula(payload, tag)
                    if not isinstance(node, Atom):
                        raise ValidationError("input amps takes a single atom")
                    state = StateVector(width, node.matrix)
                else:
                    raise ParseError(
                        f"line {ln}: input kind must be 'basis' or 'amps'"
                    )
            except (ValidationError, ParseError) as exc:
                raise ParseError(f"line {ln}: {exc}") from None
        else:
            raise ParseError(f"line {ln}: unknown directive {head!r}")
    if width is None:
        raise ParseError("missing 'width' line")
    return GateArray(tag, width, tuple(tuple(l) for l in levels)), state


def _gate_spec(gate: Gate, tag: Tag) -> str:
    for name in BUILTIN_GATE_NAMES:
        try:
            if builtin_gate(name, tag) == gate.matrix:
                return name
        except ValidationError:
            continue
    return render_formula(Atom(gate.matrix))


def render_gate_array(c: GateArray, state: StateVector | None = None) -> str:
    """Inverse of parse_gate_array; builtin matrices render by name."""
    lines = [f"width {c.width}"]
    for level in c.levels:
        lines.append("level")
        for gate in level:
            wires = " ".join(str(w) for w in gate.wires)
            lines.append(f"gate {_gate_spec(gate, c.tag)} {wires}")
    if state is not None:
        bits = state.basis_bits()
        if bits is not None:
            lines.append(f"input basis {bits}")
        else:
            lines.append(f"input amps {render_formula(Atom(state.amplitudes))}")
    return "\n".join(lines) + "\n"
