"""Gate-level circuit representation and builders.

Qubit layout for a model circuit with k nodes and horizon T: node n at step
t (both 1-based) sits on qubit (t-1)*k + (n-1), so node 1 of each register
is least significant and measured register strings match the configuration
convention of :mod:`cascadeq.model`.

Gate kinds:

* ``ry``      single-qubit y-rotation by ``angle`` (matrix
              [[cos(a/2), -sin(a/2)], [sin(a/2), cos(a/2)]])
* ``x``, ``z``, ``h``  the usual single-qubit gates
* ``phase``   diag(1, e^{i*angle}) on the target
* ``s0``      phase -1 on the component where every target qubit is 0
* ``mark``    phase -1 where the control pattern is satisfied (no target)

Every kind accepts controls ``(qubit, polarity)``; polarity 0 is an open
control. ``s0`` and ``mark`` exist as primitives so the simulator can apply
them as single diagonal updates; the emitted text format lowers them to
x-conjugated multi-controlled z.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ParseError, ValidationError
from .model import NetworkModel, validate

__all__ = [
    "Gate",
    "Circuit",
    "GroverSpec",
    "theta_init",
    "theta_recover",
    "theta_trigger",
    "trigger_ancestors",
    "build_model_circuit",
    "build_grover",
    "build_qae_circuit",
    "inverse_gates",
    "controlled_gates",
    "inverse_qft_gates",
    "emit_gates",
    "parse_gates",
]

_KINDS_WITH_ANGLE = {"ry", "phase"}
_KINDS = {"ry", "x", "z", "h", "phase", "s0", "mark"}


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...] = ()
    controls: tuple[tuple[int, int], ...] = ()
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}", code="unknown-gate-kind")
        if (self.angle is not None) != (self.kind in _KINDS_WITH_ANGLE):
            raise ValidationError(f"gate {self.kind!r} angle mismatch", code="invalid-gate")
        if self.angle is not None and not math.isfinite(self.angle):
            raise ValidationError("gate angle must be finite", code="invalid-gate")
        if self.kind == "mark":
            if self.targets or not self.controls:
                raise ValidationError("mark takes controls only", code="invalid-gate")
        elif self.kind == "s0":
            if not self.targets:
                raise ValidationError("s0 needs at least one target", code="invalid-gate")
        elif len(self.targets) != 1:
            raise ValidationError(f"gate {self.kind!r} takes exactly one target",
                                  code="invalid-gate")
        control_qubits = [q for q, _ in self.controls]
        if len(set(control_qubits)) != len(control_qubits):
            raise ValidationError("duplicate control qubit", code="invalid-gate")
        if set(control_qubits) & set(self.targets):
            raise ValidationError("control and target qubits must be disjoint",
                                  code="invalid-gate")
        if any(pol not in (0, 1) for _, pol in self.controls):
            raise ValidationError("control polarity must be 0 or 1", code="invalid-gate")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list on ``n_qubits`` qubits plus the (node, step) layout."""

    n_qubits: int
    gates: tuple[Gate, ...]
    layout: dict[tuple[int, int], int] = field(default_factory=dict)
    ancillas: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValidationError("circuit needs at least one qubit", code="invalid-circuit")
        for gate in self.gates:
            if any(q < 0 or q >= self.n_qubits for q in gate.qubits):
                raise ValidationError(
                    f"gate {gate.kind!r} touches a qubit outside 0..{self.n_qubits - 1}",
                    code="invalid-circuit",
                )
        values = list(self.layout.values())
        if len(set(values)) != len(values):
            raise ValidationError("layout must be injective", code="invalid-circuit")

    def qubit(self, node: int, step: int) -> int:
        try:
            return self.layout[(node, step)]
        except KeyError:
            raise ValidationError(f"no qubit for node {node} at step {step}",
                                  code="invalid-node-index") from None

    def register(self, step: int) -> list[int]:
        """Qubits of one time-step register, node 1 first."""
        nodes = sorted({n for n, t in self.layout if t == step})
        if not nodes:
            raise ValidationError(f"no register for step {step}", code="invalid-node-index")
        return [self.qubit(n, step) for n in nodes]


@dataclass(frozen=True)
class GroverSpec:
    """What to mark: nodes (1-based) pinned to bits at one time step.

    ``marked`` lists (node, bit) constraints; a full configuration pins all
    k nodes, a subset marks the marginal event.
    """

    target_step: int
    marked: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.target_step < 1:
            raise ValidationError("target step must be >= 1", code="invalid-horizon")
        if not self.marked:
            raise ValidationError("at least one node must be marked", code="invalid-mark")
        nodes = [n for n, _ in self.marked]
        if len(set(nodes)) != len(nodes):
            raise ValidationError("marked nodes must be distinct", code="invalid-mark")
        if any(b not in (0, 1) for _, b in self.marked):
            raise ValidationError("marked bits must be 0 or 1", code="invalid-mark")
        object.__setattr__(self, "marked", tuple(sorted(self.marked)))

    @classmethod
    def from_config(cls, text: str, step: int) -> "GroverSpec":
        """Parse a most-significant-node-first pattern; '*' leaves a node free."""
        k = len(text)
        marked = []
        for pos, ch in enumerate(text):
            node = k - pos
            if ch == "*":
                continue
            if ch not in "01":
                raise ParseError(f"configuration pattern {text!r} may contain only 0, 1, *")
            marked.append((node, int(ch)))
        if not marked:
            raise ValidationError("pattern marks no node", code="invalid-mark")
        return cls(step, tuple(marked))

    @property
    def marked_fraction(self) -> float:
        """Fraction of all basis states the mark selects."""
        return 2.0 ** -len(self.marked)

    def matches(self, config: int) -> bool:
        """Does a register-local configuration integer satisfy the mark?"""
        return all((config >> (n - 1)) & 1 == b for n, b in self.marked)


# --- rotation angles ---------------------------------------------------------

def _check_unit(p: float, what: str) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"{what} = {p!r} outside [0, 1]", code="out-of-range")


def theta_init(p_fail: float) -> float:
    """Rotation preparing failure probability p from |0>: 2*arcsin(sqrt(p))."""
    _check_unit(p_fail, "p_fail")
    return 2.0 * math.asin(math.sqrt(p_fail))


def theta_recover(p_fail: float, p_recover: float) -> float:
    """Extra rotation so a previously failed node stays failed with 1 - p_recover.

    The initial register rotation already placed the node at theta_init, so
    the controlled correction is 2*arcsin(sqrt(1 - p_recover)) - theta_init.
    May be negative.
    """
    _check_unit(p_fail, "p_fail")
    _check_unit(p_recover, "p_recover")
    return 2.0 * math.asin(math.sqrt(1.0 - p_recover)) - 2.0 * math.asin(math.sqrt(p_fail))


def trigger_ancestors(model: NetworkModel, node: int) -> tuple[int, ...]:
    """Nodes with a nonzero trigger edge into ``node``, ascending (1-based)."""
    if not (1 <= node <= model.k):
        raise ValidationError(f"node {node} outside 1..{model.k}", code="invalid-node-index")
    return tuple(m + 1 for m in range(model.k) if model.p_trigger[m][node - 1] > 0.0)


def theta_trigger(model: NetworkModel, node: int, active: Iterable[int]) -> float:
    """Extra rotation for a good node given the set of failed trigger ancestors.

    p_off = (1 - p_fail[node]) * prod(1 - p_trigger[m][node]) over active m;
    the gate angle is 2*arcsin(sqrt(1 - p_off)) - theta_init(p_fail[node]).
    """
    if not (1 <= node <= model.k):
        raise ValidationError(f"node {node} outside 1..{model.k}", code="invalid-node-index")
    p_fail = model.p_fail[node - 1]
    factor = 1.0
    for m in active:
        if not (1 <= m <= model.k) or m == node:
            raise ValidationError(f"ancestor {m} invalid for node {node}",
                                  code="invalid-node-index")
        factor *= 1.0 - model.p_trigger[m - 1][node - 1]
    if factor == 1.0:
        return 0.0  # no effective trigger: the init rotation already fits
    p_off = (1.0 - p_fail) * factor
    return 2.0 * math.asin(math.sqrt(1.0 - p_off)) - 2.0 * math.asin(math.sqrt(p_fail))


# --- builders ----------------------------------------------------------------

def build_model_circuit(model: NetworkModel, horizon: int) -> Circuit:
    """Circuit whose register-t measurement distribution equals the exact step-t table.

    All per-register initialization rotations are hoisted to the front; then
    each step transition adds, per node, a 1-controlled recovery rotation and
    one multi-controlled rotation per nonempty configuration of the node's
    trigger ancestors (open control on the node itself, polarities matching
    the configuration).
    """
    validate(model)
    if horizon < 1:
        raise ValidationError("horizon must be >= 1", code="invalid-horizon")
    k = model.k
    layout = {(n, t): (t - 1) * k + (n - 1) for t in range(1, horizon + 1)
              for n in range(1, k + 1)}
    gates: list[Gate] = []
    for t in range(1, horizon + 1):
        for n in range(1, k + 1):
            gates.append(Gate("ry", (layout[(n, t)],), angle=theta_init(model.p_fail[n - 1])))
    for t in range(1, horizon):
        for n in range(1, k + 1):
            target = layout[(n, t + 1)]
            gates.append(Gate("ry", (target,), ((layout[(n, t)], 1),),
                              angle=theta_recover(model.p_fail[n - 1], model.p_recover[n - 1])))
            ancestors = trigger_ancestors(model, n)
            for pattern in range(1, 1 << len(ancestors)):
                active = [m for j, m in enumerate(ancestors) if (pattern >> j) & 1]
                angle = theta_trigger(model, n, active)
                if angle == 0.0:
                    continue
                controls = [(layout[(n, t)], 0)]
                controls += [(layout[(m, t)], (pattern >> j) & 1)
                             for j, m in enumerate(ancestors)]
                gates.append(Gate("ry", (target,), tuple(controls), angle=angle))
    return Circuit(k * horizon, tuple(gates), layout)


def inverse_gates(gates: Sequence[Gate]) -> list[Gate]:
    """Gate list implementing the inverse unitary."""
    out = []
    for gate in reversed(gates):
        if gate.kind in ("ry", "phase"):
            out.append(Gate(gate.kind, gate.targets, gate.controls, -gate.angle))
        else:
            out.append(gate)
    return out


def controlled_gates(gates: Sequence[Gate], control: int) -> list[Gate]:
    """Every gate additionally controlled (polarity 1) on ``control``."""
    out = []
    for gate in gates:
        if control in gate.qubits:
            raise ValidationError("control qubit already used by gate", code="invalid-gate")
        out.append(Gate(gate.kind, gate.targets, gate.controls + ((control, 1),), gate.angle))
    return out


def _global_minus(qubit: int) -> list[Gate]:
    # x z x z on one qubit multiplies the whole state by -1; kept explicit so
    # a controlled Grover picks it up as the required relative phase.
    return [Gate("x", (qubit,)), Gate("z", (qubit,)),
            Gate("x", (qubit,)), Gate("z", (qubit,))]


def build_grover(model: NetworkModel, horizon: int, spec: GroverSpec) -> Circuit:
    """Grover operator for the marked event: -(model) s0 (model)^dagger s_chi."""
    base = build_model_circuit(model, horizon)
    if spec.target_step > horizon:
        raise ValidationError(
            f"target step {spec.target_step} beyond horizon {horizon}", code="invalid-horizon")
    for n, _ in spec.marked:
        if not (1 <= n <= model.k):
            raise ValidationError(f"marked node {n} outside 1..{model.k}",
                                  code="invalid-node-index")
    chi = Gate("mark", controls=tuple((base.qubit(n, spec.target_step), b)
                                      for n, b in spec.marked))
    gates = [chi]
    gates += inverse_gates(base.gates)
    gates.append(Gate("s0", tuple(range(base.n_qubits))))
    gates += list(base.gates)
    gates += _global_minus(0)
    return Circuit(base.n_qubits, tuple(gates), base.layout)


def inverse_qft_gates(qubits: Sequence[int]) -> list[Gate]:
    """Inverse discrete Fourier transform; ``qubits[0]`` is the least-significant bit."""
    return inverse_gates(_qft_gates(qubits))


def _qft_gates(qubits: Sequence[int]) -> list[Gate]:
    m = len(qubits)
    gates: list[Gate] = []
    for i in range(m - 1, -1, -1):
        gates.append(Gate("h", (qubits[i],)))
        for j in range(i - 1, -1, -1):
            gates.append(Gate("phase", (qubits[i],), ((qubits[j], 1),),
                              angle=math.pi / (1 << (i - j))))
    for i in range(m // 2):
        a, b = qubits[i], qubits[m - 1 - i]
        gates += [Gate("x", (b,), ((a, 1),)), Gate("x", (a,), ((b, 1),)),
                  Gate("x", (b,), ((a, 1),))]
    return gates


def build_qae_circuit(model: NetworkModel, horizon: int, spec: GroverSpec,
                      bits: int) -> Circuit:
    """Phase-estimation circuit: ``bits`` ancillas reading the Grover eigenphase.

    Ancilla j controls 2^j applications of the Grover operator; the inverse
    Fourier transform then makes outcome y decode as theta = 2*pi*y/2^bits.
    """
    if bits < 1:
        raise ValidationError("resolution must be >= 1 bit", code="invalid-bits")
    base = build_model_circuit(model, horizon)
    grover = build_grover(model, horizon, spec)
    ancillas = tuple(range(base.n_qubits, base.n_qubits + bits))
    gates: list[Gate] = [Gate("h", (a,)) for a in ancillas]
    gates += list(base.gates)
    for j, ancilla in enumerate(ancillas):
        block = controlled_gates(grover.gates, ancilla)
        for _ in range(1 << j):
            gates += block
    gates += inverse_qft_gates(list(ancillas))
    return Circuit(base.n_qubits + bits, tuple(gates), base.layout, ancillas)


# --- textual gate format -------------------------------------------------------
#
#   <kind>(<angle>) controls=[(q,pol),...] targets=[q,...]
#
# Angles are fixed at six decimals. s0 and mark are lowered to x-conjugated
# multi-controlled z, so emitted text uses only ry/x/z/h/phase lines.

def _fmt_controls(controls: Sequence[tuple[int, int]]) -> str:
    return "[" + ",".join(f"({q},{pol})" for q, pol in controls) + "]"


def _fmt_targets(targets: Sequence[int]) -> str:
    return "[" + ",".join(str(q) for q in targets) + "]"


def _emit_line(gate: Gate) -> str:
    head = gate.kind if gate.angle is None else f"{gate.kind}({gate.angle:.6f})"
    return f"{head} controls={_fmt_controls(gate.controls)} targets={_fmt_targets(gate.targets)}"


def _lower(gate: Gate) -> list[Gate]:
    if gate.kind == "s0":
        wrap = [Gate("x", (q,)) for q in gate.targets]
        z_target = gate.targets[-1]
        controls = tuple((q, 1) for q in gate.targets[:-1]) + gate.controls
        return wrap + [Gate("z", (z_target,), controls)] + wrap
    if gate.kind == "mark":
        ones = [q for q, pol in gate.controls if pol == 1]
        if ones:
            z_target = ones[-1]
            rest = tuple(c for c in gate.controls if c[0] != z_target)
            return [Gate("z", (z_target,), rest)]
        z_target = gate.controls[-1][0]
        rest = tuple(c for c in gate.controls if c[0] != z_target)
        x = Gate("x", (z_target,))
        return [x, Gate("z", (z_target,), rest), x]
    return [gate]


def emit_gates(circuit: Circuit) -> str:
    """One line per gate; s0/mark appear as their controlled-z lowerings."""
    lines = []
    for gate in circuit.gates:
        lines.extend(_emit_line(g) for g in _lower(gate))
    return "\n".join(lines) + ("\n" if lines else "")


_LINE_RE = re.compile(
    r"^(?P<kind>[a-z0-9]+)(\((?P<angle>[^)]+)\))?"
    r" controls=\[(?P<controls>[^\]]*)\]"
    r" targets=\[(?P<targets>[^\]]*)\]$"
)


def parse_gates(text: str, n_qubits: int | None = None) -> Circuit:
    """Parse emitted gate text back into a circuit.

    ``n_qubits`` defaults to one past the highest index used. The layout of
    the original circuit is not part of the format and comes back empty.
    """
    gates: list[Gate] = []
    highest = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        match = _LINE_RE.match(line)
        if not match:
            raise ParseError(f"line {lineno}: cannot parse gate {line!r}")
        kind = match.group("kind")
        if kind not in _KINDS:
            raise ParseError(f"line {lineno}: unknown gate kind {kind!r}")
        angle = None
        if match.group("angle") is not None:
            try:
                angle = float(match.group("angle"))
            except ValueError as exc:
                raise ParseError(f"line {lineno}: bad angle {match.group('angle')!r}") from exc
        controls = []
        raw_controls = match.group("controls")
        if raw_controls:
            if not re.fullmatch(r"\(\d+,[01]\)(,\(\d+,[01]\))*", raw_controls):
                raise ParseError(f"line {lineno}: bad control list {raw_controls!r}")
            controls = [(int(q), int(pol))
                        for q, pol in re.findall(r"\((\d+),([01])\)", raw_controls)]
        targets = tuple(int(tok) for tok in match.group("targets").split(",") if tok)
        try:
            gate = Gate(kind, targets, tuple(controls), angle)
        except ValidationError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
        gates.append(gate)
        highest = max([highest, *gate.qubits])
    if n_qubits is None:
        n_qubits = highest + 1 if highest >= 0 else 1
    return Circuit(n_qubits, tuple(gates))
