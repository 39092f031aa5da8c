"""Parametrized circuits: the hardware-efficient ansatz and a convolutional variant.

Rotations follow ``R_i(theta) = exp(-i theta sigma_i)`` with no half angle.
Circuits are stored as flat gate lists so the same description drives unitary
construction, batched state propagation and adjoint differentiation.

Parameter layout (HEA): the zeroth layer holds ``(Rx_q, Rz_q)`` for each qubit
q; every later layer holds the same rotation pairs followed by the ``n - 1``
CRy angles of its entangling chain, even though the chain is applied first.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import SIGMA_X, SIGMA_Y, SIGMA_Z

ANSATZ_KINDS = ("hea", "qcnn")
QCNN_CELL_PARAMS = 9


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    layers: int = 0
    kind: str = "hea"

    def __post_init__(self):
        if self.kind not in ANSATZ_KINDS:
            raise ValueError(f"unknown ansatz kind {self.kind!r}; expected one of {ANSATZ_KINDS}")
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if self.layers < 0:
            raise ValueError("layers must be >= 0")
        if self.kind == "qcnn" and (self.n_qubits < 2 or self.n_qubits & (self.n_qubits - 1)):
            raise ValueError("QCNN requires n_qubits to be a power of two >= 2")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_qubits": self.n_qubits, "layers": self.layers}

    @classmethod
    def from_dict(cls, data: dict) -> "AnsatzSpec":
        return cls(n_qubits=int(data["n_qubits"]), layers=int(data.get("layers", 0)), kind=data["kind"])


@dataclass(frozen=True)
class Gate:
    """One parametrized gate: ``kind`` in {rx, rz, cry}; qubits are (target,) or (control, target)."""

    kind: str
    qubits: tuple
    param: int


def gate_rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -1j * s], [-1j * s, c]])


def gate_ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def gate_rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-1j * theta), np.exp(1j * theta)])


def gate_cry(theta: float) -> np.ndarray:
    """Controlled R_y on a (control, target) pair; control is the first qubit."""
    u = np.eye(4, dtype=complex)
    u[2:, 2:] = gate_ry(theta)
    return u


_ROTATIONS = {"rx": gate_rx, "rz": gate_rz, "cry": gate_ry}
_GENERATORS = {"rx": SIGMA_X, "rz": SIGMA_Z, "cry": SIGMA_Y}


def _hea_gates(n: int, layers: int) -> tuple[Gate, ...]:
    gates = []
    for q in range(n):
        gates.append(Gate("rx", (q,), 2 * q))
        gates.append(Gate("rz", (q,), 2 * q + 1))
    offset = 2 * n
    for _ in range(layers):
        chain = offset + 2 * n
        for i in range(n - 1):
            gates.append(Gate("cry", (i, i + 1), chain + i))
        for q in range(n):
            gates.append(Gate("rx", (q,), offset + 2 * q))
            gates.append(Gate("rz", (q,), offset + 2 * q + 1))
        offset += 3 * n - 1
    return tuple(gates)


def qcnn_stages(n: int) -> list[list[list[tuple[int, int]]]]:
    """Cell placement of the convolutional ansatz.

    Returns one entry per stage; each stage is a list of parameter groups and
    each group lists the qubit pairs that share one 9-parameter cell.  In the
    first stage every cell has its own parameters; in later stages the cells
    of each sublayer share parameters.  Survivors of a stage are the qubits at
    odd positions, so the last qubit always survives.
    """
    alive = list(range(n))
    stages = []
    first = True
    while len(alive) > 1:
        even = [(alive[i], alive[i + 1]) for i in range(0, len(alive) - 1, 2)]
        odd = [(alive[i], alive[i + 1]) for i in range(1, len(alive) - 1, 2)]
        if first:
            groups = [[p] for p in even] + [[p] for p in odd]
        else:
            groups = [g for g in (even, odd) if g]
        stages.append(groups)
        alive = alive[1::2]
        first = False
    return stages


def _qcnn_gates(n: int) -> tuple[Gate, ...]:
    gates = []
    offset = 0
    for stage in qcnn_stages(n):
        for group in stage:
            for a, b in group:
                gates += [Gate("rx", (a,), offset), Gate("rz", (a,), offset + 1),
                          Gate("rx", (b,), offset + 2), Gate("rz", (b,), offset + 3),
                          Gate("cry", (a, b), offset + 4),
                          Gate("rx", (a,), offset + 5), Gate("rz", (a,), offset + 6),
                          Gate("rx", (b,), offset + 7), Gate("rz", (b,), offset + 8)]
            offset += QCNN_CELL_PARAMS
    return tuple(gates)


@lru_cache(maxsize=None)
def circuit_gates(spec: AnsatzSpec) -> tuple[Gate, ...]:
    if spec.kind == "hea":
        return _hea_gates(spec.n_qubits, spec.layers)
    return _qcnn_gates(spec.n_qubits)


def param_count(spec: AnsatzSpec) -> int:
    if spec.kind == "hea":
        n, l = spec.n_qubits, spec.layers
        return 3 * l * n - l + 2 * n
    return QCNN_CELL_PARAMS * sum(len(stage) for stage in qcnn_stages(spec.n_qubits))


def _check_theta(spec: AnsatzSpec, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != param_count(spec):
        raise ValueError(f"expected {param_count(spec)} parameters, got {theta.size}")
    return theta


# --- gate application on batches of column vectors -------------------------

def apply_single(states: np.ndarray, gate: np.ndarray, qubit: int) -> np.ndarray:
    """Apply a 2x2 gate to ``qubit`` of every column of ``states`` (dim x R)."""
    dim, cols = states.shape
    t = states.reshape(2**qubit, 2, -1)
    return np.matmul(gate, t).reshape(dim, cols)


def apply_controlled(states: np.ndarray, gate: np.ndarray, control: int, target: int,
                     n_qubits: int) -> np.ndarray:
    """Apply ``gate`` to ``target`` on the subspace where ``control`` is |1>."""
    out = states.copy()
    view = out.reshape([2] * n_qubits + [-1])
    index = [slice(None)] * n_qubits
    index[control] = 1
    sub = view[tuple(index)]
    axis = target if target < control else target - 1
    moved = np.moveaxis(sub, axis, 0)
    moved[...] = np.tensordot(gate, moved, axes=(1, 0))
    return out


def _apply(states, g: Gate, matrix, n_qubits):
    if g.kind == "cry":
        return apply_controlled(states, matrix, g.qubits[0], g.qubits[1], n_qubits)
    return apply_single(states, matrix, g.qubits[0])


def _apply_generator(states, g: Gate, n_qubits):
    if g.kind != "cry":
        return apply_single(states, _GENERATORS[g.kind], g.qubits[0])
    control, target = g.qubits
    out = np.zeros_like(states)
    src = states.reshape([2] * n_qubits + [-1])
    dst = out.reshape([2] * n_qubits + [-1])
    index = [slice(None)] * n_qubits
    index[control] = 1
    axis = target if target < control else target - 1
    moved_src = np.moveaxis(src[tuple(index)], axis, 0)
    moved_dst = np.moveaxis(dst[tuple(index)], axis, 0)
    moved_dst[...] = np.tensordot(SIGMA_Y, moved_src, axes=(1, 0))
    return out


def apply_circuit(spec: AnsatzSpec, theta, states: np.ndarray) -> np.ndarray:
    """Propagate the columns of ``states`` through U(theta)."""
    theta = _check_theta(spec, theta)
    out = np.asarray(states, dtype=complex)
    for g in circuit_gates(spec):
        out = _apply(out, g, _ROTATIONS[g.kind](theta[g.param]), spec.n_qubits)
    return out


def adjoint_gradient(spec: AnsatzSpec, theta, final: np.ndarray, weighted: np.ndarray) -> np.ndarray:
    """Gradient of ``sum_c <a_c|U^dag O U|a_c>`` with respect to theta.

    ``final`` holds the propagated columns ``U a_c`` and ``weighted`` holds
    ``O U a_c`` for a Hermitian ``O`` that does not depend on theta.  Both
    are swept backwards through the circuit once.
    """
    theta = _check_theta(spec, theta)
    n = spec.n_qubits
    phi = np.array(final, dtype=complex)
    lam = np.array(weighted, dtype=complex)
    grad = np.zeros_like(theta)
    for g in reversed(circuit_gates(spec)):
        # d/dtheta of exp(-i theta G) is -i G exp(-i theta G)
        mu = _apply_generator(phi, g, n)
        grad[g.param] += 2.0 * np.vdot(lam, mu).imag
        inverse = _ROTATIONS[g.kind](-theta[g.param])
        phi = _apply(phi, g, inverse, n)
        lam = _apply(lam, g, inverse, n)
    return grad


def build_unitary(spec: AnsatzSpec, theta) -> np.ndarray:
    """Dense 2^n x 2^n unitary of the circuit (either kind)."""
    return apply_circuit(spec, theta, np.eye(2**spec.n_qubits, dtype=complex))


def build_qcnn_unitary(spec: AnsatzSpec, theta) -> np.ndarray:
    if spec.kind != "qcnn":
        raise ValueError("build_qcnn_unitary needs a QCNN spec")
    return build_unitary(spec, theta)
