"""Batched statevector engine, partial traces and von Neumann entropies.

States are complex arrays of shape ``(B, 2**n)``: one row per trajectory.
Qubit 0 is the least-significant bit of the amplitude index. Single states of
shape ``(2**n,)`` are accepted wherever a batch is, and come back unbatched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ir import Gate, Operation

SQRT_HALF = 1.0 / math.sqrt(2.0)
NORM_TOL = 1e-9
HERMITIAN_TOL = 1e-9
CLAMP_TOL = 1e-9
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF
PAULI_MATRICES = {"I": I2, "X": X, "Y": Y, "Z": Z}


def rx(theta) -> np.ndarray:
    """Rotation matrices exp(-i theta X / 2); ``theta`` may be an array."""
    t = np.asarray(theta, dtype=float)[..., None, None] / 2
    return np.cos(t) * I2 - 1j * np.sin(t) * X


def ry(theta) -> np.ndarray:
    t = np.asarray(theta, dtype=float)[..., None, None] / 2
    return np.cos(t) * I2 - 1j * np.sin(t) * Y


def rz(theta) -> np.ndarray:
    t = np.asarray(theta, dtype=float)[..., None, None] / 2
    return np.cos(t) * I2 - 1j * np.sin(t) * Z


ROTATION = {Gate.RX: rx, Gate.RY: ry, Gate.RZ: rz}
FIXED_1Q = {Gate.H: H, Gate.X: X, Gate.Y: Y, Gate.Z: Z}
# controlled gates act as U on the target when the control is 1
CONTROLLED = {Gate.CX: X, Gate.CY: Y, Gate.CZ: Z}


def zero_state(n: int, batch: int | None = None) -> np.ndarray:
    shape = (2**n,) if batch is None else (batch, 2**n)
    psi = np.zeros(shape, dtype=complex)
    psi[..., 0] = 1.0
    return psi


def n_qubits_of(psi: np.ndarray) -> int:
    n = int(psi.shape[-1]).bit_length() - 1
    if 2**n != psi.shape[-1]:
        raise ValueError("state length is not a power of two")
    return n


def _batched(psi):
    psi = np.asarray(psi)
    return (psi[None, :], True) if psi.ndim == 1 else (psi, False)


def _axis(n: int, q: int) -> int:
    # axis of qubit q in the (B, 2, ..., 2) view; the first 2 is qubit n-1
    return n - q


def apply_matrix(psi: np.ndarray, u: np.ndarray, qubits) -> np.ndarray:
    """Apply a 2x2 or 4x4 matrix (or a (B, d, d) stack, one per row) in place.

    For two qubits ``(a, b)`` the matrix index is ``2*bit_a + bit_b``.
    Returns ``psi`` for chaining.
    """
    psi2, single = _batched(psi)
    n = n_qubits_of(psi2)
    qubits = tuple(qubits)
    if any(not 0 <= q < n for q in qubits):
        raise ValueError(f"qubits {qubits} out of range for {n} qubits")
    k = len(qubits)
    b = psi2.shape[0]
    u = np.asarray(u)
    if k == 1:
        q = qubits[0]
        view = psi2.reshape(b, 2 ** (n - 1 - q), 2, 2**q)
        m = u[None] if u.ndim == 2 else u
        m = m[:, :, :, None, None]
        a0 = view[:, :, 0, :].copy()
        a1 = view[:, :, 1, :]
        view[:, :, 0, :] = m[:, 0, 0] * a0 + m[:, 0, 1] * a1
        view[:, :, 1, :] = m[:, 1, 0] * a0 + m[:, 1, 1] * a1
        return psi2[0] if single else psi2
    view = psi2.reshape((b,) + (2,) * n)
    axes = [_axis(n, q) for q in qubits]
    moved = np.moveaxis(view, axes, list(range(n + 1 - k, n + 1)))
    flat = moved.reshape(b, -1, 2**k)
    if u.ndim == 2:
        out = flat @ u.T
    else:
        out = np.einsum("bij,brj->bri", u, flat)
    moved[...] = out.reshape(moved.shape)
    return psi2[0] if single else psi2


def controlled(u: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = u
    return out


def cphase(zeta) -> np.ndarray:
    z = np.asarray(zeta, dtype=float)
    out = np.zeros(z.shape + (4, 4), dtype=complex)
    out[..., 0, 0] = out[..., 1, 1] = out[..., 2, 2] = 1.0
    out[..., 3, 3] = np.exp(1j * z)
    return out


def gate_matrix(op: Operation) -> np.ndarray:
    g = op.gate
    if g in FIXED_1Q:
        return FIXED_1Q[g]
    if g in ROTATION:
        return ROTATION[g](op.angle)
    if g in CONTROLLED:
        return controlled(CONTROLLED[g])
    if g is Gate.CPHASE:
        return cphase(op.angle)
    raise ValueError(f"{g.value} is not a unitary gate")


def apply_gate(psi: np.ndarray, op: Operation) -> np.ndarray:
    """Apply a unitary operation in place. Shuttles act as identity."""
    if op.gate is Gate.SHUTTLE:
        return psi
    if op.gate in (Gate.MEASURE, Gate.RESET):
        raise ValueError(f"{op.gate.value} is not unitary; use measure_z / reset")
    return apply_matrix(psi, gate_matrix(op), op.qubits)


def prob_one(psi: np.ndarray, qubit: int) -> np.ndarray:
    psi2, single = _batched(psi)
    n = n_qubits_of(psi2)
    view = psi2.reshape(psi2.shape[0], 2 ** (n - 1 - qubit), 2, 2**qubit)
    p = np.einsum("bij,bij->b", view[:, :, 1, :].conj(), view[:, :, 1, :]).real
    return p[0] if single else p


def project(psi: np.ndarray, qubit: int, bits) -> np.ndarray:
    """Project each row onto its ``bits`` outcome and renormalize, in place."""
    psi2, single = _batched(psi)
    n = n_qubits_of(psi2)
    bits = np.broadcast_to(np.asarray(bits, dtype=np.int8), (psi2.shape[0],))
    view = psi2.reshape(psi2.shape[0], 2 ** (n - 1 - qubit), 2, 2**qubit)
    rows = np.arange(psi2.shape[0])
    view[rows, :, 1 - bits, :] = 0.0
    norms = np.sqrt(np.einsum("bi,bi->b", psi2.conj(), psi2).real)
    if np.any(norms <= 0.0):
        raise FloatingPointError("projected onto a zero-probability branch")
    psi2 /= norms[:, None]
    return psi2[0] if single else psi2


def measure_z(psi: np.ndarray, qubit: int, rng_or_uniform) -> tuple:
    """Projective Z measurement, in place.

    ``rng_or_uniform`` is either a numpy Generator or pre-drawn uniforms in
    [0, 1), one per row; outcome 1 occurs when ``u < P(1)``.
    Returns ``(bits, psi)``.
    """
    psi2, single = _batched(psi)
    p1 = np.clip(prob_one(psi2, qubit), 0.0, 1.0)
    if isinstance(rng_or_uniform, np.random.Generator):
        u = rng_or_uniform.random(p1.shape)
    else:
        u = np.broadcast_to(np.asarray(rng_or_uniform, dtype=float), p1.shape)
    # never pick a branch with vanishing weight
    bits = np.where(p1 <= 0.0, 0, np.where(p1 >= 1.0, 1, (u < p1).astype(np.int8))).astype(np.int8)
    project(psi2, qubit, bits)
    if single:
        return int(bits[0]), psi2[0]
    return bits, psi2


def reset(psi: np.ndarray, qubit: int, rng_or_uniform) -> np.ndarray:
    """Measure then flip on outcome 1, leaving the qubit in |0>."""
    bits, psi = measure_z(psi, qubit, rng_or_uniform)
    psi2, single = _batched(psi)
    flip = np.flatnonzero(np.atleast_1d(bits))
    if flip.size:
        sub = psi2[flip]
        apply_matrix(sub, X, (qubit,))
        psi2[flip] = sub
    return psi2[0] if single else psi2


def norms(psi: np.ndarray) -> np.ndarray:
    psi2, single = _batched(psi)
    out = np.sqrt(np.einsum("bi,bi->b", psi2.conj(), psi2).real)
    return out[0] if single else out


# ---------------------------------------------------------------- reductions


def partial_trace(psi: np.ndarray, keep) -> np.ndarray:
    """Reduced density matrix over ``keep``.

    The kept qubits are ordered as given, most significant first in the
    returned matrix index, i.e. keep[0] is the high bit.
    """
    psi2, single = _batched(psi)
    n = n_qubits_of(psi2)
    keep = [int(q) for q in keep]
    if not keep or len(set(keep)) != len(keep) or any(not 0 <= q < n for q in keep):
        raise ValueError(f"invalid subsystem {keep} for {n} qubits")
    b = psi2.shape[0]
    view = psi2.reshape((b,) + (2,) * n)
    moved = np.moveaxis(view, [_axis(n, q) for q in keep], list(range(1, len(keep) + 1)))
    flat = moved.reshape(b, 2 ** len(keep), -1)
    rho = flat @ flat.conj().transpose(0, 2, 1)
    return rho[0] if single else rho


def jacobi_eigenvalues(a: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues of Hermitian matrices by cyclic complex Jacobi rotations.

    Works on a single (d, d) matrix or a (B, d, d) stack; each rotation is
    vectorized over the stack. Sweeps stop once every matrix has an
    off-diagonal Frobenius norm below ``tol``.
    """
    a = np.array(a, dtype=complex, copy=True)
    single = a.ndim == 2
    if single:
        a = a[None]
    d = a.shape[-1]
    if np.max(np.abs(a - a.conj().transpose(0, 2, 1)), initial=0.0) > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian within tolerance")
    a = 0.5 * (a + a.conj().transpose(0, 2, 1))
    diag = np.eye(d, dtype=bool)

    def off_norm():
        return np.sqrt(np.sum(np.abs(a[:, ~diag]) ** 2, axis=1))

    for _ in range(max_sweeps):
        if d == 1 or np.all(off_norm() < tol):
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[:, p, q]
                g = np.abs(apq)
                live = g > 1e-300
                if not live.any():
                    continue
                gs = np.where(live, g, 1.0)
                phase = np.where(live, apq / gs, 1.0)
                theta = (a[:, q, q].real - a[:, p, p].real) / (2.0 * gs)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
                t = np.where(live, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # A <- U^H A U with U = diag-phase * real rotation on (p, q)
                ep = np.conj(phase)[:, None]
                colp = a[:, :, p].copy()
                colq = a[:, :, q]
                a[:, :, p] = c[:, None] * colp - (s[:, None] * ep) * colq
                a[:, :, q] = s[:, None] * colp + (c[:, None] * ep) * colq
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :]
                a[:, p, :] = c[:, None] * rowp - (s[:, None] * phase[:, None]) * rowq
                a[:, q, :] = s[:, None] * rowp + (c[:, None] * phase[:, None]) * rowq
    else:
        if not np.all(off_norm() < tol):
            raise ArithmeticError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.sort(np.diagonal(a, axis1=1, axis2=2).real, axis=1)
    return w[0] if single else w


def vn_entropy(rho: np.ndarray) -> np.ndarray | float:
    """Von Neumann entropy in nats of one density matrix or a (B, d, d) stack."""
    rho = np.asarray(rho)
    w = jacobi_eigenvalues(rho)
    if np.any(w < -CLAMP_TOL):
        raise ValueError(f"density matrix has eigenvalue {w.min():.3e} < 0")
    w = np.clip(w, 0.0, None)
    safe = np.where(w > 0.0, w, 1.0)
    s = -np.sum(w * np.log(safe), axis=-1)
    return float(s) if rho.ndim == 2 else s


def subsystem_entropy(psi: np.ndarray, keep):
    return vn_entropy(partial_trace(psi, keep))


# ---------------------------------------------------------------- Paulis


@dataclass(frozen=True)
class PauliString:
    """Signed Pauli operator ``sign * P_0 (x) P_1 (x) ...``; letter i acts on qubit i."""

    letters: str
    sign: int = 1

    def __post_init__(self):
        if set(self.letters) - set("IXYZ"):
            raise ValueError(f"bad Pauli string {self.letters!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def __len__(self):
        return len(self.letters)

    @property
    def masks(self) -> tuple[int, int, int]:
        """(flip mask, sign mask, number of Y letters)."""
        flip = sgn = ny = 0
        for q, c in enumerate(self.letters):
            if c in "XY":
                flip |= 1 << q
            if c in "YZ":
                sgn |= 1 << q
            ny += c == "Y"
        return flip, sgn, ny

    def __mul__(self, other: "PauliString") -> "PauliString":
        if len(self) != len(other):
            raise ValueError("length mismatch")
        phase = 0  # power of i
        out = []
        for a, b in zip(self.letters, other.letters):
            c, k = _PAULI_PRODUCT[a, b]
            out.append(c)
            phase += k
        phase %= 4
        if phase % 2:
            raise ValueError("product of anticommuting Paulis is not Hermitian")
        return PauliString("".join(out), self.sign * other.sign * (1 if phase == 0 else -1))

    def commutes(self, other: "PauliString") -> bool:
        anti = sum(a != "I" and b != "I" and a != b for a, b in zip(self.letters, other.letters))
        return anti % 2 == 0

    def __str__(self):
        return ("+" if self.sign > 0 else "-") + self.letters


def _pauli_table():
    table = {}
    for a in "IXYZ":
        for b in "IXYZ":
            m = PAULI_MATRICES[a] @ PAULI_MATRICES[b]
            for c in "IXYZ":
                for k in range(4):
                    if np.allclose(m, (1j**k) * PAULI_MATRICES[c]):
                        table[a, b] = (c, k)
    return table


_PAULI_PRODUCT = _pauli_table()


def pauli_expectation(psi: np.ndarray, pauli) -> np.ndarray | float:
    """<psi| P |psi> for a Pauli string (``str`` or PauliString), real part."""
    if isinstance(pauli, str):
        pauli = PauliString(pauli)
    psi2, single = _batched(psi)
    n = n_qubits_of(psi2)
    if len(pauli) != n:
        raise ValueError(f"Pauli string length {len(pauli)} != {n} qubits")
    flip, sgn, ny = pauli.masks
    idx = np.arange(2**n)
    parity = np.array([bin(v).count("1") & 1 for v in (idx & sgn)])
    phase = (1j**ny) * np.where(parity, -1.0, 1.0) * pauli.sign
    val = np.einsum("bi,bi->b", psi2[:, idx ^ flip].conj(), phase * psi2).real
    return float(val[0]) if single else val
