"""Ready-made observables, states and measurement models used by the tests,
the scenario fixtures and the scripts.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .linalg import (
    CNOT,
    SX,
    SY,
    SZ,
    Operator,
    dag,
    expm_hermitian,
    ket,
    make_rng,
    permute_subsystems,
    projector,
    random_density,
    random_unitary,
    tensor,
)
from .models import MeasurementModel, OutcomeCorrespondence
from .observables import Observable


def sigma_z() -> Observable:
    return Observable(SZ, name="Z")


def sigma_x() -> Observable:
    return Observable(SX, name="X")


def spin_observable(theta: float) -> Observable:
    """cos(theta) Z + sin(theta) X: spin along a direction in the x-z plane."""
    return Observable(np.cos(theta) * SZ + np.sin(theta) * SX, name=f"spin({theta:.6g})")


def plus_state() -> Operator:
    return projector((ket(0, 2) + ket(1, 2)) / np.sqrt(2))


def singlet() -> Operator:
    """(|01> - |10>)/sqrt2 as a density operator."""
    v = (np.kron(ket(0, 2), ket(1, 2)) - np.kron(ket(1, 2), ket(0, 2))) / np.sqrt(2)
    return projector(v)


def bell_phi_plus() -> Operator:
    v = (np.kron(ket(0, 2), ket(0, 2)) + np.kron(ket(1, 2), ket(1, 2))) / np.sqrt(2)
    return projector(v)


def default_correspondence(m: MeasurementModel) -> OutcomeCorrespondence:
    """Map each measured eigenvalue to the equal meter eigenvalue."""
    return OutcomeCorrespondence.from_values(m.measured, m.meter)


# ---------------------------------------------------------------------------
# qubit models
# ---------------------------------------------------------------------------

def cnot_model() -> MeasurementModel:
    """Object qubit controls a CNOT onto an ancilla prepared in |0>; the ancilla
    is read out in the Z basis.  Realizes the projective Z instrument.
    """
    return MeasurementModel(projector(ket(0, 2)), CNOT, sigma_z(), sigma_z(), name="cnot")


def rotated_cnot_model(theta: float) -> MeasurementModel:
    """CNOT model conjugated by the rotation taking Z to spin(theta)."""
    r = expm_hermitian(SY, theta / 2)
    big_r = tensor(r, np.eye(2))
    u = big_r @ CNOT @ dag(big_r)
    return MeasurementModel(projector(ket(0, 2)), u, sigma_z(), spin_observable(theta),
                            name=f"cnot({theta:.6g})")


def swap_model(a: Observable) -> MeasurementModel:
    """Swap object and an equal-size ancilla in |0>, then read ``a`` on the ancilla.

    The object ends in |0> whatever the outcome: measure-and-reset.
    """
    d = a.dim
    swap = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            swap[j * d + i, i * d + j] = 1.0
    meter = Observable(a.op, a.tol, name=a.name)
    return MeasurementModel(projector(ket(0, d)), swap, meter, a, name="swap")


def identity_model(measured: Observable, meter: Observable) -> MeasurementModel:
    d, m = measured.dim, meter.dim
    return MeasurementModel(projector(ket(0, m)), np.eye(d * m), meter, measured, name="identity")


# ---------------------------------------------------------------------------
# general dilations
# ---------------------------------------------------------------------------

def _complete_isometry(columns: np.ndarray, positions: Sequence[int], total: int,
                       rng: np.random.Generator) -> np.ndarray:
    """A unitary whose columns at ``positions`` are ``columns``; the rest span the
    orthogonal complement in a random orientation.
    """
    u_svd, _, _ = np.linalg.svd(columns, full_matrices=True)
    complement = u_svd[:, columns.shape[1]:]
    k = complement.shape[1]
    if k:
        g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        q, _ = np.linalg.qr(g)
        complement = complement @ q
    u = np.zeros((total, total), dtype=complex)
    rest = [c for c in range(total) if c not in set(positions)]
    u[:, list(positions)] = columns
    u[:, rest] = complement
    return u


def dilation_model(measured: Observable, kraus: Sequence[Sequence[Operator]], seed=0,
                   env_unitary: Operator | None = None, env_state: Operator | None = None,
                   pad: int = 0, name: str = "dilation") -> MeasurementModel:
    """Unitary model realizing given Kraus operators.

    ``kraus[a]`` lists the Kraus operators of outcome ``a`` (spectrum index of
    ``measured``); they must satisfy sum_k K^dag K = P_a.  The ancilla is a
    pointer register with one level per Kraus operator plus ``pad`` unused
    levels, optionally followed by an environment.  The register starts in |0>
    and its meter assigns the measured eigenvalue to every level of outcome
    ``a``; padded levels get a distinct value that must never fire.

    With ``env_unitary`` (acting on object (x) environment, applied after the
    register coupling) and ``env_state``, the ancilla state is mixed and each
    branch is followed by the environment channel.
    """
    d = measured.dim
    labels = [a for a, ks in enumerate(kraus) for _ in ks]
    flat = [k for ks in kraus for k in ks]
    reg = len(flat) + pad
    iso = np.zeros((d * reg, d), dtype=complex)
    for r, k in enumerate(flat):
        iso += np.kron(np.asarray(k, dtype=complex), ket(r, reg)[:, None])
    rng = make_rng(np.random.SeedSequence([seed, 17]))
    u = _complete_isometry(iso, [i * reg for i in range(d)], d * reg, rng)

    spare = max(measured.spectrum) + 1.0
    meter_vals = [measured.spectrum[a] for a in labels] + [spare] * pad
    meter_op = np.diag(np.asarray(meter_vals, dtype=complex))
    sigma = projector(ket(0, reg))

    if env_unitary is not None:
        e = env_state.shape[0]
        w = permute_subsystems(tensor(env_unitary, np.eye(reg)), [d, e, reg], [0, 2, 1])
        u = w @ tensor(u, np.eye(e))
        meter_op = tensor(meter_op, np.eye(e))
        sigma = tensor(sigma, env_state)
    return MeasurementModel(sigma, u, Observable(meter_op, measured.tol), measured, name=name)


def _block_unitary(blocks: Sequence[Operator], rng: np.random.Generator) -> Operator:
    """Random unitary preserving each range of the orthogonal projectors ``blocks``."""
    d = blocks[0].shape[0]
    v = np.zeros((d, d), dtype=complex)
    for q in blocks:
        vals, vecs = np.linalg.eigh(q)
        basis = vecs[:, vals > 0.5]
        r = basis.shape[1]
        w = random_unitary(r, int(rng.integers(2**63)))
        v += basis @ w @ dag(basis)
    return v


def random_measurement_model(measured: Observable, seed, kraus_rank: int = 1,
                             preserve: Observable | None = None, luders: bool = False,
                             env_dim: int = 1, pad: int = 0) -> MeasurementModel:
    """A random unitary model measuring ``measured``.

    Each outcome a gets ``kraus_rank`` operators c_k V_k P_a with random
    weights c_k and unitaries V_k.  With ``preserve`` (an observable commuting
    with ``measured``) the V_k and the environment coupling are block diagonal
    in its eigenspaces, so the model does not disturb it.  ``luders`` forces
    V_k = I, and ``env_dim`` > 1 adds a mixed environment.
    """
    rng = make_rng(np.random.SeedSequence([seed, 3]))
    d = measured.dim
    blocks = list(preserve.projectors) if preserve is not None else [np.eye(d)]
    kraus = []
    for p in measured.projectors:
        c = rng.random(kraus_rank) + 0.1
        c = np.sqrt(c / c.sum())
        ks = []
        for ck in c:
            v = np.eye(d) if luders else _block_unitary(blocks, rng)
            ks.append(ck * v @ p)
        kraus.append(ks)
    env_u = env_state = None
    if env_dim > 1:
        env_u = sum(tensor(q, random_unitary(env_dim, int(rng.integers(2**63))))
                    for q in blocks)
        env_state = random_density(env_dim, int(rng.integers(2**63)))
    return dilation_model(measured, kraus, seed=seed, env_unitary=env_u, env_state=env_state,
                          pad=pad, name="random")


def random_observable(dim: int, seed, n_distinct: int | None = None) -> Observable:
    """Random Hermitian observable with ``n_distinct`` integer eigenvalues (degenerate
    when ``n_distinct`` < ``dim``).
    """
    rng = make_rng(np.random.SeedSequence([seed, 5]))
    n = dim if n_distinct is None else n_distinct
    vals = np.concatenate([np.arange(n), rng.integers(0, n, size=dim - n)]).astype(float)
    vals = vals - rng.integers(0, 3)
    u = random_unitary(dim, int(rng.integers(2**63)))
    return Observable((u * vals) @ dag(u))


def random_commuting_pair(dim: int, seed) -> tuple[Observable, Observable]:
    """A = f(C), B = g(C) for a random nondegenerate C and random integer f, g
    (both non-constant when dim > 1).
    """
    rng = make_rng(np.random.SeedSequence([seed, 7]))
    u = random_unitary(dim, int(rng.integers(2**63)))
    while True:
        fa = rng.integers(-2, 3, size=dim).astype(float)
        gb = rng.integers(-2, 3, size=dim).astype(float)
        # neither may be a multiple of the identity
        if dim == 1 or (len(set(fa)) > 1 and len(set(gb)) > 1):
            break
    return Observable((u * fa) @ dag(u)), Observable((u * gb) @ dag(u))


# ---------------------------------------------------------------------------
# bipartite embedding
# ---------------------------------------------------------------------------

def embed_local_model(m: MeasurementModel, other_dim: int, position: int = 1) -> MeasurementModel:
    """Lift a model on one factor to H1 (x) H2, acting as identity on the other factor.

    ``position`` 1 places ``m``'s object as H1, 2 as H2.  The measured
    observable becomes A (x) I (resp. I (x) A).
    """
    d, a = m.obj_dim, m.anc_dim
    eye = np.eye(other_dim)
    if position == 1:
        # kron(U, I) is ordered (H1, anc, H2)
        u = permute_subsystems(tensor(m.u, eye), [d, a, other_dim], [0, 2, 1])
        measured = tensor(m.measured.op, eye)
    elif position == 2:
        # kron(I, U) is ordered (H1, H2, anc) already
        u = tensor(eye, m.u)
        measured = tensor(eye, m.measured.op)
    else:
        raise ValueError("position must be 1 or 2")
    name = f"{m.name}@{position}" if m.name else f"local@{position}"
    return MeasurementModel(m.sigma, u, m.meter, Observable(measured, m.measured.tol), name=name)
