"""Brute-force reference computations, written with explicit index loops and
no calls into simulmeas.  Expected values in the tests are derived here.
"""

import itertools
import math


def kron_loops(a, b):
    ra, rb = len(a), len(b)
    out = [[0j] * (ra * rb) for _ in range(ra * rb)]
    for i, j, k, l in itertools.product(range(ra), range(ra), range(rb), range(rb)):
        out[i * rb + k][j * rb + l] = a[i][j] * b[k][l]
    return out


def ptrace2_loops(x, d1, d2):
    out = [[0j] * d1 for _ in range(d1)]
    for i in range(d1):
        for j in range(d1):
            out[i][j] = sum(x[i * d2 + k][j * d2 + k] for k in range(d2))
    return out


def matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def dagger(a):
    return [[a[j][i].conjugate() for j in range(len(a))] for i in range(len(a[0]))]


def trace(a):
    return sum(a[i][i] for i in range(len(a)))


def outer(v):
    return [[x * y.conjugate() for y in v] for x in v]


def basis_permutation(perm, n):
    """Unitary sending |i> to |perm[i]>."""
    u = [[0j] * n for _ in range(n)]
    for i in range(n):
        u[perm[i]][i] = 1.0
    return u


CNOT_PERM = [0, 1, 3, 2]  # |00>,|01>,|10>,|11> -> |00>,|01>,|11>,|10>


def cnot_nonselective(rho):
    """Tr_A[CNOT (rho (x) |0><0|) CNOT^dag] by explicit loops."""
    sigma = [[1, 0], [0, 0]]
    u = basis_permutation(CNOT_PERM, 4)
    big = matmul(matmul(u, kron_loops(rho, sigma)), dagger(u))
    return ptrace2_loops(big, 2, 2)


def cnot_branch(rho, meter_value):
    """Unnormalized conditional state when the ancilla reads |meter_value>."""
    sigma = [[1, 0], [0, 0]]
    u = basis_permutation(CNOT_PERM, 4)
    big = matmul(matmul(u, kron_loops(rho, sigma)), dagger(u))
    m = [[0j, 0j], [0j, 0j]]
    m[meter_value][meter_value] = 1.0
    p = kron_loops([[1, 0], [0, 1]], m)
    return ptrace2_loops(matmul(matmul(p, big), p), 2, 2)


def qubit_projectors(name):
    """Eigenprojectors (value +1, value -1) written out by hand."""
    if name == "Z":
        return [[1, 0], [0, 0]], [[0, 0], [0, 1]]
    if name == "X":
        return [[0.5, 0.5], [0.5, 0.5]], [[0.5, -0.5], [-0.5, 0.5]]
    raise KeyError(name)


def spin_projectors(theta):
    """(I + n.sigma)/2 and (I - n.sigma)/2 for n = (sin t, 0, cos t)."""
    c, s = math.cos(theta), math.sin(theta)
    plus = [[(1 + c) / 2, s / 2], [s / 2, (1 - c) / 2]]
    minus = [[(1 - c) / 2, -s / 2], [-s / 2, (1 + c) / 2]]
    return plus, minus


def singlet_amplitudes():
    r = 1 / math.sqrt(2)
    return [0, r, -r, 0]


def singlet_joint(theta):
    """P(a, b) for Z on qubit 1 and spin(theta) on qubit 2, summed amplitude by amplitude."""
    psi = singlet_amplitudes()
    zp, zm = qubit_projectors("Z")
    sp, sm = spin_projectors(theta)
    out = {}
    for a, pa in ((1, zp), (-1, zm)):
        for b, pb in ((1, sp), (-1, sm)):
            proj = kron_loops(pa, pb)
            out[(a, b)] = sum(psi[i].conjugate() * proj[i][j] * psi[j]
                              for i in range(4) for j in range(4)).real
    return out


def transpose_choi_eigenvalues():
    """The Choi matrix of the 2x2 transpose is the swap: eigenvalues of the
    4x4 permutation matrix found by brute-force characteristic polynomial roots.
    """
    choi = [[0.0] * 4 for _ in range(4)]
    for i, j in itertools.product(range(2), repeat=2):
        # e_ij (x) e_ji
        choi[i * 2 + j][j * 2 + i] = 1.0
    # the swap fixes |00>,|11>,|01>+|10> and negates |01>-|10>
    vecs = {1.0: [[1, 0, 0, 0], [0, 0, 0, 1], [0, 1, 1, 0]], -1.0: [[0, 1, -1, 0]]}
    found = []
    for lam, vs in vecs.items():
        for v in vs:
            w = [sum(choi[r][c] * v[c] for c in range(4)) for r in range(4)]
            assert all(abs(w[r] - lam * v[r]) < 1e-15 for r in range(4))
            found.append(lam)
    return sorted(found)
