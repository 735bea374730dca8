"""Compiled time loop for :func:`eitcascade.solver.simulate_interface`.

Same arithmetic as the numpy path (coupled RK4, trapezoidal z-integration at
every stage), written element-wise so numba can fuse it.
"""

import numpy as np
from numba import njit

OK, HERMITICITY, TRACE, POSITIVITY, NONFINITE = 0, 1, 2, 3, 4


@njit(cache=True)
def _rhs(rho, boundary, om, out, Ez, H, delta1, delta12, g31, g32, g12, coef, kappa, half_dz):
    n = rho.shape[0]
    # field from ⟨σ31⟩ = ρ[0, 2]
    Ez[0] = boundary
    acc = 0.0 + 0.0j
    for j in range(1, n):
        acc += (rho[j, 0, 2] + rho[j - 1, 0, 2]) * half_dz
        Ez[j] = boundary + coef * acc
    g3 = g31 + g32
    for j in range(n):
        wp = kappa * np.conj(Ez[j])
        H[0, 0] = 0.0
        H[1, 1] = delta12
        H[2, 2] = delta1
        H[2, 0] = wp
        H[0, 2] = np.conj(wp)
        H[2, 1] = om
        H[1, 2] = om
        H[0, 1] = 0.0
        H[1, 0] = 0.0
        for a in range(3):
            for b in range(3):
                c = 0.0 + 0.0j
                for k in range(3):
                    c += H[a, k] * rho[j, k, b] - rho[j, a, k] * H[k, b]
                out[j, a, b] = -1j * c
        p3 = rho[j, 2, 2]
        out[j, 0, 0] += 2.0 * g31 * p3
        out[j, 1, 1] += 2.0 * g32 * p3
        for b in range(3):
            out[j, 2, b] -= g3 * rho[j, 2, b]
            out[j, b, 2] -= g3 * rho[j, b, 2]
        # ground-state dephasing: Lindblad operator sqrt(2 g12) σ22
        out[j, 0, 1] -= g12 * rho[j, 0, 1]
        out[j, 1, 0] -= g12 * rho[j, 1, 0]
        out[j, 1, 2] -= g12 * rho[j, 1, 2]
        out[j, 2, 1] -= g12 * rho[j, 2, 1]


@njit(cache=True)
def _min_eig_herm3(r):
    # closed-form eigenvalues of a 3x3 Hermitian matrix (trigonometric method)
    a00 = r[0, 0].real
    a11 = r[1, 1].real
    a22 = r[2, 2].real
    p1 = abs(r[0, 1]) ** 2 + abs(r[0, 2]) ** 2 + abs(r[1, 2]) ** 2
    q = (a00 + a11 + a22) / 3.0
    p2 = (a00 - q) ** 2 + (a11 - q) ** 2 + (a22 - q) ** 2 + 2.0 * p1
    if p2 <= 0.0:
        return q
    p = np.sqrt(p2 / 6.0)
    b00 = (a00 - q) / p
    b11 = (a11 - q) / p
    b22 = (a22 - q) / p
    b01 = r[0, 1] / p
    b02 = r[0, 2] / p
    b12 = r[1, 2] / p
    det = (b00 * b11 * b22 + 2.0 * (b01 * b12 * np.conj(b02)).real
           - b00 * abs(b12) ** 2 - b11 * abs(b02) ** 2 - b22 * abs(b01) ** 2)
    half = det / 2.0
    if half <= -1.0:
        phi = np.pi / 3.0
    elif half >= 1.0:
        phi = 0.0
    else:
        phi = np.arccos(half) / 3.0
    return q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)


@njit(cache=True)
def _check(rho, positivity):
    n = rho.shape[0]
    for j in range(n):
        tr = rho[j, 0, 0] + rho[j, 1, 1] + rho[j, 2, 2]
        for a in range(3):
            for b in range(3):
                v = rho[j, a, b]
                if not (np.isfinite(v.real) and np.isfinite(v.imag)):
                    return NONFINITE, j
                if abs(v - np.conj(rho[j, b, a])) >= 1e-10:
                    return HERMITICITY, j
        if not abs(tr - 1.0) < 1e-9:
            return TRACE, j
        if positivity and not _min_eig_herm3(rho[j]) > -1e-8:
            return POSITIVITY, j
    return OK, -1


@njit(cache=True)
def run(rho, E0, E_mid, Om, Om_mid, dt, delta1, delta12, g31, g32, g12, coef, kappa,
        half_dz, snap_index, check_every, envelope, spinwave):
    """Integrate in place; returns (status, step, cell)."""
    n = rho.shape[0]
    nt = E0.shape[0]
    k1 = np.empty_like(rho)
    k2 = np.empty_like(rho)
    k3 = np.empty_like(rho)
    k4 = np.empty_like(rho)
    tmp = np.empty_like(rho)
    Ez = np.empty(n, dtype=np.complex128)
    H = np.zeros((3, 3), dtype=np.complex128)
    h = 0.5 * dt
    for k in range(nt - 1):
        _rhs(rho, E0[k], Om[k], k1, Ez, H, delta1, delta12, g31, g32, g12, coef, kappa, half_dz)
        for j in range(n):
            envelope[j, k] = Ez[j]
        if k == snap_index:
            for j in range(n):
                spinwave[j] = rho[j, 1, 0]
        for j in range(n):
            for a in range(3):
                for b in range(3):
                    tmp[j, a, b] = rho[j, a, b] + h * k1[j, a, b]
        _rhs(tmp, E_mid[k], Om_mid[k], k2, Ez, H, delta1, delta12, g31, g32, g12, coef, kappa, half_dz)
        for j in range(n):
            for a in range(3):
                for b in range(3):
                    tmp[j, a, b] = rho[j, a, b] + h * k2[j, a, b]
        _rhs(tmp, E_mid[k], Om_mid[k], k3, Ez, H, delta1, delta12, g31, g32, g12, coef, kappa, half_dz)
        for j in range(n):
            for a in range(3):
                for b in range(3):
                    tmp[j, a, b] = rho[j, a, b] + dt * k3[j, a, b]
        _rhs(tmp, E0[k + 1], Om[k + 1], k4, Ez, H, delta1, delta12, g31, g32, g12, coef, kappa, half_dz)
        for j in range(n):
            for a in range(3):
                for b in range(3):
                    rho[j, a, b] += (dt / 6.0) * (k1[j, a, b] + 2.0 * k2[j, a, b]
                                                  + 2.0 * k3[j, a, b] + k4[j, a, b])
        if check_every > 0 and (k + 1) % check_every == 0:
            status, cell = _check(rho, True)
            if status != OK:
                return status, k + 1, cell
    # field at the last sample
    Ez[0] = E0[nt - 1]
    acc = 0.0 + 0.0j
    for j in range(1, n):
        acc += (rho[j, 0, 2] + rho[j - 1, 0, 2]) * half_dz
        Ez[j] = E0[nt - 1] + coef * acc
    for j in range(n):
        envelope[j, nt - 1] = Ez[j]
    if snap_index >= nt - 1:
        for j in range(n):
            spinwave[j] = rho[j, 1, 0]
    return OK, nt - 1, -1
