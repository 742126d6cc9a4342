import numpy as np
from numba import njit
@njit(cache=True, fastmath=True)
def winding_number_of_path(x, y):
    # closed path; counts signed crossings of the ray (0,0) -> (+inf,0)
    n = 0
    cur = y[0] >= 0
    for i in range(1, x.shape[0]):
        if (y[i] >= 0) != cur:
            cur = y[i] >= 0
            if x[i] > 0 and x[i - 1] > 0:
                n += 2 * cur - 1
            elif not (x[i] <= 0 and x[i - 1] <= 0):
                cross = (x[i - 1] * y[i] - x[i] * y[i - 1]) / (y[i] - y[i - 1])
                if cross > 0:
                    n += 2 * cur - 1
    return n
@njit(cache=True)
def zak_grid(a, lam, u, ts, xis, mirrored):
    nx = xis.shape[0]
    nt = ts.shape[0]
    out = np.empty((nx, nt), dtype=np.complex128)
    for i in range(nx):
        e = a * np.exp(lam * xis[i])
        for j in range(nt):
            z = np.exp(2j * np.pi * ts[j])
            acc = 0j
            for k in range(a.shape[0]):
                acc += e[k] / (1.0 - z * u[k])
            if mirrored:
                acc = -z * acc
            out[i, j] = acc
    return out
@njit(cache=True)
def poly_on_circle(coefs, rho, n):
    # coefs in increasing powers; closed sample path of length n+1
    x = np.empty(n + 1)
    y = np.empty(n + 1)
    for j in range(n):
        z = rho * np.exp(2j * np.pi * j / n)
        acc = 0j
        for s in range(coefs.shape[0] - 1, -1, -1):
            acc = acc * z + coefs[s]
        x[j] = acc.real
        y[j] = acc.imag
    x[n] = x[0]
    y[n] = y[0]
    return x, y
def winding_count(coefs, rho, n=4096):
    x, y = poly_on_circle(np.ascontiguousarray(coefs, dtype=np.complex128), float(rho), int(n))
    return int(winding_number_of_path(x, y))
def winding_count_fn(fn, center, radius, n=2048):
    # argument principle for an arbitrary analytic callable on a circle
    th = 2.0 * np.pi * np.arange(n) / n
    v = np.asarray(fn(center + radius * np.exp(1j * th)), dtype=np.complex128)
    v = np.concatenate([v, v[:1]])
    return int(winding_number_of_path(np.ascontiguousarray(v.real), np.ascontiguousarray(v.imag)))
@njit(cache=True)
def orbit_steps(xi0, tau, inv, levels, tol):
    # point value is always rebuilt as xi0 - n + m*tau from the integer shifts
    ns = [0]
    ms = [0]
    ks = np.zeros(levels, dtype=np.int64)
    n = 0
    m = 0
    status = 0
    for lev in range(levels):
        n += 1
        v = xi0 - n + m * tau
        ns.append(n)
        ms.append(m)
        while v >= 1.0:
            n += 1
            v = xi0 - n + m * tau
            ns.append(n)
            ms.append(m)
        if abs(v) < tol or abs(v - 1.0) < tol:
            status = 1
        c = 0
        while v < 1.0:
            m += 1
            c += 1
            v = xi0 - n + m * tau
            ns.append(n)
            ms.append(m)
            if abs(v - 1.0) < tol or abs(v - inv) < tol:
                status = 1
        ks[lev] = c
        if abs(v - xi0) < tol:
            status = 1
        if status:
            break
    n += 1
    v = xi0 - n + m * tau
    ns.append(n)
    ms.append(m)
    while v >= 1.0:
        n += 1
        v = xi0 - n + m * tau
        ns.append(n)
        ms.append(m)
    return np.array(ns), np.array(ms), ks, status
@njit(cache=True)
def return_times(starts, tau, lo, hi, cap):
    out = np.empty(starts.shape[0], dtype=np.int64)
    for i in range(starts.shape[0]):
        v = starts[i]
        t = 0
        while not (lo <= v <= hi):
            if t >= cap:
                t = -1
                break
            v -= 1.0
            while v >= 1.0:
                v -= 1.0
            while v < 1.0:
                v += tau
            t += 1
        out[i] = t
    return out
