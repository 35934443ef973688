"""Dense primal-dual interior-point solver for second-order cone programs.

Solves  minimize c'x  subject to  G x + s = h,  s in K,
where K is a product of second-order cones (each of dimension >= 2 with
first coordinate the cone "height"). Mehrotra-style predictor-corrector
with Nesterov-Todd scaling; the Newton system is reduced to dense normal
equations G' W^-2 G, suitable for the small per-BS subproblems here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError

STEP_FRACTION = 0.99


@dataclass
class SocpResult:
    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    status: str            # optimal | infeasible | max-iter
    iterations: int
    gap: float             # final complementarity s'z
    pres: float
    dres: float
    cert_res: float = np.inf  # infeasibility-certificate residual


class _Cones:
    """Product of second-order cones with vectorized Jordan-algebra ops."""

    def __init__(self, dims):
        if any(d < 2 for d in dims):
            raise ValueError("second-order cones need dimension >= 2")
        self.dims = list(dims)
        self.n = sum(dims)
        self.offsets = np.cumsum([0] + self.dims[:-1])
        self.slices = [slice(o, o + d) for o, d in zip(self.offsets, self.dims)]

    def unit(self):
        e = np.zeros(self.n)
        e[self.offsets] = 1.0
        return e

    def inside(self, u, margin=0.0):
        return all(u[sl][0] - np.linalg.norm(u[sl][1:]) > margin
                   for sl in self.slices)

    def jnorm2(self, u):
        """Per-cone hyperbolic norm u0^2 - ||u1||^2."""
        return np.array([u[sl][0] ** 2 - u[sl][1:] @ u[sl][1:]
                         for sl in self.slices])

    def jdot(self, u, v):
        return np.array([u[sl][0] * v[sl][0] - u[sl][1:] @ v[sl][1:]
                         for sl in self.slices])

    def prod(self, u, v):
        """Jordan product per cone: (u'v, u0 v1 + v0 u1)."""
        out = np.empty(self.n)
        for sl in self.slices:
            uu, vv = u[sl], v[sl]
            out[sl][...] = 0.0
            out[sl.start] = uu @ vv
            out[sl.start + 1:sl.stop] = uu[0] * vv[1:] + vv[0] * uu[1:]
        return out

    def linv(self, lam, d):
        """Solve lam o u = d per cone (arrow-matrix inverse)."""
        out = np.empty(self.n)
        for sl in self.slices:
            a, b = lam[sl][0], lam[sl][1:]
            d0, d1 = d[sl][0], d[sl][1:]
            det = a * a - b @ b
            u0 = (a * d0 - b @ d1) / det
            out[sl.start] = u0
            out[sl.start + 1:sl.stop] = (d1 - u0 * b) / a
        return out

    def max_step(self, u, du):
        """Largest alpha with u + alpha*du in the cone (per cone, min)."""
        best = np.inf
        for sl in self.slices:
            u0, u1 = u[sl][0], u[sl][1:]
            d0, d1 = du[sl][0], du[sl][1:]
            a = d0 * d0 - d1 @ d1
            b = 2.0 * (u0 * d0 - u1 @ d1)
            cc = u0 * u0 - u1 @ u1
            roots = []
            if abs(a) < 1e-300:
                if b < 0.0:
                    roots.append(-cc / b)
            else:
                disc = b * b - 4.0 * a * cc
                if disc >= 0.0:
                    sq = np.sqrt(disc)
                    roots.extend([(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)])
            pos = [r for r in roots if r > 0.0]
            # height can hit zero before the quadratic does
            if d0 < 0.0:
                pos.append(-u0 / d0)
            if pos:
                best = min(best, min(pos))
        return best


class _Scaling:
    """Nesterov-Todd scaling W with W z = W^-1 s = lambda (W symmetric)."""

    def __init__(self, cones, s, z):
        self.cones = cones
        self.v = np.empty(cones.n)
        self.beta = np.empty(len(cones.dims))
        sn2, zn2 = cones.jnorm2(s), cones.jnorm2(z)
        if np.any(sn2 <= 0.0) or np.any(zn2 <= 0.0):
            raise NumericalError("iterate left the cone interior")
        for k, sl in enumerate(cones.slices):
            snorm, znorm = np.sqrt(sn2[k]), np.sqrt(zn2[k])
            sbar, zbar = s[sl] / snorm, z[sl] / znorm
            gamma = np.sqrt((1.0 + sbar @ zbar) / 2.0)
            jz = zbar.copy()
            jz[1:] *= -1.0
            vk = (sbar + jz) / (2.0 * gamma)
            # hyperbolic Householder form: reflect through the midpoint with e
            vk[0] += 1.0
            self.v[sl] = vk / np.sqrt(2.0 * vk[0])
            self.beta[k] = np.sqrt(snorm / znorm)

    def _apply(self, u, inverse):
        cones = self.cones
        if u.ndim == 1:
            u = u[:, None]
            squeeze = True
        else:
            squeeze = False
        out = np.empty_like(u)
        for k, sl in enumerate(cones.slices):
            v = self.v[sl]
            ju = u[sl].copy()
            ju[1:] *= -1.0
            if inverse:
                jv = v.copy()
                jv[1:] *= -1.0
                out[sl] = (2.0 * np.outer(jv, jv @ u[sl]) - ju) / self.beta[k]
            else:
                out[sl] = self.beta[k] * (2.0 * np.outer(v, v @ u[sl]) - ju)
        return out[:, 0] if squeeze else out

    def w(self, u):
        return self._apply(np.asarray(u, dtype=float), inverse=False)

    def winv(self, u):
        return self._apply(np.asarray(u, dtype=float), inverse=True)


def _initial_point(c, G, h, cones):
    """Least-squares start pushed strictly inside the cones."""
    x0, *_ = np.linalg.lstsq(G, h, rcond=None)
    s = h - G @ x0
    z = np.zeros(cones.n)
    zscale = max(1.0, float(np.linalg.norm(c)))
    for sl in cones.slices:
        tail = np.linalg.norm(s[sl][1:])
        pad = max(1.0, 0.1 * tail, -2.0 * (s[sl][0] - tail))
        if s[sl][0] - tail < 0.1 * pad:
            s[sl.start] = tail + pad
        z[sl.start] = zscale
    return x0, s, z


def solve_socp(c, G, h, dims, feas_tol=1e-8, gap_tol=1e-7, max_iter=100):
    """Solve the cone program; see module docstring for the form.

    Returns SocpResult. status 'infeasible' carries a certificate residual
    (norm of G'z for the normalized improving dual ray).
    """
    c = np.asarray(c, dtype=float)
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    cones = _Cones(dims)
    ncones = len(cones.dims)
    if G.shape != (cones.n, c.size):
        raise ValueError("G shape inconsistent with cone dims / variable count")

    gcol = max(1.0, float(np.max(np.linalg.norm(G, axis=0))))
    hnorm = max(1.0, float(np.linalg.norm(h)))
    cnorm = max(1.0, float(np.linalg.norm(c)))

    x, s, z = _initial_point(c, G, h, cones)
    e = cones.unit()

    for it in range(1, max_iter + 1):
        rp = G @ x + s - h
        rd = G.T @ z + c
        gap = float(s @ z)
        mu = gap / ncones
        pres = float(np.linalg.norm(rp)) / hnorm
        dres = float(np.linalg.norm(rd)) / cnorm
        obj = float(c @ x)
        relgap = gap / max(1.0, abs(obj))

        if pres <= feas_tol and dres <= feas_tol and relgap <= gap_tol:
            return SocpResult(x=x, s=s, z=z, status="optimal", iterations=it,
                              gap=gap, pres=pres, dres=dres)

        hz = float(h @ z)
        if hz < 0.0:
            zn = float(np.linalg.norm(z))
            cert = float(np.linalg.norm(G.T @ z))
            if cert <= 1e-7 * gcol * zn and -hz > 1e-10 * hnorm * zn:
                return SocpResult(x=x, s=s, z=z / (-hz), status="infeasible",
                                  iterations=it, gap=gap, pres=pres, dres=dres,
                                  cert_res=cert / (-hz))

        scal = _Scaling(cones, s, z)
        lam = scal.w(z)

        gt = scal.winv(G)
        normal = gt.T @ gt
        try:
            cho = scipy.linalg.cho_factor(normal, lower=True)
        except scipy.linalg.LinAlgError:
            ridge = 1e-12 * max(1.0, np.trace(normal) / normal.shape[0])
            try:
                cho = scipy.linalg.cho_factor(
                    normal + ridge * np.eye(normal.shape[0]), lower=True)
            except scipy.linalg.LinAlgError as exc:
                raise NumericalError("normal equations not positive definite") from exc

        winv_rp = scal.winv(rp)

        def newton(bs):
            rhs = -rd - gt.T @ (bs + winv_rp)
            dx = scipy.linalg.cho_solve(cho, rhs)
            ds = -rp - G @ dx
            dz = scal.winv(bs - scal.winv(ds))
            return dx, ds, dz

        # predictor
        dx_a, ds_a, dz_a = newton(-lam)
        alpha_a = min(cones.max_step(s, ds_a), cones.max_step(z, dz_a), 1.0)
        mu_a = float((s + alpha_a * ds_a) @ (z + alpha_a * dz_a)) / ncones
        sigma = min(1.0, max(0.0, mu_a / mu)) ** 3

        # corrector
        corr = cones.prod(scal.winv(ds_a), scal.w(dz_a))
        d_s = cones.prod(lam, lam) + corr - sigma * mu * e
        dx, ds, dz = newton(-cones.linv(lam, d_s))

        alpha = min(1.0, STEP_FRACTION * min(cones.max_step(s, ds),
                                             cones.max_step(z, dz)))
        x = x + alpha * dx
        s = s + alpha * ds
        z = z + alpha * dz

    return SocpResult(x=x, s=s, z=z, status="max-iter", iterations=max_iter,
                      gap=float(s @ z), pres=float(np.linalg.norm(G @ x + s - h)) / hnorm,
                      dres=float(np.linalg.norm(G.T @ z + c)) / cnorm)
