"""Complete elliptic integrals, Jacobi elliptic functions and the nome.

All routines are self-contained (AGM-based) scalar functions accurate to
near machine precision away from the k -> 1 singularity.  They are pure
functions with no shared state and are safe to call from multiple threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from wellescape.errors import DomainError

__all__ = [
    "K_MODULUS_CUTOFF",
    "EllipticEval",
    "complete_E",
    "complete_K",
    "jacobi",
    "nome",
]

# K(k) diverges logarithmically at k = 1; above this cutoff callers must
# treat the separatrix limit explicitly instead of receiving huge values.
K_MODULUS_CUTOFF = 1.0 - 1e-12

_AGM_TOL = 1e-17
_MAX_ITER = 64


@dataclass(frozen=True)
class EllipticEval:
    """One evaluation of the three Jacobi functions at (u, k)."""

    u: float
    k: float
    sn: float
    cn: float
    dn: float


def _check_modulus(k: float, upper_open: bool) -> None:
    if not math.isfinite(k) or k < 0.0:
        raise DomainError(f"modulus must be finite and non-negative, got {k!r}")
    if upper_open:
        if k > K_MODULUS_CUTOFF:
            raise DomainError(f"modulus {k!r} too close to 1: K(k) diverges")
    elif k > 1.0:
        raise DomainError(f"modulus must be <= 1, got {k!r}")


def complete_K(k: float) -> float:
    """Complete elliptic integral of the first kind via the AGM.

    Valid for 0 <= k < 1 (cutoff at 1 - 1e-12).
    """
    _check_modulus(k, upper_open=True)
    a = 1.0
    b = math.sqrt((1.0 - k) * (1.0 + k))
    for _ in range(_MAX_ITER):
        if abs(a - b) <= _AGM_TOL * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def complete_E(k: float) -> float:
    """Complete elliptic integral of the second kind via the AGM.

    Valid for 0 <= k <= 1; E(1) = 1 exactly.
    """
    _check_modulus(k, upper_open=False)
    if k == 1.0:
        return 1.0
    a = 1.0
    b = math.sqrt((1.0 - k) * (1.0 + k))
    c = k
    csum = 0.5 * c * c
    pow2 = 1.0
    for _ in range(_MAX_ITER):
        if abs(a - b) <= _AGM_TOL * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        pow2 *= 2.0
        csum += 0.5 * pow2 * c * c
    K = math.pi / (2.0 * a)
    return K * (1.0 - csum)


def jacobi(u: float, k: float) -> EllipticEval:
    """Jacobi elliptic functions sn, cn, dn by the descending Landen/AGM
    transformation (Abramowitz & Stegun 16.4).

    The argument is reduced modulo the 4K period before iterating to avoid
    precision loss at large |u|.
    """
    if not math.isfinite(u):
        raise DomainError(f"argument must be finite, got {u!r}")
    _check_modulus(k, upper_open=False)

    if k < 1e-14:
        return EllipticEval(u=u, k=k, sn=math.sin(u), cn=math.cos(u), dn=1.0)
    if k > K_MODULUS_CUTOFF:
        sech = 1.0 / math.cosh(u)
        return EllipticEval(u=u, k=k, sn=math.tanh(u), cn=sech, dn=sech)

    quarter = complete_K(k)
    ur = math.remainder(u, 4.0 * quarter)

    a = [1.0]
    b = math.sqrt((1.0 - k) * (1.0 + k))
    c = [k]
    n = 0
    while abs(c[n]) > _AGM_TOL * a[n] and n < _MAX_ITER:
        an = 0.5 * (a[n] + b)
        c.append(0.5 * (a[n] - b))
        b = math.sqrt(a[n] * b)
        a.append(an)
        n += 1

    phi = float(2 ** n) * a[n] * ur
    phi_prev = phi
    for m in range(n, 0, -1):
        phi_prev = phi
        phi = 0.5 * (phi + math.asin(max(-1.0, min(1.0, c[m] / a[m] * math.sin(phi)))))

    sn = math.sin(phi)
    cn = math.cos(phi)
    denom = math.cos(phi_prev - phi)
    if n > 0 and abs(denom) > 1e-8:
        dn = cn / denom
    else:
        dn = math.sqrt(max(0.0, 1.0 - (k * sn) ** 2))
    return EllipticEval(u=u, k=k, sn=sn, cn=cn, dn=dn)


def nome(k: float) -> float:
    """Elliptic nome Q = exp(-pi * K(k') / K(k)) for k in [0, 1].

    The limit values Q(0) = 0 and Q(1) = 1 are returned exactly.
    """
    if not math.isfinite(k) or k < 0.0 or k > 1.0:
        raise DomainError(f"modulus must lie in [0, 1], got {k!r}")
    if k == 0.0:
        return 0.0
    if k == 1.0:
        return 1.0
    kp = math.sqrt((1.0 - k) * (1.0 + k))
    return math.exp(-math.pi * complete_K(kp) / complete_K(k))
