"""Modified Bessel function of the first kind, integer order.

Only integer orders occur in this package (they are differences of crossing
counts), so the power series

    I_nu(z) = sum_k (z/2)^(2k+|nu|) / (k! (k+|nu|)!)

is summed directly, in linear scale when it fits in a double and in log
scale with a running-max rescaling otherwise. The order's sign is dropped
up front (I_nu = I_-nu for integer nu), so symmetry holds exactly by
construction. Truncation: stop once the next term falls below REL_TOL
times the partial sum, with a hard cap of MAX_TERMS terms (factorial decay
makes the cap unreachable for any argument a double can hold).

``log_bessel_i(nu, 0.0)`` returns ``-inf`` for nu != 0: that is the
zero-density sentinel the density evaluators propagate.
"""

import math

from .errors import NegativeArgument, Overflow

REL_TOL = 1e-16
MAX_TERMS = 10_000

_LOG_REL_TOL = math.log(REL_TOL)

# ln(n!) by cumulative accumulation of ln k, extended on demand.
_lnfact_table = [0.0, 0.0]


def _lnfact(n):
    table = _lnfact_table
    while len(table) <= n:
        table.append(table[-1] + math.log(len(table)))
    return table[n]


def bessel_i(nu, z):
    """I_nu(z) for integer nu and z >= 0, linear scale.

    Raises
    ------
    NegativeArgument
        If z < 0.
    Overflow
        If the value exceeds double range; callers should switch to
        :func:`log_bessel_i`.
    """
    nu = abs(int(nu))
    z = float(z)
    if z < 0.0:
        raise NegativeArgument("bessel_i needs z >= 0, got %r" % z)
    if z == 0.0:
        return 1.0 if nu == 0 else 0.0
    half = 0.5 * z
    q = half * half
    # k = 0 term, (z/2)^nu / nu!, assembled in log scale so large nu
    # underflows gracefully instead of tripping pow overflow.
    term = math.exp(nu * math.log(half) - _lnfact(nu))
    total = term
    for k in range(1, MAX_TERMS + 1):
        term *= q / (k * (k + nu))
        total += term
        if math.isinf(total):
            raise Overflow("I_%d(%g) exceeds double range" % (nu, z))
        if term < REL_TOL * total:
            break
        if total == 0.0:  # leading terms underflowed; value is 0 at this scale
            break
    return total


def log_bessel_i(nu, z):
    """ln I_nu(z) for integer nu and z >= 0.

    Returns ``-inf`` when the value is exactly zero (z == 0, nu != 0).
    Term-wise summation in log scale: terms are accumulated relative to a
    running maximum, so arguments far beyond linear-scale overflow stay
    accurate.
    """
    nu = abs(int(nu))
    z = float(z)
    if z < 0.0:
        raise NegativeArgument("log_bessel_i needs z >= 0, got %r" % z)
    if z == 0.0:
        return 0.0 if nu == 0 else -math.inf
    ln_half = math.log(0.5 * z)
    peak = 0.25 * z * z  # terms grow while k(k+nu) < (z/2)^2

    lt = nu * ln_half - _lnfact(nu)  # k = 0
    m = lt
    acc = 1.0
    for k in range(1, MAX_TERMS + 1):
        lt = (2 * k + nu) * ln_half - _lnfact(k) - _lnfact(k + nu)
        if lt > m:
            acc = acc * math.exp(m - lt) + 1.0
            m = lt
        else:
            acc += math.exp(lt - m)
            if k * (k + nu) > peak and lt - m < _LOG_REL_TOL:
                break
    return m + math.log(acc)
