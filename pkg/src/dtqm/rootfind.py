"""Safeguarded scalar root refinement inside a sign-change bracket."""

__all__ = ["bracketed_newton"]


def bracketed_newton(g, dg, lo, hi, g_lo, g_hi, gtol, xtol=0.0, max_iter=80):
    """Refine a root of g inside [lo, hi] by Newton steps with bisection fallback.

    ``g_lo`` and ``g_hi`` are the already-computed endpoint values and must
    differ in sign (zero endpoints are returned immediately). Newton steps
    are taken only while they stay inside the current bracket and shrink it
    fast enough; otherwise the interval is bisected. Returns ``(x, g(x))``;
    the caller decides whether the final residual is acceptable.
    """
    if g_lo == 0.0:
        return lo, 0.0
    if g_hi == 0.0:
        return hi, 0.0
    if (g_lo > 0.0) == (g_hi > 0.0):
        raise ValueError("bracket endpoints must have opposite signs")

    # Orient so that g(xl) < 0 < g(xh).
    if g_lo < 0.0:
        xl, xh = lo, hi
    else:
        xl, xh = hi, lo
    x = 0.5 * (lo + hi)
    dxold = abs(hi - lo)
    dx = dxold
    gx = g(x)
    dgx = dg(x)
    for _ in range(max_iter):
        if abs(gx) <= gtol:
            return x, gx
        newton_leaves = ((x - xh) * dgx - gx) * ((x - xl) * dgx - gx) > 0.0
        too_slow = abs(2.0 * gx) > abs(dxold * dgx)
        if newton_leaves or too_slow or dgx == 0.0:
            dxold = dx
            dx = 0.5 * (xh - xl)
            xnew = xl + dx
        else:
            dxold = dx
            dx = gx / dgx
            xnew = x - dx
        if xnew == x:
            return x, gx
        x = xnew
        gx = g(x)
        dgx = dg(x)
        if gx < 0.0:
            xl = x
        else:
            xh = x
        if abs(xh - xl) <= xtol:
            return x, gx
    return x, gx
