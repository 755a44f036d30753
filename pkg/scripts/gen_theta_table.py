"""Regenerate the theta_m lookup tables used by the exponential action.

theta_m is the largest theta with htilde_{m+1}(theta) <= tol * theta, where
htilde_{m+1}(x) = sum_{k>m} |c_k| x^k and sum_k c_k x^k is the series of
log(e^{-x} T_m(x)); T_m is the order-m Taylor polynomial of e^x.  tol is
2^-53 (double) or 2^-24 (single).

Run with no arguments; prints both tables in the format embedded in
manitrans/expaction.py.  Uses exact rational series coefficients and
high-precision bisection, so it takes a few minutes.
"""
from fractions import Fraction

import mpmath as mp

mp.mp.dps = 60

ORDERS = list(range(1, 31)) + [35, 40, 45, 50, 55]


def remainder_coeffs(m, degree):
    """Exact coefficients of e^{-x} T_m(x) - 1 up to the given degree."""
    fact = [Fraction(1)]
    for i in range(1, degree + 1):
        fact.append(fact[-1] * i)
    coeffs = [Fraction(0)] * (degree + 1)
    for k in range(m + 1, degree + 1):
        s = Fraction(0)
        for j in range(0, min(m, k) + 1):
            s += Fraction((-1) ** (k - j)) / (fact[k - j] * fact[j])
        coeffs[k] = s
    return coeffs


def poly_mul(a, b, degree):
    out = [mp.mpf(0)] * (degree + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if i + j > degree:
                break
            if bj == 0:
                continue
            out[i + j] += ai * bj
    return out


def htilde_coeffs(m, degree):
    """|coefficients| of log(1 + remainder), truncated."""
    u = [mp.mpf(c.numerator) / mp.mpf(c.denominator)
         for c in remainder_coeffs(m, degree)]
    total = [mp.mpf(0)] * (degree + 1)
    term = u[:]
    i = 1
    while any(t != 0 for t in term):
        sgn = 1 if i % 2 == 1 else -1
        for k in range(degree + 1):
            total[k] += sgn * term[k] / i
        i += 1
        if (m + 1) * i > degree:
            break
        term = poly_mul(term, u, degree)
    return [abs(t) for t in total]


def theta_for(m, tol, extra_degree=160):
    degree = m + extra_degree
    h = htilde_coeffs(m, degree)

    def small_enough(theta):
        s = mp.mpf(0)
        power = mp.mpf(1)
        for k in range(degree + 1):
            if k > 0:
                power *= theta
            s += h[k] * power
        return s <= tol * theta

    lo, hi = mp.mpf("1e-20"), mp.mpf(1)
    while small_enough(hi) and hi < 200:
        lo, hi = hi, 2 * hi
    for _ in range(70):
        mid = (lo + hi) / 2
        if small_enough(mid):
            lo = mid
        else:
            hi = mid
    return lo


def main():
    for label, tol in (("double", mp.mpf(2) ** -53),
                       ("single", mp.mpf(2) ** -24)):
        print(f"THETA_{label.upper()} = {{")
        for m in ORDERS:
            print(f"    {m}: {mp.nstr(theta_for(m, tol), 4)},")
        print("}")


if __name__ == "__main__":
    main()
