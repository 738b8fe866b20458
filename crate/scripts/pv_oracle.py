"""Independent mpmath reference for |p.v. ∫ e^{iP(t)} dt/t| with odd P.

Usage: python3 pv_oracle.py DESCRIPTOR.json [...]

Each file is a polynomial descriptor as written by `oscint construct`. For odd
P the real part cancels and the value is 2|∫_0^∞ sin P(t)/t dt|. The head on
[0, 2] uses plain quadrature; the tail is split at the zeros of sin P and the
partial sums are repeatedly averaged. This assumes P is monotone beyond t = 2,
which holds for the extremal family.
"""

import json
import sys

import mpmath as mp

mp.mp.dps = 30


def coefficient(s):
    if "/" in s:
        p, q = s.split("/")
        return mp.mpf(int(p)) / int(q)
    return mp.mpf(s)


def pv_value(c):
    P = lambda t: mp.polyval(c[::-1], t)
    slope0 = c[1] if len(c) > 1 else mp.mpf(0)
    head = mp.quad(lambda t: mp.sin(P(t)) / t if t != 0 else slope0, mp.linspace(0, 2, 400))
    sign = 1 if P(6) > P(2) else -1
    k0 = int(mp.ceil(P(2) / mp.pi)) if sign > 0 else int(mp.floor(P(2) / mp.pi))

    def zero(k):
        lo, hi = mp.mpf(2), mp.mpf(6)
        while sign * P(hi) < sign * k * mp.pi:
            hi *= 2
        for _ in range(200):
            mid = (lo + hi) / 2
            if sign * P(mid) < sign * k * mp.pi:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2

    prev = zero(k0)
    sums = [mp.quad(lambda t: mp.sin(P(t)) / t, [2, prev])]
    for k in range(k0 + sign, k0 + 60 * sign, sign):
        z = zero(k)
        sums.append(sums[-1] + mp.quad(lambda t: mp.sin(P(t)) / t, [prev, z]))
        prev = z
    for _ in range(30):
        sums = [(a + b) / 2 for a, b in zip(sums, sums[1:])]
    return 2 * abs(head + sums[-1])


for path in sys.argv[1:]:
    with open(path) as f:
        desc = json.load(f)
    c = [coefficient(s) for s in desc["coeffs"]]
    print(desc["degree"], mp.nstr(pv_value(c), 15))
