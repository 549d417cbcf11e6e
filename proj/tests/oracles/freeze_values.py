"""Extended-precision reference values frozen into the C++ tests.

Run with `python3 tests/oracles/freeze_values.py`. Nothing here shares code
with the library: coefficients come from mpmath 2x2 solves, and transverse
profiles come from high-order Taylor integration plus linear shooting of the
reduced system

    u'' = 2 N^2 W' + a,        Rc W'' = 4 N^2 W - 2 N^2 u' - b,

with W(0) = W(h) = 0, u(h) = 0 and the regime condition on u at z = 0.
Here a = (dp/dx - f) for one planar component and b the matching
microrotation load (g2 for the first component).
"""
import mpmath as mp

mp.mp.dps = 40


def k_of(N, Rc):
    N, Rc = mp.mpf(N), mp.mpf(Rc)
    return 2 * N * mp.sqrt((1 - N**2) / Rc)


def solve2(Q, r):
    det = Q[0][0] * Q[1][1] - Q[0][1] * Q[1][0]
    return ((r[0] * Q[1][1] - Q[0][1] * r[1]) / det,
            (Q[0][0] * r[1] - Q[1][0] * r[0]) / det)


def q_lambda(h, N, k, lam, sign):
    # sign=-1: matrix consistent with u'(0) = lam u(0); sign=+1: as printed.
    x = k * h
    return [[2 * N**2 / k * mp.sinh(x) - 2 * h + sign * 2 / lam * (1 - N**2),
             2 * N**2 / k * (mp.cosh(x) - 1)],
            [mp.cosh(x) - 1, mp.sinh(x)]]


def shoot(regime, h, N, Rc, a, b, lam=None, zs=()):
    h, N, Rc, a, b = map(mp.mpf, (h, N, Rc, a, b))
    N2 = N**2

    def rhs(z, y):
        u, du, w, dw, iu = y
        return [du, 2 * N2 * dw + a, dw, (4 * N2 * w - 2 * N2 * du - b) / Rc, u]

    def integrate(y0, include_load):
        nonlocal a, b
        sa, sb = a, b
        if not include_load:
            a, b = mp.mpf(0), mp.mpf(0)
        f = mp.odefun(rhs, 0, y0)
        out = {z: f(mp.mpf(z)) for z in list(zs) + [h]}
        a, b = sa, sb
        return out

    # free parameters: s1 = u-ish unknown, s2 = W'(0)
    if regime == "noslip":
        bases = [[0, 1, 0, 0, 0], [0, 0, 0, 1, 0]]
    elif regime == "perfect":
        bases = [[1, 0, 0, 0, 0], [0, 0, 0, 1, 0]]
    else:
        lam = mp.mpf(lam)
        bases = [[1, lam, 0, 0, 0], [0, 0, 0, 1, 0]]
    part = integrate([0, 0, 0, 0, 0], True)
    homs = [integrate(bv, False) for bv in bases]
    M = mp.matrix([[homs[0][h][0], homs[1][h][0]], [homs[0][h][2], homs[1][h][2]]])
    r = mp.matrix([-part[h][0], -part[h][2]])
    s = mp.lu_solve(M, r)
    res = {}
    for z in list(zs) + [h]:
        y = [part[z][i] + s[0] * homs[0][z][i] + s[1] * homs[1][z][i] for i in range(5)]
        res[z] = y
    return res


def main():
    print("k(0.8, 0.36) =", mp.nstr(k_of("0.8", "0.36"), 20))
    h, N, Rc = mp.mpf(1), mp.mpf("0.5"), mp.mpf("0.75")
    k = k_of(N, Rc)
    for sign, name in ((-1, "partial consistent"), (1, "partial printed")):
        Q = q_lambda(h, N, k, mp.mpf(1), sign)
        A1, B1 = solve2(Q, (h, 1))
        A2, B2 = solve2(Q, (1, 0))
        print(name, "A1 B1 A2 B2 =", *[mp.nstr(v, 20) for v in (A1, B1, A2, B2)])
    print("0.5*coth(0.5) =", mp.nstr(mp.coth(mp.mpf("0.5")) / 2, 20))
    print("coth(1e-3)/2 at kh=1e-3 =", mp.nstr(mp.coth(mp.mpf("0.5e-3")) / 2, 25))
    print("1/sinh(1) =", mp.nstr(1 / mp.sinh(1), 20))
    print("1-0.5cosh(1) =", mp.nstr(1 - mp.cosh(1) / 2, 20))
    print("1-0.5coth(1) =", mp.nstr(1 - mp.coth(1) / 2, 20))
    phi = mp.mpf(1) / 12 + Rc / (4 * h**2 * (1 - N**2)) - 1 / (4 * h) * mp.sqrt(N**2 * Rc / (1 - N**2)) * mp.coth(N * h * mp.sqrt((1 - N**2) / Rc))
    print("Phi(1,.5,.75) =", mp.nstr(phi, 20))
    print("Theta1^0 printed(h=1) =", mp.nstr(1 + mp.mpf("0.75") * (1 - mp.coth(1)), 20))
    for regime, lam in (("noslip", None), ("perfect", None), ("partial", 1)):
        for a, b in ((1, 0), (0, 1)):
            r = shoot(regime, h, N, Rc, a, b, lam, zs=(mp.mpf("0.5"),))
            y = r[mp.mpf("0.5")]
            print(regime, "a=%d b=%d" % (a, b), "u(.5) =", mp.nstr(y[0], 20),
                  "W(.5) =", mp.nstr(y[2], 20), "int u =", mp.nstr(r[h][4], 20))


if __name__ == "__main__":
    main()
