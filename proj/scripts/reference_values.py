"""High-precision reference values frozen into the unit tests (mpmath, 30 digits)."""
import mpmath as mp

mp.mp.dps = 30
E = mp.exp(1j * mp.pi / 4)


def basis(nu, x):
    f1 = lambda t: mp.pcfd(1j * nu, t * E)
    f2 = lambda t: mp.pcfd(-1 - 1j * nu, -t / E)
    p1, p2 = f1(x), f2(x)
    d1, d2 = mp.diff(f1, x), mp.diff(f2, x)
    return p1, p2, d1, d2


def propagator(nu, x, x0):
    s = mp.sqrt(nu)
    w = mp.exp(-1j * mp.pi / 4) * mp.exp(mp.pi * nu / 2)
    p1, p2, _, _ = basis(nu, x)
    q1, q2, dq1, dq2 = basis(nu, x0)
    r1 = (dq1 + 0.5j * x0 * q1) / s
    r2 = (dq2 + 0.5j * x0 * q2) / s
    return s / w * (p1 * r2 - p2 * r1), -s / w * (p1 * q2 - p2 * q1)


def c(z):
    return "{%s, %s}" % (mp.nstr(mp.re(z), 17), mp.nstr(mp.im(z), 17))


print("// basis values phi1, phi2, phi1', phi2'")
for nu, x in [(0.25, 0.7), (0.25, 3.0), (0.25, -2.5), (1.0, 5.0), (0.01, 12.0)]:
    nu, x = mp.mpf(nu), mp.mpf(x)
    print(float(nu), float(x), *[c(v) for v in basis(nu, x)])

print("// layer propagator A, B across x1 = -2 sqrt(nu) .. x2 = 2 sqrt(nu)")
for nu in [0.01, 0.25, 0.5, 1, 2]:
    nu = mp.mpf(nu)
    a, b = propagator(nu, 2 * mp.sqrt(nu), -2 * mp.sqrt(nu))
    print(float(nu), c(a), c(b))

print("// linear crystal L=4.5, K0=894, zeta=38.5, quadratic mismatch 901 - 735 x^2")
for nu, xd in [(0.1, 0.3), (0.1, 0.05), (1.0, 0.4)]:
    nu = mp.mpf(nu)
    delta = 901 - 735 * mp.mpf(xd) ** 2
    root = mp.sqrt(mp.mpf("38.5"))
    x0 = (delta - 894) / root
    x1 = root * mp.mpf("4.5") + x0
    a, b = propagator(nu, x1, x0)
    print(float(nu), xd, c(a), c(b))
