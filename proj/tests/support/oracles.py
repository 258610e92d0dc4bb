"""Independent reference computations for the frozen values in the C++ tests.

Run with: python3 tests/support/oracles.py
Uses exact fractions for the Ulam entries of linear branches, a closed-form
inverse for the Moebius branch, and numpy's dense LAPACK eigensolver.
"""
from fractions import Fraction as F
import math

import numpy as np


def ten_branch():
    br = [(F(0), F(1, 10), lambda x: 9 * x / (1 - x), lambda y: y / (9 + y))]
    for i in range(1, 10):
        br.append((F(i, 10), F(i + 1, 10), (lambda i: lambda x: 10 * x - i)(i), (lambda i: lambda y: (y + i) / 10)(i)))
    return br


def linear_map(pieces):
    """pieces: list of (lo, hi, slope, intercept) as Fractions."""
    out = []
    for lo, hi, s, c in pieces:
        out.append((lo, hi, (lambda s, c: lambda x: s * x + c)(s, c), (lambda s, c: lambda y: (y - c) / s)(s, c)))
    return out


def ulam(branches, n):
    """Entry (i, j) = n * |T_b^-1(bin j) cap bin i| summed over branches, exact."""
    P = np.zeros((n, n))
    h = F(1, n)
    for i in range(n):
        lo, hi = i * h, (i + 1) * h
        for a, b, f, fi in branches:
            L, R = max(lo, a), min(hi, b)
            if R <= L:
                continue
            y0, y1 = sorted((f(L), f(R)))
            j0 = max(0, math.floor(y0 * n))
            j1 = min(n, math.ceil(y1 * n))
            for j in range(j0, j1):
                t0, t1 = max(y0, j * h), min(y1, (j + 1) * h)
                if t1 > t0:
                    P[i, j] += float(abs(fi(t1) - fi(t0)) * n)
    return P


def density(P):
    n = P.shape[0]
    w, v = np.linalg.eig(P.T)
    k = np.argmin(abs(w - 1))
    phi = np.real(v[:, k])
    return phi / (phi.sum() / n)


def q_norms(P, phi, count, column):
    n = P.shape[0]
    Pi = np.outer(np.ones(n), phi / n)
    axis = 0 if column else 1
    norms = [abs(np.eye(n) - Pi).sum(axis).max()]
    Pk = np.eye(n)
    for _ in range(1, count):
        Pk = Pk @ P
        norms.append(abs(Pk - Pi).sum(axis).max())
    return norms


def neumann(norms, r, N, leading):
    s = leading + sum(norms[k] / r**k for k in range(1, N + 1))
    q = norms[N + 1] / r ** (N + 1)
    return s / r / (1 - q)


def hstar(neu, r, delta, a0, b0, proj=1.0):
    return (b0 / (r - a0) + 1) * (proj / delta + neu) + 1 / (r - a0) + 2 / r


def kl(alpha0, B0, r, H, closed=False):
    if closed:
        alpha, B = alpha0, 1 + B0 / (1 - alpha0)
    else:
        alpha, B = 3 * alpha0, (1 - alpha0 + B0) / (1 - 3 * alpha0)
    A = 1.0
    D = A * (A + B + 2)
    G = max(1 + alpha0, B0)
    lr = math.log(r / alpha)
    n1 = math.ceil(math.log(2 * A) / lr)
    C = r**-n1
    n2 = max(0, math.ceil(math.log(8 * B * D * C * H) / lr))
    gam = lr / math.log(1 / alpha)
    e1 = r ** (n1 + n2) / (8 * B * (H * B + 1 / (1 - r)))
    e0 = min(e1, (r**n1 / (4 * B * (H * (D + B) + 2 * A * (A + B) + 1 / (1 - r)))) ** gam)
    transfer = 4 * (A + B) / (1 - r) * r**-n1 + 1 / (2 * e1)
    return dict(n1=n1, n2=n2, C=C, gamma=gam, e1=e1, e0=e0, scaled=e0 / (2 * G), transfer=transfer)


def main():
    print("== kl chain")
    print("table1", repr(kl(1 / 9, 2 / 9, 24 / 25, 45.46070939)))
    print("table2 col1", repr(kl(1 / 9, 2 / 9, 39 / 40, 63.73181657)))
    print("table2 col2", repr(kl(1 / 9, 2 / 9, 39 / 40, 1036.693385)))
    print("closed-only", repr(kl(1 / 9, 2 / 9, 39 / 40, 63.73181657, closed=True)))
    print("tenfold r=0.96 H=30", repr(kl(0.1, 0.0, 0.96, 30.0)))

    print("== ten-branch, 10 bins")
    P10 = ulam(ten_branch(), 10)
    print("P[0,0]", repr(P10[0, 0]), "P[0,1]", repr(P10[0, 1]), "P[3,5]", repr(P10[3, 5]))

    print("== ten-branch, 60 bins")
    P = ulam(ten_branch(), 60)
    phi = density(P)
    print("density[0], density[59]", repr(phi[0]), repr(phi[59]))
    w = sorted(np.linalg.eigvals(P), key=lambda z: -abs(z))
    print("top moduli", [repr(abs(z)) for z in w[:3]])
    for column in (True, False):
        nr = q_norms(P, phi, 7, column)
        lead = 1.0 if column else nr[0]
        neu = neumann(nr, 24 / 25, 5, lead)
        print("column" if column else "row", [repr(x) for x in nr])
        print("  neumann", repr(neu), "hstar", repr(hstar(neu, 24 / 25, 1 / 26, 1 / 9, 2 / 9)))

    print("== ten-branch, 300 bins (for the iterative eigensolver)")
    P = ulam(ten_branch(), 300)
    w = sorted(np.linalg.eigvals(P), key=lambda z: -abs(z))
    print("top moduli", [repr(abs(z)) for z in w[:4]])

    print("== tenfold escape, 100 bins, hole (0, 1/100)")
    tenfold = linear_map([(F(i, 10), F(i + 1, 10), F(10), F(-i)) for i in range(10)])
    P = ulam(tenfold, 100)
    P[0, :] = 0
    w = np.linalg.eigvals(P)
    print("e_H", repr(max(abs(w))))
    print("== tenfold escape, 100 bins, hole (41/100, 42/100)")
    P = ulam(tenfold, 100)
    P[41, :] = 0
    print("e_H", repr(max(abs(np.linalg.eigvals(P)))))

    print("== ten-branch escape, 200 bins, hole (1/2, 51/100)")
    P = ulam(ten_branch(), 200)
    P[100:102, :] = 0
    print("e_H", repr(max(abs(np.linalg.eigvals(P)))))

    print("== decreasing tent-like map, 6 bins")
    tent = linear_map([(F(0), F(1, 2), F(2), F(0)), (F(1, 2), F(1), F(-2), F(2))])
    print(ulam(tent, 6).tolist())

    print("== theorem coefficient", repr(1 + (2 / 9 + 2 / 9) / (1 - 1 / 25 - 1 / 3)))


if __name__ == "__main__":
    main()
