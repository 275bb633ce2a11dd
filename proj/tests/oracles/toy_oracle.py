"""Independent high-precision oracle for the frozen values used in the C++ tests.

Run with `python3 tests/oracles/toy_oracle.py`. Uses mpmath at 40 digits; shares
no code with the library. Values printed here are pasted into tests/golden.hpp.
"""
import mpmath as mp

mp.mp.dps = 40

X = [(mp.mpf("0.5377"), mp.mpf("0.3978")), (mp.mpf("0.6342"), mp.mpf("-0.4584")),
     (mp.mpf("0.3273"), mp.mpf("0.3923")), (mp.mpf("0.3472"), mp.mpf("0.4305")),
     (mp.mpf("0.6724"), mp.mpf("-0.7962")), (mp.mpf("0.8174"), mp.mpf("-0.3601"))]
REGION = [1, 2, 1, 1, 2, 2]
DIM = [1, 2, 1, 1, 2, 2]
OFF = [0]
for d in DIM:
    OFF.append(OFF[-1] + d)
N = OFF[-1]
SIGMA = mp.mpf("0.1")
ALPHA = mp.mpf(10)
GA = mp.mpf("0.25")
GI = mp.mpf(10)
L_LAB = 2
Y = [[mp.mpf("1.2108")], [mp.mpf("1.6636"), mp.mpf("4.3843")]]
A_REF = [mp.mpf(s) for s in
           "0.8433 1.7226 1.5475 0.4395 0.3944 0.1926 -0.0055 1.4116 -0.1589".split()]


def dist2(p, q):
    return (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2


def block(i, j):
    t2 = dist2(X[i], X[j])
    g = mp.e ** (-t2 / SIGMA ** 2)
    b = mp.zeros(DIM[i], DIM[j])
    b[0, 0] = g
    if DIM[i] == 2 and DIM[j] == 2:
        b[1, 1] = mp.e ** (-ALPHA * mp.sqrt(t2))
    return b


K = mp.zeros(N, N)
for i in range(6):
    for j in range(6):
        b = block(i, j)
        for r in range(DIM[i]):
            for c in range(DIM[j]):
                K[OFF[i] + r, OFF[j] + c] = b[r, c]

W = mp.matrix(6, 6)
for j in range(6):
    for k in range(6):
        W[j, k] = mp.e ** (-dist2(X[j], X[k]) / (2 * SIGMA ** 2))
Lap = mp.matrix(6, 6)
for j in range(6):
    deg = mp.fsum(W[j, k] for k in range(6))
    for k in range(6):
        Lap[j, k] = (deg if j == k else 0) - W[j, k]

# Printed 9x9 pattern: row/col index of the "first" component and extra diagonals.
M = mp.zeros(N, N)
for i in range(6):
    for j in range(6):
        M[OFF[i], OFF[j]] = Lap[i, j]
    for c in range(1, DIM[i]):
        M[OFF[i] + c, OFF[i] + c] = Lap[i, i]


def functional(a):
    f = K * a
    s = mp.mpf(0)
    for j in range(L_LAB):
        r2 = mp.fsum((Y[j][c] - f[OFF[j] + c]) ** 2 for c in range(DIM[j]))
        s += mp.e ** (-r2)
    quad_k = (a.T * K * a)[0]
    quad_m = (f.T * M * f)[0]
    return 1 - s / L_LAB + GA * quad_k + GI * quad_m


def residual_weighted(a):
    f = K * a
    mf = M * f
    w = []
    for j in range(L_LAB):
        r2 = mp.fsum((Y[j][c] - f[OFF[j] + c]) ** 2 for c in range(DIM[j]))
        w.append(mp.e ** (-r2))
    h = mp.matrix(N, 1)
    for i in range(6):
        for r in range(DIM[i]):
            h[OFF[i] + r] = a[OFF[i] + r] + GI / GA * mf[OFF[i] + r]
        if i < L_LAB:
            for j in range(L_LAB):
                b = block(i, j)
                for r in range(DIM[i]):
                    h[OFF[i] + r] += w[j] / (L_LAB * GA) * mp.fsum(
                        b[r, c] * a[OFF[j] + c] for c in range(DIM[j]))
            for r in range(DIM[i]):
                h[OFF[i] + r] -= Y[i][r] / (L_LAB * GA)
    return h


ev = mp.eigsy(K)[0]
lam_min = min(ev[i] for i in range(N))
lam_max = max(ev[i] for i in range(N))
i0 = functional(mp.zeros(N, 1))
delta = mp.sqrt(i0 / (GA * lam_min))
ap = mp.matrix(A_REF)

print("kernel_x1_x3       =", mp.nstr(K[OFF[0], OFF[2]], 20))
print("weight_x1_x3       =", mp.nstr(W[0, 2], 20))
print("els_y1_z0          =", mp.nstr(1 - mp.e ** -1, 20))
print("gram_lambda_min    =", mp.nstr(lam_min, 20))
print("gram_lambda_max    =", mp.nstr(lam_max, 20))
print("objective_at_zero  =", mp.nstr(i0, 20))
print("delta              =", mp.nstr(delta, 20))
print("objective_at_reference =", mp.nstr(functional(ap), 20))
h = residual_weighted(ap)
print("residual_inf_at_reference =", mp.nstr(max(abs(h[i]) for i in range(N)), 20))
