"""Reference values for the C++ unit tests.

Inputs are closed-form so the tests can rebuild them without sharing code:
  d[k]   = cos(1.3 k + 0.2) + 1j * sin(0.7 k^2 - 0.4)      on active bins
  u[k]   = 0.5 + 0.1 k + 1j * cos(2.1 k)
The kernel is evaluated by the direct (N + N_CP)-term geometric sum in
mpmath, independent of the closed form used by the library.
"""
import cvxpy as cp
import mpmath as mp
import numpy as np

mp.mp.dps = 40


def kernel_direct(N, cp_len, nu, k):
    s = mp.mpc(0)
    for n in range(-cp_len, N):
        s += mp.exp(-2j * mp.pi * (nu - k) * n / N)
    return complex(s / mp.sqrt(N))


def active_bins(N, first, count):
    return [(first + i) % N for i in range(count)]


def data_vec(N, bins):
    d = np.zeros(N, complex)
    for k in bins:
        d[k] = np.cos(1.3 * k + 0.2) + 1j * np.sin(0.7 * k * k - 0.4)
    return d


def kernel(N, cp_len, nus, bins):
    A = np.zeros((len(nus), N), complex)
    for m, nu in enumerate(nus):
        for k in bins:
            A[m, k] = kernel_direct(N, cp_len, nu, k)
    return A


def show(name, v):
    v = np.atleast_1d(v)
    if np.iscomplexobj(v):
        body = ", ".join(f"{{{z.real:.17g}, {z.imag:.17g}}}" for z in v)
    else:
        body = ", ".join(f"{x:.17g}" for x in v)
    print(f"{name} = {{{body}}};")


print("// kernel samples, N=8 cp=2")
for nu, k in [(0.0, 0), (3.5, 1), (-2.25, 5), (4.0, 4), (12.0, 4), (1e-9, 0)]:
    z = kernel_direct(8, 2, nu, k)
    print(f"// nu={nu} k={k}: {z.real:.17g} {z.imag:.17g}")

print("// kernel samples, N=512 cp=36")
for nu, k in [(334.0, 0), (-171.0, 300), (170.5, 20), (128.0, 0), (640.0, 0)]:
    z = kernel_direct(512, 36, nu, k)
    print(f"// nu={nu} k={k}: {z.real:.17g} {z.imag:.17g}")

# Mask projection, N=8, cp=2, active -3..2, points 3.5 and -4.25.
N, cpl = 8, 2
bins = active_bins(N, -3, 6)
nus = [3.5, -4.25]
A = kernel(N, cpl, nus, bins)
d = data_vec(N, bins)
p = np.abs(A @ d) ** 2
gamma = 0.05 * p
x = cp.Variable(N, complex=True)
cons = [cp.abs(A[m] @ x) <= np.sqrt(gamma[m]) for m in range(2)]
prob = cp.Problem(cp.Minimize(cp.sum_squares(x - d)), cons)
prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12,
           tol_feas=1e-12)
print("// mask projection N=8")
show("oobe", p)
show("gamma", gamma)
print(f"distance_sq = {prob.value:.17g};")
show("xbar", x.value)

# Epigraph, N=16, cp=4, active -4..3, points 4.5, 6.5; two antennas.
N, cpl = 16, 4
bins = active_bins(N, -4, 8)
nus = [4.5, 6.5]
A = kernel(N, cpl, nus, bins)
X = np.zeros((2, N), complex)
for j in range(2):
    for k in bins:
        X[j, k] = np.cos(1.3 * k + 0.2 + j) + 1j * np.sin(0.7 * k * k - 0.4 * (j + 1))
gamma = 0.02 * np.min(np.abs(A @ X.T) ** 2, axis=1)
eps = 0.05 * np.linalg.norm(X)
Xb = cp.Variable((2, N), complex=True)
# Minimize sqrt(t): the same optimum with better-conditioned cones.
root_t = cp.Variable(nonneg=True)
cons = [cp.norm(Xb - X, "fro") <= eps]
for j in range(2):
    for m in range(2):
        cons.append(cp.abs(A[m] @ Xb[j]) <= np.sqrt(gamma[m]) * root_t)
for k in range(N):
    if k not in bins:
        cons.append(Xb[:, k] == X[:, k])
prob = cp.Problem(cp.Minimize(root_t), cons)
prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12,
           tol_feas=1e-12)
t = root_t ** 2
print("// epigraph N=16")
show("gamma", gamma)
print(f"eps_abs = {eps:.17g};")
print(f"delta_t = {t.value:.17g};")

# Unit power reference: mean over occupied band points of sum |a(nu,k)|^2,
# N=16 cp=4 active -4..3 oversample 4.
N, cpl = 16, 4
bins = active_bins(N, -4, 8)
pts = [-4 - 0.5 + i / 4 for i in range(8 * 4)]
acc = 0.0
for nu in pts:
    acc += sum(abs(kernel_direct(N, cpl, nu, k)) ** 2 for k in bins)
print(f"unit_ref_16 = {acc / len(pts):.17g};")

# Rank-1 projection by cvxpy, N=4, b=0.1.
k = np.arange(4)
x0 = np.cos(1.3 * k + 0.2) + 1j * np.sin(0.7 * k * k - 0.4)
u = 0.5 + 0.1 * k + 1j * np.cos(2.1 * k)
z = cp.Variable(4, complex=True)
prob = cp.Problem(cp.Minimize(cp.sum_squares(z - x0)),
                  [cp.abs(np.conj(u) @ z) <= np.sqrt(0.1)])
prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-13, tol_gap_rel=1e-13,
           tol_feas=1e-13)
print("// rank-1 projection N=4 b=0.1")
print(f"|u^H x|^2 = {abs(np.vdot(u, x0))**2:.17g}")
show("proj", z.value)
