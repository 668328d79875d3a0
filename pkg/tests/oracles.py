"""Independent reference computations used to check the estimators.

Everything here deliberately avoids the library's own code paths:
naive loops, dense inverses, quadrature. Slow but trustworthy.
"""

import numpy as np
from scipy import integrate
from scipy.linalg import cholesky, solve_triangular
from scipy.stats import norm

LN2 = np.log(2.0)


def naive_gram(X):
    """Triple-loop inner products."""
    n, k = X.shape
    K = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for t in range(k):
                acc += X[i, t] * X[j, t]
            K[i, j] = acc
    return K


def naive_squared_distances(X):
    """Direct pairwise squared norms."""
    n = X.shape[0]
    D2 = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            diff = X[i] - X[j]
            D2[i, j] = float(diff @ diff)
    return D2


def dense_logpdf(C, points):
    """Log density via an explicit inverse and slogdet."""
    C = np.atleast_2d(np.asarray(C, float))
    P = np.atleast_2d(np.asarray(points, float))
    n = C.shape[0]
    Cinv = np.linalg.inv(C)
    _, logdet = np.linalg.slogdet(C)
    out = np.empty(P.shape[0])
    for i, x in enumerate(P):
        out[i] = -0.5 * (n * np.log(2 * np.pi) + logdet + x @ Cinv @ x)
    return out


def closed_form_tvd_1d_scale(v1, v2):
    """TVD between N(0, v1) and N(0, v2), v1 < v2, from the crossing points.

    Densities cross where x^2 = ln(v2/v1) / (1/(2 v1) - 1/(2 v2)); the
    optimal event is the interval between the crossings.
    """
    if v1 == v2:
        return 0.0
    if v1 > v2:
        v1, v2 = v2, v1
    s1, s2 = np.sqrt(v1), np.sqrt(v2)
    x_star = np.sqrt(np.log(v2 / v1) / (1.0 / v1 - 1.0 / v2))
    inner1 = 2 * norm.cdf(x_star / s1) - 1
    inner2 = 2 * norm.cdf(x_star / s2) - 1
    return inner1 - inner2


def quad_tvd_1d(v1, v2):
    f = lambda x: 0.5 * abs(norm.pdf(x, scale=np.sqrt(v1)) - norm.pdf(x, scale=np.sqrt(v2)))
    val, _ = integrate.quad(f, -np.inf, np.inf, limit=500)
    return val


def quad_jsd_1d(v1, v2):
    """JSD in bits between two zero-mean 1-D Gaussians, by quadrature."""
    def f(x):
        p1 = norm.pdf(x, scale=np.sqrt(v1))
        p2 = norm.pdf(x, scale=np.sqrt(v2))
        tot = p1 + p2
        out = 0.0
        if p1 > 0:
            out += p1 * np.log(p1 / tot)
        if p2 > 0:
            out += p2 * np.log(p2 / tot)
        return out
    val, _ = integrate.quad(f, -np.inf, np.inf, limit=500)
    return 1.0 + val / (2 * LN2)


def grid_quad_2d(metric, C1, C2, nodes=600):
    """Tensor-grid Gauss-Legendre quadrature for 2-D Gaussian pairs.

    Axis limits scale with the per-axis standard deviations, so both a
    narrow and a wide component stay resolved.
    """
    C1 = np.asarray(C1, float)
    C2 = np.asarray(C2, float)
    sax = np.sqrt(np.maximum(np.diag(C1), np.diag(C2)))
    base, w0 = np.polynomial.legendre.leggauss(nodes)
    x = base * 9.0 * sax[0]
    y = base * 9.0 * sax[1]
    wx = w0 * 9.0 * sax[0]
    wy = w0 * 9.0 * sax[1]
    XX, YY = np.meshgrid(x, y, indexing="ij")
    P = np.stack([XX.ravel(), YY.ravel()], axis=1)
    w_outer = (wx, wy)

    def logpdf(C, P):
        L = cholesky(C, lower=True)
        ld = 2.0 * np.sum(np.log(np.diag(L)))
        U = solve_triangular(L, P.T, lower=True)
        return -0.5 * (2 * np.log(2 * np.pi) + ld + np.sum(U * U, axis=0))

    lp1 = logpdf(C1, P)
    lp2 = logpdf(C2, P)
    W = np.outer(w_outer[0], w_outer[1]).ravel()
    if metric == "tvd":
        return float(np.sum(W * 0.5 * np.abs(np.exp(lp1) - np.exp(lp2))))
    lse = np.logaddexp(lp1, lp2)
    f = np.exp(lp1) * (lp1 - lse) + np.exp(lp2) * (lp2 - lse)
    return float(1.0 + np.sum(W * f) / (2 * LN2))


def _diagonalize_pair(C1, C2):
    """Reduce (C1, C2) to (I, diag) by whitening; TVD/JSD are affine-invariant."""
    C1 = np.atleast_2d(np.asarray(C1, float))
    C2 = np.atleast_2d(np.asarray(C2, float))
    L = cholesky(C1, lower=True)
    Linv = np.linalg.inv(L)
    M = Linv @ C2 @ Linv.T
    lam = np.linalg.eigvalsh(M)
    return np.maximum(lam, 0.0)


def tvd_2d_exact(C1, C2):
    """TVD between two 2-D zero-mean Gaussians via nested 1-D quadrature.

    After whitening, the optimal event {p1 > p2} is a quadratic region
    K + a_x x^2 + a_y y^2 > 0; its probability under each distribution
    is an adaptive 1-D integral of Gaussian tail lengths.
    """
    lam = _diagonalize_pair(C1, C2)
    v1 = np.array([1.0, 1.0])
    v2 = lam
    if np.allclose(v1, v2, rtol=1e-14, atol=1e-14):
        return 0.0
    K = 0.5 * np.log(v2[0] * v2[1] / (v1[0] * v1[1]))
    a = 0.5 * (1.0 / v2 - 1.0 / v1)

    def slice_prob(x, vy, ay):
        """P(K + a_x x^2 + a_y Y^2 > 0) for Y ~ N(0, vy)."""
        t = -(K + a[0] * x * x)
        if ay > 0:
            if t <= 0:
                return 1.0
            s = np.sqrt(t / ay)
            return 2.0 * norm.sf(s / np.sqrt(vy))
        if ay < 0:
            bound = t / ay  # dividing by a negative flips the inequality
            if bound <= 0:
                return 0.0
            s = np.sqrt(bound)
            return 1.0 - 2.0 * norm.sf(s / np.sqrt(vy))
        return 1.0 if t < 0 else 0.0

    def prob_under(v):
        f = lambda x: norm.pdf(x, scale=np.sqrt(v[0])) * slice_prob(x, v[1], a[1])
        val, _ = integrate.quad(f, -np.inf, np.inf, limit=500)
        return val

    return abs(prob_under(v1) - prob_under(v2))


def jsd_2d_exact(C1, C2, nodes=600):
    """JSD via whitening plus the (exponentially accurate) tensor grid."""
    lam = _diagonalize_pair(C1, C2)
    return grid_quad_2d("jsd", np.eye(2), np.diag(lam), nodes=nodes)


def feature_space_cka(X1, X2):
    """CKA from column-centered feature matrices, never touching kernels."""
    Xc = X1 - X1.mean(axis=0, keepdims=True)
    Yc = X2 - X2.mean(axis=0, keepdims=True)
    cross = np.linalg.norm(Xc.T @ Yc) ** 2
    nx = np.linalg.norm(Xc.T @ Xc)
    ny = np.linalg.norm(Yc.T @ Yc)
    return cross / (nx * ny)


def vectorize_and_correlate(D1, D2):
    """Pearson correlation of strict upper triangles via np.corrcoef."""
    iu = np.triu_indices(D1.shape[0], k=1)
    return float(np.corrcoef(D1[iu], D2[iu])[0, 1])


def cosine_of_upper_triangles(D1, D2):
    iu = np.triu_indices(D1.shape[0], k=1)
    v1, v2 = D1[iu], D2[iu]
    return float(np.dot(v1, v2) / (np.linalg.norm(v1) * np.linalg.norm(v2)))
