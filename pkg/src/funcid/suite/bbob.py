"""The 24 noiseless continuous benchmark functions with instance transforms.

Implements the standard noiseless suite definitions: the oscillation and
asymmetry nonlinearities, Lambda^alpha conditioning matrices, orthogonal
R/Q rotations, and per-function optimum placement.  All arithmetic is
float64; instances precompute every constant they need so evaluation is a
handful of vector ops.
"""

from __future__ import annotations

import math

import numpy as np

from .. import rng

#: index -> (display name, structural class i..v)
FUNCTION_TABLE: dict[int, tuple[str, str]] = {
    1: ("Sphere", "i"),
    2: ("Ellipsoidal A", "i"),
    3: ("Rastrigin", "i"),
    4: ("Rastrigin-Bueche", "i"),
    5: ("Linear Slope", "i"),
    6: ("Attractive Sector", "ii"),
    7: ("Step Ellipsoidal", "ii"),
    8: ("Rosenbrock", "ii"),
    9: ("Rotated Rosenbrock", "ii"),
    10: ("Ellipsoidal B", "iii"),
    11: ("Discus", "iii"),
    12: ("Bent Cigar", "iii"),
    13: ("Sharp Ridge", "iii"),
    14: ("Different Powers", "iii"),
    15: ("Rastrigin Rotated", "iv"),
    16: ("Weierstrass", "iv"),
    17: ("Schaffers F7", "iv"),
    18: ("Schaffers F7 Ill-Conditioned", "iv"),
    19: ("Griewank-Rosenbrock F8F2", "iv"),
    20: ("Schwefel", "v"),
    21: ("Gallagher 101 Peaks", "v"),
    22: ("Gallagher 21 Peaks", "v"),
    23: ("Katsuura", "v"),
    24: ("Lunacek bi-Rastrigin", "v"),
}

# Rotation matrices each function consumes (0, 1 = R, 2 = R and Q).
_N_ROTATIONS = {
    1: 0, 2: 0, 3: 0, 4: 0, 5: 0,
    6: 2, 7: 2, 8: 0, 9: 1,
    10: 1, 11: 1, 12: 1, 13: 2, 14: 1,
    15: 2, 16: 2, 17: 2, 18: 2, 19: 1,
    20: 0, 21: 1, 22: 1, 23: 2, 24: 2,
}

# Schwefel's optimum coordinate and the matching output offset, computed
# in-code so the optimum evaluates to exactly zero in double precision.
_SCHWEFEL_X = 4.2096874633
_SCHWEFEL_Z = 100.0 * 2.0 * _SCHWEFEL_X / 2.0
_SCHWEFEL_C = _SCHWEFEL_Z * math.sin(math.sqrt(_SCHWEFEL_Z)) / 100.0


def random_orthogonal(d: int, generator: np.random.Generator) -> np.ndarray:
    """Draw a Haar-uniform orthogonal matrix via Gram-Schmidt.

    Gaussian columns are orthonormalized with modified Gram-Schmidt; a
    second pass keeps ||Q^T Q - I||_inf well below 1e-9 for d up to 64.
    """
    while True:
        a = generator.standard_normal((d, d))
        q = _gram_schmidt(_gram_schmidt(a) if d > 1 else a)
        if q is not None:
            return q


def _gram_schmidt(a: np.ndarray | None) -> np.ndarray | None:
    if a is None:
        return None
    q = np.array(a, dtype=np.float64, copy=True)
    for j in range(q.shape[1]):
        v = q[:, j]
        for i in range(j):
            v -= (q[:, i] @ v) * q[:, i]
        norm = np.linalg.norm(v)
        if norm < 1e-9:
            return None
        q[:, j] = v / norm
    return q


def _lin(d: int) -> np.ndarray:
    """i/(d-1) for i = 0..d-1 (all zeros when d == 1)."""
    if d == 1:
        return np.zeros(1)
    return np.arange(d, dtype=np.float64) / (d - 1)


def _sign_vec(v: np.ndarray) -> np.ndarray:
    """Componentwise +/-1 with the tie v_i == 0 resolved to +1."""
    return np.where(v >= 0.0, 1.0, -1.0)


def oscillate(v: np.ndarray | float) -> np.ndarray | float:
    """The oscillation nonlinearity T_osz, elementwise."""
    v = np.asarray(v, dtype=np.float64)
    with np.errstate(divide="ignore"):
        x_hat = np.where(v == 0.0, 0.0, np.log(np.abs(v)))
    c1 = np.where(v > 0.0, 10.0, 5.5)
    c2 = np.where(v > 0.0, 7.9, 3.1)
    out = np.sign(v) * np.exp(x_hat + 0.049 * (np.sin(c1 * x_hat) + np.sin(c2 * x_hat)))
    return out if out.ndim else float(out)


def asymmetrize(v: np.ndarray, beta: float) -> np.ndarray:
    """The asymmetry nonlinearity T_asy^beta, elementwise."""
    d = v.shape[0]
    exponent = 1.0 + beta * _lin(d) * np.sqrt(np.maximum(v, 0.0))
    return np.where(v > 0.0, np.power(np.maximum(v, 0.0), exponent), v)


def boundary_penalty(x: np.ndarray) -> float:
    """Sum of squared overshoots beyond the [-5, 5] box."""
    return float(np.sum(np.square(np.maximum(0.0, np.abs(x) - 5.0))))


def build_params(k: int, d: int, instance_seed: int) -> dict:
    """Draw the instance transforms of function ``k`` at dimension ``d``.

    Seed 0 is the identity instance: zero translation and identity
    rotations (the output offset is still drawn from its own stream).
    Everything else pulls from per-purpose substreams of the seed, so the
    result is reproducible field by field.
    """
    identity = instance_seed == 0
    lin = _lin(d)

    if identity:
        t_raw = np.zeros(d)
    else:
        t_raw = substream_uniform(instance_seed, rng.TRANSLATION, d, -4.0, 4.0)

    n_rot = _N_ROTATIONS[k]
    if identity or n_rot == 0:
        r_mat = np.eye(d) if n_rot >= 1 else None
        q_mat = np.eye(d) if n_rot >= 2 else None
    else:
        r_mat = random_orthogonal(d, rng.substream(instance_seed, rng.ROTATION_R))
        q_mat = (
            random_orthogonal(d, rng.substream(instance_seed, rng.ROTATION_Q))
            if n_rot >= 2
            else None
        )

    offset_stream = rng.substream(instance_seed, rng.F_OFFSET)
    f_offset = round(float(offset_stream.uniform(-100.0, 100.0)), 2)

    p: dict = {"k": k, "d": d, "R": r_mat, "Q": q_mat, "f_offset": f_offset}

    if k == 1:
        p["x_opt"] = t_raw
    elif k == 2:
        p["x_opt"] = t_raw
        p["cond6"] = np.power(10.0, 6.0 * lin)
    elif k == 3:
        p["x_opt"] = t_raw
        p["lam10"] = np.power(10.0, 0.5 * lin)
    elif k == 4:
        x_opt = t_raw.copy()
        x_opt[0::2] = np.abs(x_opt[0::2])
        p["x_opt"] = x_opt
        p["s_base"] = np.power(10.0, 0.5 * lin)
    elif k == 5:
        p["x_opt"] = 5.0 * _sign_vec(t_raw)
        p["slope"] = np.sign(p["x_opt"]) * np.power(10.0, lin)
    elif k == 6:
        p["x_opt"] = t_raw
        p["lam10"] = np.power(10.0, 0.5 * lin)
    elif k == 7:
        p["x_opt"] = t_raw
        p["lam10"] = np.power(10.0, 0.5 * lin)
        p["cond2"] = np.power(10.0, 2.0 * lin)
    elif k == 8:
        p["x_opt"] = 0.75 * t_raw
        p["scale"] = max(1.0, math.sqrt(d) / 8.0)
    elif k in (9, 19):
        scale = max(1.0, math.sqrt(d) / 8.0)
        p["scale"] = scale
        # Optimum sits where the rotated, scaled coordinates all equal one.
        p["x_opt"] = r_mat.T @ np.full(d, 0.5 / scale)
    elif k == 10:
        p["x_opt"] = t_raw
        p["cond6"] = np.power(10.0, 6.0 * lin)
    elif k == 11:
        p["x_opt"] = t_raw
    elif k == 12:
        p["x_opt"] = t_raw
    elif k == 13:
        p["x_opt"] = t_raw
        p["lam10"] = np.power(10.0, 0.5 * lin)
    elif k == 14:
        p["x_opt"] = t_raw
        p["exponents"] = 2.0 + 4.0 * lin
    elif k == 15:
        p["x_opt"] = t_raw
        p["lam10"] = np.power(10.0, 0.5 * lin)
    elif k == 16:
        p["x_opt"] = t_raw
        p["lam001"] = np.power(0.01, 0.5 * lin)
        ks = np.arange(12, dtype=np.float64)
        p["half_pow"] = np.power(0.5, ks)
        p["three_pow"] = np.power(3.0, ks)
        p["f0"] = float(np.sum(p["half_pow"] * np.cos(np.pi * p["three_pow"])))
    elif k == 17:
        p["x_opt"] = t_raw
        p["lam"] = np.power(10.0, 0.5 * lin)
    elif k == 18:
        p["x_opt"] = t_raw
        p["lam"] = np.power(1000.0, 0.5 * lin)
    elif k == 20:
        signs = _sign_vec(t_raw)
        p["x_opt"] = 0.5 * _SCHWEFEL_X * signs
        p["signs"] = signs
        p["lam10"] = np.power(10.0, 0.5 * lin)
    elif k in (21, 22):
        _build_gallagher(p, d, instance_seed, n_peaks=101 if k == 21 else 21)
    elif k == 23:
        p["x_opt"] = t_raw
        p["lam100"] = np.power(100.0, 0.5 * lin)
        p["two_pow"] = np.power(2.0, np.arange(1, 33, dtype=np.float64))
    elif k == 24:
        signs = _sign_vec(t_raw)
        p["x_opt"] = 1.25 * signs
        p["signs"] = signs
        p["lam100"] = np.power(100.0, 0.5 * lin)
        p["s_const"] = 1.0 - 1.0 / (2.0 * math.sqrt(d + 20.0) - 8.2)
        p["mu1"] = -math.sqrt((2.5**2 - 1.0) / p["s_const"])
    else:
        raise ValueError(f"unknown BBOB function index {k}")
    return p


def substream_uniform(seed: int, tag: int, d: int, lo: float, hi: float) -> np.ndarray:
    return rng.substream(seed, tag).uniform(lo, hi, size=d)


def _build_gallagher(p: dict, d: int, instance_seed: int, n_peaks: int) -> None:
    """Peak layout: conditioning spread, permuted scales, centers."""
    aux = rng.substream(instance_seed, rng.AUX)
    high_cond = math.sqrt(1000.0) if n_peaks == 101 else 1000.0
    spread = 1.0 if n_peaks == 101 else 0.98

    conditions = np.power(1000.0, np.linspace(0.0, 1.0, n_peaks - 1))
    conditions = np.concatenate(([high_cond], aux.permutation(conditions)))
    scales = np.empty((n_peaks, d))
    for i, cond in enumerate(conditions):
        s = np.power(cond, np.linspace(-0.5, 0.5, d)) if d > 1 else np.ones(1)
        scales[i] = aux.permutation(s)

    # Peaks are drawn in original coordinates (keeps the optimum inside the
    # box), then mapped into the rotated frame the evaluator works in.  The
    # global peak is pulled toward the box center and carries weight 10.
    peaks = spread * aux.uniform(-5.0, 5.0, size=(n_peaks, d))
    peaks[0] *= 0.8
    weights = np.concatenate(([10.0], np.linspace(1.1, 9.1, n_peaks - 1)))

    p["centers"] = peaks @ p["R"].T
    p["peak_scales"] = scales
    p["weights"] = weights
    p["x_opt"] = peaks[0]


# ---------------------------------------------------------------------------
# Evaluators.  Each takes (params, x) with x validated float64 of length d.
# ---------------------------------------------------------------------------

def _f01_sphere(p, x):
    z = x - p["x_opt"]
    return float(z @ z)


def _f02_ellipsoidal(p, x):
    z = oscillate(x - p["x_opt"])
    return float(np.sum(p["cond6"] * z * z))


def _f03_rastrigin(p, x):
    z = p["lam10"] * asymmetrize(oscillate(x - p["x_opt"]), 0.2)
    return float(10.0 * (p["d"] - np.sum(np.cos(2.0 * np.pi * z))) + z @ z)


def _f04_bueche_rastrigin(p, x):
    z = oscillate(x - p["x_opt"])
    s = p["s_base"].copy()
    boost = (z > 0.0) & (np.arange(p["d"]) % 2 == 0)
    s[boost] *= 10.0
    z = s * z
    core = 10.0 * (p["d"] - np.sum(np.cos(2.0 * np.pi * z))) + z @ z
    return float(core + 100.0 * boundary_penalty(x))


def _f05_linear_slope(p, x):
    x_opt = p["x_opt"]
    z = np.where(x_opt * x < 25.0, x, x_opt)
    s = p["slope"]
    return float(np.sum(5.0 * np.abs(s) - s * z))


def _f06_attractive_sector(p, x):
    z = p["Q"] @ (p["lam10"] * (p["R"] @ (x - p["x_opt"])))
    s = np.where(z * p["x_opt"] > 0.0, 100.0, 1.0)
    return float(oscillate(float(np.sum(np.square(s * z)))) ** 0.9)


def _f07_step_ellipsoidal(p, x):
    z_hat = p["lam10"] * (p["R"] @ (x - p["x_opt"]))
    z_tilde = np.where(
        np.abs(z_hat) > 0.5,
        np.floor(0.5 + z_hat),
        np.floor(0.5 + 10.0 * z_hat) / 10.0,
    )
    z = p["Q"] @ z_tilde
    core = 0.1 * max(abs(z_hat[0]) * 1e-4, float(np.sum(p["cond2"] * z * z)))
    return float(core + boundary_penalty(x))


def _rosenbrock_core(z):
    zi, zn = z[:-1], z[1:]
    return float(np.sum(100.0 * np.square(zi * zi - zn) + np.square(zi - 1.0)))


def _f08_rosenbrock(p, x):
    z = p["scale"] * (x - p["x_opt"]) + 1.0
    return _rosenbrock_core(z)


def _f09_rosenbrock_rotated(p, x):
    z = p["scale"] * (p["R"] @ x) + 0.5
    return _rosenbrock_core(z)


def _f10_ellipsoidal_rotated(p, x):
    z = oscillate(p["R"] @ (x - p["x_opt"]))
    return float(np.sum(p["cond6"] * z * z))


def _f11_discus(p, x):
    z = oscillate(p["R"] @ (x - p["x_opt"]))
    return float(1e6 * z[0] * z[0] + np.sum(z[1:] * z[1:]))


def _f12_bent_cigar(p, x):
    z = p["R"] @ asymmetrize(p["R"] @ (x - p["x_opt"]), 0.5)
    return float(z[0] * z[0] + 1e6 * np.sum(z[1:] * z[1:]))


def _f13_sharp_ridge(p, x):
    z = p["Q"] @ (p["lam10"] * (p["R"] @ (x - p["x_opt"])))
    return float(z[0] * z[0] + 100.0 * math.sqrt(float(np.sum(z[1:] * z[1:]))))


def _f14_different_powers(p, x):
    z = p["R"] @ (x - p["x_opt"])
    return float(math.sqrt(np.sum(np.power(np.abs(z), p["exponents"]))))


def _f15_rastrigin_rotated(p, x):
    z = asymmetrize(oscillate(p["R"] @ (x - p["x_opt"])), 0.2)
    z = p["R"] @ (p["lam10"] * (p["Q"] @ z))
    return float(10.0 * (p["d"] - np.sum(np.cos(2.0 * np.pi * z))) + z @ z)


def _f16_weierstrass(p, x):
    z = oscillate(p["R"] @ (x - p["x_opt"]))
    z = p["R"] @ (p["lam001"] * (p["Q"] @ z))
    d = p["d"]
    inner = np.sum(
        p["half_pow"] * np.cos(2.0 * np.pi * p["three_pow"] * (z[:, None] + 0.5)),
        axis=1,
    )
    core = 10.0 * (float(np.sum(inner)) / d - p["f0"]) ** 3
    return float(core + 10.0 / d * boundary_penalty(x))


def _schaffers(p, x):
    z = p["lam"] * (p["Q"] @ asymmetrize(p["R"] @ (x - p["x_opt"]), 0.5))
    s = np.sqrt(z[:-1] ** 2 + z[1:] ** 2)
    root = np.sqrt(s)
    core = np.sum(root + root * np.sin(50.0 * np.power(s, 0.2)) ** 2)
    core = (core / (p["d"] - 1.0)) ** 2
    return float(core + 10.0 * boundary_penalty(x))


def _f19_griewank_rosenbrock(p, x):
    z = p["scale"] * (p["R"] @ x) + 0.5
    zi, zn = z[:-1], z[1:]
    s = 100.0 * np.square(zi * zi - zn) + np.square(zi - 1.0)
    core = np.sum(s / 4000.0 - np.cos(s))
    return float(10.0 * core / (p["d"] - 1.0) + 10.0)


def _f20_schwefel(p, x):
    abs2 = 2.0 * np.abs(p["x_opt"])
    x_hat = 2.0 * p["signs"] * x
    z_hat = x_hat.copy()
    z_hat[1:] += 0.25 * (x_hat[:-1] - abs2[:-1])
    z = 100.0 * (p["lam10"] * (z_hat - abs2) + abs2)
    core = _SCHWEFEL_C - float(np.mean(z * np.sin(np.sqrt(np.abs(z))))) / 100.0
    return float(core + 100.0 * boundary_penalty(z / 100.0))


def _gallagher(p, x):
    diff = (p["R"] @ x)[None, :] - p["centers"]
    expo = -np.sum(p["peak_scales"] * diff * diff, axis=1) / (2.0 * p["d"])
    best = float(np.max(p["weights"] * np.exp(expo)))
    return float(oscillate(10.0 - best) ** 2 + boundary_penalty(x))


def _f23_katsuura(p, x):
    z = p["Q"] @ (p["lam100"] * (p["R"] @ (x - p["x_opt"])))
    d = p["d"]
    arr = p["two_pow"] * z[:, None]
    terms = np.sum(np.abs(arr - np.round(arr)) / p["two_pow"], axis=1)
    prod = float(np.prod(1.0 + np.arange(1, d + 1) * terms))
    core = 10.0 / d**2 * prod ** (10.0 / d**1.2) - 10.0 / d**2
    return float(core + boundary_penalty(x))


def _f24_lunacek(p, x):
    d = p["d"]
    mu0 = 2.5
    x_hat = 2.0 * p["signs"] * x
    z = p["Q"] @ (p["lam100"] * (p["R"] @ (x_hat - mu0)))
    s1 = float(np.sum(np.square(x_hat - mu0)))
    s2 = float(np.sum(np.square(x_hat - p["mu1"])))
    core = min(s1, 1.0 * d + p["s_const"] * s2)
    core += 10.0 * (d - float(np.sum(np.cos(2.0 * np.pi * z))))
    return float(core + 1e4 * boundary_penalty(x))


EVALUATORS = {
    1: _f01_sphere,
    2: _f02_ellipsoidal,
    3: _f03_rastrigin,
    4: _f04_bueche_rastrigin,
    5: _f05_linear_slope,
    6: _f06_attractive_sector,
    7: _f07_step_ellipsoidal,
    8: _f08_rosenbrock,
    9: _f09_rosenbrock_rotated,
    10: _f10_ellipsoidal_rotated,
    11: _f11_discus,
    12: _f12_bent_cigar,
    13: _f13_sharp_ridge,
    14: _f14_different_powers,
    15: _f15_rastrigin_rotated,
    16: _f16_weierstrass,
    17: _schaffers,
    18: _schaffers,
    19: _f19_griewank_rosenbrock,
    20: _f20_schwefel,
    21: _gallagher,
    22: _gallagher,
    23: _f23_katsuura,
    24: _f24_lunacek,
}
