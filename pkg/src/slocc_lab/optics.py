"""Jones-calculus model of the distribution setup and HOM dip/peak fitting."""

import csv
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .particles import SpatialAmplitudes

log = logging.getLogger(__name__)

H = np.array([1, 0], complex)
V = np.array([0, 1], complex)
WAVE_PLATES = ("HWP", "QWP", "FLIP_HWP_45")
PATH_ELEMENTS = ("PBS", "BD")


@dataclass(frozen=True)
class OpticalElement:
    kind: str
    angle: float | None = None

    def __post_init__(self):
        if self.kind in PATH_ELEMENTS:
            if self.angle is not None:
                raise ValueError(f"{self.kind} takes no angle")
        elif self.kind in ("HWP", "QWP"):
            if self.angle is None:
                raise ValueError(f"{self.kind} needs an angle")
        elif self.kind != "FLIP_HWP_45":
            raise ValueError(f"unknown element {self.kind!r}")


def hwp(theta):
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    return np.array([[c, s], [s, -c]], complex)


def qwp(theta):
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]], complex)
    return rot @ np.diag([1, 1j]) @ rot.T


def element_jones(e):
    """Polarization action of an element.

    Wave plates return a unitary 2x2 matrix. PBS and BD act on paths and
    return the pair of projectors ``(|H><H|, |V><V|)``: for the PBS the
    transmitted and reflected ports, for the BD the two displaced beams.
    """
    if e.kind == "HWP":
        return hwp(e.angle)
    if e.kind == "QWP":
        return qwp(e.angle)
    if e.kind == "FLIP_HWP_45":
        return hwp(np.pi / 4)
    return np.outer(H, H), np.outer(V, V)


@dataclass(frozen=True)
class SetupConfig:
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            x = getattr(self, name)
            if not 0.0 <= x <= np.pi + 1e-12:
                raise ValueError(f"{name}={x} outside [0, pi]")


def _route(pol_in, plate_angle, flipped_port):
    """Send one photon through HWP -> PBS, flipping the port headed for L.

    Returns the L and R polarization vectors (amplitude included).
    """
    after = element_jones(OpticalElement("HWP", plate_angle)) @ pol_in
    p_h, p_v = element_jones(OpticalElement("PBS"))
    ports = {"H": p_h @ after, "V": p_v @ after}
    flip = element_jones(OpticalElement("FLIP_HWP_45"))
    to_left = flip @ ports[flipped_port]
    to_right = ports["V" if flipped_port == "H" else "H"]
    return to_left, to_right


def _chain_amplitudes(cfg):
    # photon 1 (H): the reflected V port goes to L; photon 2 (V): the transmitted H port goes to L
    l1, r1 = _route(H, (np.pi / 2 - cfg.alpha) / 2, "V")
    l2, r2 = _route(V, -cfg.beta / 2, "H")
    for vec, pol in ((l1, H), (r1, H), (l2, V), (r2, V)):
        if abs(abs(np.vdot(pol, vec)) - np.linalg.norm(vec)) > 1e-12:
            raise AssertionError("polarization not restored by the distribution chain")
    return (np.vdot(H, l1), np.vdot(H, r1)), (np.vdot(V, l2), np.vdot(V, r2))


def setup_distribute(cfg, verify=True):
    """Wave-packet amplitudes produced by the HWP angles ``(alpha, beta)``.

    ``l = cos a, r = sin a, l' = sin b, r' = cos b``. With ``verify`` the
    same amplitudes are rebuilt by chaining the Jones matrices and compared
    up to each photon's global phase.
    """
    amps = SpatialAmplitudes.from_angles(cfg.alpha, cfg.beta)
    if verify:
        (l, r), (lp, rp) = _chain_amplitudes(cfg)
        for chained, closed in (((l, r), (amps.l, amps.r)), ((lp, rp), (amps.l_p, amps.r_p))):
            if abs(abs(np.vdot(closed, chained)) - 1.0) > 1e-12:
                raise AssertionError(f"Jones chain {chained} disagrees with closed form {closed}")
    return amps


def occupancy_L(cfg):
    """Probability of finding the second wave packet in L."""
    return float(abs(setup_distribute(cfg, verify=False).l_p) ** 2)


@dataclass(frozen=True)
class HomDataset:
    delays: np.ndarray
    counts: np.ndarray
    duration: float = 5.0
    unit: str = "um"

    def __post_init__(self):
        d = np.asarray(self.delays, float)
        c = np.asarray(self.counts)
        if d.shape != c.shape:
            raise ValueError("delays and counts differ in length")
        if np.any(c < 0):
            raise ValueError("negative counts")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "counts", c)


@dataclass(frozen=True)
class GaussianFit:
    a: float
    b: float
    c: float
    d: float
    sign: str = "dip"
    residual: float = 0.0
    converged: bool = True
    n_iter: int = field(default=0, compare=False)

    @property
    def visibility(self):
        return self.d


def _sgn(sign):
    if sign not in ("dip", "peak"):
        raise ValueError(f"sign must be 'dip' or 'peak', got {sign!r}")
    return -1.0 if sign == "dip" else 1.0


def hom_expected(x, params):
    """``a (1 -+ d exp(-b (x - c)^2))`` for a dip (-) or peak (+)."""
    x = np.asarray(x, float)
    g = np.exp(-params.b * (x - params.c) ** 2)
    return params.a * (1.0 + _sgn(params.sign) * params.d * g)


def _jacobian(p, x, s):
    a, b, c, d = p
    dx = x - c
    g = np.exp(-b * dx * dx)
    return np.column_stack([
        1.0 + s * d * g,
        -s * a * d * dx * dx * g,
        2.0 * s * a * d * b * dx * g,
        s * a * g,
    ])


def _initial_guess(x, y, s):
    ymax, ymin = float(y.max()), float(y.min())
    if s < 0:
        a0, c0 = ymax, float(x[np.argmin(y)])
        d0 = (ymax - ymin) / ymax
        half = ymax - 0.5 * (ymax - ymin)
        inside = x[y <= half]
    else:
        a0 = float(np.median(np.sort(y)[: max(3, len(y) // 4)]))
        c0 = float(x[np.argmax(y)])
        d0 = (ymax - a0) / a0 if a0 > 0 else 0.5
        half = a0 + 0.5 * (ymax - a0)
        inside = x[y >= half]
    width = float(inside.max() - inside.min()) if inside.size > 1 else float(np.ptp(x)) / 4
    width = max(width, float(np.min(np.diff(np.sort(x)))))
    b0 = 4.0 * np.log(2.0) / width**2
    return np.array([a0, b0, c0, float(np.clip(d0, 1e-3, 1.0))])


def fit_gaussian(data, sign="dip", weighted=False, max_iter=200, xtol=1e-8):
    """Least-squares Gaussian dip/peak fit; the visibility is ``d``.

    Trust-region least squares with the analytic Jacobian and bounds
    ``a, b > 0``, ``0 <= d <= 1``. ``weighted`` divides residuals by the
    Poisson standard deviation. Non-convergence is logged and flagged in the
    result, which then holds the best parameters found.
    """
    x, y = data.delays, np.asarray(data.counts, float)
    if x.size < 8:
        raise ValueError("need at least 8 points")
    if np.ptp(y) == 0:
        raise ValueError("counts are all equal; nothing to fit")
    s = _sgn(sign)
    w = 1.0 / np.sqrt(np.maximum(y, 1.0)) if weighted else np.ones_like(y)
    p0 = _initial_guess(x, y, s)

    def resid(p):
        a, b, c, d = p
        return w * (a * (1.0 + s * d * np.exp(-b * (x - c) ** 2)) - y)

    def jac(p):
        return w[:, None] * _jacobian(p, x, s)

    res = least_squares(resid, p0, jac=jac, method="trf",
                        bounds=([1e-12, 1e-12, -np.inf, 0.0], [np.inf, np.inf, np.inf, 1.0]),
                        x_scale="jac", xtol=xtol, ftol=1e-15, gtol=1e-15, max_nfev=max_iter)
    converged = bool(res.status > 0)
    if not converged:
        log.warning("Gaussian fit did not converge: %s", res.message)
    a, b, c, d = res.x
    sse = float(np.sum((hom_expected(x, GaussianFit(a, b, c, d, sign)) - y) ** 2))
    return GaussianFit(float(a), float(b), float(c), float(d), sign, sse, converged, int(res.nfev))


def simulate_hom(delays, params, rng, duration=5.0, unit="um"):
    """Poisson-sampled scan around the expected dip or peak."""
    rng = np.random.default_rng(rng)
    mean = hom_expected(delays, params)
    return HomDataset(np.asarray(delays, float), rng.poisson(mean), duration, unit)


def write_hom_csv(data, path, comment=None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["delay", "counts", "duration_s"])
        for x, c in zip(data.delays, data.counts):
            c = int(c) if float(c).is_integer() else repr(float(c))
            w.writerow([repr(float(x)), c, repr(float(data.duration))])


def _parse_counts(cells):
    vals = np.array([float(c) for c in cells])
    return vals.astype(np.int64) if np.all(vals == np.round(vals)) else vals


def read_hom_csv(path, unit="um"):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    durations = {float(r["duration_s"]) for r in rows}
    if len(durations) > 1:
        raise ValueError("mixed integration times in one scan")
    return HomDataset(np.array([float(r["delay"]) for r in rows]),
                      _parse_counts([r["counts"] for r in rows]),
                      durations.pop() if durations else 0.0, unit)
