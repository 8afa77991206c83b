"""Hyperbolic measure of superlevel sets and derived quantities.

For u(z) = |f(z)|^a (1-|z|^2)^b the sets A_t = {u > t} are compactly
contained in the disk, so mu(t) = m(A_t) is finite for t > 0.  Everything
here is built on one engine that brackets mu(t) by adaptive subdivision of
the disk into polar cells.

The working coordinates are (v, theta) with v = |z|^2 / (1 - |z|^2): the
hyperbolic measure of a cell is exactly dv dtheta / (2 pi), so cell measures
are additive with no quadrature error, and the unbounded density at the
boundary disappears.  A cell whose 3x3 u-samples all clear the level with a
margin exceeding a fixed fraction of the sampled variation is classified
INSIDE or OUTSIDE; the rest are BOUNDARY and get split along the direction
of larger variation until the total BOUNDARY measure is below the error
budget.  The reported value refines the bracket midpoint by subsampling the
surviving boundary cells; the reported error is half the bracket width.

Quantities derived from the profile t -> mu(t):

* g(t) = t^(1/b) (mu(t) + 1), decreasing in t for every analytic f (and
  constant exactly when the level sets are the centered disks of u = (1-|z|^2)^b);
* the weak-type margin max(1/t - 1, 0) - mu(t), non-negative for functions of
  unit Hardy norm;
* Hardy and Bergman norms recovered from the profile alone, via
  sup_t t (mu(t) + 1)  and  r(r-1) * int mu(t) t^(r-1) dt;
* hyperbolic boundary length of level curves and the isoperimetric residual
  |dA|_h^2 - 4 pi mu - 4 pi mu^2, zero exactly for hyperbolic disks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from skimage import measure as _skmeasure

from .config import DEFAULT_CONFIG, QuadratureConfig
from .errors import DegenerateContourError, DomainError
from .functions import PointwiseFunction
from .geometry import DiskPoint

# margin-to-variation ratio a 3x3 sample must clear before a cell is trusted
# to lie entirely on one side of the level
INSIDE_SAFETY = 0.3
# anisotropy ratio above which a cell is split along one direction only
SPLIT_RATIO = 4.0
MAX_BOUNDARY_CELLS = 600_000
MAX_ROUNDS = 64
DEFAULT_MU_TOL = 1e-4

_FR3 = np.array([0.0, 0.5, 1.0])
_FR5 = (np.arange(5) + 0.5) / 5.0


@dataclass
class CellTree:
    """Flattened record of the subdivision: the surviving boundary cells.

    inside_measure and inside_measure + boundary_measure bracket mu(t).
    """

    v_lo: np.ndarray
    v_hi: np.ndarray
    th_lo: np.ndarray
    th_hi: np.ndarray
    inside_measure: float
    boundary_measure: float
    rounds: int
    evaluations: int


@dataclass
class LevelProfile:
    """Sampled decreasing profile t -> mu(t) with per-sample error bounds."""

    pf: PointwiseFunction
    t0: float
    argmax: complex
    ts: np.ndarray
    mus: np.ndarray
    errs: np.ndarray

    @property
    def b(self) -> float:
        return self.pf.b

    def g_values(self) -> np.ndarray:
        return self.ts ** (1.0 / self.b) * (self.mus + 1.0)

    def csv_rows(self):
        g = self.g_values()
        for i in range(len(self.ts)):
            yield (float(self.ts[i]), float(self.mus[i]), float(self.errs[i]), float(g[i]))


def _sample_grid(pf: PointwiseFunction, v_lo, v_hi, th_lo, th_hi, fractions):
    k = len(fractions)
    vs = v_lo[None, :] + fractions[:, None] * (v_hi - v_lo)[None, :]
    ths = th_lo[None, :] + fractions[:, None] * (th_hi - th_lo)[None, :]
    return pf.values_vtheta(vs[:, None, :], ths[None, :, :]).reshape(k, k, -1)


class _Cells:
    """A flat batch of polar cells in the (v, theta) coordinates."""

    def __init__(self, v_lo, v_hi, th_lo, th_hi):
        self.v_lo, self.v_hi, self.th_lo, self.th_hi = v_lo, v_hi, th_lo, th_hi

    def __len__(self):
        return len(self.v_lo)

    def area(self):
        return (self.v_hi - self.v_lo) * (self.th_hi - self.th_lo) / (2.0 * np.pi)

    def select(self, mask):
        return _Cells(self.v_lo[mask], self.v_hi[mask], self.th_lo[mask], self.th_hi[mask])

    @classmethod
    def initial(cls, pf: PointwiseFunction, v_max: float):
        hint = pf.af.angular_degree_hint()
        n_th = int(min(256, max(32, 4 * hint)))
        n_v = int(min(128, max(16, 2 * hint)))
        v_edges = (1.0 + v_max) ** (np.arange(n_v + 1) / n_v) - 1.0
        th_edges = 2.0 * np.pi * np.arange(n_th + 1) / n_th
        return cls(
            np.repeat(v_edges[:-1], n_th),
            np.repeat(v_edges[1:], n_th),
            np.tile(th_edges[:-1], n_v),
            np.tile(th_edges[1:], n_v),
        )

    def split(self, var_v, var_th, cap=MAX_BOUNDARY_CELLS):
        """Halve each cell along the direction of larger sampled variation.

        Cells with comparable variation split into quadrants.  If the split
        would exceed ``cap`` cells, only the largest cells split this round.
        """
        only_v = var_v > SPLIT_RATIO * var_th
        only_th = var_th > SPLIT_RATIO * var_v
        quad = ~(only_v | only_th)
        projected = 2 * only_v.sum() + 2 * only_th.sum() + 4 * quad.sum()
        if projected > cap:
            areas = (self.v_hi - self.v_lo) * (self.th_hi - self.th_lo)
            rank = np.argsort(-areas, kind="stable")
            allowed = np.zeros(len(self), dtype=bool)
            allowed[rank[: cap // 4]] = True
            only_v &= allowed
            only_th &= allowed
            quad &= allowed
            hold = ~(only_v | only_th | quad)
        else:
            hold = np.zeros(len(self), dtype=bool)

        v_mid = 0.5 * (self.v_lo + self.v_hi)
        th_mid = 0.5 * (self.th_lo + self.th_hi)
        parts = []
        for mask, lo_v, hi_v, lo_t, hi_t in (
            (hold, self.v_lo, self.v_hi, self.th_lo, self.th_hi),
            (only_v, self.v_lo, v_mid, self.th_lo, self.th_hi),
            (only_v, v_mid, self.v_hi, self.th_lo, self.th_hi),
            (only_th, self.v_lo, self.v_hi, self.th_lo, th_mid),
            (only_th, self.v_lo, self.v_hi, th_mid, self.th_hi),
            (quad, self.v_lo, v_mid, self.th_lo, th_mid),
            (quad, self.v_lo, v_mid, th_mid, self.th_hi),
            (quad, v_mid, self.v_hi, self.th_lo, th_mid),
            (quad, v_mid, self.v_hi, th_mid, self.th_hi),
        ):
            parts.append((lo_v[mask], hi_v[mask], lo_t[mask], hi_t[mask]))
        return _Cells(*(np.concatenate([p[j] for p in parts]) for j in range(4)))


def multi_mu(
    pf: PointwiseFunction,
    ts,
    tol: float = DEFAULT_MU_TOL,
    scale_tol: bool = True,
    return_tree: bool = False,
):
    """mu(t) for a batch of levels sharing one adaptive subdivision.

    The superlevel sets are nested, so a single cell tree serves every level:
    each cell is unresolved only for the handful of levels its u-range
    straddles, which makes a whole profile cost little more than its deepest
    level.  Per level the error budget is ``tol`` (times the running measure
    estimate when ``scale_tol`` is set, keeping relative accuracy roughly
    uniform as mu grows).  Returns (values, errors) aligned with ``ts``.
    """
    ts = np.asarray(ts, dtype=float)
    if np.any(ts <= 0):
        raise DomainError("mu(t) is infinite for t <= 0")
    if np.any(np.diff(ts) > 0):
        raise DomainError("levels must be non-increasing")
    L = len(ts)
    values = np.zeros(L)
    errs = np.zeros(L)
    sup = pf.sup_bound()
    converged = ts >= sup  # nothing above the sup bound: measure 0 exactly
    tree = CellTree(*(np.empty(0),) * 4, 0.0, 0.0, 0, 0)
    if converged.all():
        return (values, errs, tree) if return_tree else (values, errs)

    t_min = float(ts[~converged].min())
    v_max = (sup / t_min) ** (1.0 / pf.b) - 1.0
    cells = _Cells.initial(pf, v_max)
    inside_acc = np.zeros(L)
    evaluations = 0

    for rounds in range(1, MAX_ROUNDS + 1):
        u = _sample_grid(pf, cells.v_lo, cells.v_hi, cells.th_lo, cells.th_hi, _FR3)
        evaluations += u.size
        umin = u.min(axis=(0, 1))
        umax = u.max(axis=(0, 1))
        var = umax - umin
        area = cells.area()

        margin_in = umin[None, :] - ts[:, None]
        margin_out = ts[:, None] - umax[None, :]
        is_in = (margin_in > 0) & (margin_in >= INSIDE_SAFETY * var[None, :])
        is_out = (margin_out > 0) & (margin_out >= INSIDE_SAFETY * var[None, :])
        is_bnd = ~(is_in | is_out)

        open_levels = np.flatnonzero(~converged)
        bm = is_bnd[open_levels] @ area
        est = inside_acc[open_levels] + is_in[open_levels] @ area + 0.5 * bm
        budget = tol * np.maximum(1.0, est) if scale_tol else np.full(len(bm), tol)
        done_now = bm <= 2.0 * budget
        last_round = rounds == MAX_ROUNDS or len(cells) == 0

        freeze = open_levels[done_now] if not last_round else open_levels
        if len(freeze):
            # refine the bracket midpoint of each frozen level by subsampling
            union = is_bnd[freeze].any(axis=0)
            frac = np.zeros((len(freeze), len(cells)))
            if union.any():
                sub = cells.select(union)
                u5 = _sample_grid(pf, sub.v_lo, sub.v_hi, sub.th_lo, sub.th_hi, _FR5)
                evaluations += u5.size
                above = u5[:, :, None, :] > ts[freeze][None, None, :, None]
                frac[:, union] = above.mean(axis=(0, 1))
            for row, i in enumerate(freeze):
                inner = inside_acc[i] + float(area[is_in[i]].sum())
                corr = float(np.dot(frac[row] * is_bnd[i], area))
                values[i] = inner + corr
                bmi = float(area[is_bnd[i]].sum())
                errs[i] = 0.5 * bmi + 1e-15 * (1.0 + values[i])
                converged[i] = True

        if converged.all() or last_round:
            tree = CellTree(
                cells.v_lo,
                cells.v_hi,
                cells.th_lo,
                cells.th_hi,
                float(inside_acc[np.argmin(ts)]),
                float(area[is_bnd[np.argmin(ts)]].sum()) if len(cells) else 0.0,
                rounds,
                evaluations,
            )
            break

        open_levels = np.flatnonzero(~converged)
        active = is_bnd[open_levels].any(axis=0)
        retired = ~active
        if retired.any():
            inside_acc[open_levels] += is_in[open_levels][:, retired] @ area[retired]
        var_v = np.abs(u[2] - u[0]).max(axis=0)[active]
        var_th = np.abs(u[:, 2] - u[:, 0]).max(axis=0)[active]
        cells = cells.select(active).split(var_v, var_th)

    return (values, errs, tree) if return_tree else (values, errs)


def mu(
    pf: PointwiseFunction,
    t: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    tol: float = DEFAULT_MU_TOL,
    return_tree: bool = False,
):
    """Hyperbolic measure of {u > t}, returned as (value, error bound).

    ``tol`` is the absolute error budget: subdivision continues until the
    total measure of unresolved boundary cells is below 2*tol (or the cell
    budget runs out, in which case the reported error is honest but larger).
    Levels at or above the maximum of u return (0, 0); t <= 0 is rejected
    since the measure would be infinite.
    """
    out = multi_mu(pf, np.asarray([t]), tol=tol, scale_tol=False, return_tree=return_tree)
    if return_tree:
        values, errors, tree = out
        return float(values[0]), float(errors[0]), tree
    values, errors = out
    return float(values[0]), float(errors[0])


def sup_u(pf: PointwiseFunction, tol: float = 1e-10):
    """Maximum of u over the disk and its location, by refining grid search.

    Scans a global polar grid, then zooms a local grid around the best few
    candidates until the value is stable to ``tol``.
    """
    hint = pf.af.angular_degree_hint()
    n_th = int(min(384, max(64, 6 * hint)))
    n_s = 192
    s = np.linspace(0.0, 1.0 - 1e-9, n_s)
    theta = 2.0 * np.pi * np.arange(n_th) / n_th
    z = np.sqrt(s)[:, None] * np.exp(1j * theta)[None, :]
    u = pf.values(z)

    flat = np.argsort(u, axis=None)[::-1]
    seeds = []
    for idx in flat[: 4 * n_th]:
        i, j = divmod(int(idx), n_th)
        if all(
            abs(s[i] - ps) > 3.0 / n_s or min(abs(theta[j] - pt), 2 * np.pi - abs(theta[j] - pt)) > 12.0 / n_th
            for ps, pt in seeds
        ):
            seeds.append((s[i], theta[j]))
        if len(seeds) == 3:
            break

    best_val, best_z = -math.inf, 0j
    for s_c, th_c in seeds:
        ws, wt = 2.0 / n_s, 2.0 * np.pi / n_th
        val = -math.inf
        for _ in range(16):
            ss = np.clip(np.linspace(s_c - ws, s_c + ws, 11), 0.0, 1.0 - 1e-12)
            ts = np.linspace(th_c - wt, th_c + wt, 11)
            zz = np.sqrt(ss)[:, None] * np.exp(1j * ts)[None, :]
            uu = pf.values(zz)
            k = np.argmax(uu)
            i, j = divmod(int(k), 11)
            new_val = float(uu[i, j])
            s_c, th_c = float(ss[i]), float(ts[j])
            converged = abs(new_val - val) <= tol * max(1.0, abs(new_val))
            val = max(val, new_val)
            ws /= 4.0
            wt /= 4.0
            if converged and ws < 1e-12:
                break
        if val > best_val:
            best_val = val
            best_z = math.sqrt(s_c) * complex(math.cos(th_c), math.sin(th_c))
    return best_val, DiskPoint.from_complex(best_z)


def level_profile(
    pf: PointwiseFunction,
    n_levels: int,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    tol: float = DEFAULT_MU_TOL,
    scale_tol: bool = True,
) -> LevelProfile:
    """Profile on the geometric grid t_i = t0 * 2^(-i/2), i = 1..n_levels.

    With ``scale_tol`` the per-level error budget grows with the measure
    found at the previous (larger) level, keeping the relative accuracy of
    the samples roughly uniform as mu blows up toward t -> 0.
    """
    if n_levels < 8:
        raise DomainError("need at least 8 levels")
    t0, argmax = sup_u(pf)
    ts = t0 * 2.0 ** (-0.5 * np.arange(1, n_levels + 1))
    mus, errs = multi_mu(pf, ts, tol=tol, scale_tol=scale_tol)
    return LevelProfile(pf, t0, argmax.z, ts, mus, errs)


def g_of_t(profile: LevelProfile) -> np.ndarray:
    """g(t_i) = t_i^(1/b) (mu(t_i) + 1) along the profile grid."""
    return profile.g_values()


def weak_type_margin(f, p: float, profile: LevelProfile) -> float:
    """min over the grid of max(1/t - 1, 0) - mu(t), for unit Hardy norm f.

    Non-negative (up to the profile error) for every f with ||f||_{H^p} = 1;
    identically zero when f is a normalized reproducing kernel.
    """
    if profile.pf.b != 1.0:
        raise DomainError("weak-type bound needs a profile computed with b = 1")
    bound = np.maximum(1.0 / profile.ts - 1.0, 0.0)
    return float(np.min(bound - profile.mus))


@dataclass(frozen=True)
class LevelNormEstimate:
    """Norm recovered from a profile: the sup form and the smallest-t limit form."""

    sup_form: float
    limit_form: float


def hardy_norm_from_levels(profile: LevelProfile, p: float) -> LevelNormEstimate:
    """||f||_{H^p} from the profile via sup_t t (mu(t) + 1).

    The same quantity at the smallest grid level estimates the equivalent
    t -> 0 limit form.
    """
    if profile.pf.b != 1.0:
        raise DomainError("norm recovery needs a profile computed with a = p, b = 1")
    vals = profile.ts * (profile.mus + 1.0)
    return LevelNormEstimate(
        sup_form=float(np.max(vals) ** (1.0 / p)),
        limit_form=float(vals[-1] ** (1.0 / p)),
    )


def bergman_norm_from_levels(profile: LevelProfile, p: float, r: float) -> float:
    """||f||_{A^{pr}_r} from the profile via r(r-1) * int mu(t) t^(r-1) dt.

    The integral below the smallest grid level is extrapolated with
    mu(t) ~ kappa/t - 1, kappa = t_min (mu(t_min) + 1).
    """
    if r <= 1:
        raise DomainError("need r > 1")
    if profile.pf.b != 1.0:
        raise DomainError("norm recovery needs a profile computed with a = p, b = 1")
    c_r = r * (r - 1.0)
    ts = profile.ts
    mus = profile.mus
    integrand = mus * ts ** (r - 1.0)
    # top segment [t_1, t0] with mu(t0) = 0, then the interior trapezoids
    total = 0.5 * integrand[0] * (profile.t0 - ts[0])
    total += float(np.sum(0.5 * (integrand[:-1] + integrand[1:]) * (ts[:-1] - ts[1:])))
    t_min = float(ts[-1])
    kappa = t_min * (mus[-1] + 1.0)
    total += kappa * t_min ** (r - 1.0) / (r - 1.0) - t_min**r / r
    return float((c_r * total) ** (1.0 / (p * r)))


# --- level curves ---------------------------------------------------------

SQRT_PI = math.sqrt(math.pi)


def boundary_length(
    pf: PointwiseFunction,
    t: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    rel_tol: float = 2e-4,
) -> float:
    """Hyperbolic length of the level curve {u = t}.

    Extracts the curve by marching squares on a refining Cartesian grid and
    sums segment lengths against the weight 1/((1-|z|^2) sqrt(pi)).  Raises
    DegenerateContourError when the extraction does not stabilize, which is
    the signature of a critical level (saddle) at or near t.
    """
    sup = pf.sup_bound()
    if t >= sup or t <= 0:
        raise DegenerateContourError(f"no level curve at t = {t}")
    s_hi = 1.0 - (t / sup) ** (1.0 / pf.b)
    r_box = min(math.sqrt(s_hi) * 1.02 + 1e-3, 0.999999)
    n = 384
    prev = None
    for _ in range(6):
        step = 2.0 * r_box / (n - 1)
        axis = np.linspace(-r_box, r_box, n)
        zgrid = axis[None, :] + 1j * axis[:, None]
        ugrid = pf.values(zgrid)
        contours = _skmeasure.find_contours(ugrid, t)
        if not contours:
            raise DegenerateContourError(f"no contour found at level {t}")
        total = 0.0
        for poly in contours:
            if not np.allclose(poly[0], poly[-1]):
                raise DegenerateContourError(
                    f"open contour at level {t}: level may be critical or box too small"
                )
            pts = (-r_box + poly[:, 1] * step) + 1j * (-r_box + poly[:, 0] * step)
            seg = np.diff(pts)
            mids = 0.5 * (pts[:-1] + pts[1:])
            weight = 1.0 / ((1.0 - np.abs(mids) ** 2) * SQRT_PI)
            total += float(np.sum(np.abs(seg) * weight))
        if prev is not None and abs(total - prev) <= rel_tol * max(total, 1e-300):
            return total
        prev = total
        n *= 2
    raise DegenerateContourError(
        f"length did not stabilize at level {t} (last {prev} vs {total}); try a nearby level"
    )


def boundary_length_near(
    pf: PointwiseFunction,
    t: float,
    t0: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    rel_tol: float = 2e-4,
):
    """boundary_length with the standard nudge past critical levels.

    Returns (length, level actually used); the level is perturbed in steps
    of 1e-6 * t0 when extraction reports a degeneracy.
    """
    last = DegenerateContourError(f"no stable level near {t}")
    for k in (0, 1, -1, 10, -10):
        try:
            tt = t + k * 1e-6 * t0
            return boundary_length(pf, tt, cfg, rel_tol), tt
        except DegenerateContourError as exc:
            last = exc
    raise last


def contour_polylines(pf: PointwiseFunction, t: float, n: int = 1024):
    """Level-curve polylines in the plane, for CSV export and plotting."""
    sup = pf.sup_bound()
    if t >= sup or t <= 0:
        raise DegenerateContourError(f"no level curve at t = {t}")
    s_hi = 1.0 - (t / sup) ** (1.0 / pf.b)
    r_box = min(math.sqrt(s_hi) * 1.02 + 1e-3, 0.999999)
    step = 2.0 * r_box / (n - 1)
    axis = np.linspace(-r_box, r_box, n)
    zgrid = axis[None, :] + 1j * axis[:, None]
    ugrid = pf.values(zgrid)
    out = []
    for poly in _skmeasure.find_contours(ugrid, t):
        xs = -r_box + poly[:, 1] * step
        ys = -r_box + poly[:, 0] * step
        out.append(np.column_stack([xs, ys]))
    return out


def isoperimetric_residual(
    pf: PointwiseFunction,
    t: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> float:
    """|boundary|_h^2 - 4 pi mu - 4 pi mu^2 for the superlevel set at t.

    Non-negative for every admissible set; zero exactly for hyperbolic disks,
    hence for the level sets of the radial case and of every kernel.
    """
    length = boundary_length(pf, t, cfg)
    rough, _ = mu(pf, t, cfg, tol=1e-2)
    budget = max(2e-6, 1e-4 * max(rough, 1e-2))
    value, _ = mu(pf, t, cfg, tol=budget)
    return length**2 - 4.0 * math.pi * value - 4.0 * math.pi * value**2
