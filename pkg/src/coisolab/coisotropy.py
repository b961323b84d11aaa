"""Coisotropic sections of T^5 x R^2 -> T^5: residual PDE, linearization,
the fiber-integral obstruction, and a constrained Gauss-Newton prolongation
solver.

A candidate deformation of the zero section is a pair s = (f, g) of scalar
fields on T^5.  Its graph is coisotropic for the ambient contact structure
iff the first-order quadratic PDE

    df/dx1 * X(g) - dg/dx1 * X(f) = dg/dx4 - df/dx5 + g*Y(f) - f*Y(g)

holds, where X = cos x1 d/dx2 - sin x1 d/dx3 and Y = sin x1 d/dx2
+ cos x1 d/dx3.  ``residual`` returns LHS - RHS of this equation; only its
zero set matters.  Averaging the equation over the (x4, x5) torus kills the
two plain derivative terms and leaves the obstruction functional computed by
``kuranishi``: it must vanish for s to extend an infinitesimal deformation
to a genuine one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import Field, ShapeError, Space, VectorField, canonical_rep

BASE_TORUS_DIM = 5
FIBER_AXES = (3, 4)  # x4, x5


class PreconditionError(ValueError):
    """Solver input violates a stated precondition."""


def base_space(trunc_order: int = 8) -> Space:
    return Space(BASE_TORUS_DIM, 0, trunc_order, 0)


def xy_frame(space: Space):
    """The rotating horizontal frame (X, Y) on any space with >= 3 torus
    axes: X = cos x1 d2 - sin x1 d3, Y = sin x1 d2 + cos x1 d3."""
    if space.torus_dim < 3:
        raise ShapeError("frame needs at least three torus axes")
    z = Field.zero(space)
    c, s = Field.cos(space, 0), Field.sin(space, 0)
    comps_x = [z] * space.dim
    comps_y = [z] * space.dim
    comps_x[1], comps_x[2] = c, -s
    comps_y[1], comps_y[2] = s, c
    return VectorField(comps_x), VectorField(comps_y)


@dataclass(frozen=True)
class Section:
    """Deformation candidate s = f d_F x4 + g d_F x5 over T^5."""

    f: Field
    g: Field

    def __post_init__(self):
        for h in (self.f, self.g):
            if h.space.torus_dim != BASE_TORUS_DIM or h.space.fiber_dim != 0:
                raise ShapeError("section components must be scalar fields on T^5")
        if self.f.space != self.g.space:
            raise ShapeError("section components live over different spaces")

    @property
    def space(self) -> Space:
        return self.f.space

    def to_json_dict(self) -> dict:
        return {"f": self.f.to_json_dict(), "g": self.g.to_json_dict()}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Section":
        return cls(Field.from_json_dict(data["f"]), Field.from_json_dict(data["g"]))


def family_section(t: float, trunc_order: int = 8) -> Section:
    """The exactly coisotropic family (t*sin x1, 0)."""
    sp = base_space(trunc_order)
    return Section(Field.sin(sp, 0) * t, Field.zero(sp))


def _quadratic_part(u: Section, X: VectorField, Y: VectorField) -> Field:
    f, g = u.f, u.g
    return (f.partial(0) * X(g) - g.partial(0) * X(f)
            - g * Y(f) + f * Y(g))


def _bilinear_part(u: Section, v: Section, X: VectorField, Y: VectorField) -> Field:
    """Symmetric polarization of the quadratic part."""
    out = (u.f.partial(0) * X(v.g) + v.f.partial(0) * X(u.g)
           - u.g.partial(0) * X(v.f) - v.g.partial(0) * X(u.f)
           - u.g * Y(v.f) - v.g * Y(u.f)
           + u.f * Y(v.g) + v.f * Y(u.g))
    return out * 0.5


def residual(s: Section) -> Field:
    """Coisotropicity defect of the graph of s; zero iff coisotropic at the
    working truncation.  Truncation loss is carried on the result."""
    X, Y = xy_frame(s.space)
    return (_quadratic_part(s, X, Y)
            - s.g.partial(FIBER_AXES[0]) + s.f.partial(FIBER_AXES[1]))


def linearized_residual(s: Section) -> Field:
    """Derivative of the residual at the zero section, dg/dx4 - df/dx5 (the
    cocycle condition for infinitesimal deformations)."""
    return s.g.partial(FIBER_AXES[0]) - s.f.partial(FIBER_AXES[1])


def kuranishi(s: Section) -> Field:
    """Obstruction functional: the quadratic terms of the PDE averaged over
    the (x4, x5) torus, returned as a field on T^3.  Non-vanishing on an
    infinitesimal deformation forbids its prolongation."""
    X, Y = xy_frame(s.space)
    integrand = (s.f.partial(0) * X(s.g) - s.g.partial(0) * X(s.f)
                 + s.f * Y(s.g) - s.g * Y(s.f))
    return integrand.integrate_torus(FIBER_AXES).drop_torus_axes(FIBER_AXES)


def residual_from_jet(x1: float, f_val: float, g_val: float,
                      df: np.ndarray, dg: np.ndarray) -> float:
    """Pointwise residual from first-jet data (values and the five base
    partials of f and g at one point).  Used by sample-based flow checks."""
    c, s = math.cos(x1), math.sin(x1)
    Xf, Xg = c * df[1] - s * df[2], c * dg[1] - s * dg[2]
    Yf, Yg = s * df[1] + c * df[2], s * dg[1] + c * dg[2]
    return (df[0] * Xg - dg[0] * Xf - dg[3] + df[4]
            - g_val * Yf + f_val * Yg)


# ---------------------------------------------------------------------------
# Prolongation solver
# ---------------------------------------------------------------------------

@dataclass
class ProlongOptions:
    tol: float = 1e-9
    max_iters: int = 200
    damping: float = 0.0           # initial Levenberg parameter
    solver_radius: int | tuple = 1  # frequency radius of the unknowns (int or per-axis)
    stall_window: int = 5
    stall_rel: float = 1e-3
    trunc_order: int = 8


@dataclass
class SolverReport:
    status: str                    # "converged" | "obstructed" | "max_iters"
    iterations: int
    residual_norm_history: list = dc_field(default_factory=list)
    truncation_loss: float = 0.0
    final_section: Section | None = None
    diagnostic: str = ""

    def to_json_dict(self) -> dict:
        return {"status": self.status,
                "iterations": self.iterations,
                "residual_norm_history": list(self.residual_norm_history),
                "truncation_loss": self.truncation_loss,
                "final_section": self.final_section.to_json_dict()
                if self.final_section is not None else None,
                "diagnostic": self.diagnostic}


class _CoeffVec:
    """Real coordinates on a box of section coefficients.

    Hermitian pairs {k, -k} are stored once (canonical representative) as
    (re, im); the zero mode contributes its real part only.  Weights carry
    the Parseval multiplicity so the weighted Euclidean norm matches the
    field coefficient norm."""

    def __init__(self, space: Space, radii):
        self.space = space
        self.modes = []            # (field_index, k) canonical reps
        self.slots = {}            # (field_index, k) -> dof offset
        self.weights = []
        rng = [range(-r, r + 1) for r in radii]
        all_k = sorted(self._box(rng))
        offset = 0
        for fi in (0, 1):
            for k in all_k:
                self.modes.append((fi, k))
                self.slots[(fi, k)] = offset
                if any(k):
                    self.weights.extend([2.0, 2.0])
                    offset += 2
                else:
                    self.weights.append(1.0)
                    offset += 1
        self.size = offset
        self.weights = np.array(self.weights)

    @staticmethod
    def _box(ranges):
        out = [()]
        for r in ranges:
            out = [k + (a,) for k in out for a in r]
        return [k for k in out if canonical_rep(k)]

    def to_vec(self, s: Section) -> np.ndarray:
        v = np.zeros(self.size)
        for fi, h in enumerate((s.f, s.g)):
            for (k, _m), c in h.coeffs.items():
                if not canonical_rep(k):
                    continue
                slot = self.slots.get((fi, k))
                if slot is None:
                    raise PreconditionError(
                        f"mode {k} outside the solver box; enlarge solver_radius")
                v[slot] = c.real
                if any(k):
                    v[slot + 1] = c.imag
        return v

    def from_vec(self, v: np.ndarray) -> Section:
        fmodes, gmodes = {}, {}
        for (fi, k), slot in self.slots.items():
            re = v[slot]
            im = v[slot + 1] if any(k) else 0.0
            if re == 0.0 and im == 0.0:
                continue
            (fmodes if fi == 0 else gmodes)[k] = complex(re, im)
        sp = self.space
        return Section(Field.from_modes(sp, fmodes, add_conjugates=True),
                       Field.from_modes(sp, gmodes, add_conjugates=True))


class _ResidualRows:
    """Real coordinates on the residual's mode set (grown lazily)."""

    def __init__(self):
        self.slots = {}
        self.weights = []

    def slot(self, k) -> int:
        s = self.slots.get(k)
        if s is None:
            s = len(self.weights)
            self.slots[k] = s
            self.weights.extend([2.0, 2.0] if any(k) else [1.0])
        return s

    def insert(self, matrix_col, h: Field):
        for (k, _m), c in h.coeffs.items():
            if not canonical_rep(k):
                continue
            s = self.slot(k)
            matrix_col[s] = matrix_col.get(s, 0.0) + c.real
            if any(k):
                matrix_col[s + 1] = matrix_col.get(s + 1, 0.0) + c.imag


def prolong(direction: Section, eps: float, opts: ProlongOptions | None = None) -> SolverReport:
    """Try to extend an infinitesimal deformation to a genuine coisotropic
    section of size eps.

    Gauss-Newton on the Fourier coefficients of (f, g) minimizes the L2 norm
    of the residual, subject to the one-dimensional affine constraint that
    the orthogonal projection of (f, g) onto the span of the direction's
    coefficient vector equals eps; the constraint is eliminated by working
    in the orthogonal complement.  Verdicts: ``converged`` when the residual
    norm drops below tol; ``obstructed`` when the norm stalls (relative
    decrease below stall_rel over stall_window iterations) while still above
    100*tol; ``max_iters`` otherwise."""
    opts = opts or ProlongOptions()
    if not 0.0 < eps <= 0.5:
        raise PreconditionError(f"eps={eps} outside (0, 0.5]")
    lin = linearized_residual(direction)
    if lin.l2_norm() > 1e-10:
        raise PreconditionError(
            "direction is not an infinitesimal deformation "
            f"(linearized residual norm {lin.l2_norm():.3e} > 1e-10)")

    sp = Space(BASE_TORUS_DIM, 0, opts.trunc_order, 0)
    direction = Section(direction.f.promote(sp) if direction.space != sp else direction.f,
                        direction.g.promote(sp) if direction.space != sp else direction.g)
    radii = _solver_radii(direction, opts.solver_radius)
    vec = _CoeffVec(sp, radii)
    X, Y = xy_frame(sp)

    u = vec.to_vec(direction)
    w = vec.weights
    uu = float(np.dot(w * u, u))
    if uu == 0.0:
        raise PreconditionError("zero direction")

    def project_complement(z):
        return z - (np.dot(w * z, u) / uu) * u

    proj = np.eye(vec.size) - np.outer(u, w * u) / uu
    x = eps * u
    lam = opts.damping
    history = []
    status, diagnostic = "max_iters", ""
    iters_done = 0

    def full_residual(vec_x):
        return residual(vec.from_vec(vec_x))

    r_field = full_residual(x)
    norm = r_field.l2_norm()
    history.append(norm)

    for it in range(opts.max_iters):
        if norm < opts.tol:
            status = "converged"
            break
        if (len(history) > opts.stall_window and norm > 100.0 * opts.tol):
            prev = history[-1 - opts.stall_window]
            if prev > 0 and (prev - norm) / prev < opts.stall_rel:
                status = "obstructed"
                break

        A_cols, rows = _assemble_jacobian(vec, vec.from_vec(x), X, Y)
        m = len(rows.weights)
        if m * vec.size > 3e8:
            raise PreconditionError(
                f"solver system {m}x{vec.size} too large for dense assembly; "
                "reduce solver_radius (per-axis radii are accepted)")
        A = np.zeros((m, vec.size))
        for j, col in enumerate(A_cols):
            for slot, val in col.items():
                A[slot, j] = val
        rvec = np.zeros(m)
        rows_insert = {}
        rows.insert(rows_insert, r_field)
        for slot, val in rows_insert.items():
            rvec[slot] = val
        sw = np.sqrt(np.array(rows.weights))
        A = A * sw[:, None]
        rvec = rvec * sw
        AP = A @ proj

        improved = False
        for _attempt in range(12):
            if lam > 0:
                stacked = np.vstack([AP, math.sqrt(lam) * np.eye(vec.size)])
                target = np.concatenate([-rvec, np.zeros(vec.size)])
            else:
                stacked, target = AP, -rvec
            delta, *_ = np.linalg.lstsq(stacked, target, rcond=None)
            delta = project_complement(delta)
            x_new = eps * u + project_complement(x + delta - eps * u)
            r_new = full_residual(x_new)
            norm_new = r_new.l2_norm()
            if norm_new < norm or norm_new < opts.tol:
                x, r_field, norm = x_new, r_new, norm_new
                lam = lam / 10.0 if lam > 1e-12 else 0.0
                improved = True
                break
            lam = max(lam * 10.0, 1e-8)
        iters_done = it + 1
        history.append(norm)
        if not improved:
            if norm > 100.0 * opts.tol:
                status = "obstructed"
                diagnostic = "no descent direction found (damping exhausted)"
            else:
                diagnostic = ("stalled near the tolerance without a usable "
                              "Gauss-Newton direction")
            break
    else:
        iters_done = opts.max_iters

    if status == "max_iters" and norm < opts.tol:
        status = "converged"

    final = vec.from_vec(x)
    # soundness: recompute the final residual from scratch
    r_check = residual(final)
    if status == "converged" and r_check.l2_norm() >= opts.tol:
        status = "max_iters"
        diagnostic = "converged verdict failed the from-scratch residual recheck"
    return SolverReport(status=status, iterations=iters_done,
                        residual_norm_history=history,
                        truncation_loss=r_check.trunc_loss,
                        final_section=final, diagnostic=diagnostic)


def _solver_radii(direction: Section, radius):
    if isinstance(radius, int):
        radii = [radius] * BASE_TORUS_DIM
    else:
        radii = list(radius)
        if len(radii) != BASE_TORUS_DIM:
            raise PreconditionError("solver_radius needs one entry per torus axis")
    for h in (direction.f, direction.g):
        for (k, _m) in h.coeffs:
            for a, ka in enumerate(k):
                radii[a] = max(radii[a], abs(ka))
    return radii


def _assemble_jacobian(vec: _CoeffVec, s: Section, X, Y):
    """Columns of the Gauss-Newton Jacobian: the residual's directional
    derivative L(delta) + 2*B(s, delta) per real degree of freedom."""
    sp = vec.space
    zero = Field.zero(sp)
    rows = _ResidualRows()
    cols = []
    for (fi, k), _slot in sorted(vec.slots.items(), key=lambda kv: kv[1]):
        # one basis field per real dof: c_k = 1 for the real part, c_k = i
        # for the imaginary part of the canonical representative
        reps = (1.0,) if not any(k) else (1.0, 1j)
        for coeff in reps:
            basis = Field.from_modes(sp, {k: coeff}, add_conjugates=True)
            delta = Section(basis, zero) if fi == 0 else Section(zero, basis)
            col_field = (_bilinear_part(s, delta, X, Y) * 2.0
                         - delta.g.partial(FIBER_AXES[0]) + delta.f.partial(FIBER_AXES[1]))
            col = {}
            rows.insert(col, col_field)
            cols.append(col)
    return cols, rows
