"""Characteristic distribution of a coisotropic graph: spanning frame,
involutivity diagnostics, leaf tracing, and topological classification of
leaves for the linear family (t*sin x1, 0).

For a section s = (f, g) the rank-2 characteristic distribution of its graph
is spanned by

    V1 = X(f) d1 - df/dx1 X + d4 - f Y
    V2 = X(g) d1 - dg/dx1 X + d5 - g Y

(unit d4 / d5 components: the normal form used throughout).  For the family
s_t the frame degenerates to span{d4 - t d2, d5}, whose leaves are 2-tori
when t is rational and cylinders otherwise; the rational/irrational
dichotomy is decided at floating-point resolution by continued fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import integrate
from .coisotropy import Section, xy_frame
from .fields import VectorField, wrap_torus


@dataclass(frozen=True)
class CharFrame:
    """Spanning frame of the characteristic distribution (normal form:
    v1 has unit d4 component, v2 has unit d5 component)."""

    v1: VectorField
    v2: VectorField


@dataclass(frozen=True)
class LeafTrace:
    points: np.ndarray      # wrapped samples on T^5
    lifted: np.ndarray      # unwrapped lift in R^5
    params: dict


@dataclass
class LeafClass:
    kind: str               # "torus" | "cylinder" | "plane" | "unknown"
    periods: tuple | None = None
    evidence: dict = dc_field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {"verdict": self.kind,
                "periods": list(self.periods) if self.periods else None,
                "evidence": self.evidence}


def characteristic_frame(s: Section) -> CharFrame:
    """Assemble the frame from the section by exact spectral algebra."""
    sp = s.space
    X, Y = xy_frame(sp)
    e1 = VectorField.basis(sp, 0)
    e4 = VectorField.basis(sp, 3)
    e5 = VectorField.basis(sp, 4)
    v1 = e1 * X(s.f) - X * s.f.partial(0) + e4 - Y * s.f
    v2 = e1 * X(s.g) - X * s.g.partial(0) + e5 - Y * s.g
    return CharFrame(v1, v2)


def involutivity_defect(frame: CharFrame, p) -> float:
    """Distance of [V1, V2](p) from span{V1(p), V2(p)}: the residual norm of
    the least-squares fit.  Zero (to roundoff) wherever the distribution is
    integrable; generically positive when the underlying section fails the
    coisotropicity equation."""
    br = frame.v1.bracket(frame.v2)
    b = br.evaluate_at(p)
    A = np.column_stack([frame.v1.evaluate_at(p), frame.v2.evaluate_at(p)])
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    return float(np.linalg.norm(A @ coef - b))


def trace_leaf(frame: CharFrame, start, duration: float, h: float = 1e-3,
               direction=(1.0, 0.0), err_tol: float = 1e-6) -> LeafTrace:
    """Integrate c1*V1 + c2*V2 from start, recording wrapped and lifted
    samples (the lift makes closure detection robust against dense
    windings)."""
    c1, c2 = direction
    w = frame.v1 * float(c1) + frame.v2 * float(c2)

    def rhs(y):
        return w.evaluate_at(y)

    lifted = integrate.rk4_flow(rhs, np.asarray(start, dtype=float), duration, h, err_tol)
    wrapped = np.array([wrap_torus(q, 5) for q in lifted])
    return LeafTrace(points=wrapped, lifted=lifted,
                     params={"steps": len(lifted) - 1, "h": h,
                             "start": list(np.asarray(start, dtype=float)),
                             "direction": [float(c1), float(c2)]})


def continued_fraction_convergents(t: float, max_denominator: int = 10 ** 6,
                                   max_terms: int = 64):
    """Partial quotients and convergents p/q of t, stopped once q exceeds
    max_denominator (or the expansion terminates at float resolution)."""
    quotients, convergents = [], []
    p_m2, p_m1 = 0, 1
    q_m2, q_m1 = 1, 0
    x = float(t)
    for _ in range(max_terms):
        a = math.floor(x)
        p = a * p_m1 + p_m2
        q = a * q_m1 + q_m2
        if q > max_denominator:
            break
        quotients.append(a)
        convergents.append((p, q))
        p_m2, p_m1 = p_m1, p
        q_m2, q_m1 = q_m1, q
        frac = x - a
        if frac < 1e-18:
            break
        x = 1.0 / frac
    return quotients, convergents


def classify_leaf_linear(t: float, tol: float = 1e-9,
                         max_denominator: int = 10 ** 6) -> LeafClass:
    """Leaf topology for the frame span{d4 - t d2, d5}.

    The x5 circle always closes, so the verdict is torus versus cylinder: a
    leaf is a 2-torus iff t is rational, with x4-period 2*pi*q for t = p/q in
    lowest terms.  Floating input forces a resolution boundary: t counts as
    rational when a continued-fraction convergent approximates it to within
    tol/q^2 (closeness measured on the natural q^2 scale, so that doubles of
    small rationals are accepted while the convergents every irrational has
    below the denominator cap are not)."""
    if not math.isfinite(t):
        raise ValueError(f"non-finite parameter {t}")
    quotients, convergents = continued_fraction_convergents(t, max_denominator)
    best = None
    for p, q in convergents:
        err = abs(t - p / q)
        if best is None or err < best[2]:
            best = (p, q, err)
        if err < tol / (q * q):
            evidence = {"convergent": [p, q], "error": err,
                        "partial_quotients": quotients,
                        "tol": tol, "max_denominator": max_denominator}
            return LeafClass("torus", periods=(2.0 * math.pi * q, 2.0 * math.pi),
                             evidence=evidence)
    evidence = {"partial_quotients": quotients,
                "best_convergent": list(best[:2]) if best else None,
                "best_error": best[2] if best else None,
                "tol": tol, "max_denominator": max_denominator}
    return LeafClass("cylinder", evidence=evidence)


def integrality_scan(t_values, tol: float = 1e-9,
                     max_denominator: int = 10 ** 6) -> dict:
    """Classify the family over a parameter list and flag the instability:
    the undeformed t = 0 leaf space is a torus fibration while parameters
    arbitrarily close to 0 produce cylinder (non-torus) leaves."""
    results = []
    for t in t_values:
        verdict = classify_leaf_linear(float(t), tol, max_denominator)
        results.append({"t": float(t), **verdict.to_json_dict()})
    torus_count = sum(1 for r in results if r["verdict"] == "torus")
    cylinder = [r["t"] for r in results if r["verdict"] == "cylinder"]
    report = {
        "results": results,
        "torus_count": torus_count,
        "cylinder_count": len(results) - torus_count,
    }
    if results:
        report["smallest_cylinder_t"] = min((abs(t) for t in cylinder), default=None)
        report["note"] = ("integrality is unstable: t = 0 closes into 2-tori, "
                          "yet every neighborhood of 0 contains parameters "
                          "whose leaves are cylinders")
    return report


def classify_section_leaf(s: Section, start, duration: float, h: float = 1e-3,
                          closure_tol: float = 1e-6) -> tuple[LeafClass, LeafTrace]:
    """Trace-based evidence for a general section's leaf.

    No general decision procedure exists here; the verdict stays "unknown"
    unless the trace exhibits a lattice closure (lifted displacement in
    2*pi*Z^5), in which case the evidence records it."""
    frame = characteristic_frame(s)
    trace = trace_leaf(frame, start, duration, h)
    disp = trace.lifted - trace.lifted[0]
    lattice = disp / (2.0 * math.pi)
    dist = np.max(np.abs(lattice - np.round(lattice)), axis=1)
    dist[0] = np.inf  # ignore the start point itself
    moved = np.max(np.abs(disp), axis=1) > 0.1
    hits = np.where((dist < closure_tol) & moved)[0]
    evidence = {"closure_hits": [int(i) for i in hits[:8]],
                "min_lattice_distance": float(np.min(dist[moved])) if moved.any() else None}
    return LeafClass("unknown", evidence=evidence), trace
