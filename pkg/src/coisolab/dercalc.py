"""Cartan calculus on the derivation algebroid of a trivialized line bundle.

Over a trivialized line bundle L = M x R a derivation is a pair (X, a) of a
vector field and a scalar multiplier, acting on sections (scalar fields) by
X(lam) + a*lam.  Forms valued in L split accordingly: a degree-k Atiyah form
is a pair (alpha, beta) with alpha an ordinary k-form and beta a (k-1)-form,
evaluated on derivations (X_i, a_i) as

    eta(b_1, ..., b_k) = alpha(X_1, ..., X_k)
                         + sum_i (-1)^(i+1) a_i * beta(X_1, ..no X_i.., X_k)

In this splitting the structural operators are

    d(alpha, beta)      = (d alpha, alpha - d beta)
    iota_(X,a)(al, be)  = (iota_X al + a*be, -iota_X be)
    lie_b               = d o iota_b + iota_b o d

The differential's shape is pinned down by the contracting-homotopy identity
[d, iota_1] = id for the identity derivation 1 = (0, 1); the test suite
cross-validates it against the intrinsic Koszul formula on random derivation
tuples.
"""

from __future__ import annotations

from typing import Mapping

from .fields import Field, ShapeError, Space, VectorField
from .fields import _merge_into, _mul_into


class DegreeError(ValueError):
    """Operation invalid for the form's degree."""


def _insert_axis(idx: tuple, axis: int):
    """Insert axis into a strictly increasing tuple; returns (tuple, sign)
    with sign = (-1)^position, or (None, 0) if axis already present."""
    if axis in idx:
        return None, 0
    pos = sum(1 for i in idx if i < axis)
    out = idx[:pos] + (axis,) + idx[pos:]
    return out, (-1) ** pos


class Form:
    """Ordinary exterior form with Field coefficients, stored sparsely on
    strictly increasing index tuples."""

    __slots__ = ("space", "degree", "comps")

    def __init__(self, space: Space, degree: int, comps: Mapping | None = None):
        if degree < 0:
            raise DegreeError("negative form degree")
        cleaned = {}
        if comps:
            for idx, f in comps.items():
                idx = tuple(idx)
                if len(idx) != degree or any(i < 0 or i >= space.dim for i in idx):
                    raise ShapeError(f"bad index tuple {idx} for degree {degree}")
                if list(idx) != sorted(set(idx)):
                    raise ShapeError(f"index tuple {idx} not strictly increasing")
                if f.space != space:
                    raise ShapeError("component space mismatch")
                if not f.is_zero():
                    cleaned[idx] = f
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "comps", cleaned)

    def __setattr__(self, name, value):
        raise AttributeError("Form is immutable")

    @classmethod
    def zero(cls, space: Space, degree: int) -> "Form":
        return cls(space, degree)

    @classmethod
    def scalar(cls, field: Field) -> "Form":
        return cls(field.space, 0, {(): field})

    def component(self, idx) -> Field:
        return self.comps.get(tuple(idx), Field.zero(self.space))

    def is_zero(self) -> bool:
        return not self.comps

    def max_abs(self) -> float:
        return max((f.max_abs() for f in self.comps.values()), default=0.0)

    def __add__(self, other: "Form") -> "Form":
        if other.space != self.space or other.degree != self.degree:
            raise ShapeError("form mismatch in addition")
        out = dict(self.comps)
        for idx, f in other.comps.items():
            out[idx] = out[idx] + f if idx in out else f
        return Form(self.space, self.degree, out)

    def __neg__(self) -> "Form":
        return Form(self.space, self.degree, {i: -f for i, f in self.comps.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __mul__(self, factor) -> "Form":
        """Scale by a number or a scalar Field."""
        return Form(self.space, self.degree,
                    {i: f * factor for i, f in self.comps.items()})

    __rmul__ = __mul__

    def d(self) -> "Form":
        """Exterior differential."""
        acc: dict = {}
        losses: dict = {}
        for idx, f in self.comps.items():
            for axis in range(self.space.dim):
                new_idx, sign = _insert_axis(idx, axis)
                if not sign:
                    continue
                term = f.partial(axis)
                if term.is_zero():
                    continue
                _merge_into(acc.setdefault(new_idx, {}), term.coeffs, sign)
                losses[new_idx] = losses.get(new_idx, 0.0) + term.trunc_loss
        return Form(self.space, self.degree + 1,
                    {i: Field(self.space, c, losses[i]) for i, c in acc.items()})

    def contract(self, vf: VectorField) -> "Form":
        """Interior product iota_V."""
        if self.degree == 0:
            raise DegreeError("cannot contract a 0-form")
        if vf.space != self.space:
            raise ShapeError("vector field space mismatch")
        acc: dict = {}
        losses: dict = {}
        for idx, f in self.comps.items():
            for pos, axis in enumerate(idx):
                comp = vf.components[axis]
                if comp.is_zero():
                    continue
                rest = idx[:pos] + idx[pos + 1:]
                loss = _mul_into(acc.setdefault(rest, {}), comp, f, (-1) ** pos)
                losses[rest] = (losses.get(rest, 0.0) + loss
                                + comp.trunc_loss + f.trunc_loss)
        return Form(self.space, self.degree - 1,
                    {i: Field(self.space, c, losses[i]) for i, c in acc.items()})

    def __call__(self, *vfs: VectorField) -> Field:
        """Full evaluation on degree-many vector fields."""
        if len(vfs) != self.degree:
            raise ShapeError(f"degree-{self.degree} form applied to {len(vfs)} fields")
        form = self
        for vf in vfs:
            form = form.contract(vf)
        return form.component(())

    def evaluate_at(self, idx, point) -> float:
        """Numeric component value, any index order (sign-tracked)."""
        idx = tuple(idx)
        if len(set(idx)) != len(idx):
            return 0.0
        order = tuple(sorted(idx))
        sign = _permutation_sign(idx, order)
        return sign * self.component(order).evaluate(point)

    def __repr__(self):
        return f"Form(deg={self.degree}, {len(self.comps)} comps)"


def _permutation_sign(src: tuple, dst: tuple) -> int:
    perm = [dst.index(i) for i in src]
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


class Derivation:
    """Derivation of the trivialized line bundle: symbol vector field plus a
    scalar multiplier.  Acts on a section lam by symbol(lam) + scalar*lam."""

    __slots__ = ("symbol", "scalar")

    def __init__(self, symbol: VectorField, scalar: Field):
        if symbol.space != scalar.space:
            raise ShapeError("symbol and scalar live over different spaces")
        object.__setattr__(self, "symbol", symbol)
        object.__setattr__(self, "scalar", scalar)

    def __setattr__(self, name, value):
        raise AttributeError("Derivation is immutable")

    @property
    def space(self) -> Space:
        return self.symbol.space

    @classmethod
    def identity(cls, space: Space) -> "Derivation":
        return cls(VectorField.zero(space), Field.constant(space, 1.0))

    @classmethod
    def from_vector(cls, vf: VectorField) -> "Derivation":
        return cls(vf, Field.zero(vf.space))

    def apply(self, lam: Field) -> Field:
        if lam.space != self.space:
            raise ShapeError("section space mismatch")
        return self.symbol.apply(lam) + self.scalar * lam

    __call__ = apply

    def commutator(self, other: "Derivation") -> "Derivation":
        """[(X,a), (Y,b)] = ([X,Y], X(b) - Y(a)); the identity is central."""
        if other.space != self.space:
            raise ShapeError("space mismatch")
        return Derivation(self.symbol.bracket(other.symbol),
                          self.symbol.apply(other.scalar) - other.symbol.apply(self.scalar))

    def __repr__(self):
        return f"Derivation({self.space.torus_dim}+{self.space.fiber_dim}d)"


class AtiyahForm:
    """Degree-k Atiyah form in the trivialization, stored as the pair
    (alpha: k-form, beta: (k-1)-form); beta is absent in degree 0."""

    __slots__ = ("space", "degree", "alpha", "beta")

    def __init__(self, space: Space, degree: int, alpha: Form, beta: Form | None):
        if degree < 0:
            raise DegreeError("negative degree")
        if alpha.space != space or alpha.degree != degree:
            raise ShapeError("alpha degree/space mismatch")
        if degree == 0:
            if beta is not None and not beta.is_zero():
                raise ShapeError("degree-0 Atiyah forms have no beta part")
            beta = None
        else:
            if beta is None:
                beta = Form.zero(space, degree - 1)
            elif beta.space != space or beta.degree != degree - 1:
                raise ShapeError("beta degree/space mismatch")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    def __setattr__(self, name, value):
        raise AttributeError("AtiyahForm is immutable")

    @classmethod
    def zero(cls, space: Space, degree: int) -> "AtiyahForm":
        beta = Form.zero(space, degree - 1) if degree > 0 else None
        return cls(space, degree, Form.zero(space, degree), beta)

    @classmethod
    def of_section(cls, lam: Field) -> "AtiyahForm":
        return cls(lam.space, 0, Form.scalar(lam), None)

    @classmethod
    def of_pair(cls, alpha: Form, beta: Form | None) -> "AtiyahForm":
        return cls(alpha.space, alpha.degree, alpha, beta)

    def is_zero(self) -> bool:
        return self.alpha.is_zero() and (self.beta is None or self.beta.is_zero())

    def max_abs(self) -> float:
        m = self.alpha.max_abs()
        if self.beta is not None:
            m = max(m, self.beta.max_abs())
        return m

    def __add__(self, other: "AtiyahForm") -> "AtiyahForm":
        if other.degree != self.degree or other.space != self.space:
            raise ShapeError("Atiyah form mismatch in addition")
        beta = None
        if self.degree > 0:
            beta = self.beta + other.beta
        return AtiyahForm(self.space, self.degree, self.alpha + other.alpha, beta)

    def __neg__(self) -> "AtiyahForm":
        return AtiyahForm(self.space, self.degree, -self.alpha,
                          None if self.beta is None else -self.beta)

    def __sub__(self, other: "AtiyahForm") -> "AtiyahForm":
        return self + (-other)

    def __mul__(self, scalar) -> "AtiyahForm":
        return AtiyahForm(self.space, self.degree, self.alpha * scalar,
                          None if self.beta is None else self.beta * scalar)

    __rmul__ = __mul__

    # -- structural operators ------------------------------------------------

    def d(self) -> "AtiyahForm":
        """Differential (d alpha, alpha - d beta); on a section lam this is
        (d lam, lam), the first jet."""
        new_beta = self.alpha
        if self.beta is not None:
            new_beta = new_beta - self.beta.d()
        return AtiyahForm(self.space, self.degree + 1, self.alpha.d(), new_beta)

    def contract(self, box: Derivation) -> "AtiyahForm":
        """iota_(X,a) = (iota_X alpha + a*beta, -iota_X beta)."""
        if self.degree == 0:
            raise DegreeError("cannot contract a degree-0 Atiyah form")
        if box.space != self.space:
            raise ShapeError("derivation space mismatch")
        alpha = self.alpha.contract(box.symbol) + self.beta * box.scalar
        beta = None
        if self.degree >= 2:
            beta = -self.beta.contract(box.symbol)
        return AtiyahForm(self.space, self.degree - 1, alpha, beta)

    def lie(self, box: Derivation) -> "AtiyahForm":
        """Lie derivative via the Cartan formula d o iota + iota o d."""
        out = self.d().contract(box)
        if self.degree > 0:
            out = out + self.contract(box).d()
        return out

    def evaluate_on(self, boxes) -> Field:
        """Evaluate on degree-many derivations per the splitting contract."""
        boxes = list(boxes)
        if len(boxes) != self.degree:
            raise ShapeError(f"degree-{self.degree} form applied to {len(boxes)} derivations")
        symbols = [b.symbol for b in boxes]
        total = self.alpha(*symbols)
        if self.beta is not None:
            for i, b in enumerate(boxes):
                rest = symbols[:i] + symbols[i + 1:]
                term = b.scalar * self.beta(*rest)
                total = total + term * ((-1) ** i)
        return total

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        def dump(form):
            return [{"idx": list(idx), "field": f.to_json_dict()}
                    for idx, f in sorted(form.comps.items())]
        return {"degree": self.degree,
                "alpha": dump(self.alpha),
                "beta": dump(self.beta) if self.beta is not None else None}

    @classmethod
    def from_json_dict(cls, data: dict, space: Space) -> "AtiyahForm":
        degree = int(data["degree"])

        def load(entries, deg):
            comps = {}
            for e in entries or []:
                comps[tuple(e["idx"])] = Field.from_json_dict(e["field"])
            return Form(space, deg, comps)

        alpha = load(data["alpha"], degree)
        beta = load(data["beta"], degree - 1) if degree > 0 else None
        return cls(space, degree, alpha, beta)

    def __repr__(self):
        return f"AtiyahForm(deg={self.degree})"


def pullback_reduction(eta: AtiyahForm, target: Space) -> AtiyahForm:
    """Pull back along the bundle projection covering the torus projection
    that forgets trailing angles (frequencies gain trailing zeros).

    This is the trivialized instance of the general pullback of Atiyah forms
    along a regular bundle morphism; it commutes with the differential."""
    def lift(form: Form) -> Form:
        return Form(target, form.degree,
                    {idx: f.promote(target) for idx, f in form.comps.items()})

    beta = lift(eta.beta) if eta.beta is not None else None
    return AtiyahForm(target, eta.degree, lift(eta.alpha), beta)


def is_basic(eta: AtiyahForm, fiber_axes, tol: float = 1e-10):
    """Basic-form test against the generators (d/dx_a, 0) of the vertical
    derivations: eta is basic iff both iota and lie vanish on each generator.

    Returns (verdict, max coefficient magnitude among the tested forms)."""
    defect = 0.0
    for a in fiber_axes:
        box = Derivation.from_vector(VectorField.basis(eta.space, a))
        if eta.degree > 0:
            defect = max(defect, eta.contract(box).max_abs())
        defect = max(defect, eta.lie(box).max_abs())
    return defect <= tol, defect
