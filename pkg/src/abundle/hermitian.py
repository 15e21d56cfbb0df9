"""A-valued hermitian inner products on projective modules.

A form on ``M = p A^m`` is stored as an ambient Gram matrix ``H`` and pairs
``(x, y) -> sum_ij conj(y_i) H_ij x_j``, so it is A-linear in the first slot.
On construction ``H`` is replaced by ``p H p + (1 - p)``: the identity padding
on the complement does not change any pairing of module elements but keeps
pointwise eigendecompositions well conditioned.
"""

from __future__ import annotations

import numpy as np

from .algebra import AlgebraElement, invert, positivity_violation, seminorm, sqrt_positive
from .calculus import pointwise_scale
from .checks import Check, all_passed
from .errors import Degenerate, ModuleMismatch, NotAutomorphism, NotHermitian, PivotNotInvertible
from .pmodule import MatrixOverA, ModuleElement, ModuleMap, PModule, adjoint, eye

HERMITIAN_TOL = 1e-12
EIGEN_FLOOR = 1e-10
AUTOMORPHISM_TOL = 1e-10
# positivity slack for pivots built from roundoff-level imaginary parts
PIVOT_POSITIVITY_TOL = 1e-9


def pad_gram(p: np.ndarray, gram: np.ndarray) -> np.ndarray:
    n, m = p.shape[0], p.shape[1]
    return p @ gram @ p + (eye(n, m) - p)


def pair(gram: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Raw pairing ``y* H x`` of ``(n, m)`` coordinate arrays."""
    return np.einsum("ni,nij,nj->n", np.conj(y), gram, x)


class HermitianForm:
    __slots__ = ("module", "gram")

    def __init__(self, module: PModule, gram):
        g = np.asarray(gram, dtype=complex)
        m = module.ambient_rank
        if g.shape != (module.grid_size, m, m):
            raise ValueError(f"Gram matrix of shape {g.shape} does not fit {module!r}")
        scale = max(1.0, seminorm(g))
        if seminorm(adjoint(g) - g) > HERMITIAN_TOL * scale:
            raise NotHermitian(f"Gram matrix is not hermitian (residual {seminorm(adjoint(g) - g):.3e})")
        self.module = module
        self.gram = MatrixOverA(pad_gram(module.p, g))

    @property
    def H(self) -> np.ndarray:
        return self.gram.entries

    def __repr__(self):
        return f"HermitianForm(on {self.module!r})"

    def pair(self, x, y) -> np.ndarray:
        return pair(self.H, np.asarray(x, dtype=complex), np.asarray(y, dtype=complex))

    def compressed_eigenvalues(self) -> list[np.ndarray]:
        """Eigenvalues of the Gram matrix restricted to the range of ``p``, per grid point."""
        out = []
        for t in range(self.module.grid_size):
            q = self.module.basis_of_range(t)
            c = adjoint(q) @ self.H[t] @ q
            out.append(np.linalg.eigvalsh((c + adjoint(c)) / 2))
        return out


def evaluate(form: HermitianForm, x: ModuleElement, y: ModuleElement) -> AlgebraElement:
    for v in (x, y):
        if v.module is not form.module and v.module != form.module:
            raise ModuleMismatch("element does not belong to the module of the form")
    return AlgebraElement(form.pair(x.coords, y.coords))


def standard_form(module: PModule) -> HermitianForm:
    """``sum_i x_i conj(y_i)`` restricted to the module."""
    return HermitianForm(module, eye(module.grid_size, module.ambient_rank))


def random_positive_gram(rng: np.random.Generator, n: int, m: int, shift: float = 0.1) -> np.ndarray:
    """``B B* + shift`` for a random complex ``B``; positive definite by construction."""
    b = (rng.standard_normal((n, m, m)) + 1j * rng.standard_normal((n, m, m))) / np.sqrt(2)
    g = b @ adjoint(b) + shift * eye(n, m)
    return (g + adjoint(g)) / 2


class AxiomReport:
    """Residuals of the four inner-product axioms."""

    def __init__(self, linearity: Check, symmetry: Check, positivity: Check, nondegeneracy: Check):
        self.linearity = linearity
        self.symmetry = symmetry
        self.positivity = positivity
        self.nondegeneracy = nondegeneracy

    @property
    def checks(self) -> tuple[Check, ...]:
        return (self.linearity, self.symmetry, self.positivity, self.nondegeneracy)

    @property
    def passed(self) -> bool:
        return all_passed(self.checks)

    def __repr__(self):
        parts = ", ".join(f"{c.name}={c.residual:.2e}{'' if c.passed else '!'}" for c in self.checks)
        return f"AxiomReport({parts})"


def verify_axioms(form: HermitianForm, samples=None, tol: float = 1e-9,
                  rng: np.random.Generator | None = None, n_samples: int = 8) -> AxiomReport:
    """Check first-slot linearity, conjugate symmetry, positivity and nondegeneracy.

    Nondegeneracy is pointwise positive-definiteness of the Gram matrix
    compressed to the range of ``p``; its entry reports the smallest such
    eigenvalue and passes when it exceeds ``tol``.
    """
    module = form.module
    rng = np.random.default_rng(0) if rng is None else rng
    if samples is None:
        samples = [module.random_element(rng) for _ in range(n_samples)]
    xs = [s.coords if isinstance(s, ModuleElement) else module.project_coords(s) for s in samples]
    n = module.grid_size

    lin, sym, pos = [], [], []
    for idx, x in enumerate(xs):
        y = xs[(idx + 1) % len(xs)]
        w = xs[(idx + 2) % len(xs)]
        a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        combo = pointwise_scale(a, x) + pointwise_scale(b, w)
        lin.append(seminorm(form.pair(combo, y) - (a * form.pair(x, y) + b * form.pair(w, y))))
        sym.append(seminorm(form.pair(y, x) - np.conj(form.pair(x, y))))
        pos.append(positivity_violation(form.pair(x, x)))

    eigs = [e for e in form.compressed_eigenvalues() if e.size]
    min_eigs = [float(np.min(e)) for e in eigs] or [float("inf")]
    return AxiomReport(
        Check.upper("linearity", lin, tol, anchor="hermitian form: A-linear in the first slot"),
        Check.upper("symmetry", sym, tol, anchor="hermitian form: a(y,x) = a(x,y)*"),
        Check.upper("positivity", pos, tol, anchor="hermitian form: a(x,x) positive"),
        Check.lower("nondegeneracy", min_eigs, tol,
                    anchor="hermitian form: nondegenerate, x -> a(., x) is an isomorphism"),
    )


def _pointwise_inverse_sqrt(h: np.ndarray, floor: float) -> np.ndarray:
    w, v = np.linalg.eigh((h + adjoint(h)) / 2)
    if np.min(w) <= floor:
        bad = sorted(set(np.nonzero(w <= floor)[0].tolist()))
        raise Degenerate(f"Gram matrix has eigenvalue <= {floor:g} at grid points {bad}")
    return v @ (w[..., :, None] ** -0.5 * adjoint(v))


def isometry_to_standard(form: HermitianForm, tol: float = EIGEN_FLOOR) -> ModuleMap:
    """An automorphism ``f`` of the module with ``form(f x, f y) = standard(x, y)``.

    ``f`` is the inverse square root of the padded Gram matrix, compressed to
    the module; the padding commutes with ``p`` so the compression is exact.
    """
    p = form.module.p
    f = p @ _pointwise_inverse_sqrt(form.H, tol) @ p
    return ModuleMap(form.module, form.module, MatrixOverA(f))


def orthonormal_basis(form: HermitianForm, tol: float = EIGEN_FLOOR) -> list[ModuleElement]:
    """Images ``f(p e_j)`` of the canonical generators under :func:`isometry_to_standard`.

    For a free module these form an orthonormal basis.
    """
    f = isometry_to_standard(form, tol).matrix.entries
    return [ModuleElement(form.module, f[:, :, j]) for j in range(form.module.ambient_rank)]


def gram_schmidt(frame, form: HermitianForm, tol: float = 1e-10) -> list[ModuleElement]:
    """Orthonormalize a frame with respect to an A-valued form.

    Projections use ``form(v, u_j)`` as the coefficient along ``u_j``; the
    normalizer is ``invert(sqrt_positive(form(w, w)))``.  A pivot that is not
    invertible at some grid point means the frame does not span a free
    submodule, and raises :class:`PivotNotInvertible` with the 1-based step.
    """
    out: list[np.ndarray] = []
    for step, v in enumerate(frame, start=1):
        vc = v.coords if isinstance(v, ModuleElement) else np.asarray(v, dtype=complex)
        w = vc.copy()
        for u in out:
            w = w - pointwise_scale(form.pair(vc, u), u)
        piv = form.pair(w, w)
        if np.min(np.abs(piv)) <= tol:
            raise PivotNotInvertible(step, float(np.min(np.abs(piv))))
        norm = sqrt_positive(piv, max(PIVOT_POSITIVITY_TOL, 1e-12 * seminorm(piv)))
        out.append(pointwise_scale(invert(norm, tol).values, w))
    return [ModuleElement(form.module, u) for u in out]


def unitarity_residual(g, form: HermitianForm) -> float:
    """Sup-norm of ``p (G* H G - H) p``, without the automorphism check."""
    ge = np.asarray(g.matrix if isinstance(g, ModuleMap) else g, dtype=complex)
    p, h = form.module.p, form.H
    return seminorm(p @ (adjoint(ge) @ h @ ge - h) @ p)


def is_automorphism(g, module: PModule, tol: float = AUTOMORPHISM_TOL) -> bool:
    ge = np.asarray(g.matrix if isinstance(g, ModuleMap) else g, dtype=complex)
    p = module.p
    padded = p @ ge @ p + (eye(module.grid_size, module.ambient_rank) - p)
    smallest = np.linalg.svd(padded, compute_uv=False)[:, -1]
    return bool(np.min(smallest) > tol)


def is_form_unitary(g, form: HermitianForm, tol: float = 1e-10) -> bool:
    """Membership of ``g`` in the group of form-preserving automorphisms."""
    if not is_automorphism(g, form.module):
        raise NotAutomorphism("map is not invertible on the range of the idempotent")
    return unitarity_residual(g, form) <= tol
