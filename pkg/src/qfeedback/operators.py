"""Dense operator substrate: tensor products, partial traces, spectral calculus.

Matrices are plain complex ``numpy.ndarray`` objects. Hermitian operators and
density operators are not wrapped in classes; the predicates and
:func:`validate` below check their invariants where it matters.
"""
from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
COMPLETENESS_TOL = 1e-9
EIGENVALUE_FLOOR = 1e-12


class DimensionError(ValueError):
    """Operand shapes are inconsistent."""


class InvalidOperatorError(ValueError):
    """An operator violates a required invariant (Hermiticity, PSD, ...)."""


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered tensor-product space, e.g. ``S ⊗ B1 ⊗ B2``."""

    factor_dims: tuple[int, ...]
    factor_labels: tuple[str, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        labels = tuple(str(l) for l in self.factor_labels)
        object.__setattr__(self, "factor_dims", dims)
        object.__setattr__(self, "factor_labels", labels)
        if len(dims) != len(labels):
            raise DimensionError("factor_dims and factor_labels differ in length")
        if any(d < 1 for d in dims):
            raise DimensionError(f"factor dimensions must be positive: {dims}")
        if len(set(labels)) != len(labels):
            raise ValueError(f"factor labels must be unique: {labels}")

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.factor_dims, dtype=np.int64)) if self.factor_dims else 1

    def index(self, label: str) -> int:
        try:
            return self.factor_labels.index(label)
        except ValueError:
            raise KeyError(f"unknown factor label {label!r}") from None

    def dim(self, label: str) -> int:
        return self.factor_dims[self.index(label)]

    def embed(self, op: np.ndarray, label: str) -> np.ndarray:
        """Lift an operator on one factor to the full space (identity elsewhere)."""
        i = self.index(label)
        op = np.asarray(op, dtype=complex)
        if op.shape != (self.factor_dims[i],) * 2:
            raise DimensionError(
                f"operator shape {op.shape} does not match factor {label!r} of dim {self.factor_dims[i]}"
            )
        left = int(np.prod(self.factor_dims[:i], dtype=np.int64))
        right = int(np.prod(self.factor_dims[i + 1:], dtype=np.int64))
        return np.kron(np.kron(np.eye(left), op), np.eye(right))


@dataclass
class Violation:
    invariant: str
    residual: float


@dataclass
class ValidationReport:
    kind: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermitize(a: np.ndarray) -> np.ndarray:
    """Return ``(a + a†)/2``."""
    return 0.5 * (a + dagger(a))


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    return reduce(np.kron, (np.asarray(o) for o in ops))


def _check_square(a: np.ndarray, what: str = "operator") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{what} must be a square matrix, got shape {a.shape}")
    return a


def partial_trace(rho: np.ndarray, space: CompositeSpace, keep: Iterable[str]) -> np.ndarray:
    """Trace out every factor of ``space`` whose label is not in ``keep``.

    Kept factors stay in the order they have in ``space``.
    """
    rho = _check_square(rho, "rho")
    if rho.shape[0] != space.total_dim:
        raise DimensionError(
            f"rho has dim {rho.shape[0]} but space {space.factor_dims} has dim {space.total_dim}"
        )
    keep = set(keep)
    unknown = keep - set(space.factor_labels)
    if unknown:
        raise KeyError(f"unknown factor labels: {sorted(unknown)}")

    dims = list(space.factor_dims)
    t = rho.reshape(dims + dims)
    n = len(dims)
    # trace from the last factor backwards so earlier axis numbers stay valid
    for i in reversed(range(len(space.factor_labels))):
        if space.factor_labels[i] in keep:
            continue
        t = np.trace(t, axis1=i, axis2=i + n)
        n -= 1
        del dims[i]
    d = int(np.prod(dims, dtype=np.int64)) if dims else 1
    return t.reshape(d, d)


_NAMED_FUNCS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "exp": np.exp,
    "ln": np.log,
    "log": np.log,
    "sqrt": np.sqrt,
}


def eigh(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of the Hermitian part of ``h``."""
    return np.linalg.eigh(hermitize(_check_square(h)))


def hermitian_matfunc(h: np.ndarray, f: str | Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    ``f`` is a vectorised callable or one of ``"exp"``, ``"ln"``/``"log"``,
    ``"sqrt"``. For the logarithm, eigenvalues below ``EIGENVALUE_FLOOR`` are
    clipped to the floor; for the square root, small negative eigenvalues are
    clamped to zero. Both raise :class:`InvalidOperatorError` if an eigenvalue
    is below ``-PSD_TOL``.
    """
    h = _check_square(h)
    if np.max(np.abs(h - dagger(h)), initial=0.0) > HERMITICITY_TOL * max(1.0, np.max(np.abs(h), initial=0.0)):
        raise InvalidOperatorError("hermitian_matfunc needs a Hermitian argument")
    w, v = eigh(h)
    name = f if isinstance(f, str) else None
    if name is not None:
        if name not in _NAMED_FUNCS:
            raise ValueError(f"unknown matrix function {name!r}")
        func = _NAMED_FUNCS[name]
    else:
        func = f
    if name in ("ln", "log", "sqrt"):
        if w.size and w.min() < -PSD_TOL:
            raise InvalidOperatorError(
                f"{name} of an operator with negative eigenvalue {w.min():.3e}"
            )
        w = np.clip(w, EIGENVALUE_FLOOR if name != "sqrt" else 0.0, None)
    fw = np.asarray(func(w))
    return hermitize((v * fw) @ dagger(v))


def matrix_sqrt_sandwich(d: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Return ``√d · rho · √d``."""
    d = _check_square(d, "d")
    rho = _check_square(rho, "rho")
    if d.shape != rho.shape:
        raise DimensionError(f"shape mismatch: {d.shape} vs {rho.shape}")
    s = hermitian_matfunc(d, "sqrt")
    return hermitize(s @ rho @ s)


def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.max(np.abs(a - dagger(a)), initial=0.0) <= tol


def _hermitian_checks(a: np.ndarray, report: ValidationReport, psd: bool) -> None:
    herm_res = float(np.max(np.abs(a - dagger(a)), initial=0.0))
    if herm_res > HERMITICITY_TOL:
        report.violations.append(Violation("hermitian", herm_res))
    if psd:
        w = np.linalg.eigvalsh(hermitize(a))
        if w.size and w.min() < -PSD_TOL:
            report.violations.append(Violation("psd", float(-w.min())))


def validate(x, kind: str | None = None) -> ValidationReport:
    """Check operator invariants and report each violation with its residual.

    ``kind`` is ``"density"``, ``"hermitian"`` or ``"povm"``. A list or tuple
    of matrices is treated as a POVM unless told otherwise; a single matrix
    defaults to ``"density"``.
    """
    if kind is None:
        kind = "povm" if isinstance(x, (list, tuple)) else "density"
    report = ValidationReport(kind)

    if kind == "povm":
        elements = [np.asarray(e) for e in x]
        if not elements:
            report.violations.append(Violation("nonempty", 1.0))
            return report
        shapes = {e.shape for e in elements}
        if len(shapes) != 1 or elements[0].ndim != 2 or elements[0].shape[0] != elements[0].shape[1]:
            report.violations.append(Violation("shape", float("nan")))
            return report
        for k, e in enumerate(elements):
            sub = ValidationReport("element")
            _hermitian_checks(e, sub, psd=True)
            for v in sub.violations:
                report.violations.append(Violation(f"{v.invariant}[{k}]", v.residual))
        total = np.sum(elements, axis=0)
        res = float(np.max(np.abs(total - np.eye(total.shape[0]))))
        if res > COMPLETENESS_TOL:
            report.violations.append(Violation("completeness", res))
        return report

    a = np.asarray(x)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        report.violations.append(Violation("shape", float("nan")))
        return report
    if kind == "hermitian":
        _hermitian_checks(a, report, psd=False)
    elif kind == "density":
        _hermitian_checks(a, report, psd=True)
        tr_res = float(abs(np.trace(a) - 1.0))
        if tr_res > TRACE_TOL:
            report.violations.append(Violation("trace", tr_res))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return report


def require_density(rho: np.ndarray) -> np.ndarray:
    """Return ``rho`` as a complex array, raising if it is not a density operator."""
    rho = np.asarray(rho, dtype=complex)
    report = validate(rho, "density")
    if not report.ok:
        desc = ", ".join(f"{v.invariant} (residual {v.residual:.3e})" for v in report.violations)
        raise InvalidOperatorError(f"not a density operator: {desc}")
    return rho


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a), initial=0.0))


def embed_all(ops: Sequence[np.ndarray], space: CompositeSpace, label: str) -> list[np.ndarray]:
    return [space.embed(op, label) for op in ops]
