"""Input validation shared by the estimator wrappers."""
import numpy as np
from sklearn.utils.validation import check_array

from .errors import InvalidArgumentError


def check_points(X, name="X"):
    """Body points as a finite ``(n, 3)`` float array."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_all_finite=True,
                    input_name=name)
    if X.shape[1] != 3:
        raise InvalidArgumentError(f"{name} must have 3 columns (x1, x2, x3), got {X.shape[1]}")
    return X


def check_weights(sample_weight, n):
    """Cubature weights; ``None`` means unit weights."""
    if sample_weight is None:
        return np.ones(n)
    w = check_array(sample_weight, dtype=np.float64, ensure_2d=False, ensure_all_finite=True,
                    input_name="sample_weight").ravel()
    if w.shape != (n,):
        raise InvalidArgumentError(f"sample_weight must have {n} entries, got {w.shape[0]}")
    if not np.all(w > 0):
        raise InvalidArgumentError("sample_weight entries must be positive")
    return w


def check_distributions(Psi, n):
    """Charge distributions as rows of an ``(m, n)`` array."""
    Psi = check_array(Psi, dtype=np.float64, ensure_2d=False, ensure_all_finite=True,
                      input_name="distributions")
    Psi = np.atleast_2d(Psi)
    if Psi.shape[1] != n:
        raise InvalidArgumentError(f"distributions need {n} nodal values, got {Psi.shape[1]}")
    return Psi
