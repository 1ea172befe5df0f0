"""scikit-learn style wrappers around the operator, spectral and synthesis steps.

The training samples are the cubature nodes, ``X`` of shape ``(n_nodes, 3)``,
and ``sample_weight`` holds the cubature weights. Once fitted, ``transform``
evaluates eigenfunctions (or designed distributions) at arbitrary points
through the Nystrom extension
``v_i(x) = sum_b K(x, x_b) w_b v_i(x_b) / lambda_i``.
"""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_distributions, check_points, check_weights
from .cubature import Cubature
from .kernel import KernelSpec
from .operator import assemble, cross_kernel, pair_force
from .spectral import check_definiteness, decompose
from .synthesis import strong_quadruple, weak_quadruple
from .verify import check_system, default_tolerance, interaction_matrix


class InteractionSpectrum(TransformerMixin, BaseEstimator):
    """Eigensystem of the discretized pair-interaction operator.

    Parameters
    ----------
    kernel : {"smooth_gaussian", "coulomb_z"}
    sigma : float
        Gaussian length scale.
    epsilon : float
        Coulomb softening length.
    d : float
        Separation of the two bodies along Ox3.
    n_components : int or None
        Number of leading (most negative) modes returned by ``transform``.
    solver : {"auto", "jacobi", "lapack"}

    Attributes
    ----------
    operator_ : DiscreteOperator
    eigensystem_ : EigenSystem
    eigenvalues_ : ndarray of shape (n_nodes,)
    eigenvectors_ : ndarray of shape (n_nodes, n_nodes)
    definiteness_ : DefinitenessReport
    """

    def __init__(self, kernel="smooth_gaussian", sigma=1.0, epsilon=0.0, d=1.0,
                 n_components=None, solver="auto"):
        self.kernel = kernel
        self.sigma = sigma
        self.epsilon = epsilon
        self.d = d
        self.n_components = n_components
        self.solver = solver

    def _spec(self):
        return KernelSpec(self.kernel, self.sigma, self.epsilon, self.d)

    def fit(self, X, y=None, sample_weight=None):
        X = check_points(X)
        w = check_weights(sample_weight, len(X))
        self.cubature_ = Cubature(X, w, {"shape": "points"})
        self.operator_ = assemble(self.cubature_, self._spec())
        self.eigensystem_ = decompose(self.operator_, solver=self.solver)
        self.eigenvalues_ = self.eigensystem_.eigenvalues
        self.eigenvectors_ = self.eigensystem_.eigenvectors
        self.definiteness_ = check_definiteness(self.eigensystem_)
        self.n_features_in_ = 3
        return self

    def _components(self):
        n = len(self.eigenvalues_)
        return n if self.n_components is None else min(int(self.n_components), n)

    def transform(self, X):
        """Leading eigenfunctions evaluated at points ``X``: shape ``(n_points, n_components)``."""
        check_is_fitted(self, "eigensystem_")
        X = check_points(X)
        m = self._components()
        lam = self.eigenvalues_[:m]
        Kx = cross_kernel(self.operator_.spec, X, self.cubature_.nodes)
        return Kx @ (self.cubature_.weights[:, None] * self.eigenvectors_[:, :m]) / lam

    def coefficients(self, distributions):
        """Weighted-L2 coordinates ``(v_i, psi)_W`` of nodal distributions (one per row)."""
        check_is_fitted(self, "eigensystem_")
        P = check_distributions(distributions, len(self.eigenvalues_))
        return P @ (self.cubature_.weights[:, None] * self.eigenvectors_)

    def pair_force(self, phi, psi):
        check_is_fitted(self, "operator_")
        return pair_force(self.operator_, phi, psi)


class ComplementarityDesigner(BaseEstimator):
    """Design a complementary quadruple on a fitted interaction spectrum.

    ``mode="weak"`` pairs eigenmodes ``i`` and ``j`` with their negatives;
    ``mode="strong"`` additionally perturbs all four by ``alpha * v_k``
    (``alpha=None`` means half the admissible bound).

    Attributes
    ----------
    spectrum_ : InteractionSpectrum
    quadruple_ : Quadruple
    interaction_matrix_ : ndarray of shape (4, 4)
    report_ : VerificationReport
    """

    def __init__(self, kernel="smooth_gaussian", sigma=1.0, epsilon=0.0, d=1.0,
                 mode="strong", i=0, j=1, k=2, alpha=None, tol=None, solver="auto"):
        self.kernel = kernel
        self.sigma = sigma
        self.epsilon = epsilon
        self.d = d
        self.mode = mode
        self.i = i
        self.j = j
        self.k = k
        self.alpha = alpha
        self.tol = tol
        self.solver = solver

    def fit(self, X, y=None, sample_weight=None):
        self.spectrum_ = InteractionSpectrum(self.kernel, self.sigma, self.epsilon, self.d,
                                             solver=self.solver).fit(X, sample_weight=sample_weight)
        es = self.spectrum_.eigensystem_
        if self.mode == "weak":
            self.quadruple_ = weak_quadruple(es, self.i, self.j)
        else:
            self.quadruple_ = strong_quadruple(es, self.i, self.j, self.k, self.alpha)
        self.interaction_matrix_ = interaction_matrix(self.spectrum_.operator_, self.quadruple_)
        tol = default_tolerance(es=es) if self.tol is None else self.tol
        self.report_ = check_system(self.interaction_matrix_, self.mode, tol)
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        """The four designed distributions at points ``X``, columns (phi, Phi, psi, Psi)."""
        check_is_fitted(self, "quadruple_")
        spectrum = self.spectrum_
        X = check_points(X)
        meta = self.quadruple_.meta
        modes = [meta["i"], meta["j"]] + ([meta["k"]] if meta.get("k") is not None else [])
        Kx = cross_kernel(spectrum.operator_.spec, X, spectrum.cubature_.nodes)
        V = spectrum.eigenvectors_[:, modes]
        # extend only the modes the quadruple is built from; tiny eigenvalues would amplify noise
        extended = Kx @ (spectrum.cubature_.weights[:, None] * V) / spectrum.eigenvalues_[modes]
        coeffs = spectrum.coefficients(self.quadruple_.as_array())[:, modes]
        return extended @ coeffs.T

    def score(self, X=None, y=None):
        """Signed margin of the strict conditions (positive when all hold)."""
        check_is_fitted(self, "report_")
        return self.report_.margin
