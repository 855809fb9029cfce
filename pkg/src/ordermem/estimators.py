"""scikit-learn style wrappers around the measurement core.

MemoryFeatures turns a collection of sign sequences into a fixed-width
feature matrix (run probabilities, power-law fit, memory length);
QuantileGrouper is a fit/transform discretizer for the equal-population
grouping.  Both follow the estimator protocol (params set verbatim in
__init__, get_params/set_params, fit returns self) so they compose with
pipelines and model-selection tooling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DataError
from .memory import compute_metrics
from .validation import as_sign_array, check_int


class MemoryFeatures(BaseEstimator, TransformerMixin):
    """Extract per-series sign-memory features.

    Each element of X is one ordered -1/+1 sequence (array-like, possibly
    ragged across rows).  The output columns are, in order:

        pi_neg2..pi_neg<kappa_max>, pi_pos2..pi_pos<kappa_max>,
        a, b, tau_star, tau_star_scaled, n

    mirroring the column layout of the command line ``memory`` table.

    Parameters
    ----------
    kappa_max : largest run window (>= 2)
    tau_max   : largest autocorrelation lag measured
    fit_min, fit_max : power-law fit range; fit_max=None applies the
        noise-aware default [fit_min, min(tau_star, 1000)]
    plus_one  : widen each run window by one sign (alternative counting)

    Rows whose power-law fit has no positive support get nan in the
    a and b columns; the remaining columns are still measured.
    """

    def __init__(self, kappa_max: int = 10, tau_max: int = 1000,
                 fit_min: int = 1, fit_max: int | None = None,
                 plus_one: bool = False):
        self.kappa_max = kappa_max
        self.tau_max = tau_max
        self.fit_min = fit_min
        self.fit_max = fit_max
        self.plus_one = plus_one

    def _check_params(self) -> None:
        check_int("kappa_max", self.kappa_max, lo=2)
        check_int("tau_max", self.tau_max, lo=1)
        check_int("fit_min", self.fit_min, lo=1)
        if self.fit_max is not None:
            check_int("fit_max", self.fit_max, lo=self.fit_min)

    def fit(self, X, y=None):
        self._check_params()
        self.n_features_out_ = 2 * (self.kappa_max - 1) + 5
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "n_features_out_"):
            self.fit(X)
        rows = []
        for i, seq in enumerate(X):
            try:
                m = compute_metrics(
                    as_sign_array(seq),
                    kappa_max=self.kappa_max,
                    tau_max=self.tau_max,
                    fit_min=self.fit_min,
                    fit_max=self.fit_max,
                    plus_one=self.plus_one,
                    nan_on_fit_failure=True,
                )
            except DataError as e:
                raise DataError(f"row {i}: {e}") from None
            pis_neg = [m.pi[(-1, k)] for k in range(2, self.kappa_max + 1)]
            pis_pos = [m.pi[(1, k)] for k in range(2, self.kappa_max + 1)]
            rows.append(pis_neg + pis_pos + [m.a, m.b, float(m.tau_star), m.tau_star_scaled, float(m.n)])
        return np.asarray(rows, dtype=np.float64).reshape(len(rows), self.n_features_out_)

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        self._check_params()
        names = [f"pi_neg{k}" for k in range(2, self.kappa_max + 1)]
        names += [f"pi_pos{k}" for k in range(2, self.kappa_max + 1)]
        names += ["a", "b", "tau_star", "tau_star_scaled", "n"]
        return np.asarray(names, dtype=object)


class QuantileGrouper(BaseEstimator, TransformerMixin):
    """Equal-population group discretizer (groups 1..n_groups).

    ``fit`` learns the group boundary values from the training
    distribution; ``transform`` maps new values onto those boundaries
    (ties land in the lowest qualifying group).  ``fit_transform``
    reproduces the exact equal-population rank assignment used by
    ``activity.quantile_groups``, breaking value ties by input position.
    """

    def __init__(self, n_groups: int = 20):
        self.n_groups = n_groups

    @staticmethod
    def _column(X) -> np.ndarray:
        arr = np.asarray(X, dtype=np.float64)
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        if arr.ndim != 1:
            raise DataError(f"expected a single column of values, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise DataError("values must be finite")
        return arr

    def fit(self, X, y=None):
        check_int("n_groups", self.n_groups, lo=1)
        x = self._column(X)
        n = x.size
        if n < self.n_groups:
            raise DataError(f"need at least {self.n_groups} values, got {n}")
        # highest rank belonging to each group g < G sits at floor(g*n/G)
        edge_ranks = (np.arange(1, self.n_groups) * n) // self.n_groups
        self.boundaries_ = np.sort(x)[edge_ranks - 1]
        self.n_samples_fit_ = n
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "boundaries_"):
            raise DataError("QuantileGrouper must be fitted before transform")
        x = self._column(X)
        groups = np.searchsorted(self.boundaries_, x, side="left") + 1
        return groups.reshape(-1, 1)

    def fit_transform(self, X, y=None):
        self.fit(X)
        x = self._column(X)
        n = x.size
        order = np.argsort(x, kind="stable")
        ranks = np.empty(n, dtype=np.int64)
        ranks[order] = np.arange(1, n + 1)
        groups = -(-ranks * self.n_groups // n)
        return groups.reshape(-1, 1)

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        return np.asarray(["group"], dtype=object)
