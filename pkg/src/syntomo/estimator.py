"""Estimator-style wrappers: configure with keyword parameters, ``fit`` assembles, ``transform`` measures.

The classes follow the scikit-learn parameter protocol (``get_params`` /
``set_params``, fitted attributes ending in ``_``) without importing it.
"""

from __future__ import annotations

import inspect
from typing import Iterable, Sequence

from .errors import ConfigError
from .homcx import ChainComplex, CohomologyReport, cohomology
from .pipeline import Bundle, PipelineConfig, truncation_plan


class NotFittedError(ValueError, AttributeError):
    """Raised when ``transform`` is called before ``fit``."""


class _Params:
    @classmethod
    def _param_names(cls) -> list[str]:
        sig = inspect.signature(cls.__init__)
        return [n for n, prm in sig.parameters.items() if n != "self" and prm.kind != prm.VAR_KEYWORD]

    def get_params(self, deep: bool = True) -> dict:
        return {n: getattr(self, n) for n in self._param_names()}

    def set_params(self, **params) -> "_Params":
        valid = self._param_names()
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"invalid parameter {key!r} for {type(self).__name__}; valid: {valid}")
            setattr(self, key, value)
        return self

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"

    def _check_fitted(self, attr: str) -> None:
        if not hasattr(self, attr):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")

    def fit_transform(self, X=None, y=None):
        return self.fit(X, y).transform(X)


class CohomologyEstimator(_Params):
    """Elementary divisors of the cohomology of chain complexes.

    ``fit`` records the common modulus; ``transform`` maps each complex to its
    :class:`CohomologyReport`.
    """

    def __init__(self, reduce: bool = True):
        self.reduce = reduce

    def fit(self, X: Iterable[ChainComplex] | ChainComplex, y=None) -> "CohomologyEstimator":
        complexes = [X] if isinstance(X, ChainComplex) else list(X)
        if not complexes:
            raise ValueError("need at least one complex")
        moduli = {(C.p, C.N) for C in complexes}
        if len(moduli) != 1:
            raise ValueError(f"complexes have different moduli {sorted(moduli)}")
        self.modulus_ = moduli.pop()
        self.n_complexes_ = len(complexes)
        return self

    def transform(self, X: Iterable[ChainComplex] | ChainComplex) -> list[CohomologyReport]:
        self._check_fitted("modulus_")
        complexes = [X] if isinstance(X, ChainComplex) else list(X)
        for C in complexes:
            if (C.p, C.N) != self.modulus_:
                raise ValueError(f"complex {C.name!r} has modulus {(C.p, C.N)}, fitted on {self.modulus_}")
        return [cohomology(C, reduce=self.reduce) for C in complexes]


class SyntomicEstimator(_Params):
    """Assembles the band models of one configuration and reports cohomology of named complexes.

    >>> est = SyntomicEstimator(profile="A", r=0, n=2).fit()
    >>> est.transform(["syn"])[0].full_rank(0)
    1
    """

    def __init__(self, profile: str = "A", p: int = 3, e: int = 1, eisenstein: Sequence[int] | None = None,
                 i_cyclo: int = 3, d: int = 0, r: int = 1, n: int = 4, M: int | None = None, margin: int = 4,
                 n_work: int = 12, slack: int = 4, decorations: Sequence[str] = ("PD", "U", "UV")):
        self.profile = profile
        self.p = p
        self.e = e
        self.eisenstein = eisenstein
        self.i_cyclo = i_cyclo
        self.d = d
        self.r = r
        self.n = n
        self.M = M
        self.margin = margin
        self.n_work = n_work
        self.slack = slack
        self.decorations = decorations

    def _config(self) -> PipelineConfig:
        params = self.get_params()
        params["decorations"] = tuple(params["decorations"])
        if params["eisenstein"] is not None:
            params["eisenstein"] = tuple(params["eisenstein"])
        return PipelineConfig(**params)

    def fit(self, X=None, y=None) -> "SyntomicEstimator":
        cfg = self._config()
        self.config_ = cfg
        self.plan_ = truncation_plan(cfg)
        self.bundle_ = Bundle(cfg, self.plan_)
        return self

    def transform(self, X: Iterable[str | tuple[str, str]] | None = None) -> list[CohomologyReport]:
        """``X`` lists complex names, optionally as (name, decoration) pairs; default ``["syn"]``."""
        self._check_fitted("bundle_")
        out = []
        for item in (X if X is not None else ["syn"]):
            name, deco = (item, None) if isinstance(item, str) else item
            try:
                C = self.bundle_.build(name, deco)
            except KeyError as exc:
                raise ConfigError(f"cannot build {item!r}") from exc
            out.append(cohomology(C))
        return out
