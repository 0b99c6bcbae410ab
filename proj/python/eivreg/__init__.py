"""Error-in-variables regression via hard singular value thresholding.

Policies, bound parameters, scenario configs and experiment specs are plain
dicts; they are serialized to JSON before crossing into the native module.
"""

import json

import numpy as np

from . import _eivreg
from ._eivreg import (
    NumericalError,
    ValidationError,
    effective_rank,
    hsvt,
    max_col_l2_sq,
    mcse,
    mse_test,
    mse_train,
    pinv_solve,
    sparse_equivalent,
    spectral_error,
    spectral_norm,
    svd,
)

__all__ = [
    "NumericalError",
    "ValidationError",
    "delta_bound",
    "denoise",
    "effective_rank",
    "fit",
    "gen_scenario",
    "hsvt",
    "max_col_l2_sq",
    "mcse",
    "mse_test",
    "mse_train",
    "observed_fraction",
    "pinv_solve",
    "preset",
    "run_experiment",
    "sparse_equivalent",
    "spectral_bound",
    "spectral_error",
    "spectral_norm",
    "summarize_csv",
    "svd",
    "test_gap_bound",
    "ts_forecast",
    "ts_impute",
]


def _mask(mask):
    return None if mask is None else np.asarray(mask, dtype=bool)


def observed_fraction(z, mask=None):
    return _eivreg.observed_fraction(z, _mask(mask))


def denoise(z, policy, mask=None):
    return _eivreg.denoise(z, json.dumps(policy), _mask(mask))


def fit(z, y_omega, omega, policy, mask=None, rcond=-1.0):
    return _eivreg.fit(z, y_omega, list(omega), json.dumps(policy), _mask(mask), rcond)


def delta_bound(params, N, p):
    return _eivreg.delta_bound(json.dumps(params), N, p)


def spectral_bound(params, N, p, delta1=7.0):
    return _eivreg.spectral_bound(json.dumps(params), N, p, delta1)


def test_gap_bound(params, N, p, n, r):
    return _eivreg.test_gap_bound(json.dumps(params), N, p, n, r)


def gen_scenario(config):
    return _eivreg.gen_scenario(json.dumps(config))


def ts_impute(series, page_rows, page_cols, policy):
    values = [None if v is None or np.isnan(v) else float(v) for v in series]
    return np.array(_eivreg.ts_impute(values, page_rows, page_cols, json.dumps(policy)))


def ts_forecast(series, page_rows, page_cols, policy, horizon, origin=None):
    values = [None if v is None or np.isnan(v) else float(v) for v in series]
    out, rmse = _eivreg.ts_forecast(values, page_rows, page_cols, json.dumps(policy), horizon, origin)
    return np.array(out), rmse


def preset(name):
    return json.loads(_eivreg.preset(name))


def run_experiment(spec, threads=1):
    """Returns (csv_text, timing_csv_text)."""
    return _eivreg.run_experiment(json.dumps(spec), threads)


def summarize_csv(csv_text):
    return _eivreg.summarize_csv(csv_text)
