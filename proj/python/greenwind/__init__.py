"""Python interface to the greenwind core.

Structured results come back as plain dicts and lists.
"""

import json

from . import _core
from ._core import (
    Dataset,
    DataError,
    Error,
    InfeasibleError,
    LimitExceededError,
    pearson,
)

VARIABLE_NAMES = list(_core.variable_names)
ATTRIBUTE_NAMES = VARIABLE_NAMES[1:]
EQ1_COEFFICIENTS = dict(zip(ATTRIBUTE_NAMES, _core.eq1_coefficients))

__all__ = [
    "ATTRIBUTE_NAMES",
    "Dataset",
    "DataError",
    "EQ1_COEFFICIENTS",
    "Error",
    "InfeasibleError",
    "LimitExceededError",
    "VARIABLE_NAMES",
    "brute_force",
    "correlation_matrix",
    "eq1_model",
    "evaluate",
    "fit",
    "fit_gaussian",
    "greedy",
    "impute",
    "impute_dataset",
    "load_dataset",
    "monthly_distribution",
    "pearson",
    "predict",
    "predict_one",
    "randomized_greedy",
    "schedule_cost",
    "solve_correlation",
]


def _text(value):
    return value if isinstance(value, str) else json.dumps(value)


def load_dataset(weather, energy, tolerance=1800, weather_mapping=None, energy_mapping=None):
    """Loads and time-aligns a weather CSV and an energy CSV."""
    return Dataset.load(
        str(weather),
        str(energy),
        tolerance,
        "" if weather_mapping is None else _text(weather_mapping),
        "" if energy_mapping is None else _text(energy_mapping),
    )


def correlation_matrix(dataset):
    return json.loads(_core.correlation_json(dataset))


def monthly_distribution(dataset, bin_width=1.0):
    return json.loads(_core.monthly_distribution_json(dataset, bin_width))


def solve_correlation(csv_text, condition_bound=1e8):
    """Standardized coefficients from a correlation matrix in CSV form.

    Returns ({attribute: beta}, condition_number).
    """
    beta, cond = _core.solve_correlation_csv(csv_text, condition_bound)
    return dict(zip(ATTRIBUTE_NAMES, beta)), cond


def fit(dataset, condition_bound=1e8):
    return json.loads(_core.fit_json(dataset, condition_bound))


def eq1_model(dataset):
    return json.loads(_core.eq1_model_json(dataset))


def evaluate(model, dataset):
    return json.loads(_core.evaluate_json(_text(model), dataset))


def predict(model, forecast, mapping=None):
    """Returns [(timestamp, energy_mw, clamped)] for each forecast row."""
    return _core.predict(_text(model), str(forecast), "" if mapping is None else _text(mapping))


def predict_one(model, attributes):
    """Unclamped prediction for one attribute dict or sequence in attribute order."""
    if isinstance(attributes, dict):
        attributes = [attributes[name] for name in ATTRIBUTE_NAMES]
    return _core.predict_raw(_text(model), list(attributes))


def fit_gaussian(rows, names=None):
    """Fits a Gaussian to rows (None marks a missing value) or to a Dataset."""
    if isinstance(rows, Dataset):
        return json.loads(_core.fit_gaussian_dataset_json(rows))
    if names is None:
        names = [f"x{i}" for i in range(len(rows[0]))]
    return json.loads(_core.fit_gaussian_json(rows, list(names)))


def impute(model, record):
    """Returns (values, imputed_flags, degraded)."""
    return _core.impute(_text(model), list(record))


def impute_dataset(model, dataset):
    """Returns (filled Dataset, per-row flags in variable order, degraded row count)."""
    return _core.impute_dataset(_text(model), dataset)


def schedule_cost(assignments, jobs, profile, lambda_=1.0):
    return _core.schedule_cost(dict(assignments), _text(jobs), _text(profile), lambda_)


def brute_force(jobs, profile, lambda_=1.0, limit=1_000_000):
    return json.loads(_core.brute_force_json(_text(jobs), _text(profile), lambda_, limit))


def greedy(jobs, profile, lambda_=1.0):
    return json.loads(_core.greedy_json(_text(jobs), _text(profile), lambda_))


def randomized_greedy(jobs, profile, lambda_=1.0, seed=0, k=3):
    return json.loads(_core.randomized_greedy_json(_text(jobs), _text(profile), lambda_, seed, k))
