"""Fourier estimation of integrated covariance from asynchronous prices."""

from ._core import (
    AsyncovError,
    EventSeries,
    coefficients,
    covariance,
    epps_curve,
    epps_theoretical,
    gbm_paths,
    ingest_csv,
    nyquist_cutoff,
    sample_arrivals,
)

__all__ = [
    "AsyncovError",
    "EventSeries",
    "coefficients",
    "covariance",
    "epps_curve",
    "epps_theoretical",
    "gbm_paths",
    "ingest_csv",
    "nyquist_cutoff",
    "sample_arrivals",
]
