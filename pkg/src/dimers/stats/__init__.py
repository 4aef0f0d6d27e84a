"""Estimators and hypothesis checks built on the simulation engine."""

from .core import EstimateWithCI, default_threads, jackknife_variance, mean_estimate, replicate
from .estimators import (density_estimate, monomer_counts, monotone_path_probability_mc,
                         radius_tail, stabilization_check, variance_per_site_estimate)
from .field import clt_check, covariance_curve, sigma2_estimate

__all__ = [
    "EstimateWithCI", "default_threads", "jackknife_variance", "mean_estimate", "replicate",
    "density_estimate", "monomer_counts", "monotone_path_probability_mc", "radius_tail",
    "stabilization_check", "variance_per_site_estimate",
    "clt_check", "covariance_curve", "sigma2_estimate",
]
