"""Uplink simulator and reflection-coefficient optimizer for IRS-assisted massive MIMO.

The package is organized around a two-timescale protocol: reflection
coefficients are designed once per covariance interval from channel
statistics, while the base station estimates per-block effective channels
and applies MRC combining.
"""

from irs_mimo.config import ScenarioConfig, load_config
from irs_mimo.covariance import CovarianceSet, build_covariance_set
from irs_mimo.channels import ReflectionPattern

__all__ = [
    "ScenarioConfig",
    "load_config",
    "CovarianceSet",
    "build_covariance_set",
    "ReflectionPattern",
]
