"""Batch harness: configuration, rate studies, verification suite and CLI."""
from .config import ConfigError, StudyConfig, load_config, m_from_rule
from .study import RateStudy, SlopeFit, fit_loglog, run_rate_study
from .suite import CheckResult, SuiteReport, run_kernel_demo, run_verification_suite

__all__ = ["ConfigError", "StudyConfig", "load_config", "m_from_rule", "RateStudy", "SlopeFit",
           "fit_loglog", "run_rate_study", "CheckResult", "SuiteReport", "run_kernel_demo",
           "run_verification_suite"]
