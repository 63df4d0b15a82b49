#!/usr/bin/env python3
"""Run one experiment configured through the environment."""

import logging

from fput_kdv.harness import ExperimentSpec, run_experiment
from fput_kdv.settings import ApplicationSettings

# Load application settings from env vars.
app_settings = ApplicationSettings()

logging.basicConfig(
    level=app_settings.runtime.log_level.upper(),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)

spec = ExperimentSpec(**app_settings.parameters.model_dump())

run_experiment(spec, threads=app_settings.runtime.threads)
