from .reader import RunConfig, parse_grid
from .exporter import BOUND_COLUMNS, SIMULATION_COLUMNS, SWEEP_COLUMNS, TRIAL_COLUMNS, Exporter
