from .monte_carlo import DemandSample, SimulationReport, realized_delay, run_simulation, sample_demand
