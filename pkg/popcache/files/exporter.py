import json
from typing import Iterable, List, Optional

import numpy as np
import pandas as pd

from popcache.placement import ReceiverPlacement, TransmitterPlacement
from popcache.simulation import SimulationReport

SWEEP_COLUMNS = ["K", "alpha", "gain_achieved", "gain_bound", "Q", "expected_delay", "uniform_delay", "error"]
SIMULATION_COLUMNS = [
    "K", "alpha", "trials", "seed", "strict_b1",
    "delay_mean", "delay_std", "dof_mean", "dof_std", "std_defined", "analytic_dof", "error",
]
BOUND_COLUMNS = ["K", "alpha", "uniform_delay", "lower_bound_delay", "gmax"]
TRIAL_COLUMNS = ["K", "alpha", "trial", "delay", "dof"]


def _default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


class Exporter():
    """
    Class for exporting results
    """
    @staticmethod
    def frame(rows: Iterable[dict], columns: List[str]) -> pd.DataFrame:
        """
        Method for arranging result rows in a fixed column order

        Parameters:
        - rows: Iterable[dict] - one dict per result row
        - columns: List[str] - column order

        Returns:
        - df: pd.DataFrame - the rows, missing fields left empty
        """
        return pd.DataFrame(list(rows)).reindex(columns=columns)

    @staticmethod
    def export_csv(rows: Iterable[dict], columns: List[str], path: Optional[str] = None) -> str:
        """
        Method for exporting rows to csv

        Parameters:
        - rows: Iterable[dict] - result rows
        - columns: List[str] - column order
        - path: str - output file, the csv text is only returned when None

        Returns:
        - text: str - the csv content
        """
        df = Exporter.frame(rows, columns)
        text = df.to_csv(index=False)
        if path is not None:
            df.to_csv(path, index=False)
        return text

    @staticmethod
    def export_json(payload, path: Optional[str] = None) -> str:
        """
        Method for exporting a JSON document

        Parameters:
        - payload: any JSON-serializable object (numpy values allowed)
        - path: str - output file, the text is only returned when None

        Returns:
        - text: str - the JSON document
        """
        text = json.dumps(payload, indent=2, default=_default)
        if path is not None:
            with open(path, "w") as file:
                file.write(text + "\n")
        return text

    @staticmethod
    def trial_rows(K: int, alpha: float, report: SimulationReport) -> List[dict]:
        return [
            {"K": K, "alpha": alpha, "trial": trial, "delay": delay, "dof": dof}
            for trial, (delay, dof) in enumerate(zip(report.delays.tolist(), report.dofs.tolist()))
        ]

    @staticmethod
    def placement_manifest(
            transmitters: TransmitterPlacement,
            receivers: ReceiverPlacement,
            header: dict
        ) -> dict:
        manifest = dict(header)
        manifest["transmitters"] = transmitters.to_dict()
        manifest["receivers"] = receivers.to_dict()
        return manifest
