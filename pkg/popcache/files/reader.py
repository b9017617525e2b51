import os
from typing import List, Optional, Tuple, Union

import numpy as np
import yaml

from popcache.constants import DEFAULT_Q_MAX
from popcache.errors import InvalidParameterError
from popcache.models import SystemConfig

REQUIRED_KEYS = ("N", "K", "K_T", "gamma", "gamma_T", "F", "alpha")
DEFAULTS = {
    "lambda": None,
    "trials": 1000,
    "seed": 0,
    "q_max": DEFAULT_Q_MAX,
    "strict_b1": False,
    "output_filename": "popcache",
}


class RunConfig():
    """
    Class for run configurations read from YAML or JSON
    """
    @property
    def source(self) -> Optional[str]:
        """
        Get the path the configuration was read from
        """
        return self.__source

    @property
    def N(self) -> int:
        """
        Get the library size
        """
        return self.__values["N"]

    @property
    def users(self) -> np.ndarray:
        """
        Get the numbers of users K, a grid of one or more values
        """
        return np.atleast_1d(np.asarray(self.__values["K"], dtype=int))

    @property
    def K_T(self) -> int:
        """
        Get the number of transmitters
        """
        return self.__values["K_T"]

    @property
    def gamma(self) -> float:
        """
        Get the receiver cache fraction
        """
        return self.__values["gamma"]

    @property
    def gamma_T(self) -> float:
        """
        Get the transmitter cache fraction
        """
        return self.__values["gamma_T"]

    @property
    def F(self) -> int:
        """
        Get the subpacketization budget
        """
        return self.__values["F"]

    @property
    def Lambda(self) -> Optional[int]:
        """
        Get the number of receiver caches, None when it is chosen from gamma, F and K
        """
        return self.__values["lambda"]

    @property
    def alphas(self) -> np.ndarray:
        """
        Get the Zipf exponents, a grid of one or more values
        """
        return np.atleast_1d(np.asarray(self.__values["alpha"], dtype=float))

    @property
    def trials(self) -> int:
        """
        Get the number of Monte Carlo trials
        """
        return self.__values["trials"]

    @property
    def seed(self) -> int:
        """
        Get the base seed of the simulations
        """
        return self.__values["seed"]

    @property
    def q_max(self) -> int:
        """
        Get the largest number of sub-libraries searched
        """
        return self.__values["q_max"]

    @property
    def strict_b1(self) -> bool:
        """
        Get whether the simulator charges the whole broadcast sub-library
        """
        return self.__values["strict_b1"]

    @property
    def output_filename(self) -> str:
        """
        Get the output filename
        """
        return self.__values["output_filename"]

    def system_config(self, K: int) -> SystemConfig:
        """
        System configuration for one number of users

        Parameters:
        - K: int - number of users

        Returns:
        - cfg: SystemConfig - validated configuration
        """
        return SystemConfig(self.N, int(K), self.K_T, self.gamma, self.gamma_T, self.F, self.Lambda)

    def grid(self) -> List[Tuple[int, float]]:
        """
        Every (K, alpha) point of the configuration, sorted
        """
        return sorted((int(K), float(alpha)) for K in self.users for alpha in self.alphas)

    def with_overrides(self, **overrides) -> 'RunConfig':
        """
        Copy with the non-None overrides applied
        """
        values = dict(self.__values)
        values.update({key: value for key, value in overrides.items() if value is not None})
        return RunConfig.from_mapping(values, self.__source)

    def to_dict(self) -> dict:
        values = dict(self.__values)
        for key in ("K", "alpha"):
            if isinstance(values[key], np.ndarray):
                values[key] = values[key].tolist()
        return values

    @staticmethod
    def from_mapping(mapping: dict, source: Optional[str] = None) -> 'RunConfig':
        """
        Method for building a configuration from a dictionary

        Parameters:
        - mapping: dict - configuration keys
        - source: str - where the mapping came from, for messages

        Returns:
        - config: RunConfig - the validated configuration
        """
        if not isinstance(mapping, dict):
            raise InvalidParameterError(f"configuration {source or ''} must be a mapping")
        missing = [key for key in REQUIRED_KEYS if key not in mapping]
        if missing:
            raise InvalidParameterError(f"configuration {source or ''} is missing {', '.join(missing)}")
        unknown = set(mapping) - set(REQUIRED_KEYS) - set(DEFAULTS)
        if unknown:
            raise InvalidParameterError(f"configuration {source or ''} has unknown keys {', '.join(sorted(unknown))}")

        config = RunConfig()
        config.__source = source
        values = dict(DEFAULTS)
        values.update(mapping)
        # grids
        for key in ("K", "alpha"):
            if isinstance(values[key], (list, tuple)):
                if len(values[key]) == 0:
                    raise InvalidParameterError(f"grid {key} is empty")
                values[key] = np.array(values[key])
        config.__values = values
        config.__validate()
        return config

    @staticmethod
    def read(path: str) -> 'RunConfig':
        """
        Method for reading a .yaml or .json input file

        Parameters:
        - path: str - The path to the input file

        Returns:
        - config: RunConfig - a configuration object with the relevant data
        """
        extension = os.path.splitext(path)[1].lower()
        if extension not in (".yaml", ".yml", ".json"):
            raise InvalidParameterError(f"unsupported configuration format {extension!r}")
        with open(path, "r") as file:
            # a JSON document is valid YAML
            loader = yaml.safe_load(file)
        return RunConfig.from_mapping(loader, path)

    def __validate(self) -> None:
        if self.N < 1:
            raise InvalidParameterError(f"N must be positive, got {self.N}")
        if np.any(self.users < 1):
            raise InvalidParameterError("every K must be positive")
        if np.any(~np.isfinite(self.alphas)) or np.any(self.alphas < 0):
            raise InvalidParameterError("every alpha must be finite and non-negative")
        if self.trials < 1:
            raise InvalidParameterError(f"trials must be positive, got {self.trials}")
        if self.q_max < 1:
            raise InvalidParameterError(f"q_max must be at least 1, got {self.q_max}")


def parse_grid(text: str) -> Union[List[float], None]:
    """
    Parse a grid given as "a,b,c" or "start:stop:step" (stop included)
    """
    if text is None:
        return None
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidParameterError(f"range grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(part) for part in parts)
        if step <= 0:
            raise InvalidParameterError(f"grid step must be positive, got {step}")
        count = int(np.floor((stop - start)/step + 1E-9)) + 1
        return np.round(start + step*np.arange(count), 12).tolist()
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidParameterError(f"cannot parse grid {text!r}")
