import logging
import platform
import sys
import time
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Tuple

import numpy as np
import pandas as pd
import pydantic
import scipy

import gmcluster
from gmcluster.core_processes.domain_geometry.curvature_maxima import find_curvature_maxima
from gmcluster.core_processes.ground_state.compute_moments import compute_moments
from gmcluster.core_processes.ground_state.ground_state_models import GroundState, GroundStateMoments
from gmcluster.core_processes.ground_state.solve_ground_state import solve_ground_state
from gmcluster.core_processes.reduced_cluster.cluster_models import ClusterParams
from gmcluster.data_layer.run_config_models import GroundStateParametersModel, RunConfig
from gmcluster.system.exceptions import GeometryError, PreconditionError
from gmcluster.system.paths_and_filenames.file_and_folder_names import (
    RESOLVED_RUN_CONFIG_JSON_FILE_NAME,
    RUN_METADATA_JSON_FILE_NAME,
)
from gmcluster.system.paths_and_filenames.path_getters import (
    get_host_name,
    get_iso6201_time_string,
    get_subcommand_output_folder_path,
)
from gmcluster.utilities.save_dataframe_to_csv import save_dataframe_to_csv
from gmcluster.utilities.save_dictionary_to_json import save_dictionary_to_json

logger = logging.getLogger(__name__)


@dataclass
class SubcommandRun:
    """
    Output folder of one subcommand invocation.

    Only `run_metadata.json` carries wall-clock data; every other file depends on the resolved config alone.
    """

    subcommand: str
    config: RunConfig
    output_folder: Path
    metadata: Dict[str, Any] = field(default_factory=dict)
    saved_files: list = field(default_factory=list)
    _start_time: float = field(default_factory=time.perf_counter)

    @classmethod
    def start(cls, subcommand: str, config: RunConfig) -> "SubcommandRun":
        output_folder = get_subcommand_output_folder_path(subcommand, config.output_folder)
        run = cls(subcommand=subcommand, config=config, output_folder=output_folder)
        logger.info(f"Running `{subcommand}`, writing outputs to {output_folder}")
        run.save_json(config.dict(), RESOLVED_RUN_CONFIG_JSON_FILE_NAME)
        run.metadata = {
            "subcommand": subcommand,
            "started_at": get_iso6201_time_string(make_filename_friendly=False),
            "host": get_host_name(),
            "command_line": sys.argv[1:],
            "gmcluster_version": gmcluster.__version__,
            "python_version": platform.python_version(),
            "numpy_version": np.__version__,
            "scipy_version": scipy.__version__,
            "pandas_version": pd.__version__,
            "pydantic_version": pydantic.VERSION,
        }
        run.save_json(run.metadata, RUN_METADATA_JSON_FILE_NAME)
        return run

    def save_json(self, dictionary: Dict, file_name: str) -> Path:
        path = save_dictionary_to_json(save_path=self.output_folder, dictionary=dictionary, file_name=file_name)
        self.saved_files.append(path.name)
        return path

    def save_csv(self, dataframe: pd.DataFrame, file_name: str) -> Path:
        path = save_dataframe_to_csv(save_path=self.output_folder, dataframe=dataframe, file_name=file_name)
        self.saved_files.append(path.name)
        return path

    def finish(self, summary: Dict[str, Any]) -> Dict[str, Any]:
        self.metadata["finished_at"] = get_iso6201_time_string(make_filename_friendly=False)
        self.metadata["elapsed_seconds"] = round(time.perf_counter() - self._start_time, 3)
        self.metadata["output_files"] = sorted(set(self.saved_files + [RUN_METADATA_JSON_FILE_NAME]))
        save_dictionary_to_json(
            save_path=self.output_folder, dictionary=self.metadata, file_name=RUN_METADATA_JSON_FILE_NAME
        )
        logger.success(f"`{self.subcommand}` finished in {self.metadata['elapsed_seconds']}s -> {self.output_folder}")
        return summary


@lru_cache(maxsize=4)
def _cached_ground_state(r_max: float, grid_n: int, tol: float) -> Tuple[GroundState, GroundStateMoments]:
    ground_state = solve_ground_state(r_max=r_max, grid_n=grid_n, tol=tol)
    return ground_state, compute_moments(ground_state)


def ground_state_and_moments(settings: GroundStateParametersModel) -> Tuple[GroundState, GroundStateMoments]:
    """Ground state and moments, solved once per process for each distinct set of solver settings."""
    return _cached_ground_state(settings.r_max, settings.grid_n, settings.tol)


def resolve_h_double_prime(config: RunConfig) -> float:
    """h'' from the cluster override, else from the chosen curvature maximum of the configured curve."""
    if config.cluster.h_double_prime is not None:
        return config.cluster.h_double_prime

    search = find_curvature_maxima(config.curve.to_curve())
    if len(search) == 0:
        raise GeometryError(
            f"The `{config.curve.kind}` curve has no nondegenerate curvature maximum "
            f"({'; '.join(search.diagnostics)}); set cluster.h_double_prime"
        )
    index = config.cluster.curvature_maximum_index
    if index >= len(search):
        raise PreconditionError(f"curvature_maximum_index={index} but the curve has {len(search)} maxima")
    maximum = search[index]
    logger.info(
        f"Using curvature maximum #{index} at t={maximum.parameter:.6f}: h={maximum.curvature:.6g}, "
        f"h''={maximum.curvature_second_derivative:.6g}"
    )
    return maximum.curvature_second_derivative


def resolve_cluster_params(config: RunConfig, moments: GroundStateMoments) -> ClusterParams:
    cluster = config.cluster
    return ClusterParams.from_moments(
        moments,
        epsilon=cluster.epsilon,
        diffusivity=cluster.diffusivity,
        k=cluster.k,
        h_double_prime=resolve_h_double_prime(config),
        tau=cluster.tau,
        regime_safety_ratio=cluster.regime_safety_ratio,
    )
