import logging
from typing import Any, Dict

import pandas as pd

from gmcluster.core_processes.run_subcommands.run_reduce_subcommand import (
    cluster_parameters_dict,
    solve_configured_cluster,
)
from gmcluster.core_processes.run_subcommands.subcommand_run import SubcommandRun
from gmcluster.core_processes.spectral_stability.small_spectrum import (
    build_matrix_A,
    build_matrix_M,
    small_eigenvalue_estimates,
)
from gmcluster.data_layer.run_config_models import RunConfig
from gmcluster.system.paths_and_filenames.file_and_folder_names import (
    MATRIX_A_CSV_FILE_NAME,
    MATRIX_M_CSV_FILE_NAME,
    SMALL_SPECTRUM_REPORT_JSON_FILE_NAME,
)

logger = logging.getLogger(__name__)


def _square_matrix_dataframe(matrix) -> pd.DataFrame:
    return pd.DataFrame(matrix, columns=[f"column_{j + 1}" for j in range(matrix.shape[1])])


def run_stability_subcommand(config: RunConfig) -> Dict[str, Any]:
    run = SubcommandRun.start("stability", config)
    params, solution = solve_configured_cluster(config)
    report = small_eigenvalue_estimates(params, solution)

    run.save_csv(_square_matrix_dataframe(build_matrix_A(params.k)), MATRIX_A_CSV_FILE_NAME)
    run.save_csv(_square_matrix_dataframe(build_matrix_M(solution, params)), MATRIX_M_CSV_FILE_NAME)
    run.save_json(
        {"parameters": cluster_parameters_dict(params), "gaps": solution.gaps.tolist(), **report.dict()},
        SMALL_SPECTRUM_REPORT_JSON_FILE_NAME,
    )
    return run.finish(
        {
            "k": report.k,
            # integers n(n+1) up to round-off
            "eigenvalues_A": [round(value, 9) + 0.0 for value in report.eigenvalues_A],
            "small_eigenvalues": report.small_eigenvalues,
            "closed_form_small_eigenvalues": report.closed_form_small_eigenvalues,
            "synchronous_eigenvalue": report.synchronous_eigenvalue,
            "unstable_modes": [mode.mode for mode in report.modes if mode.classification == "unstable"],
        }
    )
