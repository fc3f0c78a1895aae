import logging
from typing import Any, Dict

from gmcluster.core_processes.run_subcommands.subcommand_run import SubcommandRun, ground_state_and_moments
from gmcluster.data_layer.run_config_models import RunConfig
from gmcluster.system.paths_and_filenames.file_and_folder_names import (
    GROUND_STATE_MOMENTS_JSON_FILE_NAME,
    GROUND_STATE_PROFILE_CSV_FILE_NAME,
)

logger = logging.getLogger(__name__)


def run_ground_state_subcommand(config: RunConfig) -> Dict[str, Any]:
    run = SubcommandRun.start("ground-state", config)
    ground_state, moments = ground_state_and_moments(config.ground_state)

    run.save_csv(ground_state.to_dataframe(), GROUND_STATE_PROFILE_CSV_FILE_NAME)
    identity_residuals = moments.identity_residuals()
    run.save_json(
        {
            "central_value": ground_state.central_value,
            "shooting_iterations": ground_state.shooting_iterations,
            "r_max": ground_state.r_max,
            "grid_n": ground_state.grid_n,
            "tail_matching_radius": ground_state.tail_matching_radius,
            "tail_coefficient": ground_state.tail_coefficient,
            "max_abs_ode_residual": ground_state.max_ode_residual(),
            "seam_slope_mismatch": ground_state.seam_slope_mismatch(),
            "moments": moments.dict(),
            "identity_residuals": identity_residuals,
        },
        GROUND_STATE_MOMENTS_JSON_FILE_NAME,
    )
    return run.finish(
        {
            "central_value": ground_state.central_value,
            **moments.dict(),
            "worst_identity_residual": max(identity_residuals.values()),
        }
    )
