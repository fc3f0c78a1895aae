import logging
from typing import Any, Dict

from gmcluster.core_processes.gm_simulator.run_simulation import run_simulation
from gmcluster.core_processes.run_subcommands.subcommand_run import SubcommandRun, ground_state_and_moments
from gmcluster.data_layer.run_config_models import RunConfig
from gmcluster.system.paths_and_filenames.file_and_folder_names import (
    SIMULATION_DIAGNOSTICS_CSV_FILE_NAME,
    SIMULATION_SUMMARY_JSON_FILE_NAME,
    SPIKE_TRACKS_CSV_FILE_NAME,
)

logger = logging.getLogger(__name__)


def run_simulate_subcommand(config: RunConfig, use_tqdm: bool = True) -> Dict[str, Any]:
    run = SubcommandRun.start("simulate", config)
    ground_state, moments = ground_state_and_moments(config.ground_state)

    trajectory = run_simulation(
        config.simulate,
        config.curve.to_curve(),
        ground_state,
        moments.I2,
        output_folder=run.output_folder,
        use_tqdm=use_tqdm,
    )
    run.save_csv(trajectory.tracks_dataframe(), SPIKE_TRACKS_CSV_FILE_NAME)
    run.save_csv(trajectory.diagnostics_dataframe(), SIMULATION_DIAGNOSTICS_CSV_FILE_NAME)
    summary = trajectory.summary()
    run.save_json(summary, SIMULATION_SUMMARY_JSON_FILE_NAME)
    return run.finish(
        {
            "t_end": summary["t_end"],
            "final_boundary_spikes": summary["final_boundary_spikes"],
            "final_interior_spikes": summary["final_interior_spikes"],
            "final_gaps": summary["final_gaps"],
            "centroid_drift": summary["centroid_drift"],
            "min_u_over_run": summary["min_u_over_run"],
        }
    )
