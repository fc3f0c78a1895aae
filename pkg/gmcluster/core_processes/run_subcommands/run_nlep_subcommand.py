import logging
from typing import Any, Dict

from gmcluster.core_processes.nlep_solver.nlep_models import NlepDiscretization
from gmcluster.core_processes.nlep_solver.solve_nlep import mode_table, tau_sweep
from gmcluster.core_processes.run_subcommands.subcommand_run import SubcommandRun, ground_state_and_moments
from gmcluster.data_layer.run_config_models import RunConfig
from gmcluster.system.paths_and_filenames.file_and_folder_names import (
    NLEP_SPECTRUM_CSV_FILE_NAME,
    NLEP_TAU_SWEEP_CSV_FILE_NAME,
)

logger = logging.getLogger(__name__)


def run_nlep_subcommand(config: RunConfig) -> Dict[str, Any]:
    run = SubcommandRun.start("nlep", config)
    settings = config.nlep
    ground_state, _ = ground_state_and_moments(config.ground_state)
    grid = NlepDiscretization.from_ground_state(
        ground_state, r_max=settings.r_max, grid_n=settings.grid_n, gamma=settings.gamma, tau=settings.tau
    )

    spectrum = mode_table(grid, modes=settings.modes, count=settings.eigenvalues_per_mode)
    run.save_csv(spectrum, NLEP_SPECTRUM_CSV_FILE_NAME)
    dominant = spectrum.loc[spectrum.groupby("m").re_lambda.idxmax()]
    summary = {
        "gamma": settings.gamma,
        "tau": settings.tau,
        "dominant_re_lambda_by_mode": dict(zip(dominant.m.astype(int).astype(str), dominant.re_lambda)),
        "first_crossing_tau": None,
        "warnings": list(grid.warnings),
    }

    if settings.run_tau_sweep:
        sweep = tau_sweep(settings.tau_max, settings.tau_steps, grid.with_mode(0))
        run.save_csv(sweep.table, NLEP_TAU_SWEEP_CSV_FILE_NAME)
        summary["first_crossing_tau"] = sweep.first_crossing_tau
        summary["warnings"] = sweep.warnings

    if summary["dominant_re_lambda_by_mode"].get("0", -1.0) > 0:
        logger.warning(f"Radial NLEP mode is unstable at γ={settings.gamma}, τ={settings.tau}")
    return run.finish(summary)
