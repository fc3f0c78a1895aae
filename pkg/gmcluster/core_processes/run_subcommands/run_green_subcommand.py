import logging
from typing import Any, Dict

import numpy as np

from gmcluster.core_processes.green_kernel.half_plane_green import (
    HALF_PLANE_GREEN,
    fit_expansion_coefficients,
    g0_double_prime,
)
from gmcluster.core_processes.green_kernel.helmholtz_disk_oracle import reflection_consistency_error
from gmcluster.core_processes.run_subcommands.subcommand_run import SubcommandRun
from gmcluster.data_layer.run_config_models import RunConfig
from gmcluster.system.paths_and_filenames.file_and_folder_names import (
    GREEN_EXPANSION_COEFFICIENTS_JSON_FILE_NAME,
    GREEN_KERNEL_TABLE_CSV_FILE_NAME,
)

logger = logging.getLogger(__name__)

C1_SERIES_VALUE = (np.log(2.0) - np.euler_gamma) / np.pi
C2_SERIES_VALUE = -1.0 / (4.0 * np.pi)
DISK_ORACLE_RADIUS_RANGE = (0.5, 5.0)


def run_green_subcommand(config: RunConfig) -> Dict[str, Any]:
    run = SubcommandRun.start("green", config)
    settings = config.green

    radii = np.geomspace(settings.table_r_min, settings.table_r_max, settings.table_points)
    table = HALF_PLANE_GREEN.table(radii)
    table["g0_double_prime"] = g0_double_prime(radii)
    run.save_csv(table, GREEN_KERNEL_TABLE_CSV_FILE_NAME)

    expansion = fit_expansion_coefficients()
    report = {
        **expansion.dict(),
        "c1_series_value": C1_SERIES_VALUE,
        "c2_series_value": C2_SERIES_VALUE,
        "c1_deviation": abs(expansion.c1 - C1_SERIES_VALUE),
        "c2_deviation": abs(expansion.c2 - C2_SERIES_VALUE),
        "disk_oracle_max_relative_error": None,
    }
    if settings.run_disk_oracle:
        report["disk_oracle_radius_range"] = list(DISK_ORACLE_RADIUS_RANGE)
        report["disk_oracle_max_relative_error"] = reflection_consistency_error(
            DISK_ORACLE_RADIUS_RANGE,
            disk_radius=settings.disk_radius,
            grid_n=settings.disk_grid_n,
            mollifier_width=settings.mollifier_width,
        )
    run.save_json(report, GREEN_EXPANSION_COEFFICIENTS_JSON_FILE_NAME)
    return run.finish(
        {
            "c1": expansion.c1,
            "c2": expansion.c2,
            "c3": expansion.c3,
            "disk_oracle_max_relative_error": report["disk_oracle_max_relative_error"],
        }
    )
