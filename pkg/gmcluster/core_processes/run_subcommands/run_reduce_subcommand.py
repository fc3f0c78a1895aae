import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from gmcluster.core_processes.reduced_cluster.cluster_models import ClusterParams, SpikeConfiguration
from gmcluster.core_processes.reduced_cluster.reduced_system import (
    asymptotic_spacing,
    solve_positions,
    validate_admissibility,
)
from gmcluster.core_processes.run_subcommands.subcommand_run import (
    SubcommandRun,
    ground_state_and_moments,
    resolve_cluster_params,
)
from gmcluster.data_layer.run_config_models import RunConfig
from gmcluster.system.exceptions import RegimeError
from gmcluster.system.paths_and_filenames.file_and_folder_names import (
    SPIKE_GAPS_CSV_FILE_NAME,
    SPIKE_POSITIONS_JSON_FILE_NAME,
)

logger = logging.getLogger(__name__)


def solve_configured_cluster(config: RunConfig) -> Tuple[ClusterParams, SpikeConfiguration]:
    _, moments = ground_state_and_moments(config.ground_state)
    params = resolve_cluster_params(config, moments)
    return params, solve_positions(params)


def _asymptotic_gaps(params: ClusterParams, warnings: List[str]) -> Optional[np.ndarray]:
    if params.k == 1:
        return np.zeros(0)
    try:
        return np.array([asymptotic_spacing(i, params) for i in range(2, params.k + 1)])
    except RegimeError as error:
        warnings.append(str(error))
        logger.warning(f"No asymptotic spacing to compare against: {error}")
        return None


def gaps_dataframe(solution: SpikeConfiguration, asymptotic_gaps: Optional[np.ndarray]) -> pd.DataFrame:
    gaps = solution.gaps
    if asymptotic_gaps is None:
        asymptotic_gaps = np.full(gaps.size, np.nan)
    return pd.DataFrame(
        {
            "left_spike": np.arange(1, gaps.size + 1),
            "right_spike": np.arange(2, gaps.size + 2),
            "gap": gaps,
            "asymptotic_gap": asymptotic_gaps,
            "relative_deviation": np.abs(gaps - asymptotic_gaps) / gaps,
        }
    )


def cluster_parameters_dict(params: ClusterParams) -> Dict[str, Any]:
    return {
        **params.dict(),
        "sigma": params.sigma,
        "xi_sigma": params.xi_sigma,
        "log_ratio": params.log_ratio,
        "interaction_coefficient": params.interaction_coefficient,
        "curvature_coefficient": params.curvature_coefficient,
    }


def run_reduce_subcommand(config: RunConfig) -> Dict[str, Any]:
    run = SubcommandRun.start("reduce", config)
    params, solution = solve_configured_cluster(config)
    warnings = list(solution.warnings)

    asymptotic_gaps = _asymptotic_gaps(params, warnings)
    admissibility = None
    if asymptotic_gaps is not None:
        admissibility = validate_admissibility(solution, params, eta=config.cluster.eta)
        if not admissibility.passed:
            warnings.append(f"admissibility checks failed: {admissibility.failed_checks()}")

    relative_residual = solution.residual_norm / params.interaction_coefficient
    run.save_csv(gaps_dataframe(solution, asymptotic_gaps), SPIKE_GAPS_CSV_FILE_NAME)
    run.save_json(
        {
            "parameters": cluster_parameters_dict(params),
            "configuration": solution.to_dict(),
            "relative_residual": relative_residual,
            "offsets_in_arc_length": (params.epsilon * solution.offsets).tolist(),
            "relative_heights": (solution.heights / params.xi_sigma).tolist(),
            "asymptotic_gaps": None if asymptotic_gaps is None else asymptotic_gaps.tolist(),
            "admissibility": None
            if admissibility is None
            else {"passed": admissibility.passed, **admissibility.dict()},
            "warnings": warnings,
        },
        SPIKE_POSITIONS_JSON_FILE_NAME,
    )
    return run.finish(
        {
            "k": params.k,
            "offsets": solution.offsets.tolist(),
            "gaps": solution.gaps.tolist(),
            "relative_residual": relative_residual,
            "newton_iterations": solution.iterations,
            "admissible": None if admissibility is None else admissibility.passed,
            "warnings": len(warnings),
        }
    )
