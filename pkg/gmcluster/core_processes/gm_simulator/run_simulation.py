import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from gmcluster.core_processes.domain_geometry.boundary_curve import BoundaryCurve
from gmcluster.core_processes.gm_simulator.detect_spikes import SpikeDetection, detect_spikes
from gmcluster.core_processes.gm_simulator.imex_stepper import ImexStepper
from gmcluster.core_processes.gm_simulator.sim_grid import SimGrid, build_grid
from gmcluster.core_processes.gm_simulator.sim_state import (
    SimState,
    ansatz_amplitude,
    default_reference_parameter,
    seed_boundary_spikes,
)
from gmcluster.core_processes.ground_state.ground_state_models import GroundState
from gmcluster.data_layer.run_config_models import SimulateParametersModel
from gmcluster.system.paths_and_filenames.file_and_folder_names import GRID_COORDINATES_BIN_FILE_NAME
from gmcluster.system.paths_and_filenames.path_getters import (
    get_field_snapshot_file_stem,
    get_field_snapshots_folder_path,
)
from gmcluster.utilities.save_field_snapshot import save_binary_array, save_field_snapshot

logger = logging.getLogger(__name__)

DESK_SCALE_NOTE = (
    "Desk-scale parameters lie outside the asymptotic regime of the cluster theory; "
    "compare drift directions and persistence only, not magnitudes."
)


@dataclass
class SnapshotRecord:
    step: int
    t: float
    mass: float
    min_u: float
    max_u: float
    detection: SpikeDetection


@dataclass
class SimulationTrajectory:
    grid: SimGrid
    amplitude_scale: float
    reference_parameter: float
    snapshots: List[SnapshotRecord] = field(default_factory=list)
    final_state: Optional[SimState] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([snapshot.t for snapshot in self.snapshots])

    @property
    def centroids(self) -> np.ndarray:
        return np.array([np.nan if s.detection.centroid is None else s.detection.centroid for s in self.snapshots])

    def gap_history(self) -> np.ndarray:
        """Boundary gaps per snapshot, shape (snapshots, k-1); NaN rows where the spike count changed."""
        spike_count = len(self.snapshots[0].detection.boundary_spikes)
        history = np.full((len(self.snapshots), max(spike_count - 1, 0)), np.nan)
        for row, snapshot in enumerate(self.snapshots):
            gaps = snapshot.detection.gaps
            if gaps.size == history.shape[1]:
                history[row] = gaps
        return history

    def heights(self) -> np.ndarray:
        """Highest boundary spike per snapshot."""
        return np.array(
            [max((spike.height for spike in s.detection.boundary_spikes), default=np.nan) for s in self.snapshots]
        )

    def tracks_dataframe(self) -> pd.DataFrame:
        rows = []
        for snapshot in self.snapshots:
            for spike_index, spike in enumerate(snapshot.detection.boundary_spikes):
                rows.append(
                    {
                        "t": snapshot.t,
                        "spike_index": spike_index,
                        "arc_length": spike.arc_length,
                        "height": spike.height,
                        "relative_height": spike.height / self.amplitude_scale,
                        "x": spike.position[0],
                        "y": spike.position[1],
                    }
                )
        return pd.DataFrame(
            rows, columns=["t", "spike_index", "arc_length", "height", "relative_height", "x", "y"]
        )

    def diagnostics_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": self.times,
                "mass": [s.mass for s in self.snapshots],
                "min_u": [s.min_u for s in self.snapshots],
                "max_u": [s.max_u for s in self.snapshots],
                "boundary_spikes": [len(s.detection.boundary_spikes) for s in self.snapshots],
                "interior_spikes": [len(s.detection.interior_spikes) for s in self.snapshots],
                "centroid": self.centroids,
            }
        )

    def summary(self) -> Dict:
        gaps = self.gap_history()
        centroids = self.centroids
        first, last = self.snapshots[0], self.snapshots[-1]
        return {
            "t_end": last.t,
            "snapshots": len(self.snapshots),
            "amplitude_scale": self.amplitude_scale,
            "reference_parameter": self.reference_parameter,
            "initial_boundary_spikes": len(first.detection.boundary_spikes),
            "final_boundary_spikes": len(last.detection.boundary_spikes),
            "final_interior_spikes": len(last.detection.interior_spikes),
            "initial_gaps": gaps[0].tolist() if gaps.size else [],
            "final_gaps": gaps[-1].tolist() if gaps.size else [],
            "gap_drift": (gaps[-1] - gaps[0]).tolist() if gaps.size else [],
            "initial_centroid": None if np.isnan(centroids[0]) else float(centroids[0]),
            "final_centroid": None if np.isnan(centroids[-1]) else float(centroids[-1]),
            "centroid_drift": None if np.isnan(centroids[[0, -1]]).any() else float(centroids[-1] - centroids[0]),
            "final_relative_heights": [s.height / self.amplitude_scale for s in last.detection.boundary_spikes],
            "min_u_over_run": float(min(s.min_u for s in self.snapshots)),
            "mass_drift": last.mass - first.mass,
            "note": DESK_SCALE_NOTE,
            "warnings": list(self.warnings),
        }


def _desk_scale_warnings(settings: SimulateParametersModel, grid: SimGrid) -> List[str]:
    warnings = [DESK_SCALE_NOTE]
    finest_tangential_cell = float(np.max(grid.boundary_radius)) * grid.theta_spacing
    finest_normal_cell = float(np.max(grid.boundary_radius)) * grid.rho_spacing
    if max(finest_tangential_cell, finest_normal_cell) > settings.epsilon / 2.0:
        warnings.append(
            f"grid cells up to {max(finest_tangential_cell, finest_normal_cell):.3g} wide do not resolve "
            f"ε={settings.epsilon} with two cells per ε"
        )
    for warning in warnings[1:]:
        logger.warning(f"Simulation setup: {warning}")
    return warnings


def _record_snapshot(
    trajectory: SimulationTrajectory,
    state: SimState,
    step_index: int,
    settings: SimulateParametersModel,
    fields_folder: Optional[Path],
):
    grid = trajectory.grid
    detection = detect_spikes(state, grid, settings.detection_threshold, trajectory.reference_parameter)
    trajectory.snapshots.append(
        SnapshotRecord(
            step=step_index,
            t=state.t,
            mass=grid.integrate(state.u),
            min_u=state.min_u,
            max_u=state.max_u,
            detection=detection,
        )
    )
    if fields_folder is not None:
        save_field_snapshot(
            fields_folder,
            get_field_snapshot_file_stem(len(trajectory.snapshots) - 1),
            grid.to_field(state.u),
            grid.to_field(state.v),
            header={
                "step": step_index,
                "time": float(state.t),
                "epsilon": float(state.epsilon),
                "diffusivity": float(state.diffusivity),
                "tau": float(state.tau),
                "coordinates": GRID_COORDINATES_BIN_FILE_NAME,
            },
        )


def run_simulation(
    settings: SimulateParametersModel,
    curve: BoundaryCurve,
    ground_state: GroundState,
    i2: float,
    output_folder: Optional[Union[str, Path]] = None,
    use_tqdm: bool = True,
    initial_state: Optional[SimState] = None,
) -> SimulationTrajectory:
    """
    Seed boundary spikes at `settings.arc_length_offsets`, integrate to t_end with the IMEX stepper, detect spikes
    every `snapshot_every` steps, and optionally write field snapshots under `output_folder`.
    """
    grid = build_grid(curve, settings.n_rho, settings.n_theta)
    reference_parameter = settings.reference_parameter
    if reference_parameter is None:
        reference_parameter = default_reference_parameter(grid)

    if initial_state is None:
        initial_state = seed_boundary_spikes(
            grid,
            ground_state,
            i2,
            settings.epsilon,
            settings.diffusivity,
            settings.arc_length_offsets,
            tau=settings.tau,
            reference_parameter=reference_parameter,
        )

    trajectory = SimulationTrajectory(
        grid=grid,
        amplitude_scale=ansatz_amplitude(settings.epsilon, settings.diffusivity, i2),
        reference_parameter=reference_parameter,
        warnings=_desk_scale_warnings(settings, grid),
    )

    fields_folder = None
    if output_folder is not None and settings.write_fields:
        fields_folder = get_field_snapshots_folder_path(output_folder)
        x, y = grid.coordinates
        save_binary_array(fields_folder / GRID_COORDINATES_BIN_FILE_NAME, x, y)

    stepper = ImexStepper(grid, positivity_floor=settings.positivity_floor)
    state = initial_state
    _record_snapshot(trajectory, state, 0, settings, fields_folder)

    step_count = settings.step_count
    logger.info(
        f"Integrating {step_count} steps of dt={settings.dt} on a {settings.n_rho}x{settings.n_theta} "
        f"`{curve.kind}` grid (ε={settings.epsilon}, D={settings.diffusivity}, τ={settings.tau})"
    )
    if use_tqdm:
        iterator = tqdm(
            range(1, step_count + 1),
            desc=f"simulating {len(settings.arc_length_offsets)} spike(s)",
            total=step_count,
            colour="magenta",
            unit="steps",
            dynamic_ncols=True,
        )
    else:
        iterator = range(1, step_count + 1)

    for step_index in iterator:
        state = stepper.step(state, settings.dt)
        if step_index % settings.snapshot_every == 0 or step_index == step_count:
            _record_snapshot(trajectory, state, step_index, settings, fields_folder)

    trajectory.final_state = state
    final = trajectory.snapshots[-1]
    logger.success(
        f"Simulation reached t={state.t:.4f}: {len(final.detection.boundary_spikes)} boundary spike(s), "
        f"min u={final.min_u:.3e}"
    )
    return trajectory
