import logging
from typing import List, Optional

from pydantic import BaseModel, Field, root_validator, validator

from gmcluster.core_processes.domain_geometry.boundary_curve import CURVE_KINDS, BoundaryCurve
from gmcluster.system.logging.configure_logging import log_level_from_name

logger = logging.getLogger(__name__)


class ParametersModel(BaseModel):
    class Config:
        extra = "forbid"
        validate_assignment = True


class CurveParametersModel(ParametersModel):
    kind: str = "ellipse"
    radius: float = Field(1.0, gt=0)
    semi_axis_a: float = Field(2.0, gt=0)
    semi_axis_b: float = Field(1.0, gt=0)
    base_radius: float = Field(1.0, gt=0)
    cosine_coefficients: List[float] = Field(default_factory=list)
    sine_coefficients: List[float] = Field(default_factory=list)
    samples_per_period: int = Field(256, ge=16)
    parameter_shift: float = 0.0

    @validator("kind")
    def kind_must_be_known(cls, value):
        if value not in CURVE_KINDS:
            raise ValueError(f"curve kind must be one of {CURVE_KINDS}, got `{value}`")
        return value

    def to_curve(self) -> BoundaryCurve:
        return BoundaryCurve(
            kind=self.kind,
            radius=self.radius,
            semi_axis_a=self.semi_axis_a,
            semi_axis_b=self.semi_axis_b,
            base_radius=self.base_radius,
            cosine_coefficients=tuple(self.cosine_coefficients),
            sine_coefficients=tuple(self.sine_coefficients),
            samples_per_period=self.samples_per_period,
            parameter_shift=self.parameter_shift,
        )


class GroundStateParametersModel(ParametersModel):
    r_max: float = Field(25.0, ge=20.0)
    grid_n: int = Field(4000, ge=2000)
    tol: float = Field(1e-12, gt=0, le=1e-10)


class GreenParametersModel(ParametersModel):
    table_r_min: float = Field(0.05, gt=0)
    table_r_max: float = Field(10.0, gt=0)
    table_points: int = Field(200, ge=2)
    run_disk_oracle: bool = False
    disk_radius: float = Field(12.0, gt=5.0)
    disk_grid_n: int = Field(6000, ge=100)
    mollifier_width: float = Field(0.02, gt=0, lt=0.5)

    @root_validator(skip_on_failure=True)
    def table_range_must_be_increasing(cls, values):
        if values["table_r_min"] >= values["table_r_max"]:
            raise ValueError(f"table_r_min={values['table_r_min']} must be below table_r_max={values['table_r_max']}")
        return values


class ClusterParametersModel(ParametersModel):
    epsilon: float = Field(1e-3, gt=0, lt=1)
    diffusivity: float = Field(4e-4, gt=0)
    tau: float = Field(0.0, ge=0)
    k: int = Field(3, ge=1, le=64)
    eta: float = Field(0.5, gt=0)
    h_double_prime: Optional[float] = Field(None, lt=0, description="Overrides h'' taken from the curve")
    curvature_maximum_index: int = Field(0, ge=0)
    regime_safety_ratio: float = Field(1.0, ge=1.0)


class NlepParametersModel(ParametersModel):
    r_max: float = Field(20.0, gt=5.0)
    grid_n: int = Field(800, ge=16)
    gamma: float = Field(2.0, ge=0)
    tau: float = Field(0.0, ge=0)
    modes: List[int] = Field(default_factory=lambda: [0, 1, 2, 3])
    eigenvalues_per_mode: int = Field(10, ge=1)
    tau_max: float = Field(1.0, gt=0)
    tau_steps: int = Field(20, ge=1)
    run_tau_sweep: bool = True

    @validator("modes")
    def modes_must_be_non_negative(cls, value):
        if not value or min(value) < 0:
            raise ValueError(f"modes must be a non-empty list of non-negative integers, got {value}")
        return value


class SimulateParametersModel(ParametersModel):
    epsilon: float = Field(0.05, gt=0, lt=1)
    diffusivity: float = Field(0.1, gt=0)
    tau: float = Field(0.0, ge=0)
    n_rho: int = Field(64, ge=4)
    n_theta: int = Field(256, ge=8)
    dt: float = Field(0.05, gt=0)
    t_end: float = Field(50.0, gt=0)
    arc_length_offsets: List[float] = Field(default_factory=lambda: [0.0])
    reference_parameter: Optional[float] = None
    snapshot_every: int = Field(100, ge=1, description="Steps between snapshots")
    write_fields: bool = True
    detection_threshold: float = Field(0.2, gt=0, lt=1)
    positivity_floor: float = Field(1e-8, ge=0)

    @root_validator(skip_on_failure=True)
    def run_must_take_a_step(cls, values):
        if values["t_end"] < values["dt"]:
            raise ValueError(f"t_end={values['t_end']} is shorter than one step dt={values['dt']}")
        if not values["arc_length_offsets"]:
            raise ValueError("arc_length_offsets needs at least one spike")
        return values

    @property
    def step_count(self) -> int:
        return int(round(self.t_end / self.dt))


class VerifyParametersModel(ParametersModel):
    include_simulator: bool = True
    persistence_steps: int = Field(10_000, ge=10)
    constant_state_steps: int = Field(1_000, ge=1)
    drift_steps: int = Field(4_000, ge=30, description="Steps of each drift-direction run")
    drift_seed_offset: float = Field(0.3, gt=0, description="Arc-length offset of the single off-maximum spike")
    nlep_oracle_grid_n: int = Field(2_000, ge=500)


class RunConfig(ParametersModel):
    curve: CurveParametersModel = CurveParametersModel()
    ground_state: GroundStateParametersModel = GroundStateParametersModel()
    green: GreenParametersModel = GreenParametersModel()
    cluster: ClusterParametersModel = ClusterParametersModel()
    nlep: NlepParametersModel = NlepParametersModel()
    simulate: SimulateParametersModel = SimulateParametersModel()
    verify: VerifyParametersModel = VerifyParametersModel()
    output_folder: Optional[str] = None
    random_seed: int = Field(0, ge=0)
    verbosity: str = "INFO"

    @validator("verbosity")
    def verbosity_must_name_a_log_level(cls, value):
        return log_level_from_name(value).name
