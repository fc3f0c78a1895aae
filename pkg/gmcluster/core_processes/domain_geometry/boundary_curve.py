import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple, Union

import numpy as np
from scipy import integrate, optimize

from gmcluster.system.exceptions import ConvergenceError, GeometryError, SingularParameterizationError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
CURVE_KINDS = ("circle", "ellipse", "radial-fourier")
DEGENERATE_TANGENT_TOLERANCE = 1e-12
SPECTRAL_NOISE_FLOOR = 1e-14


@dataclass(frozen=True)
class BoundaryCurve:
    """
    Closed, counterclockwise boundary curve t -> (x(t), y(t)), t in [0, 2pi), centered on the origin.

    `circle` and `ellipse` carry a registered closed form and are differentiated analytically,
    `radial-fourier` (r(theta) = r0 + sum a_n cos(n theta) + b_n sin(n theta)) is differentiated
    spectrally from `samples_per_period` uniform samples of the parameterization.
    `parameter_shift` re-parameterizes the curve as t -> t + c without changing its shape.
    """

    kind: str = "ellipse"
    radius: float = 1.0
    semi_axis_a: float = 2.0
    semi_axis_b: float = 1.0
    base_radius: float = 1.0
    cosine_coefficients: Tuple[float, ...] = field(default_factory=tuple)
    sine_coefficients: Tuple[float, ...] = field(default_factory=tuple)
    samples_per_period: int = 256
    parameter_shift: float = 0.0

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise GeometryError(f"Unknown curve kind `{self.kind}`, expected one of {CURVE_KINDS}")
        if self.kind == "circle" and self.radius <= 0:
            raise GeometryError(f"Circle radius must be positive, got {self.radius}")
        if self.kind == "ellipse" and (self.semi_axis_a <= 0 or self.semi_axis_b <= 0):
            raise GeometryError(f"Ellipse semi-axes must be positive, got a={self.semi_axis_a}, b={self.semi_axis_b}")
        if self.samples_per_period < 16:
            raise GeometryError(f"samples_per_period must be at least 16, got {self.samples_per_period}")
        if self.kind == "radial-fourier":
            object.__setattr__(self, "cosine_coefficients", tuple(float(a) for a in self.cosine_coefficients))
            object.__setattr__(self, "sine_coefficients", tuple(float(b) for b in self.sine_coefficients))
            dense_theta = np.linspace(0.0, TWO_PI, 8 * self.samples_per_period, endpoint=False)
            if np.min(self.radius_at_angle(dense_theta)) <= 0:
                raise GeometryError("radial-fourier curve has a non-positive radius, the domain is not star-shaped")

    @classmethod
    def circle(cls, radius: float = 1.0, **kwargs) -> "BoundaryCurve":
        return cls(kind="circle", radius=radius, **kwargs)

    @classmethod
    def ellipse(cls, semi_axis_a: float = 2.0, semi_axis_b: float = 1.0, **kwargs) -> "BoundaryCurve":
        return cls(kind="ellipse", semi_axis_a=semi_axis_a, semi_axis_b=semi_axis_b, **kwargs)

    @classmethod
    def radial_fourier(cls, base_radius: float, cosine_coefficients=(), sine_coefficients=(), **kwargs):
        return cls(
            kind="radial-fourier",
            base_radius=base_radius,
            cosine_coefficients=tuple(cosine_coefficients),
            sine_coefficients=tuple(sine_coefficients),
            **kwargs,
        )

    @property
    def is_analytic(self) -> bool:
        return self.kind in ("circle", "ellipse")

    def radius_at_angle(self, theta: Union[float, np.ndarray]) -> np.ndarray:
        """Radial representation r = f(theta) of the boundary about the origin (polar angle, not curve parameter)."""
        theta = np.asarray(theta, dtype=float)
        if self.kind == "circle":
            return np.full_like(theta, self.radius)
        if self.kind == "ellipse":
            a, b = self.semi_axis_a, self.semi_axis_b
            return a * b / np.sqrt((b * np.cos(theta)) ** 2 + (a * np.sin(theta)) ** 2)

        radius = np.full_like(theta, self.base_radius)
        for n, a_n in enumerate(self.cosine_coefficients, start=1):
            radius = radius + a_n * np.cos(n * theta)
        for n, b_n in enumerate(self.sine_coefficients, start=1):
            radius = radius + b_n * np.sin(n * theta)
        return radius

    def radial_profile(self, n_theta: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Uniform polar angles and f, f', f'' on them, differentiated spectrally."""
        theta = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
        radius = self.radius_at_angle(theta)
        if np.min(radius) <= 0:
            raise GeometryError("Boundary is not star-shaped about the origin")
        radius_coefficients = np.fft.fft(radius)
        wavenumbers = np.fft.fftfreq(n_theta, d=1.0 / n_theta)
        if n_theta % 2 == 0:
            radius_coefficients[n_theta // 2] = 0.0
        radius_prime = np.real(np.fft.ifft(1j * wavenumbers * radius_coefficients))
        radius_double_prime = np.real(np.fft.ifft(-(wavenumbers**2) * radius_coefficients))
        return theta, radius, radius_prime, radius_double_prime

    def _raw_position(self, t: np.ndarray) -> np.ndarray:
        if self.kind == "circle":
            return np.stack([self.radius * np.cos(t), self.radius * np.sin(t)])
        if self.kind == "ellipse":
            return np.stack([self.semi_axis_a * np.cos(t), self.semi_axis_b * np.sin(t)])
        radius = self.radius_at_angle(t)
        return np.stack([radius * np.cos(t), radius * np.sin(t)])

    @cached_property
    def _spectral_coefficients(self) -> Tuple[np.ndarray, np.ndarray]:
        n = self.samples_per_period
        samples_t = np.linspace(0.0, TWO_PI, n, endpoint=False)
        coefficients = np.fft.fft(self._raw_position(samples_t), axis=1) / n
        wavenumbers = np.fft.fftfreq(n, d=1.0 / n)
        if n % 2 == 0:
            coefficients[:, n // 2] = 0.0
        coefficients[np.abs(coefficients) < SPECTRAL_NOISE_FLOOR * np.max(np.abs(coefficients))] = 0.0
        return wavenumbers, coefficients

    def derivatives(self, t: Union[float, np.ndarray], max_order: int = 4) -> np.ndarray:
        """
        Parameterization derivatives, shape (max_order + 1, 2, *t.shape): entry [p] is d^p/dt^p (x, y).
        """
        t = np.asarray(t, dtype=float) + self.parameter_shift
        if self.is_analytic:
            amplitude_x, amplitude_y = (
                (self.radius, self.radius) if self.kind == "circle" else (self.semi_axis_a, self.semi_axis_b)
            )
            return np.stack(
                [
                    np.stack([amplitude_x * np.cos(t + order * np.pi / 2), amplitude_y * np.sin(t + order * np.pi / 2)])
                    for order in range(max_order + 1)
                ]
            )

        wavenumbers, coefficients = self._spectral_coefficients
        phases = np.exp(1j * np.multiply.outer(t, wavenumbers))
        result = []
        for order in range(max_order + 1):
            weighted = coefficients * (1j * wavenumbers) ** order
            result.append(np.real(np.moveaxis(phases @ weighted.T, -1, 0)))
        return np.stack(result)

    def position(self, t: Union[float, np.ndarray]) -> np.ndarray:
        return self.derivatives(t, max_order=0)[0]

    def speed(self, t: Union[float, np.ndarray]) -> np.ndarray:
        first = self.derivatives(t, max_order=1)[1]
        return np.hypot(first[0], first[1])

    def curvature_and_arc_length_derivatives(self, t: Union[float, np.ndarray]) -> Tuple[np.ndarray, ...]:
        """
        Curvature h, dh/ds and d^2h/ds^2 at parameter t (counterclockwise arc length s).

        Uses kappa = N S^(-3/2) with N = x'y'' - y'x'', S = x'^2 + y'^2 and its exact t-derivatives.
        """
        d = self.derivatives(t, max_order=4)
        (x1, y1), (x2, y2), (x3, y3), (x4, y4) = d[1], d[2], d[3], d[4]

        speed_squared = x1**2 + y1**2
        if np.any(speed_squared < DEGENERATE_TANGENT_TOLERANCE**2):
            raise SingularParameterizationError(
                f"Degenerate tangent |gamma'(t)| < {DEGENERATE_TANGENT_TOLERANCE} at t={np.asarray(t)}"
            )

        numerator = x1 * y2 - y1 * x2
        numerator_t = x1 * y3 - y1 * x3
        numerator_tt = x2 * y3 + x1 * y4 - y2 * x3 - y1 * x4
        speed_squared_t = 2.0 * (x1 * x2 + y1 * y2)
        speed_squared_tt = 2.0 * (x2**2 + x1 * x3 + y2**2 + y1 * y3)

        kappa = numerator * speed_squared**-1.5
        kappa_t = numerator_t * speed_squared**-1.5 - 1.5 * numerator * speed_squared_t * speed_squared**-2.5
        kappa_tt = (
            numerator_tt * speed_squared**-1.5
            - 3.0 * numerator_t * speed_squared_t * speed_squared**-2.5
            - 1.5 * numerator * speed_squared_tt * speed_squared**-2.5
            + 3.75 * numerator * speed_squared_t**2 * speed_squared**-3.5
        )

        speed = np.sqrt(speed_squared)
        speed_t = speed_squared_t / (2.0 * speed)
        h_prime = kappa_t / speed
        h_double_prime = (kappa_tt * speed - kappa_t * speed_t) / speed**3
        return kappa, h_prime, h_double_prime

    def arc_length(self, t_start: float, t_end: float) -> float:
        """Signed arc length from t_start to t_end."""
        if t_start == t_end:
            return 0.0
        value, _ = integrate.quad(lambda t: float(self.speed(t)), t_start, t_end, epsabs=1e-13, epsrel=1e-12, limit=200)
        return value

    @cached_property
    def perimeter(self) -> float:
        # trapezoid is spectrally accurate for periodic integrands
        t = np.linspace(0.0, TWO_PI, 4 * self.samples_per_period, endpoint=False)
        return float(np.sum(self.speed(t)) * TWO_PI / t.size)

    def total_turning(self) -> float:
        t = np.linspace(0.0, TWO_PI, 4 * self.samples_per_period, endpoint=False)
        kappa, _, _ = self.curvature_and_arc_length_derivatives(t)
        return float(np.sum(kappa * self.speed(t)) * TWO_PI / t.size)

    def seam_mismatch(self) -> float:
        derivatives_at_start = self.derivatives(0.0, max_order=2)
        derivatives_at_end = self.derivatives(TWO_PI, max_order=2)
        return float(np.max(np.abs(derivatives_at_start - derivatives_at_end)))

    def parameter_at_arc_length(self, t_reference: float, arc_length_offset: float) -> float:
        """Parameter reached after travelling `arc_length_offset` (signed, counterclockwise positive) from t_reference."""
        if arc_length_offset == 0:
            return float(t_reference)
        if abs(arc_length_offset) >= self.perimeter:
            raise GeometryError(f"Arc-length offset {arc_length_offset} exceeds the perimeter {self.perimeter}")
        direction = np.sign(arc_length_offset)
        try:
            parameter = optimize.brentq(
                lambda t: self.arc_length(t_reference, t) - arc_length_offset,
                t_reference,
                t_reference + direction * TWO_PI,
                xtol=1e-14,
            )
        except (ValueError, RuntimeError) as error:
            raise ConvergenceError(
                f"Could not invert arc length {arc_length_offset} from t={t_reference}: {error}"
            ) from error
        return float(parameter)

    def nearest_parameter(self, point: np.ndarray) -> float:
        point = np.asarray(point, dtype=float)
        coarse_t = np.linspace(0.0, TWO_PI, 8 * self.samples_per_period, endpoint=False)
        distances = np.linalg.norm(self.position(coarse_t) - point[:, None], axis=0)
        best = coarse_t[int(np.argmin(distances))]
        step = TWO_PI / coarse_t.size
        refined = optimize.minimize_scalar(
            lambda t: float(np.linalg.norm(self.position(t) - point)),
            bounds=(best - step, best + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return float(np.mod(refined.x, TWO_PI))

    def arc_length_coordinate(self, point: np.ndarray, t_reference: float) -> float:
        """Signed boundary arc length from t_reference to the foot point of `point`, in (-perimeter/2, perimeter/2]."""
        t_foot = self.nearest_parameter(point)
        delta_t = np.mod(t_foot - t_reference + np.pi, TWO_PI) - np.pi
        return self.arc_length(t_reference, t_reference + delta_t)


def curvature_at(curve: BoundaryCurve, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Signed curvature (x'y'' - y'x'') / |gamma'|^3, positive on convex counterclockwise curves."""
    kappa, _, _ = curve.curvature_and_arc_length_derivatives(t)
    return float(kappa) if np.ndim(kappa) == 0 else kappa


def arc_length_frame(curve: BoundaryCurve, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Position, unit tangent and unit inward normal at parameter t."""
    d = curve.derivatives(t, max_order=1)
    position, velocity = d[0], d[1]
    speed = float(np.hypot(velocity[0], velocity[1]))
    if speed < DEGENERATE_TANGENT_TOLERANCE:
        raise SingularParameterizationError(f"Degenerate tangent |gamma'(t)| < {DEGENERATE_TANGENT_TOLERANCE} at t={t}")

    tangent = velocity / speed
    # left normal of a counterclockwise curve
    normal = np.array([-tangent[1], tangent[0]])

    interior_point = np.zeros(2)
    if np.dot(normal, interior_point - position) <= 0:
        logger.warning(f"Left normal at t={t} points outward, flipping it")
        normal = -normal
    return position, tangent, normal
