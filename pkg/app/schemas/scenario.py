from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Optional
import numpy as np

TWO_PI = 2.0 * np.pi

# Hermitian and PSD acceptance thresholds for correlation matrices
HERMITIAN_TOL = 1e-12
PSD_REL_TOL = 1e-10


def _frozen_array(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def wrap_angles(theta) -> np.ndarray:
    """Wrap angles into [0, 2π)"""
    wrapped = np.mod(np.asarray(theta, dtype=np.float64), TWO_PI)
    # np.mod can round tiny negatives up to exactly 2π
    wrapped[wrapped >= TWO_PI] = 0.0
    return wrapped


class SystemDims(BaseModel):
    """Antenna counts at the BS (M) and UE (N), and IRS element count (L)"""
    model_config = ConfigDict(frozen=True)

    M: int = Field(..., ge=1)
    N: int = Field(..., ge=1)
    L: int = Field(..., ge=1)

    @property
    def tau(self) -> float:
        return self.M / self.L

    @property
    def k(self) -> int:
        return min(self.L, self.M, self.N)


class CorrelationSet(BaseModel):
    """Receive/transmit correlation of both hops: H1 = R1^½ X T1^½, H2 = R2^½ Y T2^½"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    R1: np.ndarray
    T1: np.ndarray
    R2: np.ndarray
    T2: np.ndarray

    @field_validator("R1", "T1", "R2", "T2", mode="before")
    @classmethod
    def check_correlation(cls, value, info):
        matrix = np.array(value, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"{info.field_name} must be a square matrix, got shape {matrix.shape}")
        if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError(f"{info.field_name} is not Hermitian")
        eigenvalues = np.linalg.eigvalsh(matrix)
        lam_max = max(float(eigenvalues[-1]), 0.0)
        if eigenvalues[0] < -PSD_REL_TOL * max(lam_max, 1e-300):
            raise ValueError(
                f"{info.field_name} is not positive semi-definite (min eigenvalue {eigenvalues[0]:.3e})"
            )
        return _frozen_array(matrix, np.complex128)

    @classmethod
    def identity(cls, dims: SystemDims) -> "CorrelationSet":
        return cls(
            R1=np.eye(dims.N), T1=np.eye(dims.L), R2=np.eye(dims.L), T2=np.eye(dims.M)
        )

    def is_identity(self) -> bool:
        return all(
            np.array_equal(matrix, np.eye(matrix.shape[0]))
            for matrix in (self.R1, self.T1, self.R2, self.T2)
        )


class PhaseShifts(BaseModel):
    """IRS phase shifts θ (radians), wrapped to [0, 2π) at construction"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    theta: np.ndarray

    @field_validator("theta", mode="before")
    @classmethod
    def wrap_theta(cls, value):
        theta = np.atleast_1d(np.asarray(value, dtype=np.float64))
        if theta.ndim != 1:
            raise ValueError("theta must be a vector")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta must be finite")
        return _frozen_array(wrap_angles(theta), np.float64)

    @property
    def L(self) -> int:
        return int(self.theta.size)

    @property
    def psi(self) -> np.ndarray:
        """Diagonal of Ψ = diag(e^{jθ_1}, ..., e^{jθ_L})"""
        return np.exp(1j * self.theta)

    @classmethod
    def zeros(cls, L: int) -> "PhaseShifts":
        return cls(theta=np.zeros(L))

    @classmethod
    def ramp(cls, L: int) -> "PhaseShifts":
        """ψ_i = e^{j2πi/L}, i = 1..L"""
        return cls(theta=TWO_PI * np.arange(1, L + 1) / L)


class LinkBudget(BaseModel):
    """Transmit power, noise and two-hop distance-dependent path loss"""
    model_config = ConfigDict(frozen=True)

    P_dBm: float = 0.0
    sigma2_dBm: float = 0.0
    d_bs_irs: float = Field(1.0, gt=0)
    d_irs_ue: float = Field(1.0, gt=0)
    alpha_bs_irs: float = Field(2.0, gt=0)
    alpha_irs_ue: float = Field(3.0, gt=0)
    C0_dB: float = 0.0


class Scenario(BaseModel):
    """Complete statistical-CSI description of one IRS-aided link"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dims: SystemDims
    corr: CorrelationSet
    phases: PhaseShifts
    budget: LinkBudget = LinkBudget()
    rate_threshold_nats: Optional[float] = None
    # Overrides the link-budget SNR when set (linear)
    rho_override: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def check_shapes(self):
        dims = self.dims
        expected = {"R1": dims.N, "T1": dims.L, "R2": dims.L, "T2": dims.M}
        for name, size in expected.items():
            shape = getattr(self.corr, name).shape
            if shape != (size, size):
                raise ValueError(f"corr.{name} has shape {shape}, expected ({size}, {size})")
        if self.phases.L != dims.L:
            raise ValueError(f"phases has {self.phases.L} entries, expected L = {dims.L}")
        return self

    def with_theta(self, theta) -> "Scenario":
        return self.model_copy(update={"phases": PhaseShifts(theta=theta)})

    def with_rho(self, rho: float) -> "Scenario":
        return self.model_copy(update={"rho_override": float(rho)})

    def with_rate(self, rate_nats: float) -> "Scenario":
        return self.model_copy(update={"rate_threshold_nats": float(rate_nats)})


class EffectiveSpectra(BaseModel):
    """Eigenvalues of R = R1, S = T1^½ΨR2Ψ^H T1^½, T = T2 (descending) plus the effective SNR"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    r: np.ndarray
    s: np.ndarray
    t: np.ndarray
    rho_eff: float = Field(..., ge=0)
    # Eigenvectors of S (columns, same order as s); needed for phase sensitivities
    s_vectors: Optional[np.ndarray] = None

    @field_validator("r", "s", "t", mode="before")
    @classmethod
    def check_spectrum(cls, value, info):
        spectrum = np.atleast_1d(np.asarray(value, dtype=np.float64))
        if spectrum.ndim != 1 or spectrum.size == 0:
            raise ValueError(f"{info.field_name} must be a non-empty vector")
        if np.any(spectrum < 0):
            raise ValueError(f"{info.field_name} has negative entries")
        if np.any(np.diff(spectrum) > 0):
            raise ValueError(f"{info.field_name} must be sorted descending")
        return _frozen_array(spectrum, np.float64)

    @field_validator("s_vectors", mode="before")
    @classmethod
    def freeze_vectors(cls, value):
        if value is None:
            return None
        return _frozen_array(value, np.complex128)

    @property
    def N(self) -> int:
        return int(self.r.size)

    @property
    def L(self) -> int:
        return int(self.s.size)

    @property
    def M(self) -> int:
        return int(self.t.size)

    @classmethod
    def from_arrays(cls, r, s, t, rho_eff: float = 1.0) -> "EffectiveSpectra":
        """Build spectra from unsorted eigenvalue lists (sorted descending here)"""
        return cls(
            r=np.sort(np.asarray(r, dtype=np.float64))[::-1],
            s=np.sort(np.asarray(s, dtype=np.float64))[::-1],
            t=np.sort(np.asarray(t, dtype=np.float64))[::-1],
            rho_eff=rho_eff,
        )
