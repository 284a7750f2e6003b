from pydantic import BaseModel, ConfigDict, Field


class Rates(BaseModel):
    """Dissipation coefficients of the master equation, in units of inverse time."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    collective_emission: float = Field(default=0.0, ge=0.0, description="gamma_Down, L[J-]")
    collective_dephasing: float = Field(default=0.0, ge=0.0, description="gamma_Phi, L[Jz]")
    collective_pumping: float = Field(default=0.0, ge=0.0, description="gamma_Up, L[J+]")
    local_emission: float = Field(default=0.0, ge=0.0, description="gamma_down, sum_n L[J-_n]")
    local_dephasing: float = Field(default=0.0, ge=0.0, description="gamma_phi, sum_n L[Jz_n]")
    local_pumping: float = Field(default=0.0, ge=0.0, description="gamma_up, sum_n L[J+_n]")
    kappa: float = Field(default=0.0, ge=0.0, description="Bosonic loss, L[a]")
    bosonic_pump: float = Field(default=0.0, ge=0.0, description="Bosonic pump w, L[a^dag]")

    @classmethod
    def detailed_balance(cls, gamma0: float, n_thermal: float, **others) -> "Rates":
        """Local emission and pumping linked by a bath occupation ``n_thermal``."""
        return cls(local_emission=gamma0 * (1.0 + n_thermal), local_pumping=gamma0 * n_thermal, **others)

    @classmethod
    def depolarizing(cls, gamma_local: float = 0.0, gamma_collective: float = 0.0, **others) -> "Rates":
        """Depolarization composed from pumping, emission and dephasing channels."""
        return cls(
            local_pumping=gamma_local / 2.0,
            local_emission=gamma_local / 2.0,
            local_dephasing=gamma_local,
            collective_pumping=gamma_collective / 2.0,
            collective_emission=gamma_collective / 2.0,
            collective_dephasing=gamma_collective,
            **others,
        )

    @property
    def has_local(self) -> bool:
        return any((self.local_emission, self.local_dephasing, self.local_pumping))

    @property
    def max_rate(self) -> float:
        return max(self.model_dump().values())
