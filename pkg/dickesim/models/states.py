from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from dickesim.operators import QuantumState, css, dicke_state, excited, ghz, ground

StateKind = Literal["excited", "ground", "ghz", "css", "css_plus", "css_minus", "dicke", "dicke_half", "dark"]


class InitialStateSpec(BaseModel):
    """Named initial state of one Dicke ensemble."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: StateKind
    theta: Optional[float] = Field(default=None, description="CSS polar angle")
    phi: Optional[float] = Field(default=None, description="CSS azimuth")
    j2: Optional[int] = Field(default=None, ge=0, description="Doubled j of an explicit Dicke state")
    m2: Optional[int] = Field(default=None, description="Doubled m of an explicit Dicke state")

    @model_validator(mode="after")
    def _check_parameters(self):
        if self.kind == "dicke" and (self.j2 is None or self.m2 is None):
            raise ValueError("kind 'dicke' needs both j2 and m2")
        if self.kind == "css" and self.theta is None:
            raise ValueError("kind 'css' needs theta (phi defaults to 0)")
        return self

    @property
    def label(self) -> str:
        if self.kind == "dicke":
            return f"dicke_{self.j2}_{self.m2}"
        if self.kind == "css":
            return f"css_{self.theta:g}_{self.phi or 0.0:g}"
        return self.kind

    def build(self, n_tls: int) -> QuantumState:
        if self.kind == "excited":
            return excited(n_tls)
        if self.kind == "ground":
            return ground(n_tls)
        if self.kind == "ghz":
            return ghz(n_tls)
        if self.kind == "css":
            return css(n_tls, self.theta, self.phi or 0.0, coordinates="polar")
        if self.kind == "css_plus":
            return css(n_tls, 1 / np.sqrt(2), 1 / np.sqrt(2))
        if self.kind == "css_minus":
            return css(n_tls, 1 / np.sqrt(2), -1 / np.sqrt(2))
        if self.kind == "dicke_half":
            # |N/2, 0>, or |N/2, 1/2> for odd N
            return dicke_state(n_tls, n_tls, n_tls % 2)
        if self.kind == "dark":
            # |0, 0>, or |1/2, -1/2> for odd N
            return dicke_state(n_tls, n_tls % 2, -(n_tls % 2))
        return dicke_state(n_tls, self.j2, self.m2)
