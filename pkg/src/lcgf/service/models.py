"""Request and response models for the HTTP service."""

from typing import List, Optional

from pydantic import BaseModel, Field

from ..report import SCHEMA_VERSION


class OptionsModel(BaseModel):
    trunc: str = "6"
    moment_order: int = Field(default=2, ge=0)
    quad_tol: float = Field(default=1e-12, gt=0.0)
    battery: int = Field(default=32, ge=1)
    seed: int = 0
    ruleset: str = "hat"


class ExpressionRequest(BaseModel):
    expression: str
    options: OptionsModel = OptionsModel()


class RelationRequest(BaseModel):
    relation: str
    options: OptionsModel = OptionsModel()


class IvpRequest(BaseModel):
    equation: str
    y0: float = 0.0
    yp0: float = 0.0
    options: OptionsModel = OptionsModel()


class AuditRequest(BaseModel):
    equation: str
    y0: float = 0.0
    yp0: float = 0.0
    epsilons: List[float] = [0.1, 0.01]
    options: OptionsModel = OptionsModel()


class MollifierDumpRequest(BaseModel):
    nodes: int = Field(default=1001, ge=2)
    options: OptionsModel = OptionsModel()


class Report(BaseModel):
    schema_version: str = SCHEMA_VERSION
    command: str
    options: dict
    result: dict


class ErrorBody(BaseModel):
    type: str
    message: str


class ErrorReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    error: ErrorBody


class Health(BaseModel):
    status: str = "ok"
    schema_version: str = SCHEMA_VERSION
    version: Optional[str] = None
