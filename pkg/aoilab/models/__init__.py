"""Domain models: parameters, traces, reports and sweep specs."""

from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

from aoilab.exceptions import ParameterError
from aoilab.models.params import SystemParams, make_params
from aoilab.models.report import (
    DensityComparison,
    MomentEstimate,
    MomentReport,
    ReplacementComponents,
    WaitDistribution,
)
from aoilab.models.sweep import PointTask, SweepRow, SweepSpec, parse_rho_grid
from aoilab.models.trace import (
    RECORD_DTYPE,
    TRACE_TOLERANCE,
    ComputedPacketRecord,
    QueuePolicy,
    SamplerOverride,
    SimConfig,
    SimulationTrace,
    TransmissionEvent,
)

ModelT = TypeVar("ModelT", bound=BaseModel)


def build_model(model_cls: type[ModelT], **data: Any) -> ModelT:
    """Construct a model, translating validation failures into ParameterError.

    Args:
        model_cls: Pydantic model class
        **data: Field values

    Returns:
        Validated model instance

    Raises:
        ParameterError: Naming the first offending field
    """
    try:
        return model_cls(**data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(p) for p in first["loc"]) or None
        raise ParameterError(f"Invalid {field or model_cls.__name__}: {first['msg']}", field=field) from e


__all__ = [
    "SystemParams",
    "make_params",
    "WaitDistribution",
    "ReplacementComponents",
    "MomentEstimate",
    "MomentReport",
    "DensityComparison",
    "SweepSpec",
    "SweepRow",
    "PointTask",
    "parse_rho_grid",
    "RECORD_DTYPE",
    "TRACE_TOLERANCE",
    "ComputedPacketRecord",
    "QueuePolicy",
    "SamplerOverride",
    "SimConfig",
    "SimulationTrace",
    "TransmissionEvent",
    "build_model",
]
