"""Request/response models for the HTTP service.

Labels cross the wire 1-based (1..m); the service converts at the
boundary. A session walks the interactive round protocol: the client
posts features, receives the played ranking plus the top-k labels whose
relevance is being requested, and answers with exactly those labels'
relevance bits. Experiments are long-running jobs polled by id.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

Algo = Literal["topbbm", "topada", "fullbbm", "fullada"]
RandKind = Literal["uniform", "singleswap"]


class SessionCreate(BaseModel):
    algo: Algo
    m: int = Field(ge=2, description="number of labels")
    k: int = Field(ge=1)
    rho: float = Field(ge=0.0, lt=1.0, default=0.02)
    gamma: float = Field(ge=0.0, lt=1.0, default=0.2)
    learners: int = Field(ge=1, default=20)
    rand: RandKind = "uniform"
    seed: int = 0
    prob_clip: bool = True
    grad_clip: bool = True


class SessionInfo(BaseModel):
    session_id: str
    algo: Algo
    m: int
    k: int
    rho: float
    learners: int
    rand: RandKind
    rounds_completed: int
    awaiting_feedback: bool


class PredictRequest(BaseModel):
    features: list[float]


class PredictResponse(BaseModel):
    round: int
    ranking: list[int] = Field(description="all m labels, best first, 1-based")
    top_k: list[int] = Field(description="labels whose relevance bits are requested")
    explored: bool
    expert_index: int = Field(description="number of learners aggregated by the played expert")


class FeedbackRequest(BaseModel):
    relevance: dict[int, bool] = Field(
        description="relevance bit per requested label (1-based); exactly the top_k labels"
    )


class FeedbackResponse(BaseModel):
    round: int
    estimated_rank_loss: float
    alpha: list[float]
    expert_weights: Optional[list[float]] = None


class ExperimentRequest(BaseModel):
    algo: Algo
    train_path: str
    test_path: str
    label_count: Optional[int] = None
    k: int = 3
    rho: float = 0.02
    gamma: float = 0.2
    learners: int = 20
    loops: int = 1
    seeds: list[int] = Field(default_factory=lambda: [0])
    rand: RandKind = "uniform"
    out_dir: Optional[str] = None
    freeze: bool = False
    prob_clip: bool = True
    grad_clip: bool = True
    diagnostics: bool = False
    shuffle: bool = True


class JobProgress(BaseModel):
    seed: int
    round: int
    total_rounds: int


class JobInfo(BaseModel):
    job_id: str
    state: Literal["running", "done", "error"]
    progress: Optional[JobProgress] = None
    error: Optional[str] = None
    train_loss_mean: Optional[float] = None
    train_loss_std: Optional[float] = None
    test_loss_mean: Optional[float] = None
    test_loss_std: Optional[float] = None
    wall_time_seconds: Optional[float] = None
    files: list[str] = Field(default_factory=list)


class Health(BaseModel):
    status: str
    version: str
