"""FastAPI application: interactive sessions and experiment jobs.

Sessions hold one live booster each and enforce the round protocol
(predict, then feedback for exactly the requested labels, then predict
again). Experiments run in a background thread and are polled by id;
finished jobs serve their curve CSV and summary as plain text.

State is in-memory and per-process: this service fronts one machine's
boosters, it is not a distributed store.
"""

from __future__ import annotations

import threading
import uuid
from typing import Iterable

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse

from .. import __version__
from ..boosters import BoosterRound, OnlineBooster
from ..core import Feedback
from ..errors import ConfigError, ContractError, InformationBarrierError, TopkBoostError
from ..experiment import (
    RAND_KINDS,
    ExperimentConfig,
    RunSummary,
    curve_csv_text,
    make_booster,
    run_experiment,
    summary_text,
)
from ..randomize import RandomizationScheme
from . import schemas


class _SuppliedBitsOracle:
    """Adapter feeding client-supplied relevance bits to a booster.

    The booster asks for specific labels; the client must have supplied
    exactly those. Anything else is an information-barrier violation.
    """

    def __init__(self, bits: dict[int, bool]):
        self.bits = bits
        self.queried: frozenset[int] | None = None

    def reveal(self, labels: Iterable[int]) -> Feedback:
        labels = [int(l) for l in labels]
        if self.queried is not None:
            raise InformationBarrierError("relevance already revealed this round")
        self.queried = frozenset(labels)
        if set(self.bits) != self.queried:
            raise InformationBarrierError(
                "relevance bits must cover exactly the requested top-k labels"
            )
        return Feedback(tuple((l, bool(self.bits[l])) for l in labels))


def _scheme_for(req: schemas.SessionCreate) -> RandomizationScheme:
    k, rho = (req.m, 0.0) if req.algo.startswith("full") else (req.k, req.rho)
    try:
        return RandomizationScheme(RAND_KINDS[req.rand], k, req.m, rho)
    except ContractError as exc:
        raise ConfigError(str(exc)) from None


class Session:
    def __init__(self, req: schemas.SessionCreate):
        self.booster: OnlineBooster = make_booster(
            req.algo,
            _scheme_for(req),
            req.learners,
            req.seed,
            gamma=req.gamma,
            prob_clip=req.prob_clip,
            grad_clip=req.grad_clip,
        )
        self.req = req
        self.pending: BoosterRound | None = None
        self.rounds_completed = 0
        self.lock = threading.Lock()


class Job:
    def __init__(self):
        self.state = "running"
        self.progress: tuple[int, int, int] | None = None
        self.error: str | None = None
        self.summary: RunSummary | None = None
        self.curve_text: str | None = None
        self.summary_text: str | None = None


def create_app() -> FastAPI:
    app = FastAPI(title="topkboost", version=__version__)
    sessions: dict[str, Session] = {}
    jobs: dict[str, Job] = {}
    store_lock = threading.Lock()

    @app.exception_handler(TopkBoostError)
    async def _domain_error(request, exc: TopkBoostError):
        status = 409 if isinstance(exc, InformationBarrierError) else 400
        return PlainTextResponse(str(exc), status_code=status)

    def _get_session(session_id: str) -> Session:
        sess = sessions.get(session_id)
        if sess is None:
            raise HTTPException(status_code=404, detail="session not found")
        return sess

    def _get_job(job_id: str) -> Job:
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="job not found")
        return job

    @app.get("/health", response_model=schemas.Health)
    def health():
        return schemas.Health(status="ok", version=__version__)

    # ---------------- sessions ----------------

    def _session_info(sid: str, sess: Session) -> schemas.SessionInfo:
        return schemas.SessionInfo(
            session_id=sid,
            algo=sess.req.algo,
            m=sess.req.m,
            k=sess.booster.scheme.k,
            rho=sess.booster.scheme.rho,
            learners=sess.req.learners,
            rand=sess.req.rand,
            rounds_completed=sess.rounds_completed,
            awaiting_feedback=sess.pending is not None,
        )

    @app.post("/sessions", response_model=schemas.SessionInfo)
    def create_session(req: schemas.SessionCreate):
        sess = Session(req)
        sid = uuid.uuid4().hex
        with store_lock:
            sessions[sid] = sess
        return _session_info(sid, sess)

    @app.get("/sessions/{session_id}", response_model=schemas.SessionInfo)
    def get_session(session_id: str):
        return _session_info(session_id, _get_session(session_id))

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        with store_lock:
            if sessions.pop(session_id, None) is None:
                raise HTTPException(status_code=404, detail="session not found")
        return {"deleted": session_id}

    @app.post("/sessions/{session_id}/predict", response_model=schemas.PredictResponse)
    def predict(session_id: str, req: schemas.PredictRequest):
        sess = _get_session(session_id)
        with sess.lock:
            if sess.pending is not None:
                raise InformationBarrierError(
                    "previous round still awaits feedback; post it before predicting again"
                )
            rnd = sess.booster.predict(req.features)
            sess.pending = rnd
            k = sess.booster.scheme.k
            ranking = [int(l) + 1 for l in rnd.prediction.final_ranking]
            return schemas.PredictResponse(
                round=sess.rounds_completed + 1,
                ranking=ranking,
                top_k=ranking[:k],
                explored=rnd.prediction.explored,
                expert_index=rnd.expert_count,
            )

    @app.post("/sessions/{session_id}/feedback", response_model=schemas.FeedbackResponse)
    def feedback(session_id: str, req: schemas.FeedbackRequest):
        sess = _get_session(session_id)
        with sess.lock:
            if sess.pending is None:
                raise InformationBarrierError("no round awaiting feedback; call predict first")
            bits = {int(l) - 1: bool(v) for l, v in req.relevance.items()}
            if any(l < 0 or l >= sess.req.m for l in bits):
                raise ContractError("relevance labels must lie in 1..m")
            record = sess.booster.update(sess.pending, _SuppliedBitsOracle(bits))
            sess.pending = None
            sess.rounds_completed += 1
            weights = getattr(sess.booster, "expert_weights", None)
            return schemas.FeedbackResponse(
                round=sess.rounds_completed,
                estimated_rank_loss=record.estimated_rank_loss,
                alpha=[float(a) for a in sess.booster.alpha],
                expert_weights=None if weights is None else [float(w) for w in weights],
            )

    # ---------------- experiment jobs ----------------

    @app.post("/experiments", response_model=schemas.JobInfo)
    def start_experiment(req: schemas.ExperimentRequest):
        config = ExperimentConfig(
            algo=req.algo,
            train_path=req.train_path,
            test_path=req.test_path,
            label_count=req.label_count,
            k=req.k,
            rho=req.rho,
            gamma=req.gamma,
            learners=req.learners,
            loops=req.loops,
            seeds=tuple(req.seeds),
            rand=req.rand,
            out_dir=req.out_dir,
            freeze=req.freeze,
            prob_clip=req.prob_clip,
            grad_clip=req.grad_clip,
            diagnostics=req.diagnostics,
            shuffle=req.shuffle,
        )
        job = Job()
        jid = uuid.uuid4().hex

        def _progress(seed: int, rno: int, total: int):
            job.progress = (seed, rno, total)

        def _run():
            try:
                summary = run_experiment(config, on_round=_progress)
                job.summary = summary
                job.curve_text = curve_csv_text(
                    [row for r in summary.results for row in r.curve]
                )
                job.summary_text = summary_text(summary)
                job.state = "done"
            except Exception as exc:  # surfaced via polling
                job.error = f"{type(exc).__name__}: {exc}"
                job.state = "error"

        with store_lock:
            jobs[jid] = job
        threading.Thread(target=_run, name=f"experiment-{jid}", daemon=True).start()
        return _job_info(jid, job)

    def _job_info(jid: str, job: Job) -> schemas.JobInfo:
        info = schemas.JobInfo(job_id=jid, state=job.state, error=job.error)
        if job.progress is not None:
            seed, rno, total = job.progress
            info.progress = schemas.JobProgress(seed=seed, round=rno, total_rounds=total)
        if job.summary is not None:
            tr_mean, tr_std = job.summary.train_loss_stats
            te_mean, te_std = job.summary.test_loss_stats
            info.train_loss_mean = tr_mean
            info.train_loss_std = tr_std
            info.test_loss_mean = te_mean
            info.test_loss_std = te_std
            info.wall_time_seconds = job.summary.wall_time
            info.files = [str(p) for p in job.summary.files]
        return info

    @app.get("/experiments/{job_id}", response_model=schemas.JobInfo)
    def get_experiment(job_id: str):
        return _job_info(job_id, _get_job(job_id))

    @app.get("/experiments/{job_id}/curve", response_class=PlainTextResponse)
    def get_curve(job_id: str):
        job = _get_job(job_id)
        if job.curve_text is None:
            raise ContractError("job has no curve yet")
        return job.curve_text

    @app.get("/experiments/{job_id}/summary", response_class=PlainTextResponse)
    def get_summary(job_id: str):
        job = _get_job(job_id)
        if job.summary_text is None:
            raise ContractError("job has no summary yet")
        return job.summary_text

    @app.delete("/experiments/{job_id}")
    def delete_experiment(job_id: str):
        with store_lock:
            if jobs.pop(job_id, None) is None:
                raise HTTPException(status_code=404, detail="job not found")
        return {"deleted": job_id}

    return app
