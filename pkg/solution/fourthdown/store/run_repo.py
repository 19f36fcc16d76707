# fourthdown/store/run_repo.py
import os
from typing import Dict, List, Optional

from sqlalchemy import create_engine, select
from sqlalchemy.engine import make_url

from data.models.runs import Base, EffectEstimateRow, ModelFit, Run
from utils import ensure_dir, get_session, model_to_dict, new_id

DEFAULT_SQLITE = "sqlite:///./data/core/runs.sqlite"


class RunRepository:
    """Run history: one row per command, its effect estimates and fitted model parameters."""

    def __init__(self, db_url: str = None, echo: bool = False):
        self.db_url = db_url or os.environ.get("FOURTHDOWN_DB_URL") or DEFAULT_SQLITE
        url = make_url(self.db_url)
        if url.drivername.startswith("sqlite") and url.database and url.database != ":memory:":
            ensure_dir(os.path.dirname(url.database))
        self.engine = create_engine(self.db_url, echo=echo, future=True)
        Base.metadata.create_all(self.engine)

    def start_run(self, command: str, config: Optional[Dict] = None, run_id: Optional[str] = None) -> str:
        run_id = run_id or new_id()
        with get_session(self.engine) as s:
            s.add(Run(run_id=run_id, command=command, status="running", config_json=config))
        return run_id

    def finish_run(self, run_id: str, summary: Optional[Dict] = None, error_code: Optional[str] = None):
        with get_session(self.engine) as s:
            run = s.get(Run, run_id)
            if run is None:
                return
            run.status = "failed" if error_code else "completed"
            run.summary_json = summary
            run.error_code = error_code

    def put_estimate(self, run_id: str, estimate: Dict):
        with get_session(self.engine) as s:
            s.add(EffectEstimateRow(
                run_id=run_id,
                mode=estimate["mode"],
                per_play_wpa_diff=float(estimate["per_play_wpa_diff"]),
                ci_low=float(estimate["ci_low"]),
                ci_high=float(estimate["ci_high"]),
                n_pairs=int(estimate["n_pairs"]),
                wins_per_team_year=estimate.get("wins_per_team_year"),
                caliper=estimate.get("caliper"),
            ))

    def put_model_fit(self, run_id: str, name: str, params: Dict):
        with get_session(self.engine) as s:
            s.add(ModelFit(run_id=run_id, name=name, params_json=params))

    def get_run(self, run_id: str) -> Optional[Dict]:
        with get_session(self.engine) as s:
            run = s.get(Run, run_id)
            if run is None:
                return None
            out = model_to_dict(run)
            out["estimates"] = [model_to_dict(e) for e in run.estimates]
            out["model_fits"] = [model_to_dict(m) for m in run.model_fits]
            return out

    def latest_estimates(self, mode: Optional[str] = None, command: Optional[str] = None,
                         limit: int = 20) -> List[Dict]:
        with get_session(self.engine) as s:
            stmt = select(EffectEstimateRow)
            if mode:
                stmt = stmt.where(EffectEstimateRow.mode == mode)
            if command:
                stmt = stmt.join(Run, Run.run_id == EffectEstimateRow.run_id).where(Run.command == command)
            stmt = stmt.order_by(EffectEstimateRow.id.desc()).limit(limit)
            return [model_to_dict(r[0]) for r in s.execute(stmt).all()]

    def list_runs(self, status: Optional[str] = None, limit: int = 50) -> List[Dict]:
        with get_session(self.engine) as s:
            stmt = select(Run)
            if status:
                stmt = stmt.where(Run.status == status)
            stmt = stmt.order_by(Run.created_at.desc()).limit(limit)
            return [model_to_dict(r[0]) for r in s.execute(stmt).all()]
