# fourthdown/workflow.py
"""
LangGraph pipeline for the fourth-down analysis.

ingest -> normalize -> distance -> fit_wp -> fit_propensity -> estimate
-> diagnostics -> verify -> finalize. Every node is wrapped with safe_node;
after each one a router goes on to the next node, or straight to finalize
when a node failed or the run was asked to stop there. Nodes write their
artifacts under ``out_dir`` and add a section to ``state["summary"]``.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import TypedDict, Dict, Any, List, Mapping, Optional, Sequence

import pandas as pd
from dotenv import load_dotenv
from langgraph.graph import END, StateGraph

from utils import ensure_dir, new_id, save_json, to_json

from .causal.analysis import AnalysisResult, fit_mode_propensity, eligible_cohort, run_analysis, run_diagnostics
from .causal.matching import pairs_frame
from .config import AnalysisConfig
from .core.errors import DataError, VerificationError
from .core.types import AnalysisMode, YardageSource
from .decisions.cohort import build_cohort
from .decisions.go_range import load_go_range
from .decisions.winprob import WinProbModel, calibration_table, fit_wp
from .field.direction import StadiumConvention
from .field.kinematics import frame_kinematics
from .field.normalize import normalize_dataset, speed_calibration_metadata
from .ingest.assemble import GameDataset
from .ingest.loader import load_dataset
from .ingest.writers import write_tracking
from .node_utils import safe_node
from .report.auditor import RunAuditor
from .report.figures import write_figures
from .store.run_repo import RunRepository
from .synth.truth import forced_go_gains, matched_true_effect
from .yardage.compute import YardageResult, compute_yardage, yardage_table

load_dotenv()

logger = logging.getLogger(__name__)

RECOVERY_TOL = 1e-6

# artifacts, relative to out_dir
ORPHANS_FILE = "orphan_frames.csv"
INGEST_FILE = "ingest_report.json"
NORMALIZED_FILE = "normalized_tracking.csv"
KINEMATICS_FILE = "kinematics.csv"
YARDAGE_FILE = "precise_yardage.csv"
DISCREPANCY_FILE = "discrepancies.csv"
WP_MODEL_FILE = "wp_model.json"
WP_CALIBRATION_FILE = "wp_calibration.csv"
COHORT_FILE = "cohort.csv"
PROPENSITY_FILE = "propensity_models.json"
ESTIMATE_FILE = "estimate.json"
PAIRS_FILE = "matched_pairs_{mode}.csv"
DIAGNOSTICS_FILE = "diagnostics.json"
FIGURES_DIR = "figures"
VERIFY_FILE = "verify.json"

NODES = ["ingest", "normalize", "distance", "fit_wp", "fit_propensity", "estimate", "diagnostics", "verify"]


# ---------------------------------------------------------------------
# 1. STATE SCHEMA
# ---------------------------------------------------------------------
class PipelineState(TypedDict, total=False):
    run_id: str
    command: str
    config: AnalysisConfig
    workers: int
    tracking_paths: List[str]
    plays_paths: List[str]
    games_path: Optional[str]
    out_dir: str
    stop_after: Optional[str]
    truth: Optional[Dict[str, Any]]
    figures: bool
    write_normalized: bool
    persist: bool
    auditor: RunAuditor
    datasets: List[GameDataset]
    yardage: YardageResult
    wp_model: WinProbModel
    cohort: pd.DataFrame
    seasons: Dict[str, int]
    propensity_models: Dict[AnalysisMode, Any]
    analysis: AnalysisResult
    verification: Dict[str, Any]
    summary: Dict[str, Any]
    error: Optional[Dict[str, Any]]
    audit: Dict[str, Any]


def _out(state: PipelineState, name: str) -> Path:
    out = Path(state["out_dir"])
    ensure_dir(str(out))
    return out / name


def _record(state: PipelineState, node: str, payload: Dict[str, Any]):
    state.setdefault("summary", {})[node] = payload
    state["auditor"].add_event(state["audit"], node, payload)


# ---------------------------------------------------------------------
# 2. NODE FUNCTIONS
# ---------------------------------------------------------------------
def node_ingest(state: PipelineState) -> PipelineState:
    config = state["config"]
    if not state.get("tracking_paths") or not state.get("plays_paths"):
        raise DataError("NO_INPUT", "ingest needs at least one tracking file and one plays file")
    assembly, reports = load_dataset(state["tracking_paths"], state["plays_paths"], config, state.get("games_path"))
    state["datasets"] = assembly.datasets
    orphans = assembly.orphan_report()
    orphans.to_csv(_out(state, ORPHANS_FILE), index=False, lineterminator="\n")
    payload = {
        "n_games": len(assembly.datasets),
        "n_plays": sum(len(ds.plays) for ds in assembly.datasets),
        "n_frames": sum(len(ds.frames) for ds in assembly.datasets),
        "orphan_plays": len(orphans),
        "plays_without_ball_track": len(assembly.no_ball_track),
        "reports": [r.to_dict() for r in reports],
    }
    save_json(payload, _out(state, INGEST_FILE))
    _record(state, "ingest", {k: v for k, v in payload.items() if k != "reports"})
    return state


def node_normalize(state: PipelineState) -> PipelineState:
    convention = StadiumConvention()
    datasets = state["datasets"]
    workers = state["workers"]
    if workers > 1 and len(datasets) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            normalized = list(pool.map(lambda ds: normalize_dataset(ds, convention), datasets))
    else:
        normalized = [normalize_dataset(ds, convention) for ds in datasets]
    state["datasets"] = normalized
    state["seasons"] = {ds.game_id: ds.game_meta.season for ds in normalized}

    unknown = sum(len(ds.flags.get("DIRECTION_UNKNOWN", [])) for ds in normalized)
    payload = {"direction_unknown": unknown, **speed_calibration_metadata(state["seasons"].values())}
    if state.get("write_normalized"):
        config = state["config"]
        write_tracking(normalized, _out(state, NORMALIZED_FILE), config.schema)
        frames = pd.concat([ds.frames for ds in normalized], ignore_index=True) if normalized else pd.DataFrame()
        kinematics = frame_kinematics(frames, config.kinematics, workers) if len(frames) else pd.DataFrame()
        kinematics.to_csv(_out(state, KINEMATICS_FILE), index=False, lineterminator="\n")
        payload["kinematic_rows"] = len(kinematics)
    _record(state, "normalize", payload)
    return state


def node_distance(state: PipelineState) -> PipelineState:
    result = compute_yardage(state["datasets"], state["workers"])
    state["yardage"] = result
    yardage_table(result).to_csv(_out(state, YARDAGE_FILE), index=False, lineterminator="\n")
    n_discrepancies = result.write_discrepancies(_out(state, DISCREPANCY_FILE))
    _record(state, "distance", {
        "fourth_downs": len(result.yardages),
        "discrepancies": n_discrepancies,
        **result.metadata,
    })
    return state


def _oracle_wpa(truth: Mapping[str, Any]) -> Dict:
    return {(str(r["game_id"]), str(r["play_id"])): float(r["oracle_wpa"]) for r in truth.get("latents", [])}


def node_fit_wp(state: PipelineState) -> PipelineState:
    config = state["config"]
    datasets = state["datasets"]
    plays = [p for ds in datasets for p in ds.plays]
    winners = {ds.game_id: ds.game_meta.winner() for ds in datasets}
    model = fit_wp(plays, winners, config.wp)
    state["wp_model"] = model
    with open(_out(state, WP_MODEL_FILE), "w", encoding="utf-8", newline="\n") as f:
        f.write(model.to_json() + "\n")
    calibration_table(model, plays, winners).to_csv(_out(state, WP_CALIBRATION_FILE), index=False,
                                                    lineterminator="\n")

    truth = state.get("truth")
    cohort = build_cohort(
        [(ds.game_id, winners[ds.game_id], ds.plays) for ds in datasets],
        state["yardage"].yardages,
        model,
        load_go_range(config.go_range_path),
        include_overtime=config.analysis.include_overtime,
        wpa_values=_oracle_wpa(truth) if truth else None,
    )
    state["cohort"] = cohort
    cohort.to_csv(_out(state, COHORT_FILE), index=False, lineterminator="\n")
    _record(state, "fit_wp", {
        "wp": model.fit_diagnostics,
        "cohort_plays": len(cohort),
        "eligible_plays": int(cohort["eligible"].astype(bool).sum()) if len(cohort) else 0,
        "wpa_source": "oracle" if truth else "model",
    })
    return state


def node_fit_propensity(state: PipelineState) -> PipelineState:
    config = state["config"]
    eligible = eligible_cohort(state["cohort"])
    if eligible.empty:
        raise DataError("NO_ELIGIBLE_PLAYS", "no fourth downs inside the go-for-it range")
    models = {mode: fit_mode_propensity(eligible, mode, config)
              for mode in (AnalysisMode.INTEGER_BUCKET, AnalysisMode.PRECISE)}
    state["propensity_models"] = models
    save_json({mode.value: m.to_dict() for mode, m in models.items()}, _out(state, PROPENSITY_FILE))
    _record(state, "fit_propensity", {mode.value: m.fit_diagnostics for mode, m in models.items()})
    return state


def node_estimate(state: PipelineState) -> PipelineState:
    result = run_analysis(state["cohort"], state["config"], state["seasons"], state["workers"],
                          diagnostics=False, models=state.get("propensity_models"))
    state["analysis"] = result
    for mode, mode_result in result.modes.items():
        pairs_frame(mode_result.pairs).to_csv(_out(state, PAIRS_FILE.format(mode=mode.value)), index=False,
                                              lineterminator="\n")
    estimates = result.to_dict()
    save_json(estimates, _out(state, ESTIMATE_FILE))
    _record(state, "estimate", {
        mode: {k: v for k, v in est.items() if k != "balance"} for mode, est in estimates.items()
    })
    return state


def node_diagnostics(state: PipelineState) -> PipelineState:
    config = state["config"]
    result = run_diagnostics(state["analysis"], config)
    payload = {"squeeze_check": result.squeeze,
               "marginal_median_gap": result.gap_curves.marginal_median_gap}
    if state.get("figures"):
        figures = write_figures(state["cohort"], result.gap_curves, _out(state, FIGURES_DIR), config,
                                state["workers"])
        payload["figures"] = figures
    save_json(payload, _out(state, DIAGNOSTICS_FILE))
    _record(state, "diagnostics", {k: v for k, v in payload.items() if k != "squeeze_check"}
            | {"confounder_grows": result.squeeze.get("confounder_grows"),
               "observed_shrink": result.squeeze.get("observed_shrink")})
    return state


def recovery_check(yardage: YardageResult, latents: Sequence[Mapping[str, Any]], tol: float = RECOVERY_TOL) -> Dict:
    """Tracking-derived precise distance against the generator's latent distance."""
    errors = []
    missing = []
    for row in latents:
        key = (str(row["game_id"]), str(row["play_id"]))
        y = yardage.yardages.get(key)
        if y is None or y.source != YardageSource.TRACKING_BALL:
            missing.append(f"{key[0]}:{key[1]}")
            continue
        errors.append(abs(y.yards - float(row["distance"])))
    max_error = float(max(errors)) if errors else float("nan")
    return {
        "checked": len(errors),
        "missing": missing[:50],
        "n_missing": len(missing),
        "max_abs_error": max_error,
        "passed": bool(errors) and not missing and max_error <= tol,
    }


def node_verify(state: PipelineState) -> PipelineState:
    truth = state.get("truth")
    if not truth:
        _record(state, "verify", {"skipped": True})
        return state
    result: AnalysisResult = state["analysis"]
    integer = result.estimate(AnalysisMode.INTEGER_BUCKET)
    precise = result.estimate(AnalysisMode.PRECISE)
    true_value = float(truth["true_effect"])
    recovery = recovery_check(state["yardage"], truth.get("latents", []))
    squeeze = result.squeeze or {}
    gains = forced_go_gains(truth.get("latents", []))
    matched_truth = matched_true_effect(gains, result.modes[AnalysisMode.PRECISE].pairs) if gains else None

    checks = {
        "recoverability": recovery["passed"],
        "integer_above_precise": integer.per_play_wpa_diff > precise.per_play_wpa_diff,
        "precise_positive": precise.per_play_wpa_diff > 0,
        "confounder_grows": bool(squeeze.get("confounder_grows", False)),
    }
    report = {
        "passed": all(checks.values()),
        "checks": checks,
        "true_effect": true_value,
        "sample_true_effect": truth.get("sample_true_effect"),
        "integer_estimate": integer.per_play_wpa_diff,
        "precise_estimate": precise.per_play_wpa_diff,
        "precise_ci": [precise.ci_low, precise.ci_high],
        # one world; coverage is judged across replications
        "precise_ci_covers_truth": bool(precise.ci_low <= true_value <= precise.ci_high),
        "matched_true_effect": matched_truth,
        "precise_ci_covers_matched_truth": (None if matched_truth is None
                                            else bool(precise.ci_low <= matched_truth <= precise.ci_high)),
        "observed_shrink": squeeze.get("observed_shrink"),
        "recovery": recovery,
        "latent_medians": truth.get("latent_medians"),
    }
    state["verification"] = report
    save_json(report, _out(state, VERIFY_FILE))
    _record(state, "verify", {k: v for k, v in report.items() if k not in ("recovery", "latent_medians")})
    if not report["passed"]:
        failed = sorted(k for k, ok in checks.items() if not ok)
        raise VerificationError("VERIFICATION_FAILED", f"failed checks: {', '.join(failed)}", report)
    return state


def node_finalize(state: PipelineState) -> PipelineState:
    auditor = state["auditor"]
    error = state.get("error")
    auditor.add_event(state["audit"], "finalize", {"status": "failed" if error else "completed",
                                                   "error": error.get("error") if error else None})

    if state.get("persist", True):
        try:
            repo = RunRepository(state["config"].runtime.db_url)
            run_id = repo.start_run(state.get("command", "run"), state["config"].to_dict(), state["run_id"])
            analysis = state.get("analysis")
            if analysis is not None:
                for estimate in analysis.to_dict().values():
                    if "mode" in estimate:
                        repo.put_estimate(run_id, estimate)
            if state.get("wp_model") is not None:
                repo.put_model_fit(run_id, "win_probability", state["wp_model"].to_dict())
            for mode, model in (state.get("propensity_models") or {}).items():
                repo.put_model_fit(run_id, f"propensity_{mode.value}", model.to_dict())
            summary = json.loads(to_json(state.get("summary") or {}))
            repo.finish_run(run_id, summary, error.get("error") if error else None)
            auditor.add_event(state["audit"], "run_stored", {"run_id": run_id})
        except Exception as e:
            auditor.add_event(state["audit"], "run_store_error", {"error": str(e)})

    try:
        auditor.persist(state["audit"])
    except Exception:
        pass
    return state


# ---------------------------------------------------------------------
# 3. BUILD LANGGRAPH STATEGRAPH
# ---------------------------------------------------------------------
NODE_FUNCTIONS = {
    "ingest": node_ingest,
    "normalize": node_normalize,
    "distance": node_distance,
    "fit_wp": node_fit_wp,
    "fit_propensity": node_fit_propensity,
    "estimate": node_estimate,
    "diagnostics": node_diagnostics,
    "verify": node_verify,
}


def _router(node: str, next_node: str):
    def route(state: PipelineState):
        if state.get("error") or state.get("stop_after") == node:
            return "finalize"
        return next_node
    route.__name__ = f"after_{node}"
    return route


def build_graph():
    graph = StateGraph(PipelineState)
    for name, fn in NODE_FUNCTIONS.items():
        graph.add_node(name, safe_node(fn))
    graph.add_node("finalize", safe_node(node_finalize))

    graph.set_entry_point(NODES[0])
    for node, next_node in zip(NODES, NODES[1:] + ["finalize"]):
        graph.add_conditional_edges(node, _router(node, next_node), sorted({next_node, "finalize"}))
    graph.add_edge("finalize", END)
    return graph.compile()


workflow = build_graph()


# ---------------------------------------------------------------------
# 4. PUBLIC RUN FUNCTION
# ---------------------------------------------------------------------
def run_pipeline(config: AnalysisConfig,
                 tracking_paths: Sequence[str] = (),
                 plays_paths: Sequence[str] = (),
                 games_path: Optional[str] = None,
                 out_dir: Optional[str] = None,
                 command: str = "run",
                 stop_after: Optional[str] = None,
                 truth: Optional[Dict[str, Any]] = None,
                 figures: bool = False,
                 write_normalized: bool = False,
                 persist: bool = True,
                 run_id: Optional[str] = None) -> PipelineState:
    if stop_after is not None and stop_after not in NODES:
        raise ValueError(f"unknown pipeline node {stop_after!r}")
    run_id = run_id or new_id()
    auditor = RunAuditor(config.runtime.audit_dir)
    initial_state: PipelineState = {
        "run_id": run_id,
        "command": command,
        "config": config,
        "workers": config.worker_count,
        "tracking_paths": [str(p) for p in tracking_paths],
        "plays_paths": [str(p) for p in plays_paths],
        "games_path": str(games_path) if games_path else None,
        "out_dir": str(out_dir or config.runtime.output_dir),
        "stop_after": stop_after,
        "truth": truth,
        "figures": figures,
        "write_normalized": write_normalized,
        "persist": persist,
        "auditor": auditor,
        "audit": auditor.new_audit(run_id, command),
        "summary": {},
        "error": None,
    }
    logger.info("run %s: %s (stop after %s)", run_id, command, stop_after or "verify")
    return workflow.invoke(initial_state, config={"recursion_limit": 4 * len(NODES)})
