# fourthdown/node_utils.py
import logging
import traceback
from functools import wraps
from typing import Any, Callable, Dict

from utils import now_iso

from .core.errors import FourthDownError

logger = logging.getLogger(__name__)


def safe_node(node_fn: Callable):
    """
    Wrap a pipeline node so:
     - Exceptions are caught
     - A node_error event is added to state['audit']
     - state['error'] is set, and the router sends the graph to finalize
    """
    @wraps(node_fn)
    def wrapper(state: Dict[str, Any]):
        try:
            return node_fn(state)
        except Exception as exc:
            audit = state.setdefault("audit", {"id": f"error_{state.get('run_id', 'unknown')}", "events": []})
            if isinstance(exc, FourthDownError):
                error = {"node": node_fn.__name__, **exc.to_dict(), "exit_code": exc.exit_code}
            else:
                error = {"node": node_fn.__name__, "error": "INTERNAL_ERROR", "message": str(exc),
                         "details": {}, "exit_code": 1}
            audit.setdefault("events", []).append({
                "ts": now_iso(),
                "type": "node_error",
                "payload": {**error, "traceback": traceback.format_exc()},
            })
            logger.error("node %s failed: %s", node_fn.__name__, exc)
            state["error"] = error
            return state
    return wrapper
