from .run_repo import RunRepository

__all__ = ["RunRepository"]
