import os
import json
import uuid
from datetime import datetime, timezone

def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()

def new_id() -> str:
    return str(uuid.uuid4())

def ensure_dir(path: str):
    if path and not os.path.exists(path):
        os.makedirs(path, exist_ok=True)

def to_json(obj) -> str:
    # reruns must write identical bytes
    return json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"

def save_json(obj, path: str):
    ensure_dir(os.path.dirname(str(path)))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(to_json(obj))


from contextlib import contextmanager
from sqlalchemy import Engine
from sqlalchemy.orm import sessionmaker


@contextmanager
def get_session(engine: Engine):
    Session = sessionmaker(bind=engine, expire_on_commit=False)
    session = Session()
    try:
        yield session
        session.commit()
    except:
        session.rollback()
        raise
    finally:
        session.close()


def model_to_dict(instance):
    """Convert a SQLAlchemy model instance to a dictionary."""
    return {
        column.name: getattr(instance, column.name)
        for column in instance.__table__.columns
    }
