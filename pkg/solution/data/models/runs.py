from sqlalchemy import (
    Column,
    Float,
    ForeignKey,
    Integer,
    JSON,
    String,
    DateTime,
    UniqueConstraint
)
from sqlalchemy.ext.declarative import declarative_base
from sqlalchemy.orm import relationship
from sqlalchemy.orm.decl_api import DeclarativeBase
from sqlalchemy.sql import func


Base:DeclarativeBase = declarative_base()


class Run(Base):
    __tablename__ = 'runs'
    run_id = Column(String, primary_key=True)
    command = Column(String, nullable=False)
    status = Column(String, nullable=False, default="running")
    config_json = Column(JSON, nullable=True)
    summary_json = Column(JSON, nullable=True)
    error_code = Column(String, nullable=True)
    created_at = Column(DateTime, default=func.now())
    updated_at = Column(DateTime, default=func.now(), onupdate=func.now())

    estimates = relationship("EffectEstimateRow", back_populates="run", cascade="all, delete-orphan")
    model_fits = relationship("ModelFit", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<Run(run_id='{self.run_id}', command='{self.command}', status='{self.status}')>"


class EffectEstimateRow(Base):
    __tablename__ = 'effect_estimates'
    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(String, ForeignKey('runs.run_id'), nullable=False, index=True)
    mode = Column(String, nullable=False)
    per_play_wpa_diff = Column(Float, nullable=False)
    ci_low = Column(Float, nullable=False)
    ci_high = Column(Float, nullable=False)
    n_pairs = Column(Integer, nullable=False)
    wins_per_team_year = Column(Float)
    caliper = Column(Float)
    created_at = Column(DateTime, default=func.now())

    run = relationship("Run", back_populates="estimates")

    __table_args__ = (
        UniqueConstraint('run_id', 'mode', name='uq_estimate_mode_per_run'),
    )

    def __repr__(self):
        return f"<EffectEstimateRow(run_id='{self.run_id}', mode='{self.mode}', diff={self.per_play_wpa_diff:.5f})>"


class ModelFit(Base):
    __tablename__ = 'model_fits'
    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(String, ForeignKey('runs.run_id'), nullable=False, index=True)
    name = Column(String, nullable=False)
    params_json = Column(JSON, nullable=False)
    created_at = Column(DateTime, default=func.now())

    run = relationship("Run", back_populates="model_fits")

    def __repr__(self):
        return f"<ModelFit(run_id='{self.run_id}', name='{self.name}')>"
