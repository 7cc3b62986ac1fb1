"""HTTP completion service: generation mode, ranking mode and scorer are
fixed per process via config; indexes and model load once and are shared
immutably across requests."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from . import __version__, corpus, generation
from .prefix_index import PrefixIndex
from .ranker import ModelParams, load_params, rank_candidates

MAX_K = 50


@dataclass
class ServiceConfig:
    query_index: str = ""
    suffix_index: str = ""
    model: str = ""
    gen_mode: str = "mcg"
    rank_mode: str = "frequency"
    scorer: str = "unnormalized"
    k: int = 10
    host: str = "127.0.0.1"
    port: int = 8000
    static_dir: str = ""

    def __post_init__(self):
        if self.rank_mode in ("neural", "hybrid") and not self.model:
            raise ValueError(
                f"ranking mode {self.rank_mode!r} requires a model path")


def load_config(path) -> ServiceConfig:
    """Parse a key=value config file; '#' starts a comment line."""
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip().strip('"')
    for int_key in ("k", "port"):
        if int_key in values:
            values[int_key] = int(values[int_key])
    if "QAC_PORT" in os.environ:
        values["port"] = int(os.environ["QAC_PORT"])
    return ServiceConfig(**values)


def run_pipeline(query_index, suffix_index, params, gen_mode: str,
                 rank_mode: str, scorer: str, prefix: str, k: int):
    """The in-process completion pipeline: normalize, generate, rank.
    The service response must match this exactly for any input."""
    normalized = corpus.normalize_prefix(prefix)
    cands = generation.generate(gen_mode, query_index, suffix_index,
                                normalized, k)
    if rank_mode != "frequency":
        cands = rank_candidates(cands, params, rank_mode, scorer)
    return normalized, cands


def create_app(config: ServiceConfig, query_index=None, suffix_index=None,
               params=None) -> FastAPI:
    """Build the app. Indexes/params may be passed directly (tests) or
    loaded from the configured paths; load failures abort startup."""
    if query_index is None:
        query_index = PrefixIndex.load(config.query_index)
    if suffix_index is None:
        suffix_index = PrefixIndex.load(config.suffix_index)
    if params is None and config.model:
        params = load_params(config.model)
    if config.rank_mode in ("neural", "hybrid") and params is None:
        raise ValueError("ranking mode requires a loaded model")

    app = FastAPI(title="qac", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    @app.get("/complete")
    def complete(prefix: str = Query(default=""),
                 k: Optional[int] = Query(default=None),
                 generator: Optional[str] = Query(default=None),
                 ranking: Optional[str] = Query(default=None),
                 scorer: Optional[str] = Query(default=None)):
        k_eff = config.k if k is None else k
        if k_eff < 1 or k_eff > MAX_K:
            raise HTTPException(status_code=400,
                                detail=f"k must be in [1, {MAX_K}]")
        gen_mode = generator or config.gen_mode
        rank_mode = ranking or config.rank_mode
        scorer_name = scorer or config.scorer
        if gen_mode not in generation.GENERATORS:
            raise HTTPException(status_code=400,
                                detail=f"unknown generator {gen_mode!r}")
        if rank_mode not in ("frequency", "neural", "hybrid"):
            raise HTTPException(status_code=400,
                                detail=f"unknown ranking mode {rank_mode!r}")
        if rank_mode in ("neural", "hybrid") and params is None:
            raise HTTPException(status_code=503, detail="model not loaded")

        normalized = corpus.normalize_prefix(prefix)
        t0 = time.perf_counter()
        cands = generation.generate(gen_mode, query_index, suffix_index,
                                    normalized, k_eff)
        t1 = time.perf_counter()
        if rank_mode != "frequency":
            cands = rank_candidates(cands, params, rank_mode, scorer_name)
        t2 = time.perf_counter()
        return {
            "prefix": normalized,
            "candidates": [
                {
                    "text": c.text,
                    "source": c.source.value,
                    "frequency": c.frequency,
                    **({"score": c.neural_score}
                       if c.neural_score is not None else {}),
                }
                for c in cands
            ],
            "gen_us": int((t1 - t0) * 1e6),
            "rank_us": int((t2 - t1) * 1e6),
        }

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "version": __version__,
            "query_index_entries": len(query_index),
            "suffix_index_entries": len(suffix_index),
            "model_loaded": params is not None,
            "gen_mode": config.gen_mode,
            "rank_mode": config.rank_mode,
        }

    static_dir = config.static_dir
    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")

    return app


def serve(config: ServiceConfig):
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port)
