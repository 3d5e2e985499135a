"""HTTP wrapper around the laboratory core.

Endpoints map one-to-one onto the command-line verbs; the CLI talks to
this app in-process by default, so both surfaces share validation and
serialization.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..harness import (ExperimentConfig, reports_to_table, run_experiment,
                       run_verification_suite, query_region, trial_log)
from ..configio import build_problem
from ..sources import StateSpaceError
from .schemas import (HealthResponse, RegionRequest, RegionResponse,
                      SimulateRequest, SimulateResponse, SpectrumRequest,
                      SpectrumResponse, VerifyRequest, VerifyResponse)

app = FastAPI(title="dsclab", version=__version__)


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, KeyError, StateSpaceError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    def run():
        config = ExperimentConfig.from_config(req.config)
        if req.seed is not None:
            config.master_seed = req.seed
        table = run_experiment(config)
        trial_csv = trial_log(config).to_csv() if req.trial_log else None
        return SimulateResponse(columns=list(table.columns),
                                rows=table.sorted_rows(),
                                csv=table.to_csv(),
                                trial_csv=trial_csv)
    return _guard(run)


@app.post("/region", response_model=RegionResponse)
def region(req: RegionRequest) -> RegionResponse:
    def run():
        spec = build_problem(req.problem)
        out = query_region(spec, req.mode, point=req.point,
                           example=req.example, eliminate=req.eliminate)
        return RegionResponse(mode=out["mode"], system=out.get("system"),
                              member=out.get("member"),
                              slacks=out.get("slacks"), rows=out.get("rows"))
    return _guard(run)


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    def run():
        reports = run_verification_suite(req.scope)
        table = reports_to_table(reports)
        failures = sum(1 for r in reports if not r.passed)
        return VerifyResponse(scope=req.scope, failures=failures,
                              reports=table.sorted_rows(), csv=table.to_csv())
    return _guard(run)


@app.post("/spectrum", response_model=SpectrumResponse)
def spectrum_endpoint(req: SpectrumRequest) -> SpectrumResponse:
    def run():
        from ..sources import attach_test_channels, memoryless_extend
        from ..spectrum import estimate_spectral_rate
        cfg = req.config
        spec = build_problem(cfg["problem"])
        section = cfg.get("spectrum", {})
        letter = attach_test_channels(memoryless_extend(spec, 1), spec)
        est = estimate_spectral_rate(
            letter,
            [str(t) for t in section.get("target", ["x_" + spec.encoders[0]])],
            [str(g) for g in section.get("given", ["y"])],
            kind=str(section.get("kind", "sup_entropy_rate")),
            epsilon_tail=float(section.get("epsilon_tail", 1e-3)),
            n_list=[int(n) for n in section.get("n_list", [16])],
            samples_per_n=int(section.get("samples_per_n", 0)),
            seed=req.seed if req.seed is not None else int(section.get("seed", 0)),
            mode=str(section.get("mode", "exact")))
        support_values = support_probs = None
        if est.support is not None and len(est.support[0]) <= 4096:
            support_values = [float(v) for v in est.support[0]]
            support_probs = [float(p) for p in est.support[1]]
        return SpectrumResponse(
            kind=est.kind, value=est.value, epsilon=est.epsilon,
            n_list=[int(n) for n in est.n_list], exact=est.exact,
            samples_per_n=est.samples_per_n,
            trajectory={str(k): float(v) for k, v in est.trajectory.items()},
            support_values=support_values, support_probs=support_probs)
    return _guard(run)
