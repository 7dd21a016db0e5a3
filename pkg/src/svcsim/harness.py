"""Monte Carlo block-error-rate harness.

Determinism contract: every trial draws from its own counter-based stream
(key = master seed, counter = trial index / SNR index / scenario), so any
worker can compute any trial and a sweep's results are bit-identical for any
worker count.  Batches have fixed boundaries and are merged in index order;
the adaptive stop (after a target number of block errors) is evaluated at
batch boundaries only.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import bler_upper_bound, crossing_snr_db
from .channel import ChannelModel, InterferenceSpec, apply_channel
from .codebook import Codebook, gen_bernoulli, gen_gaussian, max_correlation
from .codec import ModulationScheme, bits_capacity, encode, map_bits_to_support
from .decoder import DecodeStatus, DecoderParams, RejectReason, decode

__all__ = [
    "CSV_FIELDS",
    "BlerRecord",
    "CodebookSpec",
    "ChannelSpec",
    "ComparisonReport",
    "ComparisonRow",
    "ConfigError",
    "SimConfig",
    "TrialPolicy",
    "compare_records",
    "read_records_csv",
    "run_bounds",
    "run_null_sweep",
    "run_sweep",
    "wilson_interval",
    "write_records_csv",
    "write_run_json",
]

_STREAM_CONST = 0x53564353  # domain separator for this harness's streams
_MASK64 = (1 << 64) - 1
_SCENARIOS = ("genuine", "null", "wrong_codebook")


class ConfigError(ValueError):
    """Invalid run configuration; message starts with the offending field path."""


@dataclass(frozen=True)
class CodebookSpec:
    kind: str = "bernoulli"
    m: int = 42
    n: int = 96
    seed: int | None = 0

    def build(self, alpha: float) -> Codebook:
        if self.kind == "bernoulli":
            return gen_bernoulli(self.m, self.n, alpha, self.seed)
        if self.kind == "gaussian":
            return gen_gaussian(self.m, self.n, alpha, self.seed)
        raise ConfigError(f"codebook.kind: {self.kind!r} not sweepable")


@dataclass(frozen=True)
class ChannelSpec:
    kind: str = "rayleigh"
    repetitions: int = 1
    repetition_fading: str = "independent"
    pilotless: bool = False
    interference_power_ratio: float = 0.0
    interference_seed: int | None = None


@dataclass(frozen=True)
class TrialPolicy:
    max_trials: int = 10000
    target_block_errors: int | None = None
    batch_size: int = 2048


@dataclass(frozen=True)
class SimConfig:
    codebook: CodebookSpec = CodebookSpec()
    modulation: ModulationScheme = ModulationScheme.QPSK
    channel: ChannelSpec = ChannelSpec()
    snr_db_grid: tuple[float, ...] = (0.0,)
    decoder: DecoderParams = field(default_factory=lambda: DecoderParams(k=2))
    trials: TrialPolicy = TrialPolicy()
    master_seed: int = 1
    workers: int = 1
    scenario: str = "genuine"
    source: str = "sim"
    wrong_seed: int | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "SimConfig":
        return _parse_config(raw)

    def to_dict(self) -> dict:
        d: dict = {
            "source": self.source,
            "master_seed": self.master_seed,
            "workers": self.workers,
            "scenario": self.scenario,
            "codebook": {
                "kind": self.codebook.kind,
                "m": self.codebook.m,
                "n": self.codebook.n,
                "seed": self.codebook.seed,
            },
            "modulation": self.modulation.value,
            "channel": {
                "kind": self.channel.kind,
                "repetitions": self.channel.repetitions,
                "repetition_fading": self.channel.repetition_fading,
                "pilotless": self.channel.pilotless,
            },
            "snr_db_grid": list(self.snr_db_grid),
            "decoder": {
                "l_expand": self.decoder.l_expand,
                "l_max": self.decoder.l_max,
                "stop_eps": self.decoder.stop_eps,
                "p_th": self.decoder.p_th,
                "fa_eps": self.decoder.fa_eps,
            },
            "trials": {
                "max_trials": self.trials.max_trials,
                "target_block_errors": self.trials.target_block_errors,
                "batch_size": self.trials.batch_size,
            },
        }
        if self.channel.interference_power_ratio > 0:
            d["channel"]["interference"] = {
                "power_ratio": self.channel.interference_power_ratio,
                "seed": self.channel.interference_seed,
            }
        if self.wrong_seed is not None:
            d["wrong_seed"] = self.wrong_seed
        return d


def _expect(raw: dict, path: str, allowed: set[str]) -> None:
    extra = set(raw) - allowed
    if extra:
        raise ConfigError(f"{path}{min(extra)}: unknown field")


def _get_num(raw: dict, key: str, path: str, default, *, integer=False,
             minimum=None):
    val = raw.get(key, default)
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}{key}: expected a number")
    if integer:
        if int(val) != val:
            raise ConfigError(f"{path}{key}: expected an integer")
        val = int(val)
    if minimum is not None and val < minimum:
        raise ConfigError(f"{path}{key}: must be >= {minimum}")
    return val


def _parse_config(raw: dict) -> SimConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a mapping")
    _expect(raw, "", {"source", "master_seed", "workers", "scenario",
                      "codebook", "modulation", "channel", "snr_db_grid",
                      "decoder", "trials", "wrong_seed"})

    mod_name = raw.get("modulation", "qpsk")
    try:
        mod = ModulationScheme(mod_name)
    except ValueError:
        raise ConfigError(f"modulation: unknown scheme {mod_name!r}") from None

    cb_raw = raw.get("codebook", {})
    if not isinstance(cb_raw, dict):
        raise ConfigError("codebook: expected a mapping")
    _expect(cb_raw, "codebook.", {"kind", "m", "n", "seed"})
    kind = cb_raw.get("kind", "bernoulli")
    if kind not in ("bernoulli", "gaussian"):
        raise ConfigError(f"codebook.kind: unknown kind {kind!r}")
    cb = CodebookSpec(
        kind=kind,
        m=_get_num(cb_raw, "m", "codebook.", 42, integer=True, minimum=1),
        n=_get_num(cb_raw, "n", "codebook.", 96, integer=True, minimum=2),
        seed=_get_num(cb_raw, "seed", "codebook.", 0, integer=True),
    )
    if bits_capacity(cb.n, mod.sparsity) > 64:
        raise ConfigError("codebook.n: payload capacity exceeds 64 bits")

    ch_raw = raw.get("channel", {})
    if not isinstance(ch_raw, dict):
        raise ConfigError("channel: expected a mapping")
    _expect(ch_raw, "channel.", {"kind", "repetitions", "repetition_fading",
                                 "pilotless", "interference"})
    ch_kind = ch_raw.get("kind", "rayleigh")
    if ch_kind not in ("awgn", "rayleigh", "rand_const"):
        raise ConfigError(f"channel.kind: unknown kind {ch_kind!r}")
    rep_fading = ch_raw.get("repetition_fading", "independent")
    if rep_fading not in ("independent", "identical"):
        raise ConfigError("channel.repetition_fading: must be "
                          "'independent' or 'identical'")
    pilotless = ch_raw.get("pilotless", False)
    if not isinstance(pilotless, bool):
        raise ConfigError("channel.pilotless: expected a boolean")
    reps = _get_num(ch_raw, "repetitions", "channel.", 1, integer=True,
                    minimum=1)
    if pilotless and reps != 1:
        raise ConfigError("channel.repetitions: must be 1 when pilotless")
    int_ratio, int_seed = 0.0, None
    int_raw = ch_raw.get("interference")
    if int_raw is not None:
        if not isinstance(int_raw, dict):
            raise ConfigError("channel.interference: expected a mapping")
        _expect(int_raw, "channel.interference.", {"power_ratio", "seed"})
        int_ratio = _get_num(int_raw, "power_ratio", "channel.interference.",
                             0.0, minimum=0.0)
        int_seed = _get_num(int_raw, "seed", "channel.interference.", None,
                            integer=True)
        # power 0 is exactly "no interferer"; normalize so the two configs
        # are indistinguishable downstream
        if int_ratio == 0.0:
            int_seed = None
    channel = ChannelSpec(ch_kind, reps, rep_fading, pilotless,
                          float(int_ratio), int_seed)

    grid_raw = raw.get("snr_db_grid")
    if not isinstance(grid_raw, (list, tuple)) or not grid_raw:
        raise ConfigError("snr_db_grid: expected a nonempty list")
    grid = []
    for i, v in enumerate(grid_raw):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"snr_db_grid[{i}]: expected a number")
        grid.append(float(v))

    dec_raw = raw.get("decoder", {})
    if not isinstance(dec_raw, dict):
        raise ConfigError("decoder: expected a mapping")
    _expect(dec_raw, "decoder.", {"l_expand", "l_max", "stop_eps", "p_th",
                                  "fa_eps"})
    p_th = _get_num(dec_raw, "p_th", "decoder.", 0.0, minimum=0.0)
    if p_th >= 1.0:
        raise ConfigError("decoder.p_th: must lie in [0, 1)")
    decoder = DecoderParams(
        k=mod.sparsity,
        l_expand=_get_num(dec_raw, "l_expand", "decoder.", 2, integer=True,
                          minimum=1),
        l_max=_get_num(dec_raw, "l_max", "decoder.", 4, integer=True,
                       minimum=1),
        stop_eps=_get_num(dec_raw, "stop_eps", "decoder.", None, minimum=0.0),
        p_th=p_th,
        fa_eps=_get_num(dec_raw, "fa_eps", "decoder.", None, minimum=0.0),
    )

    tr_raw = raw.get("trials", {})
    if not isinstance(tr_raw, dict):
        raise ConfigError("trials: expected a mapping")
    _expect(tr_raw, "trials.", {"max_trials", "target_block_errors",
                                "batch_size"})
    trials = TrialPolicy(
        max_trials=_get_num(tr_raw, "max_trials", "trials.", 10000,
                            integer=True, minimum=1),
        target_block_errors=_get_num(tr_raw, "target_block_errors", "trials.",
                                     None, integer=True, minimum=1),
        batch_size=_get_num(tr_raw, "batch_size", "trials.", 2048,
                            integer=True, minimum=1),
    )

    scenario = raw.get("scenario", "genuine")
    if scenario not in _SCENARIOS:
        raise ConfigError(f"scenario: must be one of {_SCENARIOS}")
    source = raw.get("source", "sim")
    if not isinstance(source, str) or not source:
        raise ConfigError("source: expected a nonempty string")
    workers = _get_num(raw, "workers", "", 1, integer=True, minimum=1)
    master_seed = _get_num(raw, "master_seed", "", 1, integer=True, minimum=0)
    wrong_seed = _get_num(raw, "wrong_seed", "", None, integer=True)

    return SimConfig(codebook=cb, modulation=mod, channel=channel,
                     snr_db_grid=tuple(grid), decoder=decoder, trials=trials,
                     master_seed=master_seed, workers=workers,
                     scenario=scenario, source=source, wrong_seed=wrong_seed)


@dataclass(frozen=True)
class BlerRecord:
    source: str
    snr_db: float
    trials: int
    block_errors: int
    false_alarms: int
    missed_detections: int
    bler: float
    ci_lo: float
    ci_hi: float
    wall_time_s: float
    wrong_payload: int = 0
    rejected_true: int = 0
    check_flagged: int = 0
    rank_rejected: int = 0
    failed: int = 0

    def to_dict(self) -> dict:
        return {
            "source": self.source, "snr_db": self.snr_db,
            "trials": self.trials, "block_errors": self.block_errors,
            "false_alarms": self.false_alarms,
            "missed_detections": self.missed_detections, "bler": self.bler,
            "ci_lo": self.ci_lo, "ci_hi": self.ci_hi,
            "wall_time_s": self.wall_time_s,
            "wrong_payload": self.wrong_payload,
            "rejected_true": self.rejected_true,
            "check_flagged": self.check_flagged,
            "rank_rejected": self.rank_rejected, "failed": self.failed,
        }


CSV_FIELDS = ("source", "snr_db", "trials", "block_errors", "false_alarms",
              "missed_detections", "bler", "ci_lo", "ci_hi", "wall_time_s")


def wilson_interval(successes: int, trials: int,
                    z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials**2)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------------
# trial execution

@dataclass
class _Tally:
    trials: int = 0
    block_errors: int = 0
    false_alarms: int = 0
    missed_detections: int = 0
    wrong_payload: int = 0
    rejected_true: int = 0
    check_flagged: int = 0
    rank_rejected: int = 0
    failed: int = 0

    def merge(self, other: "_Tally") -> None:
        for f in self.__dataclass_fields__:
            setattr(self, f, getattr(self, f) + getattr(other, f))


class _Context:
    """Objects rebuilt once per process from the config."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        mod = cfg.modulation
        self.mod = mod
        self.cb = cfg.codebook.build(mod.alpha)
        self.bits = bits_capacity(self.cb.n_columns, mod.sparsity)
        self.params = cfg.decoder
        interference = None
        if cfg.channel.interference_power_ratio > 0:
            seed = cfg.channel.interference_seed
            if seed is None:
                seed = (cfg.codebook.seed or 0) + 101
            int_cb = replace(cfg.codebook, seed=seed).build(mod.alpha)
            interference = InterferenceSpec(int_cb,
                                            cfg.channel.interference_power_ratio,
                                            mod)
        self.base_model = ChannelModel(
            kind=cfg.channel.kind, snr_db=0.0,
            repetitions=cfg.channel.repetitions,
            repetition_fading=cfg.channel.repetition_fading,
            interference=interference, pilotless=cfg.channel.pilotless)
        self.wrong_cb = None
        if cfg.scenario == "wrong_codebook":
            seed = cfg.wrong_seed
            if seed is None:
                seed = (cfg.codebook.seed or 0) + 1
            self.wrong_cb = replace(cfg.codebook, seed=seed).build(mod.alpha)
        self.scen_code = _SCENARIOS.index(cfg.scenario)
        self._zero = np.zeros(self.cb.m, dtype=np.complex128)

    def model_at(self, snr_db: float) -> ChannelModel:
        return replace(self.base_model, snr_db=snr_db)


def _trial_rng(master_seed: int, snr_idx: int, trial: int,
               scen: int) -> np.random.Generator:
    bits = np.random.Philox(
        counter=[0, trial, snr_idx, scen],
        key=[master_seed & _MASK64, _STREAM_CONST])
    return np.random.Generator(bits)


def _run_trial(ctx: _Context, model: ChannelModel, snr_idx: int, trial: int,
               tally: _Tally) -> None:
    rng = _trial_rng(ctx.cfg.master_seed, snr_idx, trial, ctx.scen_code)
    scen = ctx.cfg.scenario
    sent: int | None = None
    if scen == "genuine":
        sent = int(rng.integers(0, (1 << ctx.bits) - 1, endpoint=True,
                                dtype=np.uint64))
        x = encode(sent, ctx.cb, ctx.mod)
    elif scen == "null":
        x = ctx._zero
    else:
        wrong_bits = bits_capacity(ctx.wrong_cb.n_columns, ctx.mod.sparsity)
        payload = int(rng.integers(0, (1 << wrong_bits) - 1, endpoint=True,
                                   dtype=np.uint64))
        x = encode(payload, ctx.wrong_cb, ctx.mod)

    pkt = apply_channel(x, model, rng)
    out = decode(pkt, ctx.cb, ctx.params, ctx.mod)
    tally.trials += 1
    if out.status is DecodeStatus.FAILED:
        tally.failed += 1
    if out.status is DecodeStatus.REJECTED:
        if not out.check_accepted:
            tally.check_flagged += 1
        elif out.reason is RejectReason.RANK_OUT_OF_RANGE:
            tally.rank_rejected += 1
    if scen == "genuine":
        if out.status is DecodeStatus.DECODED and out.payload == sent:
            return
        tally.block_errors += 1
        if out.status is DecodeStatus.DECODED:
            tally.wrong_payload += 1
        else:
            tally.missed_detections += 1
            if out.status is DecodeStatus.REJECTED and out.support is not None:
                true_sup = map_bits_to_support(sent, ctx.cb.n_columns,
                                               ctx.mod.sparsity)
                if out.support == true_sup:
                    tally.rejected_true += 1
    else:
        # nothing genuine was sent: any delivery is a false alarm
        if out.status is DecodeStatus.DECODED:
            tally.false_alarms += 1
            tally.block_errors += 1


def _run_batch(cfg: SimConfig, snr_idx: int, start: int, count: int) -> _Tally:
    ctx = _context_for(cfg)
    model = ctx.model_at(cfg.snr_db_grid[snr_idx])
    tally = _Tally()
    for trial in range(start, start + count):
        _run_trial(ctx, model, snr_idx, trial, tally)
    return tally


_CTX_CACHE: dict[str, _Context] = {}


def _context_for(cfg: SimConfig) -> _Context:
    key = json.dumps(cfg.to_dict(), sort_keys=True)
    ctx = _CTX_CACHE.get(key)
    if ctx is None:
        ctx = _Context(cfg)
        _CTX_CACHE.clear()
        _CTX_CACHE[key] = ctx
    return ctx


def _batch_plan(policy: TrialPolicy) -> list[tuple[int, int]]:
    out = []
    start = 0
    while start < policy.max_trials:
        count = min(policy.batch_size, policy.max_trials - start)
        out.append((start, count))
        start += count
    return out


def _run_point(cfg: SimConfig, snr_idx: int, executor) -> BlerRecord:
    t0 = time.perf_counter()
    plan = _batch_plan(cfg.trials)
    target = cfg.trials.target_block_errors
    tally = _Tally()
    if executor is None:
        for start, count in plan:
            tally.merge(_run_batch(cfg, snr_idx, start, count))
            if target is not None and tally.block_errors >= target:
                break
    else:
        window = 4 * cfg.workers
        pending: dict[int, object] = {}
        next_submit = 0
        for i in range(len(plan)):
            while next_submit < len(plan) and next_submit < i + window:
                s, c = plan[next_submit]
                pending[next_submit] = executor.submit(_run_batch, cfg,
                                                       snr_idx, s, c)
                next_submit += 1
            tally.merge(pending.pop(i).result())
            if target is not None and tally.block_errors >= target:
                for fut in pending.values():
                    fut.cancel()
                pending.clear()
                break
    wall = time.perf_counter() - t0
    bler = tally.block_errors / tally.trials if tally.trials else 0.0
    lo, hi = wilson_interval(tally.block_errors, tally.trials)
    return BlerRecord(
        source=cfg.source, snr_db=cfg.snr_db_grid[snr_idx],
        trials=tally.trials, block_errors=tally.block_errors,
        false_alarms=tally.false_alarms,
        missed_detections=tally.missed_detections, bler=bler, ci_lo=lo,
        ci_hi=hi, wall_time_s=wall, wrong_payload=tally.wrong_payload,
        rejected_true=tally.rejected_true,
        check_flagged=tally.check_flagged,
        rank_rejected=tally.rank_rejected, failed=tally.failed)


def run_sweep(cfg: SimConfig) -> list[BlerRecord]:
    """Run every SNR point of the configured sweep; deterministic in the seed."""
    if cfg.workers <= 1:
        return [_run_point(cfg, i, None) for i in range(len(cfg.snr_db_grid))]
    with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
        return [_run_point(cfg, i, executor)
                for i in range(len(cfg.snr_db_grid))]


def run_null_sweep(cfg: SimConfig, scenario: str = "null") -> list[BlerRecord]:
    """Sweep with no genuine packet: empty slots or another codebook's packets."""
    if scenario not in ("null", "wrong_codebook"):
        raise ConfigError("scenario: must be 'null' or 'wrong_codebook'")
    return run_sweep(replace(cfg, scenario=scenario))


def run_bounds(cfg: SimConfig, mu_star: float | None = None) -> list[BlerRecord]:
    """Closed-form block-error upper bound on the config's grid.

    mu_star defaults to the measured largest column correlation of the
    configured codebook instance.
    """
    cb = cfg.codebook.build(cfg.modulation.alpha)
    if mu_star is None:
        mu_star = max_correlation(cb)
    k = cfg.modulation.sparsity
    out = []
    for snr in cfg.snr_db_grid:
        b = bler_upper_bound(cb.m, cb.n_columns, k, snr, mu_star)
        out.append(BlerRecord(source="bound_upper", snr_db=snr, trials=0,
                              block_errors=0, false_alarms=0,
                              missed_detections=0, bler=b, ci_lo=b, ci_hi=b,
                              wall_time_s=0.0))
    return out


# ---------------------------------------------------------------------------
# persistence

def write_records_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for r in records:
            d = r.to_dict()
            w.writerow([d[f] for f in CSV_FIELDS])


def read_records_csv(path) -> list[BlerRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_FIELDS:
            raise ValueError(f"{path}: expected header {','.join(CSV_FIELDS)}")
        out = []
        for row in reader:
            out.append(BlerRecord(
                source=row["source"], snr_db=float(row["snr_db"]),
                trials=int(row["trials"]),
                block_errors=int(row["block_errors"]),
                false_alarms=int(row["false_alarms"]),
                missed_detections=int(row["missed_detections"]),
                bler=float(row["bler"]), ci_lo=float(row["ci_lo"]),
                ci_hi=float(row["ci_hi"]),
                wall_time_s=float(row["wall_time_s"])))
        return out


def write_run_json(path, cfg: SimConfig, records) -> None:
    payload = {
        "config": cfg.to_dict(),
        "master_seed": cfg.master_seed,
        "records": [r.to_dict() for r in records],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# bound comparison

@dataclass(frozen=True)
class ComparisonRow:
    snr_db: float
    sim_bler: float
    bound_bler: float
    sim_ci_hi: float
    violation: bool


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ComparisonRow, ...]
    sim_crossing_db: float
    bound_crossing_db: float
    crossing_gap_db: float
    violations: int


def compare_records(sim, bound, level: float = 1e-2) -> ComparisonReport:
    """Point-by-point dominance check plus crossing gap at ``level``.

    A violation is a grid point where the simulated rate exceeds the bound by
    more than the upper confidence half-width.
    """
    if [r.snr_db for r in sim] != [r.snr_db for r in bound]:
        raise ValueError("sim and bound records are on different SNR grids")
    rows = []
    for s, b in zip(sim, bound):
        slack = s.ci_hi - s.bler
        rows.append(ComparisonRow(s.snr_db, s.bler, b.bler, s.ci_hi,
                                  s.bler > b.bler + slack))
    grid = [r.snr_db for r in sim]
    sim_x = crossing_snr_db(grid, [r.bler for r in sim], level)
    bound_x = crossing_snr_db(grid, [r.bler for r in bound], level)
    gap = abs(sim_x - bound_x)
    return ComparisonReport(tuple(rows), sim_x, bound_x, gap,
                            sum(r.violation for r in rows))
