"""Scenario, GSNR-profile and measured-Q file formats plus report emitters.

Every file is JSON with a ``format_version`` field; FORMATS.md documents the
layouts. Loading validates everything up front and reports the dotted field
path of the first problem.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from .catalog import DspSettings, ServiceCandidate, net_throughput
from .errors import MissingFile, ParseError, ValidationError
from .qot import MODULATION_ORDER, GsnrProfile, IsiModel, LaunchPowerModel, QotTargets
from .rrc_dsp import BandwidthCriterion
from .scenario import MeasuredQ, PowerCurve, Scenario
from .wss_cascade import WssModelParams

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
_MISSING = object()


def fmt_db(x):
    return None if x is None else round(float(x), 2)


def fmt_gbps(x):
    return None if x is None else round(float(x), 1)


def fmt_ghz(x):
    return None if x is None else round(float(x), 4)


class _Fields:
    """Typed, path-aware access to one JSON object."""

    def __init__(self, data, path, strict):
        if not isinstance(data, dict):
            raise ValidationError(path, "expected an object")
        self.data, self.path, self.strict = data, path, strict
        self.seen = set()

    def _sub(self, key):
        return f"{self.path}.{key}" if self.path else key

    def raw(self, key, default=_MISSING):
        self.seen.add(key)
        if key not in self.data:
            if default is _MISSING:
                raise ValidationError(self._sub(key), "required field is missing")
            return default
        return self.data[key]

    def number(self, key, default=_MISSING, *, positive=False, nonneg=False, lo=None, hi=None):
        value = self.raw(key, default)
        if value is None and default is None:
            return None
        where = self._sub(key)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(where, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ValidationError(where, "must be finite")
        if positive and not value > 0:
            raise ValidationError(where, f"must be > 0, got {value}")
        if nonneg and value < 0:
            raise ValidationError(where, f"must be >= 0, got {value}")
        if lo is not None and value < lo:
            raise ValidationError(where, f"must be >= {lo}, got {value}")
        if hi is not None and value > hi:
            raise ValidationError(where, f"must be <= {hi}, got {value}")
        return value

    def integer(self, key, default=_MISSING, *, minimum=None):
        value = self.raw(key, default)
        if value is None and default is None:
            return None
        where = self._sub(key)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(where, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise ValidationError(where, f"must be >= {minimum}, got {value}")
        return value

    def string(self, key, default=_MISSING):
        value = self.raw(key, default)
        if not isinstance(value, str) or not value:
            raise ValidationError(self._sub(key), f"expected a non-empty string, got {value!r}")
        return value

    def boolean(self, key, default=_MISSING):
        value = self.raw(key, default)
        if not isinstance(value, bool):
            raise ValidationError(self._sub(key), f"expected true/false, got {value!r}")
        return value

    def obj(self, key, default=_MISSING):
        value = self.raw(key, default)
        if value is None:
            return None
        return _Fields(value, self._sub(key), self.strict)

    def done(self):
        unknown = sorted(set(self.data) - self.seen)
        for key in unknown:
            if self.strict:
                raise ValidationError(self._sub(key), "unknown field")
            logger.warning("ignoring unknown field %s", self._sub(key))


def _wrap(path, fn):
    """Turn constructor ValueErrors into ValidationErrors at ``path``."""
    try:
        return fn()
    except ValueError as exc:
        raise ValidationError(path, str(exc)) from None


def _check_version(fields):
    version = fields.integer("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ValidationError(fields._sub("format_version"), f"unsupported version {version}")


def read_json(path: Path):
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"{path}: no such file")
    text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _load_ref(value, where, base_dir, strict, parser):
    if isinstance(value, str):
        ref = Path(value)
        if not ref.is_absolute():
            ref = Path(base_dir) / ref
        return parser(read_json(ref), "", strict)
    return parser(value, where, strict)


def parse_profile(data, path="", strict=True) -> GsnrProfile:
    f = _Fields(data, path, strict)
    _check_version(f)
    start = f.number("band_start_ghz", 0.0)
    width = f.number("band_width_ghz", positive=True)
    samples = f.raw("samples")
    if not isinstance(samples, list):
        raise ValidationError(f._sub("samples"), "expected a list")
    offsets, values = [], []
    for i, item in enumerate(samples):
        s = _Fields(item, f"{f._sub('samples')}[{i}]", strict)
        offsets.append(float(s.number("offset_ghz")))
        values.append(float(s.number("gsnr_db")))
        s.done()
    f.done()
    return _wrap(f._sub("samples"), lambda: GsnrProfile(float(start), float(width), tuple(offsets), tuple(values)))


def parse_measured(data, path="", strict=True) -> MeasuredQ:
    f = _Fields(data, path, strict)
    _check_version(f)
    q = {}
    qf = f.obj("q_db", {})
    for sid in qf.data:
        q[sid] = float(qf.number(sid))
    curves = {}
    cf = f.obj("power_curves", {})
    for sid in cf.data:
        c = cf.obj(sid)
        powers = c.raw("relative_power_db")
        qs = c.raw("q_db")
        if not isinstance(powers, list) or not isinstance(qs, list) or len(powers) != len(qs) or len(powers) < 2:
            raise ValidationError(c.path, "needs equal-length relative_power_db and q_db lists (>= 2 points)")
        if any(b <= a for a, b in zip(powers, powers[1:])):
            raise ValidationError(c._sub("relative_power_db"), "must be strictly increasing")
        c.done()
        curves[sid] = PowerCurve(tuple(float(p) for p in powers), tuple(float(v) for v in qs))
    f.done()
    return MeasuredQ(q, curves)


def _parse_candidate(c: _Fields) -> ServiceCandidate:
    sid = c.string("id")
    modulation = c.string("modulation")
    if modulation not in MODULATION_ORDER:
        raise ValidationError(c._sub("modulation"), f"must be one of {sorted(MODULATION_ORDER)}")
    rate = c.number("symbol_rate_gbd", positive=True)
    rolloff = c.raw("rolloff", None)
    table = {}
    if isinstance(rolloff, dict):
        rf = _Fields(rolloff, c._sub("rolloff"), True)
        for key in rolloff:
            if key != "default" and not key.isdigit():
                raise ValidationError(rf._sub(key), "keys are WSS counts or 'default'")
            table[key] = float(rf.number(key, lo=0.0, hi=1.0))
    elif rolloff is not None:
        table["default"] = float(c.number("rolloff", lo=0.0, hi=1.0))
    search = c.boolean("search_rolloff", False)
    c.done()
    return _wrap(c.path, lambda: ServiceCandidate(sid, modulation, rate, table, search))


def parse_scenario(data, base_dir=".", strict=True) -> Scenario:
    f = _Fields(data, "", strict)
    _check_version(f)
    name = f.string("name", "scenario")
    seed = f.integer("seed", 0, minimum=0)

    spectrum = f.obj("spectrum")
    width = spectrum.number("width_ghz", positive=True)
    granularity = spectrum.number("granularity_ghz", 6.25, positive=True)
    spectrum.done()

    n_trx = f.integer("transceivers", minimum=1)
    copies = f.integer("copies_per_item", None, minimum=1)

    topo = f.obj("topology")
    n_wss = topo.integer("n_wss", minimum=1)
    wf = topo.obj("wss", {})
    otf = wf.number("otf_bandwidth_3db_ghz", WssModelParams.otf_bandwidth_3db, positive=True)
    wf.done()
    topo.done()
    wss = WssModelParams(float(otf), float(granularity))

    qf = f.obj("qot", {})
    qfec_f = qf.obj("q_fec_db", {})
    q_fec = dict(QotTargets().q_fec_db)
    for mod in qfec_f.data:
        if mod not in MODULATION_ORDER:
            raise ValidationError(qfec_f._sub(mod), "unknown modulation")
        q_fec[mod] = float(qfec_f.number(mod, positive=True))
    margin = qf.number("margin_db", 0.0, nonneg=True)
    ref_rate = qf.number("reference_rate_gbd", 32.0, positive=True)
    isi_f = qf.obj("isi_penalty", {})
    isi_default = IsiModel()
    slopes, knees = dict(isi_default.slope_db), dict(isi_default.knee)
    for mod in isi_f.data:
        if mod not in MODULATION_ORDER:
            raise ValidationError(isi_f._sub(mod), "unknown modulation")
        m = isi_f.obj(mod)
        slopes[mod] = float(m.number("slope_db", slopes[mod], nonneg=True))
        knees[mod] = float(m.number("knee", knees[mod], lo=0.0, hi=1.0))
        m.done()
    qf.done()
    targets = QotTargets(q_fec, float(margin))

    df = f.obj("dsp", {})
    defaults = DspSettings()
    sps = df.integer("samples_per_symbol", defaults.samples_per_symbol, minimum=4)
    nsym = df.integer("num_symbols", defaults.num_symbols, minimum=256)
    span = df.integer("span_symbols", defaults.span_symbols, minimum=16)
    crit_f = df.obj("bandwidth_criterion", {})
    method = crit_f.string("method", defaults.criterion.method)
    crit_value = crit_f.number("value", defaults.criterion.value)
    crit_f.done()
    df.done()
    criterion = _wrap("dsp.bandwidth_criterion", lambda: BandwidthCriterion(method, float(crit_value)))
    dsp = DspSettings(sps, nsym, span, criterion)

    lf = f.obj("launch_power", {})
    ld = LaunchPowerModel()
    ase = lf.number("ase_noise_power", ld.ase_noise_power, positive=True)
    nli = lf.number("nli_coefficient", ld.nli_coefficient, positive=True)
    rng = lf.raw("sweep_range_db", list(ld.sweep_range_db))
    if (not isinstance(rng, list) or len(rng) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in rng)):
        raise ValidationError("launch_power.sweep_range_db", "expected [min, max]")
    step = lf.number("step_db", ld.step_db, positive=True)
    lf.done()
    launch = _wrap("launch_power", lambda: LaunchPowerModel(float(ase), float(nli),
                                                             (float(rng[0]), float(rng[1])), float(step)))

    raw_catalog = f.raw("catalog")
    if not isinstance(raw_catalog, list):
        raise ValidationError("catalog", "expected a list")
    catalog = tuple(_parse_candidate(_Fields(c, f"catalog[{i}]", strict)) for i, c in enumerate(raw_catalog))
    ids = [c.id for c in catalog]
    for i, sid in enumerate(ids):
        if sid in ids[:i]:
            raise ValidationError(f"catalog[{i}].id", f"duplicate id {sid!r}")
        if n_wss is not None and catalog[i].rolloff_for(n_wss) is None and not catalog[i].search_rolloff:
            raise ValidationError(f"catalog[{i}].rolloff", f"no entry for {n_wss} WSSs and no 'default'")

    profile = None
    raw_profile = f.raw("gsnr_profile", None)
    if raw_profile is not None:
        profile = _load_ref(raw_profile, "gsnr_profile", base_dir, strict, parse_profile)
        if abs(profile.band_width - width) > 1e-9:
            raise ValidationError("gsnr_profile.band_width_ghz",
                                  f"{profile.band_width} GHz does not match spectrum width {width} GHz")

    measured = None
    raw_measured = f.raw("measured_q", None)
    if raw_measured is not None:
        measured = _load_ref(raw_measured, "measured_q", base_dir, strict, parse_measured)
        for sid in list(measured.q_db) + list(measured.power_curves):
            if sid not in ids:
                raise ValidationError("measured_q", f"service id {sid!r} is not in the catalog")

    contour_bw = None
    cf = f.obj("contour", None)
    if cf is not None:
        contour_bw = cf.number("wss_bandwidth_ghz", None, positive=True)
        cf.done()
        if contour_bw is not None:
            ratio = contour_bw / granularity
            if abs(ratio - round(ratio)) > 1e-9:
                raise ValidationError("contour.wss_bandwidth_ghz", "must be a multiple of the granularity")
            contour_bw = float(contour_bw)
    f.done()

    return Scenario(
        name=name, width_ghz=float(width), n_trx=n_trx, n_wss=n_wss, catalog=catalog,
        wss=wss, targets=targets, reference_rate_gbd=float(ref_rate), dsp=dsp, launch=launch,
        isi=IsiModel(slopes, knees), profile=profile, measured=measured,
        contour_bandwidth_ghz=contour_bw, copies_per_item=copies, seed=seed,
    )


SCENARIO_DIR = "scenarios"


def shipped_scenarios() -> list:
    root = resources.files("osaas_plan") / SCENARIO_DIR
    return sorted(p.name[:-5] for p in root.iterdir()
                  if p.name.endswith(".json") and not p.name.startswith("_"))


def resolve_scenario_path(name_or_path) -> Path:
    """A filesystem path, or the name of a scenario shipped with the package."""
    path = Path(name_or_path)
    if path.is_file():
        return path
    shipped = resources.files("osaas_plan") / SCENARIO_DIR / f"{name_or_path}.json"
    if shipped.is_file():
        return Path(str(shipped))
    raise MissingFile(f"{name_or_path}: no such file or shipped scenario")


def load_scenario(name_or_path, strict: bool = True, seed: Optional[int] = None) -> Scenario:
    path = resolve_scenario_path(name_or_path)
    scenario = parse_scenario(read_json(path), path.parent, strict)
    if seed is not None:
        from dataclasses import replace
        scenario = replace(scenario, seed=seed)
    return scenario


def profile_to_dict(profile: GsnrProfile) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "band_start_ghz": profile.band_start,
        "band_width_ghz": profile.band_width,
        "samples": [{"offset_ghz": o, "gsnr_db": g} for o, g in zip(profile.offsets, profile.gsnr_db)],
    }


def measured_to_dict(measured: MeasuredQ) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "q_db": dict(measured.q_db),
        "power_curves": {
            sid: {"relative_power_db": list(c.relative_power_db), "q_db": list(c.q_db)}
            for sid, c in measured.power_curves.items()
        },
    }


def scenario_to_dict(s: Scenario) -> dict:
    """Serialize with profile and fixture inlined, so the result reloads alone."""
    out: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "name": s.name,
        "seed": s.seed,
        "spectrum": {"width_ghz": s.width_ghz, "granularity_ghz": s.wss.granularity},
        "transceivers": s.n_trx,
        "topology": {"n_wss": s.n_wss, "wss": {"otf_bandwidth_3db_ghz": s.wss.otf_bandwidth_3db}},
        "qot": {
            "q_fec_db": dict(s.targets.q_fec_db),
            "margin_db": s.targets.margin_db,
            "reference_rate_gbd": s.reference_rate_gbd,
            "isi_penalty": {m: {"slope_db": s.isi.slope_db[m], "knee": s.isi.knee[m]} for m in s.isi.slope_db},
        },
        "dsp": {
            "samples_per_symbol": s.dsp.samples_per_symbol,
            "num_symbols": s.dsp.num_symbols,
            "span_symbols": s.dsp.span_symbols,
            "bandwidth_criterion": {"method": s.dsp.criterion.method, "value": s.dsp.criterion.value},
        },
        "launch_power": {
            "ase_noise_power": s.launch.ase_noise_power,
            "nli_coefficient": s.launch.nli_coefficient,
            "sweep_range_db": list(s.launch.sweep_range_db),
            "step_db": s.launch.step_db,
        },
        "catalog": [
            {"id": c.id, "modulation": c.modulation, "symbol_rate_gbd": c.symbol_rate,
             "rolloff": dict(c.rolloff_table), "search_rolloff": c.search_rolloff}
            for c in s.catalog
        ],
    }
    if s.copies_per_item is not None:
        out["copies_per_item"] = s.copies_per_item
    if s.profile is not None:
        out["gsnr_profile"] = profile_to_dict(s.profile)
    if s.measured is not None:
        out["measured_q"] = measured_to_dict(s.measured)
    if s.contour_bandwidth_ghz is not None:
        out["contour"] = {"wss_bandwidth_ghz": s.contour_bandwidth_ghz}
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# -- reports ---------------------------------------------------------------

def _channel_rows(report):
    return [
        {"channel": c.channel, "service": c.service_id, "q_db": fmt_db(c.q_value_db),
         "q_target_db": fmt_db(c.q_target_db), "feasible": c.feasible, "source": c.source}
        for c in report.channels
    ]


def plan_to_dict(outcome, scenario: Scenario) -> dict:
    plan, report = outcome.plan, outcome.report
    by_channel = {c.channel: c for c in report.channels}
    g = scenario.granularity_ghz
    channels = []
    for i, p in enumerate(plan.placements):
        s = p.service
        q = by_channel.get(i)
        channels.append({
            "channel": i,
            "service": s.id,
            "modulation": s.modulation,
            "symbol_rate_gbd": s.symbol_rate,
            "rolloff": s.rolloff_star,
            "occupied_bw_ghz": fmt_ghz(s.occupied_bw),
            "wss_bandwidth_ghz": fmt_ghz(s.wss_bandwidth_star),
            "start_bin": p.start_bin,
            "end_bin": p.end_bin,
            "center_offset_ghz": fmt_ghz(p.center_offset(g)),
            "gross_gbps": fmt_gbps(s.throughput_gbps),
            "q_db": fmt_db(q.q_value_db) if q else None,
            "q_target_db": fmt_db(q.q_target_db) if q else None,
            "feasible": q.feasible if q else None,
            "source": q.source if q else None,
        })
    iterations = []
    for rec in outcome.log:
        iterations.append({
            "iteration": rec.iteration,
            "excluded_before": list(rec.excluded_before),
            "feasible_services": list(rec.feasible_ids),
            "selection": rec.label,
            "gross_gbps": fmt_gbps(rec.total_gross_gbps),
            "bins_used": rec.bins_used,
            "trx_used": rec.trx_used,
            "launch_power_db": fmt_db(rec.launch_power_db),
            "feasible": rec.report.feasible if rec.report is not None else None,
            "channels": _channel_rows(rec.report) if rec.report is not None else [],
            "newly_excluded": list(rec.newly_excluded),
        })
    return {
        "format_version": FORMAT_VERSION,
        "scenario": scenario.name,
        "seed": scenario.seed,
        "status": outcome.status,
        "band": {
            "width_ghz": fmt_ghz(scenario.width_ghz),
            "granularity_ghz": fmt_ghz(g),
            "bins": scenario.capacity_bins,
            "transceivers": scenario.n_trx,
            "n_wss": scenario.n_wss,
        },
        "selection": plan.label,
        "totals": {
            "gross_gbps": fmt_gbps(plan.total_gross_gbps),
            "net_gbps": fmt_gbps(net_throughput(plan.total_gross_gbps)),
            "bins_used": plan.bins_used,
            "trx_used": plan.trx_used,
        },
        "launch_power_db": fmt_db(outcome.launch_power_db),
        "channels": channels,
        "iterations": iterations,
    }


def plan_summary(outcome, scenario: Scenario) -> str:
    plan = outcome.plan
    lines = [
        f"scenario   {scenario.name}",
        f"band       {scenario.width_ghz:.4f} GHz / {scenario.capacity_bins} bins, "
        f"{scenario.n_trx} TRx, {scenario.n_wss} WSS",
        f"status     {outcome.status}",
        f"selection  {plan.label}",
        f"gross      {plan.total_gross_gbps:.1f} Gb/s   net {net_throughput(plan.total_gross_gbps):.1f} Gb/s",
        "",
        f"{'ch':>3} {'service':<14} {'ROF':>5} {'B_occ':>9} {'WSS':>9} {'bins':>9} {'Q':>7} {'target':>7} ok",
    ]
    by_channel = {c.channel: c for c in outcome.report.channels}
    for i, p in enumerate(plan.placements):
        s, q = p.service, by_channel.get(i)
        q_txt = f"{q.q_value_db:7.2f} {q.q_target_db:7.2f} {'y' if q.feasible else 'n'}" if q else f"{'-':>7} {'-':>7} -"
        lines.append(
            f"{i:>3} {s.id:<14} {s.rolloff_star:5.2f} {s.occupied_bw:9.4f} {s.wss_bandwidth_star:9.4f} "
            f"{p.start_bin:>4}-{p.end_bin:<4} {q_txt}"
        )
    lines.append("")
    lines.append(f"{'it':>3} {'selection':<28} {'gross':>9} {'ok':>3}  excluded next")
    for rec in outcome.log:
        ok = "-" if rec.report is None else ("y" if rec.report.feasible else "n")
        lines.append(f"{rec.iteration:>3} {rec.label:<28} {rec.total_gross_gbps:9.1f} {ok:>3}  "
                     f"{','.join(rec.newly_excluded) or '-'}")
    return "\n".join(lines) + "\n"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


TRX_CURVE_HEADER = ("t", "exact_gbps", "envelope_gbps", "selection")


def trx_curve_rows(points, services) -> list:
    from .planner import expand_selection, selection_label
    from .catalog import catalog_order

    def label(sel):
        if sel is None:
            return "none"
        return selection_label(sorted(expand_selection(sel, services), key=catalog_order))

    return [
        (p.trx, "" if p.exact_gbps is None else f"{p.exact_gbps:.1f}", f"{p.envelope_gbps:.1f}", label(p.selection))
        for p in points
    ]


CONTOUR_HEADER = ("rolloff", "relative_power_db", "mean_q_db")
PROFILE_HEADER = ("service", "modulation", "symbol_rate_gbd", "required_snr_db",
                  "available_snr_db", "slack_db", "feasible")
