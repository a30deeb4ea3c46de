"""Scenario configuration, shipped presets and artifact emission."""

from __future__ import annotations

import copy
import json
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import io
from .classicmap import ClassicalParams, portrait
from .errors import ConfigError, DegeneracyWarning, EmptySelection, KickedIonError, TruncationLoss
from .floquet import TrapParams, floquet_decompose, one_period_operator, trajectory
from .fockcore import (
    PhasePoint,
    coherent_state,
    displacement_operator,
    fock_state,
    number_operator,
    phase_point_to_alpha,
)
from .husimi import PhaseGrid, q_average_finite, q_average_floquet
from .synth import (
    StabilizationSpec,
    SynthesisSpec,
    barrier_passage_state,
    find_doublets,
    doublet_state,
    floquet_weights,
    fock_truncate,
    stabilized_state,
    transport_probability,
)

# states that only exist when their construction succeeds
_DERIVED = {"stab", "stab_theory", "doublet", "doublet_theory"}

OUTPUT_TYPES = (
    "classical_portrait",
    "quasienergies",
    "q_grid",
    "q_t",
    "correlations",
    "weights",
    "doublets",
    "states",
)


def measure_displaced_ground(psi: np.ndarray, B: PhasePoint, eta: float) -> float:
    """Ground-state population after displacing by -beta, beta the label of B.

    Emulates the laboratory readout of Q(beta) = |<beta|psi>|^2.
    """
    beta = phase_point_to_alpha(B, eta)
    N = len(psi)
    # the physical displacement acts on an unbounded ladder; pad so the
    # truncated operator is accurate on the support of psi
    n_pad = N + int(abs(beta) ** 2 + 12 * abs(beta) + 40)
    D = displacement_operator(-beta, n_pad)
    return float(abs(D[0, :N] @ psi) ** 2)


@dataclass
class ScenarioConfig:
    name: str
    trap: TrapParams
    initial: dict
    outputs: list
    grid: PhaseGrid | None = None
    synthesis: SynthesisSpec | None = None
    stabilization: StabilizationSpec | None = None
    stabilization_center: PhasePoint | None = None
    doublets: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        try:
            return cls._from_dict(d)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid scenario config: {exc}") from exc

    @classmethod
    def _from_dict(cls, d: dict) -> "ScenarioConfig":
        d = copy.deepcopy(d)
        trap = TrapParams(**d["trap"])
        eta = trap.eta
        grid = None
        if d.get("grid") is not None:
            g = dict(d["grid"])
            if "eta" in g and g["eta"] != eta:
                raise ConfigError(f"grid eta {g['eta']} differs from trap eta {eta}")
            g["eta"] = eta
            grid = PhaseGrid(**g)
        initial = d.get("initial", {"fock": 0})
        if len(initial) != 1 or next(iter(initial)) not in ("fock", "coherent", "amplitudes"):
            raise ConfigError("initial must be one of {fock, coherent, amplitudes}")
        if "amplitudes" in initial and len(initial["amplitudes"]) != trap.N:
            raise ConfigError("initial amplitudes length differs from N")
        synthesis = SynthesisSpec(**d["synthesis"]) if d.get("synthesis") else None
        stab, center = None, None
        if d.get("stabilization"):
            s = dict(d["stabilization"])
            center = PhasePoint(*s.pop("center"))
            stab = StabilizationSpec(**s)
        outputs = d.get("outputs") or []
        if not outputs:
            raise ConfigError("output list must be nonempty")
        for o in outputs:
            if o.get("type") not in OUTPUT_TYPES:
                raise ConfigError(f"unknown output type {o.get('type')!r}")
            if o["type"] in ("q_grid", "q_t") and grid is None:
                raise ConfigError(f"output {o['type']} needs a grid")
        if grid is not None:
            try:
                grid.check_truncation(trap.N)
            except TruncationLoss as exc:
                raise ConfigError(str(exc)) from exc
        return cls(
            name=d.get("name", "scenario"),
            trap=trap,
            initial=initial,
            outputs=outputs,
            grid=grid,
            synthesis=synthesis,
            stabilization=stab,
            stabilization_center=center,
            doublets=d.get("doublets", {}),
            raw=d,
        )


def load_config(path_or_preset) -> dict:
    """Parse a JSON config file, or a shipped preset by name (fig1, fig2, fig3)."""
    p = Path(str(path_or_preset))
    if p.suffix != ".json" and not p.exists():
        ref = resources.files("kickedion") / "presets" / f"{path_or_preset}.json"
        if not ref.is_file():
            raise ConfigError(f"unknown preset {path_or_preset!r}")
        return json.loads(ref.read_text(encoding="utf-8"))
    try:
        with open(p, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc


def preset_names() -> list[str]:
    root = resources.files("kickedion") / "presets"
    return sorted(r.name[:-5] for r in root.iterdir() if r.name.endswith(".json"))


def _initial_state(cfg: ScenarioConfig) -> np.ndarray:
    (kind, val), = cfg.initial.items()
    N = cfg.trap.N
    if kind == "fock":
        return fock_state(int(val), N)
    if kind == "coherent":
        return coherent_state(phase_point_to_alpha(PhasePoint(*val), cfg.trap.eta), N)
    amps = np.array(val, dtype=float)
    psi = amps[:, 0] + 1j * amps[:, 1]
    return psi / np.linalg.norm(psi)


@dataclass
class RunManifest:
    config: dict
    files: list = field(default_factory=list)
    overlaps: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "files": self.files,
            "overlaps": self.overlaps,
            "warnings": sorted(set(self.warnings)),
        }


class _Runner:
    def __init__(self, cfg: ScenarioConfig, out_dir: Path):
        self.cfg = cfg
        self.out = out_dir
        self.manifest = RunManifest(cfg.raw)
        self.written: list[Path] = []
        self._decomp = None
        self._U = None
        self.states: dict[str, np.ndarray] = {}

    # lazily built shared pieces
    @property
    def U(self):
        if self._U is None:
            self._U = one_period_operator(self.cfg.trap)
        return self._U

    @property
    def decomp(self):
        if self._decomp is None:
            self._decomp = floquet_decompose(self.U, source=self.cfg.trap)
            if self._decomp.degenerate:
                self.manifest.warnings.append("DegeneracyWarning")
        return self._decomp

    def add(self, *paths):
        self.written.extend(Path(p) for p in paths)

    def coherent(self, pt):
        return coherent_state(phase_point_to_alpha(PhasePoint(*pt), self.cfg.trap.eta), self.cfg.trap.N)

    def build_states(self):
        cfg = self.cfg
        psi0 = _initial_state(cfg)
        self.states["initial"] = psi0
        ov = self.manifest.overlaps
        if cfg.synthesis is not None:
            spec = cfg.synthesis
            phi_a, phi_b = self.coherent(spec.A), self.coherent(spec.B)
            self.states["phi_A"], self.states["phi_B"] = phi_a, phi_b
            ov["P_phiA_phiB"] = transport_probability(self.decomp, phi_a, phi_b)
            for sign in ("barrier", "passage"):
                s = SynthesisSpec(**{**cfg.raw["synthesis"], "sign": sign})
                res = barrier_passage_state(self.decomp, s, phi_a, phi_b)
                if "EmptySelection" in res.flags:
                    self.manifest.warnings.append("EmptySelection")
                tr = fock_truncate(res.state, spec.n_exp)
                self.states[f"{sign}_theory"] = res.state
                self.states[sign] = tr.state
                ov[f"{sign}_n_selected"] = len(res.selected)
                ov[f"{sign}_truncation_overlap"] = tr.overlap
                ov[f"{sign}_overlap_phiA"] = float(abs(np.vdot(phi_a, tr.state)) ** 2)
                ov[f"{sign}_theory_overlap_phiA"] = res.info["overlap_A"]
                ov[f"P_{sign}_theory_phiB"] = transport_probability(self.decomp, res.state, phi_b)
                ov[f"P_{sign}_phiB"] = transport_probability(self.decomp, tr.state, phi_b)
        if cfg.stabilization is not None:
            phi = self.coherent(cfg.stabilization_center)
            self.states["stab_reference"] = phi
            try:
                res = stabilized_state(self.decomp, phi, cfg.stabilization)
            except EmptySelection:
                self.manifest.warnings.append("EmptySelection")
            else:
                self.manifest.warnings.extend(sorted(res.flags))
                tr = fock_truncate(res.state, cfg.stabilization.n_exp)
                self.states["stab_theory"] = res.state
                self.states["stab"] = tr.state
                ov["stab_truncation_overlap"] = tr.overlap
                ov.update({f"stab_{k}": v for k, v in res.info.items()})

    def selected(self, out: dict) -> list[str]:
        names = out.get("states")
        if names is None:
            return [n for n in self.states if n != "phi_B"]
        unknown = [n for n in names if n not in self.states and n not in _DERIVED]
        if unknown:
            raise ConfigError(f"unknown states {unknown}")
        for n in names:
            if n not in self.states:
                self.manifest.warnings.append(f"MissingState: {n}")
        return [n for n in names if n in self.states]

    def run_output(self, out: dict):
        kind = out["type"]
        cfg = self.cfg
        if kind == "classical_portrait":
            ks = out.get("k", [cfg.trap.k])
            seeds = [PhasePoint(*s) for s in out["seeds"]]
            for k in ks:
                cloud = portrait(ClassicalParams(k, cfg.trap.nu_tau), seeds, int(out.get("steps", 500)))
                self.add(io.emit_portrait_csv(cloud, self.out / f"portrait_k{k:g}.csv"))
        elif kind == "quasienergies":
            d = self.decomp
            nbar = (np.abs(d.modes) ** 2).T @ np.diag(number_operator(d.N))
            rows = ((mu, d.eps[mu], nbar[mu]) for mu in range(d.N))
            self.add(io.write_csv(self.out / "quasienergies.csv", ["mu", "eps", "mean_n"], rows))
        elif kind == "weights":
            d = self.decomp
            for name in self.selected(out):
                w = floquet_weights(d, self.states[name])
                rows = ((mu, d.eps[mu], w[mu]) for mu in range(d.N))
                self.add(io.write_csv(self.out / f"weights_{name}.csv", ["mu", "eps", "weight"], rows))
        elif kind == "q_t":
            for name in self.selected(out):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", DegeneracyWarning)
                    field_ = q_average_floquet(self.decomp, self.states[name], cfg.grid)
                self.add(io.emit_qfield_csv(field_, self.out / f"qt_{name}.csv"))
                self.add(*io.emit_qfield_matrix(field_, self.out / f"qt_{name}.npy"))
        elif kind == "q_grid":
            kicks = [int(m) for m in out.get("kicks", [0])]
            tag = "-".join(str(m) for m in kicks) if len(kicks) <= 4 else f"{kicks[0]}..{kicks[-1]}"
            for name in self.selected(out):
                field_ = q_average_finite(self.U, self.states[name], kicks, cfg.grid)
                self.add(io.emit_qfield_csv(field_, self.out / f"q_{name}_kicks{tag}.csv"))
                self.add(*io.emit_qfield_matrix(field_, self.out / f"q_{name}_kicks{tag}.npy"))
        elif kind == "correlations":
            M = int(out.get("M", 200))
            target = out.get("target")
            for name in self.selected(out):
                traj = trajectory(self.U, self.states[name], M)
                C = traj @ np.conj(self.states[name])
                self.add(io.emit_correlation_csv(C, self.out / f"autocorr_{name}.csv"))
                ref = self.states.get(target) if target else self.states.get("phi_B")
                if ref is not None:
                    A = traj @ np.conj(ref)
                    self.add(io.emit_correlation_csv(A, self.out / f"crosscorr_{name}.csv"))
                    self.manifest.overlaps[f"mean_P_{name}"] = float(np.mean(np.abs(A) ** 2))
        elif kind == "doublets":
            opts = {"weight_floor": 0.005, "split_ceiling": 2.5e-3, **cfg.doublets, **out.get("options", {})}
            for name in self.selected(out):
                ds = find_doublets(self.decomp, self.states[name], opts["weight_floor"], opts["split_ceiling"])
                if ds.odd_leftover:
                    self.manifest.warnings.append("OddLeftover")
                rows = (
                    (p.i, p.j, self.decomp.eps[p.i], self.decomp.eps[p.j], p.splitting, p.weight, p.tunneling_period)
                    for p in ds.pairs
                )
                self.add(io.write_csv(
                    self.out / f"doublets_{name}.csv",
                    ["mu_i", "mu_j", "eps_i", "eps_j", "splitting", "weight", "period"],
                    rows,
                ))
                self.manifest.overlaps[f"doublets_{name}_count"] = len(ds)
                self.manifest.overlaps[f"doublets_{name}_weight"] = ds.total_weight
                if ds.pairs and name == "initial":
                    st = doublet_state(self.decomp, self.states[name], ds.pairs[0])
                    n_exp = int(opts.get("n_exp", 25))
                    tr = fock_truncate(st, n_exp)
                    self.states["doublet_theory"], self.states["doublet"] = st, tr.state
                    self.manifest.overlaps["doublet_truncation_overlap"] = tr.overlap
        elif kind == "states":
            meta = {"scenario": cfg.name, "trap": cfg.raw["trap"]}
            for name in self.selected(out):
                self.add(io.emit_state_json(self.states[name], self.out / f"state_{name}.json", {**meta, "state": name}))


def run_scenario(config: ScenarioConfig | dict, out_dir, only=None) -> RunManifest:
    """Run a scenario and write its artifacts plus ``manifest.json`` to ``out_dir``.

    ``only`` restricts the outputs to the given types. Non-fatal module
    errors are recorded as manifest warnings.
    """
    cfg = config if isinstance(config, ScenarioConfig) else ScenarioConfig.from_dict(config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    runner = _Runner(cfg, out_dir)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegeneracyWarning)
        runner.build_states()
        # doublet states feed later outputs, so run doublets first
        outputs = sorted(cfg.outputs, key=lambda o: o["type"] != "doublets")
        for out in outputs:
            if only is not None and out["type"] not in only:
                continue
            try:
                runner.run_output(out)
            except TruncationLoss as exc:
                runner.manifest.warnings.append(f"TruncationLoss: {exc}")
            except KickedIonError as exc:
                if isinstance(exc, ConfigError):
                    raise
                runner.manifest.warnings.append(f"{type(exc).__name__}: {exc}")
    for w in caught:
        if issubclass(w.category, DegeneracyWarning):
            runner.manifest.warnings.append("DegeneracyWarning")
    m = runner.manifest
    m.files = [
        {"path": p.name, "sha256": io.sha256(p)} for p in sorted(set(runner.written), key=lambda p: p.name)
    ]
    io.write_json(out_dir / "manifest.json", m.to_dict())
    return m
